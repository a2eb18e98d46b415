use super::lexer::{tokenize, Tok};
use super::{Endianness, Field, Register, RegisterMap};
use crate::ParseError;

/// Parse the RDL text of one rdl-block or `.rdl` file.
pub fn parse_rdl(source: &str) -> Result<RegisterMap, ParseError> {
    parse_rdl_at(source, 1)
}

/// Like [`parse_rdl`], with line numbers shifted so that the first line of
/// `source` is reported as `first_line` (for blocks embedded in a document).
pub fn parse_rdl_at(source: &str, first_line: usize) -> Result<RegisterMap, ParseError> {
    let shift = |e: ParseError| ParseError::new(e.line + first_line - 1, e.message);
    let toks = tokenize(source).map_err(shift)?;
    let last_line = source.split('\n').count();
    let mut p = Parser {
        toks,
        pos: 0,
        last_line,
    };
    let mut map = p.addrmap().map_err(shift)?;
    map.line += first_line - 1;
    for reg in &mut map.registers {
        reg.line += first_line - 1;
        for f in &mut reg.fields {
            f.line += first_line - 1;
        }
    }
    Ok(map)
}

enum Value {
    Ident(String),
    Int(u64),
    Str(String),
    Bool(bool),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Ident(_) => "identifier",
            Value::Int(_) => "integer",
            Value::Str(_) => "string",
            Value::Bool(_) => "boolean",
        }
    }
}

struct Prop {
    name: String,
    value: Value,
    line: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Scope {
    Addrmap,
    Reg,
    Field,
}

impl Scope {
    fn name(self) -> &'static str {
        match self {
            Scope::Addrmap => "addrmap",
            Scope::Reg => "reg",
            Scope::Field => "field",
        }
    }

    fn allows(self, prop: &str) -> bool {
        match self {
            Scope::Addrmap => matches!(prop, "name" | "desc" | "bigendian" | "littleendian"),
            Scope::Reg => matches!(prop, "name" | "desc" | "regwidth"),
            Scope::Field => matches!(
                prop,
                "name" | "desc" | "sw" | "hw" | "reset" | "update_rate"
            ),
        }
    }
}

const KNOWN_PROPS: [&str; 9] = [
    "name",
    "desc",
    "regwidth",
    "sw",
    "hw",
    "reset",
    "update_rate",
    "bigendian",
    "littleendian",
];

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    last_line: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, l)| *l)
            .unwrap_or(self.last_line)
    }

    fn next(&mut self, what: &str) -> Result<Tok, ParseError> {
        match self.toks.get(self.pos) {
            Some((t, _)) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(ParseError::new(
                self.line(),
                format!("unexpected end of input, expected {what}"),
            )),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let line = self.line();
        let found = self.next(&tok.describe())?;
        if found == tok {
            Ok(())
        } else {
            Err(ParseError::new(
                line,
                format!("expected {}, found {}", tok.describe(), found.describe()),
            ))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        let line = self.line();
        match self.next(what)? {
            Tok::Ident(s) => Ok(s),
            other => Err(ParseError::new(
                line,
                format!("expected {what}, found {}", other.describe()),
            )),
        }
    }

    fn int(&mut self, what: &str) -> Result<u64, ParseError> {
        let line = self.line();
        match self.next(what)? {
            Tok::Int(v, _) => Ok(v),
            other => Err(ParseError::new(
                line,
                format!("expected {what}, found {}", other.describe()),
            )),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn addrmap(&mut self) -> Result<RegisterMap, ParseError> {
        if !self.at_keyword("addrmap") {
            return Err(ParseError::new(self.line(), "exactly one addrmap expected"));
        }
        let line = self.line();
        self.pos += 1;
        let name = self.ident("addrmap name")?;
        self.expect(Tok::LBrace)?;
        let mut props = Vec::new();
        let mut registers: Vec<Register> = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::RBrace) => break,
                Some(Tok::Ident(s)) if s == "reg" => {
                    let reg = self.reg()?;
                    if registers.iter().any(|r| r.name == reg.name) {
                        return Err(ParseError::new(
                            reg.line,
                            format!("duplicate register name '{}'", reg.name),
                        ));
                    }
                    registers.push(reg);
                }
                Some(Tok::Ident(s)) if s == "addrmap" => {
                    return Err(ParseError::new(
                        self.line(),
                        "nested addrmap is not supported",
                    ))
                }
                Some(Tok::Ident(s)) if s == "field" => {
                    return Err(ParseError::new(
                        self.line(),
                        "field must be declared inside a reg",
                    ))
                }
                _ => props.push(self.prop(Scope::Addrmap)?),
            }
        }
        self.expect(Tok::RBrace)?;
        self.expect(Tok::Semi)?;
        if self.peek().is_some() {
            let msg = if self.at_keyword("addrmap") {
                "exactly one addrmap expected".to_string()
            } else {
                format!(
                    "unexpected {} after addrmap",
                    self.peek().map(Tok::describe).unwrap_or_default()
                )
            };
            return Err(ParseError::new(self.line(), msg));
        }

        let mut map = RegisterMap {
            name,
            display_name: None,
            desc: None,
            endianness: Endianness::Unspecified,
            registers,
            line,
        };
        let (mut big, mut little) = (false, false);
        for p in props {
            match p.name.as_str() {
                "name" => map.display_name = Some(string(p)?),
                "desc" => map.desc = Some(string(p)?),
                "bigendian" => big = boolean(p)?,
                "littleendian" => little = boolean(p)?,
                _ => unreachable!("scope-checked"),
            }
        }
        map.endianness = match (big, little) {
            (true, true) => {
                return Err(ParseError::new(
                    line,
                    "addrmap cannot be both bigendian and littleendian",
                ))
            }
            (true, false) => Endianness::Big,
            (false, true) => Endianness::Little,
            (false, false) => Endianness::Unspecified,
        };
        Ok(map)
    }

    fn reg(&mut self) -> Result<Register, ParseError> {
        let line = self.line();
        self.pos += 1;
        self.expect(Tok::LBrace)?;
        let mut props = Vec::new();
        let mut fields: Vec<Field> = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::RBrace) => break,
                Some(Tok::Ident(s)) if s == "field" => {
                    let f = self.field()?;
                    if fields.iter().any(|g| g.name == f.name) {
                        return Err(ParseError::new(
                            f.line,
                            format!("duplicate field name '{}'", f.name),
                        ));
                    }
                    fields.push(f);
                }
                Some(Tok::Ident(s)) if s == "reg" || s == "addrmap" => {
                    return Err(ParseError::new(
                        self.line(),
                        format!("nested {s} is not supported"),
                    ))
                }
                _ => props.push(self.prop(Scope::Reg)?),
            }
        }
        self.expect(Tok::RBrace)?;
        let name = self.ident("register instance name")?;
        if self.peek() != Some(&Tok::At) {
            return Err(ParseError::new(
                self.line(),
                format!("register '{name}' is missing '@ <offset>'"),
            ));
        }
        self.pos += 1;
        let offset = self.int("register byte offset")?;
        self.expect(Tok::Semi)?;

        let mut reg = Register {
            name,
            display_name: None,
            desc: None,
            regwidth: 32,
            offset,
            fields,
            line,
        };
        for p in props {
            match p.name.as_str() {
                "name" => reg.display_name = Some(string(p)?),
                "desc" => reg.desc = Some(string(p)?),
                "regwidth" => {
                    let l = p.line;
                    let w = integer(p)?;
                    if !matches!(w, 8 | 16 | 32 | 64) {
                        return Err(ParseError::new(
                            l,
                            format!("regwidth must be one of 8, 16, 32, 64 (got {w})"),
                        ));
                    }
                    reg.regwidth = w as u32;
                }
                _ => unreachable!("scope-checked"),
            }
        }
        Ok(reg)
    }

    fn field(&mut self) -> Result<Field, ParseError> {
        let line = self.line();
        self.pos += 1;
        self.expect(Tok::LBrace)?;
        let mut props = Vec::new();
        while self.peek() != Some(&Tok::RBrace) {
            props.push(self.prop(Scope::Field)?);
        }
        self.expect(Tok::RBrace)?;
        let name = self.ident("field instance name")?;
        self.expect(Tok::LBracket)?;
        let range_line = self.line();
        let msb = self.int("msb")?;
        self.expect(Tok::Colon)?;
        let lsb = self.int("lsb")?;
        self.expect(Tok::RBracket)?;
        self.expect(Tok::Semi)?;
        if msb < lsb {
            return Err(ParseError::new(
                range_line,
                format!("field '{name}': msb must be >= lsb"),
            ));
        }
        if msb > 63 {
            return Err(ParseError::new(
                range_line,
                format!("field '{name}': bit index {msb} out of range (max 63)"),
            ));
        }

        let mut field = Field::new(name, msb as u32, lsb as u32);
        field.line = line;
        for p in props {
            let l = p.line;
            match p.name.as_str() {
                "name" => field.display_name = Some(string(p)?),
                "desc" => field.desc = Some(string(p)?),
                "sw" => {
                    let v = ident_value(p)?;
                    field.sw = Some(v.parse().map_err(|_| {
                        ParseError::new(l, format!("invalid sw access '{v}', expected r, w or rw"))
                    })?);
                }
                "hw" => {
                    let v = ident_value(p)?;
                    field.hw = Some(v.parse().map_err(|_| {
                        ParseError::new(
                            l,
                            format!("invalid hw access '{v}', expected r, w, rw or na"),
                        )
                    })?);
                }
                "reset" => field.reset = Some(integer(p)?),
                "update_rate" => {
                    field.update_rate = Some(match p.value {
                        Value::Str(s) | Value::Ident(s) => s,
                        Value::Int(v) => v.to_string(),
                        Value::Bool(_) => {
                            return Err(ParseError::new(l, "update_rate must be a string"))
                        }
                    })
                }
                _ => unreachable!("scope-checked"),
            }
        }
        Ok(field)
    }

    /// `IDENT = value ;` or the boolean shorthand `IDENT ;`.
    fn prop(&mut self, scope: Scope) -> Result<Prop, ParseError> {
        let line = self.line();
        let name = self.ident("property name")?;
        if !KNOWN_PROPS.contains(&name.as_str()) {
            return Err(ParseError::new(
                line,
                format!("unsupported property '{name}'"),
            ));
        }
        if !scope.allows(&name) {
            return Err(ParseError::new(
                line,
                format!("property '{name}' is not allowed in {}", scope.name()),
            ));
        }
        let value = if self.peek() == Some(&Tok::Semi) {
            Value::Bool(true)
        } else {
            self.expect(Tok::Eq)?;
            let vline = self.line();
            match self.next("property value")? {
                Tok::Ident(s) if s == "true" => Value::Bool(true),
                Tok::Ident(s) if s == "false" => Value::Bool(false),
                Tok::Ident(s) => Value::Ident(s),
                Tok::Int(v, _) => Value::Int(v),
                Tok::Str(s) => Value::Str(s),
                other => {
                    return Err(ParseError::new(
                        vline,
                        format!("expected property value, found {}", other.describe()),
                    ))
                }
            }
        };
        self.expect(Tok::Semi)?;
        Ok(Prop { name, value, line })
    }
}

fn mismatch(p: &Prop, expected: &str) -> ParseError {
    ParseError::new(
        p.line,
        format!(
            "property '{}' expects {expected}, found {}",
            p.name,
            p.value.kind()
        ),
    )
}

fn string(p: Prop) -> Result<String, ParseError> {
    match p.value {
        Value::Str(s) => Ok(s),
        _ => Err(mismatch(&p, "a string")),
    }
}

fn integer(p: Prop) -> Result<u64, ParseError> {
    match p.value {
        Value::Int(v) => Ok(v),
        _ => Err(mismatch(&p, "an integer")),
    }
}

fn boolean(p: Prop) -> Result<bool, ParseError> {
    match p.value {
        Value::Bool(b) => Ok(b),
        _ => Err(mismatch(&p, "true or false")),
    }
}

fn ident_value(p: Prop) -> Result<String, ParseError> {
    match p.value {
        Value::Ident(s) => Ok(s),
        _ => Err(mismatch(&p, "an identifier")),
    }
}
