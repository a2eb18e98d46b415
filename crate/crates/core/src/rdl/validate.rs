use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::{Endianness, RegisterMap};

/// Completeness rules for register descriptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RdlRule {
    /// Missing required field property.
    C1,
    /// Overlapping fields within a register.
    C2,
    /// Field exceeds the register width.
    C3,
    /// Overlapping register address ranges.
    C4,
    /// Address map endianness unspecified.
    C5,
    /// Register without a description.
    C6,
    /// Reset value does not fit in the field.
    C7,
}

impl RdlRule {
    pub const ALL: [RdlRule; 7] = [
        RdlRule::C1,
        RdlRule::C2,
        RdlRule::C3,
        RdlRule::C4,
        RdlRule::C5,
        RdlRule::C6,
        RdlRule::C7,
    ];

    pub fn id(self) -> &'static str {
        match self {
            RdlRule::C1 => "RDL-C1",
            RdlRule::C2 => "RDL-C2",
            RdlRule::C3 => "RDL-C3",
            RdlRule::C4 => "RDL-C4",
            RdlRule::C5 => "RDL-C5",
            RdlRule::C6 => "RDL-C6",
            RdlRule::C7 => "RDL-C7",
        }
    }
}

impl fmt::Display for RdlRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for RdlRule {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        RdlRule::ALL.into_iter().find(|r| r.id() == s).ok_or(())
    }
}

/// Field properties that can be made mandatory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FieldProp {
    Name,
    Desc,
    Sw,
    Hw,
    Reset,
    UpdateRate,
}

impl FieldProp {
    pub fn name(self) -> &'static str {
        match self {
            FieldProp::Name => "name",
            FieldProp::Desc => "desc",
            FieldProp::Sw => "sw",
            FieldProp::Hw => "hw",
            FieldProp::Reset => "reset",
            FieldProp::UpdateRate => "update_rate",
        }
    }
}

impl FromStr for FieldProp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "name" => FieldProp::Name,
            "desc" => FieldProp::Desc,
            "sw" | "sw_access" => FieldProp::Sw,
            "hw" | "hw_access" => FieldProp::Hw,
            "reset" => FieldProp::Reset,
            "update_rate" => FieldProp::UpdateRate,
            other => return Err(format!("unknown field property '{other}'")),
        })
    }
}

impl fmt::Display for FieldProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `{sw, reset, desc}`.
pub fn default_required_props() -> BTreeSet<FieldProp> {
    [FieldProp::Sw, FieldProp::Reset, FieldProp::Desc].into()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RdlViolation {
    pub rule: RdlRule,
    pub register: Option<String>,
    pub field: Option<String>,
    pub line: usize,
    pub message: String,
}

/// Check a register map against the completeness catalogue. Violations are
/// returned ordered by source line.
pub fn validate_rdl(
    map: &RegisterMap,
    required_field_props: &BTreeSet<FieldProp>,
) -> Vec<RdlViolation> {
    let mut out = Vec::new();
    let mut push = |rule, register: Option<&str>, field: Option<&str>, line, message: String| {
        out.push(RdlViolation {
            rule,
            register: register.map(str::to_string),
            field: field.map(str::to_string),
            line,
            message,
        })
    };

    if map.endianness == Endianness::Unspecified {
        push(
            RdlRule::C5,
            None,
            None,
            map.line,
            format!(
                "addrmap '{}' does not specify endianness (bigendian or littleendian)",
                map.name
            ),
        );
    }

    for (ri, reg) in map.registers.iter().enumerate() {
        if reg.desc.as_deref().is_none_or(|d| d.trim().is_empty()) {
            push(
                RdlRule::C6,
                Some(&reg.name),
                None,
                reg.line,
                format!("register '{}' has no desc", reg.name),
            );
        }

        for other in &map.registers[..ri] {
            let (a, b) = (other.byte_range(), reg.byte_range());
            if a.start < b.end && b.start < a.end {
                push(
                    RdlRule::C4,
                    Some(&reg.name),
                    None,
                    reg.line,
                    format!(
                        "register '{}' bytes [{:#x}, {:#x}) overlap register '{}' bytes [{:#x}, {:#x})",
                        reg.name, b.start, b.end, other.name, a.start, a.end
                    ),
                );
            }
        }

        for (fi, field) in reg.fields.iter().enumerate() {
            for prop in required_field_props {
                let present = match prop {
                    FieldProp::Name => field.display_name.is_some(),
                    FieldProp::Desc => field.desc.is_some(),
                    FieldProp::Sw => field.sw.is_some(),
                    FieldProp::Hw => field.hw.is_some(),
                    FieldProp::Reset => field.reset.is_some(),
                    FieldProp::UpdateRate => field.update_rate.is_some(),
                };
                if !present {
                    push(
                        RdlRule::C1,
                        Some(&reg.name),
                        Some(&field.name),
                        field.line,
                        format!(
                            "field '{}.{}' is missing required property '{prop}'",
                            reg.name, field.name
                        ),
                    );
                }
            }

            if field.msb >= reg.regwidth {
                push(
                    RdlRule::C3,
                    Some(&reg.name),
                    Some(&field.name),
                    field.line,
                    format!(
                        "field '{}.{}' [{}:{}] exceeds regwidth {}",
                        reg.name, field.name, field.msb, field.lsb, reg.regwidth
                    ),
                );
            }

            for other in &reg.fields[..fi] {
                if field.lsb <= other.msb && other.lsb <= field.msb {
                    push(
                        RdlRule::C2,
                        Some(&reg.name),
                        Some(&field.name),
                        field.line,
                        format!(
                            "field '{}.{}' [{}:{}] overlaps field '{}' [{}:{}]",
                            reg.name,
                            field.name,
                            field.msb,
                            field.lsb,
                            other.name,
                            other.msb,
                            other.lsb
                        ),
                    );
                }
            }

            if !field.reset_in_range() {
                push(
                    RdlRule::C7,
                    Some(&reg.name),
                    Some(&field.name),
                    field.line,
                    format!(
                        "field '{}.{}' reset {:#x} does not fit in {} bits",
                        reg.name,
                        field.name,
                        field.reset.unwrap_or_default(),
                        field.width()
                    ),
                );
            }
        }
    }

    out.sort_by_key(|v| v.line);
    out
}
