use std::fmt::Write;

use super::{Endianness, RegisterMap};
use crate::markup::slugify;

/// Human-readable view of one register map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterTables {
    pub addrmap: String,
    pub display_name: Option<String>,
    pub desc: Option<String>,
    pub endianness: Endianness,
    pub registers: Vec<RegisterTable>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterTable {
    pub name: String,
    pub display_name: Option<String>,
    pub desc: Option<String>,
    pub offset: u64,
    pub regwidth: u32,
    /// Rows ordered by msb, highest first.
    pub rows: Vec<TableRow>,
}

/// One row: Bits, Name, SW, HW, Reset, Description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub bits: String,
    pub name: String,
    pub sw: String,
    pub hw: String,
    pub reset: String,
    pub description: String,
}

impl TableRow {
    pub const HEADER: [&'static str; 6] = ["Bits", "Name", "SW", "HW", "Reset", "Description"];

    pub fn cells(&self) -> [&str; 6] {
        [
            &self.bits,
            &self.name,
            &self.sw,
            &self.hw,
            &self.reset,
            &self.description,
        ]
    }
}

impl RegisterTable {
    /// `offset 0x10, 32 bits`
    pub fn summary(&self) -> String {
        format!("offset {:#X}, {} bits", self.offset, self.regwidth)
    }
}

const NONE: &str = "-";

/// Build one table per register. A register without fields gets a single
/// `(reserved)` row covering the whole register.
pub fn render_tables(map: &RegisterMap) -> RegisterTables {
    let registers = map
        .registers
        .iter()
        .map(|reg| {
            let mut fields: Vec<_> = reg.fields.iter().collect();
            fields.sort_by(|a, b| b.msb.cmp(&a.msb).then(b.lsb.cmp(&a.lsb)));
            let mut rows: Vec<TableRow> = fields
                .into_iter()
                .map(|f| TableRow {
                    bits: format!("{}:{}", f.msb, f.lsb),
                    name: f.name.clone(),
                    sw: f.sw.map_or_else(|| NONE.to_string(), |a| a.to_string()),
                    hw: f.hw.map_or_else(|| NONE.to_string(), |a| a.to_string()),
                    reset: f
                        .reset
                        .map_or_else(|| NONE.to_string(), |r| format!("{r:#X}")),
                    description: f.desc.clone().unwrap_or_default(),
                })
                .collect();
            if rows.is_empty() {
                rows.push(TableRow {
                    bits: format!("{}:0", reg.regwidth - 1),
                    name: "(reserved)".to_string(),
                    sw: NONE.to_string(),
                    hw: NONE.to_string(),
                    reset: NONE.to_string(),
                    description: String::new(),
                });
            }
            RegisterTable {
                name: reg.name.clone(),
                display_name: reg.display_name.clone(),
                desc: reg.desc.clone(),
                offset: reg.offset,
                regwidth: reg.regwidth,
                rows,
            }
        })
        .collect();
    RegisterTables {
        addrmap: map.name.clone(),
        display_name: map.display_name.clone(),
        desc: map.desc.clone(),
        endianness: map.endianness,
        registers,
    }
}

impl RegisterTables {
    pub fn to_html(&self) -> String {
        use crate::markup::escape_html as esc;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "<div class=\"register-map\" id=\"regmap-{}\">",
            esc(&slugify(&self.addrmap))
        );
        let title = self.display_name.as_deref().unwrap_or(&self.addrmap);
        let _ = writeln!(
            out,
            "<p class=\"addrmap\"><strong>{}</strong> (endianness: {})</p>",
            esc(title),
            self.endianness
        );
        if let Some(desc) = &self.desc {
            let _ = writeln!(out, "<p>{}</p>", esc(desc));
        }
        for reg in &self.registers {
            let _ = write!(
                out,
                "<p class=\"register-summary\"><strong>{}</strong>",
                esc(&reg.name)
            );
            if let Some(dn) = &reg.display_name {
                let _ = write!(out, " ({})", esc(dn));
            }
            let _ = write!(out, ": {}", reg.summary());
            if let Some(desc) = &reg.desc {
                let _ = write!(out, ". {}", esc(desc));
            }
            out.push_str("</p>\n<table class=\"register\">\n<thead><tr>");
            for h in TableRow::HEADER {
                let _ = write!(out, "<th>{h}</th>");
            }
            out.push_str("</tr></thead>\n<tbody>\n");
            for row in &reg.rows {
                out.push_str("<tr>");
                for cell in row.cells() {
                    let _ = write!(out, "<td>{}</td>", esc(cell));
                }
                out.push_str("</tr>\n");
            }
            out.push_str("</tbody>\n</table>\n");
        }
        out.push_str("</div>\n");
        out
    }
}
