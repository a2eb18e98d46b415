//! Embedded register descriptions: a SystemRDL subset.
//!
//! Supported: one `addrmap` containing `reg`s containing `field`s, byte
//! offsets with `@`, bit ranges `[msb:lsb]` and the properties `name`,
//! `desc`, `regwidth`, `sw`, `hw`, `reset`, `update_rate`, `bigendian` and
//! `littleendian`. No parameters, arrays, enums or nested address maps.

mod bits;
mod digest;
mod header;
mod lexer;
mod parser;
mod tables;
mod validate;

use std::fmt;
use std::str::FromStr;

pub use bits::{extract_field, pack_field, RangeError};
pub use digest::{digest, Digest, DigestError};
pub use header::{
    generate_header, generate_header_checked, header_identifier, verify_header_checksum,
    ChecksumError, CHECKSUM_PLACEHOLDER, CHECKSUM_TAG,
};
pub use parser::{parse_rdl, parse_rdl_at};
pub use tables::{render_tables, RegisterTable, RegisterTables, TableRow};
pub use validate::{default_required_props, validate_rdl, FieldProp, RdlRule, RdlViolation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endianness {
    Big,
    Little,
    Unspecified,
}

impl fmt::Display for Endianness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Endianness::Big => "big",
            Endianness::Little => "little",
            Endianness::Unspecified => "unspecified",
        })
    }
}

/// Software access rights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwAccess {
    R,
    W,
    Rw,
}

/// Hardware access rights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HwAccess {
    R,
    W,
    Rw,
    Na,
}

impl fmt::Display for SwAccess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SwAccess::R => "r",
            SwAccess::W => "w",
            SwAccess::Rw => "rw",
        })
    }
}

impl fmt::Display for HwAccess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HwAccess::R => "r",
            HwAccess::W => "w",
            HwAccess::Rw => "rw",
            HwAccess::Na => "na",
        })
    }
}

impl FromStr for SwAccess {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "r" => Ok(SwAccess::R),
            "w" => Ok(SwAccess::W),
            "rw" => Ok(SwAccess::Rw),
            _ => Err(()),
        }
    }
}

impl FromStr for HwAccess {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "r" => Ok(HwAccess::R),
            "w" => Ok(HwAccess::W),
            "rw" => Ok(HwAccess::Rw),
            "na" => Ok(HwAccess::Na),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterMap {
    pub name: String,
    pub display_name: Option<String>,
    pub desc: Option<String>,
    pub endianness: Endianness,
    pub registers: Vec<Register>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub display_name: Option<String>,
    pub desc: Option<String>,
    /// Width in bits: 8, 16, 32 or 64.
    pub regwidth: u32,
    /// Byte offset within the address map.
    pub offset: u64,
    pub fields: Vec<Field>,
    pub line: usize,
}

impl Register {
    /// Byte range `[offset, offset + regwidth / 8)`.
    pub fn byte_range(&self) -> std::ops::Range<u64> {
        self.offset..self.offset.saturating_add(u64::from(self.regwidth / 8))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    pub name: String,
    pub display_name: Option<String>,
    pub msb: u32,
    pub lsb: u32,
    pub sw: Option<SwAccess>,
    pub hw: Option<HwAccess>,
    pub reset: Option<u64>,
    pub desc: Option<String>,
    pub update_rate: Option<String>,
    pub line: usize,
}

impl Field {
    /// A bare field covering `[msb:lsb]` with no properties set.
    ///
    /// # Panics
    /// If `msb < lsb` or `msb > 63`.
    pub fn new(name: impl Into<String>, msb: u32, lsb: u32) -> Self {
        assert!(msb >= lsb && msb < 64, "invalid bit range [{msb}:{lsb}]");
        Field {
            name: name.into(),
            display_name: None,
            msb,
            lsb,
            sw: None,
            hw: None,
            reset: None,
            desc: None,
            update_rate: None,
            line: 0,
        }
    }

    pub fn width(&self) -> u32 {
        self.msb - self.lsb + 1
    }

    /// `width` low bits set.
    pub fn value_mask(&self) -> u64 {
        if self.width() >= 64 {
            u64::MAX
        } else {
            (1u64 << self.width()) - 1
        }
    }

    /// The field's bits within the register.
    pub fn mask(&self) -> u64 {
        self.value_mask() << self.lsb
    }

    /// Whether the reset value fits in `width` bits.
    pub fn reset_in_range(&self) -> bool {
        self.reset.is_none_or(|r| r & !self.value_mask() == 0)
    }
}
