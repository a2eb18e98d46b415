use super::Field;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("value {value:#x} does not fit in field '{field}' ({width} bits)")]
pub struct RangeError {
    pub field: String,
    pub value: u64,
    pub width: u32,
}

/// Replace bits `[msb:lsb]` of `reg_value` with `value`, leaving the other
/// bits untouched.
pub fn pack_field(reg_value: u64, field: &Field, value: u64) -> Result<u64, RangeError> {
    if value & !field.value_mask() != 0 {
        return Err(RangeError {
            field: field.name.clone(),
            value,
            width: field.width(),
        });
    }
    Ok((reg_value & !field.mask()) | (value << field.lsb))
}

/// Bits `[msb:lsb]` of `reg_value`, shifted down.
pub fn extract_field(reg_value: u64, field: &Field) -> u64 {
    (reg_value >> field.lsb) & field.value_mask()
}
