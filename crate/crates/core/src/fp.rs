//! Floating-point comparison helpers.

/// Distance between two finite doubles in units in the last place.
///
/// Maps each value onto the integer number line of ordered f64 bit patterns,
/// so 0 means bitwise equal and 1 means adjacent representable values.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    fn ordered(x: f64) -> i64 {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    }
    ordered(a).abs_diff(ordered(b))
}
