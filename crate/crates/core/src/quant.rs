//! Fixed-point energy arithmetic shared by the reference chains and the
//! hardware pipeline.
//!
//! The machine's integer datapath works on two's-complement values scaled
//! by `2^frac_bits` (default 16). Product terms are computed in 64-bit and
//! rescaled with round-half-up; every helper here is the single source of
//! truth for both the compiler-generated memory images and the reference
//! chains running in machine arithmetic, so the two sides agree bit for
//! bit.

use thiserror::Error;

/// Default fractional bits of the 32-bit fixed-point format (Q15.16).
pub const DEFAULT_FRAC_BITS: u32 = 16;

#[derive(Debug, Error, PartialEq)]
pub enum QuantError {
    #[error("value {0} overflows the 32-bit fixed-point range at {1} fractional bits")]
    Overflow(f64, u32),
    #[error("value {0} is not finite")]
    NonFinite(f64),
}

/// Numeric mode of the compute datapath.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyArith {
    /// 32-bit two's-complement fixed point; the golden-test default.
    Fixed { frac_bits: u32 },
    /// IEEE-754 single precision (log-domain workloads).
    F32,
}

impl Default for EnergyArith {
    fn default() -> Self {
        EnergyArith::Fixed {
            frac_bits: DEFAULT_FRAC_BITS,
        }
    }
}

/// Quantize a real energy to fixed point (round half away from zero).
pub fn quantize(x: f64, frac_bits: u32) -> Result<i32, QuantError> {
    if !x.is_finite() {
        return Err(QuantError::NonFinite(x));
    }
    let scaled = (x * (1i64 << frac_bits) as f64).round();
    if scaled > i32::MAX as f64 || scaled < i32::MIN as f64 {
        return Err(QuantError::Overflow(x, frac_bits));
    }
    Ok(scaled as i32)
}

/// Back to a real number.
#[inline]
pub fn descale(q: i64, frac_bits: u32) -> f64 {
    q as f64 / (1i64 << frac_bits) as f64
}

/// Fixed-point multiply with round-half-up rescaling, the exact operation
/// of the datapath's scaling multiplier.
#[inline]
pub fn fixed_mul(a: i64, b: i64, frac_bits: u32) -> i64 {
    let prod = a * b;
    (prod + (1i64 << (frac_bits - 1))) >> frac_bits
}

/// Range check for a value accumulated on the 32-bit datapath.
#[inline]
pub fn fits_i32(v: i64) -> bool {
    v >= i32::MIN as i64 && v <= i32::MAX as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_roundtrips_small_values() {
        for &x in &[0.0, 1.0, -2.5, 0.125, 3.1415] {
            let q = quantize(x, 16).unwrap();
            assert!((descale(q as i64, 16) - x).abs() <= 0.5 / 65536.0 + 1e-12);
        }
    }

    #[test]
    fn quantize_rejects_overflow_and_nan() {
        assert!(quantize(1e9, 16).is_err());
        assert!(quantize(f64::NAN, 16).is_err());
        assert!(quantize(f64::INFINITY, 16).is_err());
    }

    #[test]
    fn fixed_mul_matches_real_product() {
        let a = quantize(1.5, 16).unwrap() as i64;
        let b = quantize(-2.25, 16).unwrap() as i64;
        let p = fixed_mul(a, b, 16);
        assert!((descale(p, 16) + 3.375).abs() < 1.0 / 65536.0);
    }

    #[test]
    fn fixed_mul_by_one_is_identity() {
        let one = 1i64 << 16;
        for &v in &[0i64, 12345, -9876, 65536, -65536] {
            assert_eq!(fixed_mul(v, one, 16), v);
        }
    }
}
