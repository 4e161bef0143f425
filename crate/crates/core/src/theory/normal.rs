//! Standard normal density and distribution function.
//!
//! `Φ` goes through the musl `erfc` (via `libm`), accurate to about one ulp,
//! so the lower tail keeps full relative accuracy instead of cancelling in
//! `1 - Φ`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `φ(x) = exp(-x²/2) / sqrt(2π)`.
#[inline]
pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `Φ(x) = erfc(-x/√2) / 2`.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `E[A - sZ]_+` for `Z ~ N(0, 1)` and `s > 0`: `A·Φ(A/s) + s·φ(A/s)`.
#[inline]
pub fn positive_part_mean(a: f64, s: f64) -> f64 {
    let z = a / s;
    a * cdf(z) + s * pdf(z)
}

pub fn sqrt_2pi() -> f64 {
    (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_values() {
        // High-precision reference values of Φ.
        assert_relative_eq!(cdf(0.0), 0.5, max_relative = 1e-15);
        assert_relative_eq!(cdf(1.0), 0.841_344_746_068_542_9, max_relative = 1e-14);
        assert_relative_eq!(cdf(-1.0), 0.158_655_253_931_457_05, max_relative = 1e-14);
        assert_relative_eq!(cdf(2.5), 0.993_790_334_674_223_8, max_relative = 1e-14);
        assert_relative_eq!(cdf(-5.0), 2.866_515_718_791_939e-7, max_relative = 1e-13);
        assert_relative_eq!(cdf(-10.0), 7.619_853_024_160_527e-24, max_relative = 1e-12);
        assert_relative_eq!(pdf(0.0), INV_SQRT_2PI, max_relative = 1e-16);
        assert_relative_eq!(INV_SQRT_2PI * sqrt_2pi(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn positive_part_limits() {
        // Large positive A: E[A - sZ]_+ -> A. Large negative: -> 0.
        assert_relative_eq!(positive_part_mean(50.0, 1.0), 50.0, max_relative = 1e-14);
        assert!(positive_part_mean(-50.0, 1.0).abs() < 1e-300);
        // A = 0: s·φ(0).
        assert_relative_eq!(positive_part_mean(0.0, 2.0), 2.0 * INV_SQRT_2PI, max_relative = 1e-15);
    }
}
