//! Closed-form expectations and bounds for the hinge objective under the
//! Gaussian model, plus the numerical cross-checks that back them.
//!
//! Write `c = <a, w>` and `c' = sqrt(‖w‖² - c²)`. Then `<x, w> = c<x, a> + c'Z`
//! with `Z` independent of `<x, a>`, which turns `E f_a(w)` into a
//! two-dimensional Gaussian integral depending only on `(c, c', r)`.

pub mod normal;
pub mod quadrature;

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec;
use crate::format::format_sig;
use crate::linalg::{dot, norm2};
use crate::model::{RngSeed, SparseClassifier};

use normal::{cdf, positive_part_mean, sqrt_2pi, INV_SQRT_2PI};
use quadrature::integrate;

/// Absolute tolerance for the quadratures below.
pub const QUAD_TOL: f64 = 1e-11;
/// Right end of the integration window; `φ(t)` underflows past ~38.6.
const TAIL: f64 = 39.0;

/// Overlap coordinates of a vector `w` relative to the unit classifier `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapCoords {
    pub c: f64,
    pub c_prime: f64,
    pub r: f64,
}

impl OverlapCoords {
    pub fn new(c: f64, c_prime: f64, r: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::invalid("c", "must be finite"));
        }
        if !(c_prime >= 0.0) || !c_prime.is_finite() {
            return Err(Error::invalid("c_prime", format!("must be >= 0, got {c_prime}")));
        }
        check_scale(r)?;
        Ok(Self { c, c_prime, r })
    }

    /// `c = <a, w>`, `c' = sqrt(max(‖w‖² - c², 0))`.
    pub fn from_vectors(a: &SparseClassifier, w: &[f64], r: f64) -> Result<Self> {
        if w.len() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: w.len(),
            });
        }
        let c = dot(a.weights(), w);
        let n = norm2(w);
        Self::new(c, (n * n - c * c).max(0.0).sqrt(), r)
    }
}

fn check_scale(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid("r", format!("scale must be positive, got {r}")));
    }
    Ok(())
}

/// `E f_a(a) = E[1 - r|ω|]_+` for `ω ~ N(0, 1)`, in closed form:
/// `2(Φ(1/r) - Φ(0)) - (2r/√(2π))(1 - exp(-1/(2r²)))`.
pub fn expected_fa_a(r: f64) -> Result<f64> {
    check_scale(r)?;
    let inv = 1.0 / r;
    // Φ(1/r) - 1/2 = erf(1/(r√2))/2, computed without cancellation.
    let central = 0.5 - cdf(-inv);
    let tail = -(-0.5 * inv * inv).exp_m1();
    Ok(2.0 * central - 2.0 * r * INV_SQRT_2PI * tail)
}

/// `E f_a(a)` by adaptive quadrature of `2∫_0^{1/r} (1 - rt) φ(t) dt`.
pub fn expected_fa_a_quadrature(r: f64) -> Result<f64> {
    check_scale(r)?;
    let end = (1.0 / r).min(TAIL);
    let q = integrate(|t| 2.0 * (1.0 - r * t) * normal::pdf(t), 0.0, end, QUAD_TOL);
    Ok(q.value)
}

/// `E f_a(w) = E[1 - cr|t_1| - c'r t_2]_+` over independent standard normals.
///
/// The `t_2` integral is done analytically,
/// `E_{t_2}[A - c'r t_2]_+ = A Φ(A/(c'r)) + c'r φ(A/(c'r))` with
/// `A = 1 - cr|t_1|`, and the remaining `t_1` integral by adaptive
/// quadrature on `[0, ∞)` using symmetry. For `c' = 0` the inner expectation
/// is `[A]_+` and the integral is cut at its kink.
pub fn expected_fa_w(o: &OverlapCoords) -> Result<f64> {
    check_scale(o.r)?;
    let cr = o.c * o.r;
    let s = o.c_prime * o.r;
    let kink = if cr > 0.0 { 1.0 / cr } else { f64::INFINITY };
    let value = if s == 0.0 {
        let end = kink.min(TAIL);
        piecewise(|t| 2.0 * (1.0 - cr * t) * normal::pdf(t), end, &[])
    } else {
        piecewise(
            |t| 2.0 * positive_part_mean(1.0 - cr * t, s) * normal::pdf(t),
            TAIL,
            &[kink],
        )
    };
    Ok(value)
}

/// Integrates over `[0, end]` with extra panel boundaries at `breaks` and at 8
/// (where the Gaussian weight has mostly died out).
fn piecewise<F: Fn(f64) -> f64>(f: F, end: f64, breaks: &[f64]) -> f64 {
    let mut points = vec![0.0, end];
    points.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < end));
    if end > 8.0 {
        points.push(8.0);
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let share = QUAD_TOL / points.len() as f64;
    points
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], share).value)
        .sum()
}

/// `g(z) = ∫_0^{1/z} (1 - zt) e^{-t²/2} dt = √(2π)(Φ(1/z) - 1/2) - z(1 - e^{-1/(2z²)})`
/// for `z > 0`. Positive and strictly decreasing.
pub fn kink_integral(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::invalid("z", format!("must be positive, got {z}")));
    }
    let inv = 1.0 / z;
    let central = 0.5 - cdf(-inv);
    Ok(sqrt_2pi() * central + z * (-0.5 * inv * inv).exp_m1())
}

/// `√(π/2) ∫_0^1 (1 - t) e^{-t²/2} dt`, evaluated by quadrature. About 0.5792.
pub fn proof_constant_057() -> f64 {
    let q = integrate(|t: f64| (1.0 - t) * (-0.5 * t * t).exp(), 0.0, 1.0, 1e-14);
    (PI / 2.0).sqrt() * q.value
}

/// Lower bound on `E(f_a(w) - f_a(a))` (the expectation-gap bound divided by π):
///
/// - `c <= 0`: `(1/π)(π/2 + c' r √(π/2) - √(2π)/r)`
/// - `c > 0`: `(1/π)(√(π/2) g(cr) + (c'/c) e^{-1/(2c²r²)} - √(2π)/r)`
///
/// Requires `c' > 0`. The value may be negative (uninformative) for small `r`.
pub fn thm2_lower_bound(o: &OverlapCoords) -> Result<f64> {
    check_scale(o.r)?;
    if !(o.c_prime > 0.0) {
        return Err(Error::invalid("c_prime", "the lower bound needs c' > 0"));
    }
    let half_pi_sqrt = (PI / 2.0).sqrt();
    let penalty = sqrt_2pi() / o.r;
    let inner = if o.c <= 0.0 {
        PI / 2.0 + o.c_prime * o.r * half_pi_sqrt - penalty
    } else {
        let cr = o.c * o.r;
        half_pi_sqrt * kink_integral(cr)?
            + (o.c_prime / o.c) * (-1.0 / (2.0 * cr * cr)).exp()
            - penalty
    };
    Ok(inner / PI)
}

/// Warning raised when parameters fall outside a bound's hypotheses. The
/// bound is still evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundWarning {
    EpsilonOutOfRange { eps: f64, max: f64 },
    ScaleBelowThreshold { bound: &'static str, r: f64, threshold: f64 },
}

impl std::fmt::Display for BoundWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundWarning::EpsilonOutOfRange { eps, max } => {
                write!(f, "eps = {eps} outside (0, {max})")
            }
            BoundWarning::ScaleBelowThreshold { bound, r, threshold } => {
                write!(f, "{bound}: r = {r} not above threshold {threshold:.4}")
            }
        }
    }
}

/// Uniform deviation bound `sup_K |f_a - E f_a| <= total` holding with
/// probability at least `1 - failure_prob`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationBound {
    /// `(4√(8π) + 8rR√(2 log 2d)) / √m`
    pub mu_bound: f64,
    /// `rR√(2 log 2d) / √m`
    pub mu_tilde_bound: f64,
    /// `(8√(8π) + 18rR√(2 log 2d)) / √m + u`
    pub total: f64,
    /// `8 exp(-mu²/32)` and `8 exp(-mu²/(32 r² R²))`.
    pub failure_terms: [f64; 2],
    /// Sum of the failure terms, clipped to `[0, 1]`.
    pub failure_prob: f64,
}

fn log_term(d: usize) -> f64 {
    (2.0 * (2.0 * d as f64).ln()).sqrt()
}

fn eight_sqrt_8pi() -> f64 {
    8.0 * (8.0 * PI).sqrt()
}

pub fn thm1_bound(d: usize, m: usize, r: f64, radius: f64, u: f64) -> Result<ConcentrationBound> {
    if d < 2 {
        return Err(Error::invalid("d", "need d >= 2"));
    }
    if m == 0 {
        return Err(Error::invalid("m", "need m >= 1"));
    }
    check_scale(r)?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid("R", "must be positive"));
    }
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::invalid("u", "must be positive"));
    }
    let sm = (m as f64).sqrt();
    let lt = log_term(d);
    let rr = r * radius;
    let mf = m as f64;
    let failure_terms = [
        8.0 * (-mf * u * u / 32.0).exp(),
        8.0 * (-mf * u * u / (32.0 * rr * rr)).exp(),
    ];
    Ok(ConcentrationBound {
        mu_bound: (4.0 * (8.0 * PI).sqrt() + 8.0 * rr * lt) / sm,
        mu_tilde_bound: rr * lt / sm,
        total: (eight_sqrt_8pi() + 18.0 * rr * lt) / sm + u,
        failure_terms,
        failure_prob: (failure_terms[0] + failure_terms[1]).clamp(0.0, 1.0),
    })
}

/// Explicit sample size and the error bound it buys for the ℓ1-SVM.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSizeReport {
    /// `ceil(4 ε⁻² (8√(8π) + (18 + t) rR √(2 log 2d))²)`
    pub m_required: u64,
    /// Bound on `‖a - â/‖â‖‖ / <a, â/‖â‖>`: `2e^{1/2}(πε + √(2π)/r)`.
    pub error_bound: f64,
    /// `8(exp(-t²r²R² log(2d)/16) + exp(-t² log(2d)/16))`, clipped to `[0, 1]`.
    pub failure_prob: f64,
    pub warnings: Vec<BoundWarning>,
}

pub const THM3_EPS_MAX: f64 = 0.18;

/// Sample-size requirement for the ℓ1-SVM error bound; `t` sharpens the
/// probability (1 recovers the basic form). Hypothesis violations
/// (`ε >= 0.18`, `r <= √(2π)/(0.57 - πε)`) are reported as warnings.
pub fn thm3_sample_size(eps: f64, r: f64, radius: f64, d: usize, t: f64) -> Result<SampleSizeReport> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid("eps", "must be positive"));
    }
    check_scale(r)?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid("R", "must be positive"));
    }
    if d < 2 {
        return Err(Error::invalid("d", "need d >= 2"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", "must be positive"));
    }
    let mut warnings = Vec::new();
    if eps >= THM3_EPS_MAX {
        warnings.push(BoundWarning::EpsilonOutOfRange {
            eps,
            max: THM3_EPS_MAX,
        });
    }
    let gap = 0.57 - PI * eps;
    let threshold = if gap > 0.0 { sqrt_2pi() / gap } else { f64::INFINITY };
    if !(r > threshold) {
        warnings.push(BoundWarning::ScaleBelowThreshold { bound: "l1-SVM sample size", r, threshold });
    }
    let lt = log_term(d);
    let inner = eight_sqrt_8pi() + (18.0 + t) * r * radius * lt;
    let m = (4.0 / (eps * eps) * inner * inner).ceil();
    if !m.is_finite() {
        return Err(Error::invalid("eps", "sample size overflows"));
    }
    let log2d = (2.0 * d as f64).ln();
    let fail = 8.0 * ((-t * t * r * r * radius * radius * log2d / 16.0).exp() + (-t * t * log2d / 16.0).exp());
    Ok(SampleSizeReport {
        m_required: if m >= u64::MAX as f64 { u64::MAX } else { (m as u64).max(1) },
        error_bound: 2.0 * 0.5f64.exp() * (PI * eps + sqrt_2pi() / r),
        failure_prob: fail.clamp(0.0, 1.0),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thm8Bound {
    /// `√(π/2) ε / (r (1 - exp(-1/(2r²))))`, bounding `‖a - â‖²` for the ℓ1∩ℓ2-SVM.
    pub value: f64,
    pub warnings: Vec<BoundWarning>,
}

/// Squared-error bound for the ℓ1∩ℓ2-SVM. Hypotheses `0 < ε < 1/2` and
/// `r > 2√(2π)/(1 - 2ε)` are checked and reported as warnings.
pub fn thm8_bound(eps: f64, r: f64) -> Result<Thm8Bound> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid("eps", "must be positive"));
    }
    check_scale(r)?;
    let mut warnings = Vec::new();
    if eps >= 0.5 {
        warnings.push(BoundWarning::EpsilonOutOfRange { eps, max: 0.5 });
    }
    let gap = 1.0 - 2.0 * eps;
    let threshold = if gap > 0.0 { 2.0 * sqrt_2pi() / gap } else { f64::INFINITY };
    if !(r > threshold) {
        warnings.push(BoundWarning::ScaleBelowThreshold { bound: "l1l2-SVM error", r, threshold });
    }
    let denom = -r * (-1.0 / (2.0 * r * r)).exp_m1();
    Ok(Thm8Bound {
        value: (PI / 2.0).sqrt() * eps / denom,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Samples per Monte Carlo block. Each block draws from its own region of
/// the ChaCha stream, so the estimate does not depend on thread count.
const MC_BLOCK: usize = 1 << 16;

/// Monte Carlo estimate of `E[1 - cr|t_1| - c'r t_2]_+`.
pub fn monte_carlo_fa(o: &OverlapCoords, n_samples: usize, seed: RngSeed) -> Result<McEstimate> {
    if n_samples < 1000 {
        return Err(Error::invalid("n_samples", "need at least 1000 samples"));
    }
    check_scale(o.r)?;
    let cr = o.c * o.r;
    let s = o.c_prime * o.r;
    let blocks = n_samples.div_ceil(MC_BLOCK);
    let partial = exec::map(blocks, |b| {
        let mut rng = seed.rng();
        rng.set_word_pos((b as u128) << 40);
        let count = MC_BLOCK.min(n_samples - b * MC_BLOCK);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..count {
            let t1: f64 = rng.sample(StandardNormal);
            let t2: f64 = rng.sample(StandardNormal);
            let v = (1.0 - cr * t1.abs() - s * t2).max(0.0);
            sum += v;
            sum_sq += v * v;
        }
        (sum, sum_sq)
    });
    let (sum, sum_sq) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), (s1, s2)| (a + s1, b + s2));
    let n = n_samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        samples: n_samples,
    })
}

/// Inputs for one [`BoundReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub d: usize,
    pub s: Option<usize>,
    pub radius: f64,
    pub r: f64,
    pub m: usize,
    pub eps: f64,
    /// Deviation level for the concentration bound; `None` uses
    /// `rR√(2 log 2d)/√m`.
    pub u: Option<f64>,
}

impl BoundParams {
    pub fn resolved_u(&self) -> f64 {
        self.u
            .unwrap_or_else(|| self.r * self.radius * log_term(self.d) / (self.m as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub params: BoundParams,
    pub u: f64,
    pub thm1: ConcentrationBound,
    pub thm3_error_bound: f64,
    /// Failure probability attached to the ℓ1-SVM error bound.
    pub thm3_prob: f64,
    pub thm8_error_bound: f64,
    pub sample_size_required: u64,
    pub warnings: Vec<BoundWarning>,
}

pub const BOUND_CSV_HEADER: [&str; 13] = [
    "d", "s", "R", "r", "m", "eps", "u", "thm1_total", "thm1_fail_prob", "thm3_bound", "thm3_prob",
    "thm8_bound", "m_required",
];

impl BoundReport {
    pub fn evaluate(params: BoundParams) -> Result<Self> {
        let u = params.resolved_u();
        let thm1 = thm1_bound(params.d, params.m, params.r, params.radius, u)?;
        let thm3 = thm3_sample_size(params.eps, params.r, params.radius, params.d, 1.0)?;
        let thm8 = thm8_bound(params.eps, params.r)?;
        let mut warnings = thm3.warnings.clone();
        warnings.extend(thm8.warnings.iter().copied());
        Ok(Self {
            params,
            u,
            thm1,
            thm3_error_bound: thm3.error_bound,
            thm3_prob: thm3.failure_prob,
            thm8_error_bound: thm8.value,
            sample_size_required: thm3.m_required,
            warnings,
        })
    }

    pub fn csv_record(&self) -> Vec<String> {
        let p = &self.params;
        vec![
            p.d.to_string(),
            p.s.map(|s| s.to_string()).unwrap_or_default(),
            format_sig(p.radius, 10),
            format_sig(p.r, 10),
            p.m.to_string(),
            format_sig(p.eps, 10),
            format_sig(self.u, 10),
            format_sig(self.thm1.total, 10),
            format_sig(self.thm1.failure_prob, 10),
            format_sig(self.thm3_error_bound, 10),
            format_sig(self.thm3_prob, 10),
            format_sig(self.thm8_error_bound, 10),
            self.sample_size_required.to_string(),
        ]
    }
}

pub fn write_bound_csv<W: Write>(reports: &[BoundReport], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(BOUND_CSV_HEADER)?;
    for rep in reports {
        out.write_record(rep.csv_record())?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn fa_a_closed_form_matches_quadrature() {
        for r in [0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 1e3] {
            let closed = expected_fa_a(r).unwrap();
            let quad = expected_fa_a_quadrature(r).unwrap();
            assert_abs_diff_eq!(closed, quad, epsilon = 1e-10);
        }
    }

    #[test]
    fn fa_a_values() {
        // Quadrature of the defining integrand, frozen.
        assert_abs_diff_eq!(expected_fa_a(1.0).unwrap(), 0.368_743, epsilon = 1e-5);
        let r = 0.01;
        assert_abs_diff_eq!(expected_fa_a(r).unwrap(), 1.0 - r * (2.0 / PI).sqrt(), epsilon = 1e-6);
        assert_abs_diff_eq!(expected_fa_a(r).unwrap(), 0.99202, epsilon = 1e-5);
        assert!(expected_fa_a(1e6).unwrap() < 1e-5);
        assert!(expected_fa_a(0.0).is_err());
        let grid = [0.1, 0.5, 1.0, 2.0, 10.0];
        for w in grid.windows(2) {
            assert!(expected_fa_a(w[0]).unwrap() > expected_fa_a(w[1]).unwrap());
        }
    }

    #[test]
    fn fa_w_reduces_to_fa_a() {
        for r in [0.2, 1.0, 3.7] {
            let o = OverlapCoords::new(1.0, 0.0, r).unwrap();
            assert_abs_diff_eq!(expected_fa_w(&o).unwrap(), expected_fa_a(r).unwrap(), epsilon = 1e-9);
        }
        // c <= 0, c' = 0: E[1 + |c| r |t|] = 1 + |c| r √(2/π).
        let o = OverlapCoords::new(-0.5, 0.0, 2.0).unwrap();
        assert_abs_diff_eq!(expected_fa_w(&o).unwrap(), 1.0 + (2.0 / PI).sqrt(), epsilon = 1e-9);
        // c = 0: E[1 - s t_2]_+ = Φ(1/s) + s φ(1/s).
        let o = OverlapCoords::new(0.0, 0.7, 1.5).unwrap();
        assert_abs_diff_eq!(expected_fa_w(&o).unwrap(), positive_part_mean(1.0, 1.05), epsilon = 1e-10);
    }

    #[test]
    fn fa_w_matches_monte_carlo() {
        for (c, cp, r, stream) in [(0.0, 1.0, 1.0, 0u64), (0.6, 0.8, 2.0, 1)] {
            let o = OverlapCoords::new(c, cp, r).unwrap();
            let exact = expected_fa_w(&o).unwrap();
            let mc = monte_carlo_fa(&o, 10_000_000, RngSeed::new(77, stream)).unwrap();
            assert!(
                (exact - mc.mean).abs() <= 3.0 * mc.std_error,
                "c={c} c'={cp} r={r}: {exact} vs {} ± {}",
                mc.mean,
                mc.std_error
            );
        }
    }

    #[test]
    fn monte_carlo_contract() {
        let o = OverlapCoords::new(1.0, 0.0, 1.0).unwrap();
        let mc = monte_carlo_fa(&o, 1_000_000, RngSeed::new(5, 0)).unwrap();
        assert!(mc.mean >= 0.0);
        assert!((mc.mean - expected_fa_a(1.0).unwrap()).abs() <= 3.0 * mc.std_error);
        let again = monte_carlo_fa(&o, 1_000_000, RngSeed::new(5, 0)).unwrap();
        assert_eq!(mc, again);
        let half = monte_carlo_fa(&o, 500_000, RngSeed::new(6, 0)).unwrap();
        let ratio = half.std_error / mc.std_error;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
        assert!(monte_carlo_fa(&o, 999, RngSeed::new(5, 0)).is_err());
    }

    #[test]
    fn thm2_examples() {
        let o = OverlapCoords::new(-0.1, 0.5, 10.0).unwrap();
        let expect = (PI / 2.0 + 5.0 * (PI / 2.0).sqrt() - sqrt_2pi() / 10.0) / PI;
        assert_abs_diff_eq!(thm2_lower_bound(&o).unwrap(), expect, epsilon = 1e-14);
        assert_abs_diff_eq!(thm2_lower_bound(&o).unwrap(), 2.4149, epsilon = 1e-4);
        assert!(thm2_lower_bound(&OverlapCoords::new(0.5, 0.0, 1.0).unwrap()).is_err());

        let r = 2.0;
        let lo = thm2_lower_bound(&OverlapCoords::new(1.0 / r - 1e-6, 0.4, r).unwrap()).unwrap();
        let hi = thm2_lower_bound(&OverlapCoords::new(1.0 / r + 1e-6, 0.4, r).unwrap()).unwrap();
        assert!((lo - hi).abs() < 1e-4);
    }

    #[test]
    fn thm2_is_sound_on_a_grid() {
        for &r in &[0.3, 1.0, 4.0, 12.0] {
            for &c in &[-0.8, -0.2, 0.05, 0.3, 0.7] {
                for &cp in &[0.05, 0.3, 0.6] {
                    let o = OverlapCoords::new(c, cp, r).unwrap();
                    let gap = expected_fa_w(&o).unwrap() - expected_fa_a(r).unwrap();
                    assert!(thm2_lower_bound(&o).unwrap() <= gap + 1e-8, "{o:?}");
                }
            }
        }
    }

    #[test]
    fn kink_integral_and_constant() {
        let k = proof_constant_057();
        assert!(k >= 0.57 && k <= 0.60);
        assert_abs_diff_eq!(k, (PI / 2.0).sqrt() * kink_integral(1.0).unwrap(), epsilon = 1e-13);
        assert_abs_diff_eq!(k, 0.5792, epsilon = 1e-4);
        let grid = [0.5, 1.0, 2.0, 4.0];
        let values: Vec<f64> = grid.iter().map(|&z| kink_integral(z).unwrap()).collect();
        for v in &values {
            assert!(*v >= 0.0);
        }
        for w in values.windows(2) {
            assert!(w[0] > w[1]);
        }
        for z in grid {
            let q = integrate(|t: f64| (1.0 - z * t) * (-0.5 * t * t).exp(), 0.0, 1.0 / z, 1e-13);
            assert_abs_diff_eq!(kink_integral(z).unwrap(), q.value, epsilon = 1e-12);
        }
    }

    #[test]
    fn thm1_values_and_scaling() {
        let b = thm1_bound(1000, 400, 1.0, 2.05, 0.5).unwrap();
        assert_abs_diff_eq!(eight_sqrt_8pi(), 40.106, epsilon = 1e-3);
        let expect = (eight_sqrt_8pi() + 18.0 * 2.05 * log_term(1000)) / 20.0 + 0.5;
        assert_abs_diff_eq!(b.total, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(b.total, 9.70, epsilon = 0.01);
        assert_abs_diff_eq!(b.total - 0.5, 2.0 * b.mu_bound + 2.0 * b.mu_tilde_bound, epsilon = 1e-12);

        let b2 = thm1_bound(1000, 400, 1.0, 2.05, 1.0).unwrap();
        for k in 0..2 {
            let l1 = -(b.failure_terms[k] / 8.0).ln();
            let l2 = -(b2.failure_terms[k] / 8.0).ln();
            assert_relative_eq!(l2, 4.0 * l1, max_relative = 1e-12);
        }
        let b4 = thm1_bound(1000, 1600, 1.0, 2.05, 0.5).unwrap();
        assert_relative_eq!(b4.total - 0.5, 0.5 * (b.total - 0.5), max_relative = 1e-12);
        assert!(b.failure_prob <= 1.0);
        assert!(thm1_bound(1, 400, 1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn thm3_sample_sizes() {
        let a = thm3_sample_size(0.1, 25.0, 5f64.sqrt(), 1000, 1.0).unwrap();
        let inner = eight_sqrt_8pi() + 19.0 * 25.0 * 5f64.sqrt() * log_term(1000);
        assert_eq!(a.m_required, (400.0 * inner * inner).ceil() as u64);
        assert!(a.warnings.is_empty());
        let b = thm3_sample_size(0.05, 25.0, 5f64.sqrt(), 1000, 1.0).unwrap();
        let ratio = b.m_required as f64 / a.m_required as f64;
        assert_relative_eq!(ratio, 4.0, max_relative = 1e-9);
        assert_abs_diff_eq!(a.error_bound, 2.0 * 0.5f64.exp() * (0.1 * PI + sqrt_2pi() / 25.0), epsilon = 1e-14);

        // R = √s: m grows (asymptotically) linearly in s.
        let m_of = |s: f64| thm3_sample_size(0.1, 25.0, s.sqrt(), 1000, 1.0).unwrap().m_required as f64;
        let (m4, m16, m64) = (m_of(4.0), m_of(16.0), m_of(64.0));
        assert!(m16 / m4 < 4.0 && m16 / m4 > 3.0);
        assert!(m64 / m16 < 4.0 && m64 / m16 > m16 / m4);

        let w = thm3_sample_size(0.2, 1.0, 2.0, 100, 1.0).unwrap();
        assert!(w.warnings.iter().any(|x| matches!(x, BoundWarning::EpsilonOutOfRange { .. })));
        assert!(w.warnings.iter().any(|x| matches!(x, BoundWarning::ScaleBelowThreshold { .. })));
        assert!(thm3_sample_size(0.0, 1.0, 2.0, 100, 1.0).is_err());
    }

    #[test]
    fn thm8_values() {
        let b = thm8_bound(0.2, 10.0).unwrap();
        let expect = (PI / 2.0).sqrt() * 0.2 / (10.0 * (1.0 - (-0.005f64).exp()));
        assert_relative_eq!(b.value, expect, max_relative = 1e-12);
        assert_abs_diff_eq!(b.value, 5.0258, epsilon = 1e-4);
        assert!(b.warnings.is_empty());
        let big = thm8_bound(0.2, 100.0).unwrap().value;
        let asym = (PI / 2.0).sqrt() * 0.2 * 200.0;
        assert!((big / asym - 1.0).abs() < 0.01);
        let mut prev = 0.0;
        for eps in [0.05, 0.1, 0.2, 0.3, 0.45] {
            let v = thm8_bound(eps, 12.0).unwrap().value;
            assert!(v > prev);
            prev = v;
        }
        assert!(!thm8_bound(0.2, 5.0).unwrap().warnings.is_empty());
    }

    #[test]
    fn bound_report_row() {
        let rep = BoundReport::evaluate(BoundParams {
            d: 1000,
            s: Some(5),
            radius: 2.05,
            r: 1.0,
            m: 400,
            eps: 0.1,
            u: Some(0.5),
        })
        .unwrap();
        let rec = rep.csv_record();
        assert_eq!(rec.len(), BOUND_CSV_HEADER.len());
        assert_eq!(rec[0], "1000");
        assert_eq!(rec[1], "5");
        assert!(rep.sample_size_required >= 1);
        let mut buf = Vec::new();
        write_bound_csv(&[rep], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("d,s,R,r,m,eps,u,thm1_total,thm1_fail_prob,thm3_bound,thm3_prob,thm8_bound,m_required\n"));
    }
}
