//! Projections onto `K = {‖w‖_1 <= R}` and `K̃ = K ∩ {‖w‖_2 <= 1}`, and the
//! linear maximization oracle over `K̃`.
//!
//! All three reduce to soft thresholding `S_θ(v)_j = sign(v_j)·max(|v_j| - θ, 0)`
//! with a data-dependent threshold `θ`.

use crate::error::{Error, Result};
use crate::linalg::{dist2, norm1, norm2, soft_threshold};

/// Dykstra stops once successive iterates are this close...
pub const DYKSTRA_TOL: f64 = 1e-10;
/// ...and the two half-steps of the last round are this close.
pub const DYKSTRA_SPLIT_TOL: f64 = 1e-8;
pub const DYKSTRA_MAX_ROUNDS: usize = 10_000;
pub const BISECTION_TOL: f64 = 1e-10;
pub const BISECTION_MAX_STEPS: usize = 200;

/// Which constraints are tight at a projected point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActiveConstraints {
    None,
    L1,
    L2,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub point: Vec<f64>,
    pub active: ActiveConstraints,
    /// Soft-threshold level applied (0 when the ℓ1 constraint is slack).
    pub threshold: f64,
}

impl ProjectionResult {
    fn unchanged(v: &[f64]) -> Self {
        Self {
            point: v.to_vec(),
            active: ActiveConstraints::None,
            threshold: 0.0,
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid("R", format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Degenerate("input vector has non-finite entries"));
    }
    Ok(())
}

/// Magnitudes sorted in decreasing order with prefix sums, for evaluating
/// `‖S_θ(v)‖_1` and `‖S_θ(v)‖_2` in `O(log d)` per threshold.
struct SortedMagnitudes {
    u: Vec<f64>,
    sum: Vec<f64>,
    /// Prefix sums of `u_i - u_0` and `(u_i - u_0)²`. Centering on the top
    /// entry keeps the norm formulas below free of catastrophic cancellation
    /// when the leading magnitudes nearly tie.
    dev: Vec<f64>,
    dev_sq: Vec<f64>,
}

impl SortedMagnitudes {
    fn new(v: &[f64]) -> Self {
        let mut u: Vec<f64> = v.iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
        u.sort_unstable_by(|a, b| b.total_cmp(a));
        let mut sum = Vec::with_capacity(u.len() + 1);
        let mut dev = Vec::with_capacity(u.len() + 1);
        let mut dev_sq = Vec::with_capacity(u.len() + 1);
        let top = u.first().copied().unwrap_or(0.0);
        let (mut s1, mut e1, mut e2) = (0.0, 0.0, 0.0);
        sum.push(0.0);
        dev.push(0.0);
        dev_sq.push(0.0);
        for &x in &u {
            let e = x - top;
            s1 += x;
            e1 += e;
            e2 += e * e;
            sum.push(s1);
            dev.push(e1);
            dev_sq.push(e2);
        }
        Self { u, sum, dev, dev_sq }
    }

    fn max(&self) -> f64 {
        self.u.first().copied().unwrap_or(0.0)
    }

    /// Number of entries strictly above `theta`.
    fn count_above(&self, theta: f64) -> usize {
        self.u.partition_point(|&x| x > theta)
    }

    /// `(‖S_θ‖_1, ‖S_θ‖_2)`.
    fn norms(&self, theta: f64) -> (f64, f64) {
        let k = self.count_above(theta);
        let kf = k as f64;
        // u_i - θ = e_i + c with c = u_0 - θ.
        let c = self.max() - theta;
        let l1 = self.dev[k] + kf * c;
        let l2sq = self.dev_sq[k] + 2.0 * c * self.dev[k] + kf * c * c;
        (l1.max(0.0), l2sq.max(0.0).sqrt())
    }

    /// Threshold of the ℓ1-ball projection; assumes `‖v‖_1 > radius`.
    fn l1_threshold(&self, radius: f64) -> f64 {
        let mut rho = 1;
        for (j, &x) in self.u.iter().enumerate() {
            let k = j + 1;
            if x - (self.sum[k] - radius) / k as f64 > 0.0 {
                rho = k;
            }
        }
        ((self.sum[rho] - radius) / rho as f64).max(0.0)
    }

    /// Number of entries tied with the largest magnitude.
    fn top_ties(&self) -> usize {
        let top = self.max();
        self.u.partition_point(|&x| x >= top)
    }

    /// Smallest `θ` (to [`BISECTION_TOL`] relative to the largest magnitude) with `‖S_θ‖_1 / ‖S_θ‖_2 <= ratio`,
    /// found by bisection on the decreasing ratio map. Assumes the ratio at
    /// `θ = 0` exceeds `ratio` and that it falls to `sqrt(top_ties) <= ratio`
    /// just below the largest magnitude.
    fn ratio_threshold(&self, ratio: f64) -> f64 {
        let top = self.max();
        let (mut lo, mut hi) = (0.0, top);
        let tol = BISECTION_TOL * top;
        for _ in 0..BISECTION_MAX_STEPS {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let (l1, l2) = self.norms(mid);
            if l2 > 0.0 && l1 > ratio * l2 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // `hi` is on the feasible side; at `hi == top` fall back to just below it.
        let theta = if hi >= top { lo } else { hi };
        self.refine_ratio_threshold(theta, ratio).unwrap_or(theta)
    }

    /// With the support size `k` fixed, `‖S_θ‖_1 = R‖S_θ‖_2` is a quadratic in
    /// `θ` whose relevant root is
    /// `θ = (s_1 - R sqrt((k s_2 - s_1²) / (k - R²))) / k`, with `s_1`, `s_2`
    /// the sum and sum of squares of the top `k` entries. Returns it when it
    /// lies in the segment of thresholds that keep exactly the top `k`
    /// entries of the bracket found by bisection (trying the neighbours too).
    fn refine_ratio_threshold(&self, theta: f64, ratio: f64) -> Option<f64> {
        let k0 = self.count_above(theta).max(1);
        let r2 = ratio * ratio;
        [k0, k0 + 1, k0.saturating_sub(1)]
            .into_iter()
            .filter(|&k| k >= 1 && k <= self.u.len() && k as f64 > r2)
            .find_map(|k| {
                let kf = k as f64;
                // k s_2 - s_1² is shift invariant, so use the centered sums.
                let (e1, e2) = (self.dev[k], self.dev_sq[k]);
                let spread = ((kf * e2 - e1 * e1).max(0.0) / (kf - r2)).sqrt();
                let t = self.max() + (e1 - ratio * spread) / kf;
                let below = self.u.get(k).copied().unwrap_or(0.0);
                if !(t >= below && t < self.u[k - 1]) {
                    return None;
                }
                // Cancellation in `k s_2 - s_1²` can push the root to the
                // infeasible side; the bisection bracket is used then.
                let (l1, l2) = self.norms(t);
                (l1 <= ratio * l2 * (1.0 + 1e-12)).then_some(t)
            })
    }
}

/// Euclidean projection onto `{‖w‖_1 <= radius}` by full-sort soft
/// thresholding: `θ = (Σ_{j<=ρ} u_j - R)/ρ` with `u` the decreasing magnitudes
/// and `ρ` the largest index with `u_ρ > θ`.
pub fn project_l1(v: &[f64], radius: f64) -> Result<ProjectionResult> {
    check_radius(radius)?;
    check_finite(v)?;
    if norm1(v) <= radius {
        return Ok(ProjectionResult::unchanged(v));
    }
    let sorted = SortedMagnitudes::new(v);
    let theta = sorted.l1_threshold(radius);
    Ok(ProjectionResult {
        point: v.iter().map(|&x| soft_threshold(x, theta)).collect(),
        active: ActiveConstraints::L1,
        threshold: theta,
    })
}

/// Euclidean projection onto the ℓ2 ball of the given radius.
pub fn project_l2(v: &[f64], radius: f64) -> Vec<f64> {
    let n = norm2(v);
    if n <= radius {
        v.to_vec()
    } else {
        v.iter().map(|x| x * (radius / n)).collect()
    }
}

/// Projection onto `K̃ = {‖w‖_1 <= radius} ∩ {‖w‖_2 <= 1}` by Dykstra's
/// alternating projections (ℓ1 ball first, then the unit ℓ2 ball), run until
/// successive iterates differ by less than [`DYKSTRA_TOL`].
///
/// The final iterate lies in the ℓ2 ball; it is shrunk by at most the
/// residual ℓ1 excess so both constraints hold exactly.
pub fn project_l1_l2(v: &[f64], radius: f64) -> Result<ProjectionResult> {
    check_radius(radius)?;
    check_finite(v)?;
    if norm1(v) <= radius && norm2(v) <= 1.0 {
        return Ok(ProjectionResult::unchanged(v));
    }
    // If the projection onto one set already lies in the other, it is the
    // projection onto the intersection.
    let ball = project_l2(v, 1.0);
    if norm1(&ball) <= radius {
        let active = classify_active(&ball, radius, 1e-9);
        return Ok(ProjectionResult {
            point: ball,
            active,
            threshold: 0.0,
        });
    }
    let l1 = project_l1(v, radius)?;
    if norm2(&l1.point) <= 1.0 {
        let active = classify_active(&l1.point, radius, 1e-9);
        return Ok(ProjectionResult { active, ..l1 });
    }
    let d = v.len();
    let mut x = v.to_vec();
    let mut p = vec![0.0; d];
    let mut q = vec![0.0; d];
    let mut buf = vec![0.0; d];
    let mut gap = f64::INFINITY;
    for _ in 0..DYKSTRA_MAX_ROUNDS {
        buf.iter_mut().zip(x.iter().zip(&p)).for_each(|(b, (xi, pi))| *b = xi + pi);
        let ya = project_l1(&buf, radius)?;
        let threshold = ya.threshold;
        let y = ya.point;
        p.iter_mut().zip(buf.iter().zip(&y)).for_each(|(pi, (b, yi))| *pi = b - yi);

        buf.iter_mut().zip(y.iter().zip(&q)).for_each(|(b, (yi, qi))| *b = yi + qi);
        let x_next = project_l2(&buf, 1.0);
        q.iter_mut().zip(buf.iter().zip(&x_next)).for_each(|(qi, (b, xi))| *qi = b - xi);

        // The iterate can stall for a round while the corrections still move,
        // so the two half-steps must also (nearly) agree.
        gap = dist2(&x_next, &x);
        let split = dist2(&y, &x_next);
        x = x_next;
        if gap < DYKSTRA_TOL && split < DYKSTRA_SPLIT_TOL {
            let l1 = norm1(&x);
            if l1 > radius {
                let s = radius / l1;
                x.iter_mut().for_each(|xi| *xi *= s);
            }
            let active = classify_active(&x, radius, 1e-9);
            return Ok(ProjectionResult {
                point: x,
                active,
                threshold,
            });
        }
    }
    Err(Error::NoConvergence {
        rounds: DYKSTRA_MAX_ROUNDS,
        gap,
        last: x,
    })
}

fn classify_active(w: &[f64], radius: f64, tol: f64) -> ActiveConstraints {
    let l1 = (norm1(w) - radius).abs() <= tol;
    let l2 = (norm2(w) - 1.0).abs() <= tol;
    match (l1, l2) {
        (true, true) => ActiveConstraints::Both,
        (true, false) => ActiveConstraints::L1,
        (false, true) => ActiveConstraints::L2,
        (false, false) => ActiveConstraints::None,
    }
}

/// Projection onto `K̃` from the KKT conditions. The minimizer has the form
/// `S_θ(v) / max(1, ‖S_θ(v)‖_2)`; depending on which constraints bind it is
/// `v`, the ℓ1 projection, the ℓ2 projection, or the unit-normalized soft
/// threshold with `‖S_θ‖_1 / ‖S_θ‖_2 = R`. Agrees with [`project_l1_l2`] and
/// costs one sort.
pub fn project_l1_l2_closed_form(v: &[f64], radius: f64) -> Result<ProjectionResult> {
    check_radius(radius)?;
    check_finite(v)?;
    let n2 = norm2(v);
    if norm1(v) <= radius && n2 <= 1.0 {
        return Ok(ProjectionResult::unchanged(v));
    }
    let sorted = SortedMagnitudes::new(v);
    if norm1(v) > radius {
        let theta = sorted.l1_threshold(radius);
        let (_, l2) = sorted.norms(theta);
        if l2 <= 1.0 {
            return Ok(ProjectionResult {
                point: v.iter().map(|&x| soft_threshold(x, theta)).collect(),
                active: ActiveConstraints::L1,
                threshold: theta,
            });
        }
    }
    // ‖v‖_2 > 1 from here on.
    if norm1(v) <= radius * n2 {
        return Ok(ProjectionResult {
            point: v.iter().map(|x| x / n2).collect(),
            active: ActiveConstraints::L2,
            threshold: 0.0,
        });
    }
    let theta = sorted.ratio_threshold(radius);
    let mut w: Vec<f64> = v.iter().map(|&x| soft_threshold(x, theta)).collect();
    let n = norm2(&w);
    w.iter_mut().for_each(|x| *x /= n);
    let l1 = norm1(&w);
    if l1 > radius {
        let s = radius / l1;
        w.iter_mut().for_each(|x| *x *= s);
    }
    Ok(ProjectionResult {
        point: w,
        active: ActiveConstraints::Both,
        threshold: theta,
    })
}

/// A maximizer of `<g, w>` over `K̃`.
///
/// If `‖g‖_1 / ‖g‖_2 <= R` the answer is `g / ‖g‖_2`. Otherwise it is
/// `S_θ(g) / ‖S_θ(g)‖_2` with `θ` found by bisection so that the ℓ1/ℓ2 ratio
/// equals `R`. When the top magnitude is shared by `t > R²` coordinates no
/// such `θ` exists; every feasible point on those coordinates with ℓ1 norm
/// `R` is optimal, and the canonical choice spreads `R/t` evenly over them.
pub fn max_linear_l1_l2(g: &[f64], radius: f64) -> Result<Vec<f64>> {
    if !(radius >= 1.0) || !radius.is_finite() {
        return Err(Error::invalid("R", format!("radius must be >= 1, got {radius}")));
    }
    check_finite(g)?;
    let n2 = norm2(g);
    if n2 == 0.0 {
        return Err(Error::Degenerate("linear functional is zero; every feasible point is a maximizer"));
    }
    if norm1(g) <= radius * n2 {
        return Ok(g.iter().map(|x| x / n2).collect());
    }
    let sorted = SortedMagnitudes::new(g);
    let ties = sorted.top_ties();
    if (ties as f64).sqrt() > radius {
        let top = sorted.max();
        let share = radius / ties as f64;
        return Ok(g
            .iter()
            .map(|&x| if x.abs() == top { x.signum() * share } else { 0.0 })
            .collect());
    }
    let theta = sorted.ratio_threshold(radius);
    let mut w: Vec<f64> = g.iter().map(|&x| soft_threshold(x, theta)).collect();
    let n = norm2(&w);
    w.iter_mut().for_each(|x| *x /= n);
    Ok(w)
}
