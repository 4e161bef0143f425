//! Brute-force reference computations for small dimensions.
//!
//! Nothing here calls into the projection, maximization or solver code; the
//! only shared pieces are the norms and the hinge objective itself. These
//! back the unit tests, the acceptance suite and `sparse-svm check`.

use crate::linalg::{dot, norm1, norm2};
use crate::model::{ConstraintSet, TrainingSet};

/// Nearest point to `v` (d <= 3) of a closed convex set described by its
/// gauge `γ(w) = min{t > 0 : w/t ∈ set}`. The set must contain a
/// neighbourhood of 0 and be symmetric under sign flips of single
/// coordinates, with `γ` nondecreasing in each `|w_j|` (true for every
/// intersection of ℓp balls).
///
/// The search is nested: the first coordinate is chosen by a 1-D grid search
/// with repeated zooms, each candidate being scored by the same search over
/// the next coordinate, and the last coordinate is clamped to its feasible
/// interval. Partial minimization keeps every level strictly convex, so the
/// zooms cannot get trapped. Feasible extents come from bisection on `γ`.
pub fn grid_project<G>(v: &[f64], gauge: G) -> Vec<f64>
where
    G: Fn(&[f64]) -> f64,
{
    let d = v.len();
    assert!((1..=3).contains(&d), "grid oracle supports d <= 3");
    if gauge(v) <= 1.0 {
        return v.to_vec();
    }
    let mut prefix = Vec::with_capacity(d);
    nested_search(v, &gauge, &mut prefix).1
}

/// Points per 1-D grid.
const LINE_POINTS: usize = 21;
/// Zooming stops once the bracket is this narrow.
const LINE_WIDTH: f64 = 1e-11;

/// Minimum of `Σ_{j >= k} (v_j - w_j)²` over feasible completions of the
/// fixed `prefix = (w_0, .., w_{k-1})`, with its minimizer.
fn nested_search<G>(v: &[f64], gauge: &G, prefix: &mut Vec<f64>) -> (f64, Vec<f64>)
where
    G: Fn(&[f64]) -> f64,
{
    let k = prefix.len();
    let d = v.len();
    let t = extent(d, gauge, prefix);
    if k + 1 == d {
        let x = v[k].clamp(-t, t);
        return ((v[k] - x).powi(2), vec![x]);
    }
    let mut score = |x: f64| -> (f64, Vec<f64>) {
        prefix.push(x);
        let (rest, mut tail) = nested_search(v, gauge, prefix);
        prefix.pop();
        tail.insert(0, x);
        ((v[k] - x).powi(2) + rest, tail)
    };
    let (mut lo, mut hi) = (-t, t);
    let mut best = score(v[k].clamp(lo, hi));
    while hi - lo > LINE_WIDTH {
        let h = (hi - lo) / (LINE_POINTS - 1) as f64;
        let mut best_i = None;
        for i in 0..LINE_POINTS {
            let cand = score(lo + i as f64 * h);
            if cand.0 < best.0 {
                best = cand;
                best_i = Some(i);
            }
        }
        let centre = match best_i {
            Some(i) => lo + i as f64 * h,
            None => best.1[0],
        };
        lo = (centre - h).max(-t);
        hi = (centre + h).min(t);
    }
    best
}

/// Largest `s` with `γ(prefix, s, 0, ..) <= 1`, by bisection.
fn extent<G>(d: usize, gauge: &G, prefix: &[f64]) -> f64
where
    G: Fn(&[f64]) -> f64,
{
    let mut w = prefix.to_vec();
    w.resize(d, 0.0);
    let k = prefix.len();
    let mut at = |s: f64| {
        w[k] = s;
        gauge(&w)
    };
    if at(0.0) > 1.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while at(hi) <= 1.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Gauge of `{‖w‖_1 <= R}`.
pub fn l1_gauge(radius: f64) -> impl Fn(&[f64]) -> f64 {
    move |w| norm1(w) / radius
}

/// Gauge of `{‖w‖_1 <= R, ‖w‖_2 <= 1}`.
pub fn l1_l2_gauge(radius: f64) -> impl Fn(&[f64]) -> f64 {
    move |w| (norm1(w) / radius).max(norm2(w))
}

/// Maximizer of `<g, w>` over `{‖w‖_1 <= R, ‖w‖_2 <= 1}` in d = 2 by scanning
/// the unit circle in angle steps of `step`, keeping the arc where the ℓ1
/// constraint holds. For `R >= 1` the maximizer lies on that arc (possibly at
/// an endpoint), so the scan is exhaustive up to the angular resolution.
pub fn arc_grid_maximizer_2d(g: &[f64], radius: f64, step: f64) -> Vec<f64> {
    assert_eq!(g.len(), 2);
    let n = (std::f64::consts::TAU / step).ceil() as usize;
    // Arc endpoints solve |w_1| + |w_2| = R on the circle; the axes are
    // always feasible. The angle grid alone can step over both.
    let h = (2.0 - radius * radius).max(0.0).sqrt();
    let (hi, lo) = ((radius + h) / 2.0, (radius - h) / 2.0);
    let mut candidates = vec![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
    for (a, b) in [(hi, lo), (lo, hi)] {
        for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            candidates.push([sa * a, sb * b]);
        }
    }
    let grid = (0..n).map(|k| {
        let t = k as f64 * step;
        [t.cos(), t.sin()]
    });
    let mut best = vec![0.0, 0.0];
    let mut best_v = f64::NEG_INFINITY;
    for w in candidates.into_iter().chain(grid) {
        if norm1(&w) > radius + 1e-12 {
            continue;
        }
        let val = dot(g, &w);
        if val > best_v {
            best_v = val;
            best = w.to_vec();
        }
    }
    best
}

/// Exhaustive grid minimization of the hinge objective over a constraint set
/// in d = 2. Returns `(objective, point)`.
pub fn grid_svm_2d(t: &TrainingSet, set: &ConstraintSet, step: f64) -> (f64, Vec<f64>) {
    assert_eq!(t.d(), 2);
    let radius = set.l1_radius().min(set.l2_radius());
    let n = (radius / step).ceil() as i64;
    let z = t.signed_rows();
    let m = t.m() as f64;
    let mut best = (f64::INFINITY, vec![0.0, 0.0]);
    for i in -n..=n {
        let w0 = i as f64 * step;
        for j in -n..=n {
            let w1 = j as f64 * step;
            let w = [w0, w1];
            if !set.contains(&w, 0.0) {
                continue;
            }
            let f = z
                .chunks_exact(2)
                .map(|zi| (1.0 - zi[0] * w0 - zi[1] * w1).max(0.0))
                .sum::<f64>()
                / m;
            if f < best.0 {
                best = (f, w.to_vec());
            }
        }
    }
    best
}

/// Mean of `‖x‖_∞` over `rows`.
pub fn mean_max_abs<'a>(rows: impl Iterator<Item = &'a [f64]>) -> f64 {
    let mut n = 0usize;
    let mut total = 0.0;
    for row in rows {
        total += row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        n += 1;
    }
    total / n.max(1) as f64
}
