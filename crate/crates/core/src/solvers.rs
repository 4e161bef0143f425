//! Hinge-loss minimization over `K` and `K̃`, the one-bit compressed sensing
//! estimator, and recovery-error metrics.
//!
//! Both SVM variants use projected subgradient descent
//!
//! ```text
//! w_{k+1} = Π(w_k - η_k g_k),   η_k = η_0 / sqrt(k),
//! g_k = -(1/m) Σ_{i : y_i <x_i, w_k> < 1} y_i x_i,
//! ```
//!
//! started from `w_0 = 0` and returning the best iterate seen. Terms sitting
//! exactly on the hinge kink contribute nothing to `g_k`.

use crate::error::{Error, Result};
use crate::geometry;
use crate::linalg::{dist2, dot, norm2};
use crate::model::{hinge_objective, ConstraintSet, SparseClassifier, TrainingSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// `η_k = η_0 / sqrt(k)`
    Diminishing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterateChoice {
    /// Iterate with the lowest objective.
    Best,
    /// Step-size weighted average of the iterates (feasible by convexity).
    Averaged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub step_rule: StepRule,
    /// Initial step; `None` means the ℓ1 radius `R`.
    pub eta0: Option<f64>,
    /// Stop once the best objective improved by at most
    /// `tol · max(1, best)` over the last `window` iterations.
    pub tol: f64,
    pub window: usize,
    pub track: IterateChoice,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            step_rule: StepRule::Diminishing,
            eta0: None,
            tol: 1e-8,
            window: 100,
            track: IterateChoice::Best,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be at least 1"));
        }
        if let Some(eta0) = self.eta0 {
            if !(eta0 > 0.0) || !eta0.is_finite() {
                return Err(Error::invalid("eta0", format!("must be positive, got {eta0}")));
            }
        }
        if !(self.tol >= 0.0) {
            return Err(Error::invalid("tol", "must be nonnegative"));
        }
        if self.window == 0 {
            return Err(Error::invalid("window", "must be at least 1"));
        }
        Ok(())
    }
}

/// What [`SolverResult::objective`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Normalized hinge loss `f_a(ŵ)`.
    Hinge,
    /// `<Σ y_i x_i, ŵ>` for the one-bit estimator.
    Correlation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub w_hat: Vec<f64>,
    pub objective: f64,
    pub objective_kind: ObjectiveKind,
    /// Objective at every evaluated iterate, starting with `w_0`.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// ℓ1-SVM: minimize `f_a` over `{‖w‖_1 <= R}`.
pub fn solve_l1_svm(t: &TrainingSet, radius: f64, cfg: &SolverConfig) -> Result<SolverResult> {
    solve_constrained(t, &ConstraintSet::l1_ball(radius)?, cfg)
}

/// ℓ1∩ℓ2-SVM: minimize `f_a` over `{‖w‖_1 <= R, ‖w‖_2 <= 1}`.
pub fn solve_l1_l2_svm(t: &TrainingSet, radius: f64, cfg: &SolverConfig) -> Result<SolverResult> {
    solve_constrained(t, &ConstraintSet::l1_l2(radius)?, cfg)
}

/// Projected subgradient descent on the hinge objective over `set`.
pub fn solve_constrained(t: &TrainingSet, set: &ConstraintSet, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let d = t.d();
    let m = t.m();
    let z = t.signed_rows();
    let eta0 = cfg.eta0.unwrap_or(set.l1_radius());

    let mut w = vec![0.0; d];
    let mut grad = vec![0.0; d];
    let mut step = vec![0.0; d];
    let mut nnz = Vec::with_capacity(d);
    let mut trace = Vec::with_capacity(cfg.max_iters + 1);
    let mut best_hist = Vec::with_capacity(cfg.max_iters + 1);
    let mut best_w = w.clone();
    let mut best_f = f64::INFINITY;
    let mut avg = vec![0.0; d];
    let mut avg_weight = 0.0;
    let mut iterations = 0;
    let mut converged = false;

    for k in 0..=cfg.max_iters {
        let f = evaluate(&z, m, &w, &mut grad, &mut nnz);
        if !f.is_finite() {
            return Err(Error::NonFinite { iteration: k });
        }
        trace.push(f);
        if f < best_f {
            best_f = f;
            best_w.copy_from_slice(&w);
        }
        best_hist.push(best_f);
        if f == 0.0 {
            converged = true;
            break;
        }
        if k >= cfg.window {
            let before = best_hist[k - cfg.window];
            if before - best_f <= cfg.tol * best_f.max(1.0) {
                converged = true;
                break;
            }
        }
        if k == cfg.max_iters {
            break;
        }
        let eta = match cfg.step_rule {
            StepRule::Diminishing => eta0 / ((k + 1) as f64).sqrt(),
        };
        if cfg.track == IterateChoice::Averaged {
            avg.iter_mut().zip(&w).for_each(|(a, wi)| *a += eta * wi);
            avg_weight += eta;
        }
        step.iter_mut()
            .zip(w.iter().zip(&grad))
            .for_each(|(s, (wi, gi))| *s = wi - eta * gi);
        w = set.project(&step)?.point;
        iterations = k + 1;
    }

    let w_hat = match cfg.track {
        IterateChoice::Best => best_w,
        IterateChoice::Averaged if avg_weight > 0.0 => {
            avg.iter().map(|a| a / avg_weight).collect()
        }
        IterateChoice::Averaged => w,
    };
    let objective = hinge_objective(&w_hat, t)?;
    Ok(SolverResult {
        w_hat,
        objective,
        objective_kind: ObjectiveKind::Hinge,
        trace,
        iterations,
        converged,
    })
}

/// Hinge objective at `w` and a subgradient, in one pass over the signed rows.
fn evaluate(z: &[f64], m: usize, w: &[f64], grad: &mut [f64], nnz: &mut Vec<usize>) -> f64 {
    let d = w.len();
    nnz.clear();
    nnz.extend(w.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, _)| j));
    let sparse = nnz.len() * 4 < d;
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut total = 0.0;
    for zi in z.chunks_exact(d) {
        let margin = if sparse {
            nnz.iter().map(|&j| zi[j] * w[j]).sum::<f64>()
        } else {
            dot(zi, w)
        };
        let slack = 1.0 - margin;
        if slack > 0.0 {
            total += slack;
            grad.iter_mut().zip(zi).for_each(|(g, v)| *g -= v);
        }
    }
    let inv_m = 1.0 / m as f64;
    grad.iter_mut().for_each(|g| *g *= inv_m);
    total * inv_m
}

/// One-bit compressed sensing: the maximizer of `<Σ y_i x_i, w>` over `K̃`.
/// Closed form, no iteration. The reported objective is the correlation, not
/// the hinge loss.
pub fn solve_one_bit_cs(t: &TrainingSet, radius: f64) -> Result<SolverResult> {
    let g = t.label_weighted_sum();
    let w_hat = geometry::max_linear_l1_l2(&g, radius)?;
    let objective = dot(&g, &w_hat);
    Ok(SolverResult {
        w_hat,
        objective,
        objective_kind: ObjectiveKind::Correlation,
        trace: Vec::new(),
        iterations: 0,
        converged: true,
    })
}

/// Distance between the true classifier and a recovered direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryError {
    /// `‖a - ŵ/‖ŵ‖_2‖_2`, in `[0, 2]`.
    pub l2_error: f64,
    /// `l2_error / cosine`, or `+inf` when `cosine <= 0`.
    pub ratio_error: f64,
    /// `<a, ŵ/‖ŵ‖_2>`, in `[-1, 1]`.
    pub cosine: f64,
    /// `‖a - ŵ‖_2` without normalization.
    pub raw_l2: f64,
}

impl RecoveryError {
    pub fn between(a: &SparseClassifier, w_hat: &[f64]) -> Result<Self> {
        if w_hat.len() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: w_hat.len(),
            });
        }
        let n = norm2(w_hat);
        if n == 0.0 {
            return Err(Error::Degenerate("recovered vector is zero"));
        }
        let unit: Vec<f64> = w_hat.iter().map(|x| x / n).collect();
        let cosine = dot(a.weights(), &unit).clamp(-1.0, 1.0);
        let l2_error = dist2(a.weights(), &unit).min(2.0);
        let ratio_error = if cosine > 0.0 {
            l2_error / cosine
        } else {
            f64::INFINITY
        };
        Ok(Self {
            l2_error,
            ratio_error,
            cosine,
            raw_l2: dist2(a.weights(), w_hat),
        })
    }
}

pub fn recovery_error(a: &SparseClassifier, result: &SolverResult) -> Result<RecoveryError> {
    RecoveryError::between(a, &result.w_hat)
}
