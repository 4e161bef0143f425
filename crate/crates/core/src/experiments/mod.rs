//! Parameter sweeps over `r`, `m` and `d`, with CSV output and bound overlays.
//!
//! Every trial draws from seeds derived from `(base seed, sweep kind, trial)`
//! (plus the grid index in the d-sweep, where the dimension changes), so the
//! output is a pure function of the [`SweepSpec`]. Within a trial all series
//! and grid points share the same Gaussian stream: a larger `m` extends the
//! sample of a smaller one and a different `r` rescales it. Comparisons
//! between methods, sample sizes and scales are therefore paired.

pub mod checks;

use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec;
use crate::format::format_sig;
use crate::model::{self, RngSeed, SparseClassifier};
use crate::solvers::{self, RecoveryError, SolverConfig, SolverResult};
use crate::theory::{BoundParams, BoundReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKind {
    R,
    M,
    D,
}

impl SweepKind {
    fn tag(self) -> u64 {
        match self {
            SweepKind::R => 1,
            SweepKind::M => 2,
            SweepKind::D => 3,
        }
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(SweepKind::R),
            "m" => Ok(SweepKind::M),
            "d" => Ok(SweepKind::D),
            other => Err(Error::invalid("kind", format!("unknown sweep kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    L1Svm,
    L1L2Svm,
    OneBitCs,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::L1Svm => "l1_svm",
            Method::L1L2Svm => "l1l2_svm",
            Method::OneBitCs => "one_bit_cs",
        }
    }

    pub fn solve(self, t: &model::TrainingSet, radius: f64, cfg: &SolverConfig) -> Result<SolverResult> {
        match self {
            Method::L1Svm => solvers::solve_l1_svm(t, radius, cfg),
            Method::L1L2Svm => solvers::solve_l1_l2_svm(t, radius, cfg),
            Method::OneBitCs => solvers::solve_one_bit_cs(t, radius),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1_svm" | "l1" => Ok(Method::L1Svm),
            "l1l2_svm" | "l1l2" => Ok(Method::L1L2Svm),
            "one_bit_cs" | "onebit" => Ok(Method::OneBitCs),
            other => Err(Error::invalid("method", format!("unknown method `{other}`"))),
        }
    }
}

/// How a series picks `r` at a grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleRule {
    /// `r` is the sweep value.
    Sweep,
    Fixed(f64),
    /// `r = sqrt(m) / divisor`.
    SqrtM { divisor: f64 },
}

/// How a series picks `m` at a grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleRule {
    Fixed(usize),
    /// `m` is the sweep value.
    Sweep,
    /// `m = round(multiplier · ln d)`.
    LogD { multiplier: f64 },
}

/// One curve of a sweep: a method with its `r` and `m` rules.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub method: Method,
    pub scale: ScaleRule,
    pub samples: SampleRule,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    /// Strictly increasing sweep values (`r`, `m` or `d`).
    pub grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Dimension for the r- and m-sweeps.
    pub d: usize,
    /// Sparsity of the random classifiers in the d-sweep.
    pub s: usize,
    /// Sample counts of the r-sweep, one series each.
    pub m_values: Vec<usize>,
    /// Fixed `r` of the m-sweep.
    pub fixed_r: f64,
    /// Divisor of the growing-`r` rule `r = sqrt(m)/divisor`.
    pub r_divisor: f64,
    /// Multipliers `m_i` of the d-sweep (`m = round(m_i · ln d)`).
    pub multipliers: Vec<f64>,
    /// Fixed `r` for the d-sweep; `None` uses `sqrt(m)/r_divisor`.
    pub d_sweep_r: Option<f64>,
    pub solver: SolverConfig,
}

/// Inclusive arithmetic grid `start, start+step, ..., <= stop`.
pub fn arithmetic_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::invalid("grid", format!("bad grid {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // Rounded to 12 decimals so that e.g. 0.05 * 3 prints as 0.15.
    Ok((0..=n)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

impl SweepSpec {
    fn base(kind: SweepKind, grid: Vec<f64>, trials: usize, methods: Vec<Method>) -> Self {
        Self {
            kind,
            grid,
            trials,
            seed: 0,
            methods,
            d: 1000,
            s: 5,
            m_values: vec![200, 400],
            fixed_r: 0.75,
            r_divisor: 30.0,
            multipliers: vec![10.0, 20.0, 40.0],
            d_sweep_r: None,
            solver: SolverConfig::default(),
        }
    }

    /// Error vs `r ∈ {0.05, 0.10, ..., 1.5}` at `m ∈ {200, 400}`, d = 1000, 20 trials.
    pub fn r_sweep() -> Self {
        let grid = arithmetic_grid(0.05, 1.5, 0.05).expect("static grid");
        Self::base(SweepKind::R, grid, 20, vec![Method::L1Svm, Method::L1L2Svm])
    }

    /// Error vs `m ∈ {50, 100, ..., 800}` at `r = 0.75` and `r = sqrt(m)/30`,
    /// plus one-bit CS, d = 1000, 40 trials.
    pub fn m_sweep() -> Self {
        let grid = arithmetic_grid(50.0, 800.0, 50.0).expect("static grid");
        Self::base(
            SweepKind::M,
            grid,
            40,
            vec![Method::L1Svm, Method::L1L2Svm, Method::OneBitCs],
        )
    }

    /// Error vs `d ∈ {100, 200, 500, 1000, 2000, 3000}` with a fresh random
    /// 5-sparse classifier per trial, `m = m_i ln d`, 60 trials.
    pub fn d_sweep() -> Self {
        let grid = vec![100.0, 200.0, 500.0, 1000.0, 2000.0, 3000.0];
        Self::base(SweepKind::D, grid, 60, vec![Method::L1Svm])
    }

    pub fn default_for(kind: SweepKind) -> Self {
        match kind {
            SweepKind::R => Self::r_sweep(),
            SweepKind::M => Self::m_sweep(),
            SweepKind::D => Self::d_sweep(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::invalid("grid", "must not be empty"));
        }
        if self.grid.iter().any(|v| !v.is_finite()) || self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("grid", "must be finite and strictly increasing"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "need at least one trial"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("methods", "need at least one method"));
        }
        if !(self.fixed_r > 0.0) || !(self.r_divisor > 0.0) {
            return Err(Error::invalid("r", "scales must be positive"));
        }
        let integral = |v: f64| v.fract() == 0.0 && v >= 1.0;
        match self.kind {
            SweepKind::R => {
                if self.grid[0] <= 0.0 {
                    return Err(Error::invalid("grid", "r values must be positive"));
                }
                if self.m_values.is_empty() || self.m_values.contains(&0) {
                    return Err(Error::invalid("m_values", "need positive sample counts"));
                }
                model::make_fixed_classifier(self.d)?;
            }
            SweepKind::M => {
                if !self.grid.iter().all(|&v| integral(v)) {
                    return Err(Error::invalid("grid", "m values must be positive integers"));
                }
                model::make_fixed_classifier(self.d)?;
            }
            SweepKind::D => {
                if !self.grid.iter().all(|&v| integral(v) && v as usize >= self.s.max(2)) {
                    return Err(Error::invalid("grid", "d values must be integers >= max(s, 2)"));
                }
                if self.s == 0 {
                    return Err(Error::invalid("s", "sparsity must be positive"));
                }
                if self.multipliers.is_empty() || self.multipliers.iter().any(|&x| !(x > 0.0)) {
                    return Err(Error::invalid("multipliers", "need positive multipliers"));
                }
                if let Some(r) = self.d_sweep_r {
                    if !(r > 0.0) {
                        return Err(Error::invalid("r", "must be positive"));
                    }
                }
            }
        }
        Ok(())
    }

    /// The curves this spec produces, in output order.
    pub fn series(&self) -> Vec<Series> {
        let mut out = Vec::new();
        match self.kind {
            SweepKind::R => {
                for &m in &self.m_values {
                    for &method in &self.methods {
                        out.push(Series {
                            method,
                            scale: ScaleRule::Sweep,
                            samples: SampleRule::Fixed(m),
                            label: method.name().to_string(),
                        });
                    }
                }
            }
            SweepKind::M => {
                let fixed = format!("r={}", format_sig(self.fixed_r, 10));
                let growing = format!("r=sqrt(m)/{}", format_sig(self.r_divisor, 10));
                for &method in &self.methods {
                    if method == Method::OneBitCs {
                        out.push(Series {
                            method,
                            scale: ScaleRule::Fixed(self.fixed_r),
                            samples: SampleRule::Sweep,
                            label: method.name().to_string(),
                        });
                        continue;
                    }
                    out.push(Series {
                        method,
                        scale: ScaleRule::Fixed(self.fixed_r),
                        samples: SampleRule::Sweep,
                        label: format!("{}@{fixed}", method.name()),
                    });
                    out.push(Series {
                        method,
                        scale: ScaleRule::SqrtM {
                            divisor: self.r_divisor,
                        },
                        samples: SampleRule::Sweep,
                        label: format!("{}@{growing}", method.name()),
                    });
                }
            }
            SweepKind::D => {
                let scale = match self.d_sweep_r {
                    Some(r) => ScaleRule::Fixed(r),
                    None => ScaleRule::SqrtM {
                        divisor: self.r_divisor,
                    },
                };
                for &mult in &self.multipliers {
                    for &method in &self.methods {
                        out.push(Series {
                            method,
                            scale,
                            samples: SampleRule::LogD { multiplier: mult },
                            label: format!("{}@m={}log(d)", method.name(), format_sig(mult, 10)),
                        });
                    }
                }
            }
        }
        out
    }

    /// `(d, m, r)` of a series at a sweep value.
    pub fn resolve(&self, series: &Series, value: f64) -> (usize, usize, f64) {
        let d = match self.kind {
            SweepKind::D => value as usize,
            _ => self.d,
        };
        let m = match series.samples {
            SampleRule::Fixed(m) => m,
            SampleRule::Sweep => value as usize,
            SampleRule::LogD { multiplier } => ((multiplier * (d as f64).ln()).round() as usize).max(1),
        };
        let r = match series.scale {
            ScaleRule::Sweep => value,
            ScaleRule::Fixed(r) => r,
            ScaleRule::SqrtM { divisor } => (m as f64).sqrt() / divisor,
        };
        (d, m, r)
    }

    fn classifier_seed(&self, point: usize, trial: usize) -> RngSeed {
        RngSeed::new(self.seed, trial as u64).derive(&[self.kind.tag(), point as u64, 0xC1A5])
    }

    fn data_seed(&self, point: usize, trial: usize) -> RngSeed {
        let point = match self.kind {
            SweepKind::D => point as u64,
            SweepKind::R | SweepKind::M => 0,
        };
        RngSeed::new(self.seed, trial as u64).derive(&[self.kind.tag(), point, 0xDA7A])
    }

    /// Ground-truth classifier for a trial. Fixed across trials for the r-
    /// and m-sweeps; freshly drawn per trial for the d-sweep.
    pub fn classifier(&self, point: usize, trial: usize) -> Result<SparseClassifier> {
        match self.kind {
            SweepKind::R | SweepKind::M => model::make_fixed_classifier(self.d),
            SweepKind::D => {
                let d = self.grid[point] as usize;
                model::make_random_classifier(d, self.s, self.classifier_seed(point, trial))
            }
        }
    }
}

/// Per-trial outcome, retained for debugging and aggregate spot checks.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub point: usize,
    pub series: usize,
    pub trial: usize,
    pub sweep_value: f64,
    pub label: String,
    pub d: usize,
    pub m: usize,
    pub r: f64,
    pub radius: f64,
    /// `None` when the solver or the error metric failed for this trial.
    pub error: Option<RecoveryError>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub method: String,
    pub m: usize,
    pub r: f64,
    pub d: usize,
    pub s: usize,
    /// Mean ℓ1 radius over the retained trials.
    pub radius: f64,
    pub mean_l2_error: f64,
    pub mean_ratio_error: f64,
    /// Standard error of `mean_l2_error`.
    pub std_error: f64,
    pub trials_used: usize,
    pub mean_iters: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub trials: Vec<TrialRecord>,
}

impl SweepOutcome {
    pub fn row(&self, sweep_value: f64, label: &str, m: Option<usize>) -> Option<&SweepRow> {
        self.rows.iter().find(|r| {
            (r.sweep_value - sweep_value).abs() < 1e-9 && r.method == label && m.is_none_or(|m| r.m == m)
        })
    }
}

fn run_trial(spec: &SweepSpec, series: &[Series], point: usize, si: usize, trial: usize) -> Result<TrialRecord> {
    let value = spec.grid[point];
    let s = &series[si];
    let (d, m, r) = spec.resolve(s, value);
    let a = spec.classifier(point, trial)?;
    debug_assert_eq!(a.dim(), d);
    let radius = a.l1_norm().max(1.0);
    let data = model::generate_training_set(&a, m, r, spec.data_seed(point, trial))?;
    let (error, iterations) = match s.method.solve(&data, radius, &spec.solver) {
        Ok(res) => (RecoveryError::between(&a, &res.w_hat).ok(), res.iterations),
        Err(Error::Degenerate(_)) | Err(Error::NonFinite { .. }) | Err(Error::NoConvergence { .. }) => (None, 0),
        Err(e) => return Err(e),
    };
    Ok(TrialRecord {
        point,
        series: si,
        trial,
        sweep_value: value,
        label: s.label.clone(),
        d,
        m,
        r,
        radius,
        error,
        iterations,
    })
}

/// Runs every `(grid point, series, trial)` combination and aggregates.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let series = spec.series();
    let per_point = series.len() * spec.trials;
    let total = spec.grid.len() * per_point;
    let records = exec::map(total, |k| {
        let point = k / per_point;
        let rem = k % per_point;
        run_trial(spec, &series, point, rem / spec.trials, rem % spec.trials)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let sparsity = match spec.kind {
        SweepKind::D => spec.s,
        _ => model::REFERENCE_ENTRIES.len(),
    };
    let rows = records
        .chunks(spec.trials)
        .map(|chunk| aggregate(chunk, sparsity))
        .collect();
    Ok(SweepOutcome {
        rows,
        trials: records,
    })
}

fn aggregate(chunk: &[TrialRecord], s: usize) -> SweepRow {
    let first = &chunk[0];
    let ok: Vec<(&TrialRecord, &RecoveryError)> = chunk
        .iter()
        .filter_map(|t| t.error.as_ref().map(|e| (t, e)))
        .collect();
    let n = ok.len();
    let nf = n as f64;
    let mean = |f: &dyn Fn(&TrialRecord, &RecoveryError) -> f64| {
        if n == 0 {
            f64::NAN
        } else {
            ok.iter().map(|(t, e)| f(t, e)).sum::<f64>() / nf
        }
    };
    let mean_l2 = mean(&|_, e| e.l2_error);
    let std_error = if n > 1 {
        let var = ok.iter().map(|(_, e)| (e.l2_error - mean_l2).powi(2)).sum::<f64>() / (nf - 1.0);
        (var / nf).sqrt()
    } else {
        0.0
    };
    SweepRow {
        sweep_value: first.sweep_value,
        method: first.label.clone(),
        m: first.m,
        r: first.r,
        d: first.d,
        s,
        radius: mean(&|t, _| t.radius),
        mean_l2_error: mean_l2,
        mean_ratio_error: mean(&|_, e| e.ratio_error),
        std_error,
        trials_used: n,
        mean_iters: mean(&|t, _| t.iterations as f64),
    }
}

fn check_kind(spec: &SweepSpec, kind: SweepKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::invalid("kind", format!("expected a {kind:?} sweep, got {:?}", spec.kind)));
    }
    Ok(())
}

/// Error vs `r` with the fixed classifier (data resampled each trial).
pub fn run_r_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    check_kind(spec, SweepKind::R)?;
    run_sweep(spec)
}

/// Error vs `m` for fixed and growing `r`, and one-bit CS.
pub fn run_m_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    check_kind(spec, SweepKind::M)?;
    run_sweep(spec)
}

/// Error vs `d` with a random classifier per trial and `m ∝ ln d`.
pub fn run_d_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    check_kind(spec, SweepKind::D)?;
    run_sweep(spec)
}

pub const SWEEP_CSV_HEADER: [&str; 12] = [
    "sweep_value", "method", "m", "r", "d", "s", "R", "mean_l2_error", "mean_ratio_error",
    "std_error", "trials", "mean_iters",
];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_CSV_HEADER)?;
    for row in rows {
        out.write_record([
            format_sig(row.sweep_value, 10),
            row.method.clone(),
            row.m.to_string(),
            format_sig(row.r, 10),
            row.d.to_string(),
            row.s.to_string(),
            format_sig(row.radius, 10),
            format_sig(row.mean_l2_error, 10),
            format_sig(row.mean_ratio_error, 10),
            format_sig(row.std_error, 10),
            row.trials_used.to_string(),
            format_sig(row.mean_iters, 10),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One line per trial: the raw values behind each aggregate row.
pub fn write_trials_csv<W: Write>(records: &[TrialRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "sweep_value", "method", "trial", "m", "r", "d", "R", "l2_error", "ratio_error", "cosine",
        "iterations",
    ])?;
    for t in records {
        let (l2, ratio, cosine) = match &t.error {
            Some(e) => (format_sig(e.l2_error, 10), format_sig(e.ratio_error, 10), format_sig(e.cosine, 10)),
            None => (String::new(), String::new(), String::new()),
        };
        out.write_record([
            format_sig(t.sweep_value, 10),
            t.label.clone(),
            t.trial.to_string(),
            t.m.to_string(),
            format_sig(t.r, 10),
            t.d.to_string(),
            format_sig(t.radius, 10),
            l2,
            ratio,
            cosine,
            t.iterations.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub const DEFAULT_EPS_GRID: [f64; 3] = [0.05, 0.1, 0.15];

/// Distinct `(sweep value, d, m, r)` points of a spec, in output order.
pub fn sweep_points(spec: &SweepSpec) -> Vec<(f64, usize, usize, f64)> {
    let series = spec.series();
    let mut points: Vec<(f64, usize, usize, f64)> = Vec::new();
    for &v in &spec.grid {
        for s in &series {
            let (d, m, r) = spec.resolve(s, v);
            let p = (v, d, m, r);
            if !points.contains(&p) {
                points.push(p);
            }
        }
    }
    points
}

/// Bound values at every distinct sweep point for each `ε` in `eps_grid`.
/// The radius is `‖a‖_1` of the fixed classifier, or `sqrt(s)` for the
/// d-sweep where the classifier changes per trial.
pub fn emit_bound_overlay(spec: &SweepSpec, eps_grid: &[f64]) -> Result<Vec<BoundReport>> {
    spec.validate()?;
    let (radius, s) = match spec.kind {
        SweepKind::D => ((spec.s as f64).sqrt().max(1.0), spec.s),
        _ => {
            let a = model::make_fixed_classifier(spec.d)?;
            (a.l1_norm(), a.sparsity())
        }
    };
    let mut out = Vec::new();
    for (_, d, m, r) in sweep_points(spec) {
        for &eps in eps_grid {
            out.push(BoundReport::evaluate(BoundParams {
                d,
                s: Some(s),
                radius,
                r,
                m,
                eps,
                u: None,
            })?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_r_spec() -> SweepSpec {
        SweepSpec {
            grid: vec![0.3, 1.2],
            trials: 3,
            d: 60,
            m_values: vec![40, 80],
            seed: 9,
            solver: SolverConfig {
                max_iters: 300,
                ..SolverConfig::default()
            },
            ..SweepSpec::r_sweep()
        }
    }

    #[test]
    fn grid_parsing() {
        let g = arithmetic_grid(0.05, 1.5, 0.05).unwrap();
        assert_eq!(g.len(), 30);
        assert_eq!(g[2], 0.15);
        assert_eq!(*g.last().unwrap(), 1.5);
        assert_eq!(arithmetic_grid(50.0, 800.0, 50.0).unwrap().len(), 16);
        assert!(arithmetic_grid(1.0, 0.0, 0.1).is_err());
        assert!(arithmetic_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn validation() {
        let mut spec = small_r_spec();
        spec.grid = vec![0.5, 0.4];
        assert!(run_sweep(&spec).is_err());
        spec.grid = vec![];
        assert!(run_sweep(&spec).is_err());
        let mut spec = small_r_spec();
        spec.trials = 0;
        assert!(spec.validate().is_err());
        let mut spec = SweepSpec::m_sweep();
        spec.grid = vec![10.5];
        assert!(spec.validate().is_err());
        assert!(run_m_sweep(&small_r_spec()).is_err());
        assert!("q".parse::<SweepKind>().is_err());
        assert_eq!("onebit".parse::<Method>().unwrap(), Method::OneBitCs);
    }

    #[test]
    fn default_specs() {
        let r = SweepSpec::r_sweep();
        assert_eq!(r.series().len(), 4);
        assert_eq!(r.grid.len(), 30);
        let m = SweepSpec::m_sweep();
        let labels: Vec<String> = m.series().into_iter().map(|s| s.label).collect();
        assert_eq!(
            labels,
            ["l1_svm@r=0.75", "l1_svm@r=sqrt(m)/30", "l1l2_svm@r=0.75", "l1l2_svm@r=sqrt(m)/30", "one_bit_cs"]
        );
        let d = SweepSpec::d_sweep();
        assert_eq!(d.series().len(), 3);
        let s = &d.series()[0];
        let (dd, mm, rr) = d.resolve(s, 1000.0);
        assert_eq!((dd, mm), (1000, 69));
        assert!((rr - (69f64).sqrt() / 30.0).abs() < 1e-15);
        for spec in [r, m, d] {
            spec.validate().unwrap();
        }
    }

    #[test]
    fn structure_and_determinism() {
        let spec = small_r_spec();
        let out = run_r_sweep(&spec).unwrap();
        assert_eq!(out.rows.len(), spec.grid.len() * spec.methods.len() * spec.m_values.len());
        assert_eq!(out.trials.len(), out.rows.len() * spec.trials);
        for row in &out.rows {
            assert!(row.mean_l2_error >= 0.0 && row.mean_l2_error <= 2.0);
            assert!(row.trials_used <= spec.trials);
        }
        let again = run_r_sweep(&spec).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_sweep_csv(&out.rows, &mut a).unwrap();
        write_sweep_csv(&again.rows, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with(
            "sweep_value,method,m,r,d,s,R,mean_l2_error,mean_ratio_error,std_error,trials,mean_iters\n"
        ));
        let mut c = Vec::new();
        write_sweep_csv(&run_r_sweep(&SweepSpec { seed: 10, ..spec }).unwrap().rows, &mut c).unwrap();
        assert_ne!(text.as_bytes(), c.as_slice());
    }

    #[test]
    fn aggregates_match_trial_dump() {
        let spec = small_r_spec();
        let out = run_sweep(&spec).unwrap();
        for (k, row) in out.rows.iter().enumerate().step_by(3) {
            let chunk = &out.trials[k * spec.trials..(k + 1) * spec.trials];
            let vals: Vec<f64> = chunk.iter().filter_map(|t| t.error.map(|e| e.l2_error)).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            assert_eq!(row.mean_l2_error, mean);
            assert!(chunk.iter().all(|t| t.label == row.method && t.m == row.m));
        }
    }

    #[test]
    fn trial_order_does_not_matter() {
        // Re-running a single trial in isolation reproduces its record.
        let spec = small_r_spec();
        let out = run_sweep(&spec).unwrap();
        let series = spec.series();
        for rec in out.trials.iter().rev().step_by(5) {
            let again = run_trial(&spec, &series, rec.point, rec.series, rec.trial).unwrap();
            assert_eq!(&again, rec);
        }
    }

    #[test]
    fn samples_are_nested_across_m_and_r() {
        let spec = small_r_spec();
        let a = spec.classifier(0, 2).unwrap();
        let small = model::generate_training_set(&a, 40, 0.3, spec.data_seed(0, 2)).unwrap();
        let large = model::generate_training_set(&a, 80, 1.2, spec.data_seed(1, 2)).unwrap();
        assert_eq!(small.labels(), &large.labels()[..40]);
        for (x, y) in small.matrix().iter().zip(large.matrix()) {
            assert!((x * 4.0 - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn d_sweep_classifiers_differ_per_trial() {
        let spec = SweepSpec {
            grid: vec![50.0],
            trials: 3,
            ..SweepSpec::d_sweep()
        };
        let a0 = spec.classifier(0, 0).unwrap();
        let a1 = spec.classifier(0, 1).unwrap();
        assert_ne!(a0, a1);
        assert_eq!(a0, spec.classifier(0, 0).unwrap());
        assert_eq!(a0.sparsity(), 5);
    }

    #[test]
    fn overlay_shape() {
        let spec = SweepSpec::m_sweep();
        let reps = emit_bound_overlay(&spec, &DEFAULT_EPS_GRID).unwrap();
        let points = sweep_points(&spec);
        // Two distinct r values per m (one-bit CS shares r = 0.75).
        assert_eq!(points.len(), spec.grid.len() * 2);
        assert_eq!(reps.len(), points.len() * DEFAULT_EPS_GRID.len());
        for rep in &reps {
            assert!(rep.thm8_error_bound.is_finite() && rep.thm8_error_bound > 0.0);
        }
    }
}
