use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sparse_svm::experiments::{self, checks, Method, SweepKind, SweepSpec};
use sparse_svm::model::{self, RngSeed, SparseClassifier, TrainingSet};
use sparse_svm::solvers::{IterateChoice, RecoveryError, SolverConfig};
use sparse_svm::theory::{self, BoundParams, BoundReport, OverlapCoords};
use sparse_svm::{format_sig, Error};

#[derive(Parser)]
#[command(name = "sparse-svm", version, about = "Sparse classifier recovery with l1-constrained SVMs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a labelled Gaussian training set and write it as CSV.
    Generate(GenerateArgs),
    /// Fit one training set with an SVM variant or the one-bit estimator.
    Solve(SolveArgs),
    /// Run an error-vs-r, -m or -d experiment and write aggregated rows.
    Sweep(SweepArgs),
    /// Evaluate the concentration, sample-size and error bounds.
    Theory(TheoryArgs),
    /// Run an oracle cross-check suite; exits nonzero if it fails.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierChoice {
    /// Random s-sparse unit vector.
    Random,
    /// The fixed five-sparse vector at its original positions (d >= 781).
    Reference,
    /// The fixed five-sparse vector at positions scaled to d.
    Fixed,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    d: usize,
    /// Sparsity of a random classifier.
    #[arg(long, default_value_t = 5)]
    s: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ClassifierChoice::Random)]
    classifier: ClassifierChoice,
    #[arg(long)]
    out: PathBuf,
    /// Also write the classifier (`j,a_j`, zero-based j).
    #[arg(long)]
    classifier_out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// l1, l1l2 or onebit (long names l1_svm, l1l2_svm, one_bit_cs also work).
    #[arg(long)]
    method: String,
    #[arg(long)]
    data: PathBuf,
    /// l1 radius.
    #[arg(long = "R")]
    radius: f64,
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    /// Initial step size; defaults to R.
    #[arg(long)]
    eta0: Option<f64>,
    /// Return the step-weighted average iterate instead of the best one.
    #[arg(long)]
    averaged: bool,
    /// Output CSV `j,w_j` for every coordinate.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth classifier CSV; prints recovery errors when given.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    kind: String,
    /// Trials per point; defaults to 20, 40 and 60 for r, m and d.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated subset of l1, l1l2, onebit.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Dimension for the r and m sweeps.
    #[arg(long)]
    d: Option<usize>,
    /// Sparsity for the d sweep.
    #[arg(long)]
    s: Option<usize>,
    /// Sample counts of the r sweep.
    #[arg(long, value_delimiter = ',')]
    m_values: Option<Vec<usize>>,
    /// Multipliers m_i of the d sweep (m = m_i ln d).
    #[arg(long, value_delimiter = ',')]
    multipliers: Option<Vec<f64>>,
    /// Fixed r of the m sweep.
    #[arg(long)]
    fixed_r: Option<f64>,
    /// Divisor of the growing-r rule r = sqrt(m)/divisor.
    #[arg(long)]
    r_divisor: Option<f64>,
    /// Fixed r for the d sweep instead of sqrt(m)/divisor.
    #[arg(long)]
    d_sweep_r: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Also write bound values at every sweep point.
    #[arg(long)]
    bounds_out: Option<PathBuf>,
    /// Epsilon grid for the bound overlay.
    #[arg(long, value_delimiter = ',', default_values_t = experiments::DEFAULT_EPS_GRID)]
    eps: Vec<f64>,
    /// Also write one row per trial.
    #[arg(long)]
    trials_out: Option<PathBuf>,
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    r: f64,
    #[arg(long = "R")]
    radius: f64,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    eps: f64,
    /// Deviation level; defaults to rR sqrt(2 log 2d) / sqrt(m).
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    s: Option<usize>,
    /// Overlap <a, w> for the expectation gap bound.
    #[arg(long, requires = "c_prime")]
    c: Option<f64>,
    /// Orthogonal part |w - <a, w> a| for the expectation gap bound.
    #[arg(long, requires = "c")]
    c_prime: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// lemma7, thm2, projections, constants or all.
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print every case, not just failures.
    #[arg(long)]
    verbose: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn generate(args: GenerateArgs) -> Result<()> {
    let seed = RngSeed::new(args.seed, 0);
    let a = match args.classifier {
        ClassifierChoice::Random => model::make_random_classifier(args.d, args.s, seed.derive(&[1]))?,
        ClassifierChoice::Reference => model::make_paper_classifier(args.d)?,
        ClassifierChoice::Fixed => model::make_fixed_classifier(args.d)?,
    };
    let t = model::generate_training_set(&a, args.m, args.r, seed.derive(&[2]))?;
    t.write_csv(create(&args.out)?)?;
    if let Some(path) = &args.classifier_out {
        a.write_csv(create(path)?)?;
    }
    println!(
        "wrote {} samples in d = {} (r = {}, ||a||_1 = {}) to {}",
        t.m(),
        t.d(),
        args.r,
        format_sig(a.l1_norm(), 6),
        args.out.display()
    );
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let method: Method = args.method.parse()?;
    let t = TrainingSet::read_csv(open(&args.data)?)?;
    let cfg = SolverConfig {
        max_iters: args.max_iters,
        eta0: args.eta0,
        track: if args.averaged {
            IterateChoice::Averaged
        } else {
            IterateChoice::Best
        },
        ..SolverConfig::default()
    };
    let res = method.solve(&t, args.radius, &cfg)?;

    let mut out = create(&args.out)?;
    writeln!(out, "j,w_j")?;
    for (j, w) in res.w_hat.iter().enumerate() {
        writeln!(out, "{j},{w:e}")?;
    }
    out.flush()?;

    let mut stdout = io::stdout().lock();
    writeln!(stdout, "method     {}", method.name())?;
    writeln!(stdout, "objective  {} ({:?})", format_sig(res.objective, 10), res.objective_kind)?;
    writeln!(stdout, "iterations {} (converged: {})", res.iterations, res.converged)?;
    if let Some(path) = &args.truth {
        let a = SparseClassifier::read_csv(open(path)?, t.d())?;
        let e = RecoveryError::between(&a, &res.w_hat)?;
        writeln!(stdout, "l2 error   {}", format_sig(e.l2_error, 10))?;
        writeln!(stdout, "ratio err  {}", format_sig(e.ratio_error, 10))?;
        writeln!(stdout, "cosine     {}", format_sig(e.cosine, 10))?;
    }
    Ok(())
}

fn parse_grid(raw: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = raw.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => Ok(experiments::arithmetic_grid(
            start.trim().parse()?,
            stop.trim().parse()?,
            step.trim().parse()?,
        )?),
        [_] => raw
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad grid value `{v}`")))
            .collect(),
        _ => bail!(Error::Malformed(format!("grid `{raw}` is neither start:stop:step nor a list"))),
    }
}

fn sweep(args: SweepArgs) -> Result<()> {
    let kind: SweepKind = args.kind.parse()?;
    let mut spec = SweepSpec::default_for(kind);
    spec.seed = args.seed;
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    if let Some(grid) = &args.grid {
        spec.grid = parse_grid(grid).map_err(|e| match e.downcast::<Error>() {
            Ok(err) => anyhow::Error::new(err),
            Err(other) => anyhow::Error::new(Error::Malformed(other.to_string())),
        })?;
    }
    if let Some(methods) = &args.methods {
        spec.methods = methods.iter().map(|m| m.parse()).collect::<Result<_, Error>>()?;
    }
    if let Some(d) = args.d {
        spec.d = d;
    }
    if let Some(s) = args.s {
        spec.s = s;
    }
    if let Some(m) = args.m_values {
        spec.m_values = m;
    }
    if let Some(mult) = args.multipliers {
        spec.multipliers = mult;
    }
    if let Some(r) = args.fixed_r {
        spec.fixed_r = r;
    }
    if let Some(div) = args.r_divisor {
        spec.r_divisor = div;
    }
    spec.d_sweep_r = args.d_sweep_r;
    if let Some(iters) = args.max_iters {
        spec.solver.max_iters = iters;
    }
    spec.validate()?;

    let overlay = match &args.bounds_out {
        Some(_) => Some(experiments::emit_bound_overlay(&spec, &args.eps)?),
        None => None,
    };
    let outcome = experiments::run_sweep(&spec)?;
    experiments::write_sweep_csv(&outcome.rows, create(&args.out)?)?;
    if let (Some(path), Some(reports)) = (&args.bounds_out, &overlay) {
        theory::write_bound_csv(reports, create(path)?)?;
    }
    if let Some(path) = &args.trials_out {
        experiments::write_trials_csv(&outcome.trials, create(path)?)?;
    }
    println!(
        "{} rows ({} trials) written to {}",
        outcome.rows.len(),
        outcome.trials.len(),
        args.out.display()
    );
    Ok(())
}

fn theory_cmd(args: TheoryArgs) -> Result<()> {
    let rep = BoundReport::evaluate(BoundParams {
        d: args.d,
        s: args.s,
        radius: args.radius,
        r: args.r,
        m: args.m,
        eps: args.eps,
        u: args.u,
    })?;
    let mut stdout = io::stdout().lock();
    let f = |x: f64| format_sig(x, 6);
    writeln!(stdout, "uniform deviation  <= {} (u = {}), failure prob <= {}", f(rep.thm1.total), f(rep.u), f(rep.thm1.failure_prob))?;
    writeln!(stdout, "l1-SVM error bound    {} with failure prob <= {}", f(rep.thm3_error_bound), f(rep.thm3_prob))?;
    writeln!(stdout, "  needs m >= {}", rep.sample_size_required)?;
    writeln!(stdout, "l1l2-SVM error bound  {}", f(rep.thm8_error_bound))?;
    writeln!(stdout, "E f_a(a)              {}", f(theory::expected_fa_a(args.r)?))?;
    if let (Some(c), Some(cp)) = (args.c, args.c_prime) {
        let o = OverlapCoords::new(c, cp, args.r)?;
        let gap = theory::expected_fa_w(&o)? - theory::expected_fa_a(args.r)?;
        let lb = theory::thm2_lower_bound(&o)?;
        let note = if lb <= 0.0 { " (non-informative)" } else { "" };
        writeln!(stdout, "E f_a(w) - E f_a(a)   {}", f(gap))?;
        writeln!(stdout, "  lower bound         {}{note}", f(lb))?;
    }
    for w in &rep.warnings {
        writeln!(stdout, "warning: {w}")?;
    }
    if let Some(path) = &args.out {
        theory::write_bound_csv(std::slice::from_ref(&rep), create(path)?)?;
    }
    Ok(())
}

/// Returns whether every requested suite passed.
fn check(args: CheckArgs) -> Result<bool> {
    let suites = if args.suite == "all" {
        checks::Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse()?]
    };
    let mut all = true;
    for suite in suites {
        let rep = checks::run(suite, RngSeed::new(args.seed, 0))?;
        if args.verbose {
            println!("{rep}");
        } else {
            for case in rep.cases.iter().filter(|c| !c.passed) {
                println!("  FAIL {}: {}", case.name, case.detail);
            }
            println!(
                "{}: {}/{} passed (need {}) -> {}",
                suite.name(),
                rep.passed_count(),
                rep.cases.len(),
                rep.required,
                if rep.passed() { "PASS" } else { "FAIL" }
            );
        }
        all &= rep.passed();
    }
    Ok(all)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let validation = err.chain().any(|cause| {
        cause.downcast_ref::<Error>().is_some_and(Error::is_validation)
            || cause.is::<std::num::ParseFloatError>()
    });
    if validation {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a).map(|_| true),
        Command::Solve(a) => solve(a).map(|_| true),
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Theory(a) => theory_cmd(a).map(|_| true),
        Command::Check(a) => check(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
