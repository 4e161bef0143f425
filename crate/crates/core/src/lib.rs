//! Sparse classifier recovery with ℓ1-constrained support vector machines.
//!
//! The crate covers the whole pipeline used to study how well a hinge-loss
//! minimizer over an ℓ1 ball (optionally intersected with the unit ℓ2 ball)
//! recovers a sparse unit-norm classifier from Gaussian training data:
//!
//! - [`model`]: seeded instance generation, the hinge objective `f_a`, CSV I/O.
//! - [`geometry`]: Euclidean projections and linear maximization over the
//!   constraint sets.
//! - [`solvers`]: projected subgradient solvers for both SVM variants, the
//!   closed-form one-bit compressed sensing estimator and recovery metrics.
//! - [`theory`]: closed-form expectations, lower bounds, concentration and
//!   sample-size bounds, with quadrature and Monte Carlo cross-checks.
//! - [`experiments`]: deterministic parameter sweeps, bound overlays and the
//!   oracle check suites exposed by the CLI.
//!
//! Trial-level work runs on rayon when the `parallel` feature is enabled (the
//! default) and falls back to a plain sequential loop otherwise. Results are
//! identical either way.

pub mod error;
pub mod exec;
pub mod experiments;
pub mod geometry;
pub mod model;
pub mod oracle;
pub mod solvers;
pub mod theory;

mod format;
mod linalg;

pub use error::{Error, Result};
pub use format::format_sig;
pub use model::{ConstraintKind, ConstraintSet, RngSeed, SparseClassifier, TrainingSet};
pub use solvers::{RecoveryError, SolverConfig, SolverResult};
