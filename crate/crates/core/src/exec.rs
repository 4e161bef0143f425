//! Index-parallel map used for trials, sweep points and Monte Carlo blocks.
//!
//! Every helper returns results in index order, so aggregation downstream is
//! independent of scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sequential `(0..n).map(f).collect()`.
pub fn map_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Rayon-backed `(0..n).map(f).collect()`.
#[cfg(feature = "parallel")]
pub fn map_par<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Dispatches to [`map_par`] when the `parallel` feature is on.
pub fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(n, f)
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
