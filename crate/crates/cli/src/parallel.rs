//! Index-ordered parallel Monte Carlo.

use rayon::prelude::*;

use crate::error::{CliError, Result};

pub const THREADS_VAR: &str = "PDMP_THREADS";

/// Worker cap from `PDMP_THREADS`; `None` means available parallelism.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::usage(format!("{THREADS_VAR} must be a non-negative integer, got '{v}'"))),
        },
    }
}

/// Evaluates `f(0), …, f(n − 1)` on the worker pool and returns the
/// results in index order; the first error by index wins.
pub fn par_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(cap) = thread_cap()? {
        builder = builder.num_threads(cap);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::data(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect::<Vec<_>>())
        .into_iter()
        .collect()
}
