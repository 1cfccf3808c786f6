//! Replica-level parallelism.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

/// Caps the worker count when set to a positive integer.
pub const THREADS_ENV: &str = "STAVSKAYA_THREADS";

pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context(THREADS_ENV),
        Ok(text) => match text.trim().parse::<usize>() {
            Ok(0) | Err(_) => bail!("{THREADS_ENV} must be a positive integer, got {text:?}"),
            Ok(n) => Ok(Some(n)),
        },
    }
}

pub fn pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    builder.build().context("starting worker pool")
}

/// `f(0), …, f(n−1)` computed in parallel and returned in index order, so
/// scheduling never shows up in the output.
pub fn ordered_map<T, F>(n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    pool()?.install(|| (0..n).into_par_iter().map(&f).collect())
}
