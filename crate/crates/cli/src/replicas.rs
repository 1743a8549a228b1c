use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;

use crate::error::{CliError, CliResult};

/// Worker count: `SRPAT_JOBS` if set, else the flag; 0 means all cores.
pub fn resolve_jobs(flag: usize) -> CliResult<usize> {
    match std::env::var("SRPAT_JOBS") {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Validation(format!("SRPAT_JOBS must be a non-negative integer, got `{s}`"))),
        Err(_) => Ok(flag),
    }
}

/// Runs `f(0), .., f(replicas - 1)` on `jobs` workers and returns the
/// results in replica order. A panicking replica becomes an internal error
/// naming the replica.
pub fn run_replicas<T, F>(jobs: usize, replicas: u32, f: F) -> CliResult<Vec<T>>
where
    T: Send,
    F: Fn(u32) -> CliResult<T> + Sync,
{
    let guarded = |r: u32| {
        catch_unwind(AssertUnwindSafe(|| f(r))).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            Err(CliError::Internal(format!("replica {r} panicked: {msg}")))
        })
    };
    let results: Vec<CliResult<T>> = if jobs == 1 {
        (0..replicas).map(guarded).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
        pool.install(|| (0..replicas).into_par_iter().map(guarded).collect())
    };
    results.into_iter().collect()
}
