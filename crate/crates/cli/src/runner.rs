//! Parallel campaign runner. Trials are independent and fully determined by
//! `(config, trial_id)`, so the result equals the sequential run regardless
//! of thread count or scheduling.

use rayon::prelude::*;
use sparsemap_core::harness::{run_trial, ExperimentConfig, ExperimentRun};

use crate::error::CliError;

/// Runs all trials on a rayon pool. `threads = None` uses the global pool.
pub fn run_parallel(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentRun, CliError> {
    config.validate()?;
    let work = || {
        (0..config.trials)
            .into_par_iter()
            .map(|t| (t, run_trial(config, t)))
            .collect::<Vec<_>>()
    };
    let results = match threads {
        None => work(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?
            .install(work),
    };
    Ok(ExperimentRun::from_results(config, results))
}
