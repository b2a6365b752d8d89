//! Subcommand implementations, independent of argument parsing so they can
//! be driven from tests.

use rand::seq::index;
use serde::Serialize;
use sparsemap_core::bounds::{
    self, constant_c, event_e_prob_lower, fig1_sweep, linear_grid, BoundParams, Fig1Row,
    Theorem1Result, Theorem2Result,
};
use sparsemap_core::harness::ExperimentRun;
use sparsemap_core::metrics::{check_propositions, PropositionReport};
use sparsemap_core::model::{draw_matrix, estimate_rip, stream_rng, Stream};
use sparsemap_core::{DenseMatrix, ModelParams, RipEstimate, RipMode};

use crate::config::ConfigFile;
use crate::error::CliError;
use crate::runner::run_parallel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub params: ModelParams,
    pub c: f64,
    pub event_e_prob_lower: f64,
    pub theorem1: Theorem1Result,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem2: Option<Theorem2Result>,
}

/// Closed-form constants at `beta`; the second recovery bound is included
/// when `beta_bar` is given or present in the config.
pub fn constants(
    cfg: &ConfigFile,
    beta: f64,
    beta_bar: Option<f64>,
) -> Result<ConstantsReport, CliError> {
    let params = &cfg.params;
    let beta_bar = beta_bar.or(cfg.bounds.map(|b| b.beta_bar));
    let theorem2 = match beta_bar {
        Some(bb) => Some(bounds::theorem2(params, &BoundParams::new(beta, bb)?)?),
        None => None,
    };
    Ok(ConstantsReport {
        params: *params,
        c: constant_c(params)?,
        event_e_prob_lower: event_e_prob_lower(params),
        theorem1: bounds::theorem1(params, beta)?,
        theorem2,
    })
}

/// `steps` evenly spaced values of β over `[beta_min, beta_max]`.
pub fn fig1(
    cfg: &ConfigFile,
    beta_min: f64,
    beta_max: f64,
    steps: usize,
) -> Result<Vec<Fig1Row>, CliError> {
    if !(beta_min > 1.0 && beta_max >= beta_min) {
        return Err(CliError::Invalid(format!(
            "beta range [{beta_min}, {beta_max}] must satisfy 1 < min <= max"
        )));
    }
    if steps == 0 || (steps == 1 && beta_max > beta_min) {
        return Err(CliError::Invalid(
            "steps must be at least 2 for a nondegenerate range".into(),
        ));
    }
    Ok(fig1_sweep(
        &cfg.params,
        &linear_grid(beta_min, beta_max, steps),
    )?)
}

pub fn simulate(cfg: &ConfigFile, threads: Option<usize>) -> Result<ExperimentRun, CliError> {
    run_parallel(&cfg.experiment()?, threads)
}

/// Seed for the single-matrix subcommands: explicit, else the config's
/// master seed, else 0.
fn matrix_seed(cfg: &ConfigFile, seed: Option<u64>) -> u64 {
    seed.or(cfg.master_seed).unwrap_or(0)
}

fn matrix_for(cfg: &ConfigFile, seed: u64) -> DenseMatrix {
    draw_matrix(&cfg.params, &mut stream_rng(seed, Stream::Matrix))
}

fn rip_mode(samples: Option<usize>) -> RipMode {
    samples.map_or(RipMode::Exhaustive, RipMode::Sampled)
}

/// RIP constant at `level` of the sensing matrix drawn from `seed`.
pub fn verify_rip(
    cfg: &ConfigFile,
    level: usize,
    samples: Option<usize>,
    seed: Option<u64>,
) -> Result<RipEstimate, CliError> {
    let seed = matrix_seed(cfg, seed);
    let a = matrix_for(cfg, seed);
    Ok(estimate_rip(
        &a,
        level,
        rip_mode(samples),
        &mut stream_rng(seed, Stream::Rip),
    )?)
}

/// Draws one matrix and two random disjoint supports of size
/// `floor(level/2)` each, measures `ε` at `2·floor(level/2)` and runs the
/// near-orthogonality checks. `level` defaults to `min(floor(4Np), M, N)`.
pub fn propositions(
    cfg: &ConfigFile,
    seed: Option<u64>,
    level: Option<usize>,
    samples: Option<usize>,
) -> Result<PropositionReport, CliError> {
    let params = &cfg.params;
    let level = level.unwrap_or_else(|| {
        ((4.0 * params.expected_sparsity()).floor() as usize)
            .min(params.m)
            .min(params.n)
    });
    if level > params.n {
        return Err(CliError::Invalid(format!(
            "level {level} exceeds N = {}",
            params.n
        )));
    }
    let seed = matrix_seed(cfg, seed);
    let a = matrix_for(cfg, seed);
    let half = level / 2;
    let mut rng = stream_rng(seed, Stream::Propositions);
    let picked = index::sample(&mut rng, params.n, 2 * half).into_vec();
    let mut s_i = picked[..half].to_vec();
    let mut s_j = picked[half..].to_vec();
    s_i.sort_unstable();
    s_j.sort_unstable();
    let eps = estimate_rip(
        &a,
        2 * half,
        rip_mode(samples),
        &mut stream_rng(seed, Stream::Rip),
    )?;
    Ok(check_propositions(&a, &s_i, &s_j, params, eps.epsilon_hat)?)
}
