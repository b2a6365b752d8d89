//! Seeded Monte Carlo trials: generate an instance, solve for the support,
//! score the estimate against the closed-form bounds, and aggregate.
//!
//! Everything a trial does is a function of `(config, trial_id)`; the
//! aggregate only depends on the set of outcomes, so callers may run trials
//! in any order or in parallel.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundParams, Theorem1Result, Theorem2Result};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::metrics::{missed_energy, partition_supports};
use crate::model::{
    derive_seed, estimate_rip, generate_instance, stream_rng, ModelParams, RipEstimate, RipMode,
    Stream,
};
use crate::solver::{exhaustive_map, gamma_cost, greedy_map, regress_on_support, SolverKind};

fn default_q() -> f64 {
    2.0
}

fn default_rip_mode() -> RipMode {
    RipMode::Exhaustive
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub bounds: BoundParams,
    pub trials: u64,
    pub master_seed: u64,
    pub solver: SolverKind,
    /// Cardinality cap multiplier: the estimator searches `|S| ≤ floor(q·Np)`.
    #[serde(default = "default_q")]
    pub cardinality_q: f64,
    #[serde(default = "default_rip_mode")]
    pub rip_mode: RipMode,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.bounds.validate()?;
        if self.trials == 0 {
            return Err(Error::invalid("trials", 0.0, "need at least one trial"));
        }
        if !(self.cardinality_q > 1.0 && self.cardinality_q.is_finite()) {
            return Err(Error::invalid(
                "cardinality_q",
                self.cardinality_q,
                "must be greater than 1",
            ));
        }
        Ok(())
    }

    pub fn cap(&self) -> usize {
        self.params.cardinality_cap(self.cardinality_q)
    }

    /// Sparsity level at which each trial measures the RIP constant:
    /// `min(floor(4Np), M)`.
    pub fn rip_level(&self) -> usize {
        let level = (4.0 * self.params.expected_sparsity()).floor() as usize;
        level.min(self.params.m).min(self.params.n)
    }

    /// Seed of trial `trial_id`.
    pub fn trial_seed(&self, trial_id: u64) -> u64 {
        derive_seed(self.master_seed, Stream::Trial, trial_id)
    }

    /// Energy bound compared against the missed energy. With `p = 0` the
    /// true support is always empty and the bound degenerates to its limit 0.
    fn energy_bound(&self) -> Result<f64> {
        if self.params.p == 0.0 {
            return Ok(0.0);
        }
        Ok(bounds::theorem1(&self.params, self.bounds.beta)?.energy_bound)
    }
}

/// One serialized line of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub seed: u64,
    pub true_support_size: usize,
    pub est_support_size: usize,
    pub missed_count: usize,
    pub false_count: usize,
    pub missed_energy: f64,
    pub theorem1_energy_bound: f64,
    pub bound_satisfied: bool,
    pub event_e: bool,
    pub cost_true: f64,
    pub cost_est: f64,
    pub solver: SolverKind,
}

/// Per-trial quantities that are not part of the serialized record.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDiagnostics {
    /// `|S| ≤ cap`, i.e. the true support is feasible for the estimator.
    pub within_cap: bool,
    pub rip: RipEstimate,
    /// `‖x̂ − x‖₂` of least squares on the estimated support.
    pub regression_error: Option<f64>,
    /// Regression error bound at the measured `ε`; `None` when `ε ≥ 1`.
    pub regression_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub diagnostics: TrialDiagnostics,
}

impl TrialOutcome {
    /// E holds and the true support is feasible: the conditioning event of
    /// the recovery guarantees.
    pub fn conditioned(&self) -> bool {
        self.record.event_e && self.diagnostics.within_cap
    }

    pub fn no_miss(&self) -> bool {
        self.record.missed_count == 0
    }

    pub fn perfect(&self) -> bool {
        self.record.missed_count == 0 && self.record.false_count == 0
    }
}

/// Runs one trial. Errors carry the trial id.
pub fn run_trial(config: &ExperimentConfig, trial_id: u64) -> Result<TrialOutcome> {
    run_trial_inner(config, trial_id).map_err(|e| Error::Trial {
        trial_id,
        source: alloc::boxed::Box::new(e),
    })
}

fn run_trial_inner(config: &ExperimentConfig, trial_id: u64) -> Result<TrialOutcome> {
    config.validate()?;
    let params = &config.params;
    let seed = config.trial_seed(trial_id);
    let inst = generate_instance(params, seed)?;
    let cap = config.cap();

    let estimate = match config.solver {
        SolverKind::Exhaustive => exhaustive_map(&inst, cap)?,
        SolverKind::Greedy => greedy_map(&inst, cap)?,
    };
    let truth = inst.true_support();
    let part = partition_supports(truth, &estimate.support, params.n)?;
    let energy = missed_energy(&inst.signal, &part);
    let energy_bound = config.energy_bound()?;
    let event_e = truth.len() as f64 <= 2.0 * params.expected_sparsity();
    let cost_true = gamma_cost(truth, &inst)?.total;

    let rip = estimate_rip(
        &inst.matrix,
        config.rip_level(),
        config.rip_mode,
        &mut stream_rng(seed, Stream::Rip),
    )?;
    let regression_error = match regress_on_support(&inst, &estimate.support) {
        Ok(xhat) => {
            let diff: Vec<f64> = xhat
                .iter()
                .zip(inst.signal.values())
                .map(|(a, b)| a - b)
                .collect();
            Some(norm(&diff))
        }
        Err(Error::RankDeficient { .. }) => None,
        Err(e) => return Err(e),
    };
    let regression_bound = if params.p > 0.0 && rip.epsilon_hat < 1.0 {
        Some(bounds::regression_error_bound_formula(
            params,
            config.bounds.beta,
            rip.epsilon_hat,
        )?)
    } else {
        None
    };

    let record = TrialRecord {
        trial_id,
        seed,
        true_support_size: truth.len(),
        est_support_size: estimate.support.len(),
        missed_count: part.missed.len(),
        false_count: part.false_alarms.len(),
        missed_energy: energy,
        theorem1_energy_bound: energy_bound,
        bound_satisfied: energy <= energy_bound,
        event_e,
        cost_true,
        cost_est: estimate.cost.total,
        solver: estimate.solver,
    };
    Ok(TrialOutcome {
        record,
        diagnostics: TrialDiagnostics {
            within_cap: truth.len() <= cap,
            rip,
            regression_error,
            regression_bound,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial_id: u64,
    pub message: String,
    pub numerical: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnconditionedFractions {
    pub frac_bound_satisfied: f64,
    pub frac_no_miss: f64,
    pub frac_perfect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Bounds {
    pub prob_no_miss: f64,
    pub prob_perfect: f64,
    pub vacuous: bool,
}

/// Campaign summary. The `frac_bound_satisfied`, `frac_no_miss` and
/// `frac_perfect` fractions are over the conditioned trials (event E holds
/// and the true support fits under the cap); `unconditioned` repeats them
/// over every successful trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials_run: u64,
    pub failures: u64,
    pub conditioned_trials: u64,
    pub frac_bound_satisfied: f64,
    pub frac_event_e: f64,
    pub frac_no_miss: f64,
    pub frac_perfect: f64,
    pub mean_missed_energy: f64,
    pub unconditioned: UnconditionedFractions,
    pub event_e_prob_lower: f64,
    pub theorem1_prob_lower: Option<f64>,
    pub theorem1_vacuous: Option<bool>,
    pub theorem2_prob_bounds: Option<Theorem2Bounds>,
    /// Conditioned trials with the energy bound satisfied where the
    /// regression error bound could be evaluated (measured `ε < 1`).
    pub regression_checked: u64,
    pub regression_bound_violations: u64,
    /// Eligible trials whose measured `ε ≥ 1` leaves the bound undefined.
    pub regression_unbounded: u64,
    /// Eligible trials where least squares on the estimate was rank deficient.
    pub regression_rank_deficient: u64,
}

fn fraction(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

impl Aggregate {
    /// Summarises outcomes; input order does not matter.
    pub fn from_outcomes(
        config: &ExperimentConfig,
        outcomes: &[TrialOutcome],
        failures: u64,
    ) -> Self {
        let mut sorted: Vec<&TrialOutcome> = outcomes.iter().collect();
        sorted.sort_by_key(|o| o.record.trial_id);

        let run = sorted.len() as u64;
        let count = |pred: &dyn Fn(&TrialOutcome) -> bool, subset: &[&TrialOutcome]| {
            subset.iter().filter(|o| pred(o)).count() as u64
        };
        let conditioned: Vec<&TrialOutcome> =
            sorted.iter().copied().filter(|o| o.conditioned()).collect();
        let nc = conditioned.len() as u64;

        let bound_ok = |o: &TrialOutcome| o.record.bound_satisfied;
        let no_miss = |o: &TrialOutcome| o.no_miss();
        let perfect = |o: &TrialOutcome| o.perfect();

        let mean_missed_energy = if run == 0 {
            0.0
        } else {
            sorted.iter().map(|o| o.record.missed_energy).sum::<f64>() / run as f64
        };

        let eligible: Vec<&TrialOutcome> = conditioned
            .iter()
            .copied()
            .filter(|o| o.record.bound_satisfied)
            .collect();
        let mut regression_checked = 0;
        let mut regression_bound_violations = 0;
        let mut regression_unbounded = 0;
        let mut regression_rank_deficient = 0;
        for o in eligible {
            match (
                o.diagnostics.regression_error,
                o.diagnostics.regression_bound,
            ) {
                (None, _) => regression_rank_deficient += 1,
                (Some(_), None) => regression_unbounded += 1,
                (Some(err), Some(bound)) => {
                    regression_checked += 1;
                    if err > bound {
                        regression_bound_violations += 1;
                    }
                }
            }
        }

        let params = &config.params;
        let t1: Option<Theorem1Result> = bounds::theorem1(params, config.bounds.beta).ok();
        let t2: Option<Theorem2Result> = bounds::theorem2(params, &config.bounds).ok();

        Aggregate {
            trials_run: run,
            failures,
            conditioned_trials: nc,
            frac_bound_satisfied: fraction(count(&bound_ok, &conditioned), nc),
            frac_event_e: fraction(count(&|o| o.record.event_e, &sorted), run),
            frac_no_miss: fraction(count(&no_miss, &conditioned), nc),
            frac_perfect: fraction(count(&perfect, &conditioned), nc),
            mean_missed_energy,
            unconditioned: UnconditionedFractions {
                frac_bound_satisfied: fraction(count(&bound_ok, &sorted), run),
                frac_no_miss: fraction(count(&no_miss, &sorted), run),
                frac_perfect: fraction(count(&perfect, &sorted), run),
            },
            event_e_prob_lower: bounds::event_e_prob_lower(params),
            theorem1_prob_lower: t1.map(|t| t.prob_lower),
            theorem1_vacuous: t1.map(|t| t.vacuous),
            theorem2_prob_bounds: t2.map(|t| Theorem2Bounds {
                prob_no_miss: t.prob_no_miss,
                prob_perfect: t.prob_perfect,
                vacuous: t.vacuous,
            }),
            regression_checked,
            regression_bound_violations,
            regression_unbounded,
            regression_rank_deficient,
        }
    }
}

/// Everything a campaign produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub aggregate: Aggregate,
    /// Successful trials in trial-id order.
    pub outcomes: Vec<TrialOutcome>,
    pub failures: Vec<TrialFailure>,
}

impl ExperimentRun {
    /// Collects per-trial results (any order) into a run.
    pub fn from_results(
        config: &ExperimentConfig,
        results: impl IntoIterator<Item = (u64, Result<TrialOutcome>)>,
    ) -> Self {
        let mut outcomes = Vec::new();
        let mut failures = Vec::new();
        for (trial_id, r) in results {
            match r {
                Ok(o) => outcomes.push(o),
                Err(e) => failures.push(TrialFailure {
                    trial_id,
                    numerical: e.is_numerical(),
                    message: e.to_string(),
                }),
            }
        }
        outcomes.sort_by_key(|o| o.record.trial_id);
        failures.sort_by_key(|f| f.trial_id);
        let aggregate = Aggregate::from_outcomes(config, &outcomes, failures.len() as u64);
        Self {
            aggregate,
            outcomes,
            failures,
        }
    }

    pub fn records(&self) -> impl Iterator<Item = &TrialRecord> {
        self.outcomes.iter().map(|o| &o.record)
    }
}

/// Runs every trial sequentially.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    config.validate()?;
    Ok(ExperimentRun::from_results(
        config,
        (0..config.trials).map(|t| (t, run_trial(config, t))),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(p: f64, mu1: f64, sigma_e: f64) -> ExperimentConfig {
        ExperimentConfig {
            params: ModelParams::new(10, 8, p, mu1, 1.0, sigma_e).unwrap(),
            bounds: BoundParams::new(2.0, 25.0).unwrap(),
            trials: 5,
            master_seed: 42,
            solver: SolverKind::Exhaustive,
            cardinality_q: 2.0,
            rip_mode: RipMode::Exhaustive,
        }
    }

    #[test]
    fn trial_is_deterministic() {
        let c = config(0.2, 1.0, 0.3);
        assert_eq!(run_trial(&c, 3).unwrap(), run_trial(&c, 3).unwrap());
        assert_ne!(
            run_trial(&c, 3).unwrap().record.seed,
            run_trial(&c, 4).unwrap().record.seed
        );
    }

    #[test]
    fn empty_model_trial() {
        let c = config(0.0, 1.0, 0.3);
        let o = run_trial(&c, 0).unwrap();
        assert_eq!(o.record.true_support_size, 0);
        assert_eq!(o.record.missed_energy, 0.0);
        assert!(o.record.bound_satisfied);
        let run = run_experiment(&c).unwrap();
        assert_eq!(run.aggregate.theorem1_prob_lower, None);
    }

    #[test]
    fn single_trial_fractions_are_binary() {
        let mut c = config(0.2, 1.0, 0.3);
        c.trials = 1;
        let a = run_experiment(&c).unwrap().aggregate;
        for f in [
            a.frac_bound_satisfied,
            a.frac_event_e,
            a.frac_no_miss,
            a.frac_perfect,
        ] {
            assert!(f == 0.0 || f == 1.0);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = config(0.2, 1.0, 0.3);
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = config(0.2, 1.0, 0.3);
        c.cardinality_q = 1.0;
        assert!(c.validate().is_err());
        let c = config(0.2, 1.0, 0.3);
        assert_eq!(c.cap(), 4);
        assert_eq!(c.rip_level(), 8);
    }

    #[test]
    fn aggregate_is_order_independent() {
        let c = config(0.2, 2.0, 0.3);
        let mut outcomes: Vec<_> = (0..5).map(|t| run_trial(&c, t).unwrap()).collect();
        let a = Aggregate::from_outcomes(&c, &outcomes, 0);
        outcomes.reverse();
        assert_eq!(a, Aggregate::from_outcomes(&c, &outcomes, 0));
        assert!(a.frac_perfect <= a.frac_no_miss);
    }
}
