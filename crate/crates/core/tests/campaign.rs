use sparsemap_core::bounds::{event_e_prob_lower, BoundParams};
use sparsemap_core::harness::{run_experiment, run_trial, ExperimentConfig};
use sparsemap_core::model::{draw_support, stream_rng, Stream};
use sparsemap_core::solver::SolverKind;
use sparsemap_core::{ModelParams, RipMode};

fn config(params: ModelParams, trials: u64) -> ExperimentConfig {
    ExperimentConfig {
        params,
        bounds: BoundParams::new(2.0, 25.0).unwrap(),
        trials,
        master_seed: 2024,
        solver: SolverKind::Exhaustive,
        cardinality_q: 2.0,
        rip_mode: RipMode::Sampled(50),
    }
}

#[test]
fn near_noiseless_strong_signals_are_recovered_exactly() {
    let params = ModelParams::new(10, 8, 0.1, 5.0, 0.5, 1e-6).unwrap();
    let cfg = config(params, 40);
    let run = run_experiment(&cfg).unwrap();
    assert!(run.failures.is_empty());
    for o in &run.outcomes {
        if o.diagnostics.within_cap {
            assert_eq!(o.record.missed_count, 0, "trial {}", o.record.trial_id);
            assert_eq!(o.record.false_count, 0, "trial {}", o.record.trial_id);
        }
    }
}

#[test]
fn trials_are_reproducible_and_independent_of_order() {
    let cfg = config(ModelParams::new(12, 8, 0.2, 0.0, 1.0, 0.3).unwrap(), 6);
    let forward: Vec<_> = (0..6).map(|t| run_trial(&cfg, t).unwrap()).collect();
    let backward: Vec<_> = (0..6).rev().map(|t| run_trial(&cfg, t).unwrap()).collect();
    for o in &backward {
        assert_eq!(o, &forward[o.record.trial_id as usize]);
    }
    let run = run_experiment(&cfg).unwrap();
    assert_eq!(run.outcomes, forward);
}

#[test]
fn event_frequency_dominates_chernoff_bound() {
    let params = ModelParams::new(16, 12, 0.125, 0.0, 1.0, 0.25).unwrap();
    let limit = 2.0 * params.expected_sparsity();
    let trials = 10_000;
    let hits = (0..trials)
        .filter(|&t| {
            let seed = config(params, 1).trial_seed(t);
            draw_support(&params, &mut stream_rng(seed, Stream::Support)).len() as f64 <= limit
        })
        .count();
    let freq = hits as f64 / trials as f64;
    assert!(freq >= event_e_prob_lower(&params), "{freq}");
}

#[test]
fn greedy_campaign_runs_and_reports_solver() {
    let mut cfg = config(
        ModelParams::new(12, 10, 1.0 / 6.0, 0.0, 1.0, 0.3).unwrap(),
        10,
    );
    cfg.solver = SolverKind::Greedy;
    let run = run_experiment(&cfg).unwrap();
    assert_eq!(run.aggregate.trials_run, 10);
    assert!(run.records().all(|r| r.solver == SolverKind::Greedy));
    assert!(run.records().all(|r| r.cost_est.is_finite()));
}
