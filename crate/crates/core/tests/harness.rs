use std::collections::HashSet;

use aew_core::harness::{run_theorem_a, run_theorem_b, run_theorem_c, theorem_b_point, ExperimentConfig, Theorem};
use aew_core::constructions::{theorem_b_risk_model, TheoremBModel};
use aew_core::{derive_trial_seed, SIMPLEX_TOL};

#[test]
fn trial_seeds_do_not_collide() {
    let mut seen = HashSet::with_capacity(1_000_000);
    for i in 0..1_000_000u64 {
        assert!(seen.insert(derive_trial_seed(0xabcdef, i)), "collision at {i}");
    }
    assert_eq!(derive_trial_seed(5, 17), derive_trial_seed(5, 17));
}

#[test]
fn all_runners_ignore_worker_count() {
    let mut a = ExperimentConfig::new(Theorem::A, 99);
    a.n_grid = vec![101, 1001];
    a.t_grid = vec![0.05, 0.1, 0.5, 1.0];
    a.trials = 500;
    let mut b = ExperimentConfig::new(Theorem::B, 99);
    b.n_grid = vec![1000, 3000];
    b.trials = 40;
    let mut c = ExperimentConfig::new(Theorem::C, 99);
    c.trials = 100;
    let (ra, rb, rc) = (run_theorem_a(&a).unwrap(), run_theorem_b(&b).unwrap(), run_theorem_c(&c).unwrap());
    for w in [4, 16] {
        a.workers = w;
        b.workers = w;
        c.workers = w;
        assert_eq!(run_theorem_a(&a).unwrap(), ra);
        assert_eq!(run_theorem_b(&b).unwrap(), rb);
        assert_eq!(run_theorem_c(&c).unwrap(), rc);
    }
    // positive and of order 1/sqrt(n) at every low temperature
    for r in ra.iter().filter(|r| r.temperature <= 0.1) {
        let s = (r.n as f64).sqrt() * r.exact_mean_excess;
        assert!(s > 0.01 && s < 1.0, "{r:?}");
    }
}

#[test]
fn theorem_a_monte_carlo_agreement_rate() {
    // 3-stderr agreement should fail in about 0.3% of reruns
    let mut failures = 0;
    for seed in 0..100 {
        let mut c = ExperimentConfig::new(Theorem::A, 5000 + seed);
        c.n_grid = vec![101];
        c.t_grid = vec![0.1];
        c.trials = 10_000;
        let r = &run_theorem_a(&c).unwrap()[0];
        if (r.mc_mean_excess - r.exact_mean_excess).abs() > 3.0 * r.mc_stderr {
            failures += 1;
        }
    }
    assert!(failures <= 2, "{failures} of 100 reruns disagreed");
}

#[test]
fn theorem_b_records_are_consistent() {
    let mut c = ExperimentConfig::new(Theorem::B, 1);
    c.n_grid = vec![2000];
    c.trials = 60;
    let (row, records) = theorem_b_point(&c, 0, 2000, 0.05).unwrap();
    let model = TheoremBModel::new(&c.theorem_b_params(2000, 0.05)).unwrap();
    let oracle_risk = theorem_b_risk_model(&model).member_risk(0);
    assert_eq!(records.len(), 60);
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r.trial_index, i);
        let total: f64 = r.weights.iter().sum();
        assert!((total - 1.0).abs() <= SIMPLEX_TOL);
        // a mixture can beat the best member, but not zero risk
        assert!(r.excess >= -oracle_risk);
        if let Some(j) = r.flags.system_index {
            assert!(j >= 1 && r.weights[j] >= 1.0 - row.rho - 1e-9);
        }
    }
    let collapsed = records.iter().filter(|r| matches!(r.flags.collapse_index, Some(j) if j >= 1)).count();
    assert_eq!(collapsed, row.collapse.count);
}

#[test]
fn theorem_c_quantile_constant_is_stable() {
    let mut c = ExperimentConfig::new(Theorem::C, 12);
    c.trials = 1000;
    let t = run_theorem_c(&c).unwrap();
    // quantile / ((b + B)(x + psi(theta)) / n); the bound column carries the unit constant
    let fitted: Vec<f64> = t.rows.iter().map(|r| r.quantile_excess / r.theorem_c_bound).collect();
    let mean = fitted.iter().sum::<f64>() / fitted.len() as f64;
    for f in &fitted {
        assert!((f / mean - 1.0).abs() <= 0.5, "{fitted:?}");
    }
    for r in &t.rows {
        assert!(r.quantile_excess <= r.theorem_c_bound);
        assert!(r.isomorphism.freq <= r.isomorphism_target + 3.0 * r.isomorphism.stderr());
    }
}
