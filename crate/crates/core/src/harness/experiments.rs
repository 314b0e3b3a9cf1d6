//! Monte Carlo runners for the three constructions.

use serde::{Deserialize, Serialize};

use super::config::{DictionaryChoice, ExperimentConfig, Theorem};
use super::runner::{point_seed, run_trials, summarize, TailFrequency, TrialFlags, TrialRecord};
use crate::aggregation::{aew_weights, aggregate_risk, empirical_risk, Dictionary, EmpiricalRisks, Loss, Temperature};
use crate::complexity::{key_estimate_bound, lambda_x, pac_bound_residual, psi, theorem_c_bound, theorem_c_theta, ExcessRiskProfile};
use crate::constructions::{
    bernstein_dictionary, system_cj_indices, theorem_a_exact_expected_excess, theorem_a_exact_tail, theorem_a_excess, theorem_a_sample,
    theorem_b_draw, theorem_b_excess, BernsteinModel, TheoremAModel, TheoremBModel,
};
use crate::error::{invalid, Error, Result};
use crate::rng::{rng_from_seed, TrialRng};
use crate::stats::ols_slope;

/// Slack on the weight-collapse implication, absorbing floating-point rounding.
pub const IMPLICATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremARow {
    pub n: usize,
    pub temperature: f64,
    pub exact_mean_excess: f64,
    pub mc_mean_excess: f64,
    pub mc_stderr: f64,
    pub exact_tail: f64,
    pub mc_tail: TailFrequency,
    pub threshold: f64,
    pub trials: usize,
    pub seed: u64,
}

impl TheoremARow {
    pub fn sqrt_n_exact_mean(&self) -> f64 {
        (self.n as f64).sqrt() * self.exact_mean_excess
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremBRow {
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    pub rho: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub temperature: f64,
    pub trials: usize,
    pub seed: u64,
    /// Some `j >= 2` has weight at least `1 - rho`.
    pub collapse: TailFrequency,
    /// Some `j >= 2` solves the collapse system.
    pub system: TailFrequency,
    /// Excess risk at least `c5 eps sqrt(ln M / n)`.
    pub large_excess: TailFrequency,
    pub large_excess_threshold: f64,
    pub implication_violations: usize,
    /// Trials where the oracle itself took weight `1 - rho`.
    pub oracle_collapses: usize,
    /// Exact excess risk of every non-oracle member.
    pub suboptimal_excess: f64,
    pub mean_excess: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCRow {
    pub n: usize,
    pub temperature: f64,
    pub trials: usize,
    pub seed: u64,
    pub mean_excess: f64,
    pub stderr: f64,
    /// `1 - 2 e^{-x}`.
    pub quantile_level: f64,
    pub quantile_excess: f64,
    pub x: f64,
    pub theta: f64,
    pub psi_theta: f64,
    pub theorem_c_bound: f64,
    pub key_estimate: f64,
    pub pac_residual: f64,
    pub lambda: f64,
    pub isomorphism: TailFrequency,
    /// `2 e^{-x}`.
    pub isomorphism_target: f64,
    pub low_temperature: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCTable {
    pub rows: Vec<TheoremCRow>,
    /// `(T, slope of ln mean excess against ln n)`; absent when fewer than two `n` or a non-positive mean.
    pub slopes: Vec<(f64, Option<f64>)>,
    /// Grid points outside the low-temperature regime `T <= c0 max{b, B}`; they still run.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ResultTable {
    A(Vec<TheoremARow>),
    B(Vec<TheoremBRow>),
    C(TheoremCTable),
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    match config.theorem {
        Theorem::A => run_theorem_a(config).map(ResultTable::A),
        Theorem::B => run_theorem_b(config).map(ResultTable::B),
        Theorem::C => run_theorem_c(config).map(ResultTable::C),
    }
}

fn grid(config: &ExperimentConfig) -> impl Iterator<Item = (u64, usize, f64)> + '_ {
    config
        .n_grid
        .iter()
        .enumerate()
        .flat_map(move |(i, &n)| config.t_grid.iter().enumerate().map(move |(k, &t)| ((i * config.t_grid.len() + k) as u64, n, t)))
}

fn expect_theorem(config: &ExperimentConfig, t: Theorem) -> Result<()> {
    if config.theorem != t {
        return invalid(format!("config is for {:?}, runner expects {:?}", config.theorem, t));
    }
    config.validate()
}

/// Exact expectation and tail alongside a Monte Carlo cross-check.
pub fn run_theorem_a(config: &ExperimentConfig) -> Result<Vec<TheoremARow>> {
    expect_theorem(config, Theorem::A)?;
    let mut rows = Vec::new();
    for (point, n, t) in grid(config) {
        let model = TheoremAModel::new(n)?;
        let temp = Temperature::new(t)?;
        let threshold = config.tail_c / (n as f64).sqrt();
        let records = run_trials(config.trials, point_seed(config.master_seed, point), config.workers, |i, seed, rng| {
            let sample = theorem_a_sample(&model, rng);
            let plus = sample.iter().filter(|(x, _)| *x > 0.0).count();
            let nf = n as f64;
            // f_1 loses 1 on X = 1, f_2 loses 1 on X = -1
            let risks = EmpiricalRisks::new(vec![plus as f64 / nf, (n - plus) as f64 / nf], n)?;
            let w = aew_weights(&risks, temp)?;
            let excess = theorem_a_excess(w[0], &model)?;
            Ok(TrialRecord {
                trial_index: i,
                seed,
                risks: risks.values,
                weights: w.into_inner(),
                excess,
                flags: TrialFlags { large_excess: excess >= threshold, ..TrialFlags::default() },
            })
        })?;
        let s = summarize(&records, &[])?;
        rows.push(TheoremARow {
            n,
            temperature: t,
            exact_mean_excess: theorem_a_exact_expected_excess(n, t)?,
            mc_mean_excess: s.mean_excess,
            mc_stderr: s.stderr,
            exact_tail: theorem_a_exact_tail(n, t, threshold)?,
            mc_tail: s.large_excess,
            threshold,
            trials: config.trials,
            seed: config.master_seed,
        });
    }
    Ok(rows)
}

/// Weight-collapse frequencies; the collapse implication is enforced on every trial.
pub fn run_theorem_b(config: &ExperimentConfig) -> Result<Vec<TheoremBRow>> {
    expect_theorem(config, Theorem::B)?;
    grid(config).map(|(point, n, t)| theorem_b_point(config, point, n, t).map(|(row, _)| row)).collect()
}

/// One grid point of [`run_theorem_b`] together with its per-trial records.
///
/// `collapse_index` in a record is the first index of any weight `>= 1 - rho`, the oracle
/// (index 0) included; the row's collapse frequency counts only indices `>= 1`.
pub fn theorem_b_point(config: &ExperimentConfig, point: u64, n: usize, t: f64) -> Result<(TheoremBRow, Vec<TrialRecord>)> {
    config.validate()?;
    let c5 = config.constants.get("c5");
    let model = TheoremBModel::new(&config.theorem_b_params(n, t))?;
    let temp = Temperature::new(t)?;
    let large = c5 * model.epsilon * ((model.m as f64).ln() / n as f64).sqrt();
    let records = run_trials(config.trials, point_seed(config.master_seed, point), config.workers, |i, seed, rng| {
        let draw = theorem_b_draw(&model, rng);
        let rbar = draw.rbar(&model);
        let w = aew_weights(&draw.empirical_risks(&model)?, temp)?;
        let system = system_cj_indices(&rbar, &model)?;
        for &j in &system {
            if w[j] < 1.0 - model.rho - IMPLICATION_TOL {
                return Err(Error::InvariantViolation(format!(
                    "trial {i} (seed {seed}): index {j} solves the collapse system but has weight {} < 1 - rho = {}",
                    w[j],
                    1.0 - model.rho
                )));
            }
        }
        let heavy = w.as_slice().iter().position(|&v| v >= 1.0 - model.rho);
        let excess = theorem_b_excess(&model, &w)?;
        Ok(TrialRecord {
            trial_index: i,
            seed,
            risks: rbar,
            weights: w.into_inner(),
            excess,
            flags: TrialFlags {
                collapse_index: heavy,
                system_index: system.first().copied(),
                large_excess: excess >= large,
                isomorphism_violation: false,
            },
        })
    })?;
    let oracle_collapses = records.iter().filter(|r| r.flags.collapse_index == Some(0)).count();
    let mut s = summarize(&records, &[])?;
    s.collapse = TailFrequency::new(s.collapse.count - oracle_collapses, s.trials)?;
    let row = TheoremBRow {
        n,
        m: model.m,
        lambda: model.lambda,
        rho: model.rho,
        delta: model.delta,
        epsilon: model.epsilon,
        kappa: model.kappa,
        temperature: t,
        trials: config.trials,
        seed: config.master_seed,
        collapse: s.collapse,
        system: s.system,
        large_excess: s.large_excess,
        large_excess_threshold: large,
        implication_violations: 0,
        oracle_collapses,
        suboptimal_excess: model.suboptimal_excess(),
        mean_excess: s.mean_excess,
        stderr: s.stderr,
    };
    Ok((row, records))
}

/// Consecutive collapse frequencies (sorted by `n`) either do not decrease or have
/// overlapping 95% Wilson intervals.
pub fn collapse_trend_ok(rows: &[TheoremBRow]) -> bool {
    let mut sorted: Vec<&TheoremBRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.n);
    sorted.windows(2).all(|w| w[1].collapse.freq >= w[0].collapse.freq || w[1].collapse.wilson_hi >= w[0].collapse.wilson_lo)
}

enum CDictionary {
    Bernstein(BernsteinModel),
    TheoremA(TheoremAModel),
}

impl CDictionary {
    fn dictionary(&self) -> Dictionary<f64> {
        match self {
            Self::Bernstein(m) => m.dictionary(),
            Self::TheoremA(m) => m.dictionary(),
        }
    }

    fn sample(&self, n: usize, rng: &mut TrialRng) -> Vec<(f64, f64)> {
        match self {
            Self::Bernstein(m) => m.sample(n, rng),
            Self::TheoremA(m) => theorem_a_sample(m, rng),
        }
    }

    /// `(b, B)`.
    fn constants(&self) -> (f64, f64) {
        match self {
            Self::Bernstein(m) => (m.b, m.big_b),
            Self::TheoremA(m) => (1.0, m.alpha),
        }
    }
}

/// Generic pipeline: sample, empirical risks, exponential weights, exact excess risk.
pub fn run_theorem_c(config: &ExperimentConfig) -> Result<TheoremCTable> {
    expect_theorem(config, Theorem::C)?;
    let consts = config.constants.complexity();
    let x = config.x;
    let level = 1.0 - 2.0 * (-x).exp();
    if level <= 0.0 {
        return invalid(format!("x = {x} gives a non-positive quantile level 1 - 2e^(-x)"));
    }
    let bernstein = match config.dictionary {
        DictionaryChoice::Bernstein { m, b } => Some(bernstein_dictionary(m, b, &mut rng_from_seed(point_seed(config.master_seed, u64::MAX)))?),
        DictionaryChoice::TheoremA => None,
    };
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (point, n, t) in grid(config) {
        let cd = match &bernstein {
            Some(m) => CDictionary::Bernstein(m.clone()),
            None => CDictionary::TheoremA(TheoremAModel::new(n)?),
        };
        let dict = cd.dictionary();
        let rm = dict.risk_model().expect("constructions attach exact risk models").clone();
        let member = rm.member_risks();
        let (b, big_b) = cd.constants();
        if t > consts.c0 * b.max(big_b) {
            warnings.push(format!("n = {n}: T = {t} exceeds c0 max(b, B) = {}", consts.c0 * b.max(big_b)));
        }
        let profile = ExcessRiskProfile::from_risks(&member, b, big_b)?;
        let oracle = member.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(j, _)| j).expect("non-empty");
        let min_risk = member[oracle];
        let lambda = lambda_x(&profile, n, x, &consts)?;
        let temp = Temperature::new(t)?;
        let records = run_trials(config.trials, point_seed(config.master_seed, point), config.workers, |i, seed, rng| {
            let sample = cd.sample(n, rng);
            let risks = empirical_risk(&dict, &sample, Loss::Quadratic)?;
            let w = aew_weights(&risks, temp)?;
            let excess = aggregate_risk(&w, &rm)? - min_risk;
            let iso = member.iter().enumerate().any(|(j, &r)| {
                let d = r - min_risk;
                d >= lambda && risks.values[j] - risks.values[oracle] < d / 2.0
            });
            Ok(TrialRecord {
                trial_index: i,
                seed,
                risks: risks.values,
                weights: w.into_inner(),
                excess,
                flags: TrialFlags { isomorphism_violation: iso, ..TrialFlags::default() },
            })
        })?;
        let s = summarize(&records, &[level])?;
        let theta = theorem_c_theta(&profile, n, &consts);
        let key = key_estimate_bound(&profile, n, x, t, &consts)?;
        rows.push(TheoremCRow {
            n,
            temperature: t,
            trials: config.trials,
            seed: config.master_seed,
            mean_excess: s.mean_excess,
            stderr: s.stderr,
            quantile_level: level,
            quantile_excess: s.quantiles[0].1,
            x,
            theta,
            psi_theta: psi(&profile, theta)?.psi_value,
            theorem_c_bound: theorem_c_bound(&profile, n, x, &consts)?,
            key_estimate: key.value,
            pac_residual: pac_bound_residual(&profile, n, t, x, consts.c_pac)?,
            lambda,
            isomorphism: s.isomorphism,
            isomorphism_target: 2.0 * (-x).exp(),
            low_temperature: key.low_temperature,
        });
    }
    let slopes = config.t_grid.iter().map(|&t| (t, rate_slope(rows.iter().filter(|r| r.temperature == t)))).collect();
    Ok(TheoremCTable { rows, slopes, warnings })
}

/// OLS slope of `ln(mean excess)` against `ln n`.
pub fn rate_slope<'a>(rows: impl Iterator<Item = &'a TheoremCRow>) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.map(|r| ((r.n as f64).ln(), r.mean_excess)).unzip();
    if ys.iter().any(|y| *y <= 0.0) {
        return None;
    }
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    ols_slope(&xs, &ly).ok()
}
