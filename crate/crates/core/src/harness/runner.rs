//! Deterministic parallel execution of independent trials, and per-trial records.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{derive_trial_seed, mix64, rng_from_seed, TrialRng};
use crate::stats::{mean_stderr, nearest_rank, wilson_interval, Z95};

/// Master seed of grid point `point` in a run keyed by `master_seed`.
pub fn point_seed(master_seed: u64, point: u64) -> u64 {
    mix64(master_seed ^ mix64(point.wrapping_add(0x5eed_0000_0000_0001)))
}

/// Runs `trials` independent tasks on a pool of `workers` threads. Task `i` receives
/// its own generator seeded with `derive_trial_seed(master_seed, i)`; the output is
/// in trial order and does not depend on `workers`.
pub fn run_trials<T, F>(trials: usize, master_seed: u64, workers: usize, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64, &mut TrialRng) -> Result<T> + Sync,
{
    if workers == 0 {
        return invalid("workers must be >= 1");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
    pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let seed = derive_trial_seed(master_seed, i as u64);
                task(i, seed, &mut rng_from_seed(seed))
            })
            .collect()
    })
}

/// Per-trial event flags; unused flags stay `false` / `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialFlags {
    /// Index whose weight reached `1 - rho`.
    pub collapse_index: Option<usize>,
    /// Index solving the collapse system.
    pub system_index: Option<usize>,
    pub large_excess: bool,
    pub isomorphism_violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    /// Empirical risks, or the centred statistics `Rbar` for the weight-collapse model.
    pub risks: Vec<f64>,
    pub weights: Vec<f64>,
    /// `R(aggregate) - min_j R(f_j)`.
    pub excess: f64,
    pub flags: TrialFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFrequency {
    pub count: usize,
    pub trials: usize,
    pub freq: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl TailFrequency {
    pub fn new(count: usize, trials: usize) -> Result<Self> {
        let (lo, hi) = wilson_interval(count, trials, Z95)?;
        Ok(Self { count, trials, freq: count as f64 / trials as f64, wilson_lo: lo, wilson_hi: hi })
    }

    /// Binomial standard error of the frequency.
    pub fn stderr(&self) -> f64 {
        (self.freq * (1.0 - self.freq) / self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub mean_excess: f64,
    pub stderr: f64,
    /// `(level, nearest-rank quantile)` of the excess risk.
    pub quantiles: Vec<(f64, f64)>,
    pub collapse: TailFrequency,
    pub system: TailFrequency,
    pub large_excess: TailFrequency,
    pub isomorphism: TailFrequency,
}

/// Mean, standard error, quantiles and flag frequencies, accumulated in trial order.
pub fn summarize(records: &[TrialRecord], quantile_levels: &[f64]) -> Result<Summary> {
    if records.is_empty() {
        return invalid("cannot summarize an empty record list");
    }
    let excess: Vec<f64> = records.iter().map(|r| r.excess).collect();
    let (mean, se) = mean_stderr(&excess)?;
    let mut sorted = excess;
    sorted.sort_by(f64::total_cmp);
    let quantiles = quantile_levels.iter().map(|&q| Ok((q, nearest_rank(&sorted, q)?))).collect::<Result<Vec<_>>>()?;
    let t = records.len();
    let count = |f: &dyn Fn(&TrialFlags) -> bool| records.iter().filter(|r| f(&r.flags)).count();
    Ok(Summary {
        trials: t,
        mean_excess: mean,
        stderr: se,
        quantiles,
        collapse: TailFrequency::new(count(&|f| f.collapse_index.is_some()), t)?,
        system: TailFrequency::new(count(&|f| f.system_index.is_some()), t)?,
        large_excess: TailFrequency::new(count(&|f| f.large_excess), t)?,
        isomorphism: TailFrequency::new(count(&|f| f.isomorphism_violation), t)?,
    })
}
