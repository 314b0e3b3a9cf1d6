//! Seeded, parallel experiment runner with summaries.

pub mod config;
pub mod experiments;
pub mod runner;

pub use config::{Constants, DictionaryChoice, ExperimentConfig, Theorem, CONSTANT_DEFAULTS};
pub use experiments::{
    collapse_trend_ok, rate_slope, run_experiment, run_theorem_a, run_theorem_b, run_theorem_c, theorem_b_point, ResultTable, TheoremARow, TheoremBRow,
    TheoremCRow, TheoremCTable, IMPLICATION_TOL,
};
pub use runner::{point_seed, run_trials, summarize, Summary, TailFrequency, TrialFlags, TrialRecord};
