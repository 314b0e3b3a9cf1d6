//! Exponential-weights aggregation over finite dictionaries, with the constructions,
//! complexity measures and Gaussian-approximation tools used to study its excess risk.

pub mod aggregation;
pub mod complexity;
pub mod constructions;
pub mod error;
pub mod gaussian;
pub mod harness;
pub mod rng;
pub mod stats;

pub use aggregation::{
    aew_weights, aggregate_risk, empirical_risk, SIMPLEX_TOL, erm_select, erm_select_one, progressive_mixture, DictFn, Dictionary, EmpiricalRisks,
    Loss, RiskModel, Temperature, WeightVector,
};
pub use error::{Error, Result};
pub use rng::{derive_trial_seed, rng_from_seed, TrialRng};
pub use complexity::{ComplexityConstants, ComplexityReport, ExcessRiskProfile};
pub use constructions::{BernsteinModel, TheoremAModel, TheoremBModel, TheoremBParams};
pub use gaussian::{NormalizedSumSpec, SummandKind};
pub use harness::{ExperimentConfig, ResultTable, Theorem};
