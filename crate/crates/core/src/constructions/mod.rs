//! Explicit distributions and dictionaries with closed-form risks.

pub mod bernstein;
pub mod theorem_a;
pub mod theorem_b;

pub use bernstein::{bernstein_dictionary, BernsteinModel};
pub use theorem_a::{
    theorem_a_exact_expected_excess, theorem_a_exact_tail, theorem_a_excess, theorem_a_excess_distribution, theorem_a_sample,
    theorem_a_theta1, TheoremAModel,
};
pub use theorem_b::{
    system_cj_indices, theorem_b_draw, theorem_b_excess, theorem_b_risk_model, theorem_b_sample, TheoremBDraw, TheoremBModel,
    TheoremBParams,
};
