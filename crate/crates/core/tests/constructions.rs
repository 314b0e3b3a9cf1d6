use aew_core::constructions::{
    bernstein_dictionary, theorem_a_excess, theorem_a_sample, theorem_b_draw, theorem_b_excess, theorem_b_risk_model,
    TheoremAModel, TheoremBModel, TheoremBParams,
};
use aew_core::{aew_weights, aggregate_risk, empirical_risk, rng_from_seed, Loss, Temperature};

#[test]
fn theorem_a_generic_pipeline_matches_closed_form() {
    let model = TheoremAModel::new(51).unwrap();
    let dict = model.dictionary();
    let rm = dict.risk_model().unwrap().clone();
    let mut rng = rng_from_seed(4);
    for _ in 0..50 {
        let sample = theorem_a_sample(&model, &mut rng);
        let w = aew_weights(&empirical_risk(&dict, &sample, Loss::Quadratic).unwrap(), Temperature::new(0.3).unwrap()).unwrap();
        let generic = aggregate_risk(&w, &rm).unwrap() - rm.member_risk(0);
        let closed = theorem_a_excess(w[0], &model).unwrap();
        assert!((generic - closed).abs() < 1e-14, "{generic} vs {closed}");
    }
}

#[test]
fn theorem_b_closed_form_excess_matches_dense_model() {
    let model = TheoremBModel::new(&TheoremBParams::new(500, 0.1, 1.0, 0.05)).unwrap();
    let rm = theorem_b_risk_model(&model);
    let oracle = rm.member_risk(0);
    let mut rng = rng_from_seed(8);
    for t in [0.05, 0.5, 5.0] {
        let draw = theorem_b_draw(&model, &mut rng);
        let w = aew_weights(&draw.empirical_risks(&model).unwrap(), Temperature::new(t).unwrap()).unwrap();
        let dense = aggregate_risk(&w, &rm).unwrap() - oracle;
        assert!((theorem_b_excess(&model, &w).unwrap() - dense).abs() < 1e-12);
    }
}

#[test]
fn bernstein_condition_holds_for_every_member() {
    let model = bernstein_dictionary(50, 1.0, &mut rng_from_seed(3)).unwrap();
    let deltas = model.deltas();
    assert_eq!(deltas[0], 0.0);
    for j in 1..model.len() {
        let (mean, second) = model.excess_loss_moments(j);
        assert!(mean > 0.0);
        assert!(second <= model.big_b * mean * (1.0 + 1e-12), "member {j}");
    }
    assert!(model.max_loss() <= model.b + 1e-12);
}

#[test]
fn bernstein_empirical_risks_converge() {
    let model = bernstein_dictionary(8, 2.0, &mut rng_from_seed(5)).unwrap();
    let dict = model.dictionary();
    let exact = dict.risk_model().unwrap().member_risks();
    let sample = model.sample(400_000, &mut rng_from_seed(6));
    let emp = empirical_risk(&dict, &sample, Loss::Quadratic).unwrap();
    for (e, r) in emp.values.iter().zip(&exact) {
        assert!((e - r).abs() < 5e-3, "{e} vs {r}");
    }
}
