use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use aew_core::complexity::{psi, r_bar, ExcessRiskProfile};
use aew_core::constructions::{
    bernstein_dictionary, system_cj_indices, theorem_a_exact_expected_excess, theorem_b_draw, TheoremBModel, TheoremBParams,
};
use aew_core::gaussian::{gamma1, normalized_sum_cdf, Gamma1Query, NormalizedSumSpec};
use aew_core::{aew_weights, rng_from_seed, EmpiricalRisks, Temperature};

fn weights(c: &mut Criterion) {
    let risks = EmpiricalRisks::new((0..1000).map(|j| (j as f64 * 0.618).fract()).collect(), 10_000).unwrap();
    let t = Temperature::new(0.5).unwrap();
    c.bench_function("aew_weights M=1000", |b| b.iter(|| aew_weights(black_box(&risks), t).unwrap()));
}

fn theorem_b(c: &mut Criterion) {
    let model = TheoremBModel::new(&TheoremBParams::new(10_000, 0.1, 1.0, 0.05)).unwrap();
    let mut rng = rng_from_seed(1);
    c.bench_function("theorem_b_draw n=1e4", |b| b.iter(|| theorem_b_draw(black_box(&model), &mut rng)));
    let rbar = theorem_b_draw(&model, &mut rng).rbar(&model);
    c.bench_function("system_cj_indices M=304", |b| b.iter(|| system_cj_indices(black_box(&rbar), &model).unwrap()));
}

fn exact(c: &mut Criterion) {
    c.bench_function("theorem_a exact expectation n=10001", |b| {
        b.iter(|| theorem_a_exact_expected_excess(black_box(10_001), 0.1).unwrap())
    });
}

fn complexity(c: &mut Criterion) {
    let model = bernstein_dictionary(50, 1.0, &mut rng_from_seed(2)).unwrap();
    let profile = ExcessRiskProfile::new(model.deltas(), model.b, model.big_b).unwrap();
    c.bench_function("psi M=50", |b| b.iter(|| psi(black_box(&profile), 1e-3).unwrap()));
    c.bench_function("r_bar M=50", |b| b.iter(|| r_bar(black_box(&profile), 1600, 1.0).unwrap()));
}

fn gaussian(c: &mut Criterion) {
    c.bench_function("normalized_sum_cdf n=12", |b| b.iter(|| normalized_sum_cdf(12, black_box(-0.4)).unwrap()));
    c.bench_function("normalized_sum_cdf n=20 (Fourier)", |b| b.iter(|| normalized_sum_cdf(20, black_box(-0.4)).unwrap()));
    let q = Gamma1Query::new(303, 1e4, NormalizedSumSpec::uniform(20)).unwrap();
    c.bench_function("gamma1 inner_n=20", |b| b.iter(|| gamma1(black_box(&q)).unwrap()));
}

criterion_group!(benches, weights, theorem_b, exact, complexity, gaussian);
criterion_main!(benches);
