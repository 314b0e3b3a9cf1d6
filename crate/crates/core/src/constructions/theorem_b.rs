//! Weight-collapse counterexample: `M` independent functions of a uniform-type
//! variable, with the first one slightly better in risk.
//!
//! `U` has density `2(u + lambda)` on `[-lambda, 1 - lambda]`, so `(U + lambda)^2 = V`
//! is uniform on `[0, 1]`. `f_1 = 12^{1/4} U_1` and `f_j = 12^{1/4}(U_j + lambda)`.
//! Each `V` is drawn as `(k + 1/2) 2^{-32}` from a 32-bit integer `k`, so per-column
//! sums of `V` are exact integers and the centred statistics lose no precision.
//!
//! Draw order: column-major, one `u64` per pair of observations (low half first).
//! [`theorem_b_sample`] and [`theorem_b_draw`] consume the generator identically.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::aggregation::{EmpiricalRisks, RiskModel, WeightVector};
use crate::error::{invalid, Error, Result};
use crate::rng::TrialRng;

const TWO_POW_M32: f64 = 1.0 / 4_294_967_296.0;

/// Inputs for [`TheoremBModel::new`]. Unset overrides fall back to
/// `M = ceil(c_m sqrt(n ln n))`, `lambda = lambda_c eps sqrt(ln M / n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremBParams {
    pub n: usize,
    pub epsilon: f64,
    pub kappa: f64,
    pub temperature: f64,
    pub c_m: f64,
    pub lambda_c: f64,
    /// Lower limit for epsilon is `eps_c T / sqrt(n ln n)`.
    pub eps_c: f64,
    pub m_override: Option<usize>,
    pub lambda_override: Option<f64>,
}

impl TheoremBParams {
    pub fn new(n: usize, epsilon: f64, kappa: f64, temperature: f64) -> Self {
        Self { n, epsilon, kappa, temperature, c_m: 1.0, lambda_c: 1.0, eps_c: 1.0, m_override: None, lambda_override: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremBModel {
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub temperature: f64,
    /// `n^{-eps kappa / T}`.
    pub rho: f64,
    /// `-(T/sqrt(n)) ln(rho / (2 (M - 2) (1 - rho)))`.
    pub delta: f64,
    /// Largest value of the loss `f_j(X)^2`, which is `sqrt(12)`.
    pub loss_bound: f64,
}

impl TheoremBModel {
    pub fn new(p: &TheoremBParams) -> Result<Self> {
        if p.n < 2 {
            return invalid(format!("n must be >= 2 (got {})", p.n));
        }
        for (name, v) in [("epsilon", p.epsilon), ("kappa", p.kappa), ("temperature", p.temperature), ("c_m", p.c_m), ("lambda_c", p.lambda_c)] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} must be finite and > 0 (got {v})"));
            }
        }
        if !(p.eps_c.is_finite() && p.eps_c >= 0.0) {
            return invalid(format!("eps_c must be finite and >= 0 (got {})", p.eps_c));
        }
        let nf = p.n as f64;
        let eps_lo = p.eps_c * p.temperature / (nf * nf.ln()).sqrt();
        if !(p.epsilon > eps_lo && p.epsilon < 0.125) {
            return invalid(format!("epsilon must lie in ({eps_lo:.3e}, 1/8) (got {})", p.epsilon));
        }
        let m = match p.m_override {
            Some(m) => m,
            None => (p.c_m * (nf * nf.ln()).sqrt()).ceil() as usize,
        };
        if m < 3 {
            return invalid(format!("M must be >= 3 (got {m})"));
        }
        let lambda = p.lambda_override.unwrap_or(p.lambda_c * p.epsilon * ((m as f64).ln() / nf).sqrt());
        if !(lambda > 0.0 && lambda < 0.5) {
            return invalid(format!("lambda must lie in (0, 1/2) (got {lambda})"));
        }
        let rho = nf.powf(-p.epsilon * p.kappa / p.temperature);
        if !(rho > 0.0 && rho < 0.5) {
            return invalid(format!("rho = n^(-eps kappa / T) must lie in (0, 1/2) (got {rho})"));
        }
        let delta = -(p.temperature / nf.sqrt()) * (rho / (2.0 * (m as f64 - 2.0) * (1.0 - rho))).ln();
        Ok(Self {
            n: p.n,
            m,
            lambda,
            epsilon: p.epsilon,
            kappa: p.kappa,
            temperature: p.temperature,
            rho,
            delta,
            loss_bound: 12f64.sqrt(),
        })
    }

    /// `xi(R1) = R1 + (T/sqrt n) ln(rho / (2(1 - rho))) - sqrt(12) lambda (2 - lambda) sqrt(n)`.
    pub fn xi(&self, rbar1: f64) -> f64 {
        let nf = self.n as f64;
        rbar1 + self.temperature / nf.sqrt() * (self.rho / (2.0 * (1.0 - self.rho))).ln()
            - 12f64.sqrt() * self.lambda * (2.0 - self.lambda) * nf.sqrt()
    }

    /// Exact excess risk `R(f_j) - R(f_1)` for `j >= 2`: `sqrt(12) lambda (4/3 - lambda)`.
    pub fn suboptimal_excess(&self) -> f64 {
        12f64.sqrt() * self.lambda * (4.0 / 3.0 - self.lambda)
    }

    fn means(&self) -> (f64, f64) {
        let s = 12f64.powf(0.25);
        (s * (2.0 / 3.0 - self.lambda), s * 2.0 / 3.0)
    }
}

/// Sufficient statistics of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremBDraw {
    /// Per column, `sum_i k_i` where `V_i = (k_i + 1/2) 2^{-32}`.
    pub k_sums: Vec<u64>,
    /// `sum_i sqrt(V_i)` for the first column.
    pub sqrt_sum_first: f64,
}

#[inline]
fn v_of(k: u32) -> f64 {
    (k as f64 + 0.5) * TWO_POW_M32
}

fn for_each_column<F: FnMut(usize, usize, u32)>(n: usize, m: usize, rng: &mut TrialRng, mut sink: F) {
    for j in 0..m {
        let mut i = 0;
        while i < n {
            let w = rng.next_u64();
            sink(j, i, w as u32);
            if i + 1 < n {
                sink(j, i + 1, (w >> 32) as u32);
            }
            i += 2;
        }
    }
}

/// Streams one trial, keeping only the per-column sums.
pub fn theorem_b_draw(model: &TheoremBModel, rng: &mut TrialRng) -> TheoremBDraw {
    let n = model.n;
    let mut k_sums = Vec::with_capacity(model.m);
    let mut sqrt_sum_first = 0.0;
    // first column needs sqrt(V); the rest only need the integer sum
    let mut i = 0;
    let mut s0 = 0u64;
    while i < n {
        let w = rng.next_u64();
        let lo = w as u32;
        s0 += lo as u64;
        sqrt_sum_first += v_of(lo).sqrt();
        if i + 1 < n {
            let hi = (w >> 32) as u32;
            s0 += hi as u64;
            sqrt_sum_first += v_of(hi).sqrt();
        }
        i += 2;
    }
    k_sums.push(s0);
    let pairs = n / 2;
    for _ in 1..model.m {
        let mut s = 0u64;
        for _ in 0..pairs {
            let w = rng.next_u64();
            s += (w & 0xffff_ffff) + (w >> 32);
        }
        if n % 2 == 1 {
            s += rng.next_u64() & 0xffff_ffff;
        }
        k_sums.push(s);
    }
    TheoremBDraw { k_sums, sqrt_sum_first }
}

/// Full `n x M` matrix of function values, row `i` holding `f_1(X_i), ..., f_M(X_i)`.
pub fn theorem_b_sample(model: &TheoremBModel, rng: &mut TrialRng) -> Vec<Vec<f64>> {
    let s = 12f64.powf(0.25);
    let mut out = vec![vec![0.0; model.m]; model.n];
    for_each_column(model.n, model.m, rng, |j, i, k| {
        let root = v_of(k).sqrt();
        out[i][j] = if j == 0 { s * (root - model.lambda) } else { s * root };
    });
    out
}

impl TheoremBDraw {
    fn v_sum(&self, j: usize, n: usize) -> f64 {
        (self.k_sums[j] as f64 + 0.5 * n as f64) * TWO_POW_M32
    }

    /// `Rbar_j = sqrt(12/n) (sum_i V_{j,i} - n/2)` for every column, including the first.
    pub fn rbar(&self, model: &TheoremBModel) -> Vec<f64> {
        let nf = model.n as f64;
        let scale = (12.0 / nf).sqrt();
        (0..model.m).map(|j| scale * (self.v_sum(j, model.n) - 0.5 * nf)).collect()
    }

    /// Empirical quadratic risks (target `Y = 0`).
    pub fn empirical_risks(&self, model: &TheoremBModel) -> Result<EmpiricalRisks> {
        let nf = model.n as f64;
        let r12 = 12f64.sqrt();
        let lam = model.lambda;
        let mut values = Vec::with_capacity(model.m);
        let first = self.v_sum(0, model.n) - 2.0 * lam * self.sqrt_sum_first + nf * lam * lam;
        values.push(r12 * first / nf);
        for j in 1..model.m {
            values.push(r12 * self.v_sum(j, model.n) / nf);
        }
        EmpiricalRisks::new(values, model.n)
    }
}

/// Exact second-moment structure: independent columns, so off-diagonal Gram
/// entries are products of means.
pub fn theorem_b_risk_model(model: &TheoremBModel) -> RiskModel {
    let (mu1, muj) = model.means();
    let lam = model.lambda;
    let r12 = 12f64.sqrt();
    let mu: Vec<f64> = (0..model.m).map(|j| if j == 0 { mu1 } else { muj }).collect();
    let mut gram = vec![vec![0.0; model.m]; model.m];
    for j in 0..model.m {
        for k in 0..model.m {
            gram[j][k] = if j == k {
                if j == 0 {
                    r12 * (0.5 - 4.0 * lam / 3.0 + lam * lam)
                } else {
                    3f64.sqrt()
                }
            } else {
                mu[j] * mu[k]
            };
        }
    }
    RiskModel::new(gram, vec![0.0; model.m], 0.0).expect("independent-column Gram matrix is PSD")
}

/// Excess risk of the aggregate in `O(M)`: every column has variance `sqrt(12)/18`,
/// so `R(theta) = (sqrt(12)/18) |theta|^2 + (sum_j theta_j mu_j)^2`.
pub fn theorem_b_excess(model: &TheoremBModel, weights: &WeightVector) -> Result<f64> {
    if weights.len() != model.m {
        return Err(Error::DimensionMismatch { expected: model.m, found: weights.len() });
    }
    let (mu1, muj) = model.means();
    let var = 12f64.sqrt() / 18.0;
    let w = weights.as_slice();
    let sq: f64 = w.iter().map(|t| t * t).sum();
    let lin = w[0] * mu1 + w[1..].iter().sum::<f64>() * muj;
    let lam = model.lambda;
    let oracle = 12f64.sqrt() * (0.5 - 4.0 * lam / 3.0 + lam * lam);
    Ok(var * sq + lin * lin - oracle)
}

/// Indices `j >= 1` (0-based; index 0 is the oracle) solving
/// `Rbar_j <= xi(Rbar_0)` and `Rbar_k - Rbar_j >= delta` for all `k` not in `{0, j}`.
pub fn system_cj_indices(rbar: &[f64], model: &TheoremBModel) -> Result<Vec<usize>> {
    if rbar.len() != model.m {
        return Err(Error::DimensionMismatch { expected: model.m, found: rbar.len() });
    }
    if model.m < 3 {
        return invalid(format!("M must be >= 3 (got {})", model.m));
    }
    if rbar.iter().any(|v| v.is_nan()) {
        return invalid("Rbar contains NaN");
    }
    let xi = model.xi(rbar[0]);
    // smallest and second smallest over j >= 1
    let (mut best, mut best_idx, mut second) = (f64::INFINITY, 0usize, f64::INFINITY);
    for (j, &v) in rbar.iter().enumerate().skip(1) {
        if v < best {
            second = best;
            best = v;
            best_idx = j;
        } else if v < second {
            second = v;
        }
    }
    Ok((1..model.m)
        .filter(|&j| {
            let others = if j == best_idx { second } else { best };
            rbar[j] <= xi && others - rbar[j] >= model.delta
        })
        .collect())
}
