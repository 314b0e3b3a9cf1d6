//! Well-specified regression dictionary with a Bernstein excess-loss class.
//!
//! `X` is uniform on `[0, 1]`, split into `K` equal cells (`K` the next power of two
//! at or above `M`). `f_1` is a random step function with values `±sqrt(b)/2`, and
//! `Y = f_1(X) + e` with `e = ±sigma`, `sigma = sqrt(b)/4`. For `j >= 2`,
//! `f_j = f_1 + s_j a_j h_j` where the `h_j` are distinct non-constant Walsh functions
//! on the cells and `s_j` random signs. The excess risks `a_j^2 = (b/4) 2^{-(M-j)}`
//! increase geometrically, so every shell in the complexity sum is populated once.
//!
//! Everything is piecewise constant, so all moments are exact finite sums.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::aggregation::{DictFn, Dictionary, RiskModel};
use crate::error::{invalid, Result};
use crate::rng::TrialRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinModel {
    pub cells: usize,
    /// `values[j][c]` is `f_{j+1}` on cell `c`.
    pub values: Vec<Vec<f64>>,
    pub sigma: f64,
    /// Bound on the quadratic loss `(Y - f_j(X))^2`.
    pub b: f64,
    /// Bernstein constant `B = 4b`: `E L_j^2 <= B E L_j` for every member.
    pub big_b: f64,
    pub risk_model: RiskModel,
}

/// Builds the dictionary. `M >= 2`, `b > 0`.
pub fn bernstein_dictionary(m: usize, b: f64, rng: &mut TrialRng) -> Result<BernsteinModel> {
    if m < 2 {
        return invalid(format!("M must be >= 2 (got {m})"));
    }
    if !(b.is_finite() && b > 0.0) {
        return invalid(format!("b must be finite and > 0 (got {b})"));
    }
    if m > 1000 {
        return invalid(format!("M = {m} too large for the dyadic excess-risk ladder"));
    }
    let cells = m.next_power_of_two();
    let half = b.sqrt() / 2.0;
    let f1: Vec<f64> = (0..cells).map(|_| if rng.random::<bool>() { half } else { -half }).collect();
    let mut rows: Vec<usize> = (1..cells).collect();
    rows.shuffle(rng);
    let mut values = vec![f1.clone()];
    for j in 2..=m {
        let a = (b / 4.0 * 0.5f64.powi((m - j) as i32)).sqrt();
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let r = rows[j - 2];
        values.push(
            (0..cells)
                .map(|c| {
                    let walsh = if (r & c).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                    f1[c] + sign * a * walsh
                })
                .collect(),
        );
    }
    let sigma = b.sqrt() / 4.0;
    let kf = cells as f64;
    let gram: Vec<Vec<f64>> = values
        .iter()
        .map(|u| values.iter().map(|v| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>() / kf).collect())
        .collect();
    let cross: Vec<f64> = values.iter().map(|v| v.iter().zip(&f1).map(|(x, y)| x * y).sum::<f64>() / kf).collect();
    let y2 = f1.iter().map(|x| x * x).sum::<f64>() / kf + sigma * sigma;
    let risk_model = RiskModel::new(gram, cross, y2)?;
    Ok(BernsteinModel { cells, values, sigma, b, big_b: 4.0 * b, risk_model })
}

impl BernsteinModel {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_of(&self, x: f64) -> usize {
        ((x * self.cells as f64) as usize).min(self.cells - 1)
    }

    /// Exact excess risks `a_j^2`, with 0 for the regression function; non-decreasing in `j`.
    pub fn deltas(&self) -> Vec<f64> {
        let m = self.len();
        std::iter::once(0.0).chain((2..=m).map(|j| self.b / 4.0 * 0.5f64.powi((m - j) as i32))).collect()
    }

    /// `(E L_j, E L_j^2)` for `L_j = (Y - f_j)^2 - (Y - f_1)^2`, summed over cells and noise signs.
    pub fn excess_loss_moments(&self, j: usize) -> (f64, f64) {
        let (mut m1, mut m2) = (0.0, 0.0);
        for c in 0..self.cells {
            let (t, f) = (self.values[0][c], self.values[j][c]);
            for e in [self.sigma, -self.sigma] {
                let l = (t + e - f).powi(2) - e * e;
                m1 += l;
                m2 += l * l;
            }
        }
        let denom = 2.0 * self.cells as f64;
        (m1 / denom, m2 / denom)
    }

    /// Largest quadratic loss over cells, noise signs and members.
    pub fn max_loss(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for v in &self.values {
            for c in 0..self.cells {
                for e in [self.sigma, -self.sigma] {
                    worst = worst.max((self.values[0][c] + e - v[c]).powi(2));
                }
            }
        }
        worst
    }

    pub fn dictionary(&self) -> Dictionary<f64> {
        let cells = self.cells;
        let fns: Vec<DictFn<f64>> = self
            .values
            .iter()
            .map(|v| {
                let v = Arc::new(v.clone());
                let f: DictFn<f64> = Arc::new(move |x: &f64| v[((x * cells as f64) as usize).min(cells - 1)]);
                f
            })
            .collect();
        Dictionary::new(fns, self.b)
            .and_then(|d| d.with_risk_model(self.risk_model.clone()))
            .expect("step-function dictionary is valid")
    }

    /// `n` observations `(X_i, Y_i)`.
    pub fn sample(&self, n: usize, rng: &mut TrialRng) -> Vec<(f64, f64)> {
        (0..n)
            .map(|_| {
                let x: f64 = rng.random();
                let e = if rng.random::<bool>() { self.sigma } else { -self.sigma };
                (x, self.values[0][self.cell_of(x)] + e)
            })
            .collect()
    }
}
