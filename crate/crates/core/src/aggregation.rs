//! Empirical risks, exponential weights, ERM and the exact quadratic risk of a
//! convex combination of dictionary members.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance on `sum(theta) == 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;

pub type DictFn<X> = Arc<dyn Fn(&X) -> f64 + Send + Sync>;

/// Loss used to score dictionary members. Only the quadratic loss is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Loss {
    #[default]
    Quadratic,
}

impl Loss {
    #[inline]
    pub fn eval(self, y: f64, prediction: f64) -> f64 {
        match self {
            Loss::Quadratic => {
                let r = y - prediction;
                r * r
            }
        }
    }
}

/// Second-moment description of a dictionary: enough to evaluate the quadratic
/// risk of any linear combination exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskModel {
    /// `gram[j][k] = E[f_j(X) f_k(X)]`.
    pub gram: Vec<Vec<f64>>,
    /// `cross[j] = E[Y f_j(X)]`.
    pub cross: Vec<f64>,
    /// `E[Y^2]`.
    pub y2: f64,
}

impl RiskModel {
    pub fn new(gram: Vec<Vec<f64>>, cross: Vec<f64>, y2: f64) -> Result<Self> {
        let m = cross.len();
        if m == 0 {
            return invalid("risk model needs at least one function");
        }
        if gram.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: gram.len() });
        }
        for row in &gram {
            if row.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: row.len() });
            }
        }
        let scale = gram.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
        for j in 0..m {
            if gram[j][j] < 0.0 {
                return invalid(format!("negative second moment at index {j}"));
            }
            for k in 0..j {
                if (gram[j][k] - gram[k][j]).abs() > 1e-12 * scale {
                    return invalid(format!("gram matrix not symmetric at ({j}, {k})"));
                }
            }
        }
        if !is_psd(&gram, 1e-10 * scale) {
            return invalid("gram matrix is not positive semidefinite");
        }
        Ok(Self { gram, cross, y2 })
    }

    pub fn len(&self) -> usize {
        self.cross.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cross.is_empty()
    }

    /// Risk of the single dictionary member `j`.
    pub fn member_risk(&self, j: usize) -> f64 {
        self.y2 - 2.0 * self.cross[j] + self.gram[j][j]
    }

    pub fn member_risks(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.member_risk(j)).collect()
    }
}

/// Cholesky of `a + tol * I`; succeeds iff the shifted matrix is positive definite.
fn is_psd(a: &[Vec<f64>], tol: f64) -> bool {
    let m = a.len();
    let mut l = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = a[i][j] + if i == j { tol } else { 0.0 };
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    true
}

/// A finite family of real functions on `X` to aggregate over.
#[derive(Clone)]
pub struct Dictionary<X> {
    functions: Vec<DictFn<X>>,
    risk_model: Option<RiskModel>,
    bound: f64,
}

impl<X> fmt::Debug for Dictionary<X> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dictionary")
            .field("size", &self.functions.len())
            .field("bound", &self.bound)
            .field("risk_model", &self.risk_model.is_some())
            .finish()
    }
}

impl<X> Dictionary<X> {
    /// `bound` is a uniform bound on the loss values of every member.
    pub fn new(functions: Vec<DictFn<X>>, bound: f64) -> Result<Self> {
        if functions.is_empty() {
            return invalid("dictionary must contain at least one function");
        }
        if !(bound.is_finite() && bound >= 0.0) {
            return invalid(format!("loss bound must be finite and non-negative, got {bound}"));
        }
        Ok(Self { functions, risk_model: None, bound })
    }

    pub fn with_risk_model(mut self, model: RiskModel) -> Result<Self> {
        if model.len() != self.functions.len() {
            return Err(Error::DimensionMismatch { expected: self.functions.len(), found: model.len() });
        }
        self.risk_model = Some(model);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn risk_model(&self) -> Option<&RiskModel> {
        self.risk_model.as_ref()
    }

    #[inline]
    pub fn eval(&self, j: usize, x: &X) -> f64 {
        (self.functions[j])(x)
    }
}

/// `values[j] = R_n(f_j)` over a sample of size `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRisks {
    pub values: Vec<f64>,
    pub n: usize,
}

impl EmpiricalRisks {
    pub fn new(values: Vec<f64>, n: usize) -> Result<Self> {
        if values.is_empty() {
            return invalid("empirical risks must be non-empty");
        }
        if n == 0 {
            return invalid("sample size must be positive");
        }
        Ok(Self { values, n })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A point of the probability simplex over dictionary indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return invalid("weight vector must be non-empty");
        }
        for (j, &t) in theta.iter().enumerate() {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvariantViolation(format!("weight {j} = {t} outside [0, 1]")));
            }
        }
        let sum: f64 = theta.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvariantViolation(format!("weights sum to {sum}")));
        }
        Ok(Self(theta))
    }

    /// Vertex `e_j` of the simplex.
    pub fn vertex(m: usize, j: usize) -> Self {
        let mut theta = vec![0.0; m];
        theta[j] = 1.0;
        Self(theta)
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

/// Gibbs temperature, finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Temperature(f64);

impl Temperature {
    pub fn new(t: f64) -> Result<Self> {
        if t.is_finite() && t > 0.0 {
            Ok(Self(t))
        } else {
            invalid(format!("temperature must be finite and > 0, got {t}"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Empirical quadratic risk of every dictionary member on `sample`.
pub fn empirical_risk<X>(dictionary: &Dictionary<X>, sample: &[(X, f64)], loss: Loss) -> Result<EmpiricalRisks> {
    if sample.is_empty() {
        return invalid("empirical risk of an empty sample");
    }
    let n = sample.len();
    let values = (0..dictionary.len())
        .map(|j| sample.iter().map(|(x, y)| loss.eval(*y, dictionary.eval(j, x))).sum::<f64>() / n as f64)
        .collect();
    EmpiricalRisks::new(values, n)
}

/// Exponential weights `theta_j ∝ exp(-(n/T) R_n(f_j))`.
///
/// Risks are shifted by their minimum before exponentiation, so the largest
/// logit is exactly zero and nothing overflows.
pub fn aew_weights(risks: &EmpiricalRisks, temperature: Temperature) -> Result<WeightVector> {
    if let Some(j) = risks.values.iter().position(|r| !r.is_finite()) {
        return invalid(format!("empirical risk {j} is not finite"));
    }
    let min = risks.values.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = risks.n as f64 / temperature.get();
    let mut theta: Vec<f64> = risks.values.iter().map(|r| (-(scale * (r - min))).exp()).collect();
    let total: f64 = theta.iter().sum();
    for t in &mut theta {
        *t /= total;
    }
    WeightVector::new(theta)
}

/// All indices attaining the minimal empirical risk, ascending.
pub fn erm_select(risks: &EmpiricalRisks) -> Result<Vec<usize>> {
    if let Some(j) = risks.values.iter().position(|r| !r.is_finite()) {
        return invalid(format!("empirical risk {j} is not finite"));
    }
    let min = risks.values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(risks.values.iter().enumerate().filter(|(_, &r)| r == min).map(|(j, _)| j).collect())
}

/// ERM with ties broken towards the smallest index.
pub fn erm_select_one(risks: &EmpiricalRisks) -> Result<usize> {
    Ok(erm_select(risks)?[0])
}

/// Quadratic risk `E(Y - sum_j theta_j f_j(X))^2 = y2 - 2 theta·cross + theta' gram theta`.
pub fn aggregate_risk(weights: &WeightVector, model: &RiskModel) -> Result<f64> {
    let theta = weights.as_slice();
    if theta.len() != model.len() {
        return Err(Error::DimensionMismatch { expected: model.len(), found: theta.len() });
    }
    let linear: f64 = theta.iter().zip(&model.cross).map(|(t, c)| t * c).sum();
    let mut quad = 0.0;
    for (j, row) in model.gram.iter().enumerate() {
        if theta[j] == 0.0 {
            continue;
        }
        let inner: f64 = row.iter().zip(theta).map(|(g, t)| g * t).sum();
        quad += theta[j] * inner;
    }
    Ok(model.y2 - 2.0 * linear + quad)
}

/// Progressive mixture: the average of the exponential-weights vectors built on
/// the prefixes `Z_1..Z_k`, `k = 1..n`.
pub fn progressive_mixture<X>(sample: &[(X, f64)], dictionary: &Dictionary<X>, temperature: Temperature) -> Result<WeightVector> {
    if sample.is_empty() {
        return invalid("progressive mixture of an empty sample");
    }
    let m = dictionary.len();
    let mut loss_sums = vec![0.0; m];
    let mut avg = vec![0.0; m];
    for (k, (x, y)) in sample.iter().enumerate() {
        for (j, s) in loss_sums.iter_mut().enumerate() {
            *s += Loss::Quadratic.eval(*y, dictionary.eval(j, x));
        }
        let size = k + 1;
        let risks = EmpiricalRisks::new(loss_sums.iter().map(|s| s / size as f64).collect(), size)?;
        let w = aew_weights(&risks, temperature)?;
        for (a, t) in avg.iter_mut().zip(w.as_slice()) {
            *a += t;
        }
    }
    let n = sample.len() as f64;
    for a in &mut avg {
        *a /= n;
    }
    WeightVector::new(avg)
}
