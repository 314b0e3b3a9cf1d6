//! Shell-count complexity of a dictionary and the bounds built from it.
//!
//! Everything here is a function of the sorted excess risks `Delta_j = R(f_j) - R(f_1)`.
//! Shell `j >= 1` at radius `r` holds the `Delta` in `(2^{j-1} r, 2^j r]`; shell 0 holds
//! `Delta <= r`. Boundaries are compared against `r * 2^j`, which is exact in binary
//! floating point.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Sorted excess risks of a dictionary plus its loss bound `b` and Bernstein constant `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessRiskProfile {
    deltas: Vec<f64>,
    pub b: f64,
    pub big_b: f64,
}

impl ExcessRiskProfile {
    pub fn new(deltas: Vec<f64>, b: f64, big_b: f64) -> Result<Self> {
        if deltas.is_empty() {
            return invalid("profile needs at least the oracle");
        }
        if deltas[0] != 0.0 {
            return invalid(format!("oracle excess risk must be 0 (got {})", deltas[0]));
        }
        if deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return invalid("excess risks must be finite and >= 0");
        }
        if deltas.windows(2).any(|w| w[0] > w[1]) {
            return invalid("excess risks must be sorted non-decreasing");
        }
        for (name, v) in [("b", b), ("B", big_b)] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} must be finite and > 0 (got {v})"));
            }
        }
        Ok(Self { deltas, b, big_b })
    }

    /// Sorts a raw list of member risks and subtracts the minimum.
    pub fn from_risks(risks: &[f64], b: f64, big_b: f64) -> Result<Self> {
        if risks.iter().any(|r| !r.is_finite()) {
            return invalid("risks must be finite");
        }
        let mut sorted = risks.to_vec();
        sorted.sort_by(f64::total_cmp);
        let min = *sorted.first().ok_or_else(|| Error::InvalidArgument("empty risk list".into()))?;
        Self::new(sorted.iter().map(|r| r - min).collect(), b, big_b)
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    fn max_delta(&self) -> f64 {
        *self.deltas.last().expect("non-empty")
    }
}

/// Unnamed absolute constants, all defaulting to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityConstants {
    /// Multiplier in `u(r)`.
    pub c_u: f64,
    /// Multiplier in `lambda(x)`.
    pub c_lambda: f64,
    /// Scale of the `J_+` shells: `rho = kappa1 (b + B) / n`.
    pub kappa1: f64,
    /// Multiplier of the key estimate.
    pub c_key: f64,
    /// Multiplier of the PAC residual.
    pub c_pac: f64,
    /// Radius `theta = c_theta (b + B) ln max(M, 2) / n` used in the final bound.
    pub c_theta: f64,
    /// Low-temperature limit `T <= c0 max(b, B)`.
    pub c0: f64,
}

impl Default for ComplexityConstants {
    fn default() -> Self {
        Self { c_u: 1.0, c_lambda: 1.0, kappa1: 1.0, c_key: 1.0, c_pac: 1.0, c_theta: 1.0, c0: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub psi_value: f64,
    /// `bucket_counts[0] = |{Delta <= r}|`, `bucket_counts[j]` the size of shell `j`.
    pub bucket_counts: Vec<usize>,
    pub r: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        invalid(format!("{name} must be finite and > 0 (got {v})"))
    }
}

/// Index of the first shell whose upper edge `r 2^j` covers `delta`.
fn shell_index(delta: f64, r: f64) -> usize {
    if delta <= r {
        return 0;
    }
    let mut j = ((delta / r).log2().ceil().max(1.0)) as i32;
    while delta > r * 2f64.powi(j) {
        j += 1;
    }
    while j > 1 && delta <= r * 2f64.powi(j - 1) {
        j -= 1;
    }
    j as usize
}

/// Last shell that can be non-empty: `ceil(log2(max Delta / r)) + 1`.
pub fn default_j_max(profile: &ExcessRiskProfile, r: f64) -> usize {
    let ratio = profile.max_delta() / r;
    if ratio <= 1.0 {
        1
    } else {
        ratio.log2().ceil() as usize + 1
    }
}

/// Shell counts `0..=j_max`.
pub fn bucket_counts(profile: &ExcessRiskProfile, r: f64, j_max: usize) -> Result<Vec<usize>> {
    check_positive("r", r)?;
    let mut counts = vec![0usize; j_max + 1];
    for &d in profile.deltas() {
        let j = shell_index(d, r);
        if j > j_max {
            return invalid(format!("j_max = {j_max} truncates a non-empty shell {j}"));
        }
        counts[j] += 1;
    }
    Ok(counts)
}

fn weighted_log_sum(counts: &[usize]) -> f64 {
    counts.iter().enumerate().map(|(j, &c)| 0.5f64.powi(j as i32) * ((c + 1) as f64).ln()).sum()
}

fn weighted_root_log_sum(counts: &[usize]) -> f64 {
    counts.iter().enumerate().map(|(j, &c)| 0.5f64.powf(j as f64 / 2.0) * ((c + 1) as f64).ln().sqrt()).sum()
}

/// `psi(r) = ln(|H_0| + 1) + sum_{j >= 1} 2^{-j} ln(|H_j| + 1)`.
pub fn psi(profile: &ExcessRiskProfile, r: f64) -> Result<ComplexityReport> {
    check_positive("r", r)?;
    psi_truncated(profile, r, default_j_max(profile, r))
}

/// `psi` with an explicit last shell; errors if a non-empty shell would be cut off.
pub fn psi_truncated(profile: &ExcessRiskProfile, r: f64, j_max: usize) -> Result<ComplexityReport> {
    let counts = bucket_counts(profile, r, j_max)?;
    Ok(ComplexityReport { psi_value: weighted_log_sum(&counts), bucket_counts: counts, r })
}

/// `(A, C)` with `u(r) = A + C sqrt(r)` at fixed shell counts.
fn u_coefficients(profile: &ExcessRiskProfile, n: usize, counts: &[usize], c_u: f64) -> (f64, f64) {
    let nf = n as f64;
    (c_u * profile.b / nf * weighted_log_sum(counts), c_u * (profile.big_b / nf).sqrt() * weighted_root_log_sum(counts))
}

/// `u(r) = c (b/n) sum_j 2^{-j} ln(|H_j|+1) + c sqrt(B r / n) sum_j 2^{-j/2} sqrt(ln(|H_j|+1))`.
pub fn u_of_r(profile: &ExcessRiskProfile, n: usize, r: f64, c_u: f64) -> Result<f64> {
    check_positive("r", r)?;
    check_positive("c_u", c_u)?;
    if n == 0 {
        return invalid("n must be >= 1");
    }
    let counts = bucket_counts(profile, r, default_j_max(profile, r))?;
    let (a, c) = u_coefficients(profile, n, &counts, c_u);
    Ok(a + c * r.sqrt())
}

/// The two weighted sums inside `u(r)`, exposed for diagnostics.
pub fn u_sums(profile: &ExcessRiskProfile, r: f64) -> Result<(f64, f64)> {
    let counts = bucket_counts(profile, r, default_j_max(profile, r))?;
    Ok((weighted_log_sum(&counts), weighted_root_log_sum(&counts)))
}

const MAX_WIDENINGS: u32 = 20;

/// `inf{r > 0 : u(r) <= r/2}`, solved exactly piece by piece.
///
/// Shell counts only change at `r = Delta_j / 2^k`. Between two such points
/// `u(r) = A + C sqrt(r)`, and `A + C s <= s^2 / 2` holds iff `s >= C + sqrt(C^2 + 2A)`.
/// Only points above `r_lo` matter, where `r_lo` solves the inequality with the oracle alone.
pub fn r_bar(profile: &ExcessRiskProfile, n: usize, c_u: f64) -> Result<f64> {
    check_positive("c_u", c_u)?;
    if n == 0 {
        return invalid("n must be >= 1");
    }
    let nf = n as f64;
    let (b, big_b) = (profile.b, profile.big_b);
    let ln2 = std::f64::consts::LN_2;
    let r_lo = (2.0 * c_u * b * ln2 / nf).max(4.0 * c_u * c_u * big_b * ln2 / nf);
    let feasible = |r: f64| -> Result<bool> { Ok(u_of_r(profile, n, r, c_u)? <= r / 2.0) };

    let mut r_hi = 8.0 * c_u * (b + big_b) * ((profile.len() + 1) as f64).ln() / nf;
    let mut widenings = 0;
    while !feasible(r_hi)? {
        if widenings == MAX_WIDENINGS {
            return Err(Error::BracketFailure(MAX_WIDENINGS));
        }
        r_hi *= 2.0;
        widenings += 1;
    }

    let mut points: Vec<f64> = Vec::new();
    for &d in profile.deltas().iter().filter(|d| **d > r_lo) {
        let mut p = d;
        while p > r_lo {
            if p < r_hi {
                points.push(p);
            }
            p *= 0.5;
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();

    // pieces [lo, hi) with lo in {r_lo} ∪ points
    let mut lows = vec![r_lo];
    lows.extend(points.iter().copied());
    for (i, &lo) in lows.iter().enumerate() {
        let hi = lows.get(i + 1).copied().unwrap_or(r_hi);
        let counts = bucket_counts(profile, lo, default_j_max(profile, lo))?;
        let (a, c) = u_coefficients(profile, n, &counts, c_u);
        let s = c + (c * c + 2.0 * a).sqrt();
        let mut cand = (s * s).max(lo);
        if cand >= hi {
            continue;
        }
        // absorb rounding in the closed form
        let mut steps = 0;
        while !feasible(cand)? && cand < hi && steps < 64 {
            cand = cand.next_up();
            steps += 1;
        }
        if cand < hi && feasible(cand)? {
            return Ok(cand);
        }
    }
    Ok(r_hi)
}

/// `lambda(x) = c max{r_bar, (b + B) x / n}`.
pub fn lambda_x(profile: &ExcessRiskProfile, n: usize, x: f64, consts: &ComplexityConstants) -> Result<f64> {
    check_positive("x", x)?;
    let rb = r_bar(profile, n, consts.c_u)?;
    Ok(consts.c_lambda * rb.max((profile.b + profile.big_b) * x / n as f64))
}

/// Split of the dictionary used by the key estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K0Partition {
    pub lambda: f64,
    pub rho: f64,
    /// Indices with `Delta <= lambda`.
    pub j_minus: Vec<usize>,
    /// `buckets[k]` holds the indices of `J_{+,k}`.
    pub buckets: Vec<Vec<usize>>,
    /// `None` when no `k` qualifies, in which case `2^{k0}` counts as 0.
    pub k0: Option<u32>,
}

impl K0Partition {
    pub fn two_pow_k0(&self) -> f64 {
        two_pow_k0(self.k0)
    }
}

pub fn two_pow_k0(k0: Option<u32>) -> f64 {
    k0.map_or(0.0, |k| 2f64.powi(k as i32))
}

/// `sup{k >= 0 : 2^k <= ln(counts[k] + 1)}`.
pub fn k0_from_counts(counts: &[usize]) -> Option<u32> {
    counts
        .iter()
        .enumerate()
        .filter(|(k, &c)| 2f64.powi(*k as i32) <= ((c + 1) as f64).ln())
        .map(|(k, _)| k as u32)
        .next_back()
}

pub fn k0_partition(profile: &ExcessRiskProfile, n: usize, x: f64, consts: &ComplexityConstants) -> Result<K0Partition> {
    check_positive("kappa1", consts.kappa1)?;
    let lambda = lambda_x(profile, n, x, consts)?;
    let rho = consts.kappa1 * (profile.b + profile.big_b) / n as f64;
    let mut j_minus = Vec::new();
    let mut buckets: Vec<Vec<usize>> = Vec::new();
    for (j, &d) in profile.deltas().iter().enumerate() {
        if d <= lambda {
            j_minus.push(j);
            continue;
        }
        let k = shell_index(d, rho);
        if buckets.len() <= k {
            buckets.resize(k + 1, Vec::new());
        }
        buckets[k].push(j);
    }
    let counts: Vec<usize> = buckets.iter().map(Vec::len).collect();
    Ok(K0Partition { lambda, rho, j_minus, buckets, k0: k0_from_counts(&counts) })
}

/// `(T c / n) (x + ln sum_j exp(-(n / 2T) Delta_j))`.
pub fn pac_bound_residual(profile: &ExcessRiskProfile, n: usize, temperature: f64, x: f64, c_pac: f64) -> Result<f64> {
    check_positive("temperature", temperature)?;
    check_positive("x", x)?;
    if n == 0 {
        return invalid("n must be >= 1");
    }
    let nf = n as f64;
    // Delta_1 = 0 is the largest exponent, so the sum is already stabilized
    let s: f64 = profile.deltas().iter().map(|d| (-(nf / (2.0 * temperature)) * d).exp()).sum();
    Ok(temperature * c_pac / nf * (x + s.ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyEstimate {
    pub value: f64,
    /// False when `T > c0 max(b, B)`; the estimate is then only indicative.
    pub low_temperature: bool,
}

/// `c (lambda(x) + (b + B) 2^{k0} / n)`.
pub fn key_estimate_bound(
    profile: &ExcessRiskProfile,
    n: usize,
    x: f64,
    temperature: f64,
    consts: &ComplexityConstants,
) -> Result<KeyEstimate> {
    check_positive("temperature", temperature)?;
    let part = k0_partition(profile, n, x, consts)?;
    let value = consts.c_key * (part.lambda + (profile.b + profile.big_b) * part.two_pow_k0() / n as f64);
    Ok(KeyEstimate { value, low_temperature: temperature <= consts.c0 * profile.b.max(profile.big_b) })
}

/// `theta = c_theta (b + B) ln max(M, 2) / n`.
pub fn theorem_c_theta(profile: &ExcessRiskProfile, n: usize, consts: &ComplexityConstants) -> f64 {
    consts.c_theta * (profile.b + profile.big_b) * (profile.len().max(2) as f64).ln() / n as f64
}

/// `c (b + B) (x + psi(theta)) / n`.
pub fn theorem_c_bound(profile: &ExcessRiskProfile, n: usize, x: f64, consts: &ComplexityConstants) -> Result<f64> {
    check_positive("x", x)?;
    let theta = theorem_c_theta(profile, n, consts);
    let p = psi(profile, theta)?;
    Ok(consts.c_key * (profile.b + profile.big_b) * (x + p.psi_value) / n as f64)
}
