//! Gaussian approximation of normalized sums `Xbar = n^{-1/2} sum_i W_i`.

pub mod irwin_hall;
pub mod normal;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::TrialRng;
use crate::stats::dkw_epsilon;

pub use irwin_hall::{irwin_hall_cdf, irwin_hall_pdf, normalized_sum_cdf, normalized_sum_pdf};
pub use normal::{gaussian_tail_sandwich, std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};

/// Default admissible Berry-Esseen constant.
pub const BERRY_ESSEEN_A: f64 = 0.56;

pub type SummandSampler = Arc<dyn Fn(&mut TrialRng) -> f64 + Send + Sync>;

/// Distribution of one standardized summand `W` (mean 0, variance 1).
#[derive(Clone)]
pub enum SummandKind {
    /// `W = sqrt(12) (V - 1/2)`, `V` uniform on `[0, 1]`.
    UniformBased,
    /// `-X` recentred and rescaled, with `X = 1` w.p. `p_plus`, else `-1`.
    RademacherShifted { p_plus: f64 },
    /// `W` standard normal; `Xbar` is then exactly standard normal.
    Gaussian,
    Custom {
        sampler: SummandSampler,
        abs_third_moment: f64,
        continuous: bool,
        zero_skew: bool,
    },
}

impl fmt::Debug for SummandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UniformBased => write!(f, "UniformBased"),
            Self::RademacherShifted { p_plus } => write!(f, "RademacherShifted {{ p_plus: {p_plus} }}"),
            Self::Gaussian => write!(f, "Gaussian"),
            Self::Custom { abs_third_moment, continuous, zero_skew, .. } => {
                write!(f, "Custom {{ abs_third_moment: {abs_third_moment}, continuous: {continuous}, zero_skew: {zero_skew} }}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct NormalizedSumSpec {
    pub kind: SummandKind,
    pub inner_n: usize,
    /// Berry-Esseen constant `A`.
    pub a_const: f64,
}

impl NormalizedSumSpec {
    pub fn new(kind: SummandKind, inner_n: usize) -> Result<Self> {
        if inner_n == 0 {
            return invalid("inner_n must be >= 1");
        }
        if let SummandKind::RademacherShifted { p_plus } = kind {
            if !(p_plus > 0.0 && p_plus < 1.0) {
                return invalid(format!("p_plus must lie in (0, 1) (got {p_plus})"));
            }
        }
        if let SummandKind::Custom { abs_third_moment, .. } = &kind {
            if !(abs_third_moment.is_finite() && *abs_third_moment >= 1.0) {
                return invalid("E|W|^3 must be finite and >= 1 for a unit-variance W");
            }
        }
        Ok(Self { kind, inner_n, a_const: BERRY_ESSEEN_A })
    }

    pub fn uniform(inner_n: usize) -> Self {
        Self::new(SummandKind::UniformBased, inner_n).expect("inner_n >= 1")
    }

    fn rademacher_values(p_plus: f64) -> (f64, f64) {
        // -X takes -1 w.p. p_plus and +1 otherwise
        let mean = 1.0 - 2.0 * p_plus;
        let sd = (1.0 - mean * mean).sqrt();
        ((-1.0 - mean) / sd, (1.0 - mean) / sd)
    }

    /// `E|W|^3`.
    pub fn abs_third_moment(&self) -> f64 {
        match &self.kind {
            SummandKind::UniformBased => 3.0 * 3f64.sqrt() / 4.0,
            SummandKind::RademacherShifted { p_plus } => {
                let (lo, hi) = Self::rademacher_values(*p_plus);
                p_plus * lo.abs().powi(3) + (1.0 - p_plus) * hi.abs().powi(3)
            }
            SummandKind::Gaussian => 2.0 * (2.0 / std::f64::consts::PI).sqrt(),
            SummandKind::Custom { abs_third_moment, .. } => *abs_third_moment,
        }
    }

    /// `beta(W) = A E|W|^3`.
    pub fn beta(&self) -> f64 {
        self.a_const * self.abs_third_moment()
    }

    pub fn is_continuous(&self) -> bool {
        match &self.kind {
            SummandKind::UniformBased | SummandKind::Gaussian => true,
            SummandKind::RademacherShifted { .. } => false,
            SummandKind::Custom { continuous, .. } => *continuous,
        }
    }

    fn has_zero_skew(&self) -> bool {
        match &self.kind {
            SummandKind::UniformBased | SummandKind::Gaussian => true,
            SummandKind::RademacherShifted { p_plus } => *p_plus == 0.5,
            SummandKind::Custom { zero_skew, .. } => *zero_skew,
        }
    }

    pub fn sample_summand(&self, rng: &mut TrialRng) -> f64 {
        match &self.kind {
            SummandKind::UniformBased => 12f64.sqrt() * (rng.random::<f64>() - 0.5),
            SummandKind::RademacherShifted { p_plus } => {
                let (lo, hi) = Self::rademacher_values(*p_plus);
                if rng.random::<f64>() < *p_plus {
                    lo
                } else {
                    hi
                }
            }
            SummandKind::Gaussian => {
                let u: f64 = rng.random();
                std_normal_quantile(u.max(f64::MIN_POSITIVE)).expect("u in (0, 1)")
            }
            SummandKind::Custom { sampler, .. } => sampler(rng),
        }
    }

    /// One draw of `Xbar`.
    pub fn sample(&self, rng: &mut TrialRng) -> f64 {
        let s: f64 = (0..self.inner_n).map(|_| self.sample_summand(rng)).sum();
        s / (self.inner_n as f64).sqrt()
    }

    /// Exact `P[Xbar <= z]` where available.
    pub fn exact_cdf(&self, z: f64) -> Option<f64> {
        match &self.kind {
            SummandKind::UniformBased => normalized_sum_cdf(self.inner_n, z).ok(),
            SummandKind::Gaussian => Some(std_normal_cdf(z)),
            _ => None,
        }
    }

    /// Exact density of `Xbar` where available.
    pub fn exact_pdf(&self, z: f64) -> Option<f64> {
        match &self.kind {
            SummandKind::UniformBased => normalized_sum_pdf(self.inner_n, z).ok(),
            SummandKind::Gaussian => Some(std_normal_pdf(z)),
            _ => None,
        }
    }
}

/// Sup-distance `sup_x |F_hat(x) - Phi(x)|` of a sample, attained at the jumps of `F_hat`.
pub fn kolmogorov_distance_to_normal(sorted: &[f64]) -> Result<f64> {
    if sorted.is_empty() {
        return invalid("empty sample");
    }
    let nf = sorted.len() as f64;
    let mut best: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let phi = std_normal_cdf(x);
        best = best.max((phi - i as f64 / nf).abs()).max((j as f64 / nf - phi).abs());
        i = j;
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerryEsseenReport {
    pub distance: f64,
    /// `A E|W|^3 / sqrt(inner_n)`.
    pub bound: f64,
    /// DKW half-width at confidence `1 - 0.001`.
    pub dkw: f64,
    pub samples: usize,
}

impl BerryEsseenReport {
    pub fn within_bound(&self) -> bool {
        self.distance <= self.bound + self.dkw
    }
}

pub const MIN_BE_SAMPLES: usize = 100_000;

/// Empirical Kolmogorov distance of `Xbar` to the standard normal.
pub fn berry_esseen_distance(spec: &NormalizedSumSpec, mc_samples: usize, rng: &mut TrialRng) -> Result<BerryEsseenReport> {
    if mc_samples < MIN_BE_SAMPLES {
        return invalid(format!("need at least {MIN_BE_SAMPLES} samples (got {mc_samples})"));
    }
    let mut xs: Vec<f64> = (0..mc_samples).map(|_| spec.sample(rng)).collect();
    xs.sort_by(f64::total_cmp);
    Ok(BerryEsseenReport {
        distance: kolmogorov_distance_to_normal(&xs)?,
        bound: spec.beta() / (spec.inner_n as f64).sqrt(),
        dkw: dkw_epsilon(mc_samples, 0.001),
        samples: mc_samples,
    })
}

#[derive(Debug, Clone)]
pub struct Gamma1Query {
    pub ell: usize,
    pub level_n: f64,
    pub spec: NormalizedSumSpec,
}

impl Gamma1Query {
    pub fn new(ell: usize, level_n: f64, spec: NormalizedSumSpec) -> Result<Self> {
        if ell == 0 {
            return invalid("ell must be >= 1");
        }
        if !(level_n.is_finite() && level_n >= 2.0) {
            return invalid(format!("level_n must be >= 2 (got {level_n})"));
        }
        if !spec.is_continuous() {
            return Err(Error::UnsupportedDistribution("the summand law has atoms; gamma1 needs a density".into()));
        }
        Ok(Self { ell, level_n, spec })
    }

    /// `P[Xbar > gamma1] = level_n^{-1/ell}`.
    pub fn exceedance(&self) -> f64 {
        (-(self.level_n.ln()) / self.ell as f64).exp()
    }

    /// `P[Xbar <= gamma1] = 1 - level_n^{-1/ell}`, computed without cancellation.
    pub fn level(&self) -> f64 {
        -(-(self.level_n.ln()) / self.ell as f64).exp_m1()
    }
}

/// Exact `gamma1` for summand laws with a known CDF (uniform-based, Gaussian).
pub fn gamma1(query: &Gamma1Query) -> Result<f64> {
    let q = query.level();
    let spec = &query.spec;
    match spec.kind {
        SummandKind::Gaussian => std_normal_quantile(q),
        SummandKind::UniformBased => {
            let w = (3.0 * spec.inner_n as f64).sqrt();
            let (mut lo, mut hi) = (-w, w);
            let mut x = std_normal_quantile(q)?.clamp(-w + 1e-12, w - 1e-12);
            for _ in 0..200 {
                let f = spec.exact_cdf(x).expect("uniform CDF") - q;
                if f.abs() < 1e-15 {
                    break;
                }
                if f > 0.0 {
                    hi = x;
                } else {
                    lo = x;
                }
                if hi - lo < 1e-13 * (1.0 + x.abs()) {
                    break;
                }
                let d = spec.exact_pdf(x).expect("uniform pdf");
                let newton = x - f / d;
                x = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            }
            Ok(x)
        }
        _ => Err(Error::UnsupportedDistribution("no closed-form CDF; use gamma1_monte_carlo".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub value: f64,
    /// Asymptotic standard error `sqrt(q(1-q)/N) / f(value)`, with `f` estimated from order-statistic spacings.
    pub stderr: f64,
}

/// Nearest-rank Monte Carlo estimate of `gamma1`.
pub fn gamma1_monte_carlo(query: &Gamma1Query, draws: usize, rng: &mut TrialRng) -> Result<QuantileEstimate> {
    if draws < 100 {
        return invalid(format!("need at least 100 draws (got {draws})"));
    }
    let q = query.level();
    let mut xs: Vec<f64> = (0..draws).map(|_| query.spec.sample(rng)).collect();
    xs.sort_by(f64::total_cmp);
    let nf = draws as f64;
    let k = ((q * nf).ceil() as usize).clamp(1, draws) - 1;
    let m = (nf.sqrt().ceil() as usize).max(1);
    let (a, b) = (k.saturating_sub(m), (k + m).min(draws - 1));
    let inv_density = (xs[b] - xs[a]) / ((b - a) as f64 / nf);
    Ok(QuantileEstimate { value: xs[k], stderr: (q * (1.0 - q) / nf).sqrt() * inv_density })
}

/// Outcome of the three checks around `gamma1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gamma1Report {
    /// `x = ln(level_n) / ell`.
    pub x: f64,
    /// Part (1) applies when `x <= 1`.
    pub part1_applicable: bool,
    /// `1 - x <= exp(-x)`.
    pub part1_left: bool,
    /// `exp(-x) <= 1 - x/3`.
    pub part1_right: bool,
    pub gamma1: f64,
    /// `beta(W)/sqrt(inner_n) + x < P[g < -2]`.
    pub premise2: bool,
    pub gamma1_le_minus2: bool,
    /// `|gamma1| / sqrt(ln(c3 ell / ln level_n))` when defined.
    pub part3_ratio: Option<f64>,
    pub part3_window: (f64, f64),
    pub part3_in_window: Option<bool>,
}

/// Part (1) inequalities `1 - x <= e^{-x} <= 1 - x/3` at `x = ln(n)/ell`, phrased through
/// `1 - e^{-x} = -expm1(-x)` so that no cancellation occurs.
pub fn gamma1_part1(ell: usize, level_n: f64) -> (bool, bool, bool) {
    let x = level_n.ln() / ell as f64;
    let one_minus_exp = -(-x).exp_m1();
    (x <= 1.0, one_minus_exp <= x, one_minus_exp >= x / 3.0)
}

pub fn lemma_gamma1_checks(query: &Gamma1Query, c3: f64, window: (f64, f64)) -> Result<Gamma1Report> {
    let g = match query.spec.kind {
        SummandKind::UniformBased | SummandKind::Gaussian => gamma1(query)?,
        _ => return Err(Error::UnsupportedDistribution("lemma checks need an exact gamma1".into())),
    };
    let x = query.level_n.ln() / query.ell as f64;
    let (applicable, left, right) = gamma1_part1(query.ell, query.level_n);
    let premise2 = query.spec.beta() / (query.spec.inner_n as f64).sqrt() + x < std_normal_cdf(-2.0);
    let arg = c3 * query.ell as f64 / query.level_n.ln();
    let part3_ratio = if arg > 1.0 { Some(g.abs() / arg.ln().sqrt()) } else { None };
    Ok(Gamma1Report {
        x,
        part1_applicable: applicable,
        part1_left: left,
        part1_right: right,
        gamma1: g,
        premise2,
        gamma1_le_minus2: g <= -2.0,
        part3_ratio,
        part3_window: window,
        part3_in_window: part3_ratio.map(|r| r >= window.0 && r <= window.1),
    })
}

/// How the CDF of `Xbar` is obtained in [`moderate_deviation_envelope`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeMode {
    /// Closed-form CDF (uniform-based or Gaussian summands).
    Exact,
    /// Empirical CDF of this many draws.
    MonteCarlo(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    /// `(x, |F(x) - Phi(x)| / (n^{-1/2} e^{-x^2/2}))`.
    pub points: Vec<(f64, f64)>,
    /// Grid points outside `|x| <= b0 n^{1/6}`.
    pub excluded: Vec<f64>,
    pub max_ratio: f64,
}

pub fn moderate_deviation_envelope(
    spec: &NormalizedSumSpec,
    x_grid: &[f64],
    mode: EnvelopeMode,
    b0: f64,
    rng: &mut TrialRng,
) -> Result<EnvelopeReport> {
    if !spec.is_continuous() {
        return Err(Error::UnsupportedDistribution("lattice summands violate the envelope near their jumps".into()));
    }
    if !spec.has_zero_skew() {
        return Err(Error::UnsupportedDistribution("envelope form assumes E W^3 = 0".into()));
    }
    let nf = spec.inner_n as f64;
    let limit = b0 * nf.powf(1.0 / 6.0);
    let (inside, excluded): (Vec<f64>, Vec<f64>) = x_grid.iter().partition(|x| x.abs() <= limit);
    let sample = match mode {
        EnvelopeMode::Exact => None,
        EnvelopeMode::MonteCarlo(draws) => {
            let mut xs: Vec<f64> = (0..draws).map(|_| spec.sample(rng)).collect();
            xs.sort_by(f64::total_cmp);
            Some(xs)
        }
    };
    let mut points = Vec::with_capacity(inside.len());
    for &x in &inside {
        let f = match &sample {
            None => spec.exact_cdf(x).ok_or_else(|| Error::UnsupportedDistribution("no closed-form CDF".into()))?,
            Some(xs) => xs.partition_point(|v| *v <= x) as f64 / xs.len() as f64,
        };
        let scale = (-0.5 * x * x).exp() / nf.sqrt();
        points.push((x, (f - std_normal_cdf(x)).abs() / scale));
    }
    let max_ratio = points.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(EnvelopeReport { points, excluded, max_ratio })
}
