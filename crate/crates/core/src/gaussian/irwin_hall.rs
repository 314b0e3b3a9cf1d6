//! Law of `S = V_1 + ... + V_n` for i.i.d. uniform `V_i`, and of the normalized sum
//! `Xbar = sqrt(12/n) (S - n/2)`.
//!
//! For `n <= EXACT_MAX` the alternating-sum formula is evaluated on the lower half
//! and reflected. Beyond that its terms outgrow the result by many orders of
//! magnitude, so the CDF is obtained by Fourier inversion of the characteristic
//! function `phi(t) = sinc(sqrt(3/n) t)^n` with composite Gauss-Legendre quadrature.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{invalid, Result};

/// Largest `n` evaluated by the alternating sum.
pub const EXACT_MAX: usize = 12;

const GL_ORDER: usize = 16;
const T_MAX: f64 = 40.0;
const PANELS: usize = 200;

fn gauss_legendre() -> &'static [(f64, f64); GL_ORDER] {
    static NODES: OnceLock<[(f64, f64); GL_ORDER]> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = GL_ORDER;
        let mut out = [(0.0, 0.0); GL_ORDER];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out
    })
}

fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let s = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
        sum = s;
    }
    sum + comp
}

/// `C(n, k)`, exact in `f64` for the sizes used here.
fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |c, i| c * (n - i) as f64 / (i + 1) as f64)
}

/// `sum_{k <= x} (-1)^k C(n,k) (x - k)^p / p!`, valid for `x <= n/2`.
fn alternating(n: usize, x: f64, p: usize) -> f64 {
    let top = (x.floor() as usize).min(n);
    compensated_sum((0..=top).filter(|&k| x - k as f64 > 0.0).map(|k| {
        let y = x - k as f64;
        let mag = choose(n, k) * (1..=p).fold(1.0, |acc, i| acc * y / i as f64);
        if k % 2 == 0 {
            mag
        } else {
            -mag
        }
    }))
}

/// `ln |sinc(u)|` and the sign of `sinc(u)`.
fn ln_sinc(u: f64) -> (f64, f64) {
    if u.abs() < 0.1 {
        let u2 = u * u;
        let series = -u2 * (1.0 / 6.0 + u2 * (1.0 / 180.0 + u2 * (1.0 / 2835.0 + u2 * (1.0 / 37800.0 + u2 / 467_775.0))));
        (series, 1.0)
    } else {
        let s = u.sin() / u;
        (s.abs().ln(), s.signum())
    }
}

/// Characteristic function of the normalized sum.
pub fn normalized_char_fn(n: usize, t: f64) -> f64 {
    let (l, sign) = ln_sinc((3.0 / n as f64).sqrt() * t);
    let mag = (n as f64 * l).exp();
    if sign < 0.0 && n % 2 == 1 {
        -mag
    } else {
        mag
    }
}

fn fourier_integral(f: impl Fn(f64) -> f64) -> f64 {
    let nodes = gauss_legendre();
    let h = T_MAX / PANELS as f64;
    compensated_sum((0..PANELS).map(|p| {
        let mid = (p as f64 + 0.5) * h;
        nodes.iter().map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
    }))
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        invalid("inner_n must be >= 1")
    } else {
        Ok(())
    }
}

/// `P[S <= x]`.
pub fn irwin_hall_cdf(n: usize, x: f64) -> Result<f64> {
    check_n(n)?;
    if x.is_nan() {
        return invalid("x is NaN");
    }
    let nf = n as f64;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= nf {
        return Ok(1.0);
    }
    if n > EXACT_MAX {
        return normalized_sum_cdf(n, (12.0 / nf).sqrt() * (x - 0.5 * nf));
    }
    let v = if x <= 0.5 * nf { alternating(n, x, n) } else { 1.0 - alternating(n, nf - x, n) };
    Ok(v.clamp(0.0, 1.0))
}

/// Density of `S`.
pub fn irwin_hall_pdf(n: usize, x: f64) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    if !(x > 0.0 && x < nf) {
        return Ok(if n == 1 && (x == 0.0 || x == 1.0) { 1.0 } else { 0.0 });
    }
    if n > EXACT_MAX {
        return Ok(normalized_sum_pdf(n, (12.0 / nf).sqrt() * (x - 0.5 * nf))? * (12.0 / nf).sqrt());
    }
    if n == 1 {
        return Ok(1.0);
    }
    let y = if x <= 0.5 * nf { x } else { nf - x };
    Ok(alternating(n, y, n - 1).max(0.0))
}

/// `P[Xbar <= z]` for `Xbar = sqrt(12/n)(S - n/2)`.
pub fn normalized_sum_cdf(n: usize, z: f64) -> Result<f64> {
    check_n(n)?;
    if z.is_nan() {
        return invalid("z is NaN");
    }
    let nf = n as f64;
    let half_width = (3.0 * nf).sqrt();
    if z <= -half_width {
        return Ok(0.0);
    }
    if z >= half_width {
        return Ok(1.0);
    }
    if n <= EXACT_MAX {
        return irwin_hall_cdf(n, 0.5 * nf + z * (nf / 12.0).sqrt());
    }
    Ok(normalized_sum_cdf_fourier(n, z).clamp(0.0, 1.0))
}

/// Gil-Pelaez inversion: `1/2 + (1/pi) int_0^inf sin(t z) phi(t) / t dt`.
pub fn normalized_sum_cdf_fourier(n: usize, z: f64) -> f64 {
    0.5 + fourier_integral(|t| (t * z).sin() / t * normalized_char_fn(n, t)) / PI
}

/// Density of `Xbar`.
pub fn normalized_sum_pdf(n: usize, z: f64) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    if z.abs() >= (3.0 * nf).sqrt() {
        return Ok(0.0);
    }
    if n <= EXACT_MAX {
        return Ok(irwin_hall_pdf(n, 0.5 * nf + z * (nf / 12.0).sqrt())? * (nf / 12.0).sqrt());
    }
    Ok((fourier_integral(|t| (t * z).cos() * normalized_char_fn(n, t)) / PI).max(0.0))
}
