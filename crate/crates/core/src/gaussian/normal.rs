//! Standard normal distribution.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{invalid, Result};

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `Phi(x)`, accurate in both tails.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `P[g > x]`.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Inverse of `Phi` on `(0, 1)`: rational initial guess refined by Halley steps.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("probability must lie in (0, 1) (got {p})"));
    }
    if p > 0.5 {
        return Ok(-std_normal_quantile(1.0 - p)?);
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02, 6.680131188771972e+01, -1.328068155288572e+01];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00, 3.754408661907416e+00];
    let mut x = if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..3 {
        let e = std_normal_cdf(x) - p;
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

/// Mills-ratio bounds `(3/(4 sqrt(2 pi)), 1/sqrt(2 pi)) * exp(-x^2/2) / x` on `P[g >= x]`, for `x >= 2`.
pub fn gaussian_tail_sandwich(x: f64) -> Result<(f64, f64)> {
    if x.is_nan() || x < 2.0 || x.is_infinite() {
        return invalid(format!("tail sandwich needs finite x >= 2 (got {x})"));
    }
    let upper = (-0.5 * x * x).exp() / (x * (2.0 * PI).sqrt());
    Ok((0.75 * upper, upper))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((std_normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((std_normal_sf(2.0) - 0.022_750_131_948_179_2).abs() < 1e-16);
        assert!((std_normal_sf(8.0) - 6.220_960_574_271_785e-16).abs() < 1e-28);
        assert!((std_normal_cdf(-5.0) - 2.866_515_718_791_939e-7).abs() < 1e-20);
    }

    #[test]
    fn symmetry() {
        for i in -800..=800 {
            let x = i as f64 / 100.0;
            assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-12, 1e-6, 0.01, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.975, 0.999_999] {
            let x = std_normal_quantile(p).unwrap();
            assert!((std_normal_cdf(x) - p).abs() <= 1e-14 * p.max(1e-3), "p = {p}");
        }
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        assert!((std_normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-13);
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
    }

    #[test]
    fn sandwich_examples() {
        let (lo, hi) = gaussian_tail_sandwich(2.0).unwrap();
        assert!((lo - 0.020_2).abs() < 1e-4 && (hi - 0.027_0).abs() < 1e-4);
        let p = std_normal_sf(2.0);
        assert!(lo <= p && p <= hi);
        let (lo, hi) = gaussian_tail_sandwich(8.0).unwrap();
        assert!(lo <= std_normal_sf(8.0) && std_normal_sf(8.0) <= hi);
        assert!(gaussian_tail_sandwich(1.99).is_err());
        assert!(gaussian_tail_sandwich(f64::NAN).is_err());
    }

    #[test]
    fn sandwich_holds_on_grid() {
        for i in 0..=3000 {
            let x = 2.0 + i as f64 * 0.01;
            let (lo, hi) = gaussian_tail_sandwich(x).unwrap();
            let p = std_normal_sf(x);
            assert!(lo <= p && p <= hi, "x = {x}");
            assert!((hi / lo - 4.0 / 3.0).abs() < 1e-14);
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn cdf_is_symmetric(x in -30.0f64..30.0) {
            prop_assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() <= 1e-14);
        }

        #[test]
        fn quantile_round_trip(p in 1e-12f64..(1.0 - 1e-12)) {
            let x = std_normal_quantile(p).unwrap();
            let back = if p < 0.5 { std_normal_cdf(x) } else { 1.0 - std_normal_sf(x) };
            prop_assert!((back - p).abs() <= 1e-13 * p.min(1.0 - p).max(1e-3), "{p} -> {x} -> {back}");
        }

        #[test]
        fn sandwich_brackets_tail(x in 2.0f64..37.0) {
            let (lo, hi) = gaussian_tail_sandwich(x).unwrap();
            let p = std_normal_sf(x);
            prop_assert!(lo <= p && p <= hi);
            prop_assert!((hi / lo - 4.0 / 3.0).abs() < 1e-12);
        }
    }
}
