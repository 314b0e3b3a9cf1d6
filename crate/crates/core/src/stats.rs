//! Small summary statistics shared by the harness and the Gaussian checks.

use crate::error::{invalid, Result};

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Sample mean and standard error of the mean (unbiased variance).
pub fn mean_stderr(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return invalid("mean of an empty sample");
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt() / n.sqrt()))
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return invalid(format!("wilson interval needs 0 <= k <= n, n > 0 (k={successes}, n={trials})"));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the exact endpoints at k = 0 and k = n are 0 and 1; the formula leaves rounding residue
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    Ok((lo, hi))
}

/// Nearest-rank quantile of an ascending slice: the `ceil(q * n)`-th order statistic.
pub fn nearest_rank(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return invalid("quantile of an empty sample");
    }
    if !(0.0..=1.0).contains(&q) {
        return invalid(format!("quantile level {q} outside [0, 1]"));
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return invalid("slope fit needs two or more paired points");
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return invalid("slope fit with constant abscissae");
    }
    Ok(sxy / sxx)
}

/// Dvoretzky-Kiefer-Wolfowitz band half-width at confidence `1 - alpha`.
pub fn dkw_epsilon(samples: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * samples as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample_has_zero_stderr() {
        let (m, se) = mean_stderr(&[0.25; 40]).unwrap();
        assert_eq!(m, 0.25);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn two_point_sample() {
        let k = 50;
        let mut v = vec![0.0; k];
        v.extend(std::iter::repeat_n(1.0, k));
        let (m, _) = mean_stderr(&v).unwrap();
        assert_eq!(m, 0.5);
        let (lo, hi) = wilson_interval(k, 2 * k, Z95).unwrap();
        assert!(((0.5 - lo) - (hi - 0.5)).abs() < 1e-15);
        // closed form for p = 1/2: half-width z*sqrt(1/(4n) + z^2/(4n^2)) / (1 + z^2/n)
        let n = (2 * k) as f64;
        let half = Z95 * (0.25 / n + Z95 * Z95 / (4.0 * n * n)).sqrt() / (1.0 + Z95 * Z95 / n);
        assert!((hi - 0.5 - half).abs() < 1e-15);
    }

    #[test]
    fn quantile_one_is_max() {
        let v = [1.0, 2.0, 5.0, 9.0];
        assert_eq!(nearest_rank(&v, 1.0).unwrap(), 9.0);
        assert_eq!(nearest_rank(&v, 0.0).unwrap(), 1.0);
        assert_eq!(nearest_rank(&v, 0.5).unwrap(), 2.0);
        assert_eq!(nearest_rank(&v, 0.51).unwrap(), 5.0);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert!(mean_stderr(&[]).is_err());
        assert!(nearest_rank(&[], 0.5).is_err());
        assert!(wilson_interval(0, 0, Z95).is_err());
    }

    #[test]
    fn slope_of_a_line() {
        let xs = [1.0, 2.0, 3.0];
        let ys = [3.0, 1.0, -1.0];
        assert!((ols_slope(&xs, &ys).unwrap() + 2.0).abs() < 1e-15);
    }
}
