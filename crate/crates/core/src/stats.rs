//! Statistical verification utilities: empirical-vs-reference distances,
//! goodness-of-fit tails and binomial confidence intervals.
//!
//! These back both the test suites and the confidence guards in the Monte
//! Carlo harness.

use crate::specfun::reg_upper_gamma;

/// Two-sided Kolmogorov-Smirnov statistic of sorted samples against a
/// reference CDF: `sup_x |F_n(x) - F(x)|`.
pub fn ks_statistic_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}

/// Asymptotic critical KS distance at significance `alpha` for sample size
/// `n`: `sqrt(-ln(alpha/2) / 2) / sqrt(n)`. At `alpha = 0.01` the constant
/// is 1.6276.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Two-sample KS statistic; both inputs sorted ascending. Tied values are
/// consumed together so that identical samples give distance zero.
pub fn ks2_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Critical two-sample KS distance at significance `alpha`.
pub fn ks2_critical(na: usize, nb: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((na + nb) as f64 / (na as f64 * nb as f64)).sqrt()
}

/// Survival function of the chi-square distribution with `dof` degrees of
/// freedom: `P(X > stat)`.
pub fn chi2_sf(dof: f64, stat: f64) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    reg_upper_gamma(0.5 * dof, 0.5 * stat)
}

/// Half-width of the normal-approximation 99% confidence interval for a
/// binomial proportion estimated as `p_hat` from `n` trials.
pub fn binom_ci99_halfwidth(p_hat: f64, n: u64) -> f64 {
    const Z99: f64 = 2.575_829_303_548_901;
    let p = p_hat.clamp(0.0, 1.0);
    Z99 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Mean and standard error of the mean of a sample.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_distance_of_exact_grid_is_half_step() {
        // Samples at the exact quantile midpoints of U(0,1): the KS distance
        // is 1/(2n).
        let n = 100;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic_sorted(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn ks_critical_constant_matches_tables() {
        assert!((ks_critical(1, 0.01) - 1.6276).abs() < 1e-3);
        assert!((ks_critical(10_000, 0.05) - 1.3581 / 100.0).abs() < 1e-5);
    }

    #[test]
    fn chi2_sf_reference_points() {
        // P(chi2_1 > 3.841) ~ 0.05, P(chi2_31 > 52.19) ~ 0.01
        assert!((chi2_sf(1.0, 3.841_458_820_694_124) - 0.05).abs() < 1e-10);
        assert!((chi2_sf(31.0, 52.191_394_9) - 0.01).abs() < 1e-7);
    }

    #[test]
    fn binom_ci_scaling() {
        let w = binom_ci99_halfwidth(1e-4, 10_000_000);
        assert!((w - 8.14e-6).abs() < 2e-8, "{w}");
    }

    #[test]
    fn two_sample_ks_identical_is_zero() {
        let a: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert_eq!(ks2_statistic(&a, &a), 0.0);
    }
}
