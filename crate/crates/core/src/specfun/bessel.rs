//! Modified Bessel functions of the first kind, integer order.
//!
//! Ascending power series for `x <= 15`; beyond that the fixed-order
//! asymptotic expansion, with a normalized downward recurrence (Miller's
//! algorithm) taking over for orders too large for the asymptotic series to
//! reach tolerance.

use super::{gamma::ln_gamma, Tolerance};
use crate::{Error, Result};

/// Crossover between the ascending series and the large-argument branch.
pub(super) const SERIES_MAX_X: f64 = 15.0;

/// `I_n(x)` for integer `order >= 0`, `x >= 0`, at the default [`Tolerance`].
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    bessel_i_with(order, x, &Tolerance::default())
}

/// `I_n(x)` with explicit truncation control.
pub fn bessel_i_with(order: u32, x: f64, tol: &Tolerance) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("bessel_i requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    if x <= SERIES_MAX_X {
        return series(order, x, tol);
    }
    // Large argument: try the asymptotic expansion first; it self-reports
    // when the order is too large for the requested tolerance.
    match asymptotic(order, x, tol) {
        Some(v) => Ok(v * x.exp()),
        None => miller(order, x, tol).map(|v| v * x.exp()),
    }
}

/// `exp(-x) I_n(x)` for `x >= 0`; immune to the `exp` overflow of the plain
/// function at large arguments.
pub fn bessel_i_scaled(order: u32, x: f64) -> f64 {
    let tol = Tolerance::default();
    assert!(x >= 0.0, "bessel_i_scaled requires x >= 0");
    if x <= SERIES_MAX_X {
        // Series value scaled after the fact; exp(-15) is far from underflow.
        return series(order, x, &tol).expect("series converges for x <= 15") * (-x).exp();
    }
    match asymptotic(order, x, &tol) {
        Some(v) => v,
        None => miller(order, x, &tol).expect("downward recurrence converges"),
    }
}

/// Internal unchecked `I_0` for series-range arguments.
pub(super) fn i0_series(x: f64) -> f64 {
    series(0, x, &Tolerance::default()).expect("series converges for x <= 15")
}

/// Internal unchecked `I_1` for series-range arguments.
pub(super) fn i1_series(x: f64) -> f64 {
    series(1, x, &Tolerance::default()).expect("series converges for x <= 15")
}

/// Ascending series `I_n(x) = (x/2)^n / n! * sum_k (x^2/4)^k / (k! (n+1)_k)`.
/// All terms positive, no cancellation; the prefactor goes through logs so
/// large orders underflow gracefully instead of overflowing intermediates.
fn series(order: u32, x: f64, tol: &Tolerance) -> Result<f64> {
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    let n = order as f64;
    let q = 0.25 * x * x;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..=tol.max_terms {
        let kf = k as f64;
        term *= q / (kf * (n + kf));
        sum += term;
        if term <= tol.abs_tol + tol.rel_tol * sum {
            let ln_pre = n * (0.5 * x).ln() - ln_gamma(n + 1.0);
            return Ok((ln_pre + sum.ln()).exp());
        }
    }
    Err(Error::NonConvergence {
        what: "bessel_i ascending series",
        partial: (n * (0.5 * x).ln() - ln_gamma(n + 1.0)).exp() * sum,
        max_terms: tol.max_terms,
    })
}

/// Fixed-order asymptotic expansion of `exp(-x) I_n(x)` (AMS55 9.7.1).
/// Returns `None` when the optimally-truncated remainder misses `tol`,
/// which happens once the order grows relative to `x`.
fn asymptotic(order: u32, x: f64, tol: &Tolerance) -> Option<f64> {
    let mu = 4.0 * (order as f64) * (order as f64);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let num = mu - (2.0 * kf - 1.0) * (2.0 * kf - 1.0);
        term *= -num / (8.0 * x * kf);
        if term.abs() >= prev {
            // Divergent tail reached before convergence.
            return None;
        }
        sum += term;
        prev = term.abs();
        if term.abs() <= tol.abs_tol + tol.rel_tol * sum.abs() {
            return Some(sum / (2.0 * std::f64::consts::PI * x).sqrt());
        }
    }
    None
}

/// Miller's normalized downward recurrence for `exp(-x) I_n(x)`, anchored on
/// the asymptotic `I_0`. Valid here because it is only invoked for `x > 15`,
/// where the order-0 asymptotic expansion converges easily.
fn miller(order: u32, x: f64, tol: &Tolerance) -> Result<f64> {
    let i0 = asymptotic(0, x, tol).expect("order-0 asymptotic converges for x > 15");
    // Start high enough above the target order for the recurrence to lock on.
    let mut m = order + ((40.0 * order as f64).sqrt() as u32) + 20;
    if m % 2 == 1 {
        m += 1;
    }
    let mut ip1 = 0.0f64; // I_{k+1} seed
    let mut ik = 1e-300f64; // I_k seed (arbitrary scale)
    let mut target = 0.0f64;
    for k in (1..=m).rev() {
        let im1 = ip1 + (2.0 * k as f64 / x) * ik;
        ip1 = ik;
        ik = im1;
        if k - 1 == order {
            target = ik;
        }
        if ik.abs() > 1e280 {
            ip1 /= 1e280;
            ik /= 1e280;
            target /= 1e280;
        }
    }
    // `ik` now holds the scaled I_0.
    let val = target / ik * i0;
    if val.is_finite() {
        Ok(val)
    } else {
        Err(Error::NonConvergence {
            what: "bessel_i downward recurrence",
            partial: val,
            max_terms: m as usize,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Quadrature oracle: `I_n(x) = (1/pi) int_0^pi exp(x cos t) cos(n t) dt`.
    /// The integrand is smooth and periodic, so the trapezoid rule converges
    /// spectrally; independent of every series used by the implementation.
    fn oracle_i(order: u32, x: f64) -> f64 {
        let n = 4096;
        let h = std::f64::consts::PI / n as f64;
        let f = |t: f64| (x * t.cos()).exp() * (order as f64 * t).cos();
        let mut s = 0.5 * (f(0.0) + f(std::f64::consts::PI));
        for i in 1..n {
            s += f(i as f64 * h);
        }
        s * h / std::f64::consts::PI
    }

    #[test]
    fn zero_argument() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn frozen_oracle_values() {
        // Frozen from the quadrature oracle (power-series stagnation agrees).
        let cases = [
            (0u32, 1.0, 1.266_065_877_752_008_3),
            (0, 15.5, 550_722.120_314_413_8),
            (3, 2.7, 0.634_630_463_813_691),
            (5, 20.0, 23_018_392.213_413_67),
            (12, 40.0, 2.440_129_433_289_008_3e15),
        ];
        for (n, x, want) in cases {
            let got = bessel_i(n, x).unwrap();
            assert!(
                ((got - want) / want).abs() < 1e-12,
                "I_{n}({x}): got {got}, want {want}"
            );
        }
    }

    #[test]
    fn matches_quadrature_oracle_across_branches() {
        for &n in &[0u32, 1, 2, 4, 7, 11] {
            for &x in &[0.1, 0.9, 3.0, 14.9, 15.1, 22.0, 60.0] {
                let got = bessel_i(n, x).unwrap();
                let want = oracle_i(n, x);
                // The trapezoid oracle carries an absolute roundoff floor of
                // ~eps * exp(x); allow for it alongside the relative gate.
                let tol = 1e-10 * want + 1e-13 * x.exp();
                assert!(
                    (got - want).abs() < tol,
                    "I_{n}({x}): got {got}, oracle {want}"
                );
            }
        }
    }

    #[test]
    fn high_order_small_argument_leading_term() {
        // Where the oracle cannot reach, the leading series term is exact to
        // first order: I_n(x) ~ (x/2)^n / n! for x -> 0.
        let x = 0.1f64;
        for &n in &[7u32, 11] {
            let lead = (x / 2.0).powi(n as i32)
                / (1..=n as u64).product::<u64>() as f64;
            let got = bessel_i(n, x).unwrap();
            assert!(((got - lead) / lead).abs() < 1e-3, "I_{n}({x}) vs leading term");
        }
        // Frozen high-precision references for the same points.
        assert!((bessel_i(7, 0.1).unwrap() / 1.550_583_679_635_409_3e-13 - 1.0).abs() < 1e-12);
        assert!((bessel_i(11, 0.1).unwrap() / 1.223_502_347_488_461_6e-22 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recurrence_identity_holds() {
        // I_{n-1}(x) - I_{n+1}(x) = (2n/x) I_n(x)
        for &x in &[0.1, 1.0, 7.5, 15.0, 21.0, 30.0] {
            for n in 1u32..=8 {
                let lhs = bessel_i(n - 1, x).unwrap() - bessel_i(n + 1, x).unwrap();
                let rhs = 2.0 * n as f64 / x * bessel_i(n, x).unwrap();
                let scale = bessel_i(n - 1, x).unwrap();
                assert!(
                    ((lhs - rhs) / scale).abs() < 1e-9,
                    "recurrence at n={n}, x={x}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn monotone_in_argument() {
        for &n in &[0u32, 1, 3] {
            let mut prev = bessel_i(n, 0.01).unwrap();
            for i in 1..=100 {
                let x = 0.01 + 0.4 * i as f64;
                let cur = bessel_i(n, x).unwrap();
                assert!(cur > prev, "I_{n} not increasing at x={x}");
                prev = cur;
            }
        }
    }

    #[test]
    fn scaled_variant_consistent() {
        for &x in &[0.5, 10.0, 15.0, 16.0, 50.0, 300.0] {
            for &n in &[0u32, 1, 4] {
                let scaled = bessel_i_scaled(n, x);
                assert!(scaled.is_finite() && scaled > 0.0);
                if x <= 20.0 {
                    let plain = bessel_i(n, x).unwrap();
                    assert!(((scaled - plain * (-x).exp()) / scaled).abs() < 1e-11);
                }
            }
        }
        // Scaled quadrature oracle, usable far beyond the exp(x) overflow:
        // exp(-x) I_n(x) = (1/pi) int_0^pi exp(x (cos t - 1)) cos(n t) dt.
        let scaled_oracle = |order: u32, x: f64| {
            let n = 8192;
            let h = std::f64::consts::PI / n as f64;
            let f = |t: f64| (x * (t.cos() - 1.0)).exp() * (order as f64 * t).cos();
            let mut s = 0.5 * (f(0.0) + f(std::f64::consts::PI));
            for i in 1..n {
                s += f(i as f64 * h);
            }
            s * h / std::f64::consts::PI
        };
        let got = bessel_i_scaled(2, 700.0);
        let want = scaled_oracle(2, 700.0);
        assert!(((got - want) / want).abs() < 1e-9);
    }

    #[test]
    fn domain_error_on_negative_argument() {
        assert!(matches!(bessel_i(0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn nonconvergence_carries_partial_value() {
        let tight = Tolerance { abs_tol: 1e-300, rel_tol: 1e-300, max_terms: 2 };
        match bessel_i_with(0, 10.0, &tight) {
            Err(Error::NonConvergence { partial, max_terms, .. }) => {
                assert_eq!(max_terms, 2);
                assert!(partial.is_finite() && partial > 0.0);
            }
            other => panic!("expected NonConvergence, got {other:?}"),
        }
    }
}
