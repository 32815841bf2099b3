//! Scenario-agnostic performance indicators over an SNR distribution:
//! outage probability, delay outage rate (DOR) and quantile inversion.
//!
//! With Shannon-rate adaptation `R = W log2(1 + snr)`, a service delivering
//! `D` bits within delay `T_th` over bandwidth `W` fails exactly when the
//! SNR falls below `2^(D / (W T_th)) - 1`; the DOR is the SNR CDF at that
//! threshold. Outage against a minimum rate `R_min` is the CDF at
//! `2^(R_min / W) - 1`.

use crate::{Error, Result};

/// Service demand: data volume, bandwidth, delay budget and (for outage) a
/// minimum-rate requirement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceSpec {
    /// Data volume per delivery, bits.
    pub data_bits: f64,
    /// Transmission bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Delivery-time threshold, seconds.
    pub delay_threshold_s: f64,
    /// Minimum acceptable rate for outage accounting, bits/s.
    pub min_rate_bps: f64,
}

impl ServiceSpec {
    pub fn new(
        data_bits: f64,
        bandwidth_hz: f64,
        delay_threshold_s: f64,
        min_rate_bps: f64,
    ) -> Result<Self> {
        if !(data_bits >= 0.0) {
            return Err(Error::Domain(format!("data_bits must be >= 0, got {data_bits}")));
        }
        if !(bandwidth_hz > 0.0) {
            return Err(Error::Domain(format!("bandwidth_hz must be > 0, got {bandwidth_hz}")));
        }
        if !(delay_threshold_s > 0.0) {
            return Err(Error::Domain(format!(
                "delay_threshold_s must be > 0, got {delay_threshold_s}"
            )));
        }
        if !(min_rate_bps >= 0.0) {
            return Err(Error::Domain(format!("min_rate_bps must be >= 0, got {min_rate_bps}")));
        }
        Ok(Self { data_bits, bandwidth_hz, delay_threshold_s, min_rate_bps })
    }
}

/// An evaluatable cumulative distribution over linear SNR.
pub trait SnrCdf {
    /// `P(snr <= gamma)`.
    fn eval(&self, gamma: f64) -> Result<f64>;

    /// Human-readable description of what this distribution models.
    fn label(&self) -> String;
}

/// Plain closures as ad-hoc CDFs (used heavily in tests and by empirical
/// wrappers).
impl<F: Fn(f64) -> Result<f64>> SnrCdf for F {
    fn eval(&self, gamma: f64) -> Result<f64> {
        self(gamma)
    }

    fn label(&self) -> String {
        "closure cdf".into()
    }
}

/// An SNR threshold that may exceed floating-point range.
///
/// `2^x - 1` overflows f64 around `x ~ 1024`; demands that extreme are a
/// certain outage, and saturating keeps that explicit instead of letting
/// infinities flow through arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrThreshold {
    Finite(f64),
    /// Threshold beyond representable range; outage/DOR is certain.
    Saturated,
}

impl SnrThreshold {
    fn from_exponent(exp: f64) -> Self {
        const MAX_EXPONENT: f64 = 1024.0;
        if exp > MAX_EXPONENT {
            SnrThreshold::Saturated
        } else {
            SnrThreshold::Finite(exp.exp2() - 1.0)
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            SnrThreshold::Finite(v) => Some(*v),
            SnrThreshold::Saturated => None,
        }
    }
}

/// SNR needed to sustain `min_rate` over `bandwidth`: `2^(R_min/W) - 1`.
pub fn outage_threshold(min_rate_bps: f64, bandwidth_hz: f64) -> SnrThreshold {
    assert!(bandwidth_hz > 0.0, "bandwidth must be > 0");
    assert!(min_rate_bps >= 0.0, "min_rate must be >= 0");
    SnrThreshold::from_exponent(min_rate_bps / bandwidth_hz)
}

/// SNR below which `data_bits` cannot be delivered within the delay budget:
/// `2^(D / (W T_th)) - 1`.
pub fn dor_threshold(data_bits: f64, bandwidth_hz: f64, delay_threshold_s: f64) -> SnrThreshold {
    assert!(bandwidth_hz > 0.0 && delay_threshold_s > 0.0);
    assert!(data_bits >= 0.0);
    SnrThreshold::from_exponent(data_bits / (bandwidth_hz * delay_threshold_s))
}

/// Probability that the instantaneous rate falls below `min_rate_bps`.
pub fn outage_probability(
    cdf: &dyn SnrCdf,
    min_rate_bps: f64,
    bandwidth_hz: f64,
) -> Result<f64> {
    match outage_threshold(min_rate_bps, bandwidth_hz) {
        SnrThreshold::Finite(g) => cdf.eval(g),
        SnrThreshold::Saturated => Ok(1.0),
    }
}

/// Delay outage rate: probability that delivering `svc.data_bits` takes
/// longer than `svc.delay_threshold_s`.
pub fn dor(cdf: &dyn SnrCdf, svc: &ServiceSpec) -> Result<f64> {
    match dor_threshold(svc.data_bits, svc.bandwidth_hz, svc.delay_threshold_s) {
        SnrThreshold::Finite(g) => cdf.eval(g),
        SnrThreshold::Saturated => Ok(1.0),
    }
}

/// Inverse CDF by bisection, to relative SNR tolerance 1e-6 (the bisection
/// itself runs tighter so that `cdf(quantile(p))` lands within 1e-6 of `p`
/// for any continuous input).
pub fn quantile(cdf: &dyn SnrCdf, p: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::Domain(format!("quantile needs p in (0,1), got {p}")));
    }
    // Bracket from above by doubling.
    let mut hi = 1.0f64;
    let mut f_hi = cdf.eval(hi)?;
    let mut grow = 0;
    while f_hi < p {
        hi *= 2.0;
        grow += 1;
        if grow > 1100 {
            return Err(Error::Unbracketable { p });
        }
        f_hi = cdf.eval(hi)?;
    }
    let mut lo = 0.0f64;
    for _ in 0..400 {
        let mid = if lo == 0.0 { hi * 0.5 } else { 0.5 * (lo + hi) };
        let f_mid = cdf.eval(mid)?;
        if f_mid < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form SNR distribution of ideal selection diversity: the best of
/// `devices` i.i.d. Rician branches, each at full per-device power, so
/// `F(g) = F_single(g)^devices` with the single-branch Rician power CDF
/// `F_single(g) = 1 - Q_1(sqrt(2 v), sqrt(2 (1+v) g / mean))`.
///
/// The reference baseline for the cooperative schemes; selection never
/// benefits from power scaling because only one device transmits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionDiversityCdf {
    pub mean_snr: f64,
    pub rice_factor: f64,
    pub devices: u32,
}

impl SnrCdf for SelectionDiversityCdf {
    fn eval(&self, gamma: f64) -> Result<f64> {
        if gamma < 0.0 {
            return Err(Error::Domain(format!("snr must be >= 0, got {gamma}")));
        }
        if gamma == 0.0 {
            return Ok(0.0);
        }
        let v = self.rice_factor;
        let a = (2.0 * v).sqrt();
        let b = (2.0 * (1.0 + v) * gamma / self.mean_snr).sqrt();
        let single = crate::specfun::marcum_q_complement(1, a, b)?;
        Ok(single.powi(self.devices as i32))
    }

    fn label(&self) -> String {
        format!(
            "selection diversity over {} rician branches (mean {:.3e}, rice {:.3})",
            self.devices, self.mean_snr, self.rice_factor
        )
    }
}

/// Spot-check a CDF on a grid: evaluations must lie in [0, 1] and be
/// non-decreasing. Run when registering a distribution for an experiment.
pub fn spot_check_cdf(cdf: &dyn SnrCdf, lo: f64, hi: f64) -> Result<()> {
    assert!(lo >= 0.0 && hi > lo);
    let mut prev = -1.0f64;
    for i in 0..64 {
        let g = lo + (hi - lo) * i as f64 / 63.0;
        let f = cdf.eval(g)?;
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::Domain(format!(
                "cdf {} out of [0,1] at gamma={g}: {f}",
                cdf.label()
            )));
        }
        if f < prev - 1e-12 {
            return Err(Error::Domain(format!(
                "cdf {} decreasing at gamma={g}: {f} < {prev}",
                cdf.label()
            )));
        }
        prev = f;
    }
    Ok(())
}
