//! Closed-form SNR distribution for quantized-feedback phasing.
//!
//! With many devices, real and imaginary parts of the phased sum are
//! approximated by independent Gaussians (central limit theorem). The real
//! part has mean `mu_r` and variance `sigma_r^2`; the imaginary part is
//! zero-mean with variance `sigma_i^2`, generally different from
//! `sigma_r^2`. The squared magnitude then follows a mixture of noncentral
//! chi-square laws,
//!
//! `F(g) = sum_n a_n (1 - Q_{n+1}(sqrt(lambda)/sigma_r, sqrt(g)/sigma_r))`
//!
//! with binomial-like weights `a_n` in `t = (sigma_i^2 - sigma_r^2) /
//! sigma_i^2` summing to 1 for `|t| < 1`. Outside a safety radius the series
//! is abandoned for direct numerical integration of the two-Gaussian law.
//! Word errors enter as an outer binomial mixture over the number of
//! corrupted feedback words, whose conditional moments are exact.

use crate::channel::{derive_powers, ClusterConfig, FeedbackSideInfo};
use crate::metrics::{dor_threshold, ServiceSpec, SnrCdf, SnrThreshold};
use crate::specfun::{
    erf, ln_gamma, marcum_q_complement_with, one_minus_sinc, rice_amplitude_mean, sinc_norm,
    Tolerance,
};
use crate::{Error, Result};

/// Safety margin inside the series' radius of convergence `|t| < 1`; near
/// the edge convergence is slow and alternating-term cancellation bites.
const SERIES_T_MAX: f64 = 0.95;

/// CLT parameters of the phased sum, conditioned on the number of erroneous
/// feedback words.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSumMoments {
    /// Mean of the real part.
    pub mu_r: f64,
    /// Standard deviation of the real part.
    pub sigma_r: f64,
    /// Standard deviation of the imaginary part (mean is identically zero:
    /// the residual-phase laws are symmetric and sine is odd).
    pub sigma_i: f64,
    /// Noncentrality of the real part's square, `mu_r^2`.
    pub noncentrality: f64,
}

/// Conditional CLT moments given exactly `error_count` corrupted words.
///
/// Correct words leave a residual phase uniform on `(-pi/2^N, pi/2^N)`;
/// corrupted words leave it uniform on the whole circle. The same formula
/// covers the error-free case `error_count = 0`.
pub fn moments(
    cfg: &ClusterConfig,
    side: &FeedbackSideInfo,
    error_count: u32,
) -> Result<GaussianSumMoments> {
    if error_count > cfg.active_devices {
        return Err(Error::Domain(format!(
            "error_count {error_count} exceeds active device count {}",
            cfg.active_devices
        )));
    }
    let p = derive_powers(cfg);
    let f = p.per_device_power_factor;
    let d = cfg.active_devices as f64;
    let m = error_count as f64;
    let good = d - m;

    // Mean amplitude of one device's channel at its actual transmit power;
    // mean power absorbs the power factor so no loose sqrt(P) floats around.
    let amp_mean = rice_amplitude_mean(cfg.mean_snr * f, cfg.rice_factor);
    let sc1 = sinc_norm(0.5f64.powi(side.bits as i32)); // E[cos residual]
    let sc2 = sinc_norm(0.5f64.powi(side.bits as i32 - 1)); // for E[cos^2]

    let mu_r = good * amp_mean * sc1;

    let mean_power = cfg.mean_snr * f;
    let e_re2 = 0.5 * m * mean_power
        + 0.5 * good * mean_power * (1.0 + sc2)
        + good * (good - 1.0) * amp_mean * amp_mean * sc1 * sc1;
    // (1 - sinc)/2 via the cancellation-free form: keeps sigma_i > 0 even
    // when the quantizer is fine enough that sinc rounds to 1.
    let e_im2 = 0.5 * m * mean_power
        + 0.5 * good * mean_power * one_minus_sinc(0.5f64.powi(side.bits as i32 - 1));

    let sigma_r2 = e_re2 - mu_r * mu_r;
    if !(sigma_r2 > 0.0) {
        return Err(Error::NonPositiveVariance { m: error_count, value: sigma_r2 });
    }
    Ok(GaussianSumMoments {
        mu_r,
        sigma_r: sigma_r2.sqrt(),
        sigma_i: e_im2.sqrt(),
        noncentrality: mu_r * mu_r,
    })
}

/// Which evaluation route produced a CDF value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdfBranch {
    /// Noncentral chi-square mixture series.
    Series,
    /// Adaptive quadrature of the two-Gaussian law.
    Quadrature,
}

/// A CDF value plus the branch that computed it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureEval {
    pub value: f64,
    pub branch: CdfBranch,
}

fn series_parameter(mom: &GaussianSumMoments) -> f64 {
    let si2 = mom.sigma_i * mom.sigma_i;
    let sr2 = mom.sigma_r * mom.sigma_r;
    (si2 - sr2) / si2
}

/// `P(X^2 + Y^2 <= gamma)` for `X ~ N(mu_r, sigma_r^2)`, `Y ~ N(0,
/// sigma_i^2)`. Uses the mixture series when its parameter is inside the
/// safety radius and falls back to quadrature otherwise; the result records
/// which branch ran.
pub fn mixture_cdf(mom: &GaussianSumMoments, gamma: f64, tol: &Tolerance) -> Result<MixtureEval> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("snr must be >= 0, got {gamma}")));
    }
    let t = series_parameter(mom);
    if t.abs() >= SERIES_T_MAX {
        return Ok(MixtureEval { value: quadrature_cdf(mom, gamma)?, branch: CdfBranch::Quadrature });
    }
    if gamma == 0.0 {
        return Ok(MixtureEval { value: 0.0, branch: CdfBranch::Series });
    }
    let a = mom.noncentrality.sqrt() / mom.sigma_r;
    let b = gamma.sqrt() / mom.sigma_r;
    // a_0 = sigma_r / sigma_i; a_{n+1} = a_n * t * (n + 1/2) / (n + 1).
    let mut weight = mom.sigma_r / mom.sigma_i;
    let mut weight_mass = 0.0f64;
    let mut acc = 0.0f64;
    let mut comp = 0.0f64; // Kahan compensation
    for n in 0..tol.max_terms {
        if weight.abs() > tol.abs_tol * 1e-2 {
            let f_n = marcum_q_complement_with(n as u32 + 1, a, b, tol)?;
            let term = weight * f_n;
            let y = term - comp;
            let t_new = acc + y;
            comp = (t_new - acc) - y;
            acc = t_new;
        }
        weight_mass += weight;
        let next = weight * t * (n as f64 + 0.5) / (n as f64 + 1.0);
        if (1.0 - weight_mass).abs() < tol.abs_tol && next.abs() < tol.abs_tol {
            return Ok(MixtureEval { value: acc.clamp(0.0, 1.0), branch: CdfBranch::Series });
        }
        weight = next;
    }
    Err(Error::NonConvergence {
        what: "chi-square mixture series",
        partial: acc,
        max_terms: tol.max_terms,
    })
}

/// Same CDF by adaptive Simpson quadrature, independent of the series.
///
/// Substituting `x = sqrt(gamma) sin(u)` removes the square-root endpoint
/// singularity:
///
/// `F = int_{-pi/2}^{pi/2} N(sqrt(g) sin u; mu_r, sigma_r)
///      erf(sqrt(g) cos u / (sqrt(2) sigma_i)) sqrt(g) cos u du`.
///
/// The integrand can be a spike far narrower than any fixed starting grid
/// (the Gaussian factor lives on scale `sigma_r`, the erf boundary layers on
/// scale `sigma_i`), so the interval is pre-split at the X-density quantiles
/// and the erf transition layers before the adaptive refinement runs.
pub fn quadrature_cdf(mom: &GaussianSumMoments, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("snr must be >= 0, got {gamma}")));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let root = gamma.sqrt();
    let inv_norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * mom.sigma_r);
    let f = |u: f64| -> f64 {
        let (sin, cos) = u.sin_cos();
        let x = root * sin;
        let z = (x - mom.mu_r) / mom.sigma_r;
        let density = inv_norm * (-0.5 * z * z).exp();
        density * erf(root * cos / (std::f64::consts::SQRT_2 * mom.sigma_i)) * root * cos
    };
    let half_pi = std::f64::consts::FRAC_PI_2;

    let mut cuts = vec![-half_pi, half_pi];
    // Mass of the X density, mapped through u = asin(x / root).
    for k in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0] {
        let x = mom.mu_r + k * mom.sigma_r;
        if x.abs() < root {
            cuts.push((x / root).asin());
        }
    }
    // erf transition layers: cos u ~ sigma_i / root near both endpoints.
    for k in [1.0, 4.0, 16.0] {
        let c = (k * mom.sigma_i / root).min(1.0);
        let du = c.asin();
        cuts.push(half_pi - du);
        cuts.push(du - half_pi);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let mut acc = 0.0;
    for pair in cuts.windows(2) {
        if pair[1] > pair[0] {
            acc += adaptive_simpson(&f, pair[0], pair[1], 1e-14, 48)?;
        }
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// Standard adaptive Simpson with absolute tolerance and depth cap.
fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64> {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::NonConvergence {
                what: "adaptive simpson quadrature",
                partial: left + right,
                max_terms: 0,
            });
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

/// Precomputed SNR distribution under feedback phasing with word errors: a
/// binomial mixture over the number of corrupted words of conditional CLT
/// laws.
#[derive(Debug, Clone)]
pub struct FeedbackCdf {
    components: Vec<MixtureComponent>,
    tol: Tolerance,
    label: String,
}

#[derive(Debug, Clone)]
struct MixtureComponent {
    error_count: u32,
    weight: f64,
    moments: GaussianSumMoments,
}

impl FeedbackCdf {
    /// Builds the mixture, dropping binomial components below weight 1e-16.
    pub fn new(cfg: &ClusterConfig, side: &FeedbackSideInfo, tol: Tolerance) -> Result<Self> {
        let d = cfg.active_devices;
        let weights = binomial_weights(d, side.word_error_prob);
        let mut components = Vec::new();
        for (m, w) in weights.into_iter().enumerate() {
            if w < 1e-16 {
                continue;
            }
            let m = m as u32;
            let mom = moments(cfg, side, m)
                .map_err(|e| Error::MixtureComponent { m, source: Box::new(e) })?;
            components.push(MixtureComponent { error_count: m, weight: w, moments: mom });
        }
        Ok(Self {
            components,
            tol,
            label: format!(
                "feedback-phasing CLT mixture (N={}, p_w={}, {} devices)",
                side.bits, side.word_error_prob, d
            ),
        })
    }

    /// Per-component branch flags: (error count, branch that will evaluate
    /// that component).
    pub fn branch_flags(&self) -> Vec<(u32, CdfBranch)> {
        self.components
            .iter()
            .map(|c| {
                let branch = if series_parameter(&c.moments).abs() >= SERIES_T_MAX {
                    CdfBranch::Quadrature
                } else {
                    CdfBranch::Series
                };
                (c.error_count, branch)
            })
            .collect()
    }

    /// `P(snr <= gamma)`; compensated summation in ascending error count so
    /// the result is independent of any internal evaluation order.
    pub fn snr_cdf(&self, gamma: f64) -> Result<f64> {
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        for c in &self.components {
            let f = mixture_cdf(&c.moments, gamma, &self.tol)
                .map_err(|e| Error::MixtureComponent { m: c.error_count, source: Box::new(e) })?;
            let term = c.weight * f.value;
            let y = term - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        Ok(acc.clamp(0.0, 1.0))
    }

    /// Delay outage rate for a service over this distribution.
    pub fn dor(&self, svc: &ServiceSpec) -> Result<f64> {
        match dor_threshold(svc.data_bits, svc.bandwidth_hz, svc.delay_threshold_s) {
            SnrThreshold::Finite(g) => self.snr_cdf(g),
            SnrThreshold::Saturated => Ok(1.0),
        }
    }
}

impl SnrCdf for FeedbackCdf {
    fn eval(&self, gamma: f64) -> Result<f64> {
        self.snr_cdf(gamma)
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// One-shot CDF evaluation including word errors.
pub fn snr_cdf_with_errors(
    cfg: &ClusterConfig,
    side: &FeedbackSideInfo,
    gamma: f64,
    tol: &Tolerance,
) -> Result<f64> {
    FeedbackCdf::new(cfg, side, *tol)?.snr_cdf(gamma)
}

/// One-shot delay outage rate including word errors.
pub fn dor_feedback(
    cfg: &ClusterConfig,
    side: &FeedbackSideInfo,
    svc: &ServiceSpec,
    tol: &Tolerance,
) -> Result<f64> {
    FeedbackCdf::new(cfg, side, *tol)?.dor(svc)
}

/// Binomial pmf over 0..=n, anchored at the mode and extended outward by the
/// term recurrence so the weights stay accurate far into the tails.
pub fn binomial_weights(n: u32, p: f64) -> Vec<f64> {
    let mut w = vec![0.0f64; n as usize + 1];
    if p <= 0.0 {
        w[0] = 1.0;
        return w;
    }
    if p >= 1.0 {
        w[n as usize] = 1.0;
        return w;
    }
    let nf = n as f64;
    let mode = (((nf + 1.0) * p).floor() as usize).min(n as usize);
    let ln_mode = ln_gamma(nf + 1.0)
        - ln_gamma(mode as f64 + 1.0)
        - ln_gamma(nf - mode as f64 + 1.0)
        + mode as f64 * p.ln()
        + (nf - mode as f64) * (1.0 - p).ln();
    w[mode] = ln_mode.exp();
    let ratio = p / (1.0 - p);
    for m in mode + 1..=n as usize {
        w[m] = w[m - 1] * ratio * (nf - m as f64 + 1.0) / m as f64;
    }
    for m in (0..mode).rev() {
        w[m] = w[m + 1] / ratio * (m as f64 + 1.0) / (nf - m as f64);
    }
    w
}
