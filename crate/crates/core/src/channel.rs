//! Exact stochastic model of the cluster sum channel.
//!
//! Every device sees an i.i.d. Rician channel `h_k = g_k + sqrt(gamma_d)
//! e^{j phi_k}` with scattered power `gamma_s`, static power `gamma_d` and
//! uniform static phase. The samplers here produce the received SNR
//! `|<h, w>|^2` of the phased sum under each side-information model; they
//! are the ground truth every analytic approximation in this crate is
//! verified against. Noise power is 1, so channel power equals SNR.

use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// How transmit power reacts to the number of active devices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerScaling {
    /// Every device transmits at full power; cluster power grows with size.
    ConstantPerDevice,
    /// Per-device power is divided by the active count, holding total
    /// cluster power fixed. Isolates coherence gain from power gain.
    ConstantTotal,
}

/// Cluster-wide channel statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterConfig {
    /// Mean received SNR of one device at full power (linear).
    pub mean_snr: f64,
    /// Rice factor: static power over scattered mean power (linear).
    pub rice_factor: f64,
    /// Number of devices participating in the transmission.
    pub active_devices: u32,
    /// Cluster size; at least `active_devices`.
    pub total_devices: u32,
    pub power_scaling: PowerScaling,
}

impl ClusterConfig {
    pub fn new(
        mean_snr: f64,
        rice_factor: f64,
        active_devices: u32,
        total_devices: u32,
        power_scaling: PowerScaling,
    ) -> Result<Self> {
        if !(mean_snr > 0.0) {
            return Err(Error::Domain(format!("mean_snr must be > 0, got {mean_snr}")));
        }
        if !(rice_factor >= 0.0) {
            return Err(Error::Domain(format!("rice_factor must be >= 0, got {rice_factor}")));
        }
        if active_devices < 1 || active_devices > total_devices {
            return Err(Error::Domain(format!(
                "need 1 <= active_devices <= total_devices, got {active_devices}/{total_devices}"
            )));
        }
        Ok(Self { mean_snr, rice_factor, active_devices, total_devices, power_scaling })
    }

    /// Per-device transmit power factor implied by the scaling mode.
    pub fn power_factor(&self) -> f64 {
        match self.power_scaling {
            PowerScaling::ConstantPerDevice => 1.0,
            PowerScaling::ConstantTotal => 1.0 / self.active_devices as f64,
        }
    }
}

/// Location-based phasing quality: each device's static-phase correction
/// carries a zero-mean Gaussian error with this standard deviation (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkmSideInfo {
    pub sigma_eps: f64,
}

impl CkmSideInfo {
    pub fn new(sigma_eps: f64) -> Result<Self> {
        if !(sigma_eps >= 0.0) {
            return Err(Error::Domain(format!("sigma_eps must be >= 0, got {sigma_eps}")));
        }
        Ok(Self { sigma_eps })
    }
}

/// Quantized-feedback phasing quality: `bits` per phasing word and an
/// independent per-device word error probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackSideInfo {
    pub bits: u32,
    pub word_error_prob: f64,
}

impl FeedbackSideInfo {
    pub fn new(bits: u32, word_error_prob: f64) -> Result<Self> {
        // Realistic feedback budgets are a handful of bits; the cap only
        // keeps the codebook size sane for the degenerate-quantization tests.
        if !(1..=32).contains(&bits) {
            return Err(Error::Domain(format!("bits must be in 1..=32, got {bits}")));
        }
        if !(0.0..=1.0).contains(&word_error_prob) {
            return Err(Error::Domain(format!(
                "word_error_prob must be in [0, 1], got {word_error_prob}"
            )));
        }
        Ok(Self { bits, word_error_prob })
    }
}

/// Which transmission strategy generated a sample set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    /// Location-based phasing of the static component.
    Ckm(CkmSideInfo),
    /// Quantized full-channel-phase feedback.
    Feedback(FeedbackSideInfo),
    /// Only the strongest device transmits, always at full per-device power.
    Selection,
}

impl Scenario {
    /// Stream tag separating the scenarios' random substreams.
    pub(crate) fn stream_tag(&self) -> u64 {
        match self {
            Scenario::Ckm(_) => 1,
            Scenario::Feedback(_) => 2,
            Scenario::Selection => 3,
        }
    }
}

/// Static/scattered power split of one device's channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedPowers {
    /// Static (LoS) component power, `mean_snr * v / (1 + v)`.
    pub gamma_d: f64,
    /// Scattered component mean power, `mean_snr / (1 + v)`.
    pub gamma_s: f64,
    /// Per-device transmit power factor from the scaling mode.
    pub per_device_power_factor: f64,
}

/// Splits the mean SNR into static and scattered parts according to the Rice
/// factor. The parts always sum back to `mean_snr`.
pub fn derive_powers(cfg: &ClusterConfig) -> DerivedPowers {
    let v = cfg.rice_factor;
    DerivedPowers {
        gamma_d: cfg.mean_snr * v / (1.0 + v),
        gamma_s: cfg.mean_snr / (1.0 + v),
        per_device_power_factor: cfg.power_factor(),
    }
}

/// Phase of codeword `index` (1-based) in the `bits`-bit uniform codebook
/// `{ n pi / 2^(bits-1) : n = 1..2^bits }`.
pub fn codebook_phase(index: u32, bits: u32) -> f64 {
    debug_assert!(index >= 1 && index <= 1u32 << bits.min(31));
    index as f64 * PI / (1u64 << (bits - 1)) as f64
}

/// Nearest-codeword quantization of a phase (any finite radians value);
/// returns the 1-based codebook index.
pub fn nearest_codeword(phase: f64, bits: u32) -> u32 {
    let size = 1u64 << bits;
    let step = 2.0 * PI / size as f64;
    // Round to the nearest multiple of `step`, then fold into 1..=2^bits.
    let n = (phase / step).round() as i64;
    let folded = n.rem_euclid(size as i64) as u64;
    if folded == 0 {
        size as u32
    } else {
        folded as u32
    }
}

/// One scattered-part draw: complex zero-mean Gaussian with mean power
/// `power`, returned as (re, im).
#[inline]
fn scattered<R: Rng>(rng: &mut R, power: f64) -> (f64, f64) {
    let s = (0.5 * power).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    (s * re, s * im)
}

/// One SNR sample under location-based phasing: coherent static sum with
/// per-device Gaussian phase errors plus the scattered sum.
pub fn one_snr_ckm<R: Rng>(cfg: &ClusterConfig, side: &CkmSideInfo, rng: &mut R) -> f64 {
    let p = derive_powers(cfg);
    let f = p.per_device_power_factor;
    let static_amp = (p.gamma_d * f).sqrt();
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for _ in 0..cfg.active_devices {
        let eps: f64 = side.sigma_eps * rng.sample::<f64, _>(StandardNormal);
        let (sin, cos) = eps.sin_cos();
        re += static_amp * cos;
        im += static_amp * sin;
        let (gre, gim) = scattered(rng, p.gamma_s * f);
        re += gre;
        im += gim;
    }
    re * re + im * im
}

/// One complex sum sample under feedback phasing with the word-error coin
/// drawn per device. Returns (re, im) of `<h, w>`.
pub fn one_sum_feedback<R: Rng>(
    cfg: &ClusterConfig,
    side: &FeedbackSideInfo,
    rng: &mut R,
) -> (f64, f64) {
    sum_feedback_inner(cfg, side, ErrorModel::Random(side.word_error_prob), rng)
}

/// One received-SNR sample under feedback phasing.
pub fn one_snr_feedback<R: Rng>(
    cfg: &ClusterConfig,
    side: &FeedbackSideInfo,
    rng: &mut R,
) -> f64 {
    let (re, im) = one_sum_feedback(cfg, side, rng);
    re * re + im * im
}

/// One selection-diversity SNR sample: the strongest of `active_devices`
/// i.i.d. Rician powers at full per-device power. Selection is ideal (true
/// maximum); power is never down-scaled because a lone transmitter cannot
/// trade cluster power for its own.
pub fn one_snr_selection<R: Rng>(cfg: &ClusterConfig, rng: &mut R) -> f64 {
    let v = cfg.rice_factor;
    let gamma_d = cfg.mean_snr * v / (1.0 + v);
    let gamma_s = cfg.mean_snr / (1.0 + v);
    let amp = gamma_d.sqrt();
    let mut best = 0.0f64;
    for _ in 0..cfg.active_devices {
        let (gre, gim) = scattered(rng, gamma_s);
        let re = amp + gre;
        let power = re * re + gim * gim;
        if power > best {
            best = power;
        }
    }
    best
}

enum ErrorModel {
    /// Independent word errors with the given probability.
    Random(f64),
    /// Exactly this many devices (the first ones) have erroneous words.
    Forced(u32),
}

fn sum_feedback_inner<R: Rng>(
    cfg: &ClusterConfig,
    side: &FeedbackSideInfo,
    errors: ErrorModel,
    rng: &mut R,
) -> (f64, f64) {
    let p = derive_powers(cfg);
    let f = p.per_device_power_factor;
    let static_amp = (p.gamma_d * f).sqrt();
    let scattered_power = p.gamma_s * f;
    let size = 1u64 << side.bits;
    let step = 2.0 * PI / size as f64;
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for k in 0..cfg.active_devices {
        // Rician amplitude and an independent uniform channel phase; for a
        // circularly symmetric channel the two are independent.
        let (gre, gim) = scattered(rng, scattered_power);
        let amp = ((static_amp + gre).powi(2) + gim * gim).sqrt();
        let phase = rng.gen_range(-PI..PI);
        let word_is_bad = match errors {
            ErrorModel::Random(pw) => pw > 0.0 && rng.gen::<f64>() < pw,
            ErrorModel::Forced(m) => k < m,
        };
        let codeword = if word_is_bad {
            // The whole word is random: a uniformly drawn codebook entry.
            rng.gen_range(1..=size) as f64 * step
        } else {
            nearest_codeword(phase, side.bits) as f64 * step
        };
        let residual = phase - codeword;
        let (sin, cos) = residual.sin_cos();
        re += amp * cos;
        im += amp * sin;
    }
    (re, im)
}

/// `n` i.i.d. SNR samples under location-based phasing.
pub fn sample_snr_ckm<R: Rng>(
    cfg: &ClusterConfig,
    side: &CkmSideInfo,
    rng: &mut R,
    n: usize,
) -> Vec<f64> {
    (0..n).map(|_| one_snr_ckm(cfg, side, rng)).collect()
}

/// `n` i.i.d. SNR samples under feedback phasing.
pub fn sample_snr_feedback<R: Rng>(
    cfg: &ClusterConfig,
    side: &FeedbackSideInfo,
    rng: &mut R,
    n: usize,
) -> Vec<f64> {
    (0..n).map(|_| one_snr_feedback(cfg, side, rng)).collect()
}

/// `n` i.i.d. selection-diversity SNR samples.
pub fn sample_snr_selection<R: Rng>(cfg: &ClusterConfig, rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| one_snr_selection(cfg, rng)).collect()
}

/// `n` complex sum samples under feedback phasing with exactly `error_count`
/// erroneous words. The oracle for the conditional moment formulas; devices
/// are exchangeable, so forcing the first `error_count` words bad loses no
/// generality.
pub fn sample_sum_feedback_conditional<R: Rng>(
    cfg: &ClusterConfig,
    side: &FeedbackSideInfo,
    error_count: u32,
    rng: &mut R,
    n: usize,
) -> Vec<(f64, f64)> {
    assert!(error_count <= cfg.active_devices);
    (0..n)
        .map(|_| sum_feedback_inner(cfg, side, ErrorModel::Forced(error_count), rng))
        .collect()
}

/// One SNR sample under the given scenario; the montecarlo harness's single
/// dispatch point.
pub fn one_snr<R: Rng>(cfg: &ClusterConfig, scenario: &Scenario, rng: &mut R) -> f64 {
    match scenario {
        Scenario::Ckm(side) => one_snr_ckm(cfg, side, rng),
        Scenario::Feedback(side) => one_snr_feedback(cfg, side, rng),
        Scenario::Selection => one_snr_selection(cfg, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::specfun::gauss_cos_moment;

    fn cfg(
        mean_snr: f64,
        rice_factor: f64,
        devices: u32,
        scaling: PowerScaling,
    ) -> ClusterConfig {
        ClusterConfig::new(mean_snr, rice_factor, devices, devices, scaling).unwrap()
    }

    #[test]
    fn derive_powers_limits() {
        let p = derive_powers(&cfg(1.0, 0.0, 4, PowerScaling::ConstantPerDevice));
        assert_eq!(p.gamma_d, 0.0);
        assert_eq!(p.gamma_s, 1.0);

        let p = derive_powers(&cfg(1.0, 1e6, 4, PowerScaling::ConstantPerDevice));
        assert!((p.gamma_d - 1.0).abs() < 1e-5);
        assert!((p.gamma_s - 1e-6).abs() < 1e-9);

        // Independently evaluated split at mean_snr = 10^-1.5, v = 10^0.6.
        let p = derive_powers(&cfg(
            10f64.powf(-1.5),
            10f64.powf(0.6),
            20,
            PowerScaling::ConstantTotal,
        ));
        assert!((p.gamma_d - 0.025_274_187_689_272_726).abs() < 1e-17);
        assert!((p.gamma_s - 0.006_348_588_912_411_063).abs() < 1e-17);
        assert!((p.gamma_d + p.gamma_s - 10f64.powf(-1.5)).abs() < 1e-17);
        assert!((p.gamma_d / p.gamma_s - 10f64.powf(0.6)).abs() < 1e-12);
        assert_eq!(p.per_device_power_factor, 1.0 / 20.0);
    }

    #[test]
    fn config_validation() {
        assert!(ClusterConfig::new(0.0, 1.0, 1, 1, PowerScaling::ConstantTotal).is_err());
        assert!(ClusterConfig::new(1.0, -0.1, 1, 1, PowerScaling::ConstantTotal).is_err());
        assert!(ClusterConfig::new(1.0, 1.0, 5, 4, PowerScaling::ConstantTotal).is_err());
        assert!(CkmSideInfo::new(-1.0).is_err());
        assert!(FeedbackSideInfo::new(0, 0.1).is_err());
        assert!(FeedbackSideInfo::new(2, 1.5).is_err());
    }

    #[test]
    fn determinism_per_stream() {
        let c = cfg(0.1, 2.0, 8, PowerScaling::ConstantTotal);
        let side = CkmSideInfo::new(0.3).unwrap();
        let a = sample_snr_ckm(&c, &side, &mut substream(9, 1, 0), 64);
        let b = sample_snr_ckm(&c, &side, &mut substream(9, 1, 0), 64);
        assert_eq!(a, b);
    }

    #[test]
    fn ckm_pure_static_is_deterministic_sum() {
        // sigma_eps = 0 and an effectively infinite Rice factor: every sample
        // is the fully coherent static sum.
        let n = 32;
        let side = CkmSideInfo::new(0.0).unwrap();
        let c = cfg(2.0, 1e12, 10, PowerScaling::ConstantPerDevice);
        for s in sample_snr_ckm(&c, &side, &mut substream(1, 1, 0), n) {
            assert!((s - 2.0 * 100.0).abs() < 1e-4 * 200.0);
        }
        let c = cfg(2.0, 1e12, 10, PowerScaling::ConstantTotal);
        for s in sample_snr_ckm(&c, &side, &mut substream(1, 1, 0), n) {
            assert!((s - 2.0 * 10.0).abs() < 1e-4 * 20.0);
        }
    }

    #[test]
    fn ckm_rayleigh_mean_matches() {
        // v = 0: the sum is complex Gaussian; mean power is
        // active * mean_snr * power_factor.
        let c = cfg(0.5, 0.0, 16, PowerScaling::ConstantPerDevice);
        let side = CkmSideInfo::new(0.7).unwrap();
        let n = 200_000;
        let xs = sample_snr_ckm(&c, &side, &mut substream(3, 1, 0), n);
        let mean = xs.iter().sum::<f64>() / n as f64;
        let expect = 16.0 * 0.5;
        // Exponential power: std of the mean is mean / sqrt(n).
        let se = expect / (n as f64).sqrt();
        assert!((mean - expect).abs() < 3.0 * se, "mean {mean} vs {expect}");
    }

    #[test]
    fn ckm_mean_power_accounting() {
        // E|sum|^2 = f * (d*gamma_s + gamma_d*(d + d(d-1) e^{-sigma^2})).
        let c = cfg(0.2, 3.0, 12, PowerScaling::ConstantTotal);
        let side = CkmSideInfo::new(20f64.to_radians()).unwrap();
        let p = derive_powers(&c);
        let d = 12.0;
        let coh = gauss_cos_moment(side.sigma_eps).powi(2);
        let expect =
            p.per_device_power_factor * (d * p.gamma_s + p.gamma_d * (d + d * (d - 1.0) * coh));
        let n = 400_000;
        let xs = sample_snr_ckm(&c, &side, &mut substream(11, 1, 0), n);
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - expect).abs() < 3.0 * se,
            "mean {mean} vs {expect} (se {se})"
        );
    }

    #[test]
    fn quantizer_codebook_roundtrip() {
        for bits in 1..=8u32 {
            let size = 1u32 << bits;
            for idx in 1..=size {
                let phase = codebook_phase(idx, bits);
                assert_eq!(nearest_codeword(phase, bits), idx);
            }
        }
        // Wrap-around: phases near zero quantize to the full-turn codeword.
        assert_eq!(nearest_codeword(0.01, 2), 4);
        assert_eq!(nearest_codeword(-0.01, 2), 4);
    }

    #[test]
    fn quantizer_residual_is_uniform() {
        // Chi-square goodness of fit of the residual phase against
        // U(-pi/2^N, pi/2^N), 32 bins, n = 1e6.
        let bits = 3u32;
        let mut rng = substream(5, 99, 0);
        let n = 1_000_000usize;
        let half_width = PI / (1u64 << bits) as f64;
        let step = 2.0 * PI / (1u64 << bits) as f64;
        let mut counts = [0u64; 32];
        for _ in 0..n {
            let phase = rng.gen_range(-PI..PI);
            let residual = phase - nearest_codeword(phase, bits) as f64 * step;
            // Fold to the principal interval.
            let r = residual - (residual / (2.0 * PI)).round() * 2.0 * PI;
            assert!(
                r > -half_width - 1e-12 && r <= half_width + 1e-12,
                "residual {r} outside (+-{half_width})"
            );
            let u = (r + half_width) / (2.0 * half_width);
            let bin = ((u * 32.0) as usize).min(31);
            counts[bin] += 1;
        }
        let expected = n as f64 / 32.0;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let p = crate::stats::chi2_sf(31.0, stat);
        assert!(p > 0.01, "chi2 stat {stat}, p {p}");
    }

    #[test]
    fn feedback_all_words_random_mean_power() {
        // p_w = 1: incoherent sum; mean power = d * mean_snr * f.
        let c = cfg(0.3, 2.0, 10, PowerScaling::ConstantTotal);
        let side = FeedbackSideInfo::new(2, 1.0).unwrap();
        let n = 400_000;
        let xs = sample_snr_feedback(&c, &side, &mut substream(8, 2, 0), n);
        let mean = xs.iter().sum::<f64>() / n as f64;
        let expect = 10.0 * 0.3 / 10.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!((mean - expect).abs() < 3.0 * se, "mean {mean} vs {expect}");
    }

    #[test]
    fn feedback_single_device_fine_quantizer_matches_rician() {
        // N = 16, p_w = 0, one device: the sample law is the plain Rician
        // power law. Two-sample KS against direct Rician power draws.
        let c = cfg(1.0, 2.5, 1, PowerScaling::ConstantPerDevice);
        let side = FeedbackSideInfo::new(16, 0.0).unwrap();
        let n = 100_000;
        let mut a = sample_snr_feedback(&c, &side, &mut substream(21, 2, 0), n);

        let mut rng = substream(22, 3, 0);
        let gamma_d: f64 = 2.5 / 3.5;
        let gamma_s = 1.0 / 3.5;
        let mut b: Vec<f64> = (0..n)
            .map(|_| {
                let (gre, gim) = super::scattered(&mut rng, gamma_s);
                (gamma_d.sqrt() + gre).powi(2) + gim * gim
            })
            .collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let d = crate::stats::ks2_statistic(&a, &b);
        let crit = crate::stats::ks2_critical(n, n, 0.01);
        assert!(d < crit, "two-sample KS {d} vs critical {crit}");
    }

    #[test]
    fn selection_single_device_is_rician() {
        let c = cfg(1.0, 1.0, 1, PowerScaling::ConstantPerDevice);
        let n = 100_000;
        let mut xs = sample_snr_selection(&c, &mut substream(2, 3, 0), n);
        xs.sort_by(f64::total_cmp);
        // KS against the closed-form Rician power CDF.
        let cdf = |g: f64| {
            crate::specfun::marcum_q_complement(1, 2f64.sqrt(), (2.0 * 2.0 * g).sqrt()).unwrap()
        };
        let d = crate::stats::ks_statistic_sorted(&xs, cdf);
        let crit = crate::stats::ks_critical(n, 0.01);
        assert!(d < crit, "KS {d} vs {crit}");
    }

    #[test]
    fn selection_rayleigh_pair_order_statistics() {
        // v = 0, two devices: CDF is (1 - e^{-g/mean})^2.
        let c = cfg(0.8, 0.0, 2, PowerScaling::ConstantTotal);
        let n = 100_000;
        let mut xs = sample_snr_selection(&c, &mut substream(4, 3, 0), n);
        xs.sort_by(f64::total_cmp);
        let cdf = |g: f64| (1.0 - (-g / 0.8f64).exp()).powi(2);
        let d = crate::stats::ks_statistic_sorted(&xs, cdf);
        assert!(d < crate::stats::ks_critical(n, 0.01));
        // Power scaling must NOT apply to selection: mean of the max of two
        // Rayleigh powers with mean 0.8 is 0.8 * 1.5.
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.2).abs() < 0.02, "selection mean {mean}");
    }
}
