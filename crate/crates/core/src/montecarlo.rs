//! Monte Carlo harness: drives the channel samplers at scale, builds
//! empirical CDFs with enough tail mass for delay-outage work, and searches
//! minimal device counts.
//!
//! Samples are produced in fixed logical blocks of [`rng::BLOCK_LEN`], one
//! substream per block, so a run is a pure function of `(seed, scenario,
//! config, n)`: distributing blocks over threads cannot change the output.

use crate::channel::{one_snr, ClusterConfig, Scenario};
use crate::metrics::{dor_threshold, ServiceSpec, SnrThreshold};
use crate::rng::{self, substream};
use crate::stats::binom_ci99_halfwidth;
use crate::{Error, Result};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sorted-sample storage cap: 1e8 samples (800 MB of f64). Runs beyond this
/// are refused outright; see the module docs in the repository for the
/// rationale.
pub const SORTED_SAMPLE_CAP: u64 = 100_000_000;

/// Quantile queries implying fewer than this many expected tail hits are
/// flagged low-confidence.
pub const TAIL_SUPPORT_MIN: f64 = 10.0;

/// Sorted Monte Carlo SNR samples with tail-aware queries.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
    seed: u64,
    fingerprint: [u8; 32],
}

/// A quantile estimate; `low_confidence` marks queries beyond the resolved
/// tail (`p` or `1 - p` below `TAIL_SUPPORT_MIN / n`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileEstimate {
    pub value: f64,
    pub low_confidence: bool,
}

impl EmpiricalCdf {
    fn from_sorted(sorted: Vec<f64>, seed: u64, fingerprint: [u8; 32]) -> Self {
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        Self { sorted, seed, fingerprint }
    }

    /// `F(gamma)` = fraction of samples `<= gamma`.
    pub fn eval(&self, gamma: f64) -> f64 {
        let k = self.sorted.partition_point(|&x| x <= gamma);
        k as f64 / self.sorted.len() as f64
    }

    /// Order-statistic quantile with a tail-support flag.
    pub fn quantile(&self, p: f64) -> Result<QuantileEstimate> {
        if !(0.0 < p && p < 1.0) {
            return Err(Error::Domain(format!("quantile needs p in (0,1), got {p}")));
        }
        let n = self.sorted.len();
        let idx = ((p * n as f64).floor() as usize).min(n - 1);
        let support = TAIL_SUPPORT_MIN / n as f64;
        Ok(QuantileEstimate {
            value: self.sorted[idx],
            low_confidence: p < support || 1.0 - p < support,
        })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fingerprint(&self) -> &[u8; 32] {
        &self.fingerprint
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Digest of the sample contents; equal digests mean bit-identical runs.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for x in &self.sorted {
            h.update(x.to_le_bytes());
        }
        h.finalize().into()
    }

    /// Serializes to the binary cache format: magic, version, fingerprint,
    /// seed, count, then little-endian f64 samples.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut buf =
            Vec::with_capacity(MAGIC.len() + 2 + 32 + 8 + 8 + 8 * self.sorted.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&self.fingerprint);
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.extend_from_slice(&(self.sorted.len() as u64).to_le_bytes());
        for x in &self.sorted {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        let tmp = path.with_extension("tmp");
        std::fs::File::create(&tmp)?.write_all(&buf)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Reads the binary cache format back, validating structure.
    pub fn read_from(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let header = MAGIC.len() + 2 + 32 + 8 + 8;
        if bytes.len() < header || &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::CacheFormat("bad magic or truncated header".into()));
        }
        let mut off = MAGIC.len();
        let version = u16::from_le_bytes(bytes[off..off + 2].try_into().unwrap());
        if version != VERSION {
            return Err(Error::CacheFormat(format!("unsupported version {version}")));
        }
        off += 2;
        let mut fingerprint = [0u8; 32];
        fingerprint.copy_from_slice(&bytes[off..off + 32]);
        off += 32;
        let seed = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        off += 8;
        let count = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        off += 8;
        if count > SORTED_SAMPLE_CAP {
            return Err(Error::CacheFormat(format!("sample count {count} over cap")));
        }
        if bytes.len() - off != 8 * count as usize {
            return Err(Error::CacheFormat(format!(
                "expected {count} samples, file holds {} bytes of data",
                bytes.len() - off
            )));
        }
        let mut sorted = Vec::with_capacity(count as usize);
        for chunk in bytes[off..].chunks_exact(8) {
            sorted.push(f64::from_le_bytes(chunk.try_into().unwrap()));
        }
        if sorted.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::CacheFormat("samples not sorted".into()));
        }
        Ok(Self { sorted, seed, fingerprint })
    }
}

const MAGIC: &[u8; 8] = b"CLNKECDF";
const VERSION: u16 = 1;

/// Canonical digest of everything that determines a run's output. Cache
/// lookups key on this.
pub fn fingerprint(cfg: &ClusterConfig, scenario: &Scenario, n: u64, seed: u64) -> [u8; 32] {
    let scen = match scenario {
        Scenario::Ckm(s) => format!("ckm;sigma_eps={:.17e}", s.sigma_eps),
        Scenario::Feedback(s) => {
            format!("feedback;bits={};pw={:.17e}", s.bits, s.word_error_prob)
        }
        Scenario::Selection => "selection".to_string(),
    };
    let text = format!(
        "v{VERSION};{scen};mean_snr={:.17e};rice={:.17e};active={};total={};scaling={:?};n={n};seed={seed};block={}",
        cfg.mean_snr,
        cfg.rice_factor,
        cfg.active_devices,
        cfg.total_devices,
        cfg.power_scaling,
        rng::BLOCK_LEN,
    );
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    h.finalize().into()
}

fn block_samples(
    cfg: &ClusterConfig,
    scenario: &Scenario,
    seed: u64,
    block: u64,
    len: usize,
) -> Vec<f64> {
    let mut rng = substream(seed, scenario.stream_tag(), block);
    (0..len).map(|_| one_snr(cfg, scenario, &mut rng)).collect()
}

fn block_lengths(n: u64) -> Vec<(u64, usize)> {
    let full = n / rng::BLOCK_LEN as u64;
    let rem = (n % rng::BLOCK_LEN as u64) as usize;
    let mut blocks: Vec<(u64, usize)> =
        (0..full).map(|b| (b, rng::BLOCK_LEN)).collect();
    if rem > 0 {
        blocks.push((full, rem));
    }
    blocks
}

fn finish(mut samples: Vec<f64>, cfg: &ClusterConfig, scenario: &Scenario, n: u64, seed: u64) -> EmpiricalCdf {
    samples.sort_unstable_by(f64::total_cmp);
    EmpiricalCdf::from_sorted(samples, seed, fingerprint(cfg, scenario, n, seed))
}

fn check_budget(n: u64) -> Result<()> {
    if n < 1 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    if n > SORTED_SAMPLE_CAP {
        return Err(Error::SampleBudget { requested: n, cap: SORTED_SAMPLE_CAP });
    }
    Ok(())
}

/// Runs `n` samples of the scenario. With the `parallel` feature the blocks
/// are generated on the rayon pool; the output is bit-identical to
/// [`run_serial`] either way.
pub fn run(cfg: &ClusterConfig, scenario: &Scenario, n: u64, seed: u64) -> Result<EmpiricalCdf> {
    check_budget(n)?;
    #[cfg(feature = "parallel")]
    let samples: Vec<f64> = {
        let blocks = block_lengths(n);
        let chunks: Vec<Vec<f64>> = blocks
            .par_iter()
            .map(|&(b, len)| block_samples(cfg, scenario, seed, b, len))
            .collect();
        let mut out = Vec::with_capacity(n as usize);
        for c in chunks {
            out.extend_from_slice(&c);
        }
        out
    };
    #[cfg(not(feature = "parallel"))]
    let samples: Vec<f64> = serial_samples(cfg, scenario, n, seed);
    Ok(finish(samples, cfg, scenario, n, seed))
}

fn serial_samples(cfg: &ClusterConfig, scenario: &Scenario, n: u64, seed: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize);
    for (b, len) in block_lengths(n) {
        out.extend_from_slice(&block_samples(cfg, scenario, seed, b, len));
    }
    out
}

/// Single-threaded reference path; always available for equivalence checks
/// and benchmarking against the parallel path.
pub fn run_serial(
    cfg: &ClusterConfig,
    scenario: &Scenario,
    n: u64,
    seed: u64,
) -> Result<EmpiricalCdf> {
    check_budget(n)?;
    Ok(finish(serial_samples(cfg, scenario, n, seed), cfg, scenario, n, seed))
}

/// Hard cap on the minimal-device-count search.
pub const DEVICE_SEARCH_CAP: u32 = 4096;

/// Result of a minimal-device-count search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinDevicesOutcome {
    /// Smallest device count whose estimated DOR met the target.
    pub devices: u32,
    /// Estimated DOR at that count.
    pub dor_estimate: f64,
    /// True when the target lies inside the estimate's 99% confidence
    /// interval, i.e. the crossing is not statistically resolved at this
    /// sample budget.
    pub uncertain: bool,
}

/// Smallest active-device count whose simulated DOR is at or below
/// `target_dor`, by exponential bracketing plus integer bisection. Every
/// probe draws `n` fresh samples from a seed derived from `(seed, count)`,
/// so the search is reproducible. A bracketing interval is resolved toward
/// the larger count.
pub fn min_devices(
    scenario: &Scenario,
    cfg_template: &ClusterConfig,
    svc: &ServiceSpec,
    target_dor: f64,
    n: u64,
    seed: u64,
) -> Result<MinDevicesOutcome> {
    if !(0.0 < target_dor) {
        return Err(Error::Domain(format!("target_dor must be > 0, got {target_dor}")));
    }
    if target_dor >= 1.0 {
        return Ok(MinDevicesOutcome { devices: 1, dor_estimate: 1.0, uncertain: false });
    }
    let threshold = match dor_threshold(svc.data_bits, svc.bandwidth_hz, svc.delay_threshold_s) {
        SnrThreshold::Finite(g) => g,
        // Threshold beyond range: DOR is 1 for every count, target < 1
        // unreachable.
        SnrThreshold::Saturated => return Err(Error::SearchInfeasible { cap: DEVICE_SEARCH_CAP }),
    };

    let estimate = |devices: u32| -> Result<f64> {
        let cfg = ClusterConfig {
            active_devices: devices,
            total_devices: cfg_template.total_devices.max(devices),
            ..*cfg_template
        };
        let probe_seed = rng::derive_seed(seed, devices as u64);
        let blocks = block_lengths(n);
        #[cfg(feature = "parallel")]
        let hits: u64 = blocks
            .par_iter()
            .map(|&(b, len)| {
                let mut rng = substream(probe_seed, scenario.stream_tag(), b);
                (0..len).filter(|_| one_snr(&cfg, scenario, &mut rng) < threshold).count() as u64
            })
            .sum();
        #[cfg(not(feature = "parallel"))]
        let hits: u64 = blocks
            .iter()
            .map(|&(b, len)| {
                let mut rng = substream(probe_seed, scenario.stream_tag(), b);
                (0..len).filter(|_| one_snr(&cfg, scenario, &mut rng) < threshold).count() as u64
            })
            .sum();
        Ok(hits as f64 / n as f64)
    };

    // Exponential bracketing.
    let mut lo = 0u32; // largest count known to miss the target
    let mut hi = 1u32;
    let mut dor_hi;
    loop {
        dor_hi = estimate(hi)?;
        if dor_hi <= target_dor {
            break;
        }
        lo = hi;
        if hi >= DEVICE_SEARCH_CAP {
            return Err(Error::SearchInfeasible { cap: DEVICE_SEARCH_CAP });
        }
        hi = (hi * 2).min(DEVICE_SEARCH_CAP);
    }
    // Integer bisection on (lo, hi]; ties fall to the larger count because
    // only a strict improvement moves the upper end down.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let d = estimate(mid)?;
        if d <= target_dor {
            hi = mid;
            dor_hi = d;
        } else {
            lo = mid;
        }
    }
    let ci = binom_ci99_halfwidth(dor_hi.max(1.0 / n as f64), n);
    Ok(MinDevicesOutcome {
        devices: hi,
        dor_estimate: dor_hi,
        uncertain: (dor_hi - target_dor).abs() <= ci,
    })
}
