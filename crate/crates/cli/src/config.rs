//! Sweep configuration files.
//!
//! Flat TOML with a single nested `[sweep]` table. Angles are degrees and
//! power ratios are dB at this boundary; conversion to the library's linear
//! radian units happens exactly once, here.

use crate::experiment::{CurveDef, Experiment, LineStyle, MetricKind, SweepAxis};
use clusterlink::channel::{
    CkmSideInfo, ClusterConfig, FeedbackSideInfo, PowerScaling, Scenario,
};
use clusterlink::metrics::ServiceSpec;
use serde::Deserialize;
use std::path::Path;

/// A configuration problem; the message names the offending key and the
/// violated constraint.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(key: &str, constraint: &str) -> ConfigError {
    ConfigError(format!("{key}: {constraint}"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// "ckm" | "feedback" | "selection"
    pub scenario: String,
    /// "outage" | "dor"
    pub metric: String,
    pub mean_snr_db: f64,
    pub rice_factor_db: f64,
    /// Required for the ckm scenario.
    pub sigma_eps_deg: Option<f64>,
    /// Required for the feedback scenario.
    pub bits: Option<u32>,
    pub word_error_prob: Option<f64>,
    pub devices: u32,
    /// "constant-total" | "constant-per-device"
    pub power_scaling: String,
    pub data_bits: Option<f64>,
    pub bandwidth_hz: f64,
    pub delay_threshold_s: Option<f64>,
    /// Defaults to `bandwidth_hz` (spectral efficiency 1).
    pub min_rate_bps: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub label: Option<String>,
    pub sweep: SweepBlock,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub axis: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("parse failure: {e}")))
    }

    pub fn into_experiment(self) -> Result<Experiment, ConfigError> {
        let axis = match self.sweep.axis.as_str() {
            "mean_snr_db" => SweepAxis::MeanSnrDb,
            "delay_threshold_s" => SweepAxis::DelayThresholdS,
            "rice_factor_db" => SweepAxis::RiceFactorDb,
            "sigma_eps_deg" => SweepAxis::SigmaEpsDeg,
            "word_error_prob" => SweepAxis::WordErrorProb,
            "device_count" => SweepAxis::DeviceCount,
            other => {
                return Err(bad(
                    "sweep.axis",
                    &format!(
                        "unknown axis {other:?}; expected one of mean_snr_db, \
                         delay_threshold_s, rice_factor_db, sigma_eps_deg, \
                         word_error_prob, device_count"
                    ),
                ))
            }
        };
        if !(self.sweep.step > 0.0) {
            return Err(bad("sweep.step", "must be > 0"));
        }
        if self.sweep.stop < self.sweep.start {
            return Err(bad("sweep.stop", "must be >= sweep.start"));
        }
        let n_points =
            ((self.sweep.stop - self.sweep.start) / self.sweep.step + 1e-9).floor() as usize + 1;
        if n_points < 1 {
            return Err(bad("sweep", "range is empty"));
        }
        let sweep: Vec<f64> =
            (0..n_points).map(|i| self.sweep.start + i as f64 * self.sweep.step).collect();

        let metric = match self.metric.as_str() {
            "outage" => MetricKind::Outage,
            "dor" => MetricKind::Dor,
            other => return Err(bad("metric", &format!("unknown metric {other:?}"))),
        };
        let scaling = match self.power_scaling.as_str() {
            "constant-total" => PowerScaling::ConstantTotal,
            "constant-per-device" => PowerScaling::ConstantPerDevice,
            other => {
                return Err(bad(
                    "power_scaling",
                    &format!("unknown mode {other:?}; expected constant-total or constant-per-device"),
                ))
            }
        };
        if self.devices < 1 {
            return Err(bad("devices", "must be >= 1"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(bad("bandwidth_hz", "must be > 0"));
        }

        let scenario = match self.scenario.as_str() {
            "ckm" => {
                let deg = self
                    .sigma_eps_deg
                    .ok_or_else(|| bad("sigma_eps_deg", "required for the ckm scenario"))?;
                if !(deg >= 0.0) {
                    return Err(bad("sigma_eps_deg", "must be >= 0"));
                }
                Scenario::Ckm(
                    CkmSideInfo::new(deg.to_radians())
                        .map_err(|e| bad("sigma_eps_deg", &e.to_string()))?,
                )
            }
            "feedback" => {
                let bits =
                    self.bits.ok_or_else(|| bad("bits", "required for the feedback scenario"))?;
                let pw = self
                    .word_error_prob
                    .ok_or_else(|| bad("word_error_prob", "required for the feedback scenario"))?;
                Scenario::Feedback(
                    FeedbackSideInfo::new(bits, pw)
                        .map_err(|e| bad("bits/word_error_prob", &e.to_string()))?,
                )
            }
            "selection" => Scenario::Selection,
            other => return Err(bad("scenario", &format!("unknown scenario {other:?}"))),
        };

        match (axis, &scenario) {
            (SweepAxis::SigmaEpsDeg, Scenario::Ckm(_)) => {}
            (SweepAxis::SigmaEpsDeg, _) => {
                return Err(bad("sweep.axis", "sigma_eps_deg sweeps require scenario = \"ckm\""))
            }
            (SweepAxis::WordErrorProb, Scenario::Feedback(_)) => {}
            (SweepAxis::WordErrorProb, _) => {
                return Err(bad(
                    "sweep.axis",
                    "word_error_prob sweeps require scenario = \"feedback\"",
                ))
            }
            _ => {}
        }

        let mean_snr = 10f64.powf(self.mean_snr_db / 10.0);
        let rice = 10f64.powf(self.rice_factor_db / 10.0);
        let cfg = ClusterConfig::new(mean_snr, rice, self.devices, self.devices, scaling)
            .map_err(|e| bad("devices/mean_snr_db/rice_factor_db", &e.to_string()))?;

        let delay = self.delay_threshold_s.unwrap_or(1e-3);
        if matches!(metric, MetricKind::Dor) && !(delay > 0.0) {
            return Err(bad("delay_threshold_s", "must be > 0"));
        }
        let data_bits = self.data_bits.unwrap_or(100.0);
        if matches!(metric, MetricKind::Dor) && !(data_bits >= 0.0) {
            return Err(bad("data_bits", "must be >= 0"));
        }
        let min_rate = self.min_rate_bps.unwrap_or(self.bandwidth_hz);
        let svc = ServiceSpec::new(data_bits, self.bandwidth_hz, delay, min_rate)
            .map_err(|e| bad("data_bits/bandwidth_hz/delay_threshold_s/min_rate_bps", &e.to_string()))?;

        let label = self.label.unwrap_or_else(|| "curve".to_string());
        Ok(Experiment {
            name: "sweep".to_string(),
            axis,
            sweep,
            curves: vec![CurveDef { label, scenario, cfg, style: LineStyle::Solid }],
            metric,
            svc,
            samples: self.samples.unwrap_or(1_000_000),
            seed: self.seed.unwrap_or(1),
            sim_stride: 1,
            log_y: matches!(metric, MetricKind::Dor),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> String {
        r#"
scenario = "ckm"
metric = "outage"
mean_snr_db = -15.0
rice_factor_db = 6.0
sigma_eps_deg = 20.0
devices = 20
power_scaling = "constant-total"
bandwidth_hz = 200000.0

[sweep]
axis = "mean_snr_db"
start = -20.0
stop = -10.0
step = 1.0
"#
        .to_string()
    }

    #[test]
    fn minimal_config_parses() {
        let cfg: SweepConfig = toml::from_str(&minimal()).unwrap();
        let exp = cfg.into_experiment().unwrap();
        assert_eq!(exp.sweep.len(), 11);
        assert_eq!(exp.curves.len(), 1);
    }

    #[test]
    fn bad_axis_is_named() {
        let text = minimal().replace("mean_snr_db\"", "sideways\"");
        let cfg: SweepConfig = toml::from_str(&text).unwrap();
        let err = cfg.into_experiment().unwrap_err();
        assert!(err.0.contains("sweep.axis"), "{}", err.0);
    }

    #[test]
    fn bad_step_is_named() {
        let text = minimal().replace("step = 1.0", "step = -1.0");
        let cfg: SweepConfig = toml::from_str(&text).unwrap();
        let err = cfg.into_experiment().unwrap_err();
        assert!(err.0.contains("sweep.step"), "{}", err.0);
    }

    #[test]
    fn missing_scenario_field_is_named() {
        let text = minimal().replace("sigma_eps_deg = 20.0\n", "");
        let cfg: SweepConfig = toml::from_str(&text).unwrap();
        let err = cfg.into_experiment().unwrap_err();
        assert!(err.0.contains("sigma_eps_deg"), "{}", err.0);
    }

    #[test]
    fn axis_scenario_mismatch_rejected() {
        let text = minimal().replace("axis = \"mean_snr_db\"", "axis = \"word_error_prob\"");
        let cfg: SweepConfig = toml::from_str(&text).unwrap();
        assert!(cfg.into_experiment().is_err());
    }
}
