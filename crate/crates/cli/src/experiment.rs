//! The sweep engine shared by canned figures and config-file sweeps.
//!
//! An [`Experiment`] is a set of curves (scenario + cluster configuration),
//! one sweep axis, and a metric. For every sweep value each curve yields an
//! analytic value, and — where simulation is enabled — an empirical value
//! from a cached or freshly generated Monte Carlo run plus a binomial 99%
//! confidence half-width.
//!
//! Simulated SNR distributions depend on the sweep value except along the
//! delay axis, where a single empirical CDF per curve serves every point.

use clusterlink::analytic_ckm::build_dist;
use clusterlink::analytic_feedback::FeedbackCdf;
use clusterlink::channel::{ClusterConfig, Scenario};
use clusterlink::metrics::{
    dor, outage_probability, outage_threshold, dor_threshold, SelectionDiversityCdf, ServiceSpec,
    SnrCdf, SnrThreshold,
};
use clusterlink::montecarlo::{fingerprint, run, EmpiricalCdf};
use clusterlink::rng::derive_seed;
use clusterlink::specfun::Tolerance;
use clusterlink::stats::binom_ci99_halfwidth;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// CDF at the rate threshold `2^(R_min/W) - 1`.
    Outage,
    /// CDF at the delay threshold `2^(D/(W T_th)) - 1`.
    Dor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    MeanSnrDb,
    DelayThresholdS,
    RiceFactorDb,
    SigmaEpsDeg,
    WordErrorProb,
    DeviceCount,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::MeanSnrDb => "mean_snr_db",
            SweepAxis::DelayThresholdS => "delay_threshold_s",
            SweepAxis::RiceFactorDb => "rice_factor_db",
            SweepAxis::SigmaEpsDeg => "sigma_eps_deg",
            SweepAxis::WordErrorProb => "word_error_prob",
            SweepAxis::DeviceCount => "device_count",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineStyle {
    Solid,
    Dashed,
    Dotted,
}

#[derive(Debug, Clone)]
pub struct CurveDef {
    pub label: String,
    pub scenario: Scenario,
    pub cfg: ClusterConfig,
    pub style: LineStyle,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub axis: SweepAxis,
    pub sweep: Vec<f64>,
    pub curves: Vec<CurveDef>,
    pub metric: MetricKind,
    pub svc: ServiceSpec,
    pub samples: u64,
    pub seed: u64,
    /// Simulate every k-th sweep point (ticks); 1 simulates everywhere.
    pub sim_stride: usize,
    pub log_y: bool,
}

pub struct IoOptions {
    pub out_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub analytic_only: bool,
}

/// One curve's values at one sweep point.
#[derive(Debug, Clone, Copy, Default)]
pub struct CurvePoint {
    pub analytic: Option<f64>,
    pub simulated: Option<f64>,
    pub ci_halfwidth: Option<f64>,
}

/// Everything a CSV/plot needs.
pub struct ExperimentTable {
    pub sweep: Vec<f64>,
    pub points: Vec<Vec<CurvePoint>>, // indexed [sweep][curve]
}

#[derive(Debug)]
pub enum CliError {
    Config(crate::config::ConfigError),
    Numeric(clusterlink::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Numeric(e) => write!(f, "numeric failure: {e}"),
            CliError::Io(e) => write!(f, "i/o failure: {e}"),
        }
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<clusterlink::Error> for CliError {
    fn from(e: clusterlink::Error) -> Self {
        match e {
            clusterlink::Error::Io(io) => CliError::Io(io),
            other => CliError::Numeric(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Applies a sweep value to a curve, yielding the concrete configuration to
/// evaluate at that point.
pub fn resolve_point(
    curve: &CurveDef,
    axis: SweepAxis,
    value: f64,
    svc: &ServiceSpec,
) -> (ClusterConfig, Scenario, ServiceSpec) {
    let mut cfg = curve.cfg;
    let mut scenario = curve.scenario;
    let mut svc = *svc;
    match axis {
        SweepAxis::MeanSnrDb => cfg.mean_snr = 10f64.powf(value / 10.0),
        SweepAxis::DelayThresholdS => svc.delay_threshold_s = value,
        SweepAxis::RiceFactorDb => cfg.rice_factor = 10f64.powf(value / 10.0),
        SweepAxis::SigmaEpsDeg => {
            if let Scenario::Ckm(ref mut side) = scenario {
                side.sigma_eps = value.to_radians();
            }
        }
        SweepAxis::WordErrorProb => {
            if let Scenario::Feedback(ref mut side) = scenario {
                side.word_error_prob = value;
            }
        }
        SweepAxis::DeviceCount => {
            let d = value.round().max(1.0) as u32;
            cfg.active_devices = d;
            cfg.total_devices = cfg.total_devices.max(d);
        }
    }
    (cfg, scenario, svc)
}

/// Analytic metric value for one resolved point.
pub fn analytic_value(
    cfg: &ClusterConfig,
    scenario: &Scenario,
    svc: &ServiceSpec,
    metric: MetricKind,
) -> clusterlink::Result<f64> {
    let tol = Tolerance::default();
    let cdf: Box<dyn SnrCdf> = match scenario {
        Scenario::Ckm(side) => Box::new(build_dist(cfg, side)),
        Scenario::Feedback(side) => Box::new(FeedbackCdf::new(cfg, side, tol)?),
        Scenario::Selection => Box::new(SelectionDiversityCdf {
            mean_snr: cfg.mean_snr,
            rice_factor: cfg.rice_factor,
            devices: cfg.active_devices,
        }),
    };
    match metric {
        MetricKind::Outage => outage_probability(cdf.as_ref(), svc.min_rate_bps, svc.bandwidth_hz),
        MetricKind::Dor => dor(cdf.as_ref(), svc),
    }
}

fn metric_threshold(svc: &ServiceSpec, metric: MetricKind) -> SnrThreshold {
    match metric {
        MetricKind::Outage => outage_threshold(svc.min_rate_bps, svc.bandwidth_hz),
        MetricKind::Dor => dor_threshold(svc.data_bits, svc.bandwidth_hz, svc.delay_threshold_s),
    }
}

fn cache_path(dir: &Path, fp: &[u8; 32]) -> PathBuf {
    let hex: String = fp.iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("{hex}.ecdf"))
}

/// Cached or fresh empirical CDF; `None` when simulation is disabled and the
/// cache misses.
pub fn ecdf_for(
    cfg: &ClusterConfig,
    scenario: &Scenario,
    n: u64,
    seed: u64,
    io: &IoOptions,
) -> Result<Option<EmpiricalCdf>, CliError> {
    let fp = fingerprint(cfg, scenario, n, seed);
    let path = cache_path(&io.cache_dir, &fp);
    if path.exists() {
        match EmpiricalCdf::read_from(&path) {
            Ok(e) if e.fingerprint() == &fp && e.len() as u64 == n => return Ok(Some(e)),
            // A stale or damaged entry is regenerated below.
            _ => {}
        }
    }
    if io.analytic_only {
        return Ok(None);
    }
    let e = run(cfg, scenario, n, seed)?;
    std::fs::create_dir_all(&io.cache_dir)?;
    e.write_to(&path)?;
    Ok(Some(e))
}

fn simulated_value(ecdf: &EmpiricalCdf, svc: &ServiceSpec, metric: MetricKind) -> (f64, f64) {
    let p = match metric_threshold(svc, metric) {
        SnrThreshold::Finite(g) => ecdf.eval(g),
        SnrThreshold::Saturated => 1.0,
    };
    (p, binom_ci99_halfwidth(p, ecdf.len() as u64))
}

/// Runs all curves over the sweep.
pub fn run_experiment(exp: &Experiment, io: &IoOptions) -> Result<ExperimentTable, CliError> {
    let mut points = vec![vec![CurvePoint::default(); exp.curves.len()]; exp.sweep.len()];

    for (ci, curve) in exp.curves.iter().enumerate() {
        // Along the delay axis the SNR law never changes: one run per curve.
        let shared_ecdf = if exp.axis == SweepAxis::DelayThresholdS {
            let (cfg, scenario, _) = resolve_point(curve, exp.axis, exp.sweep[0], &exp.svc);
            ecdf_for(&cfg, &scenario, exp.samples, derive_seed(exp.seed, 0), io)?
        } else {
            None
        };

        for (si, &v) in exp.sweep.iter().enumerate() {
            let (cfg, scenario, svc) = resolve_point(curve, exp.axis, v, &exp.svc);
            let analytic = analytic_value(&cfg, &scenario, &svc, exp.metric)?;
            let mut point = CurvePoint { analytic: Some(analytic), ..Default::default() };

            let simulate_here = exp.axis == SweepAxis::DelayThresholdS || si % exp.sim_stride == 0;
            if simulate_here {
                let ecdf = match &shared_ecdf {
                    Some(e) => Some(e.clone()),
                    None if exp.axis == SweepAxis::DelayThresholdS => None,
                    None => ecdf_for(&cfg, &scenario, exp.samples, derive_seed(exp.seed, 0), io)?,
                };
                if let Some(e) = ecdf {
                    let (p, ci_hw) = simulated_value(&e, &svc, exp.metric);
                    point.simulated = Some(p);
                    point.ci_halfwidth = Some(ci_hw);
                }
            }
            points[si][ci] = point;
        }
    }
    Ok(ExperimentTable { sweep: exp.sweep.clone(), points })
}
