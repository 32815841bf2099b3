//! Canned experiments: the seven standard figures.
//!
//! Shared conventions (also recorded in each figure's meta file):
//! * outage figures sweep the per-device mean SNR in dB with the rate
//!   threshold fixed at spectral efficiency 1 (threshold SNR 0 dB);
//! * delay figures sweep the delay threshold in seconds on a log grid, with
//!   100 bits over 200 kHz and mean SNR -15 dB;
//! * cluster power is held constant in total (per-device power scaled by
//!   1/devices) so curves isolate coherence gain, and the selection-
//!   diversity baseline uses the largest Rice factor plotted in its figure;
//! * the device-count figure plots the closed-form bound against a
//!   simulated minimal-count search at a 1e-4 delay outage target.

use crate::experiment::{
    CliError, CurveDef, Experiment, IoOptions, LineStyle, MetricKind, SweepAxis,
};
use crate::output;
use clusterlink::analytic_ckm::{bound_validity, required_devices};
use clusterlink::channel::{
    CkmSideInfo, ClusterConfig, FeedbackSideInfo, PowerScaling, Scenario,
};
use clusterlink::metrics::{dor_threshold, ServiceSpec, SnrThreshold};
use clusterlink::montecarlo::min_devices;
use std::io::Write;

pub const MEAN_SNR_DB: f64 = -15.0;
pub const BANDWIDTH_HZ: f64 = 2e5;
pub const DATA_BITS: f64 = 100.0;
pub const DEVICES: u32 = 20;
pub const SIGMA_EPS_DEG: f64 = 20.0;
pub const DOR_TARGET: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl FigureId {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fig3" => Some(FigureId::Fig3),
            "fig4" => Some(FigureId::Fig4),
            "fig5" => Some(FigureId::Fig5),
            "fig6" => Some(FigureId::Fig6),
            "fig7" => Some(FigureId::Fig7),
            "fig8" => Some(FigureId::Fig8),
            "fig9" => Some(FigureId::Fig9),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
        }
    }

    pub fn default_samples(&self) -> u64 {
        match self {
            // Tail work needs ~1e3 expected hits at the 1e-4 level.
            FigureId::Fig5 | FigureId::Fig9 => 10_000_000,
            _ => 1_000_000,
        }
    }
}

fn db(v: f64) -> f64 {
    10f64.powf(v / 10.0)
}

fn cluster(nu_db: f64, devices: u32) -> ClusterConfig {
    ClusterConfig::new(db(MEAN_SNR_DB), db(nu_db), devices, devices, PowerScaling::ConstantTotal)
        .unwrap()
}

fn ckm_curve(nu_db: f64, sigma_deg: f64, label: String, style: LineStyle) -> CurveDef {
    CurveDef {
        label,
        scenario: Scenario::Ckm(CkmSideInfo::new(sigma_deg.to_radians()).unwrap()),
        cfg: cluster(nu_db, DEVICES),
        style,
    }
}

fn feedback_curve(nu_db: f64, bits: u32, pw: f64, label: String) -> CurveDef {
    CurveDef {
        label,
        scenario: Scenario::Feedback(FeedbackSideInfo::new(bits, pw).unwrap()),
        cfg: cluster(nu_db, DEVICES),
        style: LineStyle::Dashed,
    }
}

fn selection_curve(nu_db: f64) -> CurveDef {
    CurveDef {
        label: format!("selection nu {nu_db} dB"),
        scenario: Scenario::Selection,
        cfg: cluster(nu_db, DEVICES),
        style: LineStyle::Dotted,
    }
}

fn snr_sweep() -> Vec<f64> {
    (0..=60).map(|i| -30.0 + 0.5 * i as f64).collect()
}

fn log_sweep(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn outage_service() -> ServiceSpec {
    // min_rate = bandwidth: spectral efficiency 1, threshold SNR 0 dB.
    ServiceSpec::new(DATA_BITS, BANDWIDTH_HZ, 1e-3, BANDWIDTH_HZ).unwrap()
}

fn dor_service() -> ServiceSpec {
    ServiceSpec::new(DATA_BITS, BANDWIDTH_HZ, 1e-3, BANDWIDTH_HZ).unwrap()
}

/// Experiment definition for every figure except the device-count one,
/// which has its own runner.
pub fn figure_experiment(id: FigureId, samples: u64, seed: u64) -> Option<Experiment> {
    match id {
        FigureId::Fig3 => {
            let mut curves: Vec<CurveDef> = [-6.0, -3.0, 0.0, 3.0, 6.0, 9.0]
                .iter()
                .map(|&nu| {
                    ckm_curve(nu, SIGMA_EPS_DEG, format!("nu {nu} dB"), LineStyle::Solid)
                })
                .collect();
            curves.push(CurveDef {
                label: "rayleigh".into(),
                scenario: Scenario::Ckm(
                    CkmSideInfo::new(SIGMA_EPS_DEG.to_radians()).unwrap(),
                ),
                cfg: ClusterConfig::new(
                    db(MEAN_SNR_DB),
                    0.0,
                    DEVICES,
                    DEVICES,
                    PowerScaling::ConstantTotal,
                )
                .unwrap(),
                style: LineStyle::Dashed,
            });
            curves.push(selection_curve(9.0));
            Some(Experiment {
                name: "fig3".into(),
                axis: SweepAxis::MeanSnrDb,
                sweep: snr_sweep(),
                curves,
                metric: MetricKind::Outage,
                svc: outage_service(),
                samples,
                seed,
                sim_stride: 4,
                log_y: false,
            })
        }
        FigureId::Fig4 => {
            let curves = [1.0, 10.0, 20.0, 30.0]
                .iter()
                .map(|&s| ckm_curve(6.0, s, format!("sigma {s} deg"), LineStyle::Solid))
                .collect();
            Some(Experiment {
                name: "fig4".into(),
                axis: SweepAxis::MeanSnrDb,
                sweep: snr_sweep(),
                curves,
                metric: MetricKind::Outage,
                svc: outage_service(),
                samples,
                seed,
                sim_stride: 4,
                log_y: false,
            })
        }
        FigureId::Fig5 => {
            let curves = [0.0, 3.0, 6.0, 9.0]
                .iter()
                .map(|&nu| {
                    ckm_curve(nu, SIGMA_EPS_DEG, format!("nu {nu} dB"), LineStyle::Solid)
                })
                .collect();
            Some(Experiment {
                name: "fig5".into(),
                axis: SweepAxis::DelayThresholdS,
                sweep: log_sweep(4e-4, 2e-2, 41),
                curves,
                metric: MetricKind::Dor,
                svc: dor_service(),
                samples,
                seed,
                sim_stride: 1,
                log_y: true,
            })
        }
        FigureId::Fig6 => None,
        FigureId::Fig7 => {
            let mut curves = Vec::new();
            for &bits in &[1u32, 2] {
                for &nu in &[-3.0, 9.0] {
                    curves.push(feedback_curve(
                        nu,
                        bits,
                        0.05,
                        format!("N{bits} nu {nu} dB"),
                    ));
                }
            }
            curves.push(selection_curve(9.0));
            Some(Experiment {
                name: "fig7".into(),
                axis: SweepAxis::MeanSnrDb,
                sweep: snr_sweep(),
                curves,
                metric: MetricKind::Outage,
                svc: outage_service(),
                samples,
                seed,
                sim_stride: 4,
                log_y: false,
            })
        }
        FigureId::Fig8 => {
            let curves = [0.01, 0.05, 0.10, 0.20]
                .iter()
                .map(|&pw| feedback_curve(6.0, 2, pw, format!("pw {pw}")))
                .collect();
            Some(Experiment {
                name: "fig8".into(),
                axis: SweepAxis::MeanSnrDb,
                sweep: snr_sweep(),
                curves,
                metric: MetricKind::Outage,
                svc: outage_service(),
                samples,
                seed,
                sim_stride: 4,
                log_y: false,
            })
        }
        FigureId::Fig9 => {
            let curves = [0.01, 0.05, 0.10, 0.20]
                .iter()
                .map(|&pw| feedback_curve(0.0, 2, pw, format!("pw {pw}")))
                .collect();
            Some(Experiment {
                name: "fig9".into(),
                axis: SweepAxis::DelayThresholdS,
                sweep: log_sweep(4e-4, 5e-2, 41),
                curves,
                metric: MetricKind::Dor,
                svc: dor_service(),
                samples,
                seed,
                sim_stride: 1,
                log_y: true,
            })
        }
    }
}

pub fn run_figure(id: FigureId, samples: u64, seed: u64, io: &IoOptions) -> Result<(), CliError> {
    std::fs::create_dir_all(&io.out_dir)?;
    if id == FigureId::Fig6 {
        return run_fig6(samples, seed, io);
    }
    let exp = figure_experiment(id, samples, seed).expect("non-fig6 ids have experiments");
    let table = crate::experiment::run_experiment(&exp, io)?;
    output::write_csv(&io.out_dir.join(format!("{}.csv", exp.name)), &exp, &table)?;
    output::write_svg(&io.out_dir.join(format!("{}.svg", exp.name)), &exp, &table)?;
    let notes = vec![
        "outage figures sweep per-device mean SNR (dB) at spectral efficiency 1".into(),
        "cluster power constant in total; selection baseline never power-scales".into(),
        "selection baseline uses the largest Rice factor in the figure".into(),
    ];
    output::write_meta(&io.out_dir.join(format!("{}.meta.txt", exp.name)), &exp, &notes)?;
    Ok(())
}

/// Required-device-count figure: closed-form bound (solid) vs simulated
/// minimal counts (dashed) over a delay-threshold sweep.
fn run_fig6(samples: u64, seed: u64, io: &IoOptions) -> Result<(), CliError> {
    let nus_db = [0.0, 3.0, 6.0];
    let sweep = log_sweep(3e-4, 5e-3, 9);
    let sigma = SIGMA_EPS_DEG.to_radians();
    let side = CkmSideInfo::new(sigma).unwrap();

    let mut w = csv::Writer::from_path(io.out_dir.join("fig6.csv"))?;
    let mut header = vec!["delay_threshold_s".to_string()];
    for nu in nus_db {
        header.push(format!("analytic_nu_{nu}_db"));
        header.push(format!("sim_nu_{nu}_db"));
        header.push(format!("ci_nu_{nu}_db"));
        header.push(format!("valid_nu_{nu}_db"));
    }
    w.write_record(&header)?;

    let mut rows: Vec<(f64, Vec<(Option<u32>, Option<u32>, Option<f64>, bool)>)> = Vec::new();
    for &t_th in &sweep {
        let svc = ServiceSpec::new(DATA_BITS, BANDWIDTH_HZ, t_th, BANDWIDTH_HZ)
            .map_err(CliError::from)?;
        let gamma_req = match dor_threshold(DATA_BITS, BANDWIDTH_HZ, t_th) {
            SnrThreshold::Finite(g) => g,
            SnrThreshold::Saturated => {
                rows.push((t_th, nus_db.iter().map(|_| (None, None, None, false)).collect()));
                continue;
            }
        };
        let mut cells = Vec::new();
        for &nu_db_val in &nus_db {
            let nu = db(nu_db_val);
            let bound = required_devices(
                DOR_TARGET,
                gamma_req,
                nu,
                db(MEAN_SNR_DB),
                sigma,
                PowerScaling::ConstantTotal,
            )
            .ok();
            let valid = bound
                .map(|d| bound_validity(&svc, &cluster(nu_db_val, d), &side))
                .unwrap_or(false);
            let sim = if io.analytic_only {
                None
            } else {
                let template = cluster(nu_db_val, 1);
                min_devices(
                    &Scenario::Ckm(side),
                    &template,
                    &svc,
                    DOR_TARGET,
                    samples,
                    seed,
                )
                .ok()
            };
            let (sim_count, sim_ci) = match sim {
                Some(o) => (Some(o.devices), Some(if o.uncertain { 1.0 } else { 0.0 })),
                None => (None, None),
            };
            cells.push((bound, sim_count, sim_ci, valid));
        }
        rows.push((t_th, cells));
    }

    for (t_th, cells) in &rows {
        let mut row = vec![output::format_cell(Some(*t_th))];
        for (bound, sim, ci, valid) in cells {
            row.push(bound.map(|d| d.to_string()).unwrap_or_default());
            row.push(sim.map(|d| d.to_string()).unwrap_or_default());
            row.push(ci.map(|c| format!("{c:.0}")).unwrap_or_default());
            row.push(if *valid { "1".into() } else { "0".into() });
        }
        w.write_record(&row)?;
    }
    w.flush()?;

    // Plot: bounds as solid lines, simulated counts as dashed.
    let mut s = String::new();
    s.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"600\" \
         viewBox=\"0 0 900 600\" font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect width=\"900\" height=\"600\" fill=\"white\"/>\n\
         <rect x=\"80\" y=\"40\" width=\"640\" height=\"500\" fill=\"none\" stroke=\"#333\"/>\n",
    );
    let max_count = rows
        .iter()
        .flat_map(|(_, cells)| cells.iter())
        .flat_map(|(b, s, _, _)| [b.unwrap_or(0), s.unwrap_or(0)])
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let (t0, t1) = (sweep[0].ln(), sweep[sweep.len() - 1].ln());
    let px = |t: f64| 80.0 + (t.ln() - t0) / (t1 - t0) * 640.0;
    let py = |c: f64| 540.0 - c / max_count * 500.0;
    let colors = ["#1f77b4", "#d62728", "#2ca02c"];
    for (ni, &nu) in nus_db.iter().enumerate() {
        for (dashed, pick) in [(false, 0usize), (true, 1usize)] {
            let mut d = String::new();
            let mut pen = false;
            for (t, cells) in &rows {
                let v = if pick == 0 { cells[ni].0 } else { cells[ni].1 };
                match v {
                    Some(c) => {
                        d.push_str(&format!(
                            "{}{:.2} {:.2} ",
                            if pen { 'L' } else { 'M' },
                            px(*t),
                            py(c as f64)
                        ));
                        pen = true;
                    }
                    None => pen = false,
                }
            }
            if !d.is_empty() {
                s.push_str(&format!(
                    "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"{}/>\n",
                    d.trim_end(),
                    colors[ni],
                    if dashed { " stroke-dasharray=\"8,5\"" } else { "" }
                ));
            }
        }
        let ly = 52.0 + 18.0 * ni as f64;
        s.push_str(&format!(
            "<line x1=\"730\" y1=\"{ly}\" x2=\"760\" y2=\"{ly}\" stroke=\"{}\" stroke-width=\"1.8\"/>\n",
            colors[ni]
        ));
        s.push_str(&format!(
            "<text x=\"766\" y=\"{}\">nu {nu} dB (solid bound, dashed sim)</text>\n",
            ly + 4.0
        ));
    }
    s.push_str(
        "<text x=\"400\" y=\"585\" text-anchor=\"middle\">delay_threshold_s (log)</text>\n\
         <text x=\"18\" y=\"290\" text-anchor=\"middle\" transform=\"rotate(-90 18 290)\">required devices</text>\n\
         <text x=\"450\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">fig6</text>\n</svg>\n",
    );
    std::fs::write(io.out_dir.join("fig6.svg"), s)?;

    let mut meta = std::fs::File::create(io.out_dir.join("fig6.meta.txt"))?;
    writeln!(meta, "experiment = fig6")?;
    writeln!(meta, "axis = delay_threshold_s")?;
    writeln!(meta, "metric = required device count at dor target {DOR_TARGET}")?;
    writeln!(meta, "samples = {samples}")?;
    writeln!(meta, "seed = {seed}")?;
    writeln!(meta, "sigma_eps_deg = {SIGMA_EPS_DEG}")?;
    writeln!(meta, "power_scaling = constant-total")?;
    writeln!(meta, "note = x axis is the delay threshold; bound from the closed form, sim from bracketed bisection")?;
    writeln!(meta, "note = ci column flags statistically unresolved searches (1 = uncertain)")?;
    Ok(())
}
