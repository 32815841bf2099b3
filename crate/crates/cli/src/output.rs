//! CSV, SVG and metadata emission.
//!
//! CSVs are the contract: header row, UTF-8, `.` decimal separator, fixed
//! scientific notation so reruns are byte-identical. The SVG plots are
//! self-contained conveniences written directly, no plotting runtime.

use crate::experiment::{Experiment, ExperimentTable, LineStyle, MetricKind};
use std::io::Write;
use std::path::Path;

/// Shortest exact representation: deterministic across runs and lossless
/// under parse, so CSV values can be fed back in as inputs.
pub fn format_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:e}"),
        None => String::new(),
    }
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

/// Standard sweep CSV: sweep value, then per curve an analytic column, a
/// simulated column and a confidence half-width column.
pub fn write_csv(
    path: &Path,
    exp: &Experiment,
    table: &ExperimentTable,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![exp.axis.name().to_string()];
    for c in &exp.curves {
        let s = sanitize(&c.label);
        header.push(format!("analytic_{s}"));
        header.push(format!("sim_{s}"));
        header.push(format!("ci_{s}"));
    }
    w.write_record(&header)?;
    for (si, &v) in table.sweep.iter().enumerate() {
        let mut row = vec![format_cell(Some(v))];
        for p in &table.points[si] {
            row.push(format_cell(p.analytic));
            row.push(format_cell(p.simulated));
            row.push(format_cell(p.ci_halfwidth));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Deterministic run description alongside each figure.
pub fn write_meta(path: &Path, exp: &Experiment, notes: &[String]) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "experiment = {}", exp.name)?;
    writeln!(f, "axis = {}", exp.axis.name())?;
    writeln!(
        f,
        "metric = {}",
        match exp.metric {
            MetricKind::Outage => "outage",
            MetricKind::Dor => "dor",
        }
    )?;
    writeln!(f, "samples = {}", exp.samples)?;
    writeln!(f, "seed = {}", exp.seed)?;
    writeln!(f, "sim_stride = {}", exp.sim_stride)?;
    writeln!(
        f,
        "service = data_bits {} / bandwidth_hz {} / delay_threshold_s {} / min_rate_bps {}",
        exp.svc.data_bits, exp.svc.bandwidth_hz, exp.svc.delay_threshold_s, exp.svc.min_rate_bps
    )?;
    for c in &exp.curves {
        writeln!(f, "curve {} = scenario {:?} cfg {:?}", sanitize(&c.label), c.scenario, c.cfg)?;
    }
    for n in notes {
        writeln!(f, "note = {n}")?;
    }
    Ok(())
}

const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    log_y: bool,
}

const W: f64 = 900.0;
const H: f64 = 600.0;
const ML: f64 = 80.0; // margins
const MR: f64 = 180.0;
const MT: f64 = 40.0;
const MB: f64 = 60.0;

impl Frame {
    fn px(&self, x: f64) -> f64 {
        ML + (x - self.x0) / (self.x1 - self.x0) * (W - ML - MR)
    }

    fn py(&self, y: f64) -> f64 {
        let (a, b, v) = if self.log_y {
            (self.y0.log10(), self.y1.log10(), y.log10())
        } else {
            (self.y0, self.y1, y)
        };
        H - MB - (v - a) / (b - a) * (H - MT - MB)
    }
}

/// Line plot of the experiment: solid/dashed/dotted analytic curves plus
/// circular markers for simulated values.
pub fn write_svg(path: &Path, exp: &Experiment, table: &ExperimentTable) -> std::io::Result<()> {
    let mut ys: Vec<f64> = Vec::new();
    for row in &table.points {
        for p in row {
            for v in [p.analytic, p.simulated].into_iter().flatten() {
                if !exp.log_y || v > 0.0 {
                    ys.push(v);
                }
            }
        }
    }
    let (y0, y1) = if ys.is_empty() {
        (1e-6, 1.0)
    } else {
        let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().cloned().fold(0.0f64, f64::max);
        if exp.log_y {
            (lo.max(1e-8) * 0.8, (hi * 1.25).max(1e-7))
        } else {
            (0.0, (hi * 1.05).max(1e-12))
        }
    };
    let frame = Frame {
        x0: *table.sweep.first().unwrap(),
        x1: *table.sweep.last().unwrap(),
        y0,
        y1,
        log_y: exp.log_y,
    };

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    s.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    s.push_str(&format!(
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n",
        W - ML - MR,
        H - MT - MB
    ));

    // Axis ticks.
    for i in 0..=6 {
        let x = frame.x0 + (frame.x1 - frame.x0) * i as f64 / 6.0;
        let px = frame.px(x);
        s.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"#333\"/>\n",
            H - MB,
            H - MB + 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{}\" text-anchor=\"middle\">{x:.3}</text>\n",
            H - MB + 20.0
        ));
    }
    let y_ticks: Vec<f64> = if exp.log_y {
        let lo = frame.y0.log10().ceil() as i32;
        let hi = frame.y1.log10().floor() as i32;
        (lo..=hi).map(|e| 10f64.powi(e)).collect()
    } else {
        (0..=5).map(|i| frame.y0 + (frame.y1 - frame.y0) * i as f64 / 5.0).collect()
    };
    for y in y_ticks {
        let py = frame.py(y);
        s.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{ML}\" y2=\"{py:.2}\" stroke=\"#333\"/>\n",
            ML - 5.0
        ));
        let label = if exp.log_y { format!("{:.0e}", y) } else { format!("{y:.2}") };
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{label}</text>\n",
            ML - 9.0,
            py + 4.0
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        ML + (W - ML - MR) / 2.0,
        H - 15.0,
        exp.axis.name()
    ));
    s.push_str(&format!(
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0,
        match exp.metric {
            MetricKind::Outage => "outage probability",
            MetricKind::Dor => "delay outage rate",
        }
    ));
    s.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        W / 2.0,
        exp.name
    ));

    for (ci, curve) in exp.curves.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        let dash = match curve.style {
            LineStyle::Solid => "",
            LineStyle::Dashed => " stroke-dasharray=\"9,5\"",
            LineStyle::Dotted => " stroke-dasharray=\"2,4\"",
        };
        let mut d = String::new();
        let mut pen_down = false;
        for (si, &v) in table.sweep.iter().enumerate() {
            match table.points[si][ci].analytic {
                Some(y) if !exp.log_y || y > frame.y0 => {
                    let cmd = if pen_down { 'L' } else { 'M' };
                    d.push_str(&format!("{cmd}{:.2} {:.2} ", frame.px(v), frame.py(y)));
                    pen_down = true;
                }
                _ => pen_down = false,
            }
        }
        if !d.is_empty() {
            s.push_str(&format!(
                "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"{dash}/>\n",
                d.trim_end()
            ));
        }
        for (si, &v) in table.sweep.iter().enumerate() {
            if let Some(y) = table.points[si][ci].simulated {
                if !exp.log_y || y > frame.y0 {
                    s.push_str(&format!(
                        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.2\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.4\"/>\n",
                        frame.px(v),
                        frame.py(y)
                    ));
                }
            }
        }
        // Legend.
        let ly = MT + 18.0 * ci as f64 + 10.0;
        s.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly:.2}\" x2=\"{}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.8\"{dash}/>\n",
            W - MR + 10.0,
            W - MR + 40.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\">{}</text>\n",
            W - MR + 46.0,
            ly + 4.0,
            curve.label
        ));
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_format_roundtrips_exactly() {
        assert_eq!(format_cell(Some(1.0)), "1e0");
        assert_eq!(format_cell(Some(0.1)), "1e-1");
        assert_eq!(format_cell(None), "");
        for &x in &[1.0 / 3.0, 2.144224538589e-3, f64::MIN_POSITIVE, 12345.6789] {
            let s = format_cell(Some(x));
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn sanitize_labels() {
        assert_eq!(sanitize("nu = -6 dB"), "nu____6_db");
        assert_eq!(sanitize("N1"), "n1");
    }
}
