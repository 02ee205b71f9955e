//! CSV, JSON, and SVG artifact writers. All output is plain text produced
//! with round-trip float formatting, so identical runs emit identical bytes.

use crate::barrier::BarrierCertificate;
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// One sweep-query row; `f_true` is present only when the ground truth is
/// computable.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub x: Vec<f64>,
    pub mu: f64,
    pub sigma: f64,
    pub eps_det_ours: f64,
    pub eps_prob_ours: f64,
    pub eps_det_hashimoto: f64,
    pub eps_prob_chowdhury: f64,
    pub eps_prob_abbasi: f64,
    pub eps_prob_seeger: f64,
    pub eps_det_maddalena: f64,
    pub f_true: Option<f64>,
}

pub fn sweep_csv(dim: usize, rows: &[SweepRow], include_f_true: bool) -> String {
    let mut out = String::new();
    for d in 0..dim {
        let _ = write!(out, "x{},", d + 1);
    }
    out.push_str(
        "mu,sigma,eps_det_ours,eps_prob_ours,eps_det_hashimoto,eps_prob_chowdhury,\
         eps_prob_abbasi,eps_prob_seeger,eps_det_maddalena",
    );
    if include_f_true {
        out.push_str(",f_true");
    }
    out.push('\n');
    for r in rows {
        for v in &r.x {
            let _ = write!(out, "{v},");
        }
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.mu,
            r.sigma,
            r.eps_det_ours,
            r.eps_prob_ours,
            r.eps_det_hashimoto,
            r.eps_prob_chowdhury,
            r.eps_prob_abbasi,
            r.eps_prob_seeger,
            r.eps_det_maddalena
        );
        if include_f_true {
            let _ = write!(out, ",{}", r.f_true.unwrap_or(f64::NAN));
        }
        out.push('\n');
    }
    out
}

/// Per-bound averages of one benchmark run.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub system: String,
    pub kernel: String,
    pub sigma_n: f64,
    pub m: usize,
    pub true_l1: f64,
    pub eps_prob_ours: f64,
    pub eps_det_ours: f64,
    pub eps_det_hashimoto: f64,
    pub eps_prob_chowdhury: f64,
    pub eps_prob_abbasi: f64,
    pub eps_prob_seeger: f64,
    pub eps_det_maddalena: f64,
}

pub const BENCH_HEADER: &str = "system,kernel,sigma_n,m,true_l1,eps_prob_ours,eps_det_ours,\
eps_det_hashimoto,eps_prob_chowdhury,eps_prob_abbasi,eps_prob_seeger,eps_det_maddalena";

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.system,
            r.kernel,
            r.sigma_n,
            r.m,
            r.true_l1,
            r.eps_prob_ours,
            r.eps_det_ours,
            r.eps_det_hashimoto,
            r.eps_prob_chowdhury,
            r.eps_prob_abbasi,
            r.eps_prob_seeger,
            r.eps_det_maddalena
        );
    }
    out
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One training-size point of the growth trend, mean and std over the query
/// set for each tracked quantity.
#[derive(Debug, Clone)]
pub struct TrendRow {
    pub m: usize,
    pub true_l1: (f64, f64),
    pub eps_prob_ours: (f64, f64),
    pub eps_det_ours: (f64, f64),
    pub eps_det_hashimoto: (f64, f64),
    pub eps_prob_chowdhury: (f64, f64),
    pub eps_prob_abbasi: (f64, f64),
    pub eps_prob_seeger: (f64, f64),
    pub eps_det_maddalena: (f64, f64),
}

pub fn trend_csv(rows: &[TrendRow]) -> String {
    let mut out = String::from("m");
    for name in [
        "true_l1",
        "eps_prob_ours",
        "eps_det_ours",
        "eps_det_hashimoto",
        "eps_prob_chowdhury",
        "eps_prob_abbasi",
        "eps_prob_seeger",
        "eps_det_maddalena",
    ] {
        let _ = write!(out, ",{name}_mean,{name}_std");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{}", r.m);
        for (mean, std) in [
            r.true_l1,
            r.eps_prob_ours,
            r.eps_det_ours,
            r.eps_det_hashimoto,
            r.eps_prob_chowdhury,
            r.eps_prob_abbasi,
            r.eps_prob_seeger,
            r.eps_det_maddalena,
        ] {
            let _ = write!(out, ",{mean},{std}");
        }
        out.push('\n');
    }
    out
}

/// Serialized barrier certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub regions: usize,
    pub values: Vec<f64>,
    pub eta: f64,
    pub beta: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "P_s")]
    pub p_s: f64,
    pub bound_kind: String,
    pub delta: Option<f64>,
    pub timing_seconds: f64,
}

impl CertificateFile {
    pub fn from_certificate(
        cert: &BarrierCertificate,
        bound_kind: &str,
        timing_seconds: f64,
    ) -> Self {
        CertificateFile {
            regions: cert.values.len(),
            values: cert.values.clone(),
            eta: cert.eta,
            beta: cert.beta,
            n: cert.horizon,
            p_s: cert.safety_probability,
            bound_kind: bound_kind.to_string(),
            delta: cert.confidence_delta,
            timing_seconds,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// SVG plots
// ---------------------------------------------------------------------------

const PALETTE: [&str; 9] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#17becf",
];

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 44.0;
const MARGIN_BOTTOM: f64 = 56.0;

struct Series {
    label: String,
    color: &'static str,
    dashed: bool,
    /// One or two polylines (bands carry both envelopes under one label).
    lines: Vec<Vec<(f64, f64)>>,
}

/// Minimal line-plot builder emitting a fixed-viewBox SVG with no external
/// references.
pub struct SvgPlot {
    title: String,
    x_label: String,
    y_label: String,
    series: Vec<Series>,
}

impl SvgPlot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        SvgPlot {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            series: Vec::new(),
        }
    }

    fn next_color(&self) -> &'static str {
        PALETTE[self.series.len() % PALETTE.len()]
    }

    pub fn line(&mut self, label: &str, points: Vec<(f64, f64)>) {
        let color = self.next_color();
        self.series.push(Series {
            label: label.to_string(),
            color,
            dashed: false,
            lines: vec![points],
        });
    }

    /// Upper and lower envelope drawn dashed in one color with one legend
    /// entry.
    pub fn band(&mut self, label: &str, xs: &[f64], lower: &[f64], upper: &[f64]) {
        let color = self.next_color();
        let lo = xs.iter().copied().zip(lower.iter().copied()).collect();
        let hi = xs.iter().copied().zip(upper.iter().copied()).collect();
        self.series.push(Series {
            label: label.to_string(),
            color,
            dashed: true,
            lines: vec![lo, hi],
        });
    }

    pub fn render(&self) -> String {
        let mut xmin = f64::INFINITY;
        let mut xmax = f64::NEG_INFINITY;
        let mut ymin = f64::INFINITY;
        let mut ymax = f64::NEG_INFINITY;
        for s in &self.series {
            for line in &s.lines {
                for &(x, y) in line {
                    if x.is_finite() && y.is_finite() {
                        xmin = xmin.min(x);
                        xmax = xmax.max(x);
                        ymin = ymin.min(y);
                        ymax = ymax.max(y);
                    }
                }
            }
        }
        if !xmin.is_finite() {
            xmin = 0.0;
            xmax = 1.0;
            ymin = 0.0;
            ymax = 1.0;
        }
        if xmax - xmin < 1e-300 {
            xmax = xmin + 1.0;
        }
        if ymax - ymin < 1e-300 {
            ymax = ymin + 1.0;
        }
        let ypad = (ymax - ymin) * 0.05;
        let ymin = ymin - ypad;
        let ymax = ymax + ypad;

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = move |x: f64| MARGIN_LEFT + (x - xmin) / (xmax - xmin) * plot_w;
        let sy = move |y: f64| MARGIN_TOP + plot_h - (y - ymin) / (ymax - ymin) * plot_h;

        let mut svg = String::new();
        let _ = write!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
             font-family=\"sans-serif\" font-size=\"13\">\n"
        );
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        );
        // axes
        let _ = write!(
            svg,
            "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
             fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n"
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = xmin + t * (xmax - xmin);
            let yv = ymin + t * (ymax - ymin);
            let px = sx(xv);
            let py = sy(yv);
            let _ = write!(
                svg,
                "<line x1=\"{px}\" y1=\"{0}\" x2=\"{px}\" y2=\"{1}\" stroke=\"#333\"/>\n",
                MARGIN_TOP + plot_h,
                MARGIN_TOP + plot_h + 5.0
            );
            let _ = write!(
                svg,
                "<text x=\"{px}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                MARGIN_TOP + plot_h + 20.0,
                tick(xv)
            );
            let _ = write!(
                svg,
                "<line x1=\"{0}\" y1=\"{py}\" x2=\"{MARGIN_LEFT}\" y2=\"{py}\" stroke=\"#333\"/>\n",
                MARGIN_LEFT - 5.0
            );
            let _ = write!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
                MARGIN_LEFT - 9.0,
                py + 4.0,
                tick(yv)
            );
        }
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        );
        let _ = write!(
            svg,
            "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        );
        // data
        for s in &self.series {
            let dash = if s.dashed { " stroke-dasharray=\"6 3\"" } else { "" };
            for line in &s.lines {
                let mut d = String::new();
                let mut pen_down = false;
                for &(x, y) in line {
                    if !x.is_finite() || !y.is_finite() {
                        pen_down = false;
                        continue;
                    }
                    let cmd = if pen_down { 'L' } else { 'M' };
                    let _ = write!(d, "{cmd}{:.2},{:.2} ", sx(x), sy(y));
                    pen_down = true;
                }
                if d.is_empty() {
                    continue;
                }
                let _ = write!(
                    svg,
                    "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{dash}/>\n",
                    d.trim_end(),
                    s.color
                );
            }
        }
        // legend
        for (i, s) in self.series.iter().enumerate() {
            let ly = MARGIN_TOP + 14.0 + 18.0 * i as f64;
            let lx = MARGIN_LEFT + plot_w - 170.0;
            let _ = write!(
                svg,
                "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{}\" \
                 stroke-width=\"2\"{}/>\n",
                lx + 22.0,
                s.color,
                if s.dashed { " stroke-dasharray=\"6 3\"" } else { "" }
            );
            let _ = write!(
                svg,
                "<text x=\"{}\" y=\"{}\">{}</text>\n",
                lx + 28.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
