//! Experiment outputs: CSV tables, JSON summaries with the configuration
//! and constants echoed, and self-contained SVG line plots.

use crate::harness::{DecompositionReport, DistanceTailReport, TailReport};
use crate::nets::UnstructuredReport;
use crate::rlcd::RlcdValue;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("failed to write {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json encoding failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("nothing to plot")]
    EmptyPlot,
}

pub fn write_text(path: impl AsRef<Path>, content: &str) -> Result<(), ReportError> {
    let path = path.as_ref();
    std::fs::write(path, content).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Columns: `epsilon,hits,trials,p_hat,stderr,curve`. One row per grid
/// point; `curve` is the configured reference `C eps + 2 exp(-c n)`.
pub fn tail_csv(report: &TailReport) -> String {
    let mut out = String::from("epsilon,hits,trials,p_hat,stderr,curve\n");
    for k in 0..report.epsilon.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            report.epsilon[k],
            report.hits[k],
            report.trials,
            report.p_hat[k],
            report.stderr[k],
            report.curve[k]
        );
    }
    out
}

/// Columns: `column,epsilon,hits,trials,p_hat,stderr,curve`, one block per
/// selected column followed by the pooled block labeled `pooled`.
pub fn distance_csv(report: &DistanceTailReport) -> String {
    let mut out = String::from("column,epsilon,hits,trials,p_hat,stderr,curve\n");
    let mut block = |name: &str, tail: &TailReport| {
        for k in 0..tail.epsilon.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                name,
                tail.epsilon[k],
                tail.hits[k],
                tail.trials,
                tail.p_hat[k],
                tail.stderr[k],
                tail.curve[k]
            );
        }
    };
    for (j, tail) in &report.per_column {
        block(&j.to_string(), tail);
    }
    block("pooled", &report.pooled);
    out
}

/// Columns: `theta,objective,threshold`, the evaluated search curve.
pub fn rlcd_curve_csv(value: &RlcdValue) -> String {
    let mut out = String::from("theta,objective,threshold\n");
    for point in &value.curve {
        let _ = writeln!(out, "{},{},{}", point.theta, point.objective, point.threshold);
    }
    out
}

/// Columns: `epsilon,event_hits,compressible_hits,incompressible_hits,trials`.
pub fn decomposition_csv(report: &DecompositionReport) -> String {
    let mut out =
        String::from("epsilon,event_hits,compressible_hits,incompressible_hits,trials\n");
    for k in 0..report.epsilon.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            report.epsilon[k],
            report.event_hits[k],
            report.compressible_hits[k],
            report.incompressible_hits[k],
            report.trials
        );
    }
    out
}

/// Columns: `sample,rlcd`; censored values print as `inf`.
pub fn unstructured_csv(report: &UnstructuredReport) -> String {
    let mut out = String::from("sample,rlcd\n");
    for (k, value) in report.rlcd_values.iter().enumerate() {
        let _ = writeln!(out, "{k},{value}");
    }
    out
}

/// JSON document `{config, results, constants}`; `constants` should carry
/// every frozen calibration the run used.
pub fn json_summary<C: Serialize, R: Serialize, K: Serialize>(
    config: &C,
    results: &R,
    constants: &K,
) -> Result<String, ReportError> {
    let doc = serde_json::json!({
        "config": config,
        "results": results,
        "constants": constants,
    });
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// One polyline of a plot.
#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points }
    }
}

const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: [&str; 5] = ["#1f6feb", "#d1242f", "#1a7f37", "#8250df", "#9a6700"];

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 10_000.0 {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Hand-rolled SVG line plot: axes, five ticks per axis, one colored
/// polyline per series, legend in the top-right corner. Non-finite points
/// are dropped.
pub fn line_plot_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
) -> Result<String, ReportError> {
    let finite: Vec<(usize, Vec<(f64, f64)>)> = series
        .iter()
        .enumerate()
        .map(|(i, s)| {
            (i, s.points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect())
        })
        .collect();
    let all: Vec<(f64, f64)> = finite.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    if all.is_empty() {
        return Err(ReportError::EmptyPlot);
    }
    let (mut x_lo, mut x_hi) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));
    let (mut y_lo, mut y_hi) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| (lo.min(y), hi.max(y)));
    if x_hi == x_lo {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if y_hi == y_lo {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let inner_w = PLOT_W - MARGIN_L - MARGIN_R;
    let inner_h = PLOT_H - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * inner_w;
    let sy = |y: f64| PLOT_H - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * inner_h;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PLOT_W}" height="{PLOT_H}" viewBox="0 0 {PLOT_W} {PLOT_H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{PLOT_W}" height="{PLOT_H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        PLOT_W / 2.0,
        title
    );
    // Axes.
    let x0 = MARGIN_L;
    let y0 = PLOT_H - MARGIN_B;
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#,
        PLOT_W - MARGIN_R
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{MARGIN_T}" stroke="black"/>"#
    );
    for k in 0..=4 {
        let fx = x_lo + (x_hi - x_lo) * k as f64 / 4.0;
        let px = sx(fx);
        let _ = writeln!(
            svg,
            r#"<line x1="{px}" y1="{y0}" x2="{px}" y2="{}" stroke="black"/>"#,
            y0 + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{px}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 20.0,
            tick_label(fx)
        );
        let fy = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
        let py = sy(fy);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py + 4.0,
            tick_label(fy)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        MARGIN_L + inner_w / 2.0,
        PLOT_H - 12.0,
        x_label
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        MARGIN_T + inner_h / 2.0,
        MARGIN_T + inner_h / 2.0,
        y_label
    );
    for (slot, points) in &finite {
        if points.is_empty() {
            continue;
        }
        let color = PALETTE[slot % PALETTE.len()];
        let path: Vec<String> =
            points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        for &(x, y) in points.iter() {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
    }
    // Legend.
    for (row, (slot, _)) in finite.iter().enumerate() {
        let color = PALETTE[slot % PALETTE.len()];
        let ly = MARGIN_T + 14.0 * row as f64 + 8.0;
        let lx = PLOT_W - MARGIN_R - 150.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 24.0,
            ly + 4.0,
            series[*slot].label
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// `p_hat` against the reference curve over the epsilon grid.
pub fn tail_plot_svg(report: &TailReport) -> Result<String, ReportError> {
    let empirical: Vec<(f64, f64)> =
        report.epsilon.iter().copied().zip(report.p_hat.iter().copied()).collect();
    let curve: Vec<(f64, f64)> =
        report.epsilon.iter().copied().zip(report.curve.iter().copied()).collect();
    line_plot_svg(
        &format!("tail of {}", report.ensemble),
        "epsilon",
        "P",
        &[Series::new("empirical", empirical), Series::new("bound curve", curve)],
    )
}
