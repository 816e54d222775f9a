//! Static SVG charts of report accuracies.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::report::MetricReport;

const W: f64 = 480.0;
const H: f64 = 320.0;
const MARGIN: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    )
    .unwrap();
    let (x0, y0, x1) = (MARGIN, H - MARGIN, W - MARGIN);
    writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#).unwrap();
    writeln!(s, r#"<line x1="{x0}" y1="{MARGIN}" x2="{x0}" y2="{y0}" stroke="black"/>"#).unwrap();
    for tick in [0.0, 25.0, 50.0, 75.0, 100.0] {
        let y = y_of(tick / 100.0);
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10">{tick}</text>"#,
            x0 - 4.0,
            y + 3.0
        )
        .unwrap();
    }
    s
}

fn y_of(acc: f64) -> f64 {
    (H - MARGIN) - acc.clamp(0.0, 1.0) * (H - 2.0 * MARGIN)
}

/// One bar per report.
pub fn bar_chart(reports: &[MetricReport], title: &str) -> String {
    let mut s = header(title);
    let slot = (W - 2.0 * MARGIN) / reports.len() as f64;
    for (k, r) in reports.iter().enumerate() {
        let x = MARGIN + slot * (k as f64 + 0.2);
        let y = y_of(r.mean);
        writeln!(
            s,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="steelblue"/>"#,
            slot * 0.6,
            (H - MARGIN) - y
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="10">{}</text>"#,
            x + slot * 0.3,
            H - MARGIN + 14.0,
            escape(&r.label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Mean accuracy against the sweep value, as a single polyline.
pub fn line_chart(reports: &[MetricReport], title: &str) -> String {
    let mut s = header(title);
    let xs: Vec<f64> = reports.iter().map(|r| r.sweep.as_ref().map_or(0.0, |p| p.value)).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x_of = |v: f64| MARGIN + (v - lo) / span * (W - 2.0 * MARGIN);
    let pts: Vec<String> = reports
        .iter()
        .zip(&xs)
        .map(|(r, &v)| format!("{:.2},{:.2}", x_of(v), y_of(r.mean)))
        .collect();
    writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, pts.join(" ")).unwrap();
    for &v in &xs {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="10">{v}</text>"#,
            x_of(v),
            H - MARGIN + 14.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `accuracy.svg` into `dir`: a line over the sweep axis when every
/// report carries a sweep point and there are several, bars otherwise.
pub fn emit_plots(reports: &[MetricReport], dir: &Path) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(HarnessError::Config("no reports to plot".into()));
    }
    fs::create_dir_all(dir)?;
    let swept = reports.len() > 1 && reports.iter().all(|r| r.sweep.is_some());
    let svg = if swept {
        let kind = &reports[0].sweep.as_ref().unwrap().kind;
        line_chart(reports, &format!("accuracy (%) vs {kind}"))
    } else {
        bar_chart(reports, "accuracy (%)")
    };
    let path = dir.join("accuracy.svg");
    fs::write(&path, svg)?;
    Ok(vec![path])
}
