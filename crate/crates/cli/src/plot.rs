//! Hand-rolled SVG charts for suite summaries and single-run height traces.
//! Presentation only; no numerical result depends on this module.

use std::fmt::Write as _;

use springhop_core::dynamics::TrajectorySample;

use crate::output::SUMMARY_HEADER;

/// The summary text did not have the expected header or row shape.
#[derive(Debug, thiserror::Error)]
#[error("malformed summary: {0}")]
pub struct MalformedSummary(pub String);

struct SummaryPoint {
    label: String,
    apex: f64,
    clearance: f64,
}

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 32.0;
const MARGIN_BOTTOM: f64 = 120.0;

fn f(v: f64) -> String {
    format!("{v:.2}")
}

fn svg_open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">{title}</text>",
        WIDTH / 2.0
    );
}

fn axes(out: &mut String, y_label: &str) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n\
         <text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">{y_label}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

fn y_ticks(out: &mut String, y_max: f64) {
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let span = y0 - MARGIN_TOP;
    let step = nice_step(y_max);
    let mut v = 0.0;
    while v <= y_max + 1e-9 {
        let y = y0 - span * (v / y_max);
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
             <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            f(MARGIN_LEFT - 4.0),
            f(y),
            f(MARGIN_LEFT),
            f(y),
            f(MARGIN_LEFT),
            f(y),
            f(WIDTH - MARGIN_RIGHT),
            f(y),
            f(MARGIN_LEFT - 8.0),
            f(y + 4.0),
            f(v)
        );
        v += step;
    }
}

fn nice_step(max: f64) -> f64 {
    let raw = max / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    for mult in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if mag * mult >= raw {
            return mag * mult;
        }
    }
    mag * 10.0
}

fn parse_summary(csv: &str) -> Result<Vec<SummaryPoint>, MalformedSummary> {
    let mut lines = csv.lines();
    let header = lines
        .next()
        .ok_or_else(|| MalformedSummary("empty file".into()))?;
    if header != SUMMARY_HEADER {
        return Err(MalformedSummary(format!(
            "header mismatch: got \"{header}\""
        )));
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != SUMMARY_HEADER.split(',').count() {
            return Err(MalformedSummary(format!(
                "row {}: expected {} fields, got {}",
                i + 2,
                SUMMARY_HEADER.split(',').count(),
                fields.len()
            )));
        }
        let num = |idx: usize, name: &str| -> Result<f64, MalformedSummary> {
            fields[idx].parse::<f64>().map_err(|_| {
                MalformedSummary(format!("row {}: {name} is not a number", i + 2))
            })
        };
        points.push(SummaryPoint {
            label: fields[0].to_string(),
            apex: num(5, "body_apex_m")?,
            clearance: num(6, "paw_clearance_m")?,
        });
    }
    Ok(points)
}

/// Renders an apex-vs-scenario marker chart from a suite summary CSV text.
/// Header-only input yields a valid chart with empty axes.
pub fn render_summary_plot(csv: &str) -> Result<String, MalformedSummary> {
    let points = parse_summary(csv)?;
    let mut out = String::new();
    svg_open(&mut out, "Jump apex by scenario");
    axes(&mut out, "height (m)");
    if !points.is_empty() {
        let y_max = points
            .iter()
            .map(|p| p.apex.max(p.clearance))
            .fold(0.1f64, f64::max)
            * 1.1;
        y_ticks(&mut out, y_max);
        let x0 = MARGIN_LEFT;
        let x1 = WIDTH - MARGIN_RIGHT;
        let y0 = HEIGHT - MARGIN_BOTTOM;
        let span = y0 - MARGIN_TOP;
        let n = points.len();
        for (i, p) in points.iter().enumerate() {
            let x = x0 + (x1 - x0) * (i as f64 + 0.5) / n as f64;
            let y_apex = y0 - span * (p.apex / y_max);
            let y_clear = y0 - span * (p.clearance / y_max);
            let _ = writeln!(
                out,
                "<circle class=\"datum\" cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"#1f77b4\"/>\n\
                 <rect class=\"datum\" x=\"{}\" y=\"{}\" width=\"8\" height=\"8\" fill=\"#ff7f0e\"/>\n\
                 <text x=\"{}\" y=\"{}\" text-anchor=\"end\" \
                 transform=\"rotate(-45 {} {})\" font-size=\"10\">{}</text>",
                f(x),
                f(y_apex),
                f(x - 4.0),
                f(y_clear - 4.0),
                f(x),
                f(y0 + 14.0),
                f(x),
                f(y0 + 14.0),
                p.label
            );
        }
        let _ = writeln!(
            out,
            "<circle cx=\"{}\" cy=\"14\" r=\"5\" fill=\"#1f77b4\"/>\
             <text x=\"{}\" y=\"18\">body apex</text>\
             <rect x=\"{}\" y=\"10\" width=\"8\" height=\"8\" fill=\"#ff7f0e\"/>\
             <text x=\"{}\" y=\"18\">paw clearance</text>",
            f(MARGIN_LEFT + 10.0),
            f(MARGIN_LEFT + 20.0),
            f(MARGIN_LEFT + 120.0),
            f(MARGIN_LEFT + 134.0)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Renders a body-height-vs-time polyline for one run.
pub fn render_trajectory_plot(samples: &[TrajectorySample]) -> String {
    let mut out = String::new();
    svg_open(&mut out, "Body height over time");
    axes(&mut out, "z (m)");
    if samples.len() >= 2 {
        let t_max = samples.last().map(|s| s.t).unwrap_or(1.0).max(1e-9);
        let z_max = samples.iter().map(|s| s.z_b).fold(0.1f64, f64::max) * 1.1;
        y_ticks(&mut out, z_max);
        let x0 = MARGIN_LEFT;
        let x1 = WIDTH - MARGIN_RIGHT;
        let y0 = HEIGHT - MARGIN_BOTTOM;
        let span = y0 - MARGIN_TOP;
        let mut path = String::new();
        for (i, s) in samples.iter().enumerate() {
            let x = x0 + (x1 - x0) * (s.t / t_max);
            let z = y0 - span * (s.z_b.max(0.0) / z_max);
            let _ = write!(path, "{}{},{} ", if i == 0 { "M" } else { "L" }, f(x), f(z));
        }
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>",
            path.trim_end()
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">t (s), 0 to {}</text>",
            f((x0 + x1) / 2.0),
            f(HEIGHT - 8.0),
            f(t_max)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::{write_summary_csv, SummaryRow};

    fn row(name: &str, apex: f64) -> SummaryRow {
        SummaryRow {
            scenario: name.into(),
            gravity: 9.81,
            torque_saturation: 18.0,
            squat_deg: 115.0,
            pitch_deg: 0.0,
            body_apex: apex,
            paw_clearance: apex - 0.45,
            liftoff_speed: Some(3.0),
            range: None,
            peak_torque: 17.0,
            no_liftoff: false,
        }
    }

    #[test]
    fn header_only_summary_renders_empty_axes() {
        let svg = render_summary_plot(&write_summary_csv(&[])).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(!svg.contains("circle class=\"datum\""), "no data markers expected");
    }

    #[test]
    fn single_row_yields_single_marker() {
        let svg = render_summary_plot(&write_summary_csv(&[row("only", 1.14)])).unwrap();
        assert_eq!(svg.matches("<circle class=\"datum\"").count(), 1);
        assert!(svg.contains("only"));
    }

    #[test]
    fn four_rows_yield_four_markers_nonzero_size() {
        let rows: Vec<_> = (0..4).map(|i| row(&format!("s{i}"), 1.0 + i as f64 * 0.05)).collect();
        let svg = render_summary_plot(&write_summary_csv(&rows)).unwrap();
        assert_eq!(svg.matches("<circle class=\"datum\"").count(), 4);
        assert!(svg.len() > 500);
    }

    #[test]
    fn wrong_header_is_malformed() {
        assert!(render_summary_plot("nope,nope\n1,2\n").is_err());
        let mut text = write_summary_csv(&[row("x", 1.0)]);
        text = text.replace("1.14", "not-a-number").replace("x,", "x;");
        assert!(render_summary_plot(&text).is_err());
    }
}
