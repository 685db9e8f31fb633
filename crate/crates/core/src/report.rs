//! Dependency-free SVG rendering of sweep curves: F1 and F1-overall on the
//! left axis, defer rate on the right axis, and an optional horizontal
//! reference line at the no-defer baseline F1. Fixed 800×500 canvas.

use std::fmt::Write as _;

use crate::error::{LduError, Result};
use crate::metrics::MetricsRow;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 70.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

struct Scale {
    min: f64,
    max: f64,
    lo: f64,
    hi: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        if self.max == self.min {
            return (self.lo + self.hi) / 2.0;
        }
        self.lo + (v - self.min) / (self.max - self.min) * (self.hi - self.lo)
    }
}

fn polyline(points: &[(f64, f64)], style: &str) -> String {
    if points.len() < 2 {
        if let Some(&(x, y)) = points.first() {
            return format!("<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" {style}/>");
        }
        return String::new();
    }
    let coords: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    format!("<polyline fill=\"none\" {style} points=\"{}\"/>", coords.join(" "))
}

/// Renders one curve file to SVG. `baseline_f1`, when given, draws the
/// dotted "diagnostic network F1" reference line.
pub fn render_curve_svg(rows: &[MetricsRow], title: &str, baseline_f1: Option<f64>) -> Result<String> {
    if rows.is_empty() {
        return Err(LduError::invalid("render_curve_svg: no rows"));
    }
    let params: Vec<f64> = rows.iter().map(|r| r.param).collect();
    let pmin = params.iter().cloned().fold(f64::INFINITY, f64::min);
    let pmax = params.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let x = Scale { min: pmin, max: pmax, lo: MARGIN_LEFT, hi: WIDTH - MARGIN_RIGHT };
    // both axes span [0,1]: F1 on the left, defer rate on the right
    let y = Scale { min: 0.0, max: 1.0, lo: HEIGHT - MARGIN_BOTTOM, hi: MARGIN_TOP };

    let series = |f: &dyn Fn(&MetricsRow) -> Option<f64>| -> Vec<(f64, f64)> {
        rows.iter()
            .filter_map(|r| f(r).map(|v| (x.map(r.param), y.map(v))))
            .collect()
    };

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    )
    .unwrap();
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    writeln!(
        svg,
        "<text x=\"{:.0}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" font-family=\"sans-serif\">{title}</text>",
        WIDTH / 2.0
    )
    .unwrap();

    // axes
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    writeln!(svg, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>").unwrap();
    writeln!(svg, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>").unwrap();
    writeln!(svg, "<line x1=\"{x1}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y1}\" stroke=\"black\"/>").unwrap();

    // ticks every 0.2 on both y axes
    for i in 0..=5 {
        let v = i as f64 * 0.2;
        let yy = y.map(v);
        writeln!(
            svg,
            "<text x=\"{:.0}\" y=\"{yy:.0}\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">{v:.1}</text>",
            x0 - 8.0
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{:.0}\" y=\"{yy:.0}\" text-anchor=\"start\" font-size=\"11\" font-family=\"sans-serif\">{v:.1}</text>",
            x1 + 8.0
        )
        .unwrap();
        writeln!(
            svg,
            "<line x1=\"{x0}\" y1=\"{yy:.2}\" x2=\"{x1}\" y2=\"{yy:.2}\" stroke=\"#eeeeee\"/>"
        )
        .unwrap();
    }
    // x tick labels at the ends and middle
    for v in [pmin, (pmin + pmax) / 2.0, pmax] {
        let xx = x.map(v);
        writeln!(
            svg,
            "<text x=\"{xx:.0}\" y=\"{:.0}\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">{v:.3}</text>",
            y0 + 20.0
        )
        .unwrap();
    }
    writeln!(
        svg,
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">param</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 15.0
    )
    .unwrap();

    if let Some(b) = baseline_f1 {
        let yy = y.map(b);
        writeln!(
            svg,
            "<line x1=\"{x0}\" y1=\"{yy:.2}\" x2=\"{x1}\" y2=\"{yy:.2}\" stroke=\"red\" stroke-dasharray=\"2,4\"/>"
        )
        .unwrap();
    }

    svg.push_str(&polyline(&series(&|r| r.f1), "stroke=\"red\" stroke-width=\"2\""));
    svg.push_str(&polyline(
        &series(&|r| r.f1_overall),
        "stroke=\"red\" stroke-width=\"2\" stroke-dasharray=\"8,4\"",
    ));
    svg.push_str(&polyline(
        &series(&|r| Some(r.defer_rate)),
        "stroke=\"blue\" stroke-width=\"2\"",
    ));

    // legend
    let legend = [
        ("F1", "red", "none"),
        ("F1 overall", "red", "8,4"),
        ("defer rate", "blue", "none"),
    ];
    for (i, (name, color, dash)) in legend.iter().enumerate() {
        let ly = MARGIN_TOP + 14.0 + 16.0 * i as f64;
        let dash_attr =
            if *dash == "none" { String::new() } else { format!(" stroke-dasharray=\"{dash}\"") };
        writeln!(
            svg,
            "<line x1=\"{:.0}\" y1=\"{ly:.0}\" x2=\"{:.0}\" y2=\"{ly:.0}\" stroke=\"{color}\" stroke-width=\"2\"{dash_attr}/>",
            x0 + 10.0,
            x0 + 40.0
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{:.0}\" y=\"{:.0}\" font-size=\"11\" font-family=\"sans-serif\">{name}</text>",
            x0 + 46.0,
            ly + 4.0
        )
        .unwrap();
    }

    svg.push_str("</svg>");
    Ok(svg)
}
