//! Hand-rolled SVG charts. Output is a pure function of the input table:
//! fixed canvas, fixed float formatting, no timestamps, so regenerating
//! from the same data is byte-identical.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exttarget::{ContourEstimate, EllipseTarget};
use crate::scenario::Position3;

use super::table::{Cell, ResultTable};
use super::Case;

const W: f64 = 640.0;
const H: f64 = 440.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        body.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
        ));
        body.push_str(&format!(
            "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
        ));
        body.push_str(&format!(
            "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{title}</text>\n",
            W / 2.0
        ));
        Svg { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        self.body.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>\n",
            fmt(x1), fmt(y1), fmt(x2), fmt(y2)
        ));
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        self.body.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\"/>\n",
            fmt(x), fmt(y), fmt(w), fmt(h)
        ));
    }

    fn rect_outline(&mut self, x: f64, y: f64, w: f64, h: f64, stroke: &str) {
        self.body.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"/>\n",
            fmt(x), fmt(y), fmt(w), fmt(h)
        ));
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        self.body.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{fill}\"/>\n",
            fmt(x), fmt(y), fmt(r)
        ));
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{},{}", fmt(*x), fmt(*y))).collect();
        self.body.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>\n",
            coords.join(" ")
        ));
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, content: &str) {
        self.body.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"{size}\" text-anchor=\"{anchor}\">{content}</text>\n",
            fmt(x), fmt(y)
        ));
    }

    fn legend_entry(&mut self, x: f64, y: f64, color: &str, marker: Marker, label: &str) {
        match marker {
            Marker::Line => self.line(x, y - 4.0, x + 22.0, y - 4.0, color, 2.0),
            Marker::Dot => self.circle(x + 11.0, y - 4.0, 3.5, color),
            Marker::Box => self.rect_outline(x + 4.0, y - 10.0, 14.0, 12.0, color),
            Marker::Cross => {
                self.line(x + 5.0, y - 10.0, x + 17.0, y + 2.0, color, 2.0);
                self.line(x + 5.0, y + 2.0, x + 17.0, y - 10.0, color, 2.0);
            }
        }
        self.body.push_str(&format!(
            "<text class=\"legend\" x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{label}</text>\n",
            fmt(x + 28.0),
            fmt(y)
        ));
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

#[derive(Clone, Copy)]
enum Marker {
    Line,
    Dot,
    Box,
    Cross,
}

fn nice_range(min: f64, max: f64) -> (f64, f64) {
    if !min.is_finite() || !max.is_finite() {
        return (0.0, 1.0);
    }
    if (max - min).abs() < 1e-300 {
        let pad = if max == 0.0 { 1.0 } else { max.abs() * 0.1 };
        return (min - pad, max + pad);
    }
    let pad = (max - min) * 0.08;
    (min - pad, max + pad)
}

/// Vertical bar chart of `(label, value)` pairs.
fn bar_chart(title: &str, ylabel: &str, data: &[(String, f64)]) -> String {
    let mut svg = Svg::new(title);
    let plot_w = W - MARGIN_L - MARGIN_R;
    let plot_h = H - MARGIN_T - MARGIN_B;
    let finite: Vec<f64> = data.iter().map(|d| d.1).filter(|v| v.is_finite()).collect();
    let max = finite.iter().copied().fold(0.0f64, f64::max);
    let min = finite.iter().copied().fold(0.0f64, f64::min);
    let (y0, y1) = nice_range(min.min(0.0), max.max(0.0));
    let y_of = |v: f64| MARGIN_T + plot_h * (1.0 - (v - y0) / (y1 - y0));

    // axes
    svg.line(MARGIN_L, MARGIN_T, MARGIN_L, MARGIN_T + plot_h, "black", 1.0);
    svg.line(MARGIN_L, y_of(0.0), MARGIN_L + plot_w, y_of(0.0), "black", 1.0);
    svg.text(16.0, MARGIN_T - 10.0, 12.0, "start", ylabel);

    let n = data.len().max(1);
    let slot = plot_w / n as f64;
    let bar_w = slot * 0.55;
    let palette = ["#4878cf", "#d65f5f", "#6acc65", "#b47cc7", "#c4ad66"];
    for (i, (label, value)) in data.iter().enumerate() {
        let x = MARGIN_L + slot * i as f64 + (slot - bar_w) / 2.0;
        if value.is_finite() {
            let top = y_of(value.max(0.0));
            let bottom = y_of(value.min(0.0));
            svg.rect(x, top, bar_w, (bottom - top).max(0.5), palette[i % palette.len()]);
            svg.text(x + bar_w / 2.0, top - 6.0, 11.0, "middle", &format!("{value:.4}"));
        }
        svg.text(x + bar_w / 2.0, MARGIN_T + plot_h + 18.0, 12.0, "middle", label);
    }
    svg.finish()
}

/// Empirical CDF polylines, one per labeled series. Empty series are
/// omitted from the legend.
fn ecdf_chart(title: &str, xlabel: &str, series: &[(String, Vec<f64>)]) -> String {
    let mut svg = Svg::new(title);
    let plot_w = W - MARGIN_L - MARGIN_R;
    let plot_h = H - MARGIN_T - MARGIN_B;
    let all: Vec<f64> =
        series.iter().flat_map(|(_, v)| v.iter().copied()).filter(|v| v.is_finite()).collect();
    let (x0, x1) = nice_range(
        all.iter().copied().fold(f64::INFINITY, f64::min),
        all.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let x_of = |v: f64| MARGIN_L + plot_w * (v - x0) / (x1 - x0);
    let y_of = |p: f64| MARGIN_T + plot_h * (1.0 - p);

    svg.line(MARGIN_L, MARGIN_T, MARGIN_L, MARGIN_T + plot_h, "black", 1.0);
    svg.line(MARGIN_L, MARGIN_T + plot_h, MARGIN_L + plot_w, MARGIN_T + plot_h, "black", 1.0);
    svg.text(W / 2.0, H - 18.0, 12.0, "middle", xlabel);
    svg.text(16.0, MARGIN_T - 10.0, 12.0, "start", "cumulative fraction");

    let palette = ["#4878cf", "#d65f5f", "#6acc65", "#b47cc7"];
    let mut legend_y = MARGIN_T + 16.0;
    for (si, (label, values)) in series.iter().enumerate() {
        let mut vals: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if vals.is_empty() {
            continue;
        }
        vals.sort_by(f64::total_cmp);
        let n = vals.len();
        let mut pts = Vec::with_capacity(n + 1);
        pts.push((x_of(vals[0]), y_of(0.0)));
        for (i, v) in vals.iter().enumerate() {
            pts.push((x_of(*v), y_of((i + 1) as f64 / n as f64)));
        }
        let color = palette[si % palette.len()];
        svg.polyline(&pts, color, 2.0);
        svg.legend_entry(MARGIN_L + plot_w - 190.0, legend_y, color, Marker::Line, label);
        legend_y += 18.0;
    }
    svg.finish()
}

/// Per-seed contour detail kept alongside an extended-target table so the
/// overlay can be drawn later from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtTargetDetail {
    pub seed: u64,
    pub truth: EllipseTarget,
    pub center_hat: Position3,
    pub reflection_points: Vec<Position3>,
    pub estimate: ContourEstimate,
    /// True radius along each estimate ray; absent where the ray missed.
    pub radius_true_m: Vec<Option<f64>>,
}

impl ExtTargetDetail {
    /// `theta_rad,radius_hat_m,radius_true_m` export; missed rays carry
    /// NaN in the last column.
    pub fn contour_csv(&self) -> String {
        let mut out = String::from("theta_rad,radius_hat_m,radius_true_m\n");
        for (i, theta) in self.estimate.theta_grid.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                theta,
                self.estimate.radius_hat_m[i],
                self.radius_true_m[i].unwrap_or(f64::NAN)
            ));
        }
        out
    }
}

/// Overlay of the true ellipse, estimated contour, reflection points, and
/// both centers. Legend carries one entry per non-empty series — five in
/// the ordinary case.
fn contour_overlay(detail: &ExtTargetDetail) -> String {
    let mut svg = Svg::new("extended-target contour estimate");
    let plot_w = W - MARGIN_L - MARGIN_R;
    let plot_h = H - MARGIN_T - MARGIN_B;

    // world window: everything of interest plus padding
    let mut xs = vec![detail.truth.center.x, detail.center_hat.x];
    let mut ys = vec![detail.truth.center.y, detail.center_hat.y];
    for p in &detail.reflection_points {
        xs.push(p.x);
        ys.push(p.y);
    }
    let a = detail.truth.semi_major_m;
    xs.push(detail.truth.center.x - a - 5.0);
    xs.push(detail.truth.center.x + a + 5.0);
    ys.push(detail.truth.center.y - a - 5.0);
    ys.push(detail.truth.center.y + a + 5.0);
    let (x0, x1) = nice_range(
        xs.iter().copied().fold(f64::INFINITY, f64::min),
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = nice_range(
        ys.iter().copied().fold(f64::INFINITY, f64::min),
        ys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    // isotropic scale
    let scale = (plot_w / (x1 - x0)).min(plot_h / (y1 - y0));
    let x_of = |x: f64| MARGIN_L + (x - x0) * scale;
    let y_of = |y: f64| MARGIN_T + plot_h - (y - y0) * scale;

    // ground-truth contour
    let truth_pts: Vec<(f64, f64)> = (0..=360)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / 360.0;
            let p = detail.truth.contour_point(t);
            (x_of(p.x), y_of(p.y))
        })
        .collect();
    svg.polyline(&truth_pts, "green", 2.0);

    // estimated contour (closed)
    let mut est_pts: Vec<(f64, f64)> = detail
        .estimate
        .theta_grid
        .iter()
        .zip(&detail.estimate.radius_hat_m)
        .map(|(&t, &r)| {
            (
                x_of(detail.estimate.center_hat.x + r * t.cos()),
                y_of(detail.estimate.center_hat.y + r * t.sin()),
            )
        })
        .collect();
    if let Some(first) = est_pts.first().copied() {
        est_pts.push(first);
    }
    svg.polyline(&est_pts, "blue", 2.0);

    // reflection points
    for p in &detail.reflection_points {
        svg.circle(x_of(p.x), y_of(p.y), 3.0, "red");
    }

    // true center: green rectangle; estimate: black cross
    let (cx, cy) = (x_of(detail.truth.center.x), y_of(detail.truth.center.y));
    svg.rect_outline(cx - 6.0, cy - 6.0, 12.0, 12.0, "green");
    let (ex, ey) = (x_of(detail.center_hat.x), y_of(detail.center_hat.y));
    svg.line(ex - 7.0, ey - 7.0, ex + 7.0, ey + 7.0, "black", 2.0);
    svg.line(ex - 7.0, ey + 7.0, ex + 7.0, ey - 7.0, "black", 2.0);

    // legend: one entry per non-empty series
    let lx = MARGIN_L + plot_w - 200.0;
    let mut ly = MARGIN_T + 16.0;
    let mut entry = |svg: &mut Svg, color, marker, label| {
        svg.legend_entry(lx, ly, color, marker, label);
        ly += 18.0;
    };
    entry(&mut svg, "green", Marker::Box, "true target location");
    entry(&mut svg, "black", Marker::Cross, "estimated location");
    if !detail.reflection_points.is_empty() {
        entry(&mut svg, "red", Marker::Dot, "estimated reflection points");
    }
    entry(&mut svg, "green", Marker::Line, "ground-truth contour");
    entry(&mut svg, "blue", Marker::Line, "estimated contour");

    svg.finish()
}

fn method_series(table: &ResultTable, value_col: &str) -> Result<Vec<(String, Vec<f64>)>> {
    let mi = table
        .column_index("method")
        .ok_or_else(|| Error::ContractViolation("table has no method column".into()))?;
    let vi = table
        .column_index(value_col)
        .ok_or_else(|| Error::ContractViolation(format!("table has no {value_col} column")))?;
    let mut order: Vec<String> = Vec::new();
    let mut series: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
    for row in &table.rows {
        let (Cell::Str(m), Cell::Num(v)) = (&row[mi], &row[vi]) else { continue };
        if !order.contains(m) {
            order.push(m.clone());
        }
        series.entry(m.clone()).or_default().push(*v);
    }
    Ok(order.into_iter().map(|m| { let v = series.remove(&m).unwrap_or_default(); (m, v) }).collect())
}

fn method_means(table: &ResultTable, value_col: &str) -> Result<Vec<(String, f64)>> {
    Ok(method_series(table, value_col)?
        .into_iter()
        .map(|(m, vals)| {
            let finite: Vec<f64> = vals.into_iter().filter(|v| v.is_finite()).collect();
            let mean = if finite.is_empty() {
                f64::NAN
            } else {
                finite.iter().sum::<f64>() / finite.len() as f64
            };
            (m, mean)
        })
        .collect())
}

/// Render the case's figures into `out_dir` and return the paths written.
/// The extended-target overlay needs the per-seed `detail` alongside the
/// table.
pub fn emit_plots(
    table: &ResultTable,
    case: Case,
    detail: Option<&ExtTargetDetail>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut write = |name: &str, content: String| -> Result<()> {
        let path = out_dir.join(name);
        std::fs::write(&path, content)?;
        written.push(path);
        Ok(())
    };

    match case {
        Case::Selection => {
            for (col, title) in [
                ("sum_se", "sum spectral efficiency (bits/s/Hz)"),
                ("sensing_sinr_db", "sensing SINR (dB)"),
                ("wpt_energy_j", "harvested energy (J)"),
            ] {
                let data = method_means(table, col)?;
                write(&format!("selection_{col}.svg"), bar_chart(title, title, &data))?;
            }
        }
        Case::Delivery => {
            let delays = method_series(table, "mean_delay_ms")?;
            write(
                "delivery_delay.svg",
                ecdf_chart("delivery delay across seeds", "mean delay (ms)", &delays),
            )?;
            let rates = method_means(table, "success_rate")?;
            write("delivery_success.svg", bar_chart("delivery success rate", "success rate", &rates))?;
        }
        Case::ExtTarget => {
            let detail = detail.ok_or_else(|| {
                Error::ContractViolation(
                    "extended-target plots need the contour detail (detail.json)".into(),
                )
            })?;
            write("exttarget_contour.svg", contour_overlay(detail))?;
        }
    }
    Ok(written)
}
