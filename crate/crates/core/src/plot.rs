//! Static SVG renderings: heatmaps of Wigner functions and sinograms, and
//! line plots of tables. Output is plain text and fully deterministic.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::io::Table;
use crate::phase_space::WignerGrid;
use crate::reconstruction::Sinogram;

const WIDTH: f64 = 600.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 40.0;
const PLOT_W: f64 = 400.0;
const PLOT_H: f64 = 380.0;
/// Cells per axis in heatmaps; finer grids are subsampled.
const MAX_CELLS: usize = 100;
const PALETTE: [&str; 6] = ["#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#6a4c93", "#3a3a3a"];

/// Radius of the vacuum Wigner function's `1/√e` contour.
pub const VACUUM_CONTOUR_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Markers,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub style: Style,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * PLOT_W
    }
    fn py(&self, y: f64) -> f64 {
        TOP + PLOT_H - (y - self.y0) / (self.y1 - self.y0) * PLOT_H
    }
}

fn nice_step(range: f64) -> f64 {
    let raw = range / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open_svg(title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + PLOT_W / 2.0,
        escape(title)
    )
    .unwrap();
    s
}

fn axes(s: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{PLOT_W}" height="{PLOT_H}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for t in ticks(f.x0, f.x1) {
        let x = f.px(t);
        writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            TOP + PLOT_H,
            TOP + PLOT_H + 5.0,
            TOP + PLOT_H + 18.0,
            fmt_tick(t)
        )
        .unwrap();
    }
    for t in ticks(f.y0, f.y1) {
        let y = f.py(t);
        writeln!(
            s,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            fmt_tick(t)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + PLOT_W / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + PLOT_H / 2.0,
        TOP + PLOT_H / 2.0,
        escape(y_label)
    )
    .unwrap();
}

/// Diverging colour: blue for negative, white at zero, red for positive.
fn colour(v: f64, vmax: f64) -> String {
    let t = if vmax > 0.0 { (v / vmax).clamp(-1.0, 1.0) } else { 0.0 };
    let (r, g, b) = if t >= 0.0 {
        (178.0, 24.0, 43.0)
    } else {
        (33.0, 102.0, 172.0)
    };
    let a = t.abs();
    let mix = |c: f64| (255.0 + (c - 255.0) * a).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(r), mix(g), mix(b))
}

/// `rows[j][i]` on `x ∈ [x0, x1]`, `y ∈ [y0, y1]` (row 0 at `y0`).
fn heatmap_body(s: &mut String, f: &Frame, rows: &[&[f64]]) {
    let ny = rows.len();
    let nx = rows[0].len();
    let vmax = rows.iter().flat_map(|r| r.iter()).fold(0.0_f64, |m, v| m.max(v.abs()));
    let sx = nx.div_ceil(MAX_CELLS).max(1);
    let sy = ny.div_ceil(MAX_CELLS).max(1);
    let cols: Vec<usize> = (0..nx).step_by(sx).collect();
    let lines: Vec<usize> = (0..ny).step_by(sy).collect();
    let cw = PLOT_W / cols.len() as f64;
    let ch = PLOT_H / lines.len() as f64;
    for (jj, &j) in lines.iter().enumerate() {
        for (ii, &i) in cols.iter().enumerate() {
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                LEFT + ii as f64 * cw,
                TOP + PLOT_H - (jj + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                colour(rows[j][i], vmax)
            )
            .unwrap();
        }
    }
    let _ = f;
}

/// Heatmap of a Wigner function, optionally with the dashed vacuum contour
/// (`Δx_vac = 0.5`) for scale.
pub fn wigner_svg(w: &WignerGrid<f64>, title: &str, vacuum_contour: bool) -> String {
    let e = w.extent();
    let f = Frame {
        x0: e.x_min,
        x1: e.x_max,
        y0: e.p_min,
        y1: e.p_max,
    };
    let mut s = open_svg(title);
    let rows: Vec<&[f64]> = w.values().chunks(w.nx()).collect();
    heatmap_body(&mut s, &f, &rows);
    if vacuum_contour {
        let rx = VACUUM_CONTOUR_RADIUS / (f.x1 - f.x0) * PLOT_W;
        let ry = VACUUM_CONTOUR_RADIUS / (f.y1 - f.y0) * PLOT_H;
        writeln!(
            s,
            r#"<ellipse cx="{:.2}" cy="{:.2}" rx="{rx:.2}" ry="{ry:.2}" fill="none" stroke="black" stroke-width="1.2" stroke-dasharray="4 3"/>"#,
            f.px(0.0),
            f.py(0.0)
        )
        .unwrap();
    }
    axes(&mut s, &f, "x", "p");
    s.push_str("</svg>\n");
    s
}

/// Heatmap of a sinogram, phase on the vertical axis.
pub fn sinogram_svg(sino: &Sinogram<f64>, title: &str) -> String {
    let x = sino.x_grid();
    let ph = sino.phases();
    let f = Frame {
        x0: x[0],
        x1: x[x.len() - 1],
        y0: ph[0],
        y1: if ph.len() > 1 { ph[ph.len() - 1] } else { ph[0] + 1.0 },
    };
    let mut s = open_svg(title);
    let rows: Vec<&[f64]> = sino.rows().iter().map(|r| r.as_slice()).collect();
    heatmap_body(&mut s, &f, &rows);
    axes(&mut s, &f, "x_θ", "θ (rad)");
    s.push_str("</svg>\n");
    s
}

pub fn line_plot_svg(plot: &LinePlot) -> Result<String> {
    let finite = |v: &f64| v.is_finite();
    let xs: Vec<f64> = plot
        .series
        .iter()
        .flat_map(|s| s.x.iter().copied())
        .filter(finite)
        .collect();
    let ys: Vec<f64> = plot
        .series
        .iter()
        .flat_map(|s| s.y.iter().copied())
        .filter(finite)
        .collect();
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Empty("nothing to plot"));
    }
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            let pad = 0.04 * (hi - lo);
            (lo - pad, hi + pad)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let f = Frame { x0, x1, y0, y1 };
    let mut s = open_svg(&plot.title);
    axes(&mut s, &f, &plot.x_label, &plot.y_label);
    for (k, series) in plot.series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = series
            .x
            .iter()
            .zip(&series.y)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| (f.px(x), f.py(y)))
            .collect();
        match series.style {
            Style::Markers => {
                for (x, y) in &pts {
                    writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{colour}"/>"#).unwrap();
                }
            }
            Style::Line | Style::Dashed => {
                let dash = if series.style == Style::Dashed {
                    r#" stroke-dasharray="6 4""#
                } else {
                    ""
                };
                let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}/>"#,
                    path.join(" ")
                )
                .unwrap();
            }
        }
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let lx = LEFT + PLOT_W + 10.0;
        writeln!(
            s,
            r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{colour}"/><text x="{:.1}" y="{ly:.1}">{}</text>"#,
            ly - 9.0,
            lx + 14.0,
            escape(&series.label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Plot a table. Columns named `fit…` become dashed lines. Long tables with
/// a leading `phase` column are split into one group per phase (at most
/// three: first, middle, last), plotting the third column against the second.
pub fn table_svg(table: &Table, title: &str) -> Result<String> {
    if table.is_empty() {
        return Err(Error::Empty("table has no rows"));
    }
    if table.columns.len() < 2 {
        return Err(Error::invalid("table", "need at least two columns"));
    }
    let style_for = |name: &str, n: usize| {
        if name.starts_with("fit") {
            Style::Dashed
        } else if n <= 60 {
            Style::Markers
        } else {
            Style::Line
        }
    };
    let first: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let grouped = table.columns[0] == "phase" && table.columns.len() >= 3 && first.windows(2).any(|w| w[0] == w[1]);
    let mut series = Vec::new();
    let (x_label, y_label);
    if grouped {
        let mut phases: Vec<f64> = first.clone();
        phases.dedup();
        let picks: Vec<f64> = match phases.len() {
            0 => Vec::new(),
            1..=3 => phases.clone(),
            n => vec![phases[0], phases[n / 2], phases[n - 1]],
        };
        for ph in picks {
            let rows: Vec<&Vec<f64>> = table.rows.iter().filter(|r| r[0] == ph).collect();
            for c in 2..table.columns.len() {
                let name = &table.columns[c];
                if name.ends_with("_err") {
                    continue;
                }
                series.push(Series {
                    label: format!("{name} θ={ph:.3}"),
                    x: rows.iter().map(|r| r[1]).collect(),
                    y: rows.iter().map(|r| r[c]).collect(),
                    style: style_for(name, rows.len()),
                });
            }
        }
        x_label = table.columns[1].clone();
        y_label = table.columns[2].clone();
    } else {
        for c in 1..table.columns.len() {
            let name = &table.columns[c];
            if name.ends_with("_err") {
                continue;
            }
            series.push(Series {
                label: name.clone(),
                x: first.clone(),
                y: table.rows.iter().map(|r| r[c]).collect(),
                style: style_for(name, table.rows.len()),
            });
        }
        x_label = table.columns[0].clone();
        y_label = table.columns[1].clone();
    }
    line_plot_svg(&LinePlot {
        title: title.to_string(),
        x_label,
        y_label,
        series,
    })
}
