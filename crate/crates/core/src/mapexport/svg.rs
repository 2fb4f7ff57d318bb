//! SVG rendering of winner maps.
//!
//! One grid cell is 40 user units with the origin at the top left. Each
//! (node, class) pair with hits gets one glyph whose *area* is proportional to
//! its count. Classes are told apart by shape (up to eight) and color.

use std::f64::consts::PI;
use std::fmt::Write;

use super::MapSnapshot;
use crate::error::{Error, Result};

const CELL: f64 = 40.0;
const MARGIN: f64 = 20.0;
const LEGEND_WIDTH: f64 = 170.0;
/// Largest glyph: a circle of diameter 0.8 cells.
const MAX_AREA: f64 = PI * (0.4 * CELL) * (0.4 * CELL);
const STACK_OFFSET: f64 = 0.18 * CELL;

const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Glyph {
    Circle,
    Square,
    Diamond,
    TriangleUp,
    TriangleDown,
    Pentagon,
    Hexagon,
    TriangleRight,
}

impl Glyph {
    const ALL: [Glyph; 8] = [
        Glyph::Circle,
        Glyph::Square,
        Glyph::Diamond,
        Glyph::TriangleUp,
        Glyph::TriangleDown,
        Glyph::Pentagon,
        Glyph::Hexagon,
        Glyph::TriangleRight,
    ];

    fn name(self) -> &'static str {
        match self {
            Glyph::Circle => "circle",
            Glyph::Square => "square",
            Glyph::Diamond => "diamond",
            Glyph::TriangleUp => "triangle-up",
            Glyph::TriangleDown => "triangle-down",
            Glyph::Pentagon => "pentagon",
            Glyph::Hexagon => "hexagon",
            Glyph::TriangleRight => "triangle-right",
        }
    }

    /// (vertex count, angle of the first vertex in degrees); `None` for circles.
    fn polygon(self) -> Option<(usize, f64)> {
        match self {
            Glyph::Circle => None,
            Glyph::Square => Some((4, 45.0)),
            Glyph::Diamond => Some((4, 0.0)),
            Glyph::TriangleUp => Some((3, -90.0)),
            Glyph::TriangleDown => Some((3, 90.0)),
            Glyph::Pentagon => Some((5, -90.0)),
            Glyph::Hexagon => Some((6, 0.0)),
            Glyph::TriangleRight => Some((3, 0.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    pub title: Option<String>,
    pub legend: bool,
    pub grid_lines: bool,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            title: None,
            legend: true,
            grid_lines: true,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn color(class: usize, num_classes: usize) -> String {
    if num_classes <= PALETTE.len() {
        PALETTE[class].to_string()
    } else {
        let hue = 360.0 * class as f64 / num_classes as f64;
        format!("hsl({hue:.1},70%,45%)")
    }
}

fn glyph_for(class: usize, num_classes: usize) -> Glyph {
    if num_classes <= Glyph::ALL.len() {
        Glyph::ALL[class]
    } else {
        Glyph::Circle
    }
}

/// Shape element of the given area centered on (cx, cy).
fn shape(out: &mut String, glyph: Glyph, cx: f64, cy: f64, area: f64, fill: &str, attrs: &str) {
    match glyph.polygon() {
        None => {
            let r = (area / PI).sqrt();
            let _ = write!(
                out,
                r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{r:.3}" fill="{fill}"{attrs}/>"#
            );
        }
        Some((n, start)) => {
            let nf = n as f64;
            let radius = (2.0 * area / (nf * (2.0 * PI / nf).sin())).sqrt();
            let points: Vec<String> = (0..n)
                .map(|i| {
                    let a = (start + 360.0 * i as f64 / nf).to_radians();
                    format!("{:.3},{:.3}", cx + radius * a.cos(), cy + radius * a.sin())
                })
                .collect();
            let _ = write!(out, r#"<polygon points="{}" fill="{fill}"{attrs}/>"#, points.join(" "));
        }
    }
}

/// Renders the snapshot as a standalone SVG 1.1 document.
///
/// More than eight classes fall back to colored circles.
pub fn render_svg(snapshot: &MapSnapshot, class_names: &[String], style: &SvgStyle) -> Result<String> {
    if snapshot.total_hits() == 0 {
        return Err(Error::EmptySnapshot);
    }
    Error::check_dim("class names", snapshot.num_classes, class_names.len())?;
    let k = snapshot.num_classes;
    let grid = snapshot.grid;
    let top = MARGIN + if style.title.is_some() { 24.0 } else { 0.0 };
    let map_w = grid.cols as f64 * CELL;
    let map_h = grid.rows as f64 * CELL;
    let legend_h = 24.0 * k as f64 + 16.0;
    let width = 2.0 * MARGIN + map_w + if style.legend { LEGEND_WIDTH } else { 0.0 };
    let height = top + MARGIN + if style.legend { map_h.max(legend_h) } else { map_h };

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#
    );
    if let Some(title) = &style.title {
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN:.0}" y="{:.0}" font-size="16">{}</text>"#,
            MARGIN + 8.0,
            escape(title)
        );
    }

    let _ = writeln!(
        out,
        r##"<rect class="map-frame" x="{MARGIN:.3}" y="{top:.3}" width="{map_w:.3}" height="{map_h:.3}" fill="none" stroke="#444" stroke-width="1"/>"##
    );
    if style.grid_lines {
        out.push_str("<g class=\"grid\" stroke=\"#ddd\" stroke-width=\"0.5\">\n");
        for r in 1..grid.rows {
            let y = top + r as f64 * CELL;
            let _ = writeln!(
                out,
                r#"<line x1="{MARGIN:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}"/>"#,
                MARGIN + map_w
            );
        }
        for c in 1..grid.cols {
            let x = MARGIN + c as f64 * CELL;
            let _ = writeln!(
                out,
                r#"<line x1="{x:.3}" y1="{top:.3}" x2="{x:.3}" y2="{:.3}"/>"#,
                top + map_h
            );
        }
        out.push_str("</g>\n");
    }

    let max_count = snapshot.hits.values().copied().max().unwrap_or(1) as f64;
    out.push_str("<g class=\"glyphs\" fill-opacity=\"0.85\" stroke=\"black\" stroke-width=\"0.5\">\n");
    for (coord, counts) in snapshot.node_counts() {
        let present: Vec<(usize, u64)> = counts.iter().copied().enumerate().filter(|&(_, n)| n > 0).collect();
        let cx0 = MARGIN + (coord.col as f64 + 0.5) * CELL;
        let cy = top + (coord.row as f64 + 0.5) * CELL;
        let m = present.len() as f64;
        for (i, &(class, n)) in present.iter().enumerate() {
            let cx = cx0 + (i as f64 - (m - 1.0) / 2.0) * STACK_OFFSET;
            let area = MAX_AREA * n as f64 / max_count;
            let attrs = format!(
                r#" class="glyph" data-row="{}" data-col="{}" data-class="{class}" data-hits="{n}" data-area="{area:.6}""#,
                coord.row, coord.col
            );
            shape(&mut out, glyph_for(class, k), cx, cy, area, &color(class, k), &attrs);
            out.push('\n');
        }
    }
    out.push_str("</g>\n");

    if style.legend {
        let x = MARGIN + map_w + 20.0;
        out.push_str("<g class=\"legend\" font-size=\"12\">\n");
        for (class, name) in class_names.iter().enumerate() {
            let y = top + 12.0 + 24.0 * class as f64;
            shape(
                &mut out,
                glyph_for(class, k),
                x + 8.0,
                y,
                80.0,
                &color(class, k),
                r#" class="legend-glyph" stroke="black" stroke-width="0.5""#,
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.3}" y="{:.3}">{}</text>"#,
                x + 22.0,
                y + 4.0,
                escape(name)
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

impl std::fmt::Display for Glyph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
