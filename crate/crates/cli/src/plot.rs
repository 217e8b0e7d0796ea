//! Static SVG pseudocolor plots of pressure and displacement magnitude.

use std::fmt::Write;

use porosplit_core::fem::{eval_displacement, eval_pressure};
use porosplit_core::solver::Snapshot;
use porosplit_core::{Discretization, Point};

use crate::output::OutputFile;

/// Sub-cells per cell side.
const SUB: usize = 4;
const PANEL: f64 = 320.0;
const MARGIN: f64 = 50.0;
const BAR: f64 = 14.0;

// Viridis-like anchors.
const COLORS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

fn color(v: f64) -> String {
    let x = v.clamp(0.0, 1.0) * (COLORS.len() - 1) as f64;
    let i = (x.floor() as usize).min(COLORS.len() - 2);
    let t = x - i as f64;
    let c: Vec<u8> = (0..3)
        .map(|k| (COLORS[i][k] + t * (COLORS[i + 1][k] - COLORS[i][k])).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

struct Patch {
    corners: [Point; 4],
    pressure: f64,
    displacement: f64,
}

fn patches(disc: &Discretization, snap: &Snapshot) -> Vec<Patch> {
    let sp = &disc.spaces;
    let mut out = Vec::with_capacity(disc.mesh.num_cells() * SUB * SUB);
    for cell in 0..disc.mesh.num_cells() {
        let geo = disc.mesh.geometry(cell);
        for a in 0..SUB {
            for b in 0..SUB {
                let h = 1.0 / SUB as f64;
                let (x0, y0) = (a as f64 * h, b as f64 * h);
                let mid = [x0 + 0.5 * h, y0 + 0.5 * h];
                let u = eval_displacement(&sp.displacement, &snap.displacement, cell, mid);
                out.push(Patch {
                    corners: [
                        geo.map([x0, y0]),
                        geo.map([x0 + h, y0]),
                        geo.map([x0 + h, y0 + h]),
                        geo.map([x0, y0 + h]),
                    ],
                    pressure: eval_pressure(&sp.pressure, &snap.pressure, cell, mid),
                    displacement: u[0].hypot(u[1]),
                });
            }
        }
    }
    out
}

/// Largest `|p|` and `|u|` over a uniform grid of reference points per cell,
/// cell boundaries included.
pub fn peaks(disc: &Discretization, snap: &Snapshot) -> (f64, f64) {
    let sp = &disc.spaces;
    let mut p_max: f64 = 0.0;
    let mut u_max: f64 = 0.0;
    for cell in 0..disc.mesh.num_cells() {
        for a in 0..=SUB {
            for b in 0..=SUB {
                let xi = [a as f64 / SUB as f64, b as f64 / SUB as f64];
                p_max = p_max.max(eval_pressure(&sp.pressure, &snap.pressure, cell, xi).abs());
                let u = eval_displacement(&sp.displacement, &snap.displacement, cell, xi);
                u_max = u_max.max(u[0].hypot(u[1]));
            }
        }
    }
    (p_max, u_max)
}

fn tick(v: f64) -> String {
    format!("{v:.3}")
}

struct Frame {
    x0: f64,
    lo: Point,
    scale: f64,
    height: f64,
}

impl Frame {
    fn map(&self, p: Point) -> (f64, f64) {
        (
            self.x0 + (p[0] - self.lo[0]) * self.scale,
            MARGIN + self.height - (p[1] - self.lo[1]) * self.scale,
        )
    }
}

fn panel(
    svg: &mut String,
    frame: &Frame,
    patches: &[Patch],
    value: impl Fn(&Patch) -> f64,
    title: &str,
    hi: Point,
) {
    let vmin = patches.iter().map(&value).fold(f64::INFINITY, f64::min);
    let vmax = patches.iter().map(&value).fold(f64::NEG_INFINITY, f64::max);
    let span = if vmax > vmin { vmax - vmin } else { 1.0 };
    for p in patches {
        let pts: Vec<String> = p
            .corners
            .iter()
            .map(|&c| {
                let (x, y) = frame.map(c);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let fill = color((value(p) - vmin) / span);
        let _ = writeln!(
            svg,
            r#"<polygon points="{}" fill="{fill}" stroke="{fill}" stroke-width="0.3"/>"#,
            pts.join(" ")
        );
    }
    let (x_lo, y_lo) = frame.map(frame.lo);
    let (x_hi, y_hi) = frame.map(hi);
    let _ = writeln!(
        svg,
        r#"<rect x="{x_lo:.2}" y="{y_hi:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x_hi - x_lo,
        y_lo - y_hi
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = frame.lo[0] + t * (hi[0] - frame.lo[0]);
        let yv = frame.lo[1] + t * (hi[1] - frame.lo[1]);
        let (x, _) = frame.map([xv, frame.lo[1]]);
        let (_, y) = frame.map([frame.lo[0], yv]);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y_lo:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"#,
            y_lo + 4.0,
            y_lo + 15.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x_lo:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"#,
            x_lo - 4.0,
            x_lo - 6.0,
            y + 3.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{title}</text>"#,
        (x_lo + x_hi) / 2.0,
        MARGIN - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">x</text>"#,
        (x_lo + x_hi) / 2.0,
        y_lo + 30.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">y</text>"#,
        x_lo - 40.0,
        (y_lo + y_hi) / 2.0
    );
    // Color bar.
    let bx = x_hi + 12.0;
    let steps = 32;
    for k in 0..steps {
        let h = (y_lo - y_hi) / steps as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{bx:.2}" y="{:.2}" width="{BAR}" height="{:.2}" fill="{}"/>"#,
            y_lo - (k + 1) as f64 * h,
            h + 0.2,
            color((k as f64 + 0.5) / steps as f64)
        );
    }
    for (v, y) in [(vmin, y_lo), (vmax, y_hi)] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10">{v:.3e}</text>"#,
            bx + BAR + 3.0,
            y + 3.0
        );
    }
}

/// File name for a snapshot time, e.g. `fields_0.26.svg`.
pub fn file_name(time: f64) -> String {
    let t = (time * 1e9).round() / 1e9;
    format!("fields_{t}.svg")
}

pub fn fields_svg(disc: &Discretization, snap: &Snapshot) -> OutputFile {
    let v = &disc.mesh.vertices;
    let lo = [
        v.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
        v.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min),
    ];
    let hi = [
        v.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max),
        v.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max),
    ];
    let scale = PANEL / (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let height = (hi[1] - lo[1]) * scale;
    let width = (hi[0] - lo[0]) * scale;
    let gap = 170.0;
    let total_w = 2.0 * (MARGIN + width) + gap + 30.0;
    let total_h = height + 2.0 * MARGIN + 20.0;
    let data = patches(disc, snap);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w:.0}" height="{total_h:.0}" viewBox="0 0 {total_w:.2} {total_h:.2}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let t = (snap.time * 1e9).round() / 1e9;
    let left = Frame {
        x0: MARGIN,
        lo,
        scale,
        height,
    };
    panel(
        &mut svg,
        &left,
        &data,
        |p| p.pressure,
        &format!("pressure p, t = {t}"),
        hi,
    );
    let right = Frame {
        x0: 2.0 * MARGIN + width + gap - MARGIN,
        lo,
        scale,
        height,
    };
    panel(
        &mut svg,
        &right,
        &data,
        |p| p.displacement,
        &format!("displacement |u|, t = {t}"),
        hi,
    );
    svg.push_str("</svg>\n");
    OutputFile {
        name: file_name(snap.time),
        contents: svg.into_bytes(),
    }
}
