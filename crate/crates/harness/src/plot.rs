//! Hand-written SVG: vector-field quivers and log-x error curves.

use std::fmt::Write as _;

use paetex::metrics::ErrorRow;
use paetex::DisplacementField;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn arrow(out: &mut String, x: f64, y: f64, dx: f64, dy: f64, color: &str) {
    let (x2, y2) = (x + dx, y + dy);
    let len = dx.hypot(dy);
    let _ = write!(
        out,
        r#"<line x1="{x:.2}" y1="{y:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{color}" stroke-width="1"/>"#
    );
    if len > 1.0 {
        let (ux, uy) = (dx / len, dy / len);
        let head = (0.3 * len).min(4.0);
        let (lx, ly) = (x2 - head * (ux - 0.5 * uy), y2 - head * (uy + 0.5 * ux));
        let (rx, ry) = (x2 - head * (ux + 0.5 * uy), y2 - head * (uy - 0.5 * ux));
        let _ = write!(
            out,
            r#"<polygon points="{x2:.2},{y2:.2} {lx:.2},{ly:.2} {rx:.2},{ry:.2}" fill="{color}"/>"#
        );
    }
    out.push('\n');
}

/// Estimated field `u` (red) over the ground truth `u0` (gray) on a regular
/// subsample; image row 0 is drawn at the bottom.
pub fn quiver(title: &str, u: &DisplacementField, u0: &DisplacementField, support: Option<&[bool]>) -> String {
    let grid = u.grid;
    let (w, h) = (grid.width, grid.height);
    let step = (w.max(h) / 32).max(1);
    let margin = 30.0;
    let cell = ((WIDTH - 2.0 * margin) / w as f64).min((HEIGHT - 2.0 * margin) / h as f64);
    let mut peak: f64 = 0.0;
    for k in 0..grid.len() {
        peak = peak.max(u.magnitude(k)).max(u0.magnitude(k));
    }
    let arrow_scale = if peak > 0.0 { 0.9 * step as f64 * cell / peak } else { 0.0 };
    let mut out = String::new();
    header(&mut out, WIDTH, HEIGHT);
    let _ = writeln!(out, r#"<text x="{margin}" y="18">{} (arrows scaled by {:.3} px per px)</text>"#, escape(title), arrow_scale / cell);
    let (ox, oy) = (margin, margin + h as f64 * cell);
    if let Some(mask) = support {
        let _ = writeln!(out, r##"<g fill="#e8e8e8">"##);
        for j in 0..h {
            for i in 0..w {
                if mask[grid.index(i, j)] {
                    let _ = write!(
                        out,
                        r#"<rect x="{:.2}" y="{:.2}" width="{cell:.2}" height="{cell:.2}"/>"#,
                        ox + i as f64 * cell,
                        oy - (j + 1) as f64 * cell
                    );
                }
            }
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(
        out,
        r#"<rect x="{ox}" y="{margin}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        w as f64 * cell,
        h as f64 * cell
    );
    for j in (step / 2..h).step_by(step) {
        for i in (step / 2..w).step_by(step) {
            let k = grid.index(i, j);
            let (x, y) = (ox + (i as f64 + 0.5) * cell, oy - (j as f64 + 0.5) * cell);
            let [gx, gy] = u0.at(k);
            arrow(&mut out, x, y, gx * arrow_scale, -gy * arrow_scale, "#888888");
            let [ex, ey] = u.at(k);
            arrow(&mut out, x, y, ex * arrow_scale, -ey * arrow_scale, "#d62728");
        }
    }
    out.push_str("</svg>\n");
    out
}

struct Axes {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    lx: (f64, f64),
    ly: (f64, f64),
}

impl Axes {
    fn px(&self, lambda: f64) -> f64 {
        self.x0 + (lambda.log10() - self.lx.0) / (self.lx.1 - self.lx.0) * self.w
    }

    fn py(&self, v: f64) -> f64 {
        self.y0 + self.h - (v - self.ly.0) / (self.ly.1 - self.ly.0) * self.h
    }
}

/// `log10 λ` range shown on the x axis; always covers `[0.5, 2.5]`.
pub fn x_range(lambdas: impl IntoIterator<Item = f64>) -> (f64, f64) {
    lambdas
        .into_iter()
        .fold((0.5, 2.5), |(a, b), l| (a.min(l.log10()), b.max(l.log10())))
}

fn panel(out: &mut String, axes: &Axes, ylabel: &str, series: &[(&str, Vec<(f64, f64)>)]) {
    let Axes { x0, y0, w, h, .. } = *axes;
    let _ = writeln!(out, r#"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="black"/>"#);
    let (a, b) = axes.lx;
    let mut e = a.ceil() as i32;
    while e as f64 <= b + 1e-9 {
        let x = axes.px(10f64.powi(e));
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{e}</text>"##,
            y0 + h,
            y0 + h + 14.0
        );
        e += 1;
    }
    for (x, label) in [(a, format!("10^{a}")), (b, format!("10^{b}"))] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{label}</text>"#,
            axes.px(10f64.powf(x)),
            y0 + h + 26.0
        );
    }
    for t in 0..=4 {
        let v = axes.ly.0 + (axes.ly.1 - axes.ly.0) * t as f64 / 4.0;
        let y = axes.py(v);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            x0 - 4.0,
            y + 4.0
        );
    }
    let _ = writeln!(out, r#"<text x="{x0}" y="{:.2}">{ylabel}</text>"#, y0 - 6.0);
    for (s, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|(l, v)| format!("{:.2},{:.2}", axes.px(*l), axes.py(*v)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
            x0 + w + 8.0,
            y0 + 14.0 * (s + 1) as f64,
            escape(name)
        );
    }
}

fn y_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-9);
    ((lo - pad).max(0.0), hi + pad)
}

/// AAE and AEE against `λ` on a log axis, one curve per mode.
pub fn curves(title: &str, rows: &[&ErrorRow]) -> String {
    let mut modes: Vec<&str> = Vec::new();
    for r in rows {
        if !modes.contains(&r.mode.as_str()) {
            modes.push(&r.mode);
        }
    }
    let lx = x_range(rows.iter().map(|r| r.lambda));
    let pick = |f: fn(&ErrorRow) -> f64| -> Vec<(&str, Vec<(f64, f64)>)> {
        modes
            .iter()
            .map(|m| {
                let mut pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|r| r.mode == *m)
                    .map(|r| (r.lambda, f(r)))
                    .collect();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                (*m, pts)
            })
            .collect()
    };
    let mut out = String::new();
    let height = 2.0 * 260.0 + 40.0;
    header(&mut out, WIDTH + 120.0, height);
    let _ = writeln!(out, r#"<text x="60" y="18">{}</text>"#, escape(title));
    for (k, (label, f)) in [
        ("AAE [rad]", (|r: &ErrorRow| r.aae) as fn(&ErrorRow) -> f64),
        ("AEE [px]", |r: &ErrorRow| r.aee),
    ]
    .into_iter()
    .enumerate()
    {
        let series = pick(f);
        let axes = Axes {
            x0: 70.0,
            y0: 40.0 + 260.0 * k as f64,
            w: WIDTH - 100.0,
            h: 200.0,
            lx,
            ly: y_range(series.iter().flat_map(|(_, p)| p.iter().map(|(_, v)| *v))),
        };
        panel(&mut out, &axes, label, &series);
    }
    out.push_str("</svg>\n");
    out
}
