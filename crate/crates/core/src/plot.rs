//! Minimal SVG line plots of trajectories, one 800×200 panel per manifest
//! component.

use std::fmt::Write;

use crate::behavior::Trajectory;

pub const PANEL_WIDTH: f64 = 800.0;
pub const PANEL_HEIGHT: f64 = 200.0;

const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 36.0;

/// Renders every component of `traj` against the step index.
pub fn trajectory_svg(traj: &Trajectory, title: &str) -> String {
    let m = traj.inputs();
    let names: Vec<String> = (1..=m)
        .map(|i| format!("u{i}"))
        .chain((1..=traj.outputs()).map(|i| format!("y{i}")))
        .collect();
    let steps: Vec<f64> = (0..traj.len()).map(|i| (traj.start_time() + i as i64) as f64).collect();
    let total_height = PANEL_HEIGHT * names.len() as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
        w = PANEL_WIDTH,
        h = total_height
    );
    let _ = writeln!(svg, "<title>{}</title>", escape(title));
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (row, name) in names.iter().enumerate() {
        let values: Vec<f64> = traj.samples().row(row).iter().copied().collect();
        panel(&mut svg, row as f64 * PANEL_HEIGHT, name, &steps, &values);
    }
    svg.push_str("</svg>\n");
    svg
}

fn panel(svg: &mut String, y0: f64, name: &str, steps: &[f64], values: &[f64]) {
    let plot_w = PANEL_WIDTH - LEFT - RIGHT;
    let plot_h = PANEL_HEIGHT - TOP - BOTTOM;
    let (x_min, x_max) = range(steps);
    let (v_min, v_max) = range(values);
    let sx = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |v: f64| y0 + TOP + (v_max - v) / (v_max - v_min) * plot_h;

    let _ = writeln!(svg, r#"<g class="panel" id="panel-{name}">"#);
    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{:.2}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#888"/>"##,
        y0 + TOP
    );
    if v_min < 0.0 && v_max > 0.0 {
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ccc" stroke-dasharray="4 3"/>"##,
            LEFT + plot_w,
            y = sy(0.0)
        );
    }
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="13">{name}</text>"#, LEFT, y0 + TOP - 8.0);
    for (v, anchor_y) in [(v_max, sy(v_max) + 4.0), (v_min, sy(v_min))] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{anchor_y:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            tick_label(v)
        );
    }
    for x in ticks(x_min, x_max) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(x),
            y0 + TOP + plot_h + 14.0,
            x as i64
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">step k</text>"#,
        LEFT + plot_w / 2.0,
        y0 + PANEL_HEIGHT - 4.0
    );
    let points: Vec<String> = steps
        .iter()
        .zip(values)
        .map(|(&x, &v)| format!("{:.2},{:.2}", sx(x), sy(v)))
        .collect();
    let _ = writeln!(
        svg,
        r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="1.5" points="{}"/>"##,
        points.join(" ")
    );
    svg.push_str("</g>\n");
}

fn range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
        let pad = hi.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|f| f * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
        .max(1.0);
    let mut out = Vec::new();
    let mut x = (lo / step).ceil() * step;
    while x <= hi + 1e-9 {
        out.push(x);
        x += step;
    }
    out
}

fn tick_label(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
