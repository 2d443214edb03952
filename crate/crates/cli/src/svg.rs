//! Static SVG scatter plot with the Pareto step curve and the area under it.

use std::fmt::Write;

use morphcx::stats::ParetoCurve;

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

pub struct Labeled<'a> {
    pub label: &'a str,
    pub x: f64,
    pub y: f64,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// A tick step of 1, 2 or 5 times a power of ten giving about five ticks.
fn tick_step(max: f64) -> f64 {
    let raw = max / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

/// Multiples of `step` up to `max`, rounded so labels print cleanly.
fn ticks(step: f64, max: f64) -> impl Iterator<Item = f64> {
    (0..)
        .map(move |k| (k as f64 * step * 1e6).round() / 1e6)
        .take_while(move |&t| t <= max)
}

pub fn pareto_svg(title: &str, comment: &str, points: &[Labeled], curve: &ParetoCurve) -> String {
    let max_x = points.iter().map(|p| p.x).fold(curve.max_x(), f64::max).max(1e-9) * 1.05;
    let max_y = points.iter().map(|p| p.y).fold(0.0, f64::max).max(1e-9) * 1.1;
    let sx = |x: f64| LEFT + x / max_x * (W - LEFT - RIGHT);
    let sy = |y: f64| H - BOTTOM - y / max_y * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, "<!-- {} -->", escape(comment).replace("--", "- -"));
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        W / 2.0,
        escape(title)
    );

    // shaded region under the step curve, then the curve itself
    let frontier = curve.frontier();
    let mut poly = vec![(sx(0.0), sy(0.0))];
    let mut path = String::new();
    let mut prev_x = 0.0;
    for (k, &(x, y)) in frontier.iter().enumerate() {
        poly.push((sx(prev_x), sy(y)));
        poly.push((sx(x), sy(y)));
        if k == 0 {
            let _ = write!(path, "M{:.2},{:.2}", sx(0.0), sy(y));
        } else {
            let _ = write!(path, " V{:.2}", sy(y));
        }
        let _ = write!(path, " H{:.2}", sx(x));
        prev_x = x;
    }
    let _ = write!(path, " V{:.2}", sy(0.0));
    poly.push((sx(prev_x), sy(0.0)));
    let pts: Vec<String> = poly.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        s,
        r##"<polygon class="area" points="{}" fill="#9b59b6" fill-opacity="0.2" stroke="none"/>"##,
        pts.join(" ")
    );
    let _ = writeln!(
        s,
        r##"<path class="pareto" d="{path}" fill="none" stroke="#8e44ad" stroke-width="2"/>"##
    );

    // axes
    let (x0, y0) = (sx(0.0), sy(0.0));
    let _ = writeln!(
        s,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="black"/>"#,
        W - RIGHT
    );
    let _ = writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{TOP:.2}" stroke="black"/>"#);
    let step = tick_step(max_x);
    for t in ticks(step, max_x) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            t
        );
    }
    let step = tick_step(max_y);
    for t in ticks(step, max_y) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x0:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0,
            t
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13">e-complexity (paradigm size)</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 18.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {:.2})">i-complexity (bits)</text>"#,
        (TOP + H - BOTTOM) / 2.0,
        (TOP + H - BOTTOM) / 2.0
    );

    for p in points {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#2c3e50"><title>{} ({}, {})</title></circle>"##,
            sx(p.x),
            sy(p.y),
            escape(p.label),
            p.x,
            p.y
        );
    }
    s.push_str("</svg>\n");
    s
}
