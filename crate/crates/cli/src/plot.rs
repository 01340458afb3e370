//! Minimal static SVG line plots with optional confidence bands. Plots are
//! derived purely from already-written result tables; the numerical pipeline
//! never depends on rendering.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: [&str; 4] = ["#1f6fb2", "#c44e52", "#55a868", "#8172b2"];

#[derive(Debug, Clone, Default)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Lower/upper band (confidence interval), same length as x when present.
    pub band: Option<(Vec<f64>, Vec<f64>)>,
}

pub struct PlotSpec<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| (hi - lo) / s <= count as f64)
        .unwrap_or(raw);
    let start = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = start;
    while t <= hi + step * 1e-9 {
        ticks.push(t);
        t += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s.is_empty() { "0".into() } else { s.into() }
    }
}

/// Render a line plot (with optional CI bands) to an SVG string.
pub fn render(spec: &PlotSpec<'_>, series: &[Series]) -> String {
    let tx = |v: f64| if spec.log_x { v.log10() } else { v };
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for s in series {
        for &x in &s.x {
            x_lo = x_lo.min(tx(x));
            x_hi = x_hi.max(tx(x));
        }
        for &y in &s.y {
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
        if let Some((lo, hi)) = &s.band {
            for &v in lo {
                y_lo = y_lo.min(v);
            }
            for &v in hi {
                y_hi = y_hi.max(v);
            }
        }
    }
    if !x_lo.is_finite() {
        x_lo = 0.0;
        x_hi = 1.0;
    }
    if !y_lo.is_finite() {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if x_hi - x_lo < 1e-12 {
        x_hi = x_lo + 1.0;
    }
    let pad = ((y_hi - y_lo) * 0.06).max(1e-12);
    y_lo -= pad;
    y_hi += pad;

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |x: f64| MARGIN_L + (tx(x) - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| MARGIN_T + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = write!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"##
    );
    let _ = write!(
        svg,
        r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/><text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"##,
        WIDTH / 2.0,
        xml_escape(spec.title)
    );

    // Axes and ticks.
    let _ = write!(
        svg,
        r##"<g stroke="#333" stroke-width="1"><line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{l}" y1="{t}" x2="{l}" y2="{b}"/></g>"##,
        l = MARGIN_L,
        r = WIDTH - MARGIN_R,
        t = MARGIN_T,
        b = HEIGHT - MARGIN_B
    );
    for tick in nice_ticks(x_lo, x_hi, 7) {
        let x = MARGIN_L + (tick - x_lo) / (x_hi - x_lo) * plot_w;
        let label = if spec.log_x {
            fmt_tick(10f64.powf(tick))
        } else {
            fmt_tick(tick)
        };
        let _ = write!(
            svg,
            r##"<line x1="{x}" y1="{b}" x2="{x}" y2="{b2}" stroke="#333"/><text x="{x}" y="{ty}" font-family="sans-serif" font-size="11" text-anchor="middle">{label}</text>"##,
            b = HEIGHT - MARGIN_B,
            b2 = HEIGHT - MARGIN_B + 5.0,
            ty = HEIGHT - MARGIN_B + 18.0,
        );
    }
    for tick in nice_ticks(y_lo, y_hi, 6) {
        let y = py(tick);
        let _ = write!(
            svg,
            r##"<line x1="{x1}" y1="{y}" x2="{x2}" y2="{y}" stroke="#333"/><line x1="{x2}" y1="{y}" x2="{xr}" y2="{y}" stroke="#eee"/><text x="{tx}" y="{ty}" font-family="sans-serif" font-size="11" text-anchor="end">{label}</text>"##,
            x1 = MARGIN_L - 5.0,
            x2 = MARGIN_L,
            xr = WIDTH - MARGIN_R,
            tx = MARGIN_L - 8.0,
            ty = y + 4.0,
            label = fmt_tick(tick),
        );
    }
    let _ = write!(
        svg,
        r##"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"##,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        xml_escape(spec.x_label)
    );
    let _ = write!(
        svg,
        r##"<text x="16" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"##,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        xml_escape(spec.y_label)
    );

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if let Some((lo, hi)) = &s.band {
            let mut d = String::new();
            for (i, (&x, &v)) in s.x.iter().zip(lo).enumerate() {
                let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, px(x), py(v));
            }
            for (&x, &v) in s.x.iter().zip(hi).rev() {
                let _ = write!(d, "L{:.2},{:.2} ", px(x), py(v));
            }
            d.push('Z');
            let _ = write!(
                svg,
                r##"<path d="{d}" fill="{color}" fill-opacity="0.15" stroke="none"/>"##
            );
        }
        let mut points = String::new();
        for (&x, &y) in s.x.iter().zip(&s.y) {
            let _ = write!(points, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = write!(
            svg,
            r##"<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.8"/>"##
        );
        for (&x, &y) in s.x.iter().zip(&s.y) {
            let _ = write!(
                svg,
                r##"<circle cx="{:.2}" cy="{:.2}" r="2.4" fill="{color}"/>"##,
                px(x),
                py(y)
            );
        }
        // Legend entry.
        let ly = MARGIN_T + 14.0 + 16.0 * idx as f64;
        let _ = write!(
            svg,
            r##"<line x1="{x1}" y1="{ly}" x2="{x2}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{tx}" y="{ty}" font-family="sans-serif" font-size="12">{label}</text>"##,
            x1 = WIDTH - MARGIN_R - 150.0,
            x2 = WIDTH - MARGIN_R - 125.0,
            tx = WIDTH - MARGIN_R - 118.0,
            ty = ly + 4.0,
            label = xml_escape(&s.label),
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_wellformed_svg() {
        let s = Series {
            label: "frac".into(),
            x: vec![50.0, 200.0, 1000.0],
            y: vec![0.8, 0.9, 0.99],
            band: Some((vec![0.75, 0.85, 0.97], vec![0.85, 0.95, 1.0])),
        };
        let svg = render(
            &PlotSpec {
                title: "consistency",
                x_label: "n",
                y_label: "fraction",
                log_x: true,
            },
            &[s],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn ticks_cover_the_range() {
        let ticks = nice_ticks(0.0, 1.0, 5);
        assert!(ticks.first().copied().unwrap() >= 0.0);
        assert!(ticks.last().copied().unwrap() <= 1.0 + 1e-9);
        assert!(ticks.len() >= 3);
    }
}
