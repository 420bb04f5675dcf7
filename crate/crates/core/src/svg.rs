//! Minimal static SVG plots: scatter and polyline panels side by side.

use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Style {
    Dots,
    Line,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub points: Vec<(f64, f64)>,
    pub style: Style,
    pub color: String,
}

#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Use one scale on both axes.
    pub equal_aspect: bool,
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 56.0;

/// Distinct colour for series `i` of `n`, hue spread evenly.
pub fn palette(i: usize, n: usize) -> String {
    let hue = 360.0 * i as f64 / n.max(1) as f64;
    let light = if i % 2 == 0 { 42 } else { 55 };
    format!("hsl({hue:.1},75%,{light}%)")
}

fn bounds(p: &Panel) -> Option<(f64, f64, f64, f64)> {
    let mut it = p
        .series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let &(x0, y0) = it.next()?;
    let (mut xl, mut xh, mut yl, mut yh) = (x0, x0, y0, y0);
    for &(x, y) in it {
        xl = xl.min(x);
        xh = xh.max(x);
        yl = yl.min(y);
        yh = yh.max(y);
    }
    let pad = |lo: f64, hi: f64| {
        let w = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
        (lo - 0.04 * w, hi + 0.04 * w)
    };
    let (mut xl, mut xh) = pad(xl, xh);
    let (mut yl, mut yh) = pad(yl, yh);
    if p.equal_aspect {
        let w = (xh - xl).max(yh - yl);
        let (cx, cy) = (0.5 * (xl + xh), 0.5 * (yl + yh));
        (xl, xh, yl, yh) = (cx - 0.5 * w, cx + 0.5 * w, cy - 0.5 * w, cy + 0.5 * w);
    }
    Some((xl, xh, yl, yh))
}

/// Roughly five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn panel(out: &mut String, p: &Panel, x_off: f64) {
    let inner = SIZE - 2.0 * MARGIN;
    let (l, t) = (x_off + MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"<rect x="{l}" y="{t}" width="{inner}" height="{inner}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        l + inner / 2.0,
        t - 16.0,
        escape(&p.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
        l + inner / 2.0,
        t + inner + 40.0,
        escape(&p.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="{0}" y="{1}" text-anchor="middle" font-size="12" transform="rotate(-90 {0} {1})">{2}</text>"#,
        l - 42.0,
        t + inner / 2.0,
        escape(&p.y_label)
    );
    let Some((xl, xh, yl, yh)) = bounds(p) else {
        return;
    };
    let sx = |x: f64| l + (x - xl) / (xh - xl) * inner;
    let sy = |y: f64| t + inner - (y - yl) / (yh - yl) * inner;
    for v in ticks(xl, xh) {
        let _ = writeln!(
            out,
            r#"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2}" stroke="black"/><text x="{0:.2}" y="{3}" text-anchor="middle" font-size="10">{4}</text>"#,
            sx(v),
            t + inner,
            t + inner + 4.0,
            t + inner + 16.0,
            fmt_tick(v)
        );
    }
    for v in ticks(yl, yh) {
        let _ = writeln!(
            out,
            r#"<line x1="{0}" y1="{2:.2}" x2="{1}" y2="{2:.2}" stroke="black"/><text x="{3}" y="{4:.2}" text-anchor="end" font-size="10">{5}</text>"#,
            l - 4.0,
            l,
            sy(v),
            l - 6.0,
            sy(v) + 3.0,
            fmt_tick(v)
        );
    }
    for s in &p.series {
        let pts = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite());
        match s.style {
            Style::Dots => {
                let _ = writeln!(out, r#"<g fill="{}">"#, s.color);
                for &(x, y) in pts {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="0.8"/>"#,
                        sx(x),
                        sy(y)
                    );
                }
                out.push_str("</g>\n");
            }
            Style::Line => {
                let coords: Vec<String> = pts
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{}" stroke-width="0.6" points="{}"/>"#,
                    s.color,
                    coords.join(" ")
                );
            }
        }
    }
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Render the panels left to right into one SVG document.
pub fn render(panels: &[Panel]) -> String {
    let width = SIZE * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{SIZE}" viewBox="0 0 {width} {SIZE}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, "<!-- quadtrap {} -->", env!("CARGO_PKG_VERSION"));
    out.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    out.push('\n');
    for (i, p) in panels.iter().enumerate() {
        panel(&mut out, p, i as f64 * SIZE);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round_and_inside() {
        let t = ticks(-0.13, 0.47);
        let want = [0.0, 0.2, 0.4];
        assert_eq!(t.len(), want.len());
        for (a, b) in t.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(ticks(1.0, 1.0), vec![1.0]);
    }

    #[test]
    fn render_counts_points() {
        let p = Panel {
            title: "a < b".into(),
            series: vec![
                Series {
                    points: vec![(0.0, 0.0), (1.0, 1.0)],
                    style: Style::Dots,
                    color: palette(0, 2),
                },
                Series {
                    points: vec![(0.0, 1.0), (1.0, 0.0), (f64::NAN, 0.0)],
                    style: Style::Line,
                    color: palette(1, 2),
                },
            ],
            ..Panel::default()
        };
        let s = render(&[p.clone(), p]);
        assert_eq!(s.matches("<circle").count(), 4);
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains("a &lt; b"));
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
    }

    #[test]
    fn empty_panel_still_renders() {
        let s = render(&[Panel::default()]);
        assert!(!s.contains("<circle"));
    }
}
