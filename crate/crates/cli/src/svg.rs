//! Minimal SVG charts drawn from the CSV data.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 50.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Frame {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it
                .filter(|v| v.is_finite())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        Frame {
            x: span(&mut xs.clone()),
            y: span(&mut ys.clone()),
        }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD)
    }
}

fn header(out: &mut String, title: &str, xlabel: &str, ylabel: &str, f: &Frame) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>
<line x1="{PAD}" y1="{}" x2="{}" y2="{}" stroke="black"/>
<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>
<text x="{PAD}" y="{}" text-anchor="middle">{:.3}</text>
<text x="{}" y="{}" text-anchor="middle">{:.3}</text>
<text x="{}" y="{}" text-anchor="end">{:.3}</text>
<text x="{}" y="{}" text-anchor="end">{:.3}</text>
"#,
        W / 2.0,
        escape(title),
        H - PAD,
        W - PAD,
        H - PAD,
        H - PAD,
        W / 2.0,
        H - 12.0,
        escape(xlabel),
        H / 2.0,
        H / 2.0,
        escape(ylabel),
        H - PAD + 15.0,
        f.x.0,
        W - PAD,
        H - PAD + 15.0,
        f.x.1,
        PAD - 4.0,
        H - PAD,
        f.y.0,
        PAD - 4.0,
        PAD + 4.0,
        f.y.1,
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scatter plot with an optional `y = x` reference line.
pub fn scatter(points: &[(f64, f64)], title: &str, xlabel: &str, ylabel: &str, diagonal: bool) -> String {
    let f = Frame::fit(points.iter().map(|p| p.0), points.iter().map(|p| p.1));
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel, &f);
    if diagonal {
        let lo = f.x.0.max(f.y.0);
        let hi = f.x.1.min(f.y.1);
        if lo < hi {
            let _ = writeln!(
                out,
                r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="gray" stroke-dasharray="4"/>"#,
                f.px(lo),
                f.py(lo),
                f.px(hi),
                f.py(hi)
            );
        }
    }
    for &(x, y) in points {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.1}" cy="{:.1}" r="2" fill="steelblue" fill-opacity="0.6"/>"#,
            f.px(x),
            f.py(y)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Connected line through `points`.
pub fn line(points: &[(f64, f64)], title: &str, xlabel: &str, ylabel: &str) -> String {
    let f = Frame::fit(points.iter().map(|p| p.0), points.iter().map(|p| p.1));
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel, &f);
    let path: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.1},{:.1}", f.px(x), f.py(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        path.join(" ")
    );
    out.push_str("</svg>\n");
    out
}

/// Histogram of `(bin_lo, bin_hi, count)` bars.
pub fn histogram(bins: &[(f64, f64, u64)], title: &str, xlabel: &str) -> String {
    let f = Frame::fit(
        bins.iter().flat_map(|b| [b.0, b.1]),
        bins.iter().map(|b| b.2 as f64).chain(std::iter::once(0.0)),
    );
    let mut out = String::new();
    header(&mut out, title, xlabel, "count", &f);
    for &(lo, hi, n) in bins {
        let (x0, x1) = (f.px(lo), f.px(hi));
        let (y0, y1) = (f.py(n as f64), f.py(0.0));
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="steelblue" stroke="white"/>"#,
            x0,
            y0,
            (x1 - x0).max(0.5),
            y1 - y0
        );
    }
    out.push_str("</svg>\n");
    out
}
