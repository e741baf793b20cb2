//! Minimal deterministic SVG plotting.
//!
//! No external renderer: plots are assembled as strings with a fixed canvas,
//! fixed palette, and stable number formatting, so identical input series
//! produce byte-identical SVG files. Log axes silently drop points with
//! nonpositive coordinates; non-finite points are always dropped.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
const TICKS: usize = 5;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// One named series of `(x, y)` points, drawn as a polyline plus markers.
#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// A line/scatter plot.
#[derive(Clone, Debug)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Plot {
        Plot {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
        }
    }

    pub fn log_x(mut self) -> Self {
        self.log_x = true;
        self
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn with_series(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            label: label.to_string(),
            points,
        });
        self
    }

    /// Renders the SVG document. Pure function of the plot's fields.
    pub fn render(&self) -> String {
        let tx = |v: f64| if self.log_x { v.log10() } else { v };
        let ty = |v: f64| if self.log_y { v.log10() } else { v };
        let keep = |&(x, y): &(f64, f64)| {
            x.is_finite() && y.is_finite() && (!self.log_x || x > 0.0) && (!self.log_y || y > 0.0)
        };
        let kept: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| {
                s.points
                    .iter()
                    .filter(|p| keep(p))
                    .map(|&(x, y)| (tx(x), ty(y)))
                    .collect()
            })
            .collect();

        let (x_min, x_max) = padded_range(kept.iter().flatten().map(|p| p.0));
        let (y_min, y_max) = padded_range(kept.iter().flatten().map(|p| p.1));
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let px = |t: f64| MARGIN_LEFT + (t - x_min) / (x_max - x_min) * plot_w;
        let py = |t: f64| HEIGHT - MARGIN_BOTTOM - (t - y_min) / (y_max - y_min) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"24.00\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"14\">{}</text>",
            WIDTH / 2.0,
            escape(&self.title)
        );
        // Axes.
        let x0 = MARGIN_LEFT;
        let x1 = WIDTH - MARGIN_RIGHT;
        let y0 = HEIGHT - MARGIN_BOTTOM;
        let y1 = MARGIN_TOP;
        let _ = writeln!(
            svg,
            "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>"
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>"
        );
        // Ticks and tick labels.
        for k in 0..TICKS {
            let f = k as f64 / (TICKS - 1) as f64;
            let xt = x_min + f * (x_max - x_min);
            let yt = y_min + f * (y_max - y_min);
            let xv = if self.log_x { 10f64.powf(xt) } else { xt };
            let yv = if self.log_y { 10f64.powf(yt) } else { yt };
            let (gx, gy) = (px(xt), py(yt));
            let _ = writeln!(
                svg,
                "<line x1=\"{gx:.2}\" y1=\"{y0:.2}\" x2=\"{gx:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
                y0 + 5.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{gx:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">{}</text>",
                y0 + 18.0,
                fmt_num(xv)
            );
            let _ = writeln!(
                svg,
                "<line x1=\"{:.2}\" y1=\"{gy:.2}\" x2=\"{x0:.2}\" y2=\"{gy:.2}\" stroke=\"black\"/>",
                x0 - 5.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">{}</text>",
                x0 - 8.0,
                gy + 4.0,
                fmt_num(yv)
            );
        }
        // Axis labels.
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">{}</text>",
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let ylab_y = MARGIN_TOP + plot_h / 2.0;
        let _ = writeln!(
            svg,
            "<text x=\"16.00\" y=\"{ylab_y:.2}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" transform=\"rotate(-90 16 {ylab_y:.2})\">{}</text>",
            escape(&self.y_label)
        );
        // Series.
        for (i, pts) in kept.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            if pts.len() >= 2 {
                let mut coords = String::new();
                for &(x, y) in pts {
                    let _ = write!(coords, "{:.2},{:.2} ", px(x), py(y));
                }
                let _ = writeln!(
                    svg,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                    coords.trim_end()
                );
            }
            for &(x, y) in pts {
                let _ = writeln!(
                    svg,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                    px(x),
                    py(y)
                );
            }
        }
        // Legend for labelled series.
        let mut row = 0usize;
        for (i, s) in self.series.iter().enumerate() {
            if s.label.is_empty() {
                continue;
            }
            let color = PALETTE[i % PALETTE.len()];
            let ly = MARGIN_TOP + 8.0 + row as f64 * 18.0;
            let _ = writeln!(
                svg,
                "<rect x=\"{:.2}\" y=\"{ly:.2}\" width=\"12\" height=\"12\" fill=\"{color}\"/>",
                MARGIN_LEFT + 8.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\">{}</text>",
                MARGIN_LEFT + 24.0,
                ly + 10.0,
                escape(&s.label)
            );
            row += 1;
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Data range padded by 5% on each side; a safe default range when empty or
/// degenerate.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = (lo.abs() * 0.05).max(0.5);
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

/// Stable human formatting: plain fixed-point with trailing zeros trimmed in
/// a moderate range, scientific notation outside it.
fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.3e}")
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}
