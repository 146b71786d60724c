//! File writers: CSV tables, the JSON summary, and static SVG renderings.
//!
//! CSV is plain RFC-4180-style ASCII: header row, comma separators, '.'
//! decimal point, '\n' record terminator, no quoting. Floats print in Rust's
//! shortest round-trip form, so outputs are bit-stable across runs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub struct Bundle {
    dir: PathBuf,
}

impl Bundle {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::config(format!("create {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_csv(
        &self,
        name: &str,
        header: &str,
        rows: impl Iterator<Item = String>,
    ) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut out = String::with_capacity(1 << 16);
        out.push_str(header);
        out.push('\n');
        for row in rows {
            out.push_str(&row);
            out.push('\n');
        }
        fs::write(&path, out).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::config(format!("json encode: {e}")))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Formats a float for CSV cells (shortest round-trip representation).
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

// ---------------------------------------------------------------------------
// SVG: fixed-size deterministic renderings, one polyline per series or one
// rect per heatmap cell. Styling is hard-coded on purpose.

const W: f64 = 800.0;
const H: f64 = 560.0;
const MARGIN: f64 = 60.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn of(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            if x.is_finite() {
                x_lo = x_lo.min(x);
                x_hi = x_hi.max(x);
            }
            if y.is_finite() {
                y_lo = y_lo.min(y);
                y_hi = y_hi.max(y);
            }
        }
        if !(x_hi > x_lo) {
            x_hi = x_lo + 1.0;
        }
        if !(y_hi > y_lo) {
            y_hi = y_lo + 1.0;
        }
        Self { x_lo, x_hi, y_lo, y_hi }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_lo) / (self.x_hi - self.x_lo) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y_lo) / (self.y_hi - self.y_lo) * (H - 2.0 * MARGIN)
    }
}

fn svg_header(title: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tx}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" ",
            "font-size=\"16\">{title}</text>\n"
        ),
        w = W,
        h = H,
        tx = W / 2.0,
        title = title,
    )
}

fn axes(frame: &Frame, x_label: &str, y_label: &str) -> String {
    let mut s = format!(
        "<rect x=\"{m}\" y=\"{m}\" width=\"{w}\" height=\"{h}\" fill=\"none\" stroke=\"#333\"/>\n",
        m = MARGIN,
        w = W - 2.0 * MARGIN,
        h = H - 2.0 * MARGIN,
    );
    s.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{lab}</text>\n",
        x = W / 2.0,
        y = H - 16.0,
        lab = x_label,
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{y}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {y})\">{lab}</text>\n",
        y = H / 2.0,
        lab = y_label,
    ));
    for (vx, vy, anchor) in [
        (frame.x_lo, None, "start"),
        (frame.x_hi, None, "end"),
        (frame.y_lo, Some(()), "start"),
        (frame.y_hi, Some(()), "start"),
    ] {
        match vy {
            None => s.push_str(&format!(
                "<text x=\"{x}\" y=\"{y}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"10\">{v:.4}</text>\n",
                x = frame.px(vx),
                y = H - MARGIN + 16.0,
                v = vx,
            )),
            Some(()) => s.push_str(&format!(
                "<text x=\"{x}\" y=\"{y}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"10\">{v:.4}</text>\n",
                x = 4.0,
                y = frame.py(vx) + 4.0,
                v = vx,
            )),
        }
    }
    s
}

/// One named polyline per series; optional point markers rendered as small
/// glyphs ("x" crosses or diamonds) for scatter overlays.
pub struct LineChart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
    pub markers: Vec<(String, Vec<(f64, f64)>, MarkerShape)>,
}

#[derive(Clone, Copy)]
pub enum MarkerShape {
    Cross,
    Diamond,
}

impl LineChart<'_> {
    pub fn render(&self) -> String {
        let everything = self
            .series
            .iter()
            .flat_map(|(_, pts)| pts.iter().copied())
            .chain(self.markers.iter().flat_map(|(_, pts, _)| pts.iter().copied()));
        let frame = Frame::of(everything);
        let mut s = svg_header(self.title);
        s.push_str(&axes(&frame, self.x_label, self.y_label));
        for (i, (label, pts)) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = pts
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
                .collect();
            s.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                path.join(" ")
            ));
            s.push_str(&format!(
                "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{label}</text>\n",
                x = W - MARGIN + 4.0,
                y = MARGIN + 14.0 * (i as f64 + 1.0),
            ));
        }
        for (i, (label, pts, shape)) in self.markers.iter().enumerate() {
            let color = PALETTE[(self.series.len() + i) % PALETTE.len()];
            for &(x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                let (cx, cy) = (frame.px(x), frame.py(y));
                match shape {
                    MarkerShape::Cross => s.push_str(&format!(
                        "<path d=\"M{x0:.2} {y0:.2} L{x1:.2} {y1:.2} M{x0:.2} {y1:.2} L{x1:.2} {y0:.2}\" stroke=\"{color}\" stroke-width=\"1\"/>\n",
                        x0 = cx - 3.0, y0 = cy - 3.0, x1 = cx + 3.0, y1 = cy + 3.0,
                    )),
                    MarkerShape::Diamond => s.push_str(&format!(
                        "<path d=\"M{cx:.2} {y0:.2} L{x1:.2} {cy:.2} L{cx:.2} {y1:.2} L{x0:.2} {cy:.2} Z\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1\"/>\n",
                        x0 = cx - 3.5, y0 = cy - 3.5, x1 = cx + 3.5, y1 = cy + 3.5,
                    )),
                }
            }
            s.push_str(&format!(
                "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{label}</text>\n",
                x = W - MARGIN + 4.0,
                y = MARGIN + 14.0 * ((self.series.len() + i) as f64 + 1.0),
            ));
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Row-major heatmap over regular axes.
pub struct HeatMap<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    /// `values[iy][ix]`.
    pub values: &'a [Vec<f64>],
}

fn colormap(t: f64) -> String {
    // Five-stop dark-blue → yellow ramp.
    const STOPS: [(f64, f64, f64); 5] = [
        (0.050, 0.030, 0.530),
        (0.490, 0.010, 0.660),
        (0.800, 0.270, 0.470),
        (0.970, 0.580, 0.250),
        (0.940, 0.980, 0.130),
    ];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let mix = |a: f64, b: f64| ((a + (b - a) * f) * 255.0).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(STOPS[i].0, STOPS[i + 1].0),
        mix(STOPS[i].1, STOPS[i + 1].1),
        mix(STOPS[i].2, STOPS[i + 1].2)
    )
}

impl HeatMap<'_> {
    pub fn render(&self) -> String {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for row in self.values {
            for &v in row {
                if v.is_finite() {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        if !(hi > lo) {
            hi = lo + 1.0;
        }
        let frame = Frame {
            x_lo: self.xs[0],
            x_hi: *self.xs.last().unwrap(),
            y_lo: self.ys[0],
            y_hi: *self.ys.last().unwrap(),
        };
        let mut s = svg_header(self.title);
        let cw = (W - 2.0 * MARGIN) / self.xs.len() as f64;
        let ch = (H - 2.0 * MARGIN) / self.ys.len() as f64;
        for (iy, row) in self.values.iter().enumerate() {
            for (ix, &v) in row.iter().enumerate() {
                let t = if v.is_finite() { (v - lo) / (hi - lo) } else { 0.0 };
                s.push_str(&format!(
                    "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cw:.2}\" height=\"{ch:.2}\" fill=\"{c}\"/>\n",
                    x = MARGIN + ix as f64 * cw,
                    y = H - MARGIN - (iy as f64 + 1.0) * ch,
                    c = colormap(t),
                ));
            }
        }
        s.push_str(&axes(&frame, self.x_label, self.y_label));
        s.push_str(&format!(
            "<text x=\"{x}\" y=\"20\" font-family=\"sans-serif\" font-size=\"10\">range [{lo:.4e}, {hi:.4e}]</text>\n",
            x = MARGIN,
        ));
        s.push_str("</svg>\n");
        s
    }
}
