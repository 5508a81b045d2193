//! Static SVG histograms of baseline error distributions.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use netctl_core::pipelines::BaselineDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerRole {
    /// Selection search result, drawn red.
    Primary,
    /// Comparison method, drawn black.
    Comparison,
}

impl MarkerRole {
    fn color(self) -> &'static str {
        match self {
            MarkerRole::Primary => "#d62728",
            MarkerRole::Comparison => "#000000",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub label: String,
    pub value: f64,
    pub role: MarkerRole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramSpec {
    pub bins: usize,
    pub markers: Vec<Marker>,
    pub title: String,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            bins: 30,
            markers: Vec::new(),
            title: String::new(),
        }
    }
}

/// `v` with four significant digits.
pub fn sig4(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-3..=3).contains(&exp) {
        let decimals = (3 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.3e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Bin counts over `[lo, hi]`; the last bin is closed.
pub fn bin_counts(values: &[f64], bins: usize, lo: f64, hi: f64) -> Vec<usize> {
    let mut counts = vec![0; bins];
    let width = (hi - lo) / bins as f64;
    for &v in values.iter().filter(|v| v.is_finite()) {
        let idx = if width > 0.0 { ((v - lo) / width).floor() as isize } else { 0 };
        counts[idx.clamp(0, bins as isize - 1) as usize] += 1;
    }
    counts
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// Renders the histogram as a self-contained SVG document.
pub fn render_histogram(dist: &BaselineDistribution, spec: &HistogramSpec) -> Result<String, String> {
    if spec.bins == 0 {
        return Err("histogram needs at least one bin".into());
    }
    if let Some(m) = spec.markers.iter().find(|m| !m.value.is_finite()) {
        return Err(format!("marker `{}` is not finite", m.label));
    }
    let finite: Vec<f64> = dist.errors.iter().copied().filter(|e| e.is_finite()).collect();
    if finite.is_empty() {
        return Err("distribution has no finite entries".into());
    }
    let all = finite.iter().copied().chain(spec.markers.iter().map(|m| m.value));
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi <= lo {
        let pad = if lo == 0.0 { 0.5 } else { 0.5 * lo.abs() };
        lo -= pad;
        hi += pad;
    }
    let counts = bin_counts(&finite, spec.bins, lo, hi);
    let peak = counts.iter().copied().max().unwrap_or(1).max(1) as f64;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_of = |v: f64| LEFT + (v - lo) / (hi - lo) * plot_w;
    let y_of = |c: f64| TOP + plot_h - c / peak * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    if !spec.title.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&spec.title)
        );
    }
    let bin_w = plot_w / spec.bins as f64;
    for (i, &c) in counts.iter().enumerate().filter(|(_, c)| **c > 0) {
        let y = y_of(c as f64);
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="#3182bd" stroke-width="0.5"/>"##,
            LEFT + i as f64 * bin_w,
            y,
            bin_w,
            TOP + plot_h - y
        );
    }
    // Axes with end ticks.
    let base = TOP + plot_h;
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT} {TOP} V{base} H{}" fill="none" stroke="black"/>"#,
        LEFT + plot_w
    );
    for (v, anchor) in [(lo, "start"), ((lo + hi) / 2.0, "middle"), (hi, "end")] {
        let x = x_of(v);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{base}" x2="{x:.2}" y2="{}" stroke="black"/>"#, base + 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{}" text-anchor="{anchor}">{}</text>"#,
            base + 18.0,
            sig4(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        LEFT - 6.0,
        TOP + 4.0,
        peak as usize
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">0</text>"#, LEFT - 6.0, base + 4.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">control error e</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">count</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (k, m) in spec.markers.iter().enumerate() {
        let x = x_of(m.value);
        let color = m.role.color();
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{base}" stroke="{color}" stroke-width="2"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" fill="{color}">{} = {}</text>"#,
            x + 4.0,
            TOP + 14.0 + 14.0 * k as f64,
            escape(&m.label),
            sig4(m.value)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes [`render_histogram`] to `path`.
pub fn emit_histogram(dist: &BaselineDistribution, spec: &HistogramSpec, path: &Path) -> io::Result<()> {
    let svg = render_histogram(dist, spec).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
    std::fs::write(path, svg)
}
