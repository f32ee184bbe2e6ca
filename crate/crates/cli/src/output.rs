use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{RunConfig, SCHEMA_VERSION};

/// Writes into one directory and remembers what it wrote for the manifest.
pub struct OutputDir {
    root: PathBuf,
    files: BTreeSet<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)
            .with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: BTreeSet::new(),
        })
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.insert(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        self.write_bytes(name, &bytes)
    }

    pub fn svg(&mut self, name: &str, chart: &Chart) -> Result<()> {
        self.write_bytes(name, chart.render().as_bytes())
    }

    /// Config echo, version, seed and the list of files written so far.
    pub fn manifest(&mut self, command: &str, config: &RunConfig) -> Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            schema_version: u32,
            tool: &'static str,
            version: &'static str,
            command: &'a str,
            seed: u64,
            config: &'a RunConfig,
            files: Vec<String>,
        }
        let m = Manifest {
            schema_version: SCHEMA_VERSION,
            tool: "reltf",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: config.seed,
            config,
            files: self.files.iter().cloned().collect(),
        };
        self.json("manifest.json", &m)
    }
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Static line chart with optional log axes.
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 80.0;
const MR: f64 = 150.0;
const MT: f64 = 40.0;
const MB: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

impl Chart {
    fn axis(values: impl Iterator<Item = f64>, log: bool) -> (f64, f64) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            return (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
            return (lo - pad, hi + pad);
        }
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }

    pub fn render(&self) -> String {
        let pts = || self.series.iter().flat_map(|s| s.points.iter());
        let (x0, x1) = Self::axis(pts().map(|p| p.0), self.log_x);
        let (y0, y1) = Self::axis(pts().map(|p| p.1), self.log_y);
        let tx = |x: f64| {
            let x = if self.log_x { x.log10() } else { x };
            ML + (x - x0) / (x1 - x0) * (W - ML - MR)
        };
        let ty = |y: f64| {
            let y = if self.log_y { y.log10() } else { y };
            H - MB - (y - y0) / (y1 - y0) * (H - MT - MB)
        };
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            (W - MR + ML) / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{ML}" y="{MT}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            W - ML - MR,
            H - MT - MB
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = x0 + f * (x1 - x0);
            let yv = y0 + f * (y1 - y0);
            let xpix = ML + f * (W - ML - MR);
            let ypix = H - MB - f * (H - MT - MB);
            let xl = if self.log_x { 10f64.powf(xv) } else { xv };
            let yl = if self.log_y { 10f64.powf(yv) } else { yv };
            let _ = writeln!(
                s,
                r#"<text x="{xpix:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                H - MB + 18.0,
                tick(xl)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                ML - 6.0,
                ypix + 4.0,
                tick(yl)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (W - MR + ML) / 2.0,
            H - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            (H - MB + MT) / 2.0,
            (H - MB + MT) / 2.0,
            escape(&self.y_label)
        );
        for (k, series) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let path: Vec<String> = series
                .points
                .iter()
                .filter(|p| (!self.log_x || p.0 > 0.0) && (!self.log_y || p.1 > 0.0))
                .map(|&(x, y)| format!("{:.2},{:.2}", tx(x), ty(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
            for p in &path {
                let (x, y) = p.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="2.5" fill="{color}"/>"#);
            }
            let ly = MT + 14.0 + 18.0 * k as f64;
            let lx = W - MR + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#,
                ly - 4.0,
                lx + 18.0,
                ly - 4.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#,
                lx + 24.0,
                escape(&series.name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
