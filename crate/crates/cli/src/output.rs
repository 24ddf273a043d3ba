use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

/// Writes artifacts into the output directory, each tagged with the config hash.
pub struct Output {
    pub dir: PathBuf,
    pub hash: String,
    config: Value,
    svg: bool,
}

impl Output {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
        let mut config = serde_json::to_value(cfg)?;
        config.as_object_mut().expect("object").remove("out");
        Ok(Output { dir: cfg.out.clone(), hash: cfg.hash(), config, svg: cfg.svg })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn bytes(&self, name: &str, data: &[u8]) -> Result<PathBuf> {
        let p = self.path(name);
        write_atomic(&p, data)?;
        Ok(p)
    }

    /// CSV with a leading comment line carrying the config hash.
    pub fn csv(&self, name: &str, header: &str, rows: &[String]) -> Result<PathBuf> {
        let mut s = format!("# config_hash={}\n{header}\n", self.hash);
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        self.bytes(name, s.as_bytes())
    }

    pub fn summary<T: Serialize>(&self, result: &T) -> Result<PathBuf> {
        let v = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": self.hash,
            "config": self.config,
            "result": result,
        });
        let mut s = serde_json::to_string_pretty(&v)?;
        s.push('\n');
        self.bytes("summary.json", s.as_bytes())
    }

    pub fn plot(&self, name: &str, title: &str, points: &[(f64, f64)]) -> Result<Option<PathBuf>> {
        if !self.svg {
            return Ok(None);
        }
        self.bytes(name, line_svg(title, &self.hash, points).as_bytes()).map(Some)
    }
}

pub fn write_atomic(path: &Path, data: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, data).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

/// Formats an optional float as a CSV field.
pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn line_svg(title: &str, hash: &str, points: &[(f64, f64)]) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let finite: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    let range = |f: fn(&(f64, f64)) -> f64| {
        let lo = finite.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = finite.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() && hi > lo { (lo, hi) } else { (lo.min(0.0), lo.max(0.0) + 1.0) }
    };
    let (x0, x1) = range(|p| p.0);
    let (y0, y1) = range(|p| p.1);
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, "<!-- config_hash={hash} -->");
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{pad}" y="30" font-family="sans-serif" font-size="16">{title}</text>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{pad} {top} V{bot} H{right}" stroke="black" fill="none"/>"#,
        top = pad,
        bot = h - pad,
        right = w - pad
    );
    for (v, x, y, anchor) in [(x0, pad, h - pad + 18.0, "start"), (x1, w - pad, h - pad + 18.0, "end")] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" font-size="12" text-anchor="{anchor}">{v:.4}</text>"#);
    }
    for (v, y) in [(y0, h - pad), (y1, pad)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" font-size="12" text-anchor="end">{v:.4}</text>"#, pad - 4.0);
    }
    let pts: Vec<String> = finite.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" stroke="steelblue" stroke-width="2" fill="none"/>"#, pts.join(" "));
    for &(x, y) in &finite {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(x), sy(y));
    }
    s.push_str("</svg>\n");
    s
}
