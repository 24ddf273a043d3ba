use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use ghc_core::flowbox::Sector;
use ghc_core::marking::{
    certified, fixture_fuchsian, fixture_s2, fixture_single, CertifiedMarking, MarkingFile, SchottkyMarking,
};
use ghc_core::word::Word;
use ghc_core::{Cx, Moebius};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

fn default_marking() -> String {
    "s2".into()
}
fn default_eps() -> f64 {
    0.05
}
fn default_box() -> String {
    "on-axis-of a".into()
}
fn default_sectors() -> usize {
    4
}
fn default_shards() -> usize {
    1
}
fn default_radius() -> f64 {
    22.0
}
fn default_method() -> String {
    "fit".into()
}
fn default_c() -> f64 {
    10.0
}
fn default_max_word_len() -> usize {
    64
}
fn default_out() -> PathBuf {
    PathBuf::from(".")
}

/// Everything a run depends on. Flags and config files both produce this.
#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Subcommand name; only read from config files.
    #[arg(skip)]
    #[serde(default)]
    pub command: String,
    /// Marking JSON file or preset: s2, single, fuchsian.
    #[arg(long, default_value_t = default_marking())]
    #[serde(default = "default_marking")]
    pub marking: String,
    /// Lattice preset used instead of the marking (exponent only): picard.
    #[arg(long)]
    #[serde(default)]
    pub preset: Option<String>,
    /// Length bound T.
    #[arg(long = "T")]
    #[serde(default, rename = "T")]
    pub t: Option<f64>,
    /// Lower length bound for the closing lemma.
    #[arg(long = "T-min")]
    #[serde(default, rename = "T_min")]
    pub t_min: Option<f64>,
    /// Flow box size.
    #[arg(long, default_value_t = default_eps())]
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Box base: "on-axis-of <word>" or "matrix:a_re,a_im,b_re,b_im,c_re,c_im,d_re,d_im".
    #[arg(long = "box", default_value_t = default_box())]
    #[serde(default = "default_box", rename = "box")]
    pub box_base: String,
    /// Number of equal holonomy sectors.
    #[arg(long, default_value_t = default_sectors())]
    #[serde(default = "default_sectors")]
    pub sectors: usize,
    /// Holonomy sector "lo,hi" for box reports; the full circle when absent.
    #[arg(long)]
    #[serde(default)]
    pub sector: Option<String>,
    /// T grid: "start:end:step" or a comma list.
    #[arg(long)]
    #[serde(default)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = default_shards())]
    #[serde(default = "default_shards")]
    pub shards: usize,
    /// Run only this shard and skip the merge.
    #[arg(long)]
    #[serde(default)]
    pub only_shard: Option<usize>,
    /// Recorded in every output; all computations are deterministic.
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    /// Critical exponent; estimated from the orbit when absent.
    #[arg(long)]
    #[serde(default)]
    pub delta: Option<f64>,
    /// Orbit radius for exponent estimates and Patterson samples.
    #[arg(long = "R", default_value_t = default_radius())]
    #[serde(default = "default_radius", rename = "R")]
    pub radius: f64,
    /// Exponent estimator: fit or bisection.
    #[arg(long, default_value_t = default_method())]
    #[serde(default = "default_method")]
    pub method: String,
    /// Patterson exponent s; defaults to delta.
    #[arg(long)]
    #[serde(default)]
    pub s: Option<f64>,
    /// Constant c of the comparison and closing bounds.
    #[arg(long, default_value_t = default_c())]
    #[serde(default = "default_c")]
    pub c: f64,
    /// Include the BMS prediction in box reports.
    #[arg(long)]
    #[serde(default)]
    pub bms: bool,
    /// Existing census store to analyse instead of building one.
    #[arg(long)]
    #[serde(default)]
    pub store: Option<PathBuf>,
    #[arg(long, default_value_t = default_max_word_len())]
    #[serde(default = "default_max_word_len")]
    pub max_word_len: usize,
    /// Also write SVG plots.
    #[arg(long)]
    #[serde(default)]
    pub svg: bool,
    /// Output directory; not part of the config hash.
    #[arg(long, default_value = ".")]
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

impl RunConfig {
    /// SHA-256 of the canonical JSON form, output directory excluded.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v.as_object_mut().expect("object").remove("out");
        let digest = Sha256::digest(v.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn marking(&self) -> Result<CertifiedMarking> {
        let file: MarkingFile = match self.marking.as_str() {
            "s2" => fixture_s2(),
            "single" => fixture_single(),
            "fuchsian" => fixture_fuchsian(),
            path => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading marking {path}"))?;
                serde_json::from_str(&text).with_context(|| format!("parsing marking {path}"))?
            }
        };
        Ok(certified(file)?)
    }

    pub fn t_or(&self, what: &str) -> Result<f64> {
        match (self.t, self.grid()?) {
            (Some(t), _) => Ok(t),
            (None, Some(g)) => Ok(g.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            (None, None) => bail!("{what} needs --T or --grid"),
        }
    }

    pub fn grid(&self) -> Result<Option<Vec<f64>>> {
        self.grid.as_deref().map(parse_grid).transpose()
    }

    /// The explicit grid, or 1, 2, ... up to T with T itself appended.
    pub fn grid_or_default(&self, t: f64) -> Result<Vec<f64>> {
        if let Some(g) = self.grid()? {
            return Ok(g);
        }
        let mut g: Vec<f64> = (1..=t.floor() as usize).map(|k| k as f64).collect();
        if g.last() != Some(&t) {
            g.push(t);
        }
        Ok(g)
    }

    pub fn sector(&self) -> Result<Sector> {
        match &self.sector {
            None => Ok(Sector::full()),
            Some(s) => {
                let v = parse_floats(s)?;
                if v.len() != 2 {
                    bail!("sector needs two values lo,hi, got {s:?}");
                }
                Ok(Sector::new(v[0], v[1])?)
            }
        }
    }

    pub fn box_base(&self, m: &SchottkyMarking) -> Result<Moebius> {
        let spec = self.box_base.trim();
        if let Some(word) = spec.strip_prefix("on-axis-of") {
            let w = Word::parse(word.trim())?;
            let g = m.evaluate(&w);
            return Ok(g.hyperbolic_data().with_context(|| format!("word {w} has no axis"))?.conjugator);
        }
        if let Some(entries) = spec.strip_prefix("matrix:") {
            let v = parse_floats(entries)?;
            if v.len() != 8 {
                bail!("matrix box base needs 8 numbers, got {}", v.len());
            }
            let c = |i: usize| Cx::new(v[2 * i], v[2 * i + 1]);
            return Ok(Moebius::from_entries(c(0), c(1), c(2), c(3))?);
        }
        bail!("unrecognised box base {spec:?}")
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| anyhow!("not a number: {x:?}")))
        .collect()
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step): (f64, f64, f64) = (a.trim().parse()?, b.trim().parse()?, step.trim().parse()?);
            if !(step > 0.0) || b < a {
                bail!("grid {s:?} needs start <= end and a positive step");
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            (0..=n).map(|k| a + k as f64 * step).collect()
        }
        [_] => parse_floats(s)?,
        _ => bail!("grid {s:?} is neither start:end:step nor a list"),
    };
    if grid.is_empty() || grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        bail!("grid {s:?} has no usable values");
    }
    Ok(grid)
}
