use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use ghc_core::census::{build_census, build_census_units, shard_units, CensusOptions, CensusStore, ShardInfo};
use ghc_core::experiments::*;
use ghc_core::exponent::{estimate_delta_for, DeltaEstimate, DeltaMethod, OrbitSource, PicardOrbit, SchottkyOrbit};
use ghc_core::flowbox::{FlowBox, Sector};
use ghc_core::marking::CertifiedMarking;
use ghc_core::patterson::{bms_box_mass, conformality_defect, patterson_sample};
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{opt, write_atomic, Output};

/// Result of a subcommand: lines for stdout and whether a verification passed.
pub struct Report {
    pub lines: Vec<String>,
    pub ok: bool,
}

impl Report {
    fn new(lines: Vec<String>) -> Self {
        Report { lines, ok: true }
    }
}

fn method(cfg: &RunConfig) -> Result<DeltaMethod> {
    match cfg.method.as_str() {
        "fit" => Ok(DeltaMethod::OrbitalFit),
        "bisection" => Ok(DeltaMethod::PoincareBisection),
        other => bail!("unknown exponent method {other:?}; use fit or bisection"),
    }
}

fn delta_for(cfg: &RunConfig, m: &CertifiedMarking) -> Result<f64> {
    match cfg.delta {
        Some(d) => Ok(d),
        None => Ok(estimate_delta_for(&SchottkyOrbit::new(m), cfg.radius, method(cfg)?)?.delta),
    }
}

fn opts(cfg: &RunConfig) -> CensusOptions {
    CensusOptions { max_word_len: cfg.max_word_len }
}

fn shard_path(out: &Output, i: usize, n: usize) -> PathBuf {
    out.path("shards").join(format!("shard-{i}-of-{n}.ghc"))
}

/// A finished shard from an earlier run, if the file is intact and matches this run.
fn load_shard(path: &PathBuf, m: &CertifiedMarking, t: f64, cfg: &RunConfig, i: usize, n: usize) -> Option<CensusStore> {
    let buf = std::fs::read(path).ok()?;
    let s = CensusStore::from_bytes(&buf, m.marking()).ok()?;
    let matches = s.header.t_max == t
        && s.header.max_word_len == cfg.max_word_len
        && s.header.shard == Some(ShardInfo { index: i, count: n });
    matches.then_some(s)
}

/// Builds the census, shard by shard when asked. Completed shards on disk are reused,
/// so an interrupted run resumes where it stopped. Returns None for a single-shard worker.
fn sharded_census(cfg: &RunConfig, out: &Output, m: &CertifiedMarking, t: f64) -> Result<Option<CensusStore>> {
    let n = cfg.shards.max(1);
    if n == 1 && cfg.only_shard.is_none() {
        return Ok(Some(build_census(m, t, &opts(cfg))?));
    }
    if let Some(j) = cfg.only_shard {
        if j >= n {
            bail!("shard {j} out of range for {n} shards");
        }
    }
    std::fs::create_dir_all(out.path("shards"))?;
    let mut parts = Vec::new();
    for i in 0..n {
        if cfg.only_shard.is_some_and(|j| j != i) {
            continue;
        }
        let path = shard_path(out, i, n);
        let shard = match load_shard(&path, m, t, cfg, i, n) {
            Some(s) => {
                eprintln!("shard {i}/{n}: reusing {}", path.display());
                s
            }
            None => {
                let mut s = build_census_units(m, t, &opts(cfg), &shard_units(m.marking().rank(), i, n))?;
                s.header.shard = Some(ShardInfo { index: i, count: n });
                write_atomic(&path, &s.to_bytes())?;
                eprintln!("shard {i}/{n}: {} records", s.len());
                s
            }
        };
        parts.push(shard);
    }
    if cfg.only_shard.is_some() {
        return Ok(None);
    }
    let mut it = parts.into_iter();
    let mut merged = it.next().expect("at least one shard");
    for s in it {
        merged = merged.merge(s)?;
    }
    merged.header.shard = None;
    Ok(Some(merged))
}

/// The census to analyse: the given store file, which must belong to this marking and
/// reach T, or a fresh build.
fn store_for(cfg: &RunConfig, m: &CertifiedMarking, t: f64) -> Result<CensusStore> {
    match &cfg.store {
        Some(p) => {
            let buf = std::fs::read(p).with_context(|| format!("reading store {}", p.display()))?;
            let s = CensusStore::from_bytes(&buf, m.marking())?;
            if s.t_max() + 1e-12 < t {
                return Err(ExperimentError::IncompleteStore { have: s.t_max(), need: t }.into());
            }
            Ok(s)
        }
        None => Ok(build_census(m, t, &opts(cfg))?),
    }
}

pub fn census(cfg: &RunConfig) -> Result<Report> {
    let m = cfg.marking()?;
    let t = cfg.t.context("census needs --T")?;
    let out = Output::new(cfg)?;
    let Some(store) = sharded_census(cfg, &out, &m, t)? else {
        let i = cfg.only_shard.unwrap_or(0);
        out.summary(&json!({ "shard": i, "shards": cfg.shards, "complete": false }))?;
        return Ok(Report::new(vec![format!("shard {i} of {} written", cfg.shards)]));
    };
    let path = out.bytes("census.ghc", &store.to_bytes())?;
    let rows: Vec<String> = store
        .records
        .iter()
        .map(|r| format!("{},{},{},{},{}", r.necklace, r.length, r.holonomy, r.trace.re, r.trace.im))
        .collect();
    out.csv("census.csv", "necklace,length,holonomy,trace_re,trace_im", &rows)?;
    out.summary(&json!({ "store": "census.ghc", "header": store.header }))?;
    Ok(Report::new(vec![format!("classes: {}", store.len()), format!("store: {}", path.display())]))
}

pub fn exponent(cfg: &RunConfig) -> Result<Report> {
    let out = Output::new(cfg)?;
    let est: DeltaEstimate = match cfg.preset.as_deref() {
        Some("picard") => estimate(&PicardOrbit::default(), cfg)?,
        Some(other) => bail!("unknown lattice preset {other:?}"),
        None => estimate(&SchottkyOrbit::new(&cfg.marking()?), cfg)?,
    };
    out.summary(&est)?;
    Ok(Report::new(vec![format!("delta: {}", est.delta), format!("ci: [{}, {}]", est.ci.0, est.ci.1)]))
}

fn estimate<S: OrbitSource>(src: &S, cfg: &RunConfig) -> Result<DeltaEstimate> {
    Ok(estimate_delta_for(src, cfg.radius, method(cfg)?)?)
}

pub fn patterson(cfg: &RunConfig) -> Result<Report> {
    let m = cfg.marking()?;
    let s = match cfg.s {
        Some(s) => s,
        None => delta_for(cfg, &m)?,
    };
    let out = Output::new(cfg)?;
    let nu = patterson_sample(&m, cfg.radius, s)?;
    let csv = nu.to_csv();
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or_default().to_string();
    out.csv("patterson.csv", &header, &lines.map(str::to_string).collect::<Vec<_>>())?;
    let defect = conformality_defect(&nu, &m);
    out.summary(&json!({
        "atoms": nu.atoms.len(), "exponent": s, "radius": nu.radius,
        "shell": nu.shell, "conformality_defect": defect,
    }))?;
    Ok(Report::new(vec![format!("atoms: {}", nu.atoms.len()), format!("conformality defect: {defect}")]))
}

pub fn counts(cfg: &RunConfig) -> Result<Report> {
    let m = cfg.marking()?;
    let t = cfg.t_or("counts")?;
    let grid = cfg.grid_or_default(t)?;
    let out = Output::new(cfg)?;
    let store = store_for(cfg, &m, t)?;
    let delta = delta_for(cfg, &m)?;
    let rows = geodesic_count_report(&store, delta, &grid)?;
    let csv: Vec<String> = rows
        .iter()
        .map(|r| {
            format!("{},{},{},{},{},{}", r.t, r.count, r.exp_ratio, opt(r.li_ratio), r.dagger_exact, r.dagger_bound)
        })
        .collect();
    out.csv("counts.csv", "T,count,exp_ratio,li_ratio,dagger_exact,dagger_bound", &csv)?;
    out.plot("counts.svg", "count * delta T e^(-delta T)", &rows.iter().map(|r| (r.t, r.exp_ratio)).collect::<Vec<_>>())?;
    out.summary(&json!({ "delta": delta, "rows": rows }))?;
    let last = rows.last().expect("grid is nonempty");
    Ok(Report::new(vec![format!("count at T = {}: {}", last.t, last.count), format!("exp ratio: {}", last.exp_ratio)]))
}

pub fn holonomy(cfg: &RunConfig) -> Result<Report> {
    let m = cfg.marking()?;
    let t = cfg.t.context("holonomy needs --T")?;
    if cfg.sectors == 0 {
        bail!("--sectors must be positive");
    }
    let out = Output::new(cfg)?;
    let store = store_for(cfg, &m, t)?;
    let delta = delta_for(cfg, &m)?;
    let rep = holonomy_report(&store, &Sector::partition(cfg.sectors), delta, t)?;
    let fr = rep.fractions();
    let csv: Vec<String> = (0..rep.sectors.len())
        .map(|i| {
            let s = &rep.sectors[i];
            format!("{},{},{},{},{}", s.lo(), s.hi(), rep.counts[i], fr[i], rep.predictions[i])
        })
        .collect();
    out.csv("holonomy.csv", "lo,hi,count,fraction,prediction", &csv)?;
    let pts: Vec<(f64, f64)> = rep.sectors.iter().zip(&fr).map(|(s, &f)| ((s.lo() + s.hi()) / 2.0, f)).collect();
    out.plot("holonomy.svg", "fraction of classes per holonomy sector", &pts)?;
    out.summary(&json!({ "delta": delta, "fractions": fr, "report": rep }))?;
    Ok(Report::new(vec![format!("classes: {}", rep.total), format!("ks: {}", rep.ks)]))
}

struct BoxSetup {
    m: CertifiedMarking,
    b: FlowBox,
    sector: Sector,
    grid: Vec<f64>,
    t: f64,
}

fn box_setup(cfg: &RunConfig, what: &str) -> Result<BoxSetup> {
    let m = cfg.marking()?;
    let b = FlowBox::new(cfg.box_base(m.marking())?, cfg.eps)?;
    let t = cfg.t_or(what)?;
    let grid = cfg.grid_or_default(t)?;
    if let Some(g) = grid.iter().find(|&&g| g > t) {
        bail!("grid value {g} exceeds T = {t}");
    }
    Ok(BoxSetup { m, b, sector: cfg.sector()?, grid, t })
}

fn box_report(cfg: &RunConfig, s: &BoxSetup) -> Result<(BoxMeasureReport, Option<f64>)> {
    let store = store_for(cfg, &s.m, s.t)?;
    let hits = box_hits(&s.m, &store, &s.b, s.t)?;
    let en = Enumeration::schottky(&s.m, &s.b, s.t);
    let (bms, delta) = if cfg.bms {
        let delta = delta_for(cfg, &s.m)?;
        let nu = patterson_sample(&s.m, cfg.radius, delta)?;
        (Some((bms_box_mass(&nu, &s.b, &s.sector), delta)), Some(delta))
    } else {
        (None, None)
    };
    Ok((box_measure_report(&hits, &en, &s.b, &s.sector, &s.grid, cfg.c, bms)?, delta))
}

pub fn boxmeasure(cfg: &RunConfig) -> Result<Report> {
    let s = box_setup(cfg, "boxmeasure")?;
    let out = Output::new(cfg)?;
    let (rep, delta) = box_report(cfg, &s)?;
    let csv: Vec<String> = rep
        .rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                r.t,
                r.mu,
                r.eta,
                r.vt_lower,
                r.vt_upper,
                r.comp_lower,
                r.comp_upper,
                opt(r.bms_prediction),
                opt(r.bms_ratio)
            )
        })
        .collect();
    out.csv("boxmeasure.csv", "T,mu,eta,vt_lower,vt_upper,comp_lower,comp_upper,bms_prediction,bms_ratio", &csv)?;
    out.plot("boxmeasure.svg", "mu_T", &rep.rows.iter().map(|r| (r.t, r.mu)).collect::<Vec<_>>())?;
    let holds = comparison_check(&rep);
    out.summary(&json!({ "delta": delta, "comparison_holds": holds, "report": rep }))?;
    Ok(Report { lines: vec![format!("comparison: {}", if holds { "holds" } else { "fails" })], ok: holds })
}

pub fn vt_count(cfg: &RunConfig) -> Result<Report> {
    let s = box_setup(cfg, "vt-count")?;
    let out = Output::new(cfg)?;
    let en = Enumeration::schottky(&s.m, &s.b, s.t);
    let rows = vt_sandwich_counts(&en, &s.b, &s.sector, &s.grid)?;
    let csv: Vec<String> = rows.iter().map(|r| format!("{},{},{}", r.t, r.lower, r.upper)).collect();
    out.csv("vt_count.csv", "T,lower,upper", &csv)?;
    out.plot("vt_count.svg", "lower count of V_T", &rows.iter().map(|r| (r.t, r.lower as f64)).collect::<Vec<_>>())?;
    out.summary(&json!({ "rows": rows }))?;
    let last = rows.last().expect("grid is nonempty");
    Ok(Report::new(vec![format!("T = {}: lower {}, upper {}", last.t, last.lower, last.upper)]))
}

pub fn closing_lemma(cfg: &RunConfig) -> Result<Report> {
    let m = cfg.marking()?;
    let t_min = cfg.t_min.unwrap_or(8.0);
    let t = cfg.t.unwrap_or(t_min + 4.0);
    let b = FlowBox::new(cfg.box_base(m.marking())?, cfg.eps)?;
    let out = Output::new(cfg)?;
    let en = Enumeration::schottky(&m, &b, t);
    let rep = closing_lemma_check(&en, &b, t_min, cfg.c)?;
    let csv: Vec<String> = rep
        .violations
        .iter()
        .map(|v| format!("{},{},{},{},{},{}", v.t_box, v.length, v.theta_box, v.holonomy, v.axis_excess, v.failed.join(";")))
        .collect();
    out.csv("closing_lemma.csv", "t_box,length,theta_box,holonomy,axis_excess,failed", &csv)?;
    out.summary(&rep)?;
    Ok(Report {
        lines: vec![format!("checked: {}", rep.checked), format!("violations: {}", rep.violations.len())],
        ok: rep.violations.is_empty(),
    })
}

pub fn abel_check(cfg: &RunConfig) -> Result<Report> {
    let s = box_setup(cfg, "abel-check")?;
    let out = Output::new(cfg)?;
    let store = store_for(cfg, &s.m, s.t)?;
    let delta = delta_for(cfg, &s.m)?;
    let hits = box_hits(&s.m, &store, &s.b, s.t)?;
    let rows = abel_li_check(&hits, cfg.eps, &s.sector, delta, &s.grid)?;
    let csv: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{}",
                r.t,
                r.mu,
                r.eta_direct,
                r.eta_stieltjes,
                r.upper_nlength,
                opt(r.li_main),
                opt(r.li_ratio)
            )
        })
        .collect();
    out.csv("abel.csv", "T,mu,eta_direct,eta_stieltjes,upper_nlength,li_main,li_ratio", &csv)?;
    let gap = rows.iter().map(|r| (r.eta_direct - r.eta_stieltjes).abs()).fold(0.0, f64::max);
    let nlength = rows.iter().all(|r| r.upper_nlength);
    out.summary(&json!({ "delta": delta, "max_gap": gap, "upper_nlength": nlength, "rows": rows }))?;
    Ok(Report {
        lines: vec![format!("max gap: {gap:e}"), format!("upper-nlength: {}", if nlength { "holds" } else { "fails" })],
        ok: gap <= 1e-9 && nlength,
    })
}
