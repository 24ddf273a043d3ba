//! Primitive hyperbolic conjugacy classes up to a length bound, and their store.

use std::collections::HashSet;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::marking::{evaluate_letters, CertifiedMarking, SchottkyMarking};
use crate::mobius::{length_holonomy_from_trace, trace_sq_is_elliptic, Cx, Moebius, NEAR_BOUNDARY_TOL};
use crate::word::{inverse_letter, is_least_rotation, primitive_period, Letter, Necklace};

pub const STORE_MAGIC: &[u8; 4] = b"GHC1";
pub const STORE_VERSION: u32 = 1;
const DRIFT_LIMIT: f64 = 1e-10;
const PRUNE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("word length bound N(T) = {needed} exceeds the configured maximum {max}")]
    BoundUnreachable { needed: usize, max: usize },
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
    #[error("non-hyperbolic class {0} in a Schottky group")]
    NotHyperbolic(String),
    #[error("grid value {0} exceeds the store bound {1}")]
    GridExceedsStore(f64, f64),
    #[error("store belongs to marking {found}, expected {expected}")]
    MarkingMismatch { expected: String, found: String },
    #[error("malformed store: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjClassRecord {
    pub necklace: Necklace,
    pub length: f64,
    pub holonomy: f64,
    pub lambda: Cx,
    pub trace: Cx,
    pub representative: Moebius,
}

impl ConjClassRecord {
    fn from_trace(necklace: Necklace, trace: Cx, representative: Moebius) -> Self {
        let (lambda, length, holonomy) = length_holonomy_from_trace(trace);
        ConjClassRecord { necklace, length, holonomy, lambda, trace, representative }
    }
}

fn record_order(a: &ConjClassRecord, b: &ConjClassRecord) -> std::cmp::Ordering {
    a.length.total_cmp(&b.length).then_with(|| a.necklace.cmp(&b.necklace))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShardInfo {
    pub index: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusHeader {
    pub format_version: u32,
    pub library_version: String,
    pub marking_name: String,
    pub marking_hash: String,
    pub t_max: f64,
    /// L(1), L(2), ... up to N(T).
    pub length_bounds: Vec<f64>,
    pub max_word_len: usize,
    pub record_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shard: Option<ShardInfo>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusStore {
    pub header: CensusHeader,
    pub records: Vec<ConjClassRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusOptions {
    pub max_word_len: usize,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions { max_word_len: 64 }
    }
}

/// A subtree of the enumeration: all words starting with the given prefix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CensusUnit(pub Vec<Letter>);

/// Enumeration units: every single letter (as a leaf) and every admissible two-letter prefix.
pub fn census_units(rank: usize) -> Vec<CensusUnit> {
    let k2 = (2 * rank) as Letter;
    let mut out: Vec<CensusUnit> = (0..k2).map(|l| CensusUnit(vec![l])).collect();
    for a in 0..k2 {
        for b in a..k2 {
            if b != inverse_letter(a) {
                out.push(CensusUnit(vec![a, b]));
            }
        }
    }
    out
}

/// Units belonging to shard `index` of `count` (round robin).
pub fn shard_units(rank: usize, index: usize, count: usize) -> Vec<CensusUnit> {
    census_units(rank).into_iter().enumerate().filter(|(i, _)| i % count == index).map(|(_, u)| u).collect()
}

struct Frame {
    k2: usize,
    mats: Vec<Moebius>,
    orig: Vec<Moebius>,
    circles: Vec<(Cx, f64)>,
}

impl Frame {
    fn new(m: &CertifiedMarking) -> Self {
        let b = m.bounded();
        let k2 = 2 * b.rank();
        Frame {
            k2,
            mats: b.letter_matrices(),
            orig: m.marking().letter_matrices(),
            circles: (0..k2).map(|l| b.letter_disk(l as Letter).circle().expect("bounded frame")).collect(),
        }
    }

    /// -ln max over admissible next disks of sup |u'|.
    fn beta(&self, u: &Moebius, last: Letter) -> f64 {
        let cn = u.c.norm();
        if cn == 0.0 {
            return u.d.norm_sqr().ln();
        }
        let pole = -u.d / u.c;
        let mut worst_gap = f64::INFINITY;
        for r in 0..self.k2 {
            if r == inverse_letter(last) as usize {
                continue;
            }
            let (c, rad) = self.circles[r];
            worst_gap = worst_gap.min((pole - c).norm() - rad);
        }
        if worst_gap <= 0.0 {
            return f64::NEG_INFINITY;
        }
        2.0 * (cn * worst_gap).ln()
    }
}

struct Walker<'a> {
    frame: &'a Frame,
    t: f64,
    max_len: usize,
    out: Vec<ConjClassRecord>,
    max_drift: f64,
    error: Option<CensusError>,
}

impl Walker<'_> {
    fn visit(&mut self, letters: &mut Vec<Letter>, m: Moebius) {
        if self.error.is_some() {
            return;
        }
        self.consider(letters, &m);
        if letters.len() >= self.max_len {
            return;
        }
        let first = letters[0];
        let last = *letters.last().unwrap();
        for s in first..self.frame.k2 as Letter {
            if s == inverse_letter(last) {
                continue;
            }
            let mut child = m.mul_raw(&self.frame.mats[s as usize]);
            if (letters.len() + 1) % 8 == 0 {
                let drift = child.renormalize();
                self.max_drift = self.max_drift.max(drift);
            }
            if self.frame.beta(&child, s) > self.t + PRUNE_TOL {
                continue;
            }
            letters.push(s);
            self.visit(letters, child);
            letters.pop();
        }
    }

    fn consider(&mut self, letters: &[Letter], m: &Moebius) {
        let n = letters.len();
        if n > 1 && letters[0] == inverse_letter(letters[n - 1]) {
            return;
        }
        if !is_least_rotation(letters) {
            return;
        }
        let tr = m.trace();
        let tr2 = tr * tr;
        let name = || letters.iter().map(|&l| crate::word::letter_char(l)).collect::<String>();
        if (tr2 - Cx::new(4.0, 0.0)).norm() < NEAR_BOUNDARY_TOL {
            self.error = Some(CensusError::NumericalInstability(format!("class {} is near the parabolic boundary", name())));
            return;
        }
        if trace_sq_is_elliptic(tr2) {
            self.error = Some(CensusError::NotHyperbolic(name()));
            return;
        }
        if primitive_period(letters) != n {
            return;
        }
        let (_, length, _) = length_holonomy_from_trace(tr);
        if length > self.t + PRUNE_TOL {
            return;
        }
        let rep = evaluate_letters(&self.frame.orig, letters);
        let rec = ConjClassRecord::from_trace(Necklace::from_canonical(letters.to_vec()), rep.trace(), rep);
        if rec.length <= self.t {
            self.out.push(rec);
        }
    }
}

fn run_unit(frame: &Frame, unit: &CensusUnit, t: f64, max_len: usize) -> Result<(Vec<ConjClassRecord>, f64), CensusError> {
    let mut w = Walker { frame, t, max_len, out: Vec::new(), max_drift: 0.0, error: None };
    let mut letters = unit.0.clone();
    let m = evaluate_letters(&frame.mats, &letters);
    if unit.0.len() == 1 {
        w.consider(&letters, &m);
    } else if frame.beta(&m, *letters.last().unwrap()) <= t + PRUNE_TOL && letters.len() <= max_len {
        w.visit(&mut letters, m);
    }
    match w.error {
        Some(e) => Err(e),
        None => Ok((w.out, w.max_drift)),
    }
}

fn header_for(m: &CertifiedMarking, t: f64, opts: &CensusOptions, n: usize, count: usize) -> CensusHeader {
    CensusHeader {
        format_version: STORE_VERSION,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        marking_name: m.marking().name.clone(),
        marking_hash: m.marking().hash(),
        t_max: t,
        length_bounds: (1..=n).map(|i| m.displacement_lower_bound(i)).collect(),
        max_word_len: opts.max_word_len,
        record_count: count,
        shard: None,
    }
}

/// Census of the given units only; the store is complete for those subtrees.
pub fn build_census_units(
    m: &CertifiedMarking,
    t: f64,
    opts: &CensusOptions,
    units: &[CensusUnit],
) -> Result<CensusStore, CensusError> {
    let n = m.word_length_bound(t);
    if n > opts.max_word_len {
        return Err(CensusError::BoundUnreachable { needed: n, max: opts.max_word_len });
    }
    let frame = Frame::new(m);
    let parts: Vec<Result<(Vec<ConjClassRecord>, f64), CensusError>> =
        units.par_iter().map(|u| run_unit(&frame, u, t, n)).collect();
    let mut records = Vec::new();
    for p in parts {
        let (r, drift) = p?;
        if drift > DRIFT_LIMIT {
            return Err(CensusError::NumericalInstability(format!("determinant drift {drift:e}")));
        }
        records.extend(r);
    }
    records.sort_by(record_order);
    Ok(CensusStore { header: header_for(m, t, opts, n, records.len()), records })
}

pub fn build_census(m: &CertifiedMarking, t: f64, opts: &CensusOptions) -> Result<CensusStore, CensusError> {
    build_census_units(m, t, opts, &census_units(m.marking().rank()))
}

/// #{records with length <= t} for each grid value.
pub fn census_counts(store: &CensusStore, grid: &[f64]) -> Result<Vec<usize>, CensusError> {
    grid.iter().map(|&t| store.count_up_to(t)).collect()
}

fn write_varint<W: Write>(w: &mut W, mut v: u64) -> std::io::Result<()> {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            return w.write_all(&[byte]);
        }
        w.write_all(&[byte | 0x80])?;
    }
}

fn read_varint(buf: &[u8], pos: &mut usize) -> Result<u64, CensusError> {
    let mut v = 0u64;
    let mut shift = 0;
    loop {
        let b = *buf.get(*pos).ok_or_else(|| CensusError::Format("truncated varint".into()))?;
        *pos += 1;
        v |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
        shift += 7;
        if shift > 63 {
            return Err(CensusError::Format("varint too long".into()));
        }
    }
}

fn read_f64(buf: &[u8], pos: &mut usize) -> Result<f64, CensusError> {
    let bytes = buf.get(*pos..*pos + 8).ok_or_else(|| CensusError::Format("truncated record".into()))?;
    *pos += 8;
    Ok(f64::from_le_bytes(bytes.try_into().unwrap()))
}

impl CensusStore {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.header.t_max
    }

    pub fn count_up_to(&self, t: f64) -> Result<usize, CensusError> {
        if t > self.header.t_max + 1e-12 {
            return Err(CensusError::GridExceedsStore(t, self.header.t_max));
        }
        Ok(self.records.partition_point(|r| r.length <= t))
    }

    /// Records with length <= t.
    pub fn up_to(&self, t: f64) -> &[ConjClassRecord] {
        &self.records[..self.records.partition_point(|r| r.length <= t)]
    }

    pub fn check_marking(&self, m: &SchottkyMarking) -> Result<(), CensusError> {
        let expected = m.hash();
        if self.header.marking_hash != expected {
            return Err(CensusError::MarkingMismatch { expected, found: self.header.marking_hash.clone() });
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), CensusError> {
        let mut header = self.header.clone();
        header.record_count = self.records.len();
        let json = serde_json::to_vec(&header)?;
        w.write_all(STORE_MAGIC)?;
        w.write_all(&(json.len() as u32).to_le_bytes())?;
        w.write_all(&json)?;
        let mut buf = Vec::with_capacity(self.records.len() * 48);
        for r in &self.records {
            write_varint(&mut buf, r.necklace.len() as u64)?;
            for &l in r.necklace.letters() {
                write_varint(&mut buf, l as u64)?;
            }
            buf.extend_from_slice(&r.length.to_le_bytes());
            buf.extend_from_slice(&r.holonomy.to_le_bytes());
            buf.extend_from_slice(&r.trace.re.to_le_bytes());
            buf.extend_from_slice(&r.trace.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = Vec::new();
        self.write_to(&mut v).expect("writing to memory");
        v
    }

    /// Reads a store written for the given marking; representatives are re-evaluated.
    pub fn read_from<R: Read>(r: &mut R, m: &SchottkyMarking) -> Result<Self, CensusError> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf, m)
    }

    pub fn from_bytes(buf: &[u8], m: &SchottkyMarking) -> Result<Self, CensusError> {
        if buf.len() < 8 || &buf[..4] != STORE_MAGIC {
            return Err(CensusError::Format("missing GHC1 magic".into()));
        }
        let hlen = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
        let hbytes = buf.get(8..8 + hlen).ok_or_else(|| CensusError::Format("truncated header".into()))?;
        let header: CensusHeader = serde_json::from_slice(hbytes)?;
        if header.format_version != STORE_VERSION {
            return Err(CensusError::Format(format!("unsupported format version {}", header.format_version)));
        }
        let store = CensusStore { header, records: Vec::new() };
        store.check_marking(m)?;
        let mats = m.letter_matrices();
        let mut pos = 8 + hlen;
        let mut records = Vec::with_capacity(store.header.record_count);
        for _ in 0..store.header.record_count {
            let n = read_varint(buf, &mut pos)? as usize;
            let mut letters = Vec::with_capacity(n);
            for _ in 0..n {
                let l = read_varint(buf, &mut pos)?;
                if l >= mats.len() as u64 {
                    return Err(CensusError::Format(format!("letter {l} out of range")));
                }
                letters.push(l as Letter);
            }
            let length = read_f64(buf, &mut pos)?;
            let holonomy = read_f64(buf, &mut pos)?;
            let trace = Cx::new(read_f64(buf, &mut pos)?, read_f64(buf, &mut pos)?);
            let (lambda, _, _) = length_holonomy_from_trace(trace);
            let representative = evaluate_letters(&mats, &letters);
            records.push(ConjClassRecord {
                necklace: Necklace::from_canonical(letters),
                length,
                holonomy,
                lambda,
                trace,
                representative,
            });
        }
        if pos != buf.len() {
            return Err(CensusError::Format("trailing bytes after records".into()));
        }
        Ok(CensusStore { header: store.header, records })
    }

    /// Union of two stores of the same marking, deduplicated by necklace.
    pub fn merge(mut self, other: CensusStore) -> Result<CensusStore, CensusError> {
        if self.header.marking_hash != other.header.marking_hash {
            return Err(CensusError::MarkingMismatch {
                expected: self.header.marking_hash,
                found: other.header.marking_hash,
            });
        }
        let mut seen: HashSet<Necklace> = self.records.iter().map(|r| r.necklace.clone()).collect();
        for r in other.records {
            if seen.insert(r.necklace.clone()) {
                self.records.push(r);
            }
        }
        self.records.sort_by(record_order);
        if other.header.t_max > self.header.t_max {
            self.header.t_max = other.header.t_max;
            self.header.length_bounds = other.header.length_bounds;
        }
        self.header.record_count = self.records.len();
        Ok(self)
    }
}
