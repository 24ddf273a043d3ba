//! Schottky markings: generators with paired ping-pong disks, and their certificates.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::mobius::{Cx, Moebius, MobiusError, SpherePoint};
use crate::space::{GenDisk, UhsPoint};
use crate::word::{inverse_letter, Letter, Word};

pub const MARKING_SCHEMA: u32 = 1;
pub const DISK_MARGIN: f64 = 1e-6;
const SAMPLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiskSpec {
    Disk { center: [f64; 2], radius: f64 },
    Exterior { center: [f64; 2], radius: f64 },
    HalfPlane { point: [f64; 2], normal: [f64; 2] },
}

impl DiskSpec {
    pub fn to_disk(&self) -> Option<GenDisk> {
        let c = |p: &[f64; 2]| Cx::new(p[0], p[1]);
        match self {
            DiskSpec::Disk { center, radius } if *radius > 0.0 => Some(GenDisk::disk(c(center), *radius)),
            DiskSpec::Exterior { center, radius } if *radius > 0.0 => Some(GenDisk::exterior(c(center), *radius)),
            DiskSpec::HalfPlane { point, normal } if normal[0] != 0.0 || normal[1] != 0.0 => {
                Some(GenDisk::half_plane(c(point), c(normal)))
            }
            _ => None,
        }
    }
}

/// On-disk marking description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkingFile {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    /// Each generator as [[a, b], [c, d]] with complex entries [re, im].
    pub generators: Vec<[[[f64; 2]; 2]; 2]>,
    pub disks: Vec<DiskSpec>,
    /// For generator i, [index of D_i-, index of D_i+]: g_i maps the exterior of D_i- into D_i+.
    pub pairing: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Error)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    #[error("unsupported schema version {found}")]
    Schema { found: u32 },
    #[error("marking needs one pairing per generator and two disks per generator")]
    Arity { generators: usize, disks: usize, pairings: usize },
    #[error("disk {index} is degenerate")]
    BadDisk { index: usize },
    #[error("disk {index} is used by more than one pairing slot")]
    ReusedDisk { index: usize },
    #[error("generator {index} is singular")]
    Singular { index: usize },
    #[error("disks {i} and {j} overlap or are closer than the margin (separation {separation:e})")]
    Overlap { i: usize, j: usize, separation: f64 },
    #[error("generator {generator} ({direction}) fails ping-pong: {detail}")]
    PingPong { generator: usize, direction: String, detail: String },
    #[error("letter {letter} does not contract the disks it acts on (factor {factor})")]
    NoContraction { letter: usize, factor: f64 },
    #[error("no base point outside all half-spaces was found")]
    NoExteriorPoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchottkyMarking {
    pub name: String,
    pub generators: Vec<Moebius>,
    /// D_i-
    pub repelling: Vec<GenDisk>,
    /// D_i+
    pub attracting: Vec<GenDisk>,
    file: MarkingFile,
}

fn cx_pair(z: Cx) -> [f64; 2] {
    [z.re, z.im]
}

impl SchottkyMarking {
    pub fn from_file(f: MarkingFile) -> Result<Self, Violation> {
        if f.schema != MARKING_SCHEMA {
            return Err(Violation::Schema { found: f.schema });
        }
        let k = f.generators.len();
        if k == 0 || f.disks.len() != 2 * k || f.pairing.len() != k {
            return Err(Violation::Arity { generators: k, disks: f.disks.len(), pairings: f.pairing.len() });
        }
        let mut disks = Vec::with_capacity(f.disks.len());
        for (index, d) in f.disks.iter().enumerate() {
            disks.push(d.to_disk().ok_or(Violation::BadDisk { index })?);
        }
        let mut used = vec![false; 2 * k];
        for p in &f.pairing {
            for &i in p {
                if i >= 2 * k {
                    return Err(Violation::BadDisk { index: i });
                }
                if used[i] {
                    return Err(Violation::ReusedDisk { index: i });
                }
                used[i] = true;
            }
        }
        let mut generators = Vec::with_capacity(k);
        for (index, m) in f.generators.iter().enumerate() {
            let e = |p: [f64; 2]| Cx::new(p[0], p[1]);
            let g = Moebius::normalize([[e(m[0][0]), e(m[0][1])], [e(m[1][0]), e(m[1][1])]])
                .map_err(|_| Violation::Singular { index })?;
            generators.push(g);
        }
        Ok(SchottkyMarking {
            name: f.name.clone(),
            generators,
            repelling: f.pairing.iter().map(|p| disks[p[0]]).collect(),
            attracting: f.pairing.iter().map(|p| disks[p[1]]).collect(),
            file: f,
        })
    }

    pub fn from_json(s: &str) -> Result<Self, MarkingError> {
        let f: MarkingFile = serde_json::from_str(s)?;
        Ok(Self::from_file(f)?)
    }

    pub fn file(&self) -> &MarkingFile {
        &self.file
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("marking serialises")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let s = serde_json::to_string(&self.file).expect("marking serialises");
        format!("{:x}", Sha256::digest(s.as_bytes()))
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn letter_matrix(&self, l: Letter) -> Moebius {
        let g = self.generators[(l / 2) as usize];
        if l % 2 == 0 {
            g
        } else {
            g.inverse()
        }
    }

    /// The disk D+_l that letter l maps the exterior of D+_{l^-1} into.
    pub fn letter_disk(&self, l: Letter) -> GenDisk {
        let i = (l / 2) as usize;
        if l % 2 == 0 {
            self.attracting[i]
        } else {
            self.repelling[i]
        }
    }

    pub fn all_disks(&self) -> Vec<GenDisk> {
        (0..2 * self.rank() as Letter).map(|l| self.letter_disk(l)).collect()
    }

    pub fn evaluate(&self, w: &Word) -> Moebius {
        evaluate_letters(&self.letter_matrices(), w.letters())
    }

    pub fn letter_matrices(&self) -> Vec<Moebius> {
        (0..2 * self.rank() as Letter).map(|l| self.letter_matrix(l)).collect()
    }

    /// The marking conjugated by phi: generators phi g phi^{-1}, disks phi(D).
    pub fn conjugated(&self, phi: &Moebius) -> SchottkyMarking {
        let pi = phi.inverse();
        let generators: Vec<Moebius> = self.generators.iter().map(|g| phi * &(g * &pi)).collect();
        let repelling: Vec<GenDisk> = self.repelling.iter().map(|d| d.image(phi)).collect();
        let attracting: Vec<GenDisk> = self.attracting.iter().map(|d| d.image(phi)).collect();
        let k = generators.len();
        let mut disks = Vec::with_capacity(2 * k);
        let mut pairing = Vec::with_capacity(k);
        for i in 0..k {
            disks.push(disk_spec(&repelling[i]));
            disks.push(disk_spec(&attracting[i]));
            pairing.push([2 * i, 2 * i + 1]);
        }
        let file = MarkingFile {
            schema: MARKING_SCHEMA,
            name: self.name.clone(),
            generators: generators
                .iter()
                .map(|g| [[cx_pair(g.a), cx_pair(g.b)], [cx_pair(g.c), cx_pair(g.d)]])
                .collect(),
            disks,
            pairing,
        };
        SchottkyMarking { name: self.name.clone(), generators, repelling, attracting, file }
    }

    /// Disjointness, ping-pong and contraction checks.
    pub fn verify(&self) -> Result<Certificate, Violation> {
        let disks = self.all_disks();
        let n = disks.len();
        let mut min_separation = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                let sep = separation(&disks[i], &disks[j]);
                min_separation = min_separation.min(sep);
                if !(sep >= DISK_MARGIN) {
                    return Err(Violation::Overlap { i: disk_file_index(self, i), j: disk_file_index(self, j), separation: sep });
                }
            }
        }
        for (i, g) in self.generators.iter().enumerate() {
            ping_pong(i, "forward", g, &self.repelling[i], &self.attracting[i])?;
            ping_pong(i, "inverse", &g.inverse(), &self.attracting[i], &self.repelling[i])?;
        }
        let (frame, bounded) = self.bounded_frame()?;
        let costs = pair_costs(&bounded);
        let k2 = n;
        let mut letter_contraction = vec![0.0; k2];
        for l in 0..k2 {
            let worst = (0..k2)
                .filter(|&r| r != inverse_letter(l as Letter) as usize)
                .map(|r| (-costs[l][r]).exp())
                .fold(0.0, f64::max);
            letter_contraction[l] = worst;
            if !(worst < 1.0) {
                return Err(Violation::NoContraction { letter: l, factor: worst });
            }
        }
        let contraction = (0..self.rank())
            .map(|i| letter_contraction[2 * i].max(letter_contraction[2 * i + 1]))
            .collect();
        let base_point = exterior_base_point(&disks).ok_or(Violation::NoExteriorPoint)?;
        Ok(Certificate {
            min_separation,
            contraction,
            pair_costs: costs,
            frame,
            base_point,
            zariski_dense_heuristic: zariski_heuristic(&self.generators),
        })
    }

    /// A conjugate with every disk bounded (infinity outside all closed disks), with the
    /// conjugating map; the identity when the marking already has that form.
    pub fn bounded_frame(&self) -> Result<(Moebius, SchottkyMarking), Violation> {
        let disks = self.all_disks();
        if disks.iter().all(|d| d.is_bounded()) {
            return Ok((Moebius::IDENTITY, self.clone()));
        }
        let omega = exterior_sphere_point(&disks).ok_or(Violation::NoExteriorPoint)?;
        let phi = Moebius::from_entries(Cx::new(0.0, 0.0), Cx::new(1.0, 0.0), Cx::new(1.0, 0.0), -omega)
            .expect("inversion about omega is invertible");
        Ok((phi, self.conjugated(&phi)))
    }
}

fn disk_file_index(m: &SchottkyMarking, letter_index: usize) -> usize {
    let gen = letter_index / 2;
    let slot = if letter_index % 2 == 0 { 1 } else { 0 };
    m.file.pairing[gen][slot]
}

fn disk_spec(d: &GenDisk) -> DiskSpec {
    match d.circle() {
        Some((c, r)) if d.is_bounded() => DiskSpec::Disk { center: cx_pair(c), radius: r },
        Some((c, r)) => DiskSpec::Exterior { center: cx_pair(c), radius: r },
        None => {
            let nrm = d.b * 2.0;
            let foot = -nrm * (d.d / nrm.norm_sqr());
            DiskSpec::HalfPlane { point: cx_pair(foot), normal: cx_pair(nrm) }
        }
    }
}

/// Margin between two regions: Euclidean gap when both are bounded disks, otherwise the
/// hyperbolic distance between the half-spaces; negative or NaN when they meet.
pub fn separation(d1: &GenDisk, d2: &GenDisk) -> f64 {
    if d1.is_bounded() && d2.is_bounded() {
        let (c1, r1) = d1.circle().unwrap();
        let (c2, r2) = d2.circle().unwrap();
        (c1 - c2).norm() - r1 - r2
    } else {
        let ip = d1.inversive_product(d2);
        if ip >= 1.0 {
            ip.acosh()
        } else {
            ip - 1.0
        }
    }
}

fn ping_pong(i: usize, dir: &str, g: &Moebius, from: &GenDisk, to: &GenDisk) -> Result<(), Violation> {
    let fail = |detail: String| Violation::PingPong { generator: i, direction: dir.to_string(), detail };
    let image = from.complement().image(g);
    let ip = image.inversive_product(&to.complement());
    if !(ip >= 1.0 - 1e-9) {
        return Err(fail(format!("image of the exterior is not inside the partner disk (inversive product {ip})")));
    }
    for p in from.boundary_samples(64) {
        let q = g.act(p);
        if !to.contains_closed(q, SAMPLE_TOL * scale(to)) {
            return Err(fail(format!("boundary sample {p:?} maps to {q:?}, outside the partner disk")));
        }
    }
    let probe = from.complement().interior_point();
    if !to.contains(g.act(probe)) {
        return Err(fail("an exterior point does not map into the partner disk".into()));
    }
    Ok(())
}

fn scale(d: &GenDisk) -> f64 {
    match d.circle() {
        Some((c, r)) => 1.0 + c.norm() + r,
        None => 1.0,
    }
}

/// Sphere points spread over the sphere (Fibonacci lattice).
fn sphere_probes(n: usize) -> Vec<SpherePoint> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            SpherePoint::from_unit_vector([r * phi.cos(), r * phi.sin(), z])
        })
        .collect()
}

fn exterior_sphere_point(disks: &[GenDisk]) -> Option<Cx> {
    let mut best: Option<(f64, Cx)> = None;
    for p in sphere_probes(2000) {
        let z = match p {
            SpherePoint::Finite(z) => z,
            SpherePoint::Infinity => continue,
        };
        let v = SpherePoint::Finite(z);
        let margin = disks
            .iter()
            .map(|d| {
                let s = d.signed_value(v) / (1.0 + z.norm_sqr());
                s
            })
            .fold(f64::INFINITY, f64::min);
        if margin > 0.0 && best.map_or(true, |(m, _)| margin > m) {
            best = Some((margin, z));
        }
    }
    best.map(|(_, z)| z)
}

/// A point of upper half-space outside every closed half-space over the disks; the
/// standard point (0,0,1) when it qualifies.
fn exterior_base_point(disks: &[GenDisk]) -> Option<UhsPoint> {
    let outside = |p: &UhsPoint| {
        disks.iter().all(|d| {
            let n = d.a * (p.z.norm_sqr() + p.h * p.h) + 2.0 * (d.b.conj() * p.z).re + d.d;
            n > 1e-9
        })
    };
    if outside(&UhsPoint::ORIGIN) {
        return Some(UhsPoint::ORIGIN);
    }
    let mut best: Option<(f64, UhsPoint)> = None;
    for p in sphere_probes(400) {
        if let SpherePoint::Finite(z) = p {
            for e in -6..=6 {
                let q = UhsPoint::new(z, 2f64.powi(e));
                if outside(&q) {
                    let d = q.distance(&UhsPoint::ORIGIN);
                    if best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, q));
                    }
                }
            }
        }
    }
    best.map(|(_, q)| q)
}

/// c(l|r) = -ln max over D+_r of |l'(z)|, for a marking with bounded disks.
pub fn pair_costs(m: &SchottkyMarking) -> Vec<Vec<f64>> {
    let k2 = 2 * m.rank();
    let mut out = vec![vec![f64::INFINITY; k2]; k2];
    for l in 0..k2 {
        let s = m.letter_matrix(l as Letter);
        for r in 0..k2 {
            if r == inverse_letter(l as Letter) as usize {
                continue;
            }
            let sup = sup_derivative_on_disk(&s, &m.letter_disk(r as Letter));
            out[l][r] = -sup.ln();
        }
    }
    out
}

/// sup over the bounded disk D of |g'(z)|, infinite when the pole is in the closed disk.
pub fn sup_derivative_on_disk(g: &Moebius, d: &GenDisk) -> f64 {
    let (c, r) = d.circle().expect("bounded disk");
    if g.c.norm() == 0.0 {
        return 1.0 / g.d.norm_sqr();
    }
    let pole = -g.d / g.c;
    let gap = (pole - c).norm() - r;
    if gap <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / (g.c.norm() * gap).powi(2)
    }
}

fn zariski_heuristic(gens: &[Moebius]) -> bool {
    if gens.len() < 2 {
        return false;
    }
    let nonreal = |g: &Moebius| {
        let t = g.trace_sq();
        t.im.abs() > 1e-9 * t.norm().max(1.0)
    };
    let mut any_nonreal = gens.iter().any(nonreal);
    let mut noncommuting = false;
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let p = gens[i] * gens[j];
            let q = gens[i] * gens[j].inverse();
            any_nonreal |= nonreal(&p) || nonreal(&q);
            let comm = p * (gens[i].inverse() * gens[j].inverse());
            noncommuting |= !comm.is_identity(1e-9) && (comm.trace_sq() - Cx::new(4.0, 0.0)).norm() > 1e-9;
        }
    }
    any_nonreal && noncommuting
}

pub fn evaluate_letters(mats: &[Moebius], letters: &[Letter]) -> Moebius {
    let mut m = Moebius::IDENTITY;
    for (i, &l) in letters.iter().enumerate() {
        m = m.mul_raw(&mats[l as usize]);
        if i % 8 == 7 {
            m.renormalize();
        }
    }
    m.canonical()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// Smallest pairwise separation between the 2k disks.
    pub min_separation: f64,
    /// Per generator, the larger of the contraction factors of g_i and g_i^{-1}.
    pub contraction: Vec<f64>,
    /// c(l|r) in the bounded frame; infinite on forbidden pairs r = l^{-1}.
    pub pair_costs: Vec<Vec<f64>>,
    /// Conjugating map to the bounded frame.
    pub frame: Moebius,
    /// Point of upper half-space outside every half-space over the disks.
    pub base_point: UhsPoint,
    /// Heuristic only: nonelementary with a non-real trace among generators and pair products.
    pub zariski_dense_heuristic: bool,
}

#[derive(Debug, Error)]
pub enum MarkingError {
    #[error("marking is not certified: {0}")]
    NotCertified(#[from] Violation),
    #[error("cannot read marking: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Mobius(#[from] MobiusError),
}

/// A marking together with its certificate and cached lower bounds on word lengths.
#[derive(Clone, Debug)]
pub struct CertifiedMarking {
    marking: SchottkyMarking,
    bounded: SchottkyMarking,
    certificate: Certificate,
    bounds: Vec<f64>,
}

const BOUND_TABLE: usize = 512;

impl CertifiedMarking {
    pub fn new(marking: SchottkyMarking) -> Result<Self, Violation> {
        let certificate = marking.verify()?;
        let bounded = if certificate.frame == Moebius::IDENTITY {
            marking.clone()
        } else {
            marking.conjugated(&certificate.frame)
        };
        let bounds = length_bounds(&certificate.pair_costs, BOUND_TABLE);
        Ok(CertifiedMarking { marking, bounded, certificate, bounds })
    }

    pub fn marking(&self) -> &SchottkyMarking {
        &self.marking
    }

    /// The conjugate used for derivative bounds, with all disks bounded.
    pub fn bounded(&self) -> &SchottkyMarking {
        &self.bounded
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    /// L(n): every cyclically reduced word of length n has length at least L(n).
    pub fn displacement_lower_bound(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        if n <= self.bounds.len() {
            self.bounds[n - 1]
        } else {
            let min_cost = self.min_pair_cost();
            self.bounds[self.bounds.len() - 1] + min_cost * (n - self.bounds.len()) as f64
        }
    }

    pub fn min_pair_cost(&self) -> f64 {
        self.certificate.pair_costs.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// N(T) = min{n : L(n) > T}.
    pub fn word_length_bound(&self, t: f64) -> usize {
        let mut n = 1;
        while self.displacement_lower_bound(n) <= t {
            n += 1;
        }
        n
    }
}

/// Monotone lower bounds L(1..=n) from min-plus closed walks of the pair cost graph.
fn length_bounds(costs: &[Vec<f64>], n: usize) -> Vec<f64> {
    let k2 = costs.len();
    let min_cost = costs.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let mut raw = Vec::new();
    // walks[s][v]: cheapest walk of the current length from s to v
    let mut walks: Vec<Vec<f64>> = costs.to_vec();
    let mut max_needed = f64::INFINITY;
    let mut m = 1;
    loop {
        let closed = (0..k2).map(|s| walks[s][s]).fold(f64::INFINITY, f64::min);
        raw.push(closed);
        if m == n {
            max_needed = raw.iter().copied().fold(0.0, f64::max);
        }
        if m >= n && (m as f64) * min_cost > max_needed {
            break;
        }
        let mut next = vec![vec![f64::INFINITY; k2]; k2];
        for s in 0..k2 {
            for u in 0..k2 {
                let w = walks[s][u];
                if !w.is_finite() {
                    continue;
                }
                for v in 0..k2 {
                    let c = w + costs[u][v];
                    if c < next[s][v] {
                        next[s][v] = c;
                    }
                }
            }
        }
        walks = next;
        m += 1;
    }
    let mut out = vec![0.0; raw.len()];
    let mut run = f64::INFINITY;
    for i in (0..raw.len()).rev() {
        run = run.min(raw[i]);
        out[i] = run;
    }
    out.truncate(n);
    out
}

fn file_matrix(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> [[[f64; 2]; 2]; 2] {
    [[a, b], [c, d]]
}

fn disk(cx: f64, cy: f64, r: f64) -> DiskSpec {
    DiskSpec::Disk { center: [cx, cy], radius: r }
}

/// Two generators z -> 2 + 1/(z+2) and z -> 2i + 1/(z+2i) pairing D(-2,1) with D(2,1) and
/// D(-2i,1) with D(2i,1).
pub fn fixture_s2() -> MarkingFile {
    fixture_s2_with_radius(1.0)
}

pub fn fixture_s2_with_radius(r: f64) -> MarkingFile {
    MarkingFile {
        schema: MARKING_SCHEMA,
        name: "s2".into(),
        generators: vec![
            file_matrix([2.0, 0.0], [5.0, 0.0], [1.0, 0.0], [2.0, 0.0]),
            file_matrix([0.0, 2.0], [-3.0, 0.0], [1.0, 0.0], [0.0, 2.0]),
        ],
        disks: vec![disk(-2.0, 0.0, r), disk(2.0, 0.0, r), disk(0.0, -2.0, r), disk(0.0, 2.0, r)],
        pairing: vec![[0, 1], [2, 3]],
    }
}

/// One generator z -> 2 + 1/(z+2) pairing D(-2,1) with D(2,1).
pub fn fixture_single() -> MarkingFile {
    MarkingFile {
        schema: MARKING_SCHEMA,
        name: "single".into(),
        generators: vec![file_matrix([2.0, 0.0], [5.0, 0.0], [1.0, 0.0], [2.0, 0.0])],
        disks: vec![disk(-2.0, 0.0, 1.0), disk(2.0, 0.0, 1.0)],
        pairing: vec![[0, 1]],
    }
}

/// Two real generators z -> 2 - 1/(z+2) and z -> 5 - 1/(z+5); the group preserves the
/// upper half-plane.
pub fn fixture_fuchsian() -> MarkingFile {
    MarkingFile {
        schema: MARKING_SCHEMA,
        name: "fuchsian".into(),
        generators: vec![
            file_matrix([2.0, 0.0], [3.0, 0.0], [1.0, 0.0], [2.0, 0.0]),
            file_matrix([5.0, 0.0], [24.0, 0.0], [1.0, 0.0], [5.0, 0.0]),
        ],
        disks: vec![disk(-2.0, 0.0, 1.0), disk(2.0, 0.0, 1.0), disk(-5.0, 0.0, 1.0), disk(5.0, 0.0, 1.0)],
        pairing: vec![[0, 1], [2, 3]],
    }
}

pub fn certified(f: MarkingFile) -> Result<CertifiedMarking, Violation> {
    CertifiedMarking::new(SchottkyMarking::from_file(f)?)
}

pub fn s2() -> CertifiedMarking {
    certified(fixture_s2()).expect("fixture s2 certifies")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s2_certifies() {
        let m = s2();
        let c = m.certificate();
        assert!((c.min_separation - (2.0 * 2f64.sqrt() - 2.0)).abs() < 1e-12);
        assert!(c.contraction.iter().all(|&k| k < 0.31));
        assert!(c.zariski_dense_heuristic);
        assert_eq!(c.base_point, UhsPoint::ORIGIN);
    }

    #[test]
    fn overlapping_disks_are_rejected() {
        let m = SchottkyMarking::from_file(fixture_s2_with_radius(1.5)).unwrap();
        assert!(matches!(m.verify(), Err(Violation::Overlap { .. })));
    }

    #[test]
    fn bounds_are_monotone() {
        let m = s2();
        let l: Vec<f64> = (1..40).map(|n| m.displacement_lower_bound(n)).collect();
        assert!(l.windows(2).all(|w| w[1] >= w[0]));
        assert!(l[0] <= 2.0 * (2.0 + 3f64.sqrt()).ln());
    }

    #[test]
    fn fuchsian_is_not_flagged_dense() {
        let m = certified(fixture_fuchsian()).unwrap();
        assert!(!m.certificate().zariski_dense_heuristic);
    }
}
