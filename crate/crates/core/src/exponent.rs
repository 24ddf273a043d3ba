//! Critical exponent estimates from orbit counts, Poincare partial sums and li.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{picard_distances, LatticeError, DEFAULT_NORM_CAP};
use crate::marking::CertifiedMarking;
use crate::mobius::Moebius;
use crate::orbit::orbit_distances;
use crate::util::neumaier_sum;

pub const DEFAULT_MAX_REACH: f64 = 36.0;
pub const MIN_ORBIT_POINTS: usize = 1000;
const FIT_GRID: usize = 64;
const JACKKNIFE_BLOCKS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExponentError {
    #[error("radius {0} exceeds the certified reach {1}")]
    ReachExceeded(f64, f64),
    #[error("only {0} orbit points, at least {MIN_ORBIT_POINTS} needed")]
    InsufficientData(usize),
    #[error("estimate {0} is not positive")]
    NonPositive(f64),
    #[error("li is defined for x >= 2, got {0}")]
    DomainError(f64),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Anything that can list d(o, g o) for the orbit up to a radius.
pub trait OrbitSource {
    fn label(&self) -> String;
    /// Largest radius the source can certify.
    fn max_reach(&self) -> f64;
    fn distances(&self, radius: f64) -> Result<Vec<f64>, ExponentError>;
}

pub struct SchottkyOrbit<'a> {
    pub marking: &'a CertifiedMarking,
    pub base: Moebius,
    pub reach: f64,
}

impl<'a> SchottkyOrbit<'a> {
    pub fn new(marking: &'a CertifiedMarking) -> Self {
        SchottkyOrbit { marking, base: Moebius::IDENTITY, reach: DEFAULT_MAX_REACH }
    }
}

impl OrbitSource for SchottkyOrbit<'_> {
    fn label(&self) -> String {
        self.marking.marking().name.clone()
    }

    fn max_reach(&self) -> f64 {
        self.reach
    }

    fn distances(&self, radius: f64) -> Result<Vec<f64>, ExponentError> {
        Ok(orbit_distances(self.marking, &self.base, radius))
    }
}

pub struct PicardOrbit {
    pub norm_cap: f64,
}

impl Default for PicardOrbit {
    fn default() -> Self {
        PicardOrbit { norm_cap: DEFAULT_NORM_CAP }
    }
}

impl OrbitSource for PicardOrbit {
    fn label(&self) -> String {
        "picard".into()
    }

    fn max_reach(&self) -> f64 {
        (self.norm_cap * self.norm_cap / 2.0).acosh()
    }

    fn distances(&self, radius: f64) -> Result<Vec<f64>, ExponentError> {
        Ok(picard_distances(radius, self.norm_cap)?)
    }
}

/// Sorted orbit displacements, complete up to `reach`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitTable {
    pub distances: Vec<f64>,
    pub reach: f64,
}

pub fn orbit_table<S: OrbitSource + ?Sized>(src: &S, radius: f64) -> Result<OrbitTable, ExponentError> {
    if radius > src.max_reach() {
        return Err(ExponentError::ReachExceeded(radius, src.max_reach()));
    }
    Ok(OrbitTable { distances: src.distances(radius)?, reach: radius })
}

impl OrbitTable {
    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    /// N(r) = #{d <= r}.
    pub fn count(&self, r: f64) -> usize {
        self.distances.partition_point(|&d| d <= r)
    }

    fn shell(&self, lo: f64, hi: f64) -> &[f64] {
        let i = self.distances.partition_point(|&d| d <= lo);
        let j = self.distances.partition_point(|&d| d <= hi);
        &self.distances[i..j]
    }
}

/// Sum of e^{-s d} over the table.
pub fn poincare_partial(tab: &OrbitTable, s: f64) -> f64 {
    neumaier_sum(tab.distances.iter().map(|&d| (-s * d).exp()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaMethod {
    OrbitalFit,
    PoincareBisection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    /// Estimate clamped to (0, 2].
    pub delta: f64,
    pub raw: f64,
    pub method: DeltaMethod,
    pub ci: (f64, f64),
    pub radius: f64,
    pub points: usize,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn jackknife_se(leave_out: &[f64]) -> f64 {
    let n = leave_out.len() as f64;
    let mean = leave_out.iter().sum::<f64>() / n;
    ((n - 1.0) / n * leave_out.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt()
}

fn orbital_fit(tab: &OrbitTable) -> (f64, f64) {
    let r = tab.reach;
    let xs: Vec<f64> = (0..FIT_GRID).map(|j| r / 2.0 + (r / 2.0) * j as f64 / (FIT_GRID - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| (tab.count(x).max(1) as f64).ln()).collect();
    let full = slope(&xs, &ys);
    let block = FIT_GRID / JACKKNIFE_BLOCKS;
    let loo: Vec<f64> = (0..JACKKNIFE_BLOCKS)
        .map(|b| {
            let keep = |i: &usize| i / block != b;
            let x: Vec<f64> = (0..FIT_GRID).filter(keep).map(|i| xs[i]).collect();
            let y: Vec<f64> = (0..FIT_GRID).filter(keep).map(|i| ys[i]).collect();
            slope(&x, &y)
        })
        .collect();
    (full, jackknife_se(&loo))
}

fn tail_ratio_root(outer: &[f64], inner: &[f64]) -> f64 {
    let f = |s: f64| {
        let a = neumaier_sum(outer.iter().map(|&d| (-s * d).exp()));
        let b = neumaier_sum(inner.iter().map(|&d| (-s * d).exp()));
        a - b
    };
    let (mut lo, mut hi) = (1e-6, 2.5);
    if f(lo) <= 0.0 {
        return 0.0;
    }
    if f(hi) >= 0.0 {
        return hi;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn poincare_bisection(tab: &OrbitTable) -> (f64, f64) {
    let r = tab.reach;
    let outer = tab.shell(r - 2.0, r);
    let inner = tab.shell(r - 4.0, r - 2.0);
    let full = tail_ratio_root(outer, inner);
    // replicate b drops the b-th sub-window of both shells, keeping the pair aligned
    let width = 2.0 / JACKKNIFE_BLOCKS as f64;
    let loo: Vec<f64> = (0..JACKKNIFE_BLOCKS)
        .map(|b| {
            let lo = r - 2.0 + b as f64 * width;
            let hi = lo + width;
            let o: Vec<f64> = outer.iter().filter(|&&d| !(d > lo && d <= hi)).copied().collect();
            let i: Vec<f64> = inner.iter().filter(|&&d| !(d > lo - 2.0 && d <= hi - 2.0)).copied().collect();
            tail_ratio_root(&o, &i)
        })
        .collect();
    (full, jackknife_se(&loo))
}

pub fn estimate_delta(tab: &OrbitTable, method: DeltaMethod) -> Result<DeltaEstimate, ExponentError> {
    if tab.len() < MIN_ORBIT_POINTS {
        return Err(ExponentError::InsufficientData(tab.len()));
    }
    let (raw, se) = match method {
        DeltaMethod::OrbitalFit => orbital_fit(tab),
        DeltaMethod::PoincareBisection => poincare_bisection(tab),
    };
    if !(raw > 0.0) {
        return Err(ExponentError::NonPositive(raw));
    }
    Ok(DeltaEstimate {
        delta: raw.min(2.0),
        raw,
        method,
        ci: (raw - 1.96 * se, raw + 1.96 * se),
        radius: tab.reach,
        points: tab.len(),
    })
}

/// Orbit table and estimate in one step.
pub fn estimate_delta_for<S: OrbitSource + ?Sized>(
    src: &S,
    radius: f64,
    method: DeltaMethod,
) -> Result<DeltaEstimate, ExponentError> {
    estimate_delta(&orbit_table(src, radius)?, method)
}

// 15-point Kronrod nodes and weights with the embedded 7-point Gauss weights.
const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XK[j];
        let s = f(c - x) + f(c + x);
        k += WK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (v, err) = gauss_kronrod(f, a, b);
    if err <= tol.max(1e-15 * v.abs()) || depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, tol / 2.0, depth - 1) + adaptive(f, m, b, tol / 2.0, depth - 1)
}

/// li(x) = integral from 2 to x of dt / ln t, by adaptive Gauss-Kronrod in u = ln t.
pub fn li(x: f64) -> Result<f64, ExponentError> {
    if !(x >= 2.0) {
        return Err(ExponentError::DomainError(x));
    }
    if x == 2.0 {
        return Ok(0.0);
    }
    let f = |u: f64| u.exp() / u;
    let (a, b) = (2f64.ln(), x.ln());
    let rough = gauss_kronrod(&f, a, b).0.abs();
    Ok(adaptive(&f, a, b, 1e-13 * rough, 50))
}
