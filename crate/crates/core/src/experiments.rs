//! Reports comparing censuses and orbit counts against the asymptotic predictions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::census::{CensusError, CensusStore};
use crate::exponent::{li, ExponentError};
use crate::flowbox::{vt_classify, vt_enumeration_radius, FlowBox, FlowBoxError, Sector, VtClass};
use crate::marking::CertifiedMarking;
use crate::mobius::{angle_distance, Moebius, MobiusError};
use crate::orbit::orbit_collect;
use crate::space::UhsPoint;
use crate::util::{ks_statistic, neumaier_sum};

/// Classes within this angle of a sector cut are reported as on the cut.
pub const CUT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Census(#[from] CensusError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Mobius(#[from] MobiusError),
    #[error(transparent)]
    FlowBox(#[from] FlowBoxError),
    #[error("store reaches T = {have}, report needs T = {need}")]
    IncompleteStore { have: f64, need: f64 },
    #[error("element enumeration reaches T = {have}, report needs T = {need}")]
    IncompleteEnumeration { have: f64, need: f64 },
}

fn max_grid(grid: &[f64]) -> f64 {
    grid.iter().copied().fold(0.0, f64::max)
}

/// e^{delta T} / (delta T).
pub fn count_asymptotic(delta: f64, t: f64) -> f64 {
    (delta * t).exp() / (delta * t)
}

/// (theta2 - theta1) T^{2 delta} / (2 pi delta log T) for eigenvalue modulus bound T.
pub fn sector_prediction(width: f64, delta: f64, t_eigen: f64) -> f64 {
    width * t_eigen.powf(2.0 * delta) / (2.0 * std::f64::consts::PI * delta * t_eigen.ln())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub t: f64,
    pub count: usize,
    /// count * delta T e^{-delta T}
    pub exp_ratio: f64,
    /// count / li(e^{delta T}); None when e^{delta T} < 2.
    pub li_ratio: Option<f64>,
    /// Number of all (not necessarily primitive) hyperbolic classes with length <= T.
    pub dagger_exact: usize,
    /// count + floor(T / l_min) count(T/2), an upper bound for dagger_exact.
    pub dagger_bound: usize,
}

pub fn geodesic_count_report(store: &CensusStore, delta: f64, grid: &[f64]) -> Result<Vec<CountRow>, ExperimentError> {
    let l_min = store.records.first().map(|r| r.length);
    grid.iter()
        .map(|&t| {
            let count = store.count_up_to(t)?;
            let x = (delta * t).exp();
            let li_ratio = if x >= 2.0 { Some(count as f64 / li(x)?) } else { None };
            let (dagger_exact, dagger_bound) = match l_min {
                Some(l) if count > 0 => {
                    let kmax = (t / l).floor() as usize;
                    let exact = (1..=kmax).map(|k| store.count_up_to(t / k as f64)).sum::<Result<usize, _>>()?;
                    (exact, count + kmax * store.count_up_to(t / 2.0)?)
                }
                _ => (0, 0),
            };
            Ok(CountRow {
                t,
                count,
                exp_ratio: count as f64 * delta * t * (-delta * t).exp(),
                li_ratio,
                dagger_exact,
                dagger_bound,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    pub t: f64,
    pub sectors: Vec<Sector>,
    pub counts: Vec<usize>,
    /// Classes within CUT_TOL of some sector endpoint.
    pub on_cuts: usize,
    pub total: usize,
    /// Predicted counts with eigenvalue bound e^{T/2}.
    pub predictions: Vec<f64>,
    /// KS distance of the holonomies (scaled by 1/pi) from the uniform law.
    pub ks: f64,
}

impl SectorReport {
    pub fn fractions(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| if self.total == 0 { 0.0 } else { c as f64 / self.total as f64 }).collect()
    }
}

/// Sector counts and holonomy KS distance for classes with length <= t.
pub fn holonomy_report(store: &CensusStore, sectors: &[Sector], delta: f64, t: f64) -> Result<SectorReport, ExperimentError> {
    let recs = store.up_to(t);
    if t > store.t_max() + 1e-12 {
        return Err(CensusError::GridExceedsStore(t, store.t_max()).into());
    }
    let mut counts = vec![0usize; sectors.len()];
    let mut on_cuts = 0;
    for r in recs {
        if sectors.iter().any(|s| s.near_cut(r.holonomy, CUT_TOL)) {
            on_cuts += 1;
        }
        for (i, s) in sectors.iter().enumerate() {
            if s.contains(r.holonomy) {
                counts[i] += 1;
            }
        }
    }
    let thetas: Vec<f64> = recs.iter().map(|r| r.holonomy / std::f64::consts::PI).collect();
    let t_eigen = (t / 2.0).exp();
    Ok(SectorReport {
        t,
        sectors: sectors.to_vec(),
        counts,
        on_cuts,
        total: recs.len(),
        predictions: sectors.iter().map(|s| sector_prediction(s.width(), delta, t_eigen)).collect(),
        ks: ks_statistic(&thetas, |x| x.clamp(0.0, 1.0)),
    })
}

/// A primitive conjugate whose oriented axis meets the box.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisHit {
    pub length: f64,
    pub holonomy: f64,
    pub element: Moebius,
}

/// Upper bound on d(g0 o, g o) for g in the box of radius eps.
pub fn box_radius(eps: f64) -> f64 {
    let f = (1.0 + eps * eps) * eps.exp() * (1.0 + 1.0 / (1.0 - eps * eps).powi(2));
    (f / 2.0).max(1.0).acosh() + 1e-9
}

fn axis_frame_point(h_inv: &Moebius, p: &UhsPoint) -> (f64, f64) {
    let y = p.moved_by(h_inv);
    let rho2 = y.z.norm_sqr() + y.h * y.h;
    // (distance to the axis 0 -> infinity, arc-length parameter of the projection)
    ((y.z.norm() / y.h).asinh(), 0.5 * rho2.ln())
}

/// All conjugates s g s^{-1} of census classes with length <= t_max whose axis meets B.
///
/// For each class the Gamma translates of its axis near g0 o are found by enumerating orbit
/// points tau g0 o within box_radius of the axis, one per fundamental segment of the axis.
pub fn box_hits(m: &CertifiedMarking, store: &CensusStore, b: &FlowBox, t_max: f64) -> Result<Vec<AxisHit>, ExperimentError> {
    if t_max > store.t_max() + 1e-12 {
        return Err(ExperimentError::IncompleteStore { have: store.t_max(), need: t_max });
    }
    let x0 = UhsPoint::ORIGIN.moved_by(b.base());
    let rb = box_radius(b.eps());
    let parts: Result<Vec<Vec<AxisHit>>, ExperimentError> = store
        .up_to(t_max)
        .par_iter()
        .map(|rec| {
            let g = rec.representative;
            let hd = g.hyperbolic_data()?;
            let h_inv = hd.conjugator.inverse();
            let (d_ax, s0) = axis_frame_point(&h_inv, &x0);
            let ell = rec.length;
            let radius = d_ax + ell / 2.0 + rb;
            let found = orbit_collect(m, b.base(), radius, |p| {
                let tau = p.element;
                let (dist, s) = axis_frame_point(&h_inv, &x0.moved_by(tau));
                if dist > rb || s < s0 - ell / 2.0 || s >= s0 + ell / 2.0 {
                    return None;
                }
                let conj = tau.inverse() * g * *tau;
                match b.axis_hits(&conj, 0.0) {
                    Ok(true) => Some(AxisHit { length: ell, holonomy: rec.holonomy, element: conj }),
                    _ => None,
                }
            });
            Ok(found)
        })
        .collect();
    let mut hits: Vec<AxisHit> = parts?.into_iter().flatten().collect();
    hits.sort_by(|a, b| a.length.total_cmp(&b.length));
    Ok(hits)
}

/// mu_T = 2 eps #{hits: length <= T, theta in Omega}; eta_T = sum of 2 eps / length.
pub fn mu_eta(hits: &[AxisHit], eps: f64, sector: &Sector, t: f64) -> (f64, f64) {
    let sel: Vec<&AxisHit> = hits.iter().filter(|h| h.length <= t && sector.contains(h.holonomy)).collect();
    let mu = 2.0 * eps * sel.len() as f64;
    let eta = neumaier_sum(sel.iter().map(|h| 2.0 * eps / h.length));
    (mu, eta)
}

/// Group elements that may lie in the V_T outer set for some T <= t_max, enumerated from
/// the orbit ball of the certified radius.
pub fn vt_candidates(m: &CertifiedMarking, b: &FlowBox, sector: &Sector, t_max: f64) -> Vec<Moebius> {
    let radius = vt_enumeration_radius(b.eps(), t_max);
    orbit_collect(m, b.base(), radius, |p| {
        let g = *p.element;
        (vt_classify(b, sector, t_max, &g) != VtClass::Out).then_some(g)
    })
}

/// Enumerated elements together with the level they are certified up to.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub elements: Vec<Moebius>,
    pub t_max: f64,
    pub eps: f64,
}

impl Enumeration {
    pub fn schottky(m: &CertifiedMarking, b: &FlowBox, t_max: f64) -> Self {
        Enumeration { elements: vt_candidates(m, b, &Sector::full(), t_max), t_max, eps: b.eps() }
    }

    fn check(&self, b: &FlowBox, t: f64) -> Result<(), ExperimentError> {
        if t > self.t_max + 1e-12 || b.eps() > self.eps + 1e-15 {
            return Err(ExperimentError::IncompleteEnumeration { have: self.t_max, need: t });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub t: f64,
    pub lower: usize,
    pub upper: usize,
}

pub fn vt_sandwich_counts(en: &Enumeration, b: &FlowBox, sector: &Sector, grid: &[f64]) -> Result<Vec<Sandwich>, ExperimentError> {
    en.check(b, max_grid(grid))?;
    Ok(grid
        .iter()
        .map(|&t| {
            let (mut lower, mut upper) = (0, 0);
            for g in &en.elements {
                match vt_classify(b, sector, t, g) {
                    VtClass::InLower => {
                        lower += 1;
                        upper += 1;
                    }
                    VtClass::InUpperOnly => upper += 1,
                    VtClass::Out => {}
                }
            }
            Sandwich { t, lower, upper }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRow {
    pub t: f64,
    pub mu: f64,
    pub eta: f64,
    pub vt_lower: usize,
    pub vt_upper: usize,
    /// 2 eps (inner count at eps(1 - c e^{-T/2}) and Omega shrunk by c eps, minus the
    /// outer count at T/2).
    pub comp_lower: f64,
    /// 2 eps times the outer count at T.
    pub comp_upper: f64,
    /// e^{delta T} mass / (delta 2 eps), when a BMS mass was supplied.
    pub bms_prediction: Option<f64>,
    /// 2 eps (vt_lower + vt_upper)/2 divided by bms_prediction.
    pub bms_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxMeasureReport {
    pub eps: f64,
    pub sector: Sector,
    pub c: f64,
    pub rows: Vec<BoxRow>,
}

/// Optional BMS inputs: (box mass, delta).
pub type BmsInput = Option<(f64, f64)>;

pub fn box_measure_report(
    hits: &[AxisHit],
    en: &Enumeration,
    b: &FlowBox,
    sector: &Sector,
    grid: &[f64],
    c: f64,
    bms: BmsInput,
) -> Result<BoxMeasureReport, ExperimentError> {
    let eps = b.eps();
    let main = vt_sandwich_counts(en, b, sector, grid)?;
    let mut rows = Vec::with_capacity(grid.len());
    for (&t, sw) in grid.iter().zip(&main) {
        let (mu, eta) = mu_eta(hits, eps, sector, t);
        let shrunk_eps = eps * (1.0 - c * (-t / 2.0).exp());
        let inner = if shrunk_eps > 0.0 {
            let sb = b.with_eps(shrunk_eps)?;
            vt_sandwich_counts(en, &sb, &sector.shrink(c * eps), &[t])?[0].lower
        } else {
            0
        };
        let half = vt_sandwich_counts(en, b, sector, &[t / 2.0])?[0].upper;
        let bms_prediction = bms.map(|(mass, delta)| (delta * t).exp() * mass / (delta * 2.0 * eps));
        let mid = 2.0 * eps * (sw.lower + sw.upper) as f64 / 2.0;
        rows.push(BoxRow {
            t,
            mu,
            eta,
            vt_lower: sw.lower,
            vt_upper: sw.upper,
            comp_lower: 2.0 * eps * (inner as f64 - half as f64),
            comp_upper: 2.0 * eps * sw.upper as f64,
            bms_prediction,
            bms_ratio: bms_prediction.map(|p| mid / p),
        });
    }
    Ok(BoxMeasureReport { eps, sector: *sector, c, rows })
}

/// lower <= mu_T <= upper at every row.
pub fn comparison_check(report: &BoxMeasureReport) -> bool {
    report.rows.iter().all(|r| r.comp_lower <= r.mu && r.mu <= r.comp_upper)
}

/// Whether #(W_T - W_{T/2}) <= #(primitive hits in W_T) at each grid point, for the full
/// sector, where W_T counts all powers of primitive hits.
pub fn upper2_check(hits: &[AxisHit], grid: &[f64]) -> Vec<(f64, usize, usize, bool)> {
    let prim = |t: f64| hits.iter().filter(|h| h.length <= t).count();
    let all = |t: f64| {
        hits.iter().filter(|h| h.length <= t).map(|h| (t / h.length).floor() as usize).sum::<usize>()
    };
    grid.iter()
        .map(|&t| {
            let lhs = all(t) - all(t / 2.0);
            let rhs = prim(t);
            (t, lhs, rhs, lhs <= rhs)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosingViolation {
    pub element: [[f64; 2]; 4],
    pub t_box: f64,
    pub length: f64,
    pub theta_box: f64,
    pub holonomy: f64,
    pub axis_excess: f64,
    pub failed: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosingReport {
    pub c: f64,
    pub t_min: f64,
    pub checked: usize,
    pub violations: Vec<ClosingViolation>,
    /// Violations remaining when re-examined at c = 100.
    pub violations_at_100: Option<usize>,
}

fn closing_one(b: &FlowBox, g: &Moebius, c: f64) -> Result<Option<ClosingViolation>, ExperimentError> {
    let eps = b.eps();
    let coords = b.conjugate_in(g).bruhat(crate::mobius::Orientation::PlusAMinus)?;
    let hd = g.hyperbolic_data()?;
    let excess = b.axis_excess_endpoints(hd.attracting, hd.repelling);
    let mut failed = Vec::new();
    if !(excess < c * eps * (-coords.t).exp()) {
        failed.push("axis".to_string());
    }
    if !((hd.length - coords.t).abs() <= c * eps) {
        failed.push("length".to_string());
    }
    if !(angle_distance(hd.holonomy, coords.theta) <= c * eps) {
        failed.push("holonomy".to_string());
    }
    if failed.is_empty() {
        return Ok(None);
    }
    let e = |z: crate::mobius::Cx| [z.re, z.im];
    Ok(Some(ClosingViolation {
        element: [e(g.a), e(g.b), e(g.c), e(g.d)],
        t_box: coords.t,
        length: hd.length,
        theta_box: coords.theta,
        holonomy: hd.holonomy,
        axis_excess: excess,
        failed,
    }))
}

/// Three-part check on every detected return g0^{-1} gamma g0 in n+ a_t m n- with
/// |x|, |z| < eps and t_min <= t <= en.t_max.
pub fn closing_lemma_check(en: &Enumeration, b: &FlowBox, t_min: f64, c: f64) -> Result<ClosingReport, ExperimentError> {
    en.check(b, t_min)?;
    let full = Sector::full();
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut returns = Vec::new();
    for g in &en.elements {
        if vt_classify(b, &full, en.t_max, g) != VtClass::InLower {
            continue;
        }
        let t = b.conjugate_in(g).bruhat(crate::mobius::Orientation::PlusAMinus)?.t;
        if t < t_min {
            continue;
        }
        checked += 1;
        returns.push(*g);
        if let Some(v) = closing_one(b, g, c)? {
            violations.push(v);
        }
    }
    let violations_at_100 = if violations.is_empty() {
        None
    } else {
        let mut n = 0;
        for g in &returns {
            if closing_one(b, g, 100.0)?.is_some() {
                n += 1;
            }
        }
        Some(n)
    };
    Ok(ClosingReport { c, t_min, checked, violations, violations_at_100 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbelRow {
    pub t: f64,
    pub mu: f64,
    pub eta_direct: f64,
    pub eta_stieltjes: f64,
    /// delta T e^{-delta T} eta_T >= delta e^{-delta T} mu_T
    pub upper_nlength: bool,
    pub li_main: Option<f64>,
    /// eta_T / li(e^{delta T}); reported without a threshold.
    pub li_ratio: Option<f64>,
}

/// eta_T two ways: directly as sum 2 eps / length, and as mu_T / T + integral of mu_t / t^2
/// over the jumps of mu.
pub fn abel_li_check(hits: &[AxisHit], eps: f64, sector: &Sector, delta: f64, grid: &[f64]) -> Result<Vec<AbelRow>, ExperimentError> {
    let mut lengths: Vec<f64> = hits.iter().filter(|h| sector.contains(h.holonomy)).map(|h| h.length).collect();
    lengths.sort_by(f64::total_cmp);
    grid.iter()
        .map(|&t| {
            let n = lengths.partition_point(|&l| l <= t);
            let mu = 2.0 * eps * n as f64;
            let eta_direct = neumaier_sum(lengths[..n].iter().map(|&l| 2.0 * eps / l));
            // mu_s = 2 eps j on [l_j, l_{j+1}), so the integral is exact per piece
            let pieces = (1..=n).map(|j| {
                let lo = lengths[j - 1];
                let hi = if j < n { lengths[j] } else { t };
                2.0 * eps * j as f64 * (1.0 / lo - 1.0 / hi)
            });
            let eta_stieltjes = if t > 0.0 { mu / t + neumaier_sum(pieces) } else { 0.0 };
            let x = (delta * t).exp();
            let li_main = if x >= 2.0 { Some(li(x)?) } else { None };
            Ok(AbelRow {
                t,
                mu,
                eta_direct,
                eta_stieltjes,
                upper_nlength: delta * t * (-delta * t).exp() * eta_direct >= delta * (-delta * t).exp() * mu,
                li_main,
                li_ratio: li_main.map(|l| eta_direct / l),
            })
        })
        .collect()
}
