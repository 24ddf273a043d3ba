//! Flow boxes g0 (N+_eps N- cap N-_eps N+ A M) M_eps A_eps, sectors, and the counting sets S_T and V_T.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mobius::{reduce_angle, Cx, Moebius, MobiusError, Orientation, SpherePoint, CHART_TOL};
use crate::space::GenDisk;

pub const MAX_EPS: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowBoxError {
    #[error("box radius {0} must lie in (0, {MAX_EPS}]")]
    BadRadius(f64),
    #[error("element is not in the box")]
    NotInBox,
    #[error("sector bounds must satisfy 0 <= lo < hi <= pi (got {0}, {1})")]
    BadSector(f64, f64),
    #[error(transparent)]
    Mobius(#[from] MobiusError),
}

/// Coordinates of an element of the box relative to its base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxCoords {
    pub x: Cx,
    pub z: Cx,
    pub t: f64,
    /// Signed M parameter in (-pi/2, pi/2].
    pub theta: f64,
}

impl BoxCoords {
    /// max(|x|, |z|, |t|, |theta|).
    pub fn excess(&self) -> f64 {
        self.x.norm().max(self.z.norm()).max(self.t.abs()).max(self.theta.abs())
    }

    /// The element g0^{-1} g with these coordinates.
    pub fn element(&self) -> Moebius {
        // h = n+(x) n-(w) a_t m_theta with z = w / (1 + x w)
        let w = self.z / (Cx::new(1.0, 0.0) - self.x * self.z);
        Moebius::n_plus(self.x)
            .mul_raw(&Moebius::n_minus(w))
            .mul_raw(&Moebius::am(self.t, self.theta))
            .canonical()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoxMembership {
    Inside(BoxCoords),
    Outside,
}

fn signed_half_turn(theta: f64) -> f64 {
    let r = reduce_angle(theta);
    if r > FRAC_PI_2 {
        r - PI
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowBox {
    base: Moebius,
    base_inv: Moebius,
    eps: f64,
}

impl FlowBox {
    pub fn new(base: Moebius, eps: f64) -> Result<Self, FlowBoxError> {
        if !(eps > 0.0 && eps <= MAX_EPS) {
            return Err(FlowBoxError::BadRadius(eps));
        }
        Ok(FlowBox { base, base_inv: base.inverse(), eps })
    }

    pub fn base(&self) -> &Moebius {
        &self.base
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self, FlowBoxError> {
        FlowBox::new(self.base, eps)
    }

    /// g0^{-1} g.
    pub fn relative(&self, g: &Moebius) -> Moebius {
        self.base_inv.mul_raw(g)
    }

    /// g0^{-1} g g0.
    pub fn conjugate_in(&self, g: &Moebius) -> Moebius {
        self.base_inv.mul_raw(g).mul_raw(&self.base)
    }

    /// Box coordinates of g whether or not g lies in the box; None outside both charts.
    pub fn raw_coords(&self, g: &Moebius) -> Option<BoxCoords> {
        let h = self.relative(g);
        if h.a.norm() <= CHART_TOL || h.d.norm() <= CHART_TOL {
            return None;
        }
        Some(BoxCoords {
            x: h.c / h.a,
            z: h.b / h.d,
            t: 2.0 * h.a.norm().ln(),
            theta: signed_half_turn(h.a.im.atan2(h.a.re)),
        })
    }

    pub fn box_coords(&self, g: &Moebius) -> BoxMembership {
        match self.raw_coords(g) {
            Some(c) if c.excess() < self.eps => BoxMembership::Inside(c),
            _ => BoxMembership::Outside,
        }
    }

    pub fn contains(&self, g: &Moebius) -> bool {
        matches!(self.box_coords(g), BoxMembership::Inside(_))
    }

    /// {t : g a_t in the box}.
    pub fn return_window(&self, g: &Moebius) -> Result<(f64, f64), FlowBoxError> {
        match self.box_coords(g) {
            BoxMembership::Inside(c) => Ok((-self.eps - c.t, self.eps - c.t)),
            BoxMembership::Outside => Err(FlowBoxError::NotInBox),
        }
    }

    /// (B v+, B v-): the forward endpoints g0 N+_eps v+ and backward endpoints g0 N-_eps v-,
    /// with v+ = infinity and v- = 0.
    pub fn boundary_images(&self) -> (GenDisk, GenDisk) {
        let fwd = GenDisk::exterior(Cx::new(0.0, 0.0), 1.0 / self.eps).image(&self.base);
        let bwd = GenDisk::disk(Cx::new(0.0, 0.0), self.eps).image(&self.base);
        (fwd, bwd)
    }

    /// Smallest slack s for which the oriented axis from `repelling` to `attracting`
    /// meets the box of radius eps + s; zero or negative means it meets this box.
    pub fn axis_excess_endpoints(&self, attracting: SpherePoint, repelling: SpherePoint) -> f64 {
        let att = self.base_inv.act(attracting);
        let rep = self.base_inv.act(repelling);
        let x = match att {
            SpherePoint::Infinity => 0.0,
            SpherePoint::Finite(w) => 1.0 / w.norm(),
        };
        let z = match rep {
            SpherePoint::Infinity => f64::INFINITY,
            SpherePoint::Finite(w) => w.norm(),
        };
        x.max(z) - self.eps
    }

    pub fn axis_excess(&self, gamma: &Moebius) -> Result<f64, MobiusError> {
        let hd = gamma.hyperbolic_data()?;
        Ok(self.axis_excess_endpoints(hd.attracting, hd.repelling))
    }

    /// Whether h a_t m_theta lies in the box of radius eps + slack for some (t, theta),
    /// h the conjugator of gamma.
    pub fn axis_hits(&self, gamma: &Moebius, slack: f64) -> Result<bool, MobiusError> {
        Ok(self.axis_excess(gamma)? < slack)
    }
}

/// A holonomy sector: the half-open arc [lo, lo + width) of R / pi Z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    lo: f64,
    width: f64,
}

impl Sector {
    pub fn new(lo: f64, hi: f64) -> Result<Self, FlowBoxError> {
        if !(lo >= 0.0 && lo < hi && hi <= PI) {
            return Err(FlowBoxError::BadSector(lo, hi));
        }
        Ok(Sector { lo, width: hi - lo })
    }

    pub fn full() -> Self {
        Sector { lo: 0.0, width: PI }
    }

    pub fn empty() -> Self {
        Sector { lo: 0.0, width: 0.0 }
    }

    /// n equal sectors partitioning [0, pi).
    pub fn partition(n: usize) -> Vec<Sector> {
        (0..n)
            .map(|i| Sector { lo: PI * i as f64 / n as f64, width: PI / n as f64 })
            .collect()
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.width
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn is_full(&self) -> bool {
        self.width >= PI
    }

    pub fn is_empty(&self) -> bool {
        self.width <= 0.0
    }

    /// Haar probability of the corresponding subset of M.
    pub fn volume(&self) -> f64 {
        self.width.clamp(0.0, PI) / PI
    }

    pub fn contains(&self, theta: f64) -> bool {
        if self.is_full() {
            return true;
        }
        if self.is_empty() {
            return false;
        }
        (theta - self.lo).rem_euclid(PI) < self.width
    }

    /// Whether theta lies within tol of an endpoint.
    pub fn near_cut(&self, theta: f64, tol: f64) -> bool {
        if self.is_full() || self.is_empty() {
            return false;
        }
        let d = |c: f64| {
            let r = (theta - c).rem_euclid(PI);
            r.min(PI - r)
        };
        d(self.lo) < tol || d(self.hi()) < tol
    }

    /// Union of m1 Omega m2 over m1, m2 in M_delta: widen by 2 delta on each side.
    pub fn thicken(&self, delta: f64) -> Sector {
        if self.is_empty() {
            return *self;
        }
        let width = self.width + 4.0 * delta;
        if width >= PI {
            Sector::full()
        } else {
            Sector { lo: (self.lo - 2.0 * delta).rem_euclid(PI), width }
        }
    }

    /// Intersection of m1 Omega m2 over m1, m2 in M_delta: shrink by 2 delta on each side.
    pub fn shrink(&self, delta: f64) -> Sector {
        if self.is_full() {
            return *self;
        }
        let width = self.width - 4.0 * delta;
        if width <= 0.0 {
            Sector::empty()
        } else {
            Sector { lo: self.lo + 2.0 * delta, width }
        }
    }
}

/// The set n+(B(eps_plus)) {a_t : 0 < t <= t_max} Omega n-(B(eps_minus)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct STSpec {
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub sector: Sector,
    pub t_max: f64,
}

impl STSpec {
    pub fn contains(&self, gamma: &Moebius) -> bool {
        match gamma.bruhat(Orientation::PlusAMinus) {
            Ok(c) => {
                c.x.norm() < self.eps_plus
                    && c.z.norm() < self.eps_minus
                    && c.t > 0.0
                    && c.t <= self.t_max
                    && self.sector.contains(c.theta)
            }
            Err(_) => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VtClass {
    InLower,
    InUpperOnly,
    Out,
}

/// Bounds describing a superset of B a_s m B^{-1} (0 < s <= T, m in Omega) in base-frame
/// Bruhat coordinates, for an element whose A coordinate is t.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuterBounds {
    pub x: f64,
    pub z: f64,
    pub t_lo: f64,
    pub t_extra: f64,
    pub theta: f64,
}

pub fn outer_bounds(eps: f64, t: f64) -> OuterBounds {
    let eps_w = eps / (1.0 - eps * eps);
    let u0 = eps_w * (1.0 + (2.0 * eps).exp());
    let n0 = 1.0 + eps * u0;
    let q = (-t).exp();
    let u = eps_w * (1.0 + (2.0 * eps).exp().min(q * n0 * n0));
    let eu = eps * u;
    let x_extra = (q * (1.0 + eu)).min((2.0 * eps).exp() / (1.0 - eu));
    OuterBounds {
        x: eps * (1.0 + x_extra),
        z: u / (1.0 - eu),
        t_lo: -2.0 * eps + 2.0 * (1.0 - eu).ln(),
        t_extra: 2.0 * eps + 2.0 * (1.0 + eu).ln(),
        theta: 2.0 * eps + eu.min(1.0).asin(),
    }
}

/// Displacement d(o, g o) bound for base-frame elements of the outer set at level T.
pub fn vt_enumeration_radius(eps: f64, t_max: f64) -> f64 {
    let eps_w = eps / (1.0 - eps * eps);
    let u0 = eps_w * (1.0 + (2.0 * eps).exp());
    let eu = eps * u0;
    let x_max = eps * (1.0 + (2.0 * eps).exp() / (1.0 - eu));
    let z_max = u0 / (1.0 - eu);
    let t_abs = (t_max + 2.0 * eps + 2.0 * (1.0 + eu).ln()).max(2.0 * eps - 2.0 * (1.0 - eu).ln());
    t_abs + 2.0 * (1.0 + x_max).ln() + 2.0 * (1.0 + z_max).ln() + 1e-9
}

/// Sandwich classification for V_T(g0, eps, Omega) = B a_T+ Omega B^{-1}.
pub fn vt_classify(b: &FlowBox, sector: &Sector, t_max: f64, gamma: &Moebius) -> VtClass {
    let g = b.conjugate_in(gamma);
    let c = match g.bruhat(Orientation::PlusAMinus) {
        Ok(c) => c,
        Err(_) => return VtClass::Out,
    };
    let eps = b.eps();
    let inner = STSpec { eps_plus: eps, eps_minus: eps, sector: *sector, t_max };
    if inner.contains(&g) {
        return VtClass::InLower;
    }
    if sector.is_empty() {
        return VtClass::Out;
    }
    let o = outer_bounds(eps, c.t);
    if c.x.norm() <= o.x
        && c.z.norm() <= o.z
        && c.t > o.t_lo
        && c.t <= t_max + o.t_extra
        && sector.thicken(o.theta / 2.0).contains(c.theta)
    {
        VtClass::InUpperOnly
    } else {
        VtClass::Out
    }
}

/// Half the minimal surrogate displacement of g0 over the given group elements.
pub fn injectivity_bound<I: IntoIterator<Item = Moebius>>(base: &Moebius, elements: I) -> f64 {
    let bi = base.inverse();
    elements
        .into_iter()
        .map(|g| {
            let k = bi.mul_raw(&g).mul_raw(base);
            crate::mobius::group_distance(&Moebius::IDENTITY, &k)
        })
        .fold(f64::INFINITY, f64::min)
        / 2.0
}
