//! PSL(2,C) elements in double precision.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Cx = Complex64;

pub const SINGULAR_TOL: f64 = 1e-14;
pub const CHART_TOL: f64 = 1e-12;
pub const NEAR_BOUNDARY_TOL: f64 = 1e-9;

const ZERO: Cx = Cx::new(0.0, 0.0);
const ONE: Cx = Cx::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MobiusError {
    #[error("singular matrix (|det| = {0:e})")]
    SingularMatrix(f64),
    #[error("element lies outside the {0:?} chart")]
    OutsideChart(Orientation),
    #[error("element is not hyperbolic (classified as {0:?})")]
    NotHyperbolic(ElementTag),
    #[error("trace squared is within 1e-9 of 4, eigen-data is ill-conditioned")]
    NearBoundary,
}

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpherePoint {
    Finite(Cx),
    Infinity,
}

impl SpherePoint {
    /// Point with homogeneous coordinates (num : den).
    pub fn projective(num: Cx, den: Cx) -> Self {
        if den == ZERO {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(num / den)
        }
    }

    pub fn finite(self) -> Option<Cx> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// Unit vector under inverse stereographic projection (infinity is the north pole).
    pub fn to_unit_vector(self) -> [f64; 3] {
        match self {
            SpherePoint::Infinity => [0.0, 0.0, 1.0],
            SpherePoint::Finite(z) => {
                let n = z.norm_sqr();
                let s = 1.0 + n;
                [2.0 * z.re / s, 2.0 * z.im / s, (n - 1.0) / s]
            }
        }
    }

    pub fn from_unit_vector(v: [f64; 3]) -> Self {
        let den = 1.0 - v[2];
        if den <= 0.0 {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(Cx::new(v[0] / den, v[1] / den))
        }
    }

    /// Chordal distance on the unit sphere, in [0, 2].
    pub fn chordal(self, other: SpherePoint) -> f64 {
        match (self, other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            (SpherePoint::Finite(z), SpherePoint::Infinity)
            | (SpherePoint::Infinity, SpherePoint::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
            (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
                2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
            }
        }
    }
}

/// A 2x2 complex matrix of determinant one, read as an element of PSL(2,C).
///
/// Constructors and products return the canonical sign: the first entry in
/// (a, b, c, d) order with modulus above 1e-14 has argument in [0, pi).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moebius {
    pub a: Cx,
    pub b: Cx,
    pub c: Cx,
    pub d: Cx,
}

impl fmt::Display for Moebius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

fn in_upper_half_turn(z: Cx) -> bool {
    let arg = z.im.atan2(z.re);
    (0.0..PI).contains(&arg)
}

impl Moebius {
    pub const IDENTITY: Moebius = Moebius { a: ONE, b: ZERO, c: ZERO, d: ONE };

    /// Rescale a raw matrix to determinant one and apply the canonical sign.
    pub fn normalize(m: [[Cx; 2]; 2]) -> Result<Self, MobiusError> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.norm() <= SINGULAR_TOL {
            return Err(MobiusError::SingularMatrix(det.norm()));
        }
        let s = det.sqrt().inv();
        Ok(Moebius { a: m[0][0] * s, b: m[0][1] * s, c: m[1][0] * s, d: m[1][1] * s }.canonical())
    }

    pub fn from_entries(a: Cx, b: Cx, c: Cx, d: Cx) -> Result<Self, MobiusError> {
        Self::normalize([[a, b], [c, d]])
    }

    /// Takes entries of a matrix already known to have determinant one.
    pub fn from_sl2(a: Cx, b: Cx, c: Cx, d: Cx) -> Self {
        Moebius { a, b, c, d }.canonical()
    }

    pub fn canonical(self) -> Self {
        for e in [self.a, self.b, self.c, self.d] {
            if e.norm() > SINGULAR_TOL {
                return if in_upper_half_turn(e) { self } else { self.neg() };
            }
        }
        self
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical() == *self
    }

    fn neg(self) -> Self {
        Moebius { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }

    pub fn diag(mu: Cx) -> Self {
        Moebius { a: mu, b: ZERO, c: ZERO, d: mu.inv() }.canonical()
    }

    /// a_t = diag(e^{t/2}, e^{-t/2}).
    pub fn a_t(t: f64) -> Self {
        Self::diag(Cx::new((t / 2.0).exp(), 0.0))
    }

    /// m_theta = diag(e^{i theta}, e^{-i theta}).
    pub fn m_theta(theta: f64) -> Self {
        Self::diag(Cx::from_polar(1.0, theta))
    }

    /// a_t m_theta.
    pub fn am(t: f64, theta: f64) -> Self {
        Self::diag(Cx::from_polar((t / 2.0).exp(), theta))
    }

    /// Expanding horospherical element n+(x) = [[1,0],[x,1]].
    pub fn n_plus(x: Cx) -> Self {
        Moebius { a: ONE, b: ZERO, c: x, d: ONE }
    }

    /// Contracting horospherical element n-(z) = [[1,z],[0,1]].
    pub fn n_minus(z: Cx) -> Self {
        Moebius { a: ONE, b: z, c: ZERO, d: ONE }
    }

    pub fn det(&self) -> Cx {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Cx {
        self.a + self.d
    }

    pub fn trace_sq(&self) -> Cx {
        let t = self.trace();
        t * t
    }

    pub fn inverse(&self) -> Self {
        Moebius { a: self.d, b: -self.b, c: -self.c, d: self.a }.canonical()
    }

    /// Matrix product without sign canonicalisation.
    #[inline]
    pub fn mul_raw(&self, o: &Moebius) -> Moebius {
        Moebius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Rescale so the determinant is one again, returning the drift |det - 1|. A drift
    /// below the rounding noise of ad - bc is not measurable; the matrix is left alone and
    /// 0 is returned, since rescaling by that noise would corrupt large products.
    pub fn renormalize(&mut self) -> f64 {
        let det = self.det();
        let drift = (det - ONE).norm();
        let noise = 8.0 * f64::EPSILON * (self.a.norm() * self.d.norm() + self.b.norm() * self.c.norm());
        if drift <= noise {
            return 0.0;
        }
        let s = det.sqrt().inv();
        self.a *= s;
        self.b *= s;
        self.c *= s;
        self.d *= s;
        drift
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    /// max over entries of |self - other|, minimised over the sign of other.
    pub fn entry_distance(&self, other: &Moebius) -> f64 {
        let plus = (self.a - other.a)
            .norm()
            .max((self.b - other.b).norm())
            .max((self.c - other.c).norm())
            .max((self.d - other.d).norm());
        let minus = (self.a + other.a)
            .norm()
            .max((self.b + other.b).norm())
            .max((self.c + other.c).norm())
            .max((self.d + other.d).norm());
        plus.min(minus)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.entry_distance(&Moebius::IDENTITY) < tol
    }

    /// Action on the Riemann sphere.
    pub fn act(&self, p: SpherePoint) -> SpherePoint {
        match p {
            SpherePoint::Infinity => SpherePoint::projective(self.a, self.c),
            SpherePoint::Finite(z) => SpherePoint::projective(self.a * z + self.b, self.c * z + self.d),
        }
    }

    /// |g'(z)| = 1/|cz+d|^2 at a finite point.
    pub fn derivative_abs(&self, z: Cx) -> f64 {
        1.0 / (self.c * z + self.d).norm_sqr()
    }

    /// Spherical-metric derivative at a point of the sphere.
    pub fn spherical_derivative(&self, p: SpherePoint) -> f64 {
        match p {
            SpherePoint::Finite(z) => {
                let w = self.c * z + self.d;
                let num = self.a * z + self.b;
                (1.0 + z.norm_sqr()) / (num.norm_sqr() + w.norm_sqr())
            }
            SpherePoint::Infinity => 1.0 / (self.a.norm_sqr() + self.c.norm_sqr()),
        }
    }

    /// Hyperbolic distance between o = (0,0,1) and g(o) in upper half-space.
    pub fn displacement(&self) -> f64 {
        // |g|_F^2 - 2 = |a - conj d|^2 + |b + conj c|^2 when det = 1.
        let e = (self.a - self.d.conj()).norm_sqr() + (self.b + self.c.conj()).norm_sqr();
        2.0 * (e.sqrt() / 2.0).asinh()
    }

    pub fn classify(&self) -> ElementClass {
        let tr2 = self.trace_sq();
        if (tr2 - Cx::new(4.0, 0.0)).norm() < NEAR_BOUNDARY_TOL {
            let identity = self.b.norm().max(self.c.norm()).max((self.a - self.d).norm()) < NEAR_BOUNDARY_TOL;
            let tag = if identity { ElementTag::Identity } else { ElementTag::Parabolic };
            return ElementClass { tag, data: None, near_boundary: true };
        }
        if trace_sq_is_elliptic(tr2) {
            return ElementClass { tag: ElementTag::Elliptic, data: None, near_boundary: false };
        }
        let data = self.hyperbolic_data().ok();
        ElementClass { tag: ElementTag::Hyperbolic, data, near_boundary: false }
    }

    pub fn hyperbolic_data(&self) -> Result<HyperbolicData, MobiusError> {
        let tr = self.trace();
        let tr2 = tr * tr;
        if (tr2 - Cx::new(4.0, 0.0)).norm() < NEAR_BOUNDARY_TOL {
            return Err(MobiusError::NearBoundary);
        }
        if trace_sq_is_elliptic(tr2) {
            return Err(MobiusError::NotHyperbolic(ElementTag::Elliptic));
        }
        let lam = expanding_eigenvalue(tr);
        let mu = lam.inv();
        let v_att = eigenvector(self, lam);
        let v_rep = eigenvector(self, mu);
        let h = Moebius::normalize([[v_att.0, v_rep.0], [v_att.1, v_rep.1]])?;
        let lambda = if in_upper_half_turn(lam) { lam } else { -lam };
        let length = 2.0 * lambda.norm().ln();
        let holonomy = reduce_angle(lambda.im.atan2(lambda.re));
        Ok(HyperbolicData {
            lambda,
            length,
            holonomy,
            attracting: SpherePoint::projective(v_att.0, v_att.1),
            repelling: SpherePoint::projective(v_rep.0, v_rep.1),
            conjugator: h,
        })
    }

    pub fn bruhat(&self, orientation: Orientation) -> Result<BruhatCoords, MobiusError> {
        let (mu, x, z) = match orientation {
            Orientation::PlusAMinus => {
                if self.a.norm() <= CHART_TOL {
                    return Err(MobiusError::OutsideChart(orientation));
                }
                (self.a, self.c / self.a, self.b / self.a)
            }
            Orientation::MinusAPlus => {
                if self.d.norm() <= CHART_TOL {
                    return Err(MobiusError::OutsideChart(orientation));
                }
                (self.d.inv(), self.c / self.d, self.b / self.d)
            }
        };
        Ok(BruhatCoords {
            x,
            z,
            t: 2.0 * mu.norm().ln(),
            theta: reduce_angle(mu.im.atan2(mu.re)),
            orientation,
        })
    }
}

impl Mul for Moebius {
    type Output = Moebius;
    fn mul(self, o: Moebius) -> Moebius {
        self.mul_raw(&o).canonical()
    }
}

impl Mul for &Moebius {
    type Output = Moebius;
    fn mul(self, o: &Moebius) -> Moebius {
        self.mul_raw(o).canonical()
    }
}

/// The eigenvalue of modulus >= 1 for a matrix with trace tr, before sign canonicalisation.
pub fn expanding_eigenvalue(tr: Cx) -> Cx {
    let mut s = (tr * tr - Cx::new(4.0, 0.0)).sqrt();
    if (tr * s.conj()).re < 0.0 {
        s = -s;
    }
    (tr + s) / 2.0
}

/// (lambda, length, holonomy) from a trace, lambda sign-canonical with Arg in [0, pi).
pub fn length_holonomy_from_trace(tr: Cx) -> (Cx, f64, f64) {
    let lam = expanding_eigenvalue(tr);
    let lambda = if in_upper_half_turn(lam) { lam } else { -lam };
    (lambda, 2.0 * lambda.norm().ln(), reduce_angle(lambda.im.atan2(lambda.re)))
}

pub fn trace_sq_is_elliptic(tr2: Cx) -> bool {
    tr2.im.abs() <= 1e-12 * tr2.norm().max(1.0) && tr2.re >= -1e-12 && tr2.re < 4.0
}

fn eigenvector(g: &Moebius, lam: Cx) -> (Cx, Cx) {
    let v1 = (g.b, lam - g.a);
    let v2 = (lam - g.d, g.c);
    let n1 = v1.0.norm_sqr() + v1.1.norm_sqr();
    let n2 = v2.0.norm_sqr() + v2.1.norm_sqr();
    let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    let s = 1.0 / n.sqrt();
    (v.0 * s, v.1 * s)
}

/// Reduce an angle into [0, pi).
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Distance between two holonomy angles on R / pi Z.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let r = (a - b).rem_euclid(PI);
    r.min(PI - r)
}

/// Surrogate left-invariant distance: min over sign of |g^{-1} h -/+ I|_F.
pub fn group_distance(g: &Moebius, h: &Moebius) -> f64 {
    let k = g.inverse().mul_raw(h);
    let plus = ((k.a - ONE).norm_sqr() + k.b.norm_sqr() + k.c.norm_sqr() + (k.d - ONE).norm_sqr()).sqrt();
    let minus = ((k.a + ONE).norm_sqr() + k.b.norm_sqr() + k.c.norm_sqr() + (k.d + ONE).norm_sqr()).sqrt();
    plus.min(minus)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementTag {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementClass {
    pub tag: ElementTag,
    /// Present for hyperbolic elements away from the parabolic boundary.
    pub data: Option<HyperbolicData>,
    /// Set when |tr^2 - 4| < 1e-9; the tag is then unstable.
    pub near_boundary: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolicData {
    pub lambda: Cx,
    pub length: f64,
    pub holonomy: f64,
    pub attracting: SpherePoint,
    pub repelling: SpherePoint,
    /// h with gamma = h a_length m_holonomy h^{-1}.
    pub conjugator: Moebius,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// n+(x) a_t m_theta n-(z)
    PlusAMinus,
    /// n-(z) a_t m_theta n+(x)
    MinusAPlus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BruhatCoords {
    pub x: Cx,
    pub z: Cx,
    pub t: f64,
    pub theta: f64,
    pub orientation: Orientation,
}

impl BruhatCoords {
    pub fn recompose(&self) -> Moebius {
        let am = Moebius::am(self.t, self.theta);
        match self.orientation {
            Orientation::PlusAMinus => Moebius::n_plus(self.x).mul_raw(&am).mul_raw(&Moebius::n_minus(self.z)),
            Orientation::MinusAPlus => Moebius::n_minus(self.z).mul_raw(&am).mul_raw(&Moebius::n_plus(self.x)),
        }
        .canonical()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    #[test]
    fn normalize_examples() {
        let g = Moebius::normalize([[c(2., 0.), c(0., 0.)], [c(0., 0.), c(0.5, 0.)]]).unwrap();
        assert!(g.entry_distance(&Moebius::diag(c(2., 0.))) < 1e-15);
        let m = Moebius::normalize([[c(-1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]]).unwrap();
        assert_eq!(m, Moebius::IDENTITY);
        let g1 = Moebius::normalize([[c(2., 0.), c(5., 0.)], [c(1., 0.), c(2., 0.)]]).unwrap();
        let want = Moebius { a: c(0., 2.), b: c(0., 5.), c: c(0., 1.), d: c(0., 2.) };
        assert!((g1.a - want.a).norm() < 1e-15 && (g1.d - want.d).norm() < 1e-15);
        assert!(matches!(
            Moebius::normalize([[c(1., 0.), c(2., 0.)], [c(2., 0.), c(4., 0.)]]),
            Err(MobiusError::SingularMatrix(_))
        ));
    }

    #[test]
    fn classify_examples() {
        let d = Moebius::diag(c(2., 0.)).classify();
        let data = d.data.unwrap();
        assert!((data.length - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert_eq!(data.holonomy, 0.0);
        assert_eq!(Moebius::n_minus(c(1., 0.)).classify().tag, ElementTag::Parabolic);
        assert_eq!(Moebius::m_theta(0.3).classify().tag, ElementTag::Elliptic);
        assert_eq!(Moebius::IDENTITY.classify().tag, ElementTag::Identity);
    }

    #[test]
    fn displacement_closed_forms() {
        assert_eq!(Moebius::IDENTITY.displacement(), 0.0);
        assert!((Moebius::a_t(-3.5).displacement() - 3.5).abs() < 1e-13);
        assert!((Moebius::n_plus(c(1., 0.)).displacement() - 1.5f64.acosh()).abs() < 1e-14);
    }

    #[test]
    fn angle_helpers() {
        assert!((reduce_angle(-0.1) - (PI - 0.1)).abs() < 1e-15);
        assert!(angle_distance(0.01, PI - 0.01) < 0.0200001);
    }
}
