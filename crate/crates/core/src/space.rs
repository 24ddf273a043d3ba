//! Upper half-space points and generalized disks on the sphere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::mobius::{Cx, Moebius, SpherePoint};

/// A point (z, h) of upper half-space, h > 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UhsPoint {
    pub z: Cx,
    pub h: f64,
}

impl UhsPoint {
    pub const ORIGIN: UhsPoint = UhsPoint { z: Cx::new(0.0, 0.0), h: 1.0 };

    pub fn new(z: Cx, h: f64) -> Self {
        UhsPoint { z, h }
    }

    pub fn distance(&self, o: &UhsPoint) -> f64 {
        let e = (self.z - o.z).norm_sqr() + (self.h - o.h).powi(2);
        2.0 * (e.sqrt() / (2.0 * (self.h * o.h).sqrt())).asinh()
    }

    pub fn moved_by(&self, g: &Moebius) -> UhsPoint {
        let w = g.c * self.z + g.d;
        let h2 = self.h * self.h;
        let delta = w.norm_sqr() + g.c.norm_sqr() * h2;
        let num = (g.a * self.z + g.b) * w.conj() + g.a * g.c.conj() * h2;
        UhsPoint { z: num / delta, h: self.h / delta }
    }

    /// Position in the unit ball model with ORIGIN at the centre.
    pub fn to_ball(&self) -> [f64; 3] {
        let n = self.z.norm_sqr();
        let s = n + (self.h + 1.0).powi(2);
        [2.0 * self.z.re / s, 2.0 * self.z.im / s, (n + self.h * self.h - 1.0) / s]
    }

    /// Endpoint on the sphere of the ray from ORIGIN through this point.
    pub fn radial_projection(&self) -> Option<SpherePoint> {
        let p = self.to_ball();
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if r == 0.0 {
            return None;
        }
        Some(SpherePoint::from_unit_vector([p[0] / r, p[1] / r, p[2] / r]))
    }
}

/// The open region {Q < 0} of the sphere, Q(z) = a|z|^2 + 2 Re(conj(b) z) + d,
/// stored with |b|^2 - a d = 1.
///
/// Covers open disks (a > 0), disk exteriors (a < 0) and half-planes (a = 0).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenDisk {
    pub a: f64,
    pub b: Cx,
    pub d: f64,
}

impl GenDisk {
    fn scaled(a: f64, b: Cx, d: f64) -> Option<Self> {
        let disc = b.norm_sqr() - a * d;
        if !(disc > 0.0) || !disc.is_finite() {
            return None;
        }
        let s = 1.0 / disc.sqrt();
        Some(GenDisk { a: a * s, b: b * s, d: d * s })
    }

    /// Open disk |z - c| < r.
    pub fn disk(center: Cx, radius: f64) -> Self {
        Self::scaled(1.0, -center, center.norm_sqr() - radius * radius).expect("radius must be positive")
    }

    /// Open exterior |z - c| > r, including infinity.
    pub fn exterior(center: Cx, radius: f64) -> Self {
        Self::disk(center, radius).complement()
    }

    /// Open half-plane Re(conj(n) (z - p)) < 0.
    pub fn half_plane(point: Cx, normal: Cx) -> Self {
        Self::scaled(0.0, normal / 2.0, -(normal.conj() * point).re).expect("normal must be nonzero")
    }

    pub fn complement(&self) -> Self {
        GenDisk { a: -self.a, b: -self.b, d: -self.d }
    }

    pub fn is_bounded(&self) -> bool {
        self.a > 0.0
    }

    /// Euclidean centre and radius of the boundary circle, if it is a circle.
    pub fn circle(&self) -> Option<(Cx, f64)> {
        if self.a == 0.0 {
            None
        } else {
            Some((-self.b / self.a, 1.0 / self.a.abs()))
        }
    }

    pub fn q(&self, z: Cx) -> f64 {
        self.a * z.norm_sqr() + 2.0 * (self.b.conj() * z).re + self.d
    }

    /// Q normalised to behave like a signed Euclidean distance near a circle.
    pub fn signed_value(&self, p: SpherePoint) -> f64 {
        match p {
            SpherePoint::Finite(z) => self.q(z) / 2.0,
            SpherePoint::Infinity => {
                if self.a > 0.0 {
                    f64::INFINITY
                } else if self.a < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    pub fn contains(&self, p: SpherePoint) -> bool {
        self.signed_value(p) < 0.0
    }

    pub fn contains_closed(&self, p: SpherePoint, tol: f64) -> bool {
        self.signed_value(p) <= tol
    }

    /// Image region g(D).
    pub fn image(&self, g: &Moebius) -> GenDisk {
        // H' = (g^{-1})^* H g^{-1} with H = [[a, b], [conj b, d]].
        let gi = g.inverse();
        let (p, q, r, s) = (gi.a, gi.b, gi.c, gi.d);
        let ha = Cx::new(self.a, 0.0);
        let hd = Cx::new(self.d, 0.0);
        let hb = self.b;
        let hc = self.b.conj();
        // H g^{-1}
        let m00 = ha * p + hb * r;
        let m01 = ha * q + hb * s;
        let m10 = hc * p + hd * r;
        let m11 = hc * q + hd * s;
        // (g^{-1})^* (H g^{-1})
        let a = p.conj() * m00 + r.conj() * m10;
        let b = p.conj() * m01 + r.conj() * m11;
        let d = q.conj() * m01 + s.conj() * m11;
        Self::scaled(a.re, b, d.re).expect("Moebius image of a circle is a circle")
    }

    /// Inversive product of two normalised forms; > 1 iff the closed regions are disjoint,
    /// = 1 when they share their boundary with opposite orientation.
    pub fn inversive_product(&self, o: &GenDisk) -> f64 {
        (self.a * o.d + o.a * self.d) / 2.0 - (self.b * o.b.conj()).re
    }

    /// Hyperbolic distance from p to the half-space bounded by the plane over this circle
    /// on the side of the region; zero inside.
    pub fn halfspace_distance(&self, p: &UhsPoint) -> f64 {
        let n = self.a * (p.z.norm_sqr() + p.h * p.h) + 2.0 * (self.b.conj() * p.z).re + self.d;
        if n <= 0.0 {
            0.0
        } else {
            (n / (2.0 * p.h)).asinh()
        }
    }

    /// Points of the boundary circle, evenly spaced in the circle's own parametrisation.
    pub fn boundary_samples(&self, n: usize) -> Vec<SpherePoint> {
        (0..n)
            .map(|k| {
                let phi = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                match self.circle() {
                    Some((c, r)) => SpherePoint::Finite(c + Cx::from_polar(r, phi)),
                    None => {
                        // line through the foot point, direction i * normal
                        let nrm = self.b * 2.0;
                        let foot = -nrm * (self.d / nrm.norm_sqr());
                        let dir = Cx::new(0.0, 1.0) * nrm / nrm.norm();
                        let s = (phi / 2.0 - PI / 2.0).tan();
                        if s.is_finite() {
                            SpherePoint::Finite(foot + dir * s)
                        } else {
                            SpherePoint::Infinity
                        }
                    }
                }
            })
            .collect()
    }

    /// A point of the region: the centre of a bounded disk, otherwise infinity or a point
    /// on the inner side of a line.
    pub fn interior_point(&self) -> SpherePoint {
        if self.a > 0.0 {
            SpherePoint::Finite(-self.b / self.a)
        } else if self.a < 0.0 {
            SpherePoint::Infinity
        } else {
            let nrm = self.b * 2.0;
            let foot = -nrm * (self.d / nrm.norm_sqr());
            SpherePoint::Finite(foot - nrm / nrm.norm())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_form() {
        let d = GenDisk::disk(Cx::new(2.0, 0.0), 1.0);
        let (c, r) = d.circle().unwrap();
        assert!((c - Cx::new(2.0, 0.0)).norm() < 1e-15 && (r - 1.0).abs() < 1e-15);
        assert!(d.contains(SpherePoint::Finite(Cx::new(2.5, 0.0))));
        assert!(!d.contains(SpherePoint::Infinity));
        assert!(d.complement().contains(SpherePoint::Infinity));
    }

    #[test]
    fn inversive_product_cases() {
        let a = GenDisk::disk(Cx::new(-2.0, 0.0), 1.0);
        let b = GenDisk::disk(Cx::new(2.0, 0.0), 1.0);
        assert!((a.inversive_product(&b) - 7.0).abs() < 1e-12);
        assert!((a.inversive_product(&a.complement()) - 1.0).abs() < 1e-12);
        let inner = GenDisk::disk(Cx::new(0.0, 0.0), 0.5);
        let outer = GenDisk::disk(Cx::new(0.0, 0.0), 2.0);
        assert!(inner.inversive_product(&outer) < -1.0);
    }

    #[test]
    fn halfspace_distance_on_axis() {
        let d = GenDisk::disk(Cx::new(0.0, 0.0), 2.0);
        let p = UhsPoint::new(Cx::new(0.0, 0.0), 8.0);
        assert!((d.halfspace_distance(&p) - 4f64.ln()).abs() < 1e-14);
        assert_eq!(d.halfspace_distance(&UhsPoint::new(Cx::new(0.0, 0.0), 1.0)), 0.0);
        let hp = GenDisk::half_plane(Cx::new(0.0, 0.0), Cx::new(-1.0, 0.0));
        let q = UhsPoint::new(Cx::new(-3.0, 0.0), 1.0);
        assert!((hp.halfspace_distance(&q) - 3f64.asinh()).abs() < 1e-14);
    }

    #[test]
    fn ball_model() {
        assert_eq!(UhsPoint::ORIGIN.to_ball(), [0.0, 0.0, 0.0]);
        let p = UhsPoint::new(Cx::new(0.0, 0.0), 5.0);
        assert_eq!(p.radial_projection(), Some(SpherePoint::Infinity));
    }
}
