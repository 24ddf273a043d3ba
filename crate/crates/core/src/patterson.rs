//! Discrete approximations of the Patterson-Sullivan density from a deep orbit shell.

use crate::exponent::ExponentError;
use crate::flowbox::{FlowBox, Sector};
use crate::marking::CertifiedMarking;
use crate::mobius::{Moebius, SpherePoint};
use crate::orbit::orbit_collect;
use crate::space::{GenDisk, UhsPoint};
use crate::util::neumaier_sum;

pub const SHELL_WIDTH: f64 = 4.0;
const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: SpherePoint,
    pub weight: f64,
}

/// Probability measure on the sphere seen from o = (0,0,1).
#[derive(Clone, Debug, PartialEq)]
pub struct PSMeasure {
    pub atoms: Vec<Atom>,
    pub exponent: f64,
    pub radius: f64,
    pub shell: (f64, f64),
}

/// Atoms at the radial projections of orbit points with d(o, g o) in (radius - 4, radius],
/// weighted by e^{-s d} and normalised to total mass 1.
pub fn patterson_sample(m: &CertifiedMarking, radius: f64, s: f64) -> Result<PSMeasure, ExponentError> {
    patterson_sample_shell(m, radius, SHELL_WIDTH, s)
}

pub fn patterson_sample_shell(
    m: &CertifiedMarking,
    radius: f64,
    width: f64,
    s: f64,
) -> Result<PSMeasure, ExponentError> {
    let lo = radius - width;
    let raw: Vec<(SpherePoint, f64)> = orbit_collect(m, &Moebius::IDENTITY, radius, |p| {
        if p.distance <= lo {
            return None;
        }
        let x = UhsPoint::ORIGIN.moved_by(p.element);
        Some((x.radial_projection()?, p.distance))
    });
    if raw.is_empty() {
        return Err(ExponentError::InsufficientData(0));
    }
    // weights relative to the shell top to avoid underflow
    let w: Vec<f64> = raw.iter().map(|&(_, d)| (-s * (d - radius)).exp()).collect();
    let total = neumaier_sum(w.iter().copied());
    let atoms = raw.iter().zip(&w).map(|(&(point, _), &wi)| Atom { point, weight: wi / total }).collect();
    Ok(PSMeasure { atoms, exponent: s, radius, shell: (lo, radius) })
}

impl PSMeasure {
    pub fn total_mass(&self) -> f64 {
        neumaier_sum(self.atoms.iter().map(|a| a.weight))
    }

    /// Mass of the region; atoms within 1e-9 of the boundary count half.
    pub fn measure_of_disk(&self, d: &GenDisk) -> f64 {
        self.weighted_measure(d, |_| 1.0)
    }

    /// Integral over the region of the density f against this measure.
    pub fn weighted_measure<F: Fn(SpherePoint) -> f64>(&self, d: &GenDisk, f: F) -> f64 {
        neumaier_sum(self.atoms.iter().map(|a| {
            let v = d.signed_value(a.point);
            let share = if v.abs() <= BOUNDARY_TOL {
                0.5
            } else if v < 0.0 {
                1.0
            } else {
                0.0
            };
            share * a.weight * f(a.point)
        }))
    }

    /// Mass of the region for the density seen from g o, using the conformal factor
    /// |(g^{-1})'|^s in the spherical metric.
    pub fn measure_from(&self, g: &Moebius, d: &GenDisk) -> f64 {
        let gi = g.inverse();
        self.weighted_measure(d, |p| gi.spherical_derivative(p).powf(self.exponent))
    }

    /// CSV rows "re,im,weight"; the point at infinity is written as inf,inf.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,weight\n");
        for a in &self.atoms {
            match a.point {
                SpherePoint::Finite(z) => s.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", z.re, z.im, a.weight)),
                SpherePoint::Infinity => s.push_str(&format!("inf,inf,{:.17e}\n", a.weight)),
            }
        }
        s
    }
}

/// e^{-<x, y>_o}: half the chordal distance of the unit vectors; 1 for antipodes.
pub fn visual_distance(x: SpherePoint, y: SpherePoint) -> f64 {
    x.chordal(y) / 2.0
}

/// 2 eps nu(fwd) nu(bwd) Vol(Omega), both boundary sets measured from g0 o through the
/// conformal factor. The O(eps) distortion of the product structure is not corrected.
pub fn bms_box_mass(nu: &PSMeasure, b: &FlowBox, omega: &Sector) -> f64 {
    if omega.is_empty() {
        return 0.0;
    }
    let (fwd, bwd) = b.boundary_images();
    2.0 * b.eps() * nu.measure_from(b.base(), &fwd) * nu.measure_from(b.base(), &bwd) * omega.volume()
}

/// Largest relative defect |nu(g D) - sum_{xi in D} w |g'(xi)|^s| / nu(g D) over generators
/// (and inverses) and the marking's disks D with g D a proper subset of a disk.
pub fn conformality_defect(nu: &PSMeasure, m: &CertifiedMarking) -> f64 {
    let mk = m.marking();
    let mut worst: f64 = 0.0;
    for l in 0..2 * mk.rank() {
        let g = mk.letter_matrix(l as u8);
        for r in 0..2 * mk.rank() {
            if r == (l ^ 1) {
                continue;
            }
            let d = mk.letter_disk(r as u8);
            let image = d.image(&g);
            let lhs = nu.measure_of_disk(&image);
            let rhs = nu.weighted_measure(&d, |p| g.spherical_derivative(p).powf(nu.exponent));
            if lhs > 0.0 {
                worst = worst.max((lhs - rhs).abs() / lhs);
            }
        }
    }
    worst
}
