//! The Picard group PSL2(Z[i]) with exact Gaussian-integer arithmetic.

use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mobius::{Cx, Moebius};

pub const DEFAULT_NORM_CAP: f64 = 40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("norm bound {0} exceeds the cap {1}")]
    CapExceeded(f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatticePreset {
    Picard,
}

impl LatticePreset {
    /// Known critical exponent of a lattice in PSL2(C).
    pub fn known_delta(&self) -> f64 {
        2.0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

impl GaussInt {
    pub const ZERO: GaussInt = GaussInt { re: 0, im: 0 };
    pub const ONE: GaussInt = GaussInt { re: 1, im: 0 };
    pub const I: GaussInt = GaussInt { re: 0, im: 1 };

    pub const fn new(re: i64, im: i64) -> Self {
        GaussInt { re, im }
    }

    pub fn norm(self) -> i64 {
        self.re * self.re + self.im * self.im
    }

    pub fn conj(self) -> Self {
        GaussInt::new(self.re, -self.im)
    }

    pub fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn is_unit(self) -> bool {
        self.norm() == 1
    }

    pub fn to_cx(self) -> Cx {
        Cx::new(self.re as f64, self.im as f64)
    }

    /// Exact quotient, when it exists.
    pub fn exact_div(self, o: GaussInt) -> Option<GaussInt> {
        let n = o.norm();
        let p = self * o.conj();
        if n == 0 || p.re % n != 0 || p.im % n != 0 {
            return None;
        }
        Some(GaussInt::new(p.re / n, p.im / n))
    }

    /// Euclidean division with the quotient rounded to the nearest lattice point.
    pub fn div_rem(self, o: GaussInt) -> (GaussInt, GaussInt) {
        let n = o.norm() as f64;
        let p = self * o.conj();
        let q = GaussInt::new((p.re as f64 / n).round() as i64, (p.im as f64 / n).round() as i64);
        (q, self - q * o)
    }
}

impl Add for GaussInt {
    type Output = GaussInt;
    fn add(self, o: GaussInt) -> GaussInt {
        GaussInt::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for GaussInt {
    type Output = GaussInt;
    fn sub(self, o: GaussInt) -> GaussInt {
        GaussInt::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for GaussInt {
    type Output = GaussInt;
    fn mul(self, o: GaussInt) -> GaussInt {
        GaussInt::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Neg for GaussInt {
    type Output = GaussInt;
    fn neg(self) -> GaussInt {
        GaussInt::new(-self.re, -self.im)
    }
}

/// (g, x, y) with a x + b y = g, g a gcd of a and b.
pub fn ext_gcd(a: GaussInt, b: GaussInt) -> (GaussInt, GaussInt, GaussInt) {
    let (mut r0, mut r1) = (a, b);
    let (mut x0, mut x1) = (GaussInt::ONE, GaussInt::ZERO);
    let (mut y0, mut y1) = (GaussInt::ZERO, GaussInt::ONE);
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(r1);
        (r0, r1) = (r1, r);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    (r0, x0, y0)
}

/// [[a, b], [c, d]] over Z[i].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    pub a: GaussInt,
    pub b: GaussInt,
    pub c: GaussInt,
    pub d: GaussInt,
}

impl IntMatrix {
    pub fn det(&self) -> GaussInt {
        self.a * self.d - self.b * self.c
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }

    pub fn inverse(&self) -> IntMatrix {
        IntMatrix { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn entries(&self) -> [GaussInt; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn max_entry_modulus(&self) -> f64 {
        (self.entries().iter().map(|e| e.norm()).max().unwrap() as f64).sqrt()
    }

    /// Sum of squared entry moduli; d(o, g o) = acosh(frobenius / 2).
    pub fn frobenius_sq(&self) -> i64 {
        self.entries().iter().map(|e| e.norm()).sum()
    }

    pub fn displacement(&self) -> f64 {
        (self.frobenius_sq() as f64 / 2.0).max(1.0).acosh()
    }

    /// Whether this is the chosen sign of the pair {M, -M}: first nonzero entry has
    /// positive real part, or zero real part and positive imaginary part.
    pub fn is_sign_canonical(&self) -> bool {
        let e = self.entries().into_iter().find(|e| !e.is_zero()).unwrap();
        e.re > 0 || (e.re == 0 && e.im > 0)
    }

    pub fn sign_canonical(&self) -> IntMatrix {
        if self.is_sign_canonical() {
            *self
        } else {
            self.neg()
        }
    }

    pub fn to_moebius(&self) -> Moebius {
        Moebius::from_sl2(self.a.to_cx(), self.b.to_cx(), self.c.to_cx(), self.d.to_cx())
    }
}

/// Gaussian integers of modulus at most r.
pub fn gauss_ball(r: f64) -> Vec<GaussInt> {
    let k = r.floor() as i64;
    let r2 = r * r;
    let mut out = Vec::new();
    for re in -k..=k {
        for im in -k..=k {
            if ((re * re + im * im) as f64) <= r2 {
                out.push(GaussInt::new(re, im));
            }
        }
    }
    out
}

fn in_bound(z: GaussInt, r2: f64) -> bool {
    (z.norm() as f64) <= r2
}

/// Every k in Z[i] with |k + center| <= radius (center given exactly as num / den).
fn lattice_disk(num: GaussInt, den: GaussInt, radius: f64) -> impl Iterator<Item = GaussInt> {
    let c = num.to_cx() / den.to_cx();
    let lo_re = (-c.re - radius).floor() as i64 - 1;
    let hi_re = (-c.re + radius).ceil() as i64 + 1;
    let lo_im = (-c.im - radius).floor() as i64 - 1;
    let hi_im = (-c.im + radius).ceil() as i64 + 1;
    (lo_re..=hi_re).flat_map(move |re| (lo_im..=hi_im).map(move |im| GaussInt::new(re, im)))
}

/// Elements with the given entry a and all entry moduli at most `bound`, one sign per pair.
fn elements_with_a(a: GaussInt, cs: &[GaussInt], bound: f64, out: &mut Vec<IntMatrix>) {
    let r2 = bound * bound;
    for &c in cs {
        if a.is_zero() && c.is_zero() {
            continue;
        }
        let (g, x, y) = ext_gcd(a, c);
        if !g.is_unit() {
            continue;
        }
        // a (x u) - c (-y u) = 1 with u = g^{-1} = conj(g)
        let u = g.conj();
        let d0 = x * u;
        let b0 = -(y * u);
        // b = b0 + k a, d = d0 + k c
        let (num, den) = if a.norm() >= c.norm() { (b0, a) } else { (d0, c) };
        let radius = bound / (den.norm() as f64).sqrt() + 1e-9;
        for k in lattice_disk(num, den, radius) {
            let b = b0 + k * a;
            let d = d0 + k * c;
            if in_bound(b, r2) && in_bound(d, r2) {
                let m = IntMatrix { a, b, c, d };
                if m.is_sign_canonical() {
                    out.push(m);
                }
            }
        }
    }
}

/// All elements of the preset with max entry modulus <= norm_bound, one per sign pair,
/// in lexicographic order of entries.
pub fn enumerate_lattice_elements(
    p: LatticePreset,
    norm_bound: f64,
) -> Result<Vec<IntMatrix>, LatticeError> {
    enumerate_lattice_elements_capped(p, norm_bound, DEFAULT_NORM_CAP)
}

pub fn enumerate_lattice_elements_capped(
    p: LatticePreset,
    norm_bound: f64,
    cap: f64,
) -> Result<Vec<IntMatrix>, LatticeError> {
    let LatticePreset::Picard = p;
    if norm_bound > cap {
        return Err(LatticeError::CapExceeded(norm_bound, cap));
    }
    let ball = gauss_ball(norm_bound);
    let parts: Vec<Vec<IntMatrix>> = ball
        .par_iter()
        .map(|&a| {
            let mut v = Vec::new();
            elements_with_a(a, &ball, norm_bound, &mut v);
            v
        })
        .collect();
    let mut out: Vec<IntMatrix> = parts.into_iter().flatten().collect();
    out.sort();
    Ok(out)
}

/// Naive triple loop over (a, b, c) with d solved exactly; a test oracle for small bounds.
pub fn enumerate_lattice_naive(norm_bound: f64) -> Vec<IntMatrix> {
    let ball = gauss_ball(norm_bound);
    let r2 = norm_bound * norm_bound;
    let mut out = Vec::new();
    for &a in &ball {
        for &b in &ball {
            for &c in &ball {
                let one_plus = GaussInt::ONE + b * c;
                let ds: Vec<GaussInt> = if a.is_zero() {
                    if one_plus.is_zero() {
                        ball.clone()
                    } else {
                        Vec::new()
                    }
                } else {
                    one_plus.exact_div(a).into_iter().collect()
                };
                for d in ds {
                    let m = IntMatrix { a, b, c, d };
                    if in_bound(d, r2) && m.det() == GaussInt::ONE && m.is_sign_canonical() {
                        out.push(m);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Sorted d(o, g o) over the Picard group for d <= radius, one entry per group element.
pub fn picard_distances(radius: f64, cap: f64) -> Result<Vec<f64>, LatticeError> {
    let frob_max = 2.0 * radius.cosh();
    let bound = frob_max.sqrt();
    let els = enumerate_lattice_elements_capped(LatticePreset::Picard, bound, cap)?;
    let mut v: Vec<f64> =
        els.iter().filter(|m| m.frobenius_sq() as f64 <= frob_max).map(|m| m.displacement()).collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_and_division() {
        let a = GaussInt::new(3, 4);
        let b = GaussInt::new(1, 2);
        let (g, x, y) = ext_gcd(a, b);
        assert_eq!(a * x + b * y, g);
        assert_eq!(GaussInt::new(-5, 10).exact_div(GaussInt::new(1, 2)), Some(GaussInt::new(3, 4)));
        assert_eq!(GaussInt::new(1, 0).exact_div(GaussInt::new(1, 1)), None);
    }

    #[test]
    fn unit_bound_examples() {
        let els = enumerate_lattice_elements(LatticePreset::Picard, 1.0).unwrap();
        let g = |a: (i64, i64), b: (i64, i64), c: (i64, i64), d: (i64, i64)| {
            IntMatrix {
                a: GaussInt::new(a.0, a.1),
                b: GaussInt::new(b.0, b.1),
                c: GaussInt::new(c.0, c.1),
                d: GaussInt::new(d.0, d.1),
            }
            .sign_canonical()
        };
        for m in [
            g((1, 0), (0, 0), (0, 0), (1, 0)),
            g((0, 0), (1, 0), (-1, 0), (0, 0)),
            g((1, 0), (1, 0), (0, 0), (1, 0)),
            g((1, 0), (0, 1), (0, 0), (1, 0)),
        ] {
            assert!(els.contains(&m), "{m:?}");
        }
        assert_eq!(els, enumerate_lattice_naive(1.0));
        assert!(matches!(
            enumerate_lattice_elements(LatticePreset::Picard, 41.0),
            Err(LatticeError::CapExceeded(..))
        ));
    }
}
