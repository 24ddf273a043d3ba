//! Depth-first enumeration of orbit points g·p with d(p, g·p) <= R.
//!
//! A prefix u is extended by s only while the half-space over D+_s can still hold points
//! within reach: every extension u s w moves the reference point q into u(H+_s), so
//! d(p, u s w p) >= d(u^{-1} q, H+_s) - 2 d(p, q).

use rayon::prelude::*;

use crate::marking::CertifiedMarking;
use crate::mobius::Moebius;
use crate::space::{GenDisk, UhsPoint};
use crate::word::{inverse_letter, Letter};

const PRUNE_TOL: f64 = 1e-9;

/// One element of the orbit within reach.
pub struct OrbitPoint<'a> {
    pub letters: &'a [Letter],
    pub element: &'a Moebius,
    /// d(p, g·p) for the chosen base point p.
    pub distance: f64,
}

struct Ctx {
    mats: Vec<Moebius>,
    inv: Vec<Moebius>,
    halfspaces: Vec<GenDisk>,
    base: Moebius,
    base_inv: Moebius,
    slack: f64,
    radius: f64,
    k2: usize,
}

impl Ctx {
    fn distance(&self, g: &Moebius) -> f64 {
        self.base_inv.mul_raw(g).mul_raw(&self.base).displacement()
    }

    fn keep(&self, p: &UhsPoint, s: usize) -> bool {
        self.halfspaces[s].halfspace_distance(p) - self.slack <= self.radius + PRUNE_TOL
    }

    fn walk<T, F>(&self, letters: &mut Vec<Letter>, g: Moebius, p: UhsPoint, f: &F, out: &mut Vec<T>)
    where
        F: Fn(&OrbitPoint) -> Option<T>,
    {
        let d = self.distance(&g);
        if d <= self.radius {
            if let Some(v) = f(&OrbitPoint { letters, element: &g, distance: d }) {
                out.push(v);
            }
        }
        let last = letters.last().copied();
        for s in 0..self.k2 {
            if Some(inverse_letter(s as Letter)) == last {
                continue;
            }
            if !self.keep(&p, s) {
                continue;
            }
            let mut child = g.mul_raw(&self.mats[s]);
            if (letters.len() + 1) % 8 == 0 {
                child.renormalize();
            }
            let cp = p.moved_by(&self.inv[s]);
            letters.push(s as Letter);
            self.walk(letters, child, cp, f, out);
            letters.pop();
        }
    }
}

/// Calls f on every orbit element g with d(base·o, g·base·o) <= radius and collects the
/// values, in a deterministic order. The identity is included.
pub fn orbit_collect<T, F>(m: &CertifiedMarking, base: &Moebius, radius: f64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&OrbitPoint) -> Option<T> + Sync,
{
    let mk = m.marking();
    let k2 = 2 * mk.rank();
    let q = m.certificate().base_point;
    let p0 = UhsPoint::ORIGIN.moved_by(base);
    let mats = mk.letter_matrices();
    let ctx = Ctx {
        inv: mats.iter().map(|g| g.inverse()).collect(),
        mats,
        halfspaces: (0..k2).map(|l| mk.letter_disk(l as Letter)).collect(),
        base: *base,
        base_inv: base.inverse(),
        slack: 2.0 * p0.distance(&q),
        radius,
        k2,
    };
    let mut out = Vec::new();
    if let Some(v) = f(&OrbitPoint { letters: &[], element: &Moebius::IDENTITY, distance: 0.0 }) {
        out.push(v);
    }
    let firsts: Vec<usize> = (0..k2).filter(|&s| ctx.keep(&q, s)).collect();
    let parts: Vec<Vec<T>> = firsts
        .par_iter()
        .map(|&s| {
            let mut v = Vec::new();
            let mut letters = vec![s as Letter];
            ctx.walk(&mut letters, ctx.mats[s], q.moved_by(&ctx.inv[s]), &f, &mut v);
            v
        })
        .collect();
    for p in parts {
        out.extend(p);
    }
    out
}

/// Sorted displacements d(o, g·o) of all orbit elements within radius.
pub fn orbit_distances(m: &CertifiedMarking, base: &Moebius, radius: f64) -> Vec<f64> {
    let mut v = orbit_collect(m, base, radius, |p| Some(p.distance));
    v.sort_by(f64::total_cmp);
    v
}
