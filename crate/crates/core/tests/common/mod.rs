#![allow(dead_code)]

use ghc_core::marking::CertifiedMarking;
use ghc_core::word::{primitive_period, reduced_words, Letter, Word};

/// Class data from the brute-force enumerator: (canonical letters, length, holonomy).
pub type NaiveClass = (Vec<Letter>, f64, f64);

/// All primitive conjugacy classes with length <= t, found by listing every reduced word up
/// to N(t), keeping the cyclically reduced ones, taking the minimum over all rotations by
/// direct comparison and testing primitivity by trial division of the period.
pub fn naive_census(m: &CertifiedMarking, t: f64) -> Vec<NaiveClass> {
    let rank = m.marking().rank();
    let n_max = m.word_length_bound(t);
    let mut out = Vec::new();
    for n in 1..=n_max {
        for w in reduced_words(rank, n) {
            let s = w.letters();
            if n > 1 && s[0] == (s[n - 1] ^ 1) {
                continue;
            }
            let min_rot = (0..n).map(|r| [&s[r..], &s[..r]].concat()).min().unwrap();
            if min_rot.as_slice() != s {
                continue;
            }
            if naive_period(s) != n {
                continue;
            }
            let g = m.marking().evaluate(&Word::new(s));
            let hd = g.hyperbolic_data().expect("free Schottky words are loxodromic");
            if hd.length <= t {
                out.push((s.to_vec(), hd.length, hd.holonomy));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn naive_period(s: &[Letter]) -> usize {
    let n = s.len();
    (1..=n).find(|&p| n % p == 0 && (0..n).all(|i| s[i] == s[i % p])).unwrap()
}

/// Shared check for the library's own primitivity routine against trial division.
pub fn period_agrees(s: &[Letter]) -> bool {
    primitive_period(s) == naive_period(s)
}

use ghc_core::flowbox::{BoxCoords, FlowBox};
use ghc_core::mobius::{angle_distance, Orientation};
use ghc_core::{Cx, Moebius};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cx<R: Rng>(r: &mut R, scale: f64) -> Cx {
    Cx::new(r.gen_range(-scale..scale), r.gen_range(-scale..scale))
}

pub fn random_element<R: Rng>(r: &mut R, scale: f64) -> Moebius {
    loop {
        let e = [random_cx(r, scale), random_cx(r, scale), random_cx(r, scale), random_cx(r, scale)];
        if let Ok(g) = Moebius::from_entries(e[0], e[1], e[2], e[3]) {
            if g.a.norm() > 1e-3 && g.d.norm() > 1e-3 {
                return g;
            }
        }
    }
}

/// Largest coordinate error of decompose(recompose(x, z, t, theta)) over n random chart
/// points, both orientations.
pub fn bruhat_round_trip_error(seed: u64, n: usize) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let orientation = if i % 2 == 0 { Orientation::PlusAMinus } else { Orientation::MinusAPlus };
        let x = random_cx(&mut r, 2.0);
        let z = random_cx(&mut r, 2.0);
        let t = r.gen_range(-4.0..4.0);
        let theta = r.gen_range(0.0..std::f64::consts::PI);
        let am = Moebius::am(t, theta);
        let g = match orientation {
            Orientation::PlusAMinus => Moebius::n_plus(x).mul_raw(&am).mul_raw(&Moebius::n_minus(z)),
            Orientation::MinusAPlus => Moebius::n_minus(z).mul_raw(&am).mul_raw(&Moebius::n_plus(x)),
        };
        let c = g.bruhat(orientation).unwrap();
        let err = (c.x - x).norm().max((c.z - z).norm()).max((c.t - t).abs()).max(angle_distance(c.theta, theta));
        worst = worst.max(err);
    }
    worst
}

/// Largest |window length - 2 eps| over n random box elements, each window confirmed by
/// flowing just inside and just outside both ends.
pub fn return_window_error(seed: u64, n: usize) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let eps = r.gen_range(0.01..0.25);
        let b = FlowBox::new(random_element(&mut r, 2.0), eps).unwrap();
        let k = 0.99 * eps;
        let coords = BoxCoords {
            x: random_cx(&mut r, k / 2f64.sqrt()),
            z: random_cx(&mut r, k / 2f64.sqrt()),
            t: r.gen_range(-k..k),
            theta: r.gen_range(-k..k),
        };
        let g = b.base().mul_raw(&coords.element());
        let (lo, hi) = b.return_window(&g).unwrap();
        let flow = |s: f64| b.contains(&g.mul_raw(&Moebius::a_t(s)));
        let h = 1e-7;
        let ends_ok = flow(lo + h) && flow(hi - h) && !flow(lo - h) && !flow(hi + h);
        worst = worst.max(((hi - lo) - 2.0 * eps).abs());
        if !ends_ok {
            worst = f64::INFINITY;
        }
    }
    worst
}

/// Conjugator uniqueness: for a1 m1 in A+M and h drawn from AM, from small perturbations of
/// AM, from the Weyl coset of AM and from generic elements, whenever h a1 m1 h^{-1} is within
/// 1e-10 of an element a2 m2 of A+M, h must be in AM and (t, theta) must agree.
/// Returns (cases where the hypothesis held, failures).
pub fn uq_conjugator_check(seed: u64, n: usize) -> (usize, usize) {
    let mut r = rng(seed);
    let weyl = Moebius::from_sl2(Cx::new(0.0, 0.0), Cx::new(1.0, 0.0), Cx::new(-1.0, 0.0), Cx::new(0.0, 0.0));
    let (mut tested, mut failures) = (0, 0);
    for i in 0..n {
        let t1 = r.gen_range(0.05..6.0);
        let th1 = r.gen_range(0.0..std::f64::consts::PI);
        let g = Moebius::am(t1, th1);
        let am = Moebius::am(r.gen_range(-3.0..3.0), r.gen_range(0.0..std::f64::consts::PI));
        let h = match i % 4 {
            0 => am,
            1 => Moebius::n_plus(random_cx(&mut r, 1e-13)).mul_raw(&am).mul_raw(&Moebius::n_minus(random_cx(&mut r, 1e-13))),
            2 => weyl.mul_raw(&am),
            _ => random_element(&mut r, 2.0),
        };
        let k = h.mul_raw(&g).mul_raw(&h.inverse());
        let near_diag = k.b.norm() < 1e-10 && k.c.norm() < 1e-10;
        if !near_diag || k.a.norm() <= 1.0 {
            continue;
        }
        tested += 1;
        let c2 = k.bruhat(Orientation::PlusAMinus).unwrap();
        let hc = h.bruhat(Orientation::PlusAMinus).unwrap();
        let ok = hc.x.norm() + hc.z.norm() < 1e-6 && (c2.t - t1).abs() < 1e-9 && angle_distance(c2.theta, th1) < 1e-9;
        if !ok {
            failures += 1;
        }
    }
    (tested, failures)
}
