use ghc_core::exponent::*;
use ghc_core::flowbox::{FlowBox, Sector};
use ghc_core::marking::s2;
use ghc_core::patterson::*;
use ghc_core::space::GenDisk;
use ghc_core::{Cx, SpherePoint};
use proptest::prelude::*;
use std::sync::OnceLock;

/// Distances ln(k) / delta, k = 1, 2, ..., so that N(r) = floor(e^{delta r}) exactly.
fn synthetic(delta: f64, radius: f64) -> OrbitTable {
    let n = (delta * radius).exp().floor() as usize;
    OrbitTable { distances: (1..=n).map(|k| (k as f64).ln() / delta).collect(), reach: radius }
}

#[test]
fn both_methods_recover_a_known_growth_rate() {
    for delta in [0.5, 1.0, 1.7] {
        let tab = synthetic(delta, 12.0 / delta);
        for method in [DeltaMethod::OrbitalFit, DeltaMethod::PoincareBisection] {
            let e = estimate_delta(&tab, method).unwrap();
            assert!((e.raw - delta).abs() < 0.01, "{method:?} gave {} for {delta}", e.raw);
            assert!(e.ci.0 <= e.raw && e.raw <= e.ci.1);
        }
    }
}

#[test]
fn small_tables_are_rejected() {
    let tab = synthetic(1.0, 5.0);
    assert!(tab.len() < MIN_ORBIT_POINTS);
    assert!(matches!(estimate_delta(&tab, DeltaMethod::OrbitalFit), Err(ExponentError::InsufficientData(_))));
}

#[test]
fn reach_is_enforced() {
    let m = s2();
    let src = SchottkyOrbit { reach: 10.0, ..SchottkyOrbit::new(&m) };
    assert!(matches!(orbit_table(&src, 11.0), Err(ExponentError::ReachExceeded(..))));
}

#[test]
fn picard_exponent_is_two() {
    let e = estimate_delta_for(&PicardOrbit::default(), 5.0, DeltaMethod::OrbitalFit).unwrap();
    assert!((e.delta - 2.0).abs() < 0.05, "{e:?}");
}

#[test]
fn s2_exponent_is_stable_at_depth() {
    let m = s2();
    let tab = orbit_table(&SchottkyOrbit::new(&m), 22.0).unwrap();
    let e = estimate_delta(&tab, DeltaMethod::OrbitalFit).unwrap();
    assert!(e.delta > 0.4 && e.delta < 0.55, "{e:?}");
    assert_eq!(poincare_partial(&tab, 0.0), tab.len() as f64);
}

#[test]
fn li_is_increasing_and_offset_from_two() {
    assert_eq!(li(2.0).unwrap(), 0.0);
    assert!(li(1.5).is_err());
    let mut prev = 0.0;
    for k in 1..40 {
        let v = li(2.0 + k as f64 * 7.3).unwrap();
        assert!(v > prev);
        prev = v;
    }
}

fn nu() -> &'static PSMeasure {
    static NU: OnceLock<PSMeasure> = OnceLock::new();
    NU.get_or_init(|| patterson_sample(&s2(), 22.0, 0.48).unwrap())
}

#[test]
fn patterson_atoms_are_a_probability_on_the_disks() {
    let m = s2();
    let nu = nu();
    assert!((nu.total_mass() - 1.0).abs() < 1e-12);
    let disks = m.marking().all_disks();
    for a in &nu.atoms {
        assert!(a.weight > 0.0);
        assert!(disks.iter().any(|d| d.contains(a.point)));
    }
    let sum: f64 = disks.iter().map(|d| nu.measure_of_disk(d)).sum();
    assert!((sum - 1.0).abs() < 1e-12);
}

#[test]
fn patterson_density_is_nearly_conformal() {
    assert!(conformality_defect(nu(), &s2()) < 0.05);
}

#[test]
fn bms_mass_of_a_box_on_a_generator_axis_is_positive() {
    let m = s2();
    let g1 = m.marking().generators[0];
    let b = FlowBox::new(g1.hyperbolic_data().unwrap().conjugator, 0.1).unwrap();
    assert!(bms_box_mass(nu(), &b, &Sector::full()) > 0.0);
    assert_eq!(bms_box_mass(nu(), &b, &Sector::empty()), 0.0);
}

#[test]
fn empty_shell_is_an_error() {
    assert!(matches!(patterson_sample_shell(&s2(), 1.0, 0.5, 0.48), Err(ExponentError::InsufficientData(0))));
}

#[test]
fn csv_has_one_row_per_atom() {
    let csv = nu().to_csv();
    assert_eq!(csv.lines().count(), nu().atoms.len() + 1);
    assert!(csv.starts_with("re,im,weight"));
}

fn point() -> impl Strategy<Value = SpherePoint> {
    (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(a, b)| SpherePoint::Finite(Cx::new(a, b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn complementary_regions_split_the_mass(cx in -3.0f64..3.0, cy in -3.0f64..3.0, r in 0.1f64..3.0) {
        let d = GenDisk::disk(Cx::new(cx, cy), r);
        let total = nu().measure_of_disk(&d) + nu().measure_of_disk(&d.complement());
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn visual_distance_is_a_bounded_symmetric_metric(x in point(), y in point(), z in point()) {
        let dxy = visual_distance(x, y);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&dxy));
        prop_assert!((dxy - visual_distance(y, x)).abs() < 1e-12);
        prop_assert!(dxy <= visual_distance(x, z) + visual_distance(z, y) + 1e-12);
    }

    #[test]
    fn partial_sums_decrease_in_the_exponent(s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let tab = synthetic(1.0, 8.0);
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        prop_assert!(poincare_partial(&tab, hi) <= poincare_partial(&tab, lo) + 1e-9);
    }
}

#[test]
fn antipodes_are_at_visual_distance_one() {
    let zero = SpherePoint::Finite(Cx::new(0.0, 0.0));
    assert!((visual_distance(zero, SpherePoint::Infinity) - 1.0).abs() < 1e-12);
}
