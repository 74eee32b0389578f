//! End-to-end checks across modules on small grids.

use aclab_core::elliptic::{newton_polish, zero_set};
use aclab_core::energy::{balanced_energy, broken_transition};
use aclab_core::geometry::{geodesic_circle, make_warped_torus, point_pair, Ambient, Hypersurface};
use aclab_core::minmax::{
    curve_from_positions, hausdorff_distance, pseudogradient, symmetric_difference,
};
use aclab_core::profiles1d::SIGMA0;
use aclab_core::variation::{first_variation_asymptotic, first_variation_check};
use approx::assert_relative_eq;
use proptest::prelude::*;
use std::f64::consts::PI;

fn testbed(c: f64, ny: usize) -> Hypersurface {
    let m = make_warped_torus(2.0, 0.3).unwrap();
    geodesic_circle(Ambient::centred_strip(m), c, ny).unwrap()
}

#[test]
fn circle_energy_approaches_two_interfaces() {
    let s = point_pair(0.0, PI).unwrap();
    let r = balanced_energy(&s, 0.03).unwrap();
    assert_relative_eq!(r.balanced, 4.0 * SIGMA0, max_relative = 0.02);
}

#[test]
fn glued_transition_polishes_to_index_one_saddle() {
    let s = testbed(0.0, 8);
    let t = broken_transition(&s, 0.05, 161).unwrap();
    let p = newton_polish(&t.glue().unwrap()).unwrap();
    assert!(p.residual <= 1e-10);
    assert_eq!(p.morse_index, Some(1));
    let z = zero_set(&p.field).unwrap();
    let curve = curve_from_positions(&s, &z).unwrap();
    assert!(hausdorff_distance(&curve, &s) < 1e-6);
    assert_relative_eq!(p.energy, t.balanced(), max_relative = 1e-8);
}

#[test]
fn tilted_circle_first_variation_matches_geometry() {
    let s = testbed(1.0, 1);
    let c = first_variation_check(&s, &[1.0], 0.04, 161, 1e-3).unwrap();
    assert!(c.relative <= 1e-3, "{c:?}");
    let asym = first_variation_asymptotic(&s, &[1.0]).unwrap();
    assert!((c.analytic - asym).abs() <= 0.1 * asym.abs(), "{} vs {asym}", c.analytic);
}

#[test]
fn symmetric_difference_of_level_circles() {
    let m = make_warped_torus(2.0, 0.3).unwrap();
    let (a, b) = (testbed(0.0, 4), testbed(0.3, 4));
    let expect = 2.0 * PI * (m.h_primitive(0.3) - m.h_primitive(0.0));
    assert_relative_eq!(symmetric_difference(&m, &a, &b), expect, max_relative = 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn pseudogradient_is_admissible(a in -0.15f64..0.15, b in -0.1f64..0.1, c in -0.5f64..0.5) {
        let base = testbed(c, 8);
        let g: Vec<f64> = base.y_grid().iter().map(|y| a * y.cos() + b * (2.0 * y).sin()).collect();
        let p = pseudogradient(&base.with_graph(g).unwrap(), 0.05).unwrap();
        prop_assert!(p.satisfies_inequalities());
        prop_assert!(p.norm <= 2.0 * p.dual_norm + 1e-12);
    }
}
