//! Randomized invariants over arbitrary inputs.

use diffquad::measures::PointMeasure;
use diffquad::operators::SpectralFunction;
use diffquad::opt::project_simplex;
use diffquad::quadrature::poly_quad_error;
use diffquad::spaces::{circle_space, Point};
use proptest::prelude::*;

proptest! {
    #[test]
    fn simplex_projection_is_feasible(v in prop::collection::vec(-100.0f64..100.0, 1..40)) {
        let w = project_simplex(&v);
        prop_assert_eq!(w.len(), v.len());
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        let total: f64 = w.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "sum {}", total);
    }

    #[test]
    fn cutoff_is_a_monotone_partition_of_unity(a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let h_lo = diffquad::mask::cutoff_h(lo);
        let h_hi = diffquad::mask::cutoff_h(hi);
        prop_assert!((0.0..=1.0).contains(&h_lo));
        prop_assert!(h_hi <= h_lo + 1e-12, "h({lo}) = {h_lo} < h({hi}) = {h_hi}");
    }

    #[test]
    fn measures_round_trip_through_json(
        angles in prop::collection::vec(0.0f64..6.28, 1..12),
        weights in prop::collection::vec(-2.0f64..2.0, 12),
    ) {
        let space = circle_space(4).unwrap();
        let nodes: Vec<Point> = angles.iter().map(|&t| Point::Circle(t)).collect();
        let weights = weights[..nodes.len()].to_vec();
        let nu = PointMeasure::new(nodes, weights).unwrap();
        let back = PointMeasure::from_json(&space, &nu.to_json(&space)).unwrap();
        prop_assert_eq!(back.len(), nu.len());
        for (a, b) in nu.weights().iter().zip(back.weights()) {
            prop_assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in nu.support().iter().zip(back.support()) {
            prop_assert!(space.metric(a, b) < 1e-12);
        }
    }

    // exactness ⇒ approximate class: the reference rule integrates every
    // stored polynomial, so its quadrature error vanishes for any
    // coefficient vector
    #[test]
    fn reference_rule_integrates_arbitrary_polynomials(
        coeffs in prop::collection::vec((0usize..33, -10.0f64..10.0), 0..20),
    ) {
        let space = circle_space(16).unwrap();
        let nu = PointMeasure::uniform(space.reference_nodes().to_vec());
        let p = SpectralFunction::new(coeffs);
        let err = poly_quad_error(&space, &nu, &p);
        prop_assert!(err <= 1e-9, "error {err}");
    }
}
