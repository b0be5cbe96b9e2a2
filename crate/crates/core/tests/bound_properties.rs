use proptest::prelude::*;

use regrisk::bounds::regression_epsilon;
use regrisk::covering::{ellipsoid_log_covering, fit_from_semi_axes};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn simplified_threshold_dominates_three_terms(
        alpha in 1.05..=1.95f64,
        p in 0.05..=1.95f64,
        a in 1.0..=10.0f64,
        ratio in 1.0..=1e4f64,
        x in 1.0..=5.0f64,
        lambda in 1e-3..=1.0f64,
        approx in 0.0..=0.5f64,
    ) {
        let e = regression_epsilon(alpha, p, 1.0, a, a * ratio, x, lambda, approx).unwrap();
        prop_assert!(e.simplified >= e.three_term * (1.0 - 1e-12));
    }

    #[test]
    fn covering_bounds_ordered_monotone_and_scale_free(
        axes in prop::collection::vec(1e-3..=1.0f64, 1..30),
        d1 in 1e-3..=1.0f64,
        d2 in 1e-3..=1.0f64,
    ) {
        let (lo, hi) = (d1.min(d2), d1.max(d2));
        let (l1, u1) = ellipsoid_log_covering(&axes, lo).unwrap();
        let (l2, u2) = ellipsoid_log_covering(&axes, hi).unwrap();
        prop_assert!(l1 <= u1 && l2 <= u2);
        prop_assert!(l2 <= l1 + 1e-12 && u2 <= u1 + 1e-12);
        let doubled: Vec<f64> = axes.iter().map(|s| 2.0 * s).collect();
        let (l3, u3) = ellipsoid_log_covering(&doubled, 2.0 * lo).unwrap();
        prop_assert!((l3 - l1).abs() < 1e-9 && (u3 - u1).abs() < 1e-9);
    }
}

#[test]
fn covering_fit_ignores_order_of_axes() {
    let axes: Vec<f64> = (1..=200).map(|j| (j as f64).powf(-1.5)).collect();
    let mut shuffled = axes.clone();
    shuffled.reverse();
    shuffled.swap(3, 77);
    assert_eq!(fit_from_semi_axes(&axes, None).unwrap().p, fit_from_semi_axes(&shuffled, None).unwrap().p);
}
