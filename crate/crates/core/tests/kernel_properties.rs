use proptest::prelude::*;

use regrisk::{kernel_matrix, DomainBox, GramOperator, Kernel, KernelExpansion};

fn kernels() -> Vec<Kernel> {
    vec![
        Kernel::gaussian(0.4, DomainBox::unit(1)).unwrap(),
        Kernel::matern(1.0, 0.3, DomainBox::unit(1)).unwrap(),
        Kernel::matern(2.0, 0.3, DomainBox::unit(1)).unwrap(),
        Kernel::linear(DomainBox::unit(1)).unwrap(),
    ]
}

fn points() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_scan_never_exceeds_rkhs_norm(xs in points(), seed in prop::collection::vec(-1.0..=1.0f64, 12), which in 0usize..4) {
        let k = kernels().swap_remove(which);
        let centers: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
        let f = KernelExpansion::new(k, centers, seed[..xs.len()].to_vec()).unwrap();
        prop_assert!(f.grid_sup_estimate(10_000) <= f.rkhs_norm().unwrap() + 1e-9);
    }

    #[test]
    fn kernel_matrix_permutes_with_points(xs in points(), which in 0usize..4, rot in 0usize..12) {
        let k = kernels().swap_remove(which);
        let pts: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
        let n = pts.len();
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).rev().collect();
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| pts[i].clone()).collect();
        let a = kernel_matrix(&k, &pts).unwrap();
        let b = kernel_matrix(&k, &permuted).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(b[(i, j)], a[(perm[i], perm[j])]);
            }
        }
    }

    #[test]
    fn triangle_inequality(xs in points(), ys in points(), c1 in prop::collection::vec(-1.0..=1.0f64, 12), c2 in prop::collection::vec(-1.0..=1.0f64, 12), which in 0usize..4) {
        let k = kernels().swap_remove(which);
        let f = KernelExpansion::new(k.clone(), xs.iter().map(|x| vec![*x]).collect(), c1[..xs.len()].to_vec()).unwrap();
        let g = KernelExpansion::new(k, ys.iter().map(|x| vec![*x]).collect(), c2[..ys.len()].to_vec()).unwrap();
        let sum = f.add(&g).unwrap();
        prop_assert!(sum.rkhs_norm().unwrap() <= f.rkhs_norm().unwrap() + g.rkhs_norm().unwrap() + 1e-9);
    }

    #[test]
    fn structured_operator_matches_dense(xs in prop::collection::vec(0.0..=1.0f64, 1..40), v in prop::collection::vec(-1.0..=1.0f64, 40), shift in prop::collection::vec(0.01..=2.0f64, 40)) {
        let k = Kernel::matern(1.0, 0.3, DomainBox::unit(1)).unwrap();
        let pts: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
        let n = pts.len();
        let fast = GramOperator::new(&k, &pts).unwrap();
        let dense = GramOperator::dense(&k, &pts).unwrap();
        let v = &v[..n];
        let (a, b) = (fast.apply(v), dense.apply(v));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        let (a, b) = (fast.solve_diag_shift(&shift[..n], v).unwrap(), dense.solve_diag_shift(&shift[..n], v).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-7 * (1.0 + y.abs()), "{} vs {}", x, y);
        }
    }
}
