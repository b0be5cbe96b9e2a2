use rayon::prelude::*;

use regrisk::harness::{
    excess_l2_risk, generate, run_trial, robustness_study, trial_seed, DataModel, NoiseModel, Quadrature,
    RobustnessConfig,
};
use regrisk::{DomainBox, Kernel};

fn setup() -> (Kernel, DataModel) {
    let k = Kernel::matern(1.0, 0.5, DomainBox::unit(1)).unwrap();
    let m = DataModel::new(DataModel::standard_fstar(&k, 0.45).unwrap(), NoiseModel::Uniform { b: 0.5 }).unwrap();
    (k, m)
}

#[test]
fn trials_do_not_depend_on_execution_order() {
    let (k, m) = setup();
    let q = Quadrature::for_box(m.domain());
    let seeds: Vec<u64> = (0..8).map(|i| trial_seed(42, i)).collect();
    let serial: Vec<_> = seeds.iter().map(|&s| run_trial(&m, &k, 1.5, 0.02, 100, s, &q).unwrap()).collect();
    let parallel: Vec<_> = seeds.par_iter().rev().map(|&s| run_trial(&m, &k, 1.5, 0.02, 100, s, &q).unwrap()).collect();
    let mut parallel = parallel;
    parallel.reverse();
    assert_eq!(serial, parallel);
    for r in &serial {
        assert!(r.within_norm_budget(), "{r:?}");
    }
}

#[test]
fn generated_labels_stay_in_range() {
    let (_, m) = setup();
    let noisy = m
        .with_noise(NoiseModel::Contaminated {
            base: Box::new(NoiseModel::TruncatedGaussian { sigma: 0.3, b: 0.4 }),
            fraction: 0.2,
            magnitude: 0.55,
            symmetric: true,
        })
        .unwrap();
    let data = generate(&noisy, 5000, 9).unwrap();
    assert!(data.ys().iter().all(|y| y.abs() <= 1.0));
}

#[test]
fn excess_l2_risk_is_nonnegative_for_fits() {
    let (k, m) = setup();
    let q = Quadrature::for_box(m.domain());
    for i in 0..5 {
        let r = run_trial(&m, &k, 2.0, 0.01, 50, trial_seed(1, i), &q).unwrap();
        assert!(r.excess_l2_risk >= 0.0);
    }
    assert_eq!(excess_l2_risk(&m, m.fstar()), 0.0);
}

#[test]
fn one_sided_outliers_are_allowed_as_diagnostics() {
    let (k, m) = setup();
    let cfg = RobustnessConfig {
        etas: vec![0.0, 0.2],
        alphas: vec![1.1, 2.0],
        n: 100,
        lambda: 0.01,
        trials: 3,
        symmetric: false,
        ..Default::default()
    };
    let t = robustness_study(&m, &k, &cfg).unwrap();
    assert_eq!(t.cells.len(), 4);
}
