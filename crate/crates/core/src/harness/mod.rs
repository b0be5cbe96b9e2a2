//! Synthetic experiments that confront the bounds with simulated data.
//!
//! Every experiment is deterministic given its master seed: trial `i` uses
//! [`trial_seed`]`(seed, i)`, trials run in parallel and are merged by index.

pub mod checks;
pub mod data;
pub mod rates;
pub mod risk;
pub mod robustness;

pub use checks::{
    calibration_check, excess_cost_check, oracle_probability_check, variance_bound_check, CalibrationReport,
    ExcessCostReport, OracleConfig, OracleReport, VarianceReport,
};
pub use data::{generate, trial_seed, DataModel, NoiseModel};
pub use rates::{rate_experiment, RateConfig, RateReport};
pub use risk::{
    excess_l2_risk, excess_lalpha_risk, excess_lalpha_risk_exact, FnPredictor, Predictor, Quadrature,
};
pub use robustness::{robustness_study, RobustnessCell, RobustnessConfig, RobustnessTable};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::Kernel;
use crate::losses::{minimal_inner_risk, FiniteDistribution, LossSpec};
use crate::solver::{fit, SolverConfig, TrainingSet};

/// Outcome of one training run on a fresh sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub n: usize,
    pub lambda: f64,
    pub alpha: f64,
    /// `None` when the noise is asymmetric and `f*` is not the `L_alpha` target.
    pub excess_lalpha_risk: Option<f64>,
    pub excess_l2_risk: f64,
    pub rkhs_norm: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub duality_gap: f64,
    /// `sqrt((lambda |f*|^2 + R_T(f*) - R*_T) / lambda)`, which `|f_T|_H` may not exceed.
    pub norm_budget: f64,
}

impl TrialRecord {
    pub fn within_norm_budget(&self) -> bool {
        self.rkhs_norm <= self.norm_budget + 1e-6
    }
}

/// Smallest empirical risk over all measurable functions: labels sharing an
/// input are pooled and each group is fitted by its best constant.
pub fn minimal_empirical_risk(loss: &LossSpec, data: &TrainingSet) -> f64 {
    let w = data.weights();
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| {
        data.xs()[a]
            .iter()
            .zip(&data.xs()[b])
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut total = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && data.xs()[order[end]] == data.xs()[order[start]] {
            end += 1;
        }
        if end - start > 1 {
            let atoms: Vec<f64> = order[start..end].iter().map(|&i| data.ys()[i]).collect();
            let weights: Vec<f64> = order[start..end].iter().map(|&i| w[i]).collect();
            let mass: f64 = weights.iter().sum();
            let q = FiniteDistribution::new(atoms, weights).expect("positive weights");
            total += mass * minimal_inner_risk(loss, &q).1;
        }
        start = end;
    }
    total
}

/// Draws a sample, trains with `L_alpha` and regularization `lambda`, and
/// measures the excess risks against the model's truth.
pub fn run_trial(
    model: &DataModel,
    kernel: &Kernel,
    alpha: f64,
    lambda: f64,
    n: usize,
    seed: u64,
    quadrature: &Quadrature,
) -> Result<TrialRecord> {
    let loss = LossSpec::power(alpha)?;
    let data = generate(model, n, seed)?;
    let result = fit(kernel, &loss, &data, &SolverConfig::new(lambda))?;
    let excess_l2 = risk::excess_l2_risk_with(model, &result.f, quadrature);
    let excess_lalpha = if !model.noise().is_symmetric() {
        None
    } else if alpha == 2.0 {
        Some(excess_l2)
    } else {
        Some(risk::excess_lalpha_risk_exact_with(model, &result.f, alpha, quadrature)?)
    };
    let rkhs_norm = result.f.rkhs_norm()?;

    let fstar_values = model.fstar().eval_many(data.xs());
    let fstar_risk: f64 = data
        .weights()
        .iter()
        .zip(data.ys())
        .zip(&fstar_values)
        .map(|((w, y), t)| w * loss.value(*y, *t))
        .sum();
    let gap = (fstar_risk - minimal_empirical_risk(&loss, &data)).max(0.0);
    let norm_budget = ((lambda * model.fstar_norm().powi(2) + gap) / lambda).sqrt();

    Ok(TrialRecord {
        seed,
        n,
        lambda,
        alpha,
        excess_lalpha_risk: excess_lalpha,
        excess_l2_risk: excess_l2,
        rkhs_norm,
        objective: result.objective,
        iterations: result.iterations,
        converged: result.converged,
        duality_gap: result.duality_gap,
        norm_budget,
    })
}
