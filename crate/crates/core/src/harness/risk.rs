//! Excess risks against the known regression function.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::DataModel;
use crate::error::{check_param, Error, Result};
use crate::kernels::{tensor_product, DomainBox, KernelExpansion};
use crate::losses::power_abs;

/// Anything that can be evaluated on a batch of inputs.
pub trait Predictor {
    fn predict_many(&self, xs: &[Vec<f64>]) -> Vec<f64>;
}

impl Predictor for KernelExpansion {
    fn predict_many(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        self.eval_many(xs)
    }
}

/// Wraps a closure as a [`Predictor`].
pub struct FnPredictor<F>(pub F);

impl<F: Fn(&[f64]) -> f64> Predictor for FnPredictor<F> {
    fn predict_many(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.iter().map(|x| (self.0)(x)).collect()
    }
}

/// Tensor composite-Simpson nodes on the box with weights summing to one.
pub struct Quadrature {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    /// About `8193` nodes per axis in one dimension, fewer in higher dimension
    /// (at most roughly `2e5` nodes in total, at least `33` per axis).
    pub fn for_box(domain: &DomainBox) -> Self {
        let d = domain.dim();
        let budget = 2.0e5f64;
        let per_axis = if d == 1 {
            8193
        } else {
            let m = budget.powf(1.0 / d as f64).floor() as usize;
            let m = m.max(33);
            m - (1 - m % 2) // odd
        };
        Self::with_nodes_per_axis(domain, per_axis)
    }

    pub fn with_nodes_per_axis(domain: &DomainBox, per_axis: usize) -> Self {
        let m = per_axis.max(3) | 1;
        let axis_weights: Vec<f64> = (0..m)
            .map(|i| {
                let w = if i == 0 || i == m - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w / (3.0 * (m - 1) as f64)
            })
            .collect();
        let axes: Vec<Vec<f64>> = domain
            .lower()
            .iter()
            .zip(domain.upper())
            .map(|(lo, hi)| (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect())
            .collect();
        let nodes = tensor_product(&axes);
        let index_axes: Vec<Vec<f64>> = (0..domain.dim()).map(|_| axis_weights.clone()).collect();
        let weights = tensor_product(&index_axes)
            .into_iter()
            .map(|ws| ws.iter().product())
            .collect();
        Self { nodes, weights }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// `E_x (f(x) - f*(x))^2` by quadrature over the input box, which equals the
/// excess least-squares risk.
pub fn excess_l2_risk<P: Predictor + ?Sized>(model: &DataModel, f: &P) -> f64 {
    let q = Quadrature::for_box(model.domain());
    excess_l2_risk_with(model, f, &q)
}

pub fn excess_l2_risk_with<P: Predictor + ?Sized>(model: &DataModel, f: &P, q: &Quadrature) -> f64 {
    let fx = f.predict_many(&q.nodes);
    let gx = model.fstar().eval_many(&q.nodes);
    let sq: Vec<f64> = fx.iter().zip(&gx).map(|(a, b)| (a - b) * (a - b)).collect();
    q.integrate(&sq).max(0.0)
}

/// Monte-Carlo estimate and standard error of `E[|y - f(x)|^alpha - |y - f*(x)|^alpha]`.
///
/// This is the excess `L_alpha` risk only when `f*` minimizes the `L_alpha`
/// risk, which symmetric noise guarantees; asymmetric models are rejected.
pub fn excess_lalpha_risk<P: Predictor + ?Sized>(
    model: &DataModel,
    f: &P,
    alpha: f64,
    mc_points: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if !model.noise().is_symmetric() {
        return Err(Error::Unsupported(
            "excess L_alpha risk against f* requires symmetric noise".into(),
        ));
    }
    if mc_points < 2 {
        return Err(Error::Config("need at least two Monte-Carlo points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = model.sample_inputs(&mut rng, mc_points);
    let fx = f.predict_many(&xs);
    let gx = model.fstar().eval_many(&xs);
    let samples: Vec<f64> = fx
        .iter()
        .zip(&gx)
        .map(|(a, b)| {
            let xi = model.noise().sample(&mut rng);
            power_abs(xi - (a - b), alpha) - power_abs(xi, alpha)
        })
        .collect();
    Ok(mean_and_se(&samples))
}

/// Excess `L_alpha` risk with the noise integrated exactly and the input
/// integrated by quadrature.
pub fn excess_lalpha_risk_exact<P: Predictor + ?Sized>(model: &DataModel, f: &P, alpha: f64) -> Result<f64> {
    let q = Quadrature::for_box(model.domain());
    excess_lalpha_risk_exact_with(model, f, alpha, &q)
}

pub fn excess_lalpha_risk_exact_with<P: Predictor + ?Sized>(
    model: &DataModel,
    f: &P,
    alpha: f64,
    q: &Quadrature,
) -> Result<f64> {
    check_alpha(alpha)?;
    if !model.noise().is_symmetric() {
        return Err(Error::Unsupported(
            "excess L_alpha risk against f* requires symmetric noise".into(),
        ));
    }
    let fx = f.predict_many(&q.nodes);
    let gx = model.fstar().eval_many(&q.nodes);
    let base = model.noise().abs_moment(alpha, 0.0);
    let vals: Vec<f64> = fx
        .iter()
        .zip(&gx)
        .map(|(a, b)| model.noise().abs_moment(alpha, a - b) - base)
        .collect();
    Ok(q.integrate(&vals).max(0.0))
}

fn check_alpha(alpha: f64) -> Result<()> {
    check_param("alpha", alpha, (1.0..=2.0).contains(&alpha), "must lie in [1, 2]")
}

/// Sample mean and its standard error.
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
