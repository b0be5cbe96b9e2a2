//! Regularized empirical risk minimization over the RKHS.
//!
//! By the representer theorem the minimizer of
//! `lambda |f|_H^2 + sum_i w_i L(y_i, f(x_i))` is `f = sum_i c_i k(x_i, .)`.
//! Least squares is solved from the normal equations; other power losses use
//! an accelerated proximal gradient method in the RKHS metric, with Huber
//! smoothing and an exact active-set finish for `alpha = 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};
use crate::kernels::{dot, GramOperator, Kernel, KernelExpansion};
use crate::losses::LossSpec;

/// Training sample `((x_1, y_1), ..., (x_n, y_n))` with optional point weights
/// (a finite discrete distribution); the default is the empirical measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl TrainingSet {
    pub fn new(xs: Vec<Vec<f64>>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                what: "inputs and labels",
                left: xs.len(),
                right: ys.len(),
            });
        }
        if xs.is_empty() {
            return Err(Error::Config("training set must contain at least one point".into()));
        }
        let dim = xs[0].len();
        for x in &xs {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
        }
        for y in &ys {
            check_param("label", *y, y.abs() <= 1.0, "labels must lie in [-1, 1]")?;
        }
        Ok(Self {
            xs,
            ys,
            weights: None,
        })
    }

    /// A weighted sample; weights must be positive and are normalized to sum to one.
    pub fn weighted(xs: Vec<Vec<f64>>, ys: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let mut set = Self::new(xs, ys)?;
        if weights.len() != set.len() {
            return Err(Error::LengthMismatch {
                what: "points and weights",
                left: set.len(),
                right: weights.len(),
            });
        }
        for w in &weights {
            check_param("weight", *w, *w > 0.0 && w.is_finite(), "must be positive")?;
        }
        let total: f64 = weights.iter().sum();
        set.weights = Some(weights.into_iter().map(|w| w / total).collect());
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn xs(&self) -> &[Vec<f64>] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Point masses of the (empirical) distribution.
    pub fn weights(&self) -> Vec<f64> {
        match &self.weights {
            Some(w) => w.clone(),
            None => vec![1.0 / self.len() as f64; self.len()],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// Closed form for least squares, proximal otherwise.
    Auto,
    ClosedFormQuadratic,
    ProximalFirstOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub lambda: f64,
    pub method: SolverMethod,
    pub max_iters: usize,
    /// Relative objective decrease below which an iteration counts as stalled.
    pub objective_tolerance: f64,
    /// Final Huber smoothing parameter for `alpha = 1`.
    pub smoothing: f64,
}

impl SolverConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            method: SolverMethod::Auto,
            max_iters: 20_000,
            objective_tolerance: 1e-9,
            smoothing: 1e-6,
        }
    }

    pub fn with_method(mut self, method: SolverMethod) -> Self {
        self.method = method;
        self
    }

    fn validate(&self) -> Result<()> {
        check_param("lambda", self.lambda, self.lambda > 0.0 && self.lambda <= 1.0, "must lie in (0, 1]")?;
        check_param(
            "objective_tolerance",
            self.objective_tolerance,
            self.objective_tolerance > 0.0,
            "must be positive",
        )?;
        check_param("smoothing", self.smoothing, self.smoothing >= 0.0, "must be nonnegative")?;
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub f: KernelExpansion,
    pub lambda: f64,
    pub loss: LossSpec,
    /// `lambda |f|^2 + sum_i w_i L(y_i, f(x_i))`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub method: SolverMethod,
    /// Huber parameter of the returned solution (0 when the loss was not smoothed
    /// or the exact active-set finish succeeded).
    pub smoothing_used: f64,
    /// Primal objective minus a Fenchel dual value; an upper bound on suboptimality.
    pub duality_gap: f64,
}

/// `lambda |f|_H^2 + sum_i w_i L(y_i, f(x_i))` for an arbitrary expansion.
pub fn objective(
    kernel: &Kernel,
    loss: &LossSpec,
    data: &TrainingSet,
    lambda: f64,
    f: &KernelExpansion,
) -> Result<f64> {
    if f.kernel() != kernel {
        return Err(Error::Config("expansion uses a different kernel".into()));
    }
    for x in data.xs() {
        kernel.domain().check(x)?;
    }
    let norm = f.rkhs_norm()?;
    let values = f.eval_many(data.xs());
    let risk: f64 = data
        .weights()
        .iter()
        .zip(data.ys())
        .zip(&values)
        .map(|((w, y), t)| w * loss.value(*y, *t))
        .sum();
    Ok(lambda * norm * norm + risk)
}

#[derive(Clone, Copy, Debug)]
enum DataTerm {
    Power(f64),
    Huber(f64),
}

impl DataTerm {
    fn value(self, r: f64) -> f64 {
        match self {
            DataTerm::Power(a) => crate::losses::power_abs(r, a),
            DataTerm::Huber(mu) => {
                let a = r.abs();
                if a <= mu {
                    a * a / (2.0 * mu)
                } else {
                    a - mu / 2.0
                }
            }
        }
    }

    fn derivative(self, r: f64) -> f64 {
        match self {
            DataTerm::Power(a) => {
                if r == 0.0 {
                    0.0
                } else if a == 2.0 {
                    2.0 * r
                } else {
                    a * r.signum() * r.abs().powf(a - 1.0)
                }
            }
            DataTerm::Huber(mu) => (r / mu).clamp(-1.0, 1.0),
        }
    }

    fn curvature_guess(self) -> f64 {
        match self {
            DataTerm::Power(a) => a.max(1.0) * 2.0,
            DataTerm::Huber(mu) => 1.0 / mu,
        }
    }
}

struct Problem<'a> {
    op: GramOperator,
    kernel: &'a Kernel,
    xs: &'a [Vec<f64>],
    y: &'a [f64],
    w: Vec<f64>,
    lambda: f64,
}

impl Problem<'_> {
    fn data(&self, term: DataTerm, kc: &[f64]) -> f64 {
        kc.iter()
            .zip(self.y)
            .zip(&self.w)
            .map(|((t, y), w)| w * term.value(t - y))
            .sum()
    }

    fn grad(&self, term: DataTerm, kc: &[f64]) -> Vec<f64> {
        kc.iter()
            .zip(self.y)
            .zip(&self.w)
            .map(|((t, y), w)| w * term.derivative(t - y))
            .collect()
    }

    fn objective(&self, term: DataTerm, c: &[f64], kc: &[f64]) -> f64 {
        self.lambda * dot(c, kc) + self.data(term, kc)
    }

    /// Dual value at `u` for the unsmoothed power loss, `-inf` when infeasible.
    fn dual(&self, alpha: f64, u: &[f64]) -> f64 {
        let ku = self.op.apply(u);
        let mut value = -dot(u, &ku) / (4.0 * self.lambda);
        for ((ui, yi), wi) in u.iter().zip(self.y).zip(&self.w) {
            let s = ui / wi;
            let conj = if alpha == 1.0 {
                if s.abs() > 1.0 + 1e-12 {
                    return f64::NEG_INFINITY;
                }
                0.0
            } else {
                (alpha - 1.0) * (s.abs() / alpha).powf(alpha / (alpha - 1.0))
            };
            value -= ui * yi + wi * conj;
        }
        value
    }

    /// Smallest gap over two natural dual candidates.
    fn duality_gap(&self, alpha: f64, c: &[f64], primal: f64) -> f64 {
        let from_coeffs: Vec<f64> = c.iter().map(|v| -2.0 * self.lambda * v).collect();
        let kc = self.op.apply(c);
        let from_grad: Vec<f64> = if alpha == 1.0 {
            kc.iter()
                .zip(self.y)
                .zip(&self.w)
                .zip(&from_coeffs)
                .map(|(((t, y), w), u)| {
                    let r = t - y;
                    if r == 0.0 {
                        u.clamp(-*w, *w)
                    } else {
                        w * r.signum()
                    }
                })
                .collect()
        } else {
            self.grad(DataTerm::Power(alpha), &kc)
        };
        let clipped: Vec<f64> = if alpha == 1.0 {
            from_coeffs
                .iter()
                .zip(&self.w)
                .map(|(u, w)| u.clamp(-*w, *w))
                .collect()
        } else {
            from_coeffs
        };
        let best = self.dual(alpha, &clipped).max(self.dual(alpha, &from_grad));
        (primal - best).max(0.0)
    }
}

struct FistaOutcome {
    c: Vec<f64>,
    kc: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn fista(p: &Problem, term: DataTerm, c0: Vec<f64>, max_iters: usize, tol: f64) -> FistaOutcome {
    let n = c0.len();
    let max_w = p.w.iter().cloned().fold(0.0, f64::max);
    let mut eta = 1.0 / (term.curvature_guess() * max_w * n as f64);
    let mut x = c0;
    let mut kx = p.op.apply(&x);
    let mut fx = p.objective(term, &x, &kx);
    let mut y = x.clone();
    let mut ky = kx.clone();
    let mut t: f64 = 1.0;
    let mut stalled = 0;
    let mut restarted = false;
    let mut z = vec![0.0; n];
    let mut kz = vec![0.0; n];

    for it in 1..=max_iters {
        let g = p.grad(term, &ky);
        let kg = p.op.apply(&g);
        let dy = p.data(term, &ky);
        let mut dz;
        loop {
            let shrink = 1.0 / (1.0 + 2.0 * eta * p.lambda);
            for i in 0..n {
                z[i] = (y[i] - eta * g[i]) * shrink;
                kz[i] = (ky[i] - eta * kg[i]) * shrink;
            }
            dz = p.data(term, &kz);
            let mut lin = 0.0;
            let mut quad = 0.0;
            for i in 0..n {
                let dk = kz[i] - ky[i];
                lin += g[i] * dk;
                quad += (z[i] - y[i]) * dk;
            }
            if dz <= dy + lin + quad / (2.0 * eta) + 1e-14 * dy.abs() || eta < 1e-300 {
                break;
            }
            eta *= 0.5;
        }
        let fz = p.lambda * dot(&z, &kz) + dz;

        if fz > fx {
            if restarted {
                // a plain proximal step from x failed to descend: numerically stationary
                stalled += 1;
            }
            restarted = true;
            t = 1.0;
            y.copy_from_slice(&x);
            ky.copy_from_slice(&kx);
        } else {
            restarted = false;
            let t_next = 0.5 * (1.0 + (1.0f64 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            for i in 0..n {
                y[i] = z[i] + beta * (z[i] - x[i]);
                ky[i] = kz[i] + beta * (kz[i] - kx[i]);
            }
            let rel = (fx - fz) / fx.abs().max(f64::MIN_POSITIVE);
            if rel < tol {
                stalled += 1;
            } else {
                stalled = 0;
            }
            std::mem::swap(&mut x, &mut z);
            std::mem::swap(&mut kx, &mut kz);
            fx = fz;
            t = t_next;
        }
        eta *= 1.2;

        let mut converged = stalled >= 10;
        if !converged && it % 5 == 0 {
            let r: Vec<f64> = p
                .grad(term, &kx)
                .iter()
                .zip(&x)
                .map(|(gi, ci)| gi + 2.0 * p.lambda * ci)
                .collect();
            let res = p.op.quadratic_form(&r).max(0.0).sqrt();
            converged = res < 1e-8;
        }
        if converged {
            return FistaOutcome {
                c: x,
                kc: kx,
                iterations: it,
                converged: true,
            };
        }
    }
    FistaOutcome {
        c: x,
        kc: kx,
        iterations: max_iters,
        converged: false,
    }
}

/// Largest active set handled by the exact `alpha = 1` finish.
const POLISH_MAX_ACTIVE: usize = 600;

/// Exact solution of the `alpha = 1` problem from a smoothed one by guessing the
/// set of interpolated points and solving the optimality system.
fn polish_absolute(p: &Problem, kc: &[f64], mu: f64) -> Option<Vec<f64>> {
    let n = kc.len();
    let resid: Vec<f64> = kc.iter().zip(p.y).map(|(t, y)| t - y).collect();
    let mut active: Vec<bool> = resid.iter().map(|r| r.abs() < mu).collect();
    let mut sign: Vec<f64> = resid.iter().map(|r| if *r >= 0.0 { 1.0 } else { -1.0 }).collect();

    for _ in 0..20 {
        let s_idx: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
        if s_idx.len() > POLISH_MAX_ACTIVE {
            return None;
        }
        let mut c = vec![0.0; n];
        for i in 0..n {
            if !active[i] {
                c[i] = -p.w[i] * sign[i] / (2.0 * p.lambda);
            }
        }
        if !s_idx.is_empty() {
            let kcn = p.op.apply(&c);
            let m = s_idx.len();
            let mut kss = DMatrix::zeros(m, m);
            for (a, &i) in s_idx.iter().enumerate() {
                let row = p.op.entries(i, &s_idx, p.kernel, p.xs);
                for (b, v) in row.into_iter().enumerate() {
                    kss[(a, b)] = v;
                }
            }
            let rhs = DVector::from_iterator(m, s_idx.iter().map(|&i| p.y[i] - kcn[i]));
            let sol = kss.cholesky()?.solve(&rhs);
            for (a, &i) in s_idx.iter().enumerate() {
                c[i] = sol[a];
            }
        }
        let kc_new = p.op.apply(&c);
        let mut changed = false;
        for i in 0..n {
            if active[i] {
                let s = -2.0 * p.lambda * c[i] / p.w[i];
                if s.abs() > 1.0 + 1e-9 {
                    active[i] = false;
                    sign[i] = s.signum();
                    changed = true;
                }
            } else {
                let r = kc_new[i] - p.y[i];
                if r * sign[i] < -1e-12 {
                    active[i] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return Some(c);
        }
    }
    None
}

/// Minimizes `lambda |f|_H^2 + sum_i w_i L(y_i, f(x_i))` over the RKHS.
pub fn fit(kernel: &Kernel, loss: &LossSpec, data: &TrainingSet, cfg: &SolverConfig) -> Result<FitResult> {
    cfg.validate()?;
    loss.validate()?;
    let alpha = match loss {
        LossSpec::Power { alpha } => *alpha,
        LossSpec::Hinge => {
            return Err(Error::Unsupported("training with the hinge loss".into()));
        }
    };
    let op = GramOperator::new(kernel, data.xs())?;
    let p = Problem {
        op,
        kernel,
        xs: data.xs(),
        y: data.ys(),
        w: data.weights(),
        lambda: cfg.lambda,
    };
    let n = data.len();

    let method = match cfg.method {
        SolverMethod::Auto if alpha == 2.0 => SolverMethod::ClosedFormQuadratic,
        SolverMethod::Auto => SolverMethod::ProximalFirstOrder,
        m => m,
    };

    let (c, iterations, converged, smoothing_used) = match method {
        SolverMethod::ClosedFormQuadratic => {
            if alpha != 2.0 {
                return Err(Error::Unsupported(format!(
                    "closed-form solve requires alpha = 2, got {alpha}"
                )));
            }
            let shift: Vec<f64> = p.w.iter().map(|w| cfg.lambda / w).collect();
            (p.op.solve_diag_shift(&shift, p.y)?, 0, true, 0.0)
        }
        _ if alpha > 1.0 => {
            let out = fista(&p, DataTerm::Power(alpha), vec![0.0; n], cfg.max_iters, cfg.objective_tolerance);
            (out.c, out.iterations, out.converged, 0.0)
        }
        _ => {
            let target = cfg.smoothing.max(1e-12);
            let mut mu = 0.1f64.max(target);
            let mut c = vec![0.0; n];
            let mut iterations = 0;
            let mut converged;
            loop {
                let budget = cfg.max_iters.saturating_sub(iterations).max(1);
                let out = fista(&p, DataTerm::Huber(mu), c, budget, cfg.objective_tolerance);
                iterations += out.iterations;
                converged = out.converged;
                c = out.c;
                if mu <= target || iterations >= cfg.max_iters {
                    let smoothed_kc = out.kc;
                    let smoothed_obj = p.objective(DataTerm::Power(1.0), &c, &smoothed_kc);
                    if let Some(exact) = polish_absolute(&p, &smoothed_kc, mu.max(1e-9)) {
                        let kc = p.op.apply(&exact);
                        if p.objective(DataTerm::Power(1.0), &exact, &kc) <= smoothed_obj + 1e-12 {
                            break (exact, iterations, true, 0.0);
                        }
                    }
                    break (c, iterations, converged, mu);
                }
                mu = (mu * 0.1).max(target);
            }
        }
    };

    let kc = p.op.apply(&c);
    let mut objective = p.objective(DataTerm::Power(alpha), &c, &kc);
    let mut c = c;
    // never return anything worse than f = 0
    let zero_objective = p.data(DataTerm::Power(alpha), &vec![0.0; n]);
    if objective > zero_objective {
        c = vec![0.0; n];
        objective = zero_objective;
    }
    let duality_gap = p.duality_gap(alpha, &c, objective);
    let f = KernelExpansion::new(kernel.clone(), data.xs().to_vec(), c)?;
    Ok(FitResult {
        f,
        lambda: cfg.lambda,
        loss: *loss,
        objective,
        iterations,
        converged,
        method,
        smoothing_used,
        duality_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::DomainBox;

    fn gauss() -> Kernel {
        Kernel::gaussian(0.5, DomainBox::unit(1)).unwrap()
    }

    fn single(y: f64) -> TrainingSet {
        TrainingSet::new(vec![vec![0.3]], vec![y]).unwrap()
    }

    #[test]
    fn scalar_least_squares() {
        let r = fit(&gauss(), &LossSpec::least_squares(), &single(1.0), &SolverConfig::new(0.5)).unwrap();
        assert!((r.f.coefficients()[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.objective - 1.0 / 3.0).abs() < 1e-12);
        assert!(r.duality_gap < 1e-12);
    }

    #[test]
    fn scalar_least_squares_proximal() {
        let cfg = SolverConfig::new(0.5).with_method(SolverMethod::ProximalFirstOrder);
        let r = fit(&gauss(), &LossSpec::least_squares(), &single(1.0), &cfg).unwrap();
        assert!((r.f.coefficients()[0] - 2.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn scalar_absolute_loss() {
        let r = fit(&gauss(), &LossSpec::power(1.0).unwrap(), &single(1.0), &SolverConfig::new(0.1)).unwrap();
        assert!((r.f.coefficients()[0] - 1.0).abs() < 1e-8, "{:?}", r.f.coefficients());
        assert_eq!(r.smoothing_used, 0.0);
        // lambda above 1/2: the solution sits on the kink of the subgradient condition
        let r = fit(&gauss(), &LossSpec::power(1.0).unwrap(), &single(1.0), &SolverConfig::new(0.8)).unwrap();
        assert!((r.f.coefficients()[0] - 1.0 / 1.6).abs() < 1e-8);
    }

    #[test]
    fn zero_labels_give_zero_solution() {
        let xs = vec![vec![0.1], vec![0.5], vec![0.9]];
        let data = TrainingSet::new(xs, vec![0.0; 3]).unwrap();
        for alpha in [1.0, 1.5, 2.0] {
            let r = fit(&gauss(), &LossSpec::power(alpha).unwrap(), &data, &SolverConfig::new(0.1)).unwrap();
            assert!(r.objective.abs() < 1e-12);
            assert!(r.f.coefficients().iter().all(|c| c.abs() < 1e-9));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TrainingSet::new(vec![vec![0.1]], vec![1.5]).is_err());
        assert!(fit(&gauss(), &LossSpec::Hinge, &single(1.0), &SolverConfig::new(0.1)).is_err());
        assert!(fit(&gauss(), &LossSpec::least_squares(), &single(1.0), &SolverConfig::new(1.5)).is_err());
        let cfg = SolverConfig::new(0.1).with_method(SolverMethod::ClosedFormQuadratic);
        assert!(fit(&gauss(), &LossSpec::power(1.5).unwrap(), &single(1.0), &cfg).is_err());
    }

    #[test]
    fn objective_of_zero_is_mean_loss() {
        let data = TrainingSet::new(vec![vec![0.1], vec![0.7]], vec![0.5, -1.0]).unwrap();
        let v = objective(&gauss(), &LossSpec::least_squares(), &data, 0.3, &KernelExpansion::zero(gauss())).unwrap();
        assert!((v - 0.625).abs() < 1e-15);
    }

    #[test]
    fn weighted_least_squares_matches_repeated_points() {
        let k = gauss();
        let repeated = TrainingSet::new(vec![vec![0.2], vec![0.2], vec![0.8]], vec![0.4, 0.4, -0.3]).unwrap();
        let weighted = TrainingSet::weighted(vec![vec![0.2], vec![0.8]], vec![0.4, -0.3], vec![2.0, 1.0]).unwrap();
        let cfg = SolverConfig::new(0.05).with_method(SolverMethod::ProximalFirstOrder);
        let a = fit(&k, &LossSpec::least_squares(), &repeated, &cfg).unwrap();
        let b = fit(&k, &LossSpec::least_squares(), &weighted, &SolverConfig::new(0.05)).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-9);
        assert!((a.f.eval(&[0.5]) - b.f.eval(&[0.5])).abs() < 1e-6);
    }
}
