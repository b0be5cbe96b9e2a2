//! Monte-Carlo and exact checks of the variance bound, the calibration
//! inequality, the sup/norm bounds on the excess regularized cost and the
//! oracle inequality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{trial_seed, DataModel};
use super::risk::{excess_l2_risk_with, mean_and_se, Quadrature};
use super::run_trial;
use crate::bounds::{
    approx_error_bound, excess_cost_norm_bound, excess_cost_sup_bound, power_loss_variance_constant, oracle_epsilon,
    BoundInputs,
};
use crate::error::{check_param, Error, Result};
use crate::kernels::{Kernel, KernelExpansion};
use crate::losses::{calibration_inequality_factor, minimal_inner_risk, power_abs, FiniteDistribution, LossSpec};
use crate::solver::{fit, SolverConfig, TrainingSet};

/// Random expansion with `centers` uniform centers, rescaled to RKHS norm `norm`.
pub fn random_expansion<R: Rng + ?Sized>(kernel: &Kernel, rng: &mut R, centers: usize, norm: f64) -> Result<KernelExpansion> {
    let dom = kernel.domain();
    let pts: Vec<Vec<f64>> = (0..centers)
        .map(|_| {
            dom.lower()
                .iter()
                .zip(dom.upper())
                .map(|(lo, hi)| rng.random_range(*lo..=*hi))
                .collect()
        })
        .collect();
    let coeffs: Vec<f64> = (0..centers).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let raw = KernelExpansion::new(kernel.clone(), pts, coeffs)?;
    let r = raw.rkhs_norm()?;
    if r == 0.0 {
        return Ok(raw);
    }
    Ok(raw.scaled(norm / r))
}

/// Candidate predictors for the checks: `f*` itself, then random expansions
/// with RKHS norm uniform in `[0, norm_budget]`.
fn candidates(model: &DataModel, count: usize, norm_budget: f64, seed: u64) -> Result<Vec<KernelExpansion>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    if count > 0 {
        out.push(model.fstar().clone());
    }
    while out.len() < count {
        let norm = rng.random_range(0.0..=norm_budget);
        out.push(random_expansion(model.kernel(), &mut rng, 5, norm)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub sup_norm_bound: f64,
    pub constant: f64,
    pub mean_g2: f64,
    pub mean_g: f64,
    /// Mean and standard error of `g^2 - constant * g`.
    pub slack_mean: f64,
    pub slack_se: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub alpha: f64,
    pub rows: Vec<VarianceRow>,
    pub passed: bool,
}

/// Checks `E g_f^2 <= 8 alpha / (alpha - 1) (|f|_H + 2)^alpha E g_f` with
/// `g_f = |f(x) - y|^alpha - |f*(x) - y|^alpha` for `num_f` predictors (the
/// first is `f*`), using `samples` paired draws each.
pub fn variance_bound_check(
    model: &DataModel,
    alpha: f64,
    num_f: usize,
    samples: usize,
    norm_budget: f64,
    seed: u64,
) -> Result<VarianceReport> {
    power_loss_variance_constant(alpha, 0.0)?;
    require_symmetric(model)?;
    check_samples(samples)?;
    let fs = candidates(model, num_f, norm_budget, seed)?;
    let rows = fs
        .par_iter()
        .enumerate()
        .map(|(i, f)| -> Result<VarianceRow> {
            let sup = f.sup_norm_bound()?;
            let constant = power_loss_variance_constant(alpha, sup)?;
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, 1 + i as u64));
            let xs = model.sample_inputs(&mut rng, samples);
            let fx = f.eval_many(&xs);
            let gx = model.fstar().eval_many(&xs);
            let mut g = Vec::with_capacity(samples);
            for (a, b) in fx.iter().zip(&gx) {
                let xi = model.noise().sample(&mut rng);
                g.push(power_abs(xi - (a - b), alpha) - power_abs(xi, alpha));
            }
            let g2: Vec<f64> = g.iter().map(|v| v * v).collect();
            let slack: Vec<f64> = g.iter().map(|v| v * v - constant * v).collect();
            let (slack_mean, slack_se) = mean_and_se(&slack);
            Ok(VarianceRow {
                sup_norm_bound: sup,
                constant,
                mean_g2: mean_and_se(&g2).0,
                mean_g: mean_and_se(&g).0,
                slack_mean,
                slack_se,
                holds: slack_mean <= 3.0 * slack_se + 1e-15,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| r.holds);
    Ok(VarianceReport { alpha, rows, passed })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub sup_norm_bound: f64,
    pub factor: f64,
    pub excess_l2: f64,
    pub excess_lalpha: f64,
    pub excess_lalpha_se: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub alpha: f64,
    pub rows: Vec<CalibrationRow>,
    pub passed: bool,
}

/// Checks excess L2 risk `<= factor(alpha, |f|_H) * excess L_alpha risk` within
/// three standard errors of the Monte-Carlo `L_alpha` estimate; at `alpha = 2`
/// both sides must agree within three standard errors.
pub fn calibration_check(
    model: &DataModel,
    alpha: f64,
    num_f: usize,
    samples: usize,
    norm_budget: f64,
    seed: u64,
) -> Result<CalibrationReport> {
    calibration_inequality_factor(alpha, 0.0)?;
    require_symmetric(model)?;
    check_samples(samples)?;
    let fs = candidates(model, num_f, norm_budget, seed)?;
    let quad = Quadrature::for_box(model.domain());
    let rows = fs
        .par_iter()
        .enumerate()
        .map(|(i, f)| -> Result<CalibrationRow> {
            let sup = f.sup_norm_bound()?;
            let factor = calibration_inequality_factor(alpha, sup)?.factor;
            let excess_l2 = excess_l2_risk_with(model, f, &quad);
            let (est, se) =
                super::risk::excess_lalpha_risk(model, f, alpha, samples, trial_seed(seed, 1 + i as u64))?;
            let holds = if alpha == 2.0 {
                (excess_l2 - est).abs() <= 3.0 * se + 1e-12
            } else {
                excess_l2 <= factor * (est + 3.0 * se) + 1e-12
            };
            Ok(CalibrationRow {
                sup_norm_bound: sup,
                factor,
                excess_l2,
                excess_lalpha: est,
                excess_lalpha_se: se,
                holds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| r.holds);
    Ok(CalibrationReport { alpha, rows, passed })
}

fn require_symmetric(model: &DataModel) -> Result<()> {
    if model.noise().is_symmetric() {
        Ok(())
    } else {
        Err(Error::Unsupported("check requires symmetric noise".into()))
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::Config("need at least two Monte-Carlo samples".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcessCostRow {
    pub lambda: f64,
    pub approx_error: f64,
    pub excess: f64,
    pub sup_g: f64,
    pub sup_bound: f64,
    pub norm: f64,
    pub norm_bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcessCostReport {
    pub alpha: f64,
    pub rows: Vec<ExcessCostRow>,
    /// Draws discarded because the computed `E_P g` came out negative.
    pub skipped: usize,
    pub passed: bool,
}

/// Checks the sup-norm and RKHS-norm bounds on `g = C_lambda(f) - C_lambda(f_{P,lambda})`,
/// with `C_lambda(x, y, f) = lambda |f|^2 + L(y, f(x))`, on `triples` random
/// finite distributions `P`, regularization parameters and predictors
/// `|f|_H <= lambda^-1/2`. Everything is exact except the solver tolerance.
pub fn excess_cost_check(kernel: &Kernel, alpha: f64, triples: usize, seed: u64) -> Result<ExcessCostReport> {
    let loss = LossSpec::power(alpha)?;
    let results: Vec<Option<ExcessCostRow>> = (0..triples * 3)
        .into_par_iter()
        .map(|i| excess_cost_trial(kernel, &loss, alpha, trial_seed(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(triples);
    let mut skipped = 0;
    for r in results {
        if rows.len() == triples {
            break;
        }
        match r {
            Some(row) => rows.push(row),
            None => skipped += 1,
        }
    }
    if rows.len() < triples {
        return Err(Error::InsufficientTrials {
            required: triples,
            got: rows.len(),
        });
    }
    let passed = rows.iter().all(|r| r.holds);
    Ok(ExcessCostReport {
        alpha,
        rows,
        skipped,
        passed,
    })
}

fn excess_cost_trial(kernel: &Kernel, loss: &LossSpec, alpha: f64, seed: u64) -> Result<Option<ExcessCostRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = kernel.domain();
    let n_inputs = rng.random_range(2..=5usize);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    let mut conditionals = Vec::new();
    for _ in 0..n_inputs {
        let x: Vec<f64> = dom
            .lower()
            .iter()
            .zip(dom.upper())
            .map(|(lo, hi)| rng.random_range(*lo..=*hi))
            .collect();
        let px = rng.random_range(0.1..=1.0);
        let atoms = rng.random_range(1..=3usize);
        let ay: Vec<f64> = (0..atoms).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let aw: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.1..=1.0)).collect();
        let total: f64 = aw.iter().sum();
        for (y, w) in ay.iter().zip(&aw) {
            xs.push(x.clone());
            ys.push(*y);
            ws.push(px * w / total);
        }
        conditionals.push((px, FiniteDistribution::new(ay, aw)?));
    }
    let mass: f64 = conditionals.iter().map(|(p, _)| p).sum();
    let bayes_risk: f64 = conditionals
        .iter()
        .map(|(p, q)| p / mass * minimal_inner_risk(loss, q).1)
        .sum();

    let lambda = 10f64.powf(rng.random_range(-2.0..=0.0));
    let dist = TrainingSet::weighted(xs.clone(), ys.clone(), ws)?;
    let mut cfg = SolverConfig::new(lambda);
    cfg.objective_tolerance = 1e-13;
    cfg.max_iters = 200_000;
    let fp = fit(kernel, loss, &dist, &cfg)?.f;

    let cost = |f: &KernelExpansion| -> Result<(f64, f64)> {
        let norm = f.rkhs_norm()?;
        let vals = f.eval_many(dist.xs());
        let risk: f64 = dist
            .weights()
            .iter()
            .zip(dist.ys())
            .zip(&vals)
            .map(|((w, y), t)| w * loss.value(*y, *t))
            .sum();
        Ok((norm, lambda * norm * norm + risk))
    };
    let (fp_norm, fp_cost) = cost(&fp)?;
    let approx_error = (fp_cost - bayes_risk).max(0.0);

    // a predictor in the ball of radius lambda^-1/2 around the origin
    let radius = lambda.powf(-0.5);
    let direction = random_expansion(kernel, &mut rng, 4, 1.0)?;
    let step = rng.random_range(0.0..=2.0 * radius);
    let mut f = fp.add(&direction.scaled(step))?;
    let norm = f.rkhs_norm()?;
    if norm > radius {
        f = f.scaled(radius * rng.random_range(0.0..=1.0) / norm);
    }
    let (f_norm, f_cost) = cost(&f)?;
    let excess = f_cost - fp_cost;
    if excess < 0.0 {
        return Ok(None);
    }

    let mut grid_x = dom.grid(201);
    grid_x.extend(xs.iter().cloned());
    let f_vals = f.eval_many(&grid_x);
    let p_vals = fp.eval_many(&grid_x);
    let mut grid_y: Vec<f64> = (0..=40).map(|j| -1.0 + 0.05 * j as f64).collect();
    grid_y.extend(ys.iter().cloned());
    let offset = lambda * (f_norm * f_norm - fp_norm * fp_norm);
    let mut sup_g: f64 = 0.0;
    for (a, b) in f_vals.iter().zip(&p_vals) {
        for y in &grid_y {
            let g = offset + loss.value(*y, *a) - loss.value(*y, *b);
            sup_g = sup_g.max(g.abs());
        }
    }
    let sup_bound = excess_cost_sup_bound(alpha, lambda, approx_error, excess)?;
    let norm_bound = excess_cost_norm_bound(lambda, approx_error, excess)?;
    let holds = sup_g <= sup_bound + 1e-6 && f_norm <= norm_bound + 1e-6;
    Ok(Some(ExcessCostRow {
        lambda,
        approx_error,
        excess,
        sup_g,
        sup_bound,
        norm: f_norm,
        norm_bound,
        holds,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub alpha: f64,
    pub lambda: f64,
    pub n: usize,
    /// Confidence parameter; the event should hold with probability `1 - e^-x`.
    pub x: f64,
    /// Fresh trials used for the frequency estimate (at least 50).
    pub trials: usize,
    /// Trials used only to calibrate the constant `K`.
    pub calibration_trials: usize,
    pub seed: u64,
    /// Covering constants `(a, p)` fed to the threshold.
    pub covering_a: f64,
    pub covering_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub alpha: f64,
    pub x: f64,
    pub k: f64,
    pub epsilon: f64,
    pub approx_error: f64,
    /// Empirical `1 - e^-x` quantile of `excess - a(lambda)` on the calibration split.
    pub calibration_quantile: f64,
    pub target_probability: f64,
    /// Pass threshold: target minus two binomial standard errors.
    pub threshold: f64,
    pub frequency: f64,
    pub fresh_trials: usize,
    pub passed: bool,
}

/// Calibrates `K` on one batch of trials and reports how often the oracle
/// event `excess < a(lambda) + eps(K)` occurs on a fresh batch.
pub fn oracle_probability_check(model: &DataModel, kernel: &Kernel, cfg: &OracleConfig) -> Result<OracleReport> {
    if cfg.trials < 50 {
        return Err(Error::InsufficientTrials {
            required: 50,
            got: cfg.trials,
        });
    }
    if cfg.calibration_trials == 0 {
        return Err(Error::Config("calibration split must be nonempty".into()));
    }
    check_param("x", cfg.x, cfg.x >= 1.0, "must be at least 1")?;
    require_symmetric(model)?;
    let approx_error = approx_error_bound(cfg.lambda, model.fstar_norm())?;
    let inputs = |k: f64| BoundInputs {
        a: cfg.covering_a,
        p: cfg.covering_p,
        alpha: cfg.alpha,
        v: cfg.alpha,
        theta: 1.0,
        c: 1.0,
        k,
        lambda: cfg.lambda,
        n: cfg.n as f64,
        x: cfg.x,
        approx_error,
    };
    inputs(1.0).validate()?;

    let quad = Quadrature::for_box(model.domain());
    let total = cfg.calibration_trials + cfg.trials;
    let excess: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let rec = run_trial(model, kernel, cfg.alpha, cfg.lambda, cfg.n, trial_seed(cfg.seed, i as u64), &quad)?;
            rec.excess_lalpha_risk
                .ok_or_else(|| Error::Unsupported("oracle check requires symmetric noise".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (calibration, fresh) = excess.split_at(cfg.calibration_trials);

    let target = 1.0 - (-cfg.x).exp();
    let mut shifted: Vec<f64> = calibration.iter().map(|e| e - approx_error).collect();
    shifted.sort_by(|a, b| a.total_cmp(b));
    let idx = ((target * shifted.len() as f64).ceil() as usize).clamp(1, shifted.len()) - 1;
    let quantile = shifted[idx];

    let eps = |k: f64| oracle_epsilon(&inputs(k));
    let k = if eps(1.0)? > quantile {
        1.0
    } else {
        let mut hi = 2.0;
        while eps(hi)? <= quantile {
            hi *= 2.0;
            if hi > 1e15 {
                return Err(Error::DegenerateFit("no K makes the threshold exceed the quantile".into()));
            }
        }
        let mut lo = hi / 2.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if eps(mid)? > quantile {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let epsilon = eps(k)?;
    let hits = fresh.iter().filter(|e| **e < approx_error + epsilon).count();
    let frequency = hits as f64 / fresh.len() as f64;
    let threshold = target - 2.0 * (target * (1.0 - target) / fresh.len() as f64).sqrt();
    Ok(OracleReport {
        alpha: cfg.alpha,
        x: cfg.x,
        k,
        epsilon,
        approx_error,
        calibration_quantile: quantile,
        target_probability: target,
        threshold,
        frequency,
        fresh_trials: fresh.len(),
        passed: frequency >= threshold,
    })
}
