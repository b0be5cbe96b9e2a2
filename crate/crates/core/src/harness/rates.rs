//! Learning-curve experiments under the schedule `lambda = n^-kappa`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{trial_seed, DataModel};
use super::risk::{mean_and_se, Quadrature};
use super::{run_trial, TrialRecord};
use crate::bounds::{rate_exponent, RateSpec};
use crate::error::{check_param, Error, Result};
use crate::kernels::Kernel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub alpha: f64,
    pub kappa: f64,
    pub n_grid: Vec<usize>,
    pub trials_per_n: usize,
    pub seed: u64,
    /// Use `lambda = n^-kappa ln n` instead of `n^-kappa`.
    pub log_factor: bool,
    /// Covering exponent used for the predicted rate.
    pub covering_p: f64,
}

impl RateConfig {
    /// Desk-scale defaults: `n` from 100 to 3200 by doubling, 20 trials each.
    pub fn new(alpha: f64, kappa: f64, covering_p: f64) -> Self {
        Self {
            alpha,
            kappa,
            n_grid: vec![100, 200, 400, 800, 1600, 3200],
            trials_per_n: 20,
            seed: 0,
            log_factor: false,
            covering_p,
        }
    }

    pub fn lambda(&self, n: usize) -> f64 {
        let n = n as f64;
        let l = n.powf(-self.kappa);
        if self.log_factor {
            (l * n.ln()).min(1.0)
        } else {
            l
        }
    }

    fn validate(&self) -> Result<()> {
        check_param("kappa", self.kappa, self.kappa > 0.0, "must be positive")?;
        if self.n_grid.len() < 2 {
            return Err(Error::DegenerateFit(format!(
                "a slope needs at least two sample sizes, got {}",
                self.n_grid.len()
            )));
        }
        let mut sorted = self.n_grid.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.n_grid.len() {
            return Err(Error::DegenerateFit("sample sizes must be distinct".into()));
        }
        if self.n_grid.contains(&0) {
            return Err(Error::Config("sample sizes must be positive".into()));
        }
        if self.trials_per_n < 2 {
            return Err(Error::InsufficientTrials {
                required: 2,
                got: self.trials_per_n,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub alpha: f64,
    pub kappa: f64,
    pub n_grid: Vec<usize>,
    pub lambdas: Vec<f64>,
    /// Mean excess L2 risk per sample size.
    pub means: Vec<f64>,
    pub ses: Vec<f64>,
    /// Least-squares slope of `ln mean` against `ln n`.
    pub slope: f64,
    /// Standard error of the slope, propagated from the per-n standard errors.
    pub slope_se: f64,
    /// `None` where the rate formula does not apply (`alpha = 1`).
    pub predicted_rho: Option<f64>,
    /// Whether the slope lies in `[-1.5 rho, -0.5 rho]`.
    pub in_bracket: bool,
    pub records: Vec<TrialRecord>,
}

/// Runs `trials_per_n` independent trials at each sample size and fits the
/// log-log slope of the mean excess L2 risk.
pub fn rate_experiment(model: &DataModel, kernel: &Kernel, cfg: &RateConfig) -> Result<RateReport> {
    cfg.validate()?;
    let quad = Quadrature::for_box(model.domain());
    let jobs: Vec<(usize, usize)> = (0..cfg.n_grid.len())
        .flat_map(|j| (0..cfg.trials_per_n).map(move |t| (j, t)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(j, t)| {
            let n = cfg.n_grid[j];
            let seed = trial_seed(cfg.seed, (j * cfg.trials_per_n + t) as u64);
            run_trial(model, kernel, cfg.alpha, cfg.lambda(n), n, seed, &quad)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut means = Vec::with_capacity(cfg.n_grid.len());
    let mut ses = Vec::with_capacity(cfg.n_grid.len());
    for chunk in records.chunks(cfg.trials_per_n) {
        let v: Vec<f64> = chunk.iter().map(|r| r.excess_l2_risk).collect();
        let (m, s) = mean_and_se(&v);
        means.push(m);
        ses.push(s);
    }
    if means.iter().any(|m| *m <= 0.0) {
        return Err(Error::DegenerateFit("mean excess risk is zero at some n".into()));
    }
    let xs: Vec<f64> = cfg.n_grid.iter().map(|n| (*n as f64).ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let log_vars: Vec<f64> = means.iter().zip(&ses).map(|(m, s)| (s / m).powi(2)).collect();
    let (slope, slope_se) = weighted_slope(&xs, &ys, &log_vars);

    let predicted_rho = if cfg.alpha > 1.0 {
        Some(rate_exponent(&RateSpec {
            kappa: cfg.kappa,
            p: cfg.covering_p,
            alpha: cfg.alpha,
        })?)
    } else {
        None
    };
    let in_bracket = predicted_rho
        .filter(|r| r.is_finite() && *r > 0.0)
        .is_some_and(|r| slope >= -1.5 * r && slope <= -0.5 * r);

    Ok(RateReport {
        alpha: cfg.alpha,
        kappa: cfg.kappa,
        lambdas: cfg.n_grid.iter().map(|n| cfg.lambda(*n)).collect(),
        n_grid: cfg.n_grid.clone(),
        means,
        ses,
        slope,
        slope_se,
        predicted_rho,
        in_bracket,
        records,
    })
}

/// Ordinary least-squares slope, with its standard error from independent
/// per-point variances.
fn weighted_slope(xs: &[f64], ys: &[f64], vars: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().zip(vars).map(|(x, v)| (x - mx).powi(2) * v).sum::<f64>() / (sxx * sxx);
    (sxy / sxx, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::data::NoiseModel;
    use crate::kernels::DomainBox;

    #[test]
    fn slope_of_exact_power_law() {
        let xs: Vec<f64> = [100.0f64, 200.0, 400.0].iter().map(|n| n.ln()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.7 * x).collect();
        let (s, se) = weighted_slope(&xs, &ys, &[0.0; 3]);
        assert!((s + 0.7).abs() < 1e-12);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn single_sample_size_is_rejected() {
        let k = Kernel::matern(1.0, 0.5, DomainBox::unit(1)).unwrap();
        let model = DataModel::new(DataModel::standard_fstar(&k, 0.45).unwrap(), NoiseModel::Uniform { b: 0.5 }).unwrap();
        let mut cfg = RateConfig::new(2.0, 0.5, 1.0);
        cfg.n_grid = vec![100];
        assert!(matches!(rate_experiment(&model, &k, &cfg), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn small_experiment_is_deterministic_and_decreasing() {
        let k = Kernel::matern(1.0, 0.5, DomainBox::unit(1)).unwrap();
        let model = DataModel::new(DataModel::standard_fstar(&k, 0.45).unwrap(), NoiseModel::Uniform { b: 0.5 }).unwrap();
        let mut cfg = RateConfig::new(2.0, 0.5, 1.0);
        cfg.n_grid = vec![50, 400];
        cfg.trials_per_n = 4;
        let a = rate_experiment(&model, &k, &cfg).unwrap();
        let b = rate_experiment(&model, &k, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.slope < 0.0, "{}", a.slope);
    }
}
