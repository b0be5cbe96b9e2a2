//! Exploratory comparison of loss exponents under outlier contamination.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{trial_seed, DataModel, NoiseModel};
use super::risk::{mean_and_se, Quadrature};
use super::run_trial;
use crate::error::{Error, Result};
use crate::kernels::Kernel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessConfig {
    /// Outlier fractions.
    pub etas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub n: usize,
    pub lambda: f64,
    pub trials: usize,
    pub seed: u64,
    pub outlier_magnitude: f64,
    /// One-sided outliers break the symmetry assumption on purpose.
    pub symmetric: bool,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        Self {
            etas: vec![0.0, 0.05, 0.1, 0.2, 0.3],
            alphas: vec![1.1, 1.5, 2.0],
            n: 400,
            lambda: 1e-3,
            trials: 20,
            seed: 0,
            outlier_magnitude: 0.55,
            symmetric: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCell {
    pub eta: f64,
    pub alpha: f64,
    pub mean_excess_l2: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessTable {
    pub cells: Vec<RobustnessCell>,
    /// Whether `alpha = 1.1` has lower mean excess L2 risk than `alpha = 2` at
    /// the largest contamination; `None` if either exponent is missing.
    pub alpha_near_one_wins_at_max_eta: Option<bool>,
}

impl RobustnessTable {
    pub fn cell(&self, eta: f64, alpha: f64) -> Option<&RobustnessCell> {
        self.cells.iter().find(|c| c.eta == eta && c.alpha == alpha)
    }
}

/// Mean excess L2 risk for every (contamination, exponent) pair. The base
/// noise of `model` is contaminated with outliers at `+-outlier_magnitude`.
/// Trials share seeds across cells so that differences are paired.
pub fn robustness_study(model: &DataModel, kernel: &Kernel, cfg: &RobustnessConfig) -> Result<RobustnessTable> {
    if cfg.etas.is_empty() || cfg.alphas.is_empty() {
        return Err(Error::Config("contamination and exponent grids must be nonempty".into()));
    }
    if cfg.trials < 2 {
        return Err(Error::InsufficientTrials {
            required: 2,
            got: cfg.trials,
        });
    }
    let base = model.noise().clone();
    let models = cfg
        .etas
        .iter()
        .map(|&eta| {
            model.with_noise(NoiseModel::Contaminated {
                base: Box::new(base.clone()),
                fraction: eta,
                magnitude: cfg.outlier_magnitude,
                symmetric: cfg.symmetric,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let quad = Quadrature::for_box(model.domain());
    let jobs: Vec<(usize, usize, usize)> = (0..cfg.etas.len())
        .flat_map(|e| (0..cfg.alphas.len()).flat_map(move |a| (0..cfg.trials).map(move |t| (e, a, t))))
        .collect();
    let risks = jobs
        .par_iter()
        .map(|&(e, a, t)| {
            run_trial(&models[e], kernel, cfg.alphas[a], cfg.lambda, cfg.n, trial_seed(cfg.seed, t as u64), &quad)
                .map(|r| r.excess_l2_risk)
        })
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<RobustnessCell> = risks
        .chunks(cfg.trials)
        .enumerate()
        .map(|(i, chunk)| {
            let (mean, se) = mean_and_se(chunk);
            RobustnessCell {
                eta: cfg.etas[i / cfg.alphas.len()],
                alpha: cfg.alphas[i % cfg.alphas.len()],
                mean_excess_l2: mean,
                se,
            }
        })
        .collect();
    let max_eta = cfg.etas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut table = RobustnessTable {
        cells,
        alpha_near_one_wins_at_max_eta: None,
    };
    if let (Some(a), Some(b)) = (table.cell(max_eta, 1.1), table.cell(max_eta, 2.0)) {
        table.alpha_near_one_wins_at_max_eta = Some(a.mean_excess_l2 < b.mean_excess_l2);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::DomainBox;

    fn setup() -> (Kernel, DataModel) {
        let k = Kernel::matern(1.0, 0.5, DomainBox::unit(1)).unwrap();
        let m = DataModel::new(DataModel::standard_fstar(&k, 0.45).unwrap(), NoiseModel::Uniform { b: 0.3 }).unwrap();
        (k, m)
    }

    #[test]
    fn empty_grid_is_a_config_error() {
        let (k, m) = setup();
        let cfg = RobustnessConfig {
            etas: vec![],
            ..Default::default()
        };
        assert!(matches!(robustness_study(&m, &k, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn least_squares_competitive_without_outliers_and_deterministic() {
        let (k, m) = setup();
        let cfg = RobustnessConfig {
            etas: vec![0.0, 0.3],
            alphas: vec![1.1, 2.0],
            n: 200,
            lambda: 0.01,
            trials: 8,
            ..Default::default()
        };
        let t = robustness_study(&m, &k, &cfg).unwrap();
        assert_eq!(t, robustness_study(&m, &k, &cfg).unwrap());
        let l1 = t.cell(0.0, 1.1).unwrap();
        let l2 = t.cell(0.0, 2.0).unwrap();
        assert!(l2.mean_excess_l2 <= l1.mean_excess_l2 + 2.0 * (l1.se + l2.se), "{l1:?} {l2:?}");
        assert!(t.alpha_near_one_wins_at_max_eta.is_some());
    }
}
