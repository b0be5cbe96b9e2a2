//! Experiment settings: defaults, overridden by a TOML file, overridden by flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use regrisk::harness::{DataModel, NoiseModel};
use regrisk::{DomainBox, Kernel};

use crate::CliResult;

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Kernel family: gaussian, matern or linear
    #[arg(long)]
    pub kernel: Option<String>,
    /// Sobolev order of the Matern kernel
    #[arg(long)]
    pub sobolev_order: Option<f64>,
    #[arg(long)]
    pub length_scale: Option<f64>,
    /// Gaussian kernel width
    #[arg(long)]
    pub width: Option<f64>,
    /// Input dimension; the domain is the unit cube
    #[arg(long)]
    pub dim: Option<usize>,
    /// RKHS norm of the synthetic regression function
    #[arg(long)]
    pub fstar_norm: Option<f64>,
    /// Noise family: uniform or truncated_gaussian
    #[arg(long)]
    pub noise: Option<String>,
    /// Noise support half-width
    #[arg(long)]
    pub noise_b: Option<f64>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub calibration_trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Confidence parameter of the oracle check
    #[arg(long)]
    pub x: Option<f64>,
    /// Use lambda = n^-kappa ln n
    #[arg(long)]
    pub log_factor: Option<bool>,
    /// Number of random predictors in the variance and calibration checks
    #[arg(long)]
    pub num_f: Option<usize>,
    /// Monte-Carlo samples per predictor
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub etas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long)]
    pub outlier_magnitude: Option<f64>,
    /// Draw outliers with random sign (false: always positive)
    #[arg(long)]
    pub symmetric: Option<bool>,
    /// Experiment file with `key = value` records
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// CSV destination; standard output if absent
    #[arg(long)]
    pub output: Option<PathBuf>,
}

macro_rules! overlay {
    ($top:expr, $bottom:expr, $($field:ident),*) => {
        Settings { $($field: $top.$field.or($bottom.$field),)* }
    };
}

impl Settings {
    /// Flags win over the file named by `--config`, if any.
    pub fn resolve(self) -> CliResult<Self> {
        let file = match &self.config {
            Some(path) => Self::load(path)?,
            None => Settings::default(),
        };
        Ok(overlay!(
            self, file, kernel, sobolev_order, length_scale, width, dim, fstar_norm, noise, noise_b, noise_sigma,
            alpha, kappa, lambda, n, n_grid, trials, calibration_trials, seed, x, log_factor, num_f, samples, etas,
            alphas, outlier_magnitude, symmetric, config, output
        ))
    }

    fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
        Ok(toml::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))?)
    }

    pub fn kernel(&self) -> CliResult<Kernel> {
        let dom = DomainBox::unit(self.dim.unwrap_or(1));
        let k = match self.kernel.as_deref().unwrap_or("matern") {
            "gaussian" => Kernel::gaussian(self.width.unwrap_or(0.3), dom)?,
            "matern" => Kernel::matern(
                self.sobolev_order.unwrap_or(0.5 + dom.dim() as f64 / 2.0),
                self.length_scale.unwrap_or(0.5),
                dom,
            )?,
            "linear" => Kernel::linear(dom)?,
            other => return Err(format!("unknown kernel family {other:?}").into()),
        };
        Ok(k)
    }

    pub fn noise_model(&self) -> CliResult<NoiseModel> {
        let b = self.noise_b.unwrap_or(0.5);
        Ok(match self.noise.as_deref().unwrap_or("uniform") {
            "uniform" => NoiseModel::Uniform { b },
            "truncated_gaussian" => NoiseModel::TruncatedGaussian {
                sigma: self.noise_sigma.unwrap_or(0.25),
                b,
            },
            other => return Err(format!("unknown noise family {other:?}").into()),
        })
    }

    pub fn model(&self, kernel: &Kernel) -> CliResult<DataModel> {
        let fstar = DataModel::standard_fstar(kernel, self.fstar_norm.unwrap_or(0.45))?;
        Ok(DataModel::new(fstar, self.noise_model()?)?)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(2.0)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: Settings = toml::from_str("alpha = 1.5\nseed = 3\nn_grid = [10, 20]").unwrap();
        let flags = Settings {
            alpha: Some(1.2),
            ..Default::default()
        };
        let merged = overlay!(
            flags, file, kernel, sobolev_order, length_scale, width, dim, fstar_norm, noise, noise_b, noise_sigma,
            alpha, kappa, lambda, n, n_grid, trials, calibration_trials, seed, x, log_factor, num_f, samples, etas,
            alphas, outlier_magnitude, symmetric, config, output
        );
        assert_eq!(merged.alpha, Some(1.2));
        assert_eq!(merged.seed, Some(3));
        assert_eq!(merged.n_grid, Some(vec![10, 20]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Settings>("alpah = 1.5").is_err());
    }

    #[test]
    fn defaults_build_a_valid_model() {
        let s = Settings::default();
        let k = s.kernel().unwrap();
        assert!(s.model(&k).is_ok());
    }
}
