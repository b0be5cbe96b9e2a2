//! Entropy estimates for the unit ball of the RKHS in `L_2(T_X)`.
//!
//! On a sample `T_X` of size `n` the unit ball is an ellipsoid with semi-axes
//! `sqrt(mu_j / n)`, `mu_j` the eigenvalues of the kernel matrix. Volumetric
//! arguments bracket its log-covering numbers, and a power law `a delta^-p`
//! is fitted to the lower bracket.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};
use crate::kernels::{kernel_matrix, Kernel};

/// Semi-axes `sqrt(mu_j / n)` in decreasing order.
pub fn ellipsoid_semi_axes(k: &DMatrix<f64>, n: usize) -> Result<Vec<f64>> {
    if k.nrows() != k.ncols() {
        return Err(Error::LengthMismatch {
            what: "kernel matrix rows and columns",
            left: k.nrows(),
            right: k.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::Config("sample size must be positive".into()));
    }
    let trace = k.trace();
    let eig = SymmetricEigen::new(k.clone());
    let mut axes = Vec::with_capacity(k.nrows());
    for &mu in eig.eigenvalues.iter() {
        if mu < -1e-8 * trace.abs().max(1.0) {
            return Err(Error::NotPositiveSemidefinite { value: mu });
        }
        axes.push((mu.max(0.0) / n as f64).sqrt());
    }
    axes.sort_by(|a, b| b.total_cmp(a));
    Ok(axes)
}

/// Lower and upper volumetric bounds on the natural log of the covering number
/// of the ellipsoid by balls of radius `delta`.
pub fn ellipsoid_log_covering(semi_axes: &[f64], delta: f64) -> Result<(f64, f64)> {
    check_param("delta", delta, delta > 0.0 && delta.is_finite(), "must be positive")?;
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut effective_dim = 0usize;
    for &s in semi_axes {
        if s > delta {
            lower += (s / delta).ln();
        }
        if s >= delta {
            effective_dim += 1;
        }
        upper += (2.0 * s / delta).ln_1p().max(0.0);
    }
    upper += effective_dim as f64 * 3f64.ln();
    Ok((lower, upper))
}

/// Sixteen log-spaced radii spanning `[0.01 s1, s1]`.
pub fn default_delta_grid(s1: f64) -> Vec<f64> {
    log_grid(0.01 * s1, s1, 16)
}

pub(crate) fn log_grid(lo: f64, hi: f64, n_points: usize) -> Vec<f64> {
    if n_points == 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n_points)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n_points - 1) as f64).exp())
        .collect()
}

/// Fitted entropy power law `log N(delta) <= a delta^-p` with the raw brackets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringEstimate {
    pub a: f64,
    pub p: f64,
    pub deltas: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Whether each radius entered the fit (lower estimate at least 1).
    pub used: Vec<bool>,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    /// Plain least-squares slope of `ln lower` against `ln delta` (diagnostic).
    pub loglog_slope: f64,
    /// Set when the entropy does not look like a power law with `p` in `(0, 2)`.
    pub out_of_model: bool,
    /// Set when the fitted constant is below the nominal range `a >= 1`.
    pub a_below_one: bool,
}

/// Smallest and largest exponent searched; the boundaries signal a poor model.
const P_SEARCH: (f64, f64) = (1e-3, 4.0);
/// Fitted exponents below this are indistinguishable from logarithmic growth.
const P_FLAT: f64 = 0.05;

/// Fits `ln lower(delta) = ln A + ln(delta^-p - s1^-p)` on the radii with
/// `lower >= 1`. The offset accounts for the entropy vanishing at `delta = s1`,
/// which biases a plain log-log regression on short grids.
pub fn fit_from_semi_axes(semi_axes: &[f64], delta_grid: Option<&[f64]>) -> Result<CoveringEstimate> {
    let s1 = semi_axes.iter().cloned().fold(0.0, f64::max);
    if s1 <= 0.0 {
        return Err(Error::DegenerateFit("all semi-axes vanish".into()));
    }
    let deltas: Vec<f64> = match delta_grid {
        Some(g) => g.to_vec(),
        None => default_delta_grid(s1),
    };
    let mut lower = Vec::with_capacity(deltas.len());
    let mut upper = Vec::with_capacity(deltas.len());
    for &d in &deltas {
        let (lo, hi) = ellipsoid_log_covering(semi_axes, d)?;
        lower.push(lo);
        upper.push(hi);
    }
    let used: Vec<bool> = deltas
        .iter()
        .zip(&lower)
        .map(|(d, l)| *l >= 1.0 && *d < s1)
        .collect();
    let pts: Vec<(f64, f64)> = deltas
        .iter()
        .zip(&lower)
        .zip(&used)
        .filter(|(_, u)| **u)
        .map(|((d, l), _)| (*d, l.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least two radii with log-covering >= 1, found {}",
            pts.len()
        )));
    }

    let profile = |p: f64| -> (f64, f64) {
        let resid: Vec<f64> = pts
            .iter()
            .map(|(d, ll)| ll - (d.powf(-p) - s1.powf(-p)).ln())
            .collect();
        let ln_a = resid.iter().sum::<f64>() / resid.len() as f64;
        let sse = resid.iter().map(|r| (r - ln_a) * (r - ln_a)).sum::<f64>();
        (ln_a, sse)
    };
    // coarse scan then golden-section refinement around the best cell
    let scan = log_grid(P_SEARCH.0, P_SEARCH.1, 200);
    let best = (0..scan.len())
        .min_by(|&i, &j| profile(scan[i]).1.total_cmp(&profile(scan[j]).1))
        .unwrap_or(0);
    let lo = scan[best.saturating_sub(1)];
    let hi = scan[(best + 1).min(scan.len() - 1)];
    let p = golden_section(|p| profile(p).1, lo, hi, 1e-10);
    let (ln_a, sse) = profile(p);
    let residual = (sse / pts.len() as f64).sqrt();

    // make a delta^-p dominate every lower estimate on the grid
    let a = deltas
        .iter()
        .zip(&lower)
        .fold(ln_a.exp(), |acc, (d, l)| acc.max(l * d.powf(p)));

    let loglog_slope = {
        let xs: Vec<f64> = pts.iter().map(|(d, _)| d.ln()).collect();
        let ys: Vec<f64> = pts.iter().map(|(_, l)| *l).collect();
        ols_slope(&xs, &ys)
    };
    let out_of_model = !(P_FLAT..2.0).contains(&p);
    Ok(CoveringEstimate {
        a,
        p,
        deltas,
        lower,
        upper,
        used,
        residual,
        loglog_slope,
        out_of_model,
        a_below_one: a < 1.0,
    })
}

fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Fits the entropy power law on one input sample.
pub fn fit_covering_exponent(
    kernel: &Kernel,
    sample_xs: &[Vec<f64>],
    delta_grid: Option<&[f64]>,
) -> Result<CoveringEstimate> {
    let k = kernel_matrix(kernel, sample_xs)?;
    let axes = ellipsoid_semi_axes(&k, sample_xs.len())?;
    fit_from_semi_axes(&axes, delta_grid)
}

/// Fits on several samples and summarizes the spread of the exponent, since the
/// supremum over all samples is not computable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringSpread {
    pub estimates: Vec<CoveringEstimate>,
    pub p_mean: f64,
    pub p_std: f64,
    /// Largest fitted constant, a conservative choice of `a`.
    pub a_max: f64,
}

pub fn fit_covering_spread(
    kernel: &Kernel,
    samples: &[Vec<Vec<f64>>],
    delta_grid: Option<&[f64]>,
) -> Result<CoveringSpread> {
    if samples.is_empty() {
        return Err(Error::Config("need at least one sample".into()));
    }
    let estimates = samples
        .iter()
        .map(|s| fit_covering_exponent(kernel, s, delta_grid))
        .collect::<Result<Vec<_>>>()?;
    let ps: Vec<f64> = estimates.iter().map(|e| e.p).collect();
    let m = ps.len() as f64;
    let p_mean = ps.iter().sum::<f64>() / m;
    let p_std = if ps.len() > 1 {
        (ps.iter().map(|p| (p - p_mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    let a_max = estimates.iter().map(|e| e.a).fold(0.0, f64::max);
    Ok(CoveringSpread {
        estimates,
        p_mean,
        p_std,
        a_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::DomainBox;

    #[test]
    fn semi_axes_examples() {
        let n = 5;
        let axes = ellipsoid_semi_axes(&DMatrix::identity(n, n), n).unwrap();
        assert!(axes.iter().all(|s| (s - (1.0 / n as f64).sqrt()).abs() < 1e-14));
        let mut d = DMatrix::zeros(n, n);
        d[(0, 0)] = 1.0;
        let axes = ellipsoid_semi_axes(&d, n).unwrap();
        assert!((axes[0] - (1.0 / 5f64).sqrt()).abs() < 1e-14);
        assert!(axes[1..].iter().all(|s| *s == 0.0));
        let ones = DMatrix::from_element(n, n, 1.0);
        let axes = ellipsoid_semi_axes(&ones, n).unwrap();
        assert!((axes[0] - 1.0).abs() < 1e-12);
        assert!(axes[1..].iter().all(|s| *s < 1e-7));
    }

    #[test]
    fn log_covering_examples() {
        let (lo, _) = ellipsoid_log_covering(&[0.1, 0.2], 0.3).unwrap();
        assert_eq!(lo, 0.0);
        let (lo, hi) = ellipsoid_log_covering(&[1.0], 0.25).unwrap();
        assert!(lo <= 4f64.ln() + 1e-12 && 4f64.ln() <= hi);
        let (lo, hi) = ellipsoid_log_covering(&[0.7, 0.7], 0.7).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi <= 4.0 * 3f64.ln() + 1e-12);
        assert!(ellipsoid_log_covering(&[1.0], 0.0).is_err());
    }

    #[test]
    fn flat_spectrum_is_out_of_model() {
        let n = 50;
        let axes = vec![(1.0 / n as f64).sqrt(); n];
        let est = fit_from_semi_axes(&axes, None).unwrap();
        assert!(est.out_of_model, "p = {}", est.p);
    }

    #[test]
    fn fitted_curve_dominates_lower_estimates() {
        let axes: Vec<f64> = (1..=300).map(|j| (j as f64).powf(-1.0 / 0.8)).collect();
        let est = fit_from_semi_axes(&axes, None).unwrap();
        for (d, l) in est.deltas.iter().zip(&est.lower) {
            assert!(est.a * d.powf(-est.p) >= *l * (1.0 - 1e-12));
        }
    }

    #[test]
    fn exponential_kernel_exponent_near_one() {
        let k = Kernel::matern(1.0, 1.0, DomainBox::unit(1)).unwrap();
        let xs: Vec<Vec<f64>> = (0..400).map(|i| vec![i as f64 / 399.0]).collect();
        let est = fit_covering_exponent(&k, &xs, None).unwrap();
        assert!((est.p - 1.0).abs() <= 0.3, "p = {}", est.p);
    }
}
