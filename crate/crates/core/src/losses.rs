//! Power losses `|y - t|^alpha`, the hinge loss, and the calibration chain
//! relating excess `L_alpha` risk to excess least-squares risk.

use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};

/// Loss family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    /// `|y - t|^alpha` with `alpha` in `[1, 2]`.
    Power { alpha: f64 },
    /// `max(0, 1 - y t)`.
    Hinge,
}

impl LossSpec {
    pub fn power(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(LossSpec::Power { alpha })
    }

    pub fn least_squares() -> Self {
        LossSpec::Power { alpha: 2.0 }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            LossSpec::Power { alpha } => Some(*alpha),
            LossSpec::Hinge => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LossSpec::Power { alpha } => check_alpha(*alpha),
            LossSpec::Hinge => Ok(()),
        }
    }

    pub fn value(&self, y: f64, t: f64) -> f64 {
        match self {
            LossSpec::Power { alpha } => power_abs(y - t, *alpha),
            LossSpec::Hinge => (1.0 - y * t).max(0.0),
        }
    }

    /// An element of the subdifferential of `t -> L(y, t)`; 0 at kinks.
    pub fn subgradient(&self, y: f64, t: f64) -> f64 {
        match self {
            LossSpec::Power { alpha } => {
                let r = t - y;
                if r == 0.0 {
                    0.0
                } else if *alpha == 2.0 {
                    2.0 * r
                } else if *alpha == 1.0 {
                    r.signum()
                } else {
                    alpha * r.signum() * r.abs().powf(alpha - 1.0)
                }
            }
            LossSpec::Hinge => {
                if y * t < 1.0 {
                    -y
                } else {
                    0.0
                }
            }
        }
    }

    /// Lipschitz constant on `t in [-b, b]` for labels in `[-1, 1]`.
    pub fn lipschitz_constant(&self, b: f64) -> Result<f64> {
        check_param("B", b, b >= 0.0, "must be nonnegative")?;
        Ok(match self {
            LossSpec::Power { alpha } => alpha * (b + 1.0).powf(alpha - 1.0),
            LossSpec::Hinge => 1.0,
        })
    }

    /// Constant `c_L` of the growth condition `L(y, t) <= 1 + c_L |t|^alpha`-style
    /// bounds, realized as `alpha 2^(alpha - 1)`.
    pub fn growth_constant(&self) -> f64 {
        match self {
            LossSpec::Power { alpha } => alpha * 2f64.powf(alpha - 1.0),
            LossSpec::Hinge => 1.0,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    check_param("alpha", alpha, (1.0..=2.0).contains(&alpha), "must lie in [1, 2]")
}

fn check_strict_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha > 2.0 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must lie in (1, 2]",
        });
    }
    if alpha <= 1.0 {
        return Err(Error::NotStrictlyConvex { alpha });
    }
    Ok(())
}

pub(crate) fn power_abs(r: f64, alpha: f64) -> f64 {
    let a = r.abs();
    if alpha == 2.0 {
        a * a
    } else if alpha == 1.0 {
        a
    } else {
        a.powf(alpha)
    }
}

pub fn loss_value(loss: &LossSpec, y: f64, t: f64) -> f64 {
    loss.value(y, t)
}

pub fn loss_subgradient(loss: &LossSpec, y: f64, t: f64) -> f64 {
    loss.subgradient(y, t)
}

pub fn lipschitz_constant(loss: &LossSpec, b: f64) -> Result<f64> {
    loss.lipschitz_constant(b)
}

/// Lower bound `alpha (alpha - 1) / 8 * B^(alpha - 2) * eps^2` on the modulus of
/// convexity of `|.|^alpha` restricted to `[-B, B]`.
pub fn modulus_of_convexity_bound(alpha: f64, b: f64, eps: f64) -> Result<f64> {
    check_strict_alpha(alpha)?;
    check_param("B", b, b > 0.0, "must be positive")?;
    check_param("eps", eps, eps >= 0.0, "must be nonnegative")?;
    Ok(alpha * (alpha - 1.0) / 8.0 * b.powf(alpha - 2.0) * eps * eps)
}

/// Finite distribution on the label space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteDistribution {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl FiniteDistribution {
    /// Weights must be nonnegative with positive total; they are normalized.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::LengthMismatch {
                what: "atoms and weights",
                left: atoms.len(),
                right: weights.len(),
            });
        }
        if atoms.is_empty() {
            return Err(Error::Config("distribution needs at least one atom".into()));
        }
        for w in &weights {
            check_param("weight", *w, *w >= 0.0 && w.is_finite(), "must be nonnegative")?;
        }
        for a in &atoms {
            check_param("atom", *a, a.is_finite(), "must be finite")?;
        }
        let total: f64 = weights.iter().sum();
        check_param("total weight", total, total > 0.0, "must be positive")?;
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { atoms, weights })
    }

    pub fn dirac(y: f64) -> Self {
        Self {
            atoms: vec![y],
            weights: vec![1.0],
        }
    }

    pub fn uniform(atoms: Vec<f64>) -> Result<Self> {
        let w = vec![1.0; atoms.len()];
        Self::new(atoms, w)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }
}

/// `C_{L,Q}(t) = sum_y Q(y) L(y, t)`.
pub fn inner_risk(loss: &LossSpec, q: &FiniteDistribution, t: f64) -> f64 {
    q.atoms
        .iter()
        .zip(&q.weights)
        .map(|(y, w)| w * loss.value(*y, t))
        .sum()
}

/// Minimizer and minimum of the inner risk over `t in [-1, 1]`.
///
/// The inner risk is convex, so its subgradient sum is nondecreasing and a
/// bisection on its sign brackets the minimizer to `1e-10` (a comparison-based
/// search on values would stall near `sqrt(machine epsilon)`).
pub fn minimal_inner_risk(loss: &LossSpec, q: &FiniteDistribution) -> (f64, f64) {
    let slope = |t: f64| -> f64 {
        q.atoms
            .iter()
            .zip(&q.weights)
            .map(|(y, w)| w * loss.subgradient(*y, t))
            .sum()
    };
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let t = if slope(lo) >= 0.0 {
        lo
    } else if slope(hi) <= 0.0 {
        hi
    } else {
        loop {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-10 {
                break mid;
            }
            let s = slope(mid);
            if s > 0.0 {
                hi = mid;
            } else if s < 0.0 {
                lo = mid;
            } else {
                break mid;
            }
        }
    };
    (t, inner_risk(loss, q, t))
}

/// Template loss `|E Q - t|`.
pub fn mean_template_inner_risk(q: &FiniteDistribution, t: f64) -> f64 {
    (q.mean() - t).abs()
}

/// `phi(eps) = alpha (alpha - 1) / 2 * (2 + sqrt(eps))^(alpha - 2) * eps`, the
/// lower bound on the calibration function of `L_alpha` against least squares.
pub fn calibration_delta_max(alpha: f64, eps: f64) -> Result<f64> {
    check_strict_alpha(alpha)?;
    check_param("eps", eps, eps >= 0.0, "must be nonnegative")?;
    Ok(alpha * (alpha - 1.0) / 2.0 * (2.0 + eps.sqrt()).powf(alpha - 2.0) * eps)
}

/// Multiplier turning excess `L_alpha` risk into a bound on excess least-squares risk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFactor {
    pub alpha: f64,
    pub sup_norm_bound_of_f: f64,
    pub factor: f64,
}

/// `2 / (alpha (alpha - 1)) * (3 + sup_norm_f)^(2 - alpha)`.
pub fn calibration_inequality_factor(alpha: f64, sup_norm_f: f64) -> Result<CalibrationFactor> {
    check_strict_alpha(alpha)?;
    check_param("sup_norm_f", sup_norm_f, sup_norm_f >= 0.0, "must be nonnegative")?;
    let factor = 2.0 / (alpha * (alpha - 1.0)) * (3.0 + sup_norm_f).powf(2.0 - alpha);
    Ok(CalibrationFactor {
        alpha,
        sup_norm_bound_of_f: sup_norm_f,
        factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm1() -> FiniteDistribution {
        FiniteDistribution::uniform(vec![-1.0, 1.0]).unwrap()
    }

    #[test]
    fn values() {
        assert_eq!(LossSpec::power(1.5).unwrap().value(0.5, -0.5), 1.0);
        assert_eq!(LossSpec::least_squares().value(1.0, 0.5), 0.25);
        assert_eq!(LossSpec::Hinge.value(1.0, 2.0), 0.0);
        assert!(LossSpec::power(2.5).is_err());
    }

    #[test]
    fn subgradients() {
        assert_eq!(LossSpec::least_squares().subgradient(0.0, 1.0), 2.0);
        assert_eq!(LossSpec::power(1.0).unwrap().subgradient(0.0, 0.0), 0.0);
        assert!((LossSpec::power(1.5).unwrap().subgradient(0.0, 4.0) - 3.0).abs() < 1e-15);
        assert_eq!(LossSpec::Hinge.subgradient(1.0, 1.0), 0.0);
        assert_eq!(LossSpec::Hinge.subgradient(1.0, 0.0), -1.0);
    }

    #[test]
    fn lipschitz() {
        assert_eq!(LossSpec::least_squares().lipschitz_constant(0.0).unwrap(), 2.0);
        assert_eq!(LossSpec::power(1.0).unwrap().lipschitz_constant(7.0).unwrap(), 1.0);
        assert!((LossSpec::power(1.5).unwrap().lipschitz_constant(3.0).unwrap() - 3.0).abs() < 1e-15);
        assert_eq!(LossSpec::Hinge.lipschitz_constant(3.0).unwrap(), 1.0);
    }

    #[test]
    fn modulus_examples() {
        assert_eq!(modulus_of_convexity_bound(2.0, 1.0, 1.0).unwrap(), 0.25);
        assert_eq!(modulus_of_convexity_bound(2.0, 5.0, 1.0).unwrap(), 0.25);
        let v = modulus_of_convexity_bound(1.5, 2.0, 0.5).unwrap();
        assert!((v - 1.5 * 0.5 / 8.0 * 2f64.powf(-0.5) * 0.25).abs() < 1e-15);
        assert!((v - 0.016572).abs() < 1e-6);
        assert!(matches!(
            modulus_of_convexity_bound(1.0, 1.0, 1.0),
            Err(Error::NotStrictlyConvex { .. })
        ));
    }

    #[test]
    fn inner_risks() {
        let l2 = LossSpec::least_squares();
        let l1 = LossSpec::power(1.0).unwrap();
        assert_eq!(inner_risk(&l2, &FiniteDistribution::dirac(0.3), 0.1), l2.value(0.3, 0.1));
        assert_eq!(inner_risk(&l2, &pm1(), 0.0), 1.0);
        assert_eq!(inner_risk(&l1, &pm1(), 0.0), 1.0);

        let (t, v) = minimal_inner_risk(&l2, &pm1());
        assert!(t.abs() < 1e-9 && (v - 1.0).abs() < 1e-12);
        let (t, v) = minimal_inner_risk(&l1, &FiniteDistribution::dirac(0.3));
        assert!((t - 0.3).abs() < 1e-9 && v < 1e-9);
        let (t, v) = minimal_inner_risk(&LossSpec::power(1.5).unwrap(), &pm1());
        assert!(t.abs() < 1e-9 && (v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_template() {
        assert_eq!(mean_template_inner_risk(&FiniteDistribution::dirac(1.0), 1.0), 0.0);
        assert_eq!(mean_template_inner_risk(&pm1(), 0.5), 0.5);
        let q = FiniteDistribution::new(vec![0.0, 1.0], vec![0.8, 0.2]).unwrap();
        assert!((mean_template_inner_risk(&q, -0.3) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn calibration_examples() {
        assert_eq!(calibration_delta_max(2.0, 1.0).unwrap(), 1.0);
        assert_eq!(calibration_delta_max(1.3, 0.0).unwrap(), 0.0);
        assert!((calibration_delta_max(1.5, 4.0).unwrap() - 0.75).abs() < 1e-15);

        assert_eq!(calibration_inequality_factor(2.0, 0.7).unwrap().factor, 1.0);
        assert!((calibration_inequality_factor(1.5, 1.0).unwrap().factor - 16.0 / 3.0).abs() < 1e-13);
        assert!(calibration_inequality_factor(1.0 + 1e-12, 0.0).unwrap().factor > 1e11);
        assert!(calibration_inequality_factor(1.0, 0.0).is_err());
        assert!(calibration_inequality_factor(2.1, 0.0).is_err());
    }

    #[test]
    fn growth_condition_holds_on_grid() {
        for alpha in [1.0, 1.3, 1.7, 2.0] {
            let l = LossSpec::power(alpha).unwrap();
            for i in 0..=40 {
                let t = -5.0 + 0.25 * i as f64;
                let sup = (0..=20)
                    .map(|j| l.value(-1.0 + 0.1 * j as f64, t))
                    .fold(0.0, f64::max);
                // (1 + |t|)^alpha <= 2^(alpha-1) (1 + |t|^alpha)
                let bound = 2f64.powf(alpha - 1.0) * (1.0 + t.abs().powf(alpha));
                assert!(sup <= bound + 1e-12, "alpha {alpha} t {t}");
            }
        }
    }
}
