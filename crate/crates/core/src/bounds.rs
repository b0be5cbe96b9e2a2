//! Closed-form oracle thresholds, variance and sup-norm bounds, and learning-rate
//! exponents.
//!
//! Exponents whose denominator vanishes (for instance `2 / (2 - alpha)` at
//! `alpha = 2`) are read as `+inf` and resolved with [`extended_power`].
//! Evaluators return `+inf` rather than failing when a term diverges.

use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};

/// Denominators smaller than this in absolute value are treated as zero.
const ZERO_DENOMINATOR: f64 = 1e-12;

/// `base^exponent` with `0^0 = 1` and, for `exponent = +inf`, `a^inf` equal to
/// 0, 1 or `+inf` as `a < 1`, `a = 1` or `a > 1`.
pub fn extended_power(base: f64, exponent: f64) -> Result<f64> {
    check_param("base", base, base >= 0.0, "must be nonnegative")?;
    check_param("exponent", exponent, exponent >= 0.0, "must be nonnegative")?;
    if exponent == f64::INFINITY {
        return Ok(if base < 1.0 {
            0.0
        } else if base == 1.0 {
            1.0
        } else {
            f64::INFINITY
        });
    }
    if exponent == 0.0 {
        return Ok(1.0);
    }
    Ok(base.powf(exponent))
}

/// `base^(numerator / denominator)` for a positive numerator, with a vanishing
/// denominator meaning an infinite exponent.
fn ratio_power(base: f64, numerator: f64, denominator: f64, term: &str) -> Result<f64> {
    if denominator.abs() < ZERO_DENOMINATOR {
        return extended_power(base, f64::INFINITY);
    }
    if denominator < 0.0 {
        return Err(Error::InvalidRegime(format!(
            "{term}: exponent denominator {denominator} is negative"
        )));
    }
    extended_power(base, numerator / denominator)
}

/// Inputs shared by the oracle-inequality thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Covering constant, `a >= 1`.
    pub a: f64,
    /// Covering exponent in `(0, 2)`.
    pub p: f64,
    /// Growth exponent of the loss in `[1, 2]`.
    pub alpha: f64,
    /// Variance-bound exponent of `|f|_inf + 1`, in `[0, 2]`.
    pub v: f64,
    /// Variance-bound exponent of the excess risk, in `(0, 1]`.
    pub theta: f64,
    /// Variance-bound constant, `c >= 1`.
    pub c: f64,
    /// Unspecified universal constant of the oracle inequality, `K >= 1`.
    pub k: f64,
    pub lambda: f64,
    pub n: f64,
    /// Confidence parameter `x >= 1`; the bound holds with probability `1 - e^-x`.
    pub x: f64,
    /// Approximation error `a(lambda) >= 0`.
    pub approx_error: f64,
}

impl Default for BoundInputs {
    fn default() -> Self {
        Self {
            a: 1.0,
            p: 1.0,
            alpha: 2.0,
            v: 2.0,
            theta: 1.0,
            c: 1.0,
            k: 1.0,
            lambda: 1.0,
            n: 1.0,
            x: 1.0,
            approx_error: 0.0,
        }
    }
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        check_param("a", self.a, self.a >= 1.0, "must be at least 1")?;
        check_param("p", self.p, self.p > 0.0 && self.p < 2.0, "must lie in (0, 2)")?;
        check_param("alpha", self.alpha, (1.0..=2.0).contains(&self.alpha), "must lie in [1, 2]")?;
        check_param("v", self.v, (0.0..=2.0).contains(&self.v), "must lie in [0, 2]")?;
        check_param("theta", self.theta, self.theta > 0.0 && self.theta <= 1.0, "must lie in (0, 1]")?;
        check_param("c", self.c, self.c >= 1.0, "must be at least 1")?;
        check_param("K", self.k, self.k >= 1.0, "must be at least 1")?;
        check_lambda(self.lambda)?;
        check_param("n", self.n, self.n >= 1.0, "must be at least 1")?;
        check_param("x", self.x, self.x >= 1.0, "must be at least 1")?;
        check_param("approx_error", self.approx_error, self.approx_error >= 0.0, "must be nonnegative")?;
        Ok(())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    check_param("lambda", lambda, lambda > 0.0 && lambda <= 1.0, "must lie in (0, 1]")
}

/// `lambda |f*|_H^2`, an upper bound on the approximation error when `f*` lies in H.
pub fn approx_error_bound(lambda: f64, rkhs_norm_of_fstar: f64) -> Result<f64> {
    check_param("lambda", lambda, lambda >= 0.0, "must be nonnegative")?;
    check_param("norm", rkhs_norm_of_fstar, rkhs_norm_of_fstar >= 0.0, "must be nonnegative")?;
    Ok(lambda * rkhs_norm_of_fstar * rkhs_norm_of_fstar)
}

/// The five lower bounds on `eps` whose maximum is the oracle threshold.
pub fn oracle_terms(inp: &BoundInputs) -> Result<[f64; 5]> {
    inp.validate()?;
    let BoundInputs {
        a,
        p,
        alpha,
        v,
        theta,
        k,
        lambda,
        n,
        x,
        approx_error,
        ..
    } = *inp;
    let t1 = approx_error + lambda;
    let t2 = ratio_power(
        k * a / (lambda.powf((2.0 * alpha * p + v * (2.0 - p)) / 4.0) * n),
        4.0,
        8.0 - 2.0 * alpha * p - (v + 2.0 * theta) * (2.0 - p),
        "second term",
    )?;
    let t3 = ratio_power(
        k * a / (lambda.powf(alpha * (2.0 + p) / 4.0) * n),
        4.0,
        (2.0 + p) * (2.0 - alpha),
        "third term",
    )?;
    let t4 = ratio_power(
        k * x / (lambda.powf(v / 2.0) * n),
        2.0,
        4.0 - v - 2.0 * theta,
        "fourth term",
    )?;
    let t5 = ratio_power(k * x / (lambda.powf(alpha / 2.0) * n), 2.0, 2.0 - alpha, "fifth term")?;
    Ok([t1, t2, t3, t4, t5])
}

/// Smallest `eps` admitted by the oracle inequality: the maximum of its five terms.
pub fn oracle_epsilon(inp: &BoundInputs) -> Result<f64> {
    Ok(oracle_terms(inp)?.into_iter().fold(0.0, f64::max))
}

/// Exponent `4(q + 1) / (2q + pq + 4)` of the hinge-loss threshold; `q = inf`
/// gives the limit `4 / (2 + p)`.
pub fn hinge_exponent(q: f64, p: f64) -> Result<f64> {
    check_param("q", q, q >= 0.0, "must be nonnegative")?;
    check_param("p", p, p > 0.0 && p < 2.0, "must lie in (0, 2)")?;
    if q.is_infinite() {
        return Ok(4.0 / (2.0 + p));
    }
    Ok(4.0 * (q + 1.0) / (2.0 * q + p * q + 4.0))
}

/// Reduced hinge-loss threshold `a(lambda) + lambda + K x^2 / lambda * (a / n)^e`
/// with `e` from [`hinge_exponent`]; requires `n >= a >= 1`.
#[allow(clippy::too_many_arguments)]
pub fn hinge_epsilon(q: f64, p: f64, k: f64, a: f64, n: f64, x: f64, lambda: f64, approx_error: f64) -> Result<f64> {
    let e = hinge_exponent(q, p)?;
    if !(a >= 1.0 && n >= a) {
        return Err(Error::InvalidRegime(format!("hinge threshold needs n >= a >= 1, got n = {n}, a = {a}")));
    }
    check_param("K", k, k >= 1.0, "must be at least 1")?;
    check_param("x", x, x >= 1.0, "must be at least 1")?;
    check_lambda(lambda)?;
    check_param("approx_error", approx_error, approx_error >= 0.0, "must be nonnegative")?;
    Ok(approx_error + lambda + k * x * x / lambda * (a / n).powf(e))
}

fn check_excess(lambda: f64, approx_error: f64, excess: f64) -> Result<()> {
    check_lambda(lambda)?;
    check_param("approx_error", approx_error, approx_error >= 0.0, "must be nonnegative")?;
    check_param("excess", excess, excess >= 0.0, "must be nonnegative")
}

/// `3 (E g / lambda)^(alpha/2) + (a(lambda) / lambda)^(alpha/2) + 2`, bounding the
/// sup norm of the excess regularized cost `g`.
pub fn excess_cost_sup_bound(alpha: f64, lambda: f64, approx_error: f64, excess: f64) -> Result<f64> {
    check_param("alpha", alpha, (1.0..=2.0).contains(&alpha), "must lie in [1, 2]")?;
    check_excess(lambda, approx_error, excess)?;
    Ok(3.0 * (excess / lambda).powf(alpha / 2.0) + (approx_error / lambda).powf(alpha / 2.0) + 2.0)
}

/// `((a(lambda) + E g) / lambda)^(1/2)`, bounding `|f|_H`.
pub fn excess_cost_norm_bound(lambda: f64, approx_error: f64, excess: f64) -> Result<f64> {
    check_excess(lambda, approx_error, excess)?;
    Ok(((approx_error + excess) / lambda).sqrt())
}

/// `16 c ((E g / lambda)^(1/2) + (a(lambda) / lambda)^(1/2) + 1)^v ((E g)^theta + 2 a(lambda)^theta)`.
pub fn excess_cost_variance_bound(lambda: f64, approx_error: f64, excess: f64, c: f64, v: f64, theta: f64) -> Result<f64> {
    check_excess(lambda, approx_error, excess)?;
    check_param("c", c, c >= 0.0, "must be nonnegative")?;
    check_param("v", v, (0.0..=2.0).contains(&v), "must lie in [0, 2]")?;
    check_param("theta", theta, theta > 0.0 && theta <= 1.0, "must lie in (0, 1]")?;
    let base = (excess / lambda).sqrt() + (approx_error / lambda).sqrt() + 1.0;
    Ok(16.0 * c * base.powf(v) * (excess.powf(theta) + 2.0 * approx_error.powf(theta)))
}

/// Bound on the modulus of continuity of the empirical process:
/// `c_Lp * max{ r^(alpha p / 4) tau^((2 - p) / 4) (a / n)^(1/2), r^(alpha / 2) (a / n)^(2 / (2 + p)) }`
/// with `r = (a(lambda) + eps) / lambda + 1`.
#[allow(clippy::too_many_arguments)]
pub fn empirical_process_modulus_bound(
    alpha: f64,
    a: f64,
    p: f64,
    n: f64,
    lambda: f64,
    approx_error: f64,
    eps: f64,
    tau: f64,
    c_lp: f64,
) -> Result<f64> {
    check_param("alpha", alpha, (1.0..=2.0).contains(&alpha), "must lie in [1, 2]")?;
    check_param("a", a, a >= 1.0, "must be at least 1")?;
    check_param("p", p, p > 0.0 && p < 2.0, "must lie in (0, 2)")?;
    check_param("n", n, n >= 1.0, "must be at least 1")?;
    check_excess(lambda, approx_error, eps)?;
    check_param("tau", tau, tau >= 0.0, "must be nonnegative")?;
    check_param("c_Lp", c_lp, c_lp >= 0.0, "must be nonnegative")?;
    let r = (approx_error + eps) / lambda + 1.0;
    let first = r.powf(alpha * p / 4.0) * extended_power(tau, (2.0 - p) / 4.0)? * (a / n).sqrt();
    let second = r.powf(alpha / 2.0) * (a / n).powf(2.0 / (2.0 + p));
    Ok(c_lp * first.max(second))
}

/// Thresholds for the `L_alpha` oracle inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionEpsilon {
    /// Simplified sufficient threshold, valid for `n >= K a`.
    pub simplified: f64,
    /// Maximum of the three unsimplified terms.
    pub three_term: f64,
}

/// `a(lambda) + lambda + lambda^(-alpha/(2-alpha)) x^(2/(2-alpha)) (K a / n)^(4/((2+p)(2-alpha)))`
/// together with the three-term maximum it simplifies.
#[allow(clippy::too_many_arguments)]
pub fn regression_epsilon(
    alpha: f64,
    p: f64,
    k_alpha: f64,
    a: f64,
    n: f64,
    x: f64,
    lambda: f64,
    approx_error: f64,
) -> Result<RegressionEpsilon> {
    check_param("alpha", alpha, alpha > 1.0 && alpha <= 2.0, "must lie in (1, 2]")?;
    check_param("p", p, p > 0.0 && p < 2.0, "must lie in (0, 2)")?;
    check_param("K", k_alpha, k_alpha >= 1.0, "must be at least 1")?;
    check_param("a", a, a >= 1.0, "must be at least 1")?;
    check_param("x", x, x >= 1.0, "must be at least 1")?;
    check_lambda(lambda)?;
    check_param("approx_error", approx_error, approx_error >= 0.0, "must be nonnegative")?;
    if n < k_alpha * a {
        return Err(Error::InvalidRegime(format!(
            "simplified threshold needs n >= K a, got n = {n}, K a = {}",
            k_alpha * a
        )));
    }
    let ratio = k_alpha * a / n;
    // Written as one power of a combined base so that alpha = 2 resolves through
    // the infinite-exponent convention.
    let combined = lambda.powf(-alpha / 2.0) * x * ratio.powf(2.0 / (2.0 + p));
    let tail = ratio_power(combined, 2.0, 2.0 - alpha, "simplified tail")?;
    let simplified = approx_error + lambda + tail;

    let second = ratio_power(lambda.powf(-alpha / 2.0) * ratio.powf(2.0 / (2.0 + p)), 2.0, 2.0 - alpha, "second term")?;
    let third = ratio_power(lambda.powf(-alpha / 2.0) * k_alpha * x / n, 2.0, 2.0 - alpha, "third term")?;
    let three_term = (approx_error + lambda).max(second).max(third);
    Ok(RegressionEpsilon { simplified, three_term })
}

/// Schedule `lambda_n = n^-kappa` for a covering exponent `p` and loss exponent `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSpec {
    pub kappa: f64,
    pub p: f64,
    pub alpha: f64,
}

impl RateSpec {
    /// `2 / (2 + p)`, the best attainable exponent.
    pub fn critical_kappa(&self) -> f64 {
        2.0 / (2.0 + self.p)
    }

    /// Loss exponent at and above which the rate exponent is nonpositive.
    pub fn zero_threshold(&self) -> f64 {
        rate_threshold_alpha(self.kappa, self.p)
    }
}

/// `2 - (kappa - 2/(2+p)) (2 + p)`.
pub fn rate_threshold_alpha(kappa: f64, p: f64) -> f64 {
    2.0 - (kappa - 2.0 / (2.0 + p)) * (2.0 + p)
}

/// `rho = min(kappa, 2/(2+p) + (2/(2+p) - kappa) * 2/(2-alpha))`; for `alpha = 2`
/// the rate is `kappa` when `kappa <= 2/(2+p)` and there is none (`-inf`) otherwise.
pub fn rate_exponent(spec: &RateSpec) -> Result<f64> {
    let RateSpec { kappa, p, alpha } = *spec;
    check_param("kappa", kappa, kappa > 0.0 && kappa.is_finite(), "must be positive")?;
    check_param("p", p, p > 0.0 && p < 2.0, "must lie in (0, 2)")?;
    check_param("alpha", alpha, alpha > 1.0 && alpha <= 2.0, "must lie in (1, 2]")?;
    let crit = 2.0 / (2.0 + p);
    if kappa <= crit {
        return Ok(kappa);
    }
    if alpha == 2.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(kappa.min(crit + (crit - kappa) * 2.0 / (2.0 - alpha)))
}

/// Rate exponent of the excess `L_alpha` risk under `lambda = n^-kappa`.
pub fn lalpha_rate_exponent(kappa: f64, p: f64, alpha: f64) -> Result<f64> {
    check_param("alpha", alpha, alpha > 1.0 && alpha < 2.0, "must lie in (1, 2)")?;
    rate_exponent(&RateSpec { kappa, p, alpha })
}

/// `p = d / m` for a Sobolev space of order `m > d / 2`.
pub fn sobolev_p(m: f64, d: f64) -> Result<f64> {
    check_sobolev(m, d)?;
    Ok(d / m)
}

/// `2m / (2m + d)`.
pub fn sobolev_optimal_rate(m: f64, d: f64) -> Result<f64> {
    check_sobolev(m, d)?;
    Ok(2.0 * m / (2.0 * m + d))
}

fn check_sobolev(m: f64, d: f64) -> Result<()> {
    check_param("d", d, d > 0.0, "must be positive")?;
    if m.is_nan() || m <= d / 2.0 {
        return Err(Error::InvalidRegime(format!("Sobolev order {m} must exceed d/2 = {}", d / 2.0)));
    }
    Ok(())
}

/// `8 alpha / (alpha - 1) * (sup_norm_f + 2)^alpha`, the variance-bound constant
/// of the power loss (used with `v = alpha`, `theta = 1`).
pub fn power_loss_variance_constant(alpha: f64, sup_norm_f: f64) -> Result<f64> {
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
    check_param("sup_norm_f", sup_norm_f, sup_norm_f >= 0.0, "must be nonnegative")?;
    Ok(8.0 * alpha / (alpha - 1.0) * (sup_norm_f + 2.0).powf(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1e-300)
    }

    #[test]
    fn extended_power_convention() {
        assert_eq!(extended_power(0.5, f64::INFINITY).unwrap(), 0.0);
        assert_eq!(extended_power(1.0, f64::INFINITY).unwrap(), 1.0);
        assert_eq!(extended_power(2.0, f64::INFINITY).unwrap(), f64::INFINITY);
        assert_eq!(extended_power(0.0, 0.0).unwrap(), 1.0);
        assert!(extended_power(-1.0, 2.0).is_err());
    }

    #[test]
    fn oracle_unit_case() {
        let inp = BoundInputs {
            a: 7.0,
            n: 7.0,
            x: 7.0,
            p: 0.8,
            alpha: 1.6,
            v: 1.0,
            theta: 0.5,
            ..Default::default()
        };
        assert_eq!(oracle_terms(&inp).unwrap(), [1.0; 5]);
    }

    #[test]
    fn oracle_alpha_two_kills_terms() {
        let inp = BoundInputs {
            a: 1.0,
            n: 100.0,
            lambda: 0.5,
            p: 1.0,
            alpha: 2.0,
            v: 1.0,
            theta: 1.0,
            ..Default::default()
        };
        let t = oracle_terms(&inp).unwrap();
        assert_eq!(t[2], 0.0);
        assert_eq!(t[4], 0.0);
    }

    #[test]
    fn oracle_hand_example() {
        let inp = BoundInputs {
            p: 1.0,
            alpha: 1.0,
            v: 2.0,
            theta: 1.0,
            n: 16.0,
            ..Default::default()
        };
        let t = oracle_terms(&inp).unwrap();
        assert!(rel(t[1], 0.00390625));
        assert_eq!(oracle_epsilon(&inp).unwrap(), 1.0);
    }

    #[test]
    fn hinge_examples() {
        assert!(rel(hinge_exponent(f64::INFINITY, 0.5).unwrap(), 4.0 / 2.5));
        assert!(rel(hinge_exponent(1e12, 0.5).unwrap(), 4.0 / 2.5));
        assert_eq!(hinge_exponent(0.0, 1.0).unwrap(), 1.0);
        let v = hinge_epsilon(1.0, 1.0, 2.0, 5.0, 5.0, 3.0, 0.25, 0.1).unwrap();
        assert!(rel(v, 0.1 + 0.25 + 2.0 * 9.0 / 0.25));
        assert!(hinge_epsilon(1.0, 1.0, 1.0, 5.0, 4.0, 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn excess_cost_examples() {
        assert_eq!(excess_cost_sup_bound(1.5, 0.3, 0.0, 0.0).unwrap(), 2.0);
        assert_eq!(excess_cost_norm_bound(0.3, 0.0, 0.0).unwrap(), 0.0);
        assert!(rel(excess_cost_norm_bound(0.5, 0.1, 0.4).unwrap(), 1.0));
        assert!(rel(excess_cost_sup_bound(1.0, 1.0, 1.0, 1.0).unwrap(), 6.0));
        assert_eq!(excess_cost_variance_bound(0.5, 0.0, 0.0, 3.0, 1.0, 0.5).unwrap(), 0.0);
        assert!(rel(excess_cost_variance_bound(1.0, 0.0, 1.0, 1.0, 0.0, 1.0).unwrap(), 16.0));
        let one = excess_cost_variance_bound(0.2, 0.1, 0.3, 1.5, 1.2, 0.7).unwrap();
        let two = excess_cost_variance_bound(0.2, 0.1, 0.3, 3.0, 1.2, 0.7).unwrap();
        assert!(rel(two, 2.0 * one));
    }

    #[test]
    fn empirical_process_modulus_examples() {
        let alpha = 1.5;
        let p = 0.7;
        let v = empirical_process_modulus_bound(alpha, 9.0, p, 9.0, 1.0, 0.5, 0.5, 1.0, 1.0).unwrap();
        assert!(rel(v, 2f64.powf(alpha * p / 4.0).max(2f64.powf(alpha / 2.0))));
        assert_eq!(empirical_process_modulus_bound(alpha, 9.0, p, 9.0, 1.0, 0.5, 0.5, 1.0, 0.0).unwrap(), 0.0);
        let near_two = empirical_process_modulus_bound(alpha, 4.0, 2.0 - 1e-15, 100.0, 1.0, 0.0, 0.0, 123.0, 1.0).unwrap();
        assert!((near_two - (0.04f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn regression_examples() {
        let r = regression_epsilon(1.5, 1.0, 1.0, 10.0, 10.0, 1.0, 1.0, 0.3).unwrap();
        assert!(rel(r.simplified, 2.3));
        let r = regression_epsilon(1.5, 1.0, 1.0, 1.0, 8.0, 1.0, 1.0, 0.0).unwrap();
        assert!(rel(r.simplified - 1.0, 8f64.powf(-8.0 / 3.0)));
        assert!((r.simplified - 1.0 - 0.0039).abs() < 1e-4);
        let r = regression_epsilon(2.0, 1.0, 1.0, 1.0, 8.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(r.simplified, 1.0);
        assert!(regression_epsilon(1.5, 1.0, 2.0, 10.0, 10.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rate_examples() {
        let p = 1.0;
        let crit = 2.0 / 3.0;
        for alpha in [1.1, 1.5, 1.9, 2.0] {
            assert_eq!(rate_exponent(&RateSpec { kappa: crit, p, alpha }).unwrap(), crit);
            assert_eq!(rate_exponent(&RateSpec { kappa: 0.4, p, alpha }).unwrap(), 0.4);
        }
        let rho = rate_exponent(&RateSpec { kappa: 0.8, p, alpha: 1.5 }).unwrap();
        assert!(rel(rho, 2.0 / 3.0 - (0.8 - 2.0 / 3.0) * 4.0));
        assert!((rho - 0.1333).abs() < 1e-4);
        assert!(rel(rate_threshold_alpha(1.0, 1.0), 1.0));
        assert!(rel(lalpha_rate_exponent(0.7, 1.0, 1.5).unwrap(), 2.0 / 3.0 - (0.7 - 2.0 / 3.0) * 4.0));
        assert!((lalpha_rate_exponent(0.7, 1.0, 1.5).unwrap() - 0.5333).abs() < 1e-4);
        assert_eq!(rate_exponent(&RateSpec { kappa: 0.8, p, alpha: 2.0 }).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn sobolev_examples() {
        assert_eq!(sobolev_p(1.0, 1.0).unwrap(), 1.0);
        assert!(rel(sobolev_optimal_rate(1.0, 1.0).unwrap(), 2.0 / 3.0));
        assert_eq!(sobolev_p(2.0, 1.0).unwrap(), 0.5);
        assert!(rel(sobolev_optimal_rate(2.0, 1.0).unwrap(), 0.8));
        assert_eq!(sobolev_p(3.0, 3.0).unwrap(), 1.0);
        assert!(sobolev_p(0.5, 1.0).is_err());
    }

    #[test]
    fn variance_constant_examples() {
        assert_eq!(power_loss_variance_constant(2.0, 0.0).unwrap(), 64.0);
        assert!(rel(power_loss_variance_constant(2.0, 0.5).unwrap(), 16.0 * 2.5 * 2.5));
        assert!(power_loss_variance_constant(1.0 + 1e-12, 0.0).unwrap() > 1e12);
        assert!(matches!(power_loss_variance_constant(1.0, 0.0), Err(Error::NotStrictlyConvex { .. })));
        assert_eq!(approx_error_bound(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(approx_error_bound(0.25, 1.0).unwrap(), 0.25);
    }
}
