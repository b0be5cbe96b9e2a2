//! Synthetic regression models `y = f*(x) + noise` with `x` uniform on the box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};
use crate::kernels::{DomainBox, Kernel, KernelExpansion};
use crate::losses::power_abs;
use crate::solver::TrainingSet;

/// Additive label noise, bounded so that labels stay in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Uniform on `[-b, b]`.
    Uniform { b: f64 },
    /// Centered Gaussian with scale `sigma` conditioned on `[-b, b]`.
    TruncatedGaussian { sigma: f64, b: f64 },
    /// With probability `fraction` the base noise is replaced by an outlier at
    /// `+-magnitude` (random sign when `symmetric`, otherwise always `+magnitude`).
    Contaminated {
        base: Box<NoiseModel>,
        fraction: f64,
        magnitude: f64,
        symmetric: bool,
    },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::Uniform { b } => check_param("b", *b, *b >= 0.0 && b.is_finite(), "must be nonnegative"),
            NoiseModel::TruncatedGaussian { sigma, b } => {
                check_param("sigma", *sigma, *sigma > 0.0 && sigma.is_finite(), "must be positive")?;
                check_param("b", *b, *b > 0.0 && b.is_finite(), "must be positive")
            }
            NoiseModel::Contaminated {
                base,
                fraction,
                magnitude,
                ..
            } => {
                base.validate()?;
                check_param("fraction", *fraction, (0.0..=1.0).contains(fraction), "must lie in [0, 1]")?;
                check_param("magnitude", *magnitude, *magnitude >= 0.0 && magnitude.is_finite(), "must be nonnegative")
            }
        }
    }

    /// Largest possible absolute noise value.
    pub fn max_abs(&self) -> f64 {
        match self {
            NoiseModel::Uniform { b } | NoiseModel::TruncatedGaussian { b, .. } => *b,
            NoiseModel::Contaminated { base, magnitude, .. } => base.max_abs().max(*magnitude),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            NoiseModel::Uniform { .. } | NoiseModel::TruncatedGaussian { .. } => true,
            NoiseModel::Contaminated {
                base,
                fraction,
                magnitude,
                symmetric,
            } => base.is_symmetric() && (*symmetric || *fraction == 0.0 || *magnitude == 0.0),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseModel::Uniform { b } => {
                if *b == 0.0 {
                    0.0
                } else {
                    rng.random_range(-*b..=*b)
                }
            }
            NoiseModel::TruncatedGaussian { sigma, b } => sample_truncated_gaussian(rng, *sigma, *b),
            NoiseModel::Contaminated {
                base,
                fraction,
                magnitude,
                symmetric,
            } => {
                if rng.random::<f64>() < *fraction {
                    if *symmetric && rng.random::<bool>() {
                        -*magnitude
                    } else {
                        *magnitude
                    }
                } else {
                    base.sample(rng)
                }
            }
        }
    }

    /// `E|xi - d|^alpha - E|xi|^alpha`, the excess `L_alpha` inner risk of the
    /// prediction error `d` when the noise is symmetric.
    pub fn inner_excess(&self, alpha: f64, d: f64) -> f64 {
        self.abs_moment(alpha, d) - self.abs_moment(alpha, 0.0)
    }

    /// `E|xi - d|^alpha`.
    pub fn abs_moment(&self, alpha: f64, d: f64) -> f64 {
        match self {
            NoiseModel::Uniform { b } => {
                if *b == 0.0 {
                    return power_abs(d, alpha);
                }
                let anti = |u: f64| u.signum() * u.abs().powf(alpha + 1.0) / (alpha + 1.0);
                (anti(b - d) - anti(-b - d)) / (2.0 * b)
            }
            NoiseModel::TruncatedGaussian { sigma, b } => {
                let density = |u: f64| (-0.5 * (u / sigma).powi(2)).exp();
                let mass = simpson(density, -b, *b, 400);
                let integrand = |u: f64| power_abs(u - d, alpha) * density(u);
                let inner = if d > -b && d < *b {
                    simpson(integrand, -b, d, 400) + simpson(integrand, d, *b, 400)
                } else {
                    simpson(integrand, -b, *b, 400)
                };
                inner / mass
            }
            NoiseModel::Contaminated {
                base,
                fraction,
                magnitude,
                symmetric,
            } => {
                let outlier = if *symmetric {
                    0.5 * (power_abs(magnitude - d, alpha) + power_abs(-magnitude - d, alpha))
                } else {
                    power_abs(magnitude - d, alpha)
                };
                (1.0 - fraction) * base.abs_moment(alpha, d) + fraction * outlier
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            NoiseModel::Uniform { b } => b * b / 3.0,
            NoiseModel::TruncatedGaussian { .. } => self.abs_moment(2.0, 0.0),
            NoiseModel::Contaminated {
                base,
                fraction,
                magnitude,
                symmetric,
            } => {
                let mean = if *symmetric { 0.0 } else { fraction * magnitude };
                (1.0 - fraction) * base.abs_moment(2.0, 0.0) + fraction * magnitude * magnitude - mean * mean
            }
        }
    }
}

fn sample_truncated_gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64, b: f64) -> f64 {
    if b <= 2.0 * sigma {
        // uniform proposal, accept with the Gaussian shape
        loop {
            let u = rng.random_range(-b..=b);
            if rng.random::<f64>() <= (-0.5 * (u / sigma).powi(2)).exp() {
                return u;
            }
        }
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated positive");
    loop {
        let u: f64 = normal.sample(rng);
        if u.abs() <= b {
            return u;
        }
    }
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub(crate) fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let m = panels + panels % 2;
    let h = (hi - lo) / m as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + h * i as f64);
    }
    s * h / 3.0
}

/// Joint distribution of `(x, y)`: `x` uniform on the kernel's domain box and
/// `y = f*(x) + noise`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataModel {
    fstar: KernelExpansion,
    noise: NoiseModel,
    fstar_norm: f64,
}

impl DataModel {
    /// Rejects models whose labels could leave `[-1, 1]`: `|f*|_H + max|noise| <= 1`.
    pub fn new(fstar: KernelExpansion, noise: NoiseModel) -> Result<Self> {
        noise.validate()?;
        let fstar_norm = fstar.rkhs_norm()?;
        let reach = fstar_norm + noise.max_abs();
        if reach > 1.0 + 1e-12 {
            return Err(Error::Config(format!(
                "labels may leave [-1, 1]: |f*|_H + max|noise| = {reach}"
            )));
        }
        Ok(Self {
            fstar,
            noise,
            fstar_norm,
        })
    }

    /// A smooth bump-shaped regression function of RKHS norm `norm` built from
    /// four kernel sections spread over the box.
    pub fn standard_fstar(kernel: &Kernel, norm: f64) -> Result<KernelExpansion> {
        let dom = kernel.domain();
        let fractions = [0.15, 0.4, 0.6, 0.85];
        let coefficients = [1.0, -0.6, 0.8, -1.0];
        let centers: Vec<Vec<f64>> = fractions
            .iter()
            .enumerate()
            .map(|(i, t)| {
                dom.lower()
                    .iter()
                    .zip(dom.upper())
                    .enumerate()
                    .map(|(axis, (lo, hi))| {
                        // stagger coordinates so centers are not collinear in d > 1
                        let s = if axis % 2 == 0 { *t } else { fractions[(i + 1) % 4] };
                        lo + (hi - lo) * s
                    })
                    .collect()
            })
            .collect();
        let raw = KernelExpansion::new(kernel.clone(), centers, coefficients.to_vec())?;
        let r = raw.rkhs_norm()?;
        Ok(raw.scaled(norm / r))
    }

    pub fn fstar(&self) -> &KernelExpansion {
        &self.fstar
    }

    pub fn fstar_norm(&self) -> f64 {
        self.fstar_norm
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn kernel(&self) -> &Kernel {
        self.fstar.kernel()
    }

    pub fn domain(&self) -> &DomainBox {
        self.fstar.kernel().domain()
    }

    /// Same regression function with different noise.
    pub fn with_noise(&self, noise: NoiseModel) -> Result<Self> {
        Self::new(self.fstar.clone(), noise)
    }

    pub fn sample_inputs<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Vec<f64>> {
        let dom = self.domain();
        (0..n)
            .map(|_| {
                dom.lower()
                    .iter()
                    .zip(dom.upper())
                    .map(|(lo, hi)| rng.random_range(*lo..=*hi))
                    .collect()
            })
            .collect()
    }
}

/// Draws `n` i.i.d. pairs; bit-reproducible for a given seed.
pub fn generate(model: &DataModel, n: usize, seed: u64) -> Result<TrainingSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = model.sample_inputs(&mut rng, n);
    let fx = model.fstar.eval_many(&xs);
    let ys = fx
        .iter()
        .map(|v| (v + model.noise.sample(&mut rng)).clamp(-1.0, 1.0))
        .collect();
    TrainingSet::new(xs, ys)
}

/// Seed of trial `index` derived from a master seed (SplitMix64 finalizer).
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(master_seed ^ mix(index))
}
