//! Kernels on compact boxes, Gram operators and finite kernel expansions.
//!
//! Every kernel is normalized so that `k(x, x) <= 1` on its domain, which makes
//! the RKHS norm an upper bound of the supremum norm. Members of the RKHS are
//! only ever represented as finite expansions `f = sum_i c_i k(x_i, .)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};

/// Tolerance used when checking that a point lies inside the domain box.
const DOMAIN_SLACK: f64 = 1e-12;

/// Axis-aligned box `[lower_1, upper_1] x ... x [lower_d, upper_d]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::LengthMismatch {
                what: "box bounds",
                left: lower.len(),
                right: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::Config("domain box needs at least one axis".into()));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            check_param("box bound", *lo, lo.is_finite(), "must be finite")?;
            check_param("box bound", *hi, hi.is_finite() && hi > lo, "upper must exceed lower")?;
        }
        Ok(Self { lower, upper })
    }

    /// The unit cube `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Self {
        Self {
            lower: vec![0.0; dim.max(1)],
            upper: vec![1.0; dim.max(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| {
                    let slack = DOMAIN_SLACK * (1.0 + lo.abs().max(hi.abs()));
                    *v >= lo - slack && *v <= hi + slack
                })
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !self.contains(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        Ok(())
    }

    /// Tensor grid with `per_axis` equispaced nodes on each axis (endpoints included).
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let per_axis = per_axis.max(1);
        let axes: Vec<Vec<f64>> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| {
                if per_axis == 1 {
                    vec![0.5 * (lo + hi)]
                } else {
                    (0..per_axis)
                        .map(|i| lo + (hi - lo) * i as f64 / (per_axis - 1) as f64)
                        .collect()
                }
            })
            .collect();
        tensor_product(&axes)
    }
}

pub(crate) fn tensor_product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(axes.len())];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for v in axis {
                let mut p = prefix.clone();
                p.push(*v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Kernel family and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    /// `exp(-|x - x'|^2 / width^2)`.
    Gaussian { width: f64 },
    /// Half-integer Matérn kernel whose RKHS is norm-equivalent to the Sobolev
    /// space of order `sobolev_order` on a `d`-dimensional box. The smoothness
    /// parameter is `nu = sobolev_order - d / 2`, which must be a half-integer.
    Matern { sobolev_order: f64, length_scale: f64 },
    /// `<x, x'> / sup_{z in box} |z|^2`.
    Linear,
}

/// Serializable kernel record: family, parameters and domain box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub family: KernelFamily,
    pub domain: DomainBox,
}

/// A validated, normalized kernel on a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct Kernel {
    family: KernelFamily,
    domain: DomainBox,
    /// Multiplier making `sup_x k(x, x) = 1`.
    scale: f64,
    /// For Matérn kernels, `nu - 1/2`.
    matern_index: usize,
}

impl TryFrom<KernelSpec> for Kernel {
    type Error = Error;

    fn try_from(spec: KernelSpec) -> Result<Self> {
        Kernel::new(spec.family, spec.domain)
    }
}

impl From<Kernel> for KernelSpec {
    fn from(k: Kernel) -> Self {
        KernelSpec {
            family: k.family,
            domain: k.domain,
        }
    }
}

impl Kernel {
    pub fn new(family: KernelFamily, domain: DomainBox) -> Result<Self> {
        let mut matern_index = 0;
        let scale = match &family {
            KernelFamily::Gaussian { width } => {
                check_param("width", *width, *width > 0.0 && width.is_finite(), "must be positive")?;
                1.0
            }
            KernelFamily::Matern {
                sobolev_order,
                length_scale,
            } => {
                check_param(
                    "length_scale",
                    *length_scale,
                    *length_scale > 0.0 && length_scale.is_finite(),
                    "must be positive",
                )?;
                let nu = sobolev_order - domain.dim() as f64 / 2.0;
                let index = nu - 0.5;
                check_param(
                    "sobolev_order",
                    *sobolev_order,
                    index >= -1e-12 && (index - index.round()).abs() < 1e-9 && index < 20.5,
                    "order minus half the dimension must be a half-integer >= 1/2",
                )?;
                matern_index = index.round() as usize;
                1.0
            }
            KernelFamily::Linear => {
                let sup: f64 = domain
                    .lower
                    .iter()
                    .zip(&domain.upper)
                    .map(|(lo, hi)| (lo * lo).max(hi * hi))
                    .sum();
                check_param("linear kernel sup", sup, sup > 0.0, "box must not collapse to the origin")?;
                1.0 / sup
            }
        };
        Ok(Self {
            family,
            domain,
            scale,
            matern_index,
        })
    }

    pub fn gaussian(width: f64, domain: DomainBox) -> Result<Self> {
        Self::new(KernelFamily::Gaussian { width }, domain)
    }

    pub fn matern(sobolev_order: f64, length_scale: f64, domain: DomainBox) -> Result<Self> {
        Self::new(
            KernelFamily::Matern {
                sobolev_order,
                length_scale,
            },
            domain,
        )
    }

    pub fn linear(domain: DomainBox) -> Result<Self> {
        Self::new(KernelFamily::Linear, domain)
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn spec(&self) -> KernelSpec {
        self.clone().into()
    }

    /// Length scale of the exponential (`nu = 1/2`) Matérn kernel in one
    /// dimension, the only case with a Markov structure exploited below.
    fn exponential_chain_scale(&self) -> Option<f64> {
        match self.family {
            KernelFamily::Matern { length_scale, .. }
                if self.matern_index == 0 && self.dim() == 1 =>
            {
                Some(length_scale)
            }
            _ => None,
        }
    }

    /// Kernel value; both points are assumed to have the kernel's dimension.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        match &self.family {
            KernelFamily::Gaussian { width } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (width * width)).exp()
            }
            KernelFamily::Matern { length_scale, .. } => {
                let r = x
                    .iter()
                    .zip(y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                matern_half_integer(self.matern_index, r / length_scale)
            }
            KernelFamily::Linear => {
                self.scale * x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
            }
        }
    }
}

/// Matérn correlation with `nu = p + 1/2` at scaled distance `r / length_scale`.
fn matern_half_integer(p: usize, scaled_r: f64) -> f64 {
    let s = (2.0 * p as f64 + 1.0).sqrt() * scaled_r;
    if p == 0 {
        return (-s).exp();
    }
    // p! / (2p)! * sum_i (p+i)! / (i! (p-i)!) (2s)^(p-i)
    let mut sum = 0.0;
    for i in 0..=p {
        let coeff = factorial(p + i) / (factorial(i) * factorial(p - i));
        sum += coeff * (2.0 * s).powi((p - i) as i32);
    }
    (-s).exp() * factorial(p) / factorial(2 * p) * sum
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Dense kernel matrix `K[i][j] = k(points_i, points_j)`.
pub fn kernel_matrix(kernel: &Kernel, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    for p in points {
        kernel.domain.check(p)?;
    }
    let n = points.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = kernel.eval(&points[i], &points[i]);
        for j in 0..i {
            let v = kernel.eval(&points[i], &points[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Linear operator `c -> K c` for the kernel matrix on a fixed point set.
///
/// The one-dimensional exponential kernel is represented by its Markov chain
/// structure (apply in `O(n)`, shifted solves through the tridiagonal
/// precision matrix); every other kernel uses a dense matrix.
#[derive(Clone, Debug)]
pub struct GramOperator {
    repr: GramRepr,
}

#[derive(Clone, Debug)]
enum GramRepr {
    Dense(DMatrix<f64>),
    Chain(ExponentialChain),
}

#[derive(Clone, Debug)]
struct ExponentialChain {
    /// Indices of the points in ascending order of position.
    order: Vec<usize>,
    /// `exp(-gap_i / length_scale)` between consecutive sorted points.
    decay: Vec<f64>,
    /// `1 - decay_i^2`, computed without cancellation.
    one_minus_sq: Vec<f64>,
}

impl GramOperator {
    pub fn new(kernel: &Kernel, points: &[Vec<f64>]) -> Result<Self> {
        if let Some(scale) = kernel.exponential_chain_scale() {
            for p in points {
                kernel.domain.check(p)?;
            }
            if let Some(chain) = ExponentialChain::build(points, scale) {
                return Ok(Self {
                    repr: GramRepr::Chain(chain),
                });
            }
        }
        Self::dense(kernel, points)
    }

    /// Forces the dense representation.
    pub fn dense(kernel: &Kernel, points: &[Vec<f64>]) -> Result<Self> {
        Ok(Self {
            repr: GramRepr::Dense(kernel_matrix(kernel, points)?),
        })
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            GramRepr::Dense(m) => m.nrows(),
            GramRepr::Chain(c) => c.order.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_structured(&self) -> bool {
        matches!(self.repr, GramRepr::Chain(_))
    }

    /// Row `i` of the kernel matrix restricted to `cols`.
    pub(crate) fn entries(&self, i: usize, cols: &[usize], kernel: &Kernel, points: &[Vec<f64>]) -> Vec<f64> {
        match &self.repr {
            GramRepr::Dense(m) => cols.iter().map(|&j| m[(i, j)]).collect(),
            GramRepr::Chain(_) => cols.iter().map(|&j| kernel.eval(&points[i], &points[j])).collect(),
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.len(), "vector length must match the Gram operator");
        match &self.repr {
            GramRepr::Dense(m) => {
                let out = m * DVector::from_column_slice(v);
                out.as_slice().to_vec()
            }
            GramRepr::Chain(c) => c.apply(v),
        }
    }

    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.apply(v))
    }

    /// Solves `(K + diag(shift)) c = rhs` for a strictly positive shift.
    pub fn solve_diag_shift(&self, shift: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if shift.len() != n || rhs.len() != n {
            return Err(Error::LengthMismatch {
                what: "shifted solve",
                left: n,
                right: shift.len().min(rhs.len()),
            });
        }
        for s in shift {
            check_param("diagonal shift", *s, *s > 0.0 && s.is_finite(), "must be positive")?;
        }
        match &self.repr {
            GramRepr::Dense(m) => {
                let mut a = m.clone();
                for i in 0..n {
                    a[(i, i)] += shift[i];
                }
                let chol = a.cholesky().ok_or_else(|| {
                    Error::LinearAlgebra("shifted kernel matrix is not positive definite".into())
                })?;
                Ok(chol.solve(&DVector::from_column_slice(rhs)).as_slice().to_vec())
            }
            GramRepr::Chain(c) => Ok(c.solve_diag_shift(shift, rhs)),
        }
    }
}

impl ExponentialChain {
    fn build(points: &[Vec<f64>], length_scale: f64) -> Option<Self> {
        let n = points.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
        let mut decay = Vec::with_capacity(n.saturating_sub(1));
        let mut one_minus_sq = Vec::with_capacity(n.saturating_sub(1));
        for w in order.windows(2) {
            let gap = (points[w[1]][0] - points[w[0]][0]) / length_scale;
            // Coincident points make the kernel matrix singular; fall back to dense.
            if gap <= 1e-12 {
                return None;
            }
            decay.push((-gap).exp());
            one_minus_sq.push(-(-2.0 * gap).exp_m1());
        }
        Some(Self {
            order,
            decay,
            one_minus_sq,
        })
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.order.len();
        if n == 0 {
            return Vec::new();
        }
        let sorted: Vec<f64> = self.order.iter().map(|&i| v[i]).collect();
        let mut fwd = vec![0.0; n];
        fwd[0] = sorted[0];
        for i in 1..n {
            fwd[i] = sorted[i] + self.decay[i - 1] * fwd[i - 1];
        }
        let mut out = vec![0.0; n];
        let mut bwd = 0.0;
        for i in (0..n).rev() {
            bwd = sorted[i] + if i + 1 < n { self.decay[i] * bwd } else { 0.0 };
            out[self.order[i]] = fwd[i] + bwd - sorted[i];
        }
        out
    }

    /// `(K + D) c = y`: with `u = K c` this is `(D^{-1} + Q) u = D^{-1} y`, `Q = K^{-1}`
    /// tridiagonal, and then `c = D^{-1} (y - u)`.
    fn solve_diag_shift(&self, shift: &[f64], rhs: &[f64]) -> Vec<f64> {
        let n = self.order.len();
        let inv_d: Vec<f64> = self.order.iter().map(|&i| 1.0 / shift[i]).collect();
        let y: Vec<f64> = self.order.iter().map(|&i| rhs[i]).collect();
        let a: Vec<f64> = self.one_minus_sq.iter().map(|v| 1.0 / v).collect();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let left = if i > 0 { a[i - 1] } else { 1.0 };
            let right = if i + 1 < n { a[i] } else { 1.0 };
            diag[i] = left + right - 1.0 + inv_d[i];
            if i + 1 < n {
                off[i] = -self.decay[i] * a[i];
            }
        }
        let b: Vec<f64> = y.iter().zip(&inv_d).map(|(v, w)| v * w).collect();
        let u = solve_symmetric_tridiagonal(&diag, &off, &b);
        let mut c = vec![0.0; n];
        for (k, &i) in self.order.iter().enumerate() {
            c[i] = (y[k] - u[k]) * inv_d[k];
        }
        c
    }
}

fn solve_symmetric_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    let mut denom = diag[0];
    c_prime[0] = if n > 1 { off[0] / denom } else { 0.0 };
    d_prime[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c_prime[i - 1];
        if i + 1 < n {
            c_prime[i] = off[i] / denom;
        }
        d_prime[i] = (rhs[i] - off[i - 1] * d_prime[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    x
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A function `f = sum_i c_i k(center_i, .)` in the RKHS of `kernel`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelExpansion {
    kernel: Kernel,
    centers: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
}

impl KernelExpansion {
    pub fn new(kernel: Kernel, centers: Vec<Vec<f64>>, coefficients: Vec<f64>) -> Result<Self> {
        if centers.len() != coefficients.len() {
            return Err(Error::LengthMismatch {
                what: "centers and coefficients",
                left: centers.len(),
                right: coefficients.len(),
            });
        }
        for c in &centers {
            kernel.domain.check(c)?;
        }
        for v in &coefficients {
            check_param("coefficient", *v, v.is_finite(), "must be finite")?;
        }
        Ok(Self {
            kernel,
            centers,
            coefficients,
        })
    }

    /// The zero function.
    pub fn zero(kernel: Kernel) -> Self {
        Self {
            kernel,
            centers: Vec::new(),
            coefficients: Vec::new(),
        }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.coefficients)
            .map(|(c, a)| a * self.kernel.eval(c, x))
            .sum()
    }

    /// Evaluates at many points. The one-dimensional exponential kernel uses a
    /// merged forward/backward sweep in `O((n + m) log(n + m))`.
    pub fn eval_many(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        match self.kernel.exponential_chain_scale() {
            Some(scale) if !self.is_empty() => self.eval_many_chain(xs, scale),
            _ => xs.iter().map(|x| self.eval(x)).collect(),
        }
    }

    fn eval_many_chain(&self, xs: &[Vec<f64>], scale: f64) -> Vec<f64> {
        let mut centers: Vec<(f64, f64)> = self
            .centers
            .iter()
            .zip(&self.coefficients)
            .map(|(c, a)| (c[0], *a))
            .collect();
        centers.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut queries: Vec<(f64, usize)> = xs.iter().enumerate().map(|(i, x)| (x[0], i)).collect();
        queries.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut out = vec![0.0; xs.len()];
        // centers at or left of the query
        let (mut acc, mut pos, mut next) = (0.0, f64::NEG_INFINITY, 0);
        for &(q, idx) in &queries {
            while next < centers.len() && centers[next].0 <= q {
                let (x, a) = centers[next];
                acc = if pos.is_finite() { acc * (-(x - pos) / scale).exp() } else { 0.0 } + a;
                pos = x;
                next += 1;
            }
            out[idx] = if pos.is_finite() { acc * (-(q - pos) / scale).exp() } else { 0.0 };
        }
        // centers strictly right of the query
        let (mut acc, mut pos) = (0.0, f64::INFINITY);
        let mut next = centers.len();
        for &(q, idx) in queries.iter().rev() {
            while next > 0 && centers[next - 1].0 > q {
                let (x, a) = centers[next - 1];
                acc = if pos.is_finite() { acc * (-(pos - x) / scale).exp() } else { 0.0 } + a;
                pos = x;
                next -= 1;
            }
            if pos.is_finite() {
                out[idx] += acc * (-(pos - q) / scale).exp();
            }
        }
        out
    }

    /// `c^T K c`, not clamped.
    pub fn squared_norm_raw(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if self.kernel.exponential_chain_scale().is_some() {
            if let Ok(op) = GramOperator::new(&self.kernel, &self.centers) {
                return op.quadratic_form(&self.coefficients);
            }
        }
        let c = &self.coefficients;
        let mut q = 0.0;
        for i in 0..self.len() {
            q += c[i] * c[i] * self.kernel.eval(&self.centers[i], &self.centers[i]);
            for j in 0..i {
                q += 2.0 * c[i] * c[j] * self.kernel.eval(&self.centers[i], &self.centers[j]);
            }
        }
        q
    }

    /// RKHS norm `sqrt(c^T K c)`.
    pub fn rkhs_norm(&self) -> Result<f64> {
        let q = self.squared_norm_raw();
        if q < -1e-10 {
            return Err(Error::NotPositiveSemidefinite { value: q });
        }
        Ok(q.max(0.0).sqrt())
    }

    /// Certified upper bound on `sup_x |f(x)|` (the RKHS norm).
    pub fn sup_norm_bound(&self) -> Result<f64> {
        self.rkhs_norm()
    }

    /// Diagnostic lower estimate of the supremum norm from a tensor grid.
    pub fn grid_sup_estimate(&self, per_axis: usize) -> f64 {
        let grid = self.kernel.domain.grid(per_axis);
        self.eval_many(&grid)
            .into_iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            kernel: self.kernel.clone(),
            centers: self.centers.clone(),
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }

    /// The sum of two expansions over the same kernel.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.kernel != other.kernel {
            return Err(Error::Config("expansions use different kernels".into()));
        }
        let mut centers = self.centers.clone();
        centers.extend(other.centers.iter().cloned());
        let mut coefficients = self.coefficients.clone();
        coefficients.extend_from_slice(&other.coefficients);
        Ok(Self {
            kernel: self.kernel.clone(),
            centers,
            coefficients,
        })
    }

    pub fn into_parts(self) -> (Kernel, Vec<Vec<f64>>, Vec<f64>) {
        (self.kernel, self.centers, self.coefficients)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> DomainBox {
        DomainBox::new(vec![-2.0], vec![2.0]).unwrap()
    }

    #[test]
    fn gaussian_diagonal_is_one() {
        let k = Kernel::gaussian(1.0, line()).unwrap();
        let m = kernel_matrix(&k, &[vec![0.3]]).unwrap();
        assert_eq!(m[(0, 0)], 1.0);
        let m = kernel_matrix(&k, &[vec![0.0], vec![0.0]]).unwrap();
        assert!(m.iter().all(|v| *v == 1.0));
    }

    #[test]
    fn exponential_off_diagonal() {
        let k = Kernel::matern(1.0, 1.0, line()).unwrap();
        let m = kernel_matrix(&k, &[vec![0.0], vec![1.0]]).unwrap();
        assert!((m[(0, 1)] - (-1.0f64).exp()).abs() < 1e-15);
        assert!((m[(0, 1)] - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn matern_closed_forms() {
        let dom = line();
        let k32 = Kernel::matern(2.0, 0.7, dom.clone()).unwrap();
        let k52 = Kernel::matern(3.0, 0.7, dom).unwrap();
        let r = 0.4;
        let s3 = 3f64.sqrt() * r / 0.7;
        let s5 = 5f64.sqrt() * r / 0.7;
        assert!((k32.eval(&[0.0], &[r]) - (1.0 + s3) * (-s3).exp()).abs() < 1e-14);
        assert!((k52.eval(&[0.0], &[r]) - (1.0 + s5 + s5 * s5 / 3.0) * (-s5).exp()).abs() < 1e-14);
    }

    #[test]
    fn matern_order_must_match_dimension() {
        assert!(Kernel::matern(1.5, 1.0, line()).is_err());
        assert!(Kernel::matern(1.5, 1.0, DomainBox::unit(2)).is_ok());
        assert!(Kernel::matern(0.5, 1.0, line()).is_err());
    }

    #[test]
    fn linear_kernel_is_normalized() {
        let k = Kernel::linear(DomainBox::new(vec![-1.0, 0.0], vec![2.0, 1.0]).unwrap()).unwrap();
        assert!((k.eval(&[2.0, 1.0], &[2.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!(Kernel::linear(DomainBox::new(vec![0.0], vec![1.0]).unwrap()).is_ok());
    }

    #[test]
    fn point_outside_domain_is_rejected() {
        let k = Kernel::gaussian(1.0, DomainBox::unit(1)).unwrap();
        assert!(matches!(
            kernel_matrix(&k, &[vec![1.5]]),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(matches!(
            kernel_matrix(&k, &[vec![0.5, 0.5]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rkhs_norm_examples() {
        let k = Kernel::gaussian(1.0, line()).unwrap();
        let zero = KernelExpansion::new(k.clone(), vec![vec![0.1], vec![0.5]], vec![0.0, 0.0]).unwrap();
        assert_eq!(zero.rkhs_norm().unwrap(), 0.0);
        let single = KernelExpansion::new(k.clone(), vec![vec![0.1]], vec![2.0]).unwrap();
        assert!((single.rkhs_norm().unwrap() - 2.0).abs() < 1e-15);
        let cancel = KernelExpansion::new(k, vec![vec![0.3], vec![0.3]], vec![1.0, -1.0]).unwrap();
        assert_eq!(cancel.rkhs_norm().unwrap(), 0.0);
    }

    #[test]
    fn eval_examples() {
        let k = Kernel::gaussian(1.0, line()).unwrap();
        assert_eq!(KernelExpansion::zero(k.clone()).eval(&[0.2]), 0.0);
        let f = KernelExpansion::new(k.clone(), vec![vec![0.4]], vec![1.0]).unwrap();
        assert_eq!(f.eval(&[0.4]), 1.0);
        let f = KernelExpansion::new(k, vec![vec![0.0], vec![1.0]], vec![1.0, 1.0]).unwrap();
        assert!((f.eval(&[0.0]) - (1.0 + (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn chain_apply_matches_dense() {
        let k = Kernel::matern(1.0, 0.3, DomainBox::unit(1)).unwrap();
        let pts: Vec<Vec<f64>> = [0.9, 0.1, 0.5, 0.35, 0.0, 1.0, 0.77].iter().map(|v| vec![*v]).collect();
        let chain = GramOperator::new(&k, &pts).unwrap();
        let dense = GramOperator::dense(&k, &pts).unwrap();
        assert!(chain.is_structured() && !dense.is_structured());
        let v = [0.3, -1.0, 2.0, 0.5, -0.2, 0.9, 1.1];
        for (a, b) in chain.apply(&v).iter().zip(dense.apply(&v)) {
            assert!((a - b).abs() < 1e-13);
        }
        let shift: Vec<f64> = (0..7).map(|i| 0.05 + 0.01 * i as f64).collect();
        let x1 = chain.solve_diag_shift(&shift, &v).unwrap();
        let x2 = dense.solve_diag_shift(&shift, &v).unwrap();
        for (a, b) in x1.iter().zip(&x2) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn coincident_points_fall_back_to_dense() {
        let k = Kernel::matern(1.0, 0.3, DomainBox::unit(1)).unwrap();
        let pts = vec![vec![0.2], vec![0.2], vec![0.6]];
        let op = GramOperator::new(&k, &pts).unwrap();
        assert!(!op.is_structured());
    }

    #[test]
    fn chain_eval_matches_direct() {
        let k = Kernel::matern(1.0, 0.25, DomainBox::unit(1)).unwrap();
        let centers: Vec<Vec<f64>> = [0.2, 0.8, 0.5, 0.5].iter().map(|v| vec![*v]).collect();
        let f = KernelExpansion::new(k, centers, vec![1.0, -0.5, 0.25, 2.0]).unwrap();
        let xs: Vec<Vec<f64>> = [0.0, 0.2, 0.5, 0.51, 1.0, 0.65].iter().map(|v| vec![*v]).collect();
        for (x, v) in xs.iter().zip(f.eval_many(&xs)) {
            assert!((f.eval(x) - v).abs() < 1e-13);
        }
    }

    #[test]
    fn kernel_spec_roundtrip() {
        let k = Kernel::matern(1.0, 0.5, DomainBox::unit(1)).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        assert!(s.contains("\"family\":\"matern\""));
        let back: Kernel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
        let bad = r#"{"family":"gaussian","width":-1.0,"domain":{"lower":[0.0],"upper":[1.0]}}"#;
        assert!(serde_json::from_str::<Kernel>(bad).is_err());
    }
}
