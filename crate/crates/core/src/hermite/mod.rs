//! Scaled Hermite functions Φ_α^λ, their coefficient slices, and
//! Gauss–Hermite analysis/synthesis.
//!
//! Normalization: ∫ Φ_α² = 1 with positive leading coefficient, and
//! Φ_α^λ(x) = |λ|^{n/4} Φ_α(|λ|^{1/2} x). Everything depends on |λ| only;
//! the sign of λ enters through the ladder operators.

mod ladder;
mod mehler;

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multi_index::{MultiIndex, Simplex};
use crate::quadrature::gauss_hermite_rule;
use crate::tensor::contract_all;

pub use ladder::{ladder_apply, LadderKind};
pub use mehler::{mehler_kernel, MEHLER_ONE_TERM_THRESHOLD};

const PI_QUARTER_INV: f64 = 0.751_125_544_464_942_5; // π^{-1/4}

/// Normalized Hermite functions h_0(u), …, h_kmax(u) by the three-term
/// recurrence h_{k+1} = u√(2/(k+1)) h_k − √(k/(k+1)) h_{k−1}.
pub fn hermite_functions(kmax: usize, u: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(kmax + 1);
    fill_hermite(kmax, u, &mut h);
    h
}

pub(crate) fn fill_hermite(kmax: usize, u: f64, h: &mut Vec<f64>) {
    h.clear();
    h.push(PI_QUARTER_INV * (-0.5 * u * u).exp());
    if kmax == 0 {
        return;
    }
    h.push(std::f64::consts::SQRT_2 * u * h[0]);
    for k in 1..kmax {
        let kf = k as f64;
        let next = u * (2.0 / (kf + 1.0)).sqrt() * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
        h.push(next);
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::domain(format!(
            "frequency lambda = {lambda} is excluded (must be finite and nonzero)"
        )));
    }
    Ok(())
}

/// Φ_α^λ(x) for a point x ∈ R^n.
pub fn hermite_eval(alpha: &MultiIndex, lambda: f64, x: &[f64]) -> Result<f64> {
    check_lambda(lambda)?;
    if x.len() != alpha.dim() {
        return Err(Error::domain(format!(
            "point has dimension {} but multi-index has {}",
            x.len(),
            alpha.dim()
        )));
    }
    let scale = lambda.abs().sqrt();
    let mut value = 1.0;
    for (j, &xj) in x.iter().enumerate() {
        let a = alpha.get(j) as usize;
        value *= scale.sqrt() * hermite_functions(a, scale * xj)[a];
    }
    Ok(value)
}

/// Per-axis table B[i][k] = |λ|^{1/4} h_k(|λ|^{1/2} x_i), row-major with
/// `points.len()` rows and `kmax + 1` columns.
pub(crate) fn axis_table(points: &[f64], lambda: f64, kmax: usize) -> Vec<f64> {
    let scale = lambda.abs().sqrt();
    let amp = scale.sqrt();
    let mut out = Vec::with_capacity(points.len() * (kmax + 1));
    let mut h = Vec::with_capacity(kmax + 1);
    for &x in points {
        fill_hermite(kmax, scale * x, &mut h);
        out.extend(h.iter().map(|v| amp * v));
    }
    out
}

/// Hermite coefficients of one frequency slice f^λ, on the simplex |α| ≤ K.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteSlice {
    lambda: f64,
    simplex: Arc<Simplex>,
    coeffs: Vec<Complex64>,
}

impl HermiteSlice {
    pub fn zeros(dim: usize, max_degree: usize, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let simplex = Arc::new(Simplex::new(dim, max_degree)?);
        let coeffs = vec![Complex64::new(0.0, 0.0); simplex.len()];
        Ok(Self {
            lambda,
            simplex,
            coeffs,
        })
    }

    pub fn from_coeffs(simplex: Arc<Simplex>, lambda: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        check_lambda(lambda)?;
        if coeffs.len() != simplex.len() {
            return Err(Error::data(format!(
                "coefficient array has {} entries, simplex needs {}",
                coeffs.len(),
                simplex.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::data("non-finite Hermite coefficient"));
        }
        Ok(Self {
            lambda,
            simplex,
            coeffs,
        })
    }

    /// Unit coefficient at α.
    pub fn unit(alpha: &MultiIndex, max_degree: usize, lambda: f64) -> Result<Self> {
        let mut s = Self::zeros(alpha.dim(), max_degree, lambda)?;
        *s.coeff_mut(alpha).ok_or_else(|| {
            Error::domain(format!("{alpha:?} exceeds truncation degree {max_degree}"))
        })? = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub(crate) fn from_parts_unchecked(
        simplex: Arc<Simplex>,
        lambda: f64,
        coeffs: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(simplex.len(), coeffs.len());
        Self {
            lambda,
            simplex,
            coeffs,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.simplex.dim()
    }

    pub fn max_degree(&self) -> usize {
        self.simplex.max_degree()
    }

    pub fn simplex(&self) -> &Arc<Simplex> {
        &self.simplex
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Complex64 {
        self.simplex
            .position(alpha)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn coeff_mut(&mut self, alpha: &MultiIndex) -> Option<&mut Complex64> {
        self.simplex.position(alpha).map(|i| &mut self.coeffs[i])
    }

    /// Iterates (α, c_α).
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.simplex.iter().zip(&self.coeffs)
    }

    /// Eigenvalue (2|α| + n)|λ| of H(λ) on Φ_α^λ.
    pub fn eigenvalue(&self, alpha: &MultiIndex) -> f64 {
        (2 * alpha.degree() + self.dim()) as f64 * self.lambda.abs()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Fraction of coefficient mass sitting at the truncation degree K.
    pub fn truncation_indicator(&self) -> f64 {
        let total = self.norm_sqr();
        if total == 0.0 {
            return 0.0;
        }
        let top: f64 = self.coeffs[self.simplex.degree_range(self.max_degree())]
            .iter()
            .map(|c| c.norm_sqr())
            .sum();
        top / total
    }

    /// Same function with truncation degree `k` (padding with zeros or
    /// dropping higher degrees).
    pub fn with_max_degree(&self, k: usize) -> Self {
        if k == self.max_degree() {
            return self.clone();
        }
        let simplex = Arc::new(Simplex::new(self.dim(), k).expect("dimension already valid"));
        self.resized(simplex)
    }

    pub(crate) fn resized(&self, simplex: Arc<Simplex>) -> Self {
        let n = simplex.len().min(self.coeffs.len());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); simplex.len()];
        // graded order makes the lower simplex a prefix of the larger one
        coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        Self {
            lambda: self.lambda,
            simplex,
            coeffs,
        }
    }

    /// Multiplies each c_α by `factor(α)`.
    pub fn map_diagonal(&self, mut factor: impl FnMut(&MultiIndex) -> Complex64) -> Self {
        let coeffs = self
            .iter()
            .map(|(a, &c)| if c == Complex64::new(0.0, 0.0) { c } else { c * factor(a) })
            .collect();
        Self {
            lambda: self.lambda,
            simplex: self.simplex.clone(),
            coeffs,
        }
    }

    /// Same coefficients attached to a different frequency.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            lambda,
            simplex: self.simplex.clone(),
            coeffs: self.coeffs.clone(),
        })
    }

    /// Inner product Σ a_α conj(b_α) over the union of both simplices.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn axpy(&mut self, a: Complex64, other: &Self) {
        if other.coeffs.len() > self.coeffs.len() {
            *self = self.resized(other.simplex.clone());
        }
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    /// Pointwise value of the truncated series Σ c_α Φ_α^λ(x).
    pub fn value_at(&self, x: &[f64]) -> Complex64 {
        let k = self.max_degree();
        let scale = self.lambda.abs().sqrt();
        let amp = scale.sqrt();
        let tables: Vec<Vec<f64>> = x.iter().map(|&xj| hermite_functions(k, scale * xj)).collect();
        self.iter()
            .map(|(a, &c)| {
                let mut v = 1.0;
                for (j, t) in tables.iter().enumerate() {
                    v *= amp * t[a.get(j) as usize];
                }
                c * v
            })
            .sum()
    }

    /// Synthesis on the tensor grid axes × … × axes (axis 0 fastest).
    pub fn synthesize_tensor(&self, axis_points: &[f64]) -> Vec<Complex64> {
        let k = self.max_degree();
        let n = self.dim();
        let table = axis_table(axis_points, self.lambda, k);
        let full = self.to_full_tensor();
        let mut shape = vec![k + 1; n];
        contract_all(&full, &mut shape, &table, axis_points.len())
    }

    /// Dense (K+1)^n tensor holding the simplex coefficients, zero elsewhere.
    pub(crate) fn to_full_tensor(&self) -> Vec<Complex64> {
        let k1 = self.max_degree() + 1;
        let n = self.dim();
        let mut full = vec![Complex64::new(0.0, 0.0); k1.pow(n as u32)];
        for (a, &c) in self.iter() {
            full[tensor_offset(a, k1)] = c;
        }
        full
    }

    pub(crate) fn from_full_tensor(simplex: Arc<Simplex>, lambda: f64, full: &[Complex64], k1: usize) -> Self {
        let coeffs = simplex.iter().map(|a| full[tensor_offset(a, k1)]).collect();
        Self {
            lambda,
            simplex,
            coeffs,
        }
    }
}

pub(crate) fn tensor_offset(alpha: &MultiIndex, k1: usize) -> usize {
    alpha
        .entries()
        .iter()
        .rev()
        .fold(0, |acc, &a| acc * k1 + a as usize)
}

/// Synthesis at arbitrary points (flattened, stride n).
pub fn hermite_synthesize(slice: &HermiteSlice, points: &[f64]) -> Result<Vec<Complex64>> {
    let n = slice.dim();
    if points.len() % n != 0 {
        return Err(Error::domain(format!(
            "point buffer length {} is not a multiple of n = {n}",
            points.len()
        )));
    }
    Ok(points.chunks(n).map(|x| slice.value_at(x)).collect())
}

/// Gauss–Hermite nodes rescaled to the scale of H(λ) with their plain
/// ∫ dx weights: x_i = z_i/√|λ|, W_i = w_i e^{z_i²}/√|λ|.
pub fn scaled_nodes(lambda: f64, count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_lambda(lambda)?;
    let rule = gauss_hermite_rule(count)?;
    let s = lambda.abs().sqrt();
    Ok((
        rule.nodes.iter().map(|z| z / s).collect(),
        rule.scaled_weights.iter().map(|w| w / s).collect(),
    ))
}

/// Hermite coefficients c_α = (f, Φ_α^{|λ|}) for |α| ≤ K, by a tensor
/// Gauss–Hermite rule of 2K+2 nodes per axis. Exact for f in the span of
/// {Φ_α^λ : |α| ≤ K}.
pub fn hermite_analyze<F>(f: F, dim: usize, lambda: f64, max_degree: usize) -> Result<HermiteSlice>
where
    F: Fn(&[f64]) -> Complex64,
{
    check_lambda(lambda)?;
    let simplex = Arc::new(Simplex::new(dim, max_degree)?);
    let q = 2 * max_degree + 2;
    let (nodes, weights) = scaled_nodes(lambda, q)?;

    let total = q.pow(dim as u32);
    let mut samples = Vec::with_capacity(total);
    let mut x = vec![0.0; dim];
    for flat in 0..total {
        let mut rem = flat;
        for xj in x.iter_mut() {
            *xj = nodes[rem % q];
            rem /= q;
        }
        let v = f(&x);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::data(format!("non-finite sample at {x:?}")));
        }
        samples.push(v);
    }

    let k1 = max_degree + 1;
    let table = axis_table(&nodes, lambda, max_degree);
    // M[k][i] = W_i B[i][k]
    let mut proj = vec![0.0; k1 * q];
    for i in 0..q {
        for k in 0..k1 {
            proj[k * q + i] = weights[i] * table[i * k1 + k];
        }
    }
    let mut shape = vec![q; dim];
    let full = contract_all(&samples, &mut shape, &proj, k1);
    Ok(HermiteSlice::from_full_tensor(simplex, lambda, &full, k1))
}
