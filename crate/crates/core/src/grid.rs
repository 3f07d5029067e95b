//! Rectangular sampling grids over R^n × R and sampled functions on them.
//!
//! Spatial points are cell-centred, x_i = −L + (i + ½)h with h = 2L/Nx, so
//! the grid is symmetric under x → −x. Time samples are t_k = kT/Nt on one
//! period [0, T).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multi_index::MAX_DIM;

fn check_pow2(name: &str, v: usize) -> Result<()> {
    if v < 8 || !v.is_power_of_two() {
        return Err(Error::config(name, format!("{v} must be a power of two >= 8")));
    }
    Ok(())
}

fn check_extent(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::config(name, format!("{v} must be positive and finite")));
    }
    Ok(())
}

fn check_dim(n: usize) -> Result<()> {
    if !(1..=MAX_DIM).contains(&n) {
        return Err(Error::config("n", format!("{n} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

/// Uniform cell-centred grid on the box [−L, L]^n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialGrid {
    pub n: usize,
    pub nx: usize,
    pub x_extent: f64,
}

impl SpatialGrid {
    pub fn new(n: usize, nx: usize, x_extent: f64) -> Result<Self> {
        let g = Self { n, nx, x_extent };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.n)?;
        check_pow2("nx", self.nx)?;
        check_extent("x_extent", self.x_extent)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.x_extent / self.nx as f64
    }

    pub fn axis_points(&self) -> Vec<f64> {
        let h = self.dx();
        (0..self.nx)
            .map(|i| -self.x_extent + (i as f64 + 0.5) * h)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.nx.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.n as i32)
    }

    /// Coordinates of flat index `flat` (axis 0 fastest).
    pub fn point(&self, flat: usize, axis: &[f64], out: &mut [f64]) {
        let mut rem = flat;
        for o in out.iter_mut().take(self.n) {
            *o = axis[rem % self.nx];
            rem /= self.nx;
        }
    }

    /// All points, flattened with stride n.
    pub fn points(&self) -> Vec<f64> {
        let axis = self.axis_points();
        let mut out = vec![0.0; self.len() * self.n];
        for (flat, chunk) in out.chunks_mut(self.n).enumerate() {
            self.point(flat, &axis, chunk);
        }
        out
    }

    /// Flat index of −x for the point with flat index `flat`.
    pub fn mirror(&self, flat: usize) -> usize {
        let mut rem = flat;
        let mut out = 0;
        let mut stride = 1;
        for _ in 0..self.n {
            let i = rem % self.nx;
            rem /= self.nx;
            out += (self.nx - 1 - i) * stride;
            stride *= self.nx;
        }
        out
    }

    pub fn refined(&self) -> Self {
        Self {
            nx: self.nx * 2,
            ..*self
        }
    }
}

/// Geometry of a space-time grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub nx: usize,
    pub x_extent: f64,
    pub nt: usize,
    pub t_extent: f64,
}

impl GridSpec {
    pub fn new(n: usize, nx: usize, x_extent: f64, nt: usize, t_extent: f64) -> Result<Self> {
        let g = Self {
            n,
            nx,
            x_extent,
            nt,
            t_extent,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        self.spatial().validate()?;
        check_pow2("nt", self.nt)?;
        check_extent("t_extent", self.t_extent)
    }

    pub fn spatial(&self) -> SpatialGrid {
        SpatialGrid {
            n: self.n,
            nx: self.nx,
            x_extent: self.x_extent,
        }
    }

    pub fn dt(&self) -> f64 {
        self.t_extent / self.nt as f64
    }

    pub fn t_points(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..self.nt).map(|k| k as f64 * dt).collect()
    }

    /// λ_m = 2πm/T.
    pub fn lambda(&self, m: i64) -> f64 {
        2.0 * std::f64::consts::PI * m as f64 / self.t_extent
    }

    /// Nonzero frequency indices −Nt/2, …, −1, 1, …, Nt/2 − 1.
    pub fn frequency_indices(&self) -> impl Iterator<Item = i64> {
        let half = (self.nt / 2) as i64;
        (-half..half).filter(|&m| m != 0)
    }

    /// Position of frequency index m in an unshifted FFT buffer.
    pub fn fft_bin(&self, m: i64) -> usize {
        m.rem_euclid(self.nt as i64) as usize
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda(1)
    }

    /// L ≥ √(2K+1)/√λ_min: the top Hermite mode at the smallest frequency
    /// turns inside the box.
    pub fn resolves(&self, max_degree: usize) -> bool {
        self.x_extent >= ((2 * max_degree + 1) as f64 / self.lambda_min()).sqrt()
    }

    pub fn spatial_len(&self) -> usize {
        self.spatial().len()
    }

    pub fn len(&self) -> usize {
        self.spatial_len() * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spatial().cell_volume() * self.dt()
    }

    /// Both axes doubled, extents unchanged.
    pub fn refined(&self) -> Self {
        Self {
            nx: self.nx * 2,
            nt: self.nt * 2,
            ..*self
        }
    }
}

/// Complex samples of f(x, t); spatial indices fastest, time slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::data(format!(
                "grid function has {} samples, spec needs {}",
                values.len(),
                spec.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::data("non-finite grid sample"));
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); spec.len()],
            spec,
        }
    }

    /// Samples `f(x, t)` at every grid point.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64], f64) -> Complex64) -> Result<Self> {
        let axis = spec.spatial().axis_points();
        let ts = spec.t_points();
        let sp = spec.spatial();
        let mut x = vec![0.0; spec.n];
        let mut values = Vec::with_capacity(spec.len());
        for &t in &ts {
            for s in 0..sp.len() {
                sp.point(s, &axis, &mut x);
                values.push(f(&x, t));
            }
        }
        Self::new(spec, values)
    }

    pub(crate) fn from_parts_unchecked(spec: GridSpec, values: Vec<Complex64>) -> Self {
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, spatial: usize, k: usize) -> Complex64 {
        self.values[k * self.spec.spatial_len() + spatial]
    }

    /// Discrete L² norm squared with cell-volume weights.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.spec.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(GridSpec::new(1, 12, 1.0, 64, 1.0).is_err());
        assert!(GridSpec::new(1, 4, 1.0, 64, 1.0).is_err());
        assert!(GridSpec::new(1, 64, -1.0, 64, 1.0).is_err());
        assert!(GridSpec::new(4, 8, 1.0, 8, 1.0).is_err());
        assert!(GridSpec::new(2, 16, 3.0, 8, 1.0).is_ok());
    }

    #[test]
    fn symmetric_points_and_mirror() {
        let g = SpatialGrid::new(2, 8, 2.0).unwrap();
        let pts = g.points();
        for flat in 0..g.len() {
            let m = g.mirror(flat);
            for j in 0..2 {
                assert!((pts[flat * 2 + j] + pts[m * 2 + j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn resolution_flag() {
        let g = GridSpec::new(1, 64, 5.0, 64, 2.0 * std::f64::consts::PI).unwrap();
        assert!(g.resolves(12)); // √25 = 5
        assert!(!g.resolves(13));
    }

    #[test]
    fn frequencies_skip_zero() {
        let g = GridSpec::new(1, 8, 1.0, 8, 1.0).unwrap();
        let ms: Vec<i64> = g.frequency_indices().collect();
        assert_eq!(ms, vec![-4, -3, -2, -1, 1, 2, 3]);
        assert_eq!(g.fft_bin(-1), 7);
    }

    #[test]
    fn non_finite_rejected() {
        let g = GridSpec::new(1, 8, 1.0, 8, 1.0).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); g.len()];
        v[3].im = f64::INFINITY;
        assert!(matches!(GridFunction::new(g, v), Err(Error::Data(_))));
    }
}
