//! The joint diagonalizing transform of G: Fourier in t, then Hermite
//! expansion of each frequency slice f^λ in the basis Φ_α^{|λ|}.
//!
//! Conventions: f^λ(x) = ∫ f(x,t) e^{iλt} dt and
//! f(x,t) = (2π)^{−1} ∫ e^{−iλt} f^λ(x) dλ, discretized on one period T with
//! λ_m = 2πm/T, so that ‖f‖² = (1/T) Σ_m Σ_α |c_α(λ_m)|². The m = 0 bin is
//! never part of [`SpectralCoefficients`]; its energy is reported instead.
//!
//! Spatial analysis on the uniform grid is a discrete least-squares fit of
//! the sampled basis {Φ_k^{|λ|}(x_i)} (one pseudo-inverse per axis), which is
//! exact for slices in the span of the truncated basis.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::hermite::{axis_table, HermiteSlice};
use crate::multi_index::Simplex;
use crate::tensor::{contract_all, contract_axis};

/// Hermite coefficients c_α(λ_m) for every nonzero frequency index m.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoefficients {
    spec: GridSpec,
    slices: BTreeMap<i64, HermiteSlice>,
    zero_mode_energy: f64,
}

impl SpectralCoefficients {
    /// All-zero coefficients on `spec` with truncation `max_degree`.
    pub fn zeros(spec: GridSpec, max_degree: usize) -> Result<Self> {
        spec.validate()?;
        let simplex = Arc::new(Simplex::new(spec.n, max_degree)?);
        let slices = spec
            .frequency_indices()
            .map(|m| {
                let coeffs = vec![Complex64::new(0.0, 0.0); simplex.len()];
                (m, HermiteSlice::from_parts_unchecked(simplex.clone(), spec.lambda(m), coeffs))
            })
            .collect();
        Ok(Self {
            spec,
            slices,
            zero_mode_energy: 0.0,
        })
    }

    /// Builds coefficients from explicit slices; each slice's λ must equal
    /// 2πm/T and all slices must share one truncation degree.
    pub fn from_slices(spec: GridSpec, slices: BTreeMap<i64, HermiteSlice>) -> Result<Self> {
        spec.validate()?;
        let half = (spec.nt / 2) as i64;
        let mut k = None;
        for (&m, s) in &slices {
            if m == 0 || m < -half || m >= half {
                return Err(Error::data(format!("frequency index {m} not representable")));
            }
            let expect = spec.lambda(m);
            if (s.lambda() - expect).abs() > 1e-12 * expect.abs() {
                return Err(Error::data(format!(
                    "slice {m} carries lambda {} instead of {expect}",
                    s.lambda()
                )));
            }
            if s.dim() != spec.n {
                return Err(Error::data("slice dimension differs from grid"));
            }
            match k {
                None => k = Some(s.max_degree()),
                Some(k0) if k0 != s.max_degree() => {
                    return Err(Error::data("slices disagree on truncation degree"))
                }
                _ => {}
            }
        }
        let k = k.unwrap_or(0);
        let mut out = Self::zeros(spec, k)?;
        for (m, s) in slices {
            out.slices.insert(m, s);
        }
        Ok(out)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn max_degree(&self) -> usize {
        self.slices.values().next().map_or(0, |s| s.max_degree())
    }

    pub fn slices(&self) -> &BTreeMap<i64, HermiteSlice> {
        &self.slices
    }

    pub fn slice(&self, m: i64) -> Option<&HermiteSlice> {
        self.slices.get(&m)
    }

    pub fn slice_mut(&mut self, m: i64) -> Option<&mut HermiteSlice> {
        self.slices.get_mut(&m)
    }

    /// ‖(1/T)∫ f dt‖² of the input, i.e. the energy of the dropped m = 0 bin
    /// as a function on R^n.
    pub fn zero_mode_energy(&self) -> f64 {
        self.zero_mode_energy
    }

    /// (2π)^{−1} Σ_m Δλ Σ_α |c_α(λ_m)|².
    pub fn energy(&self) -> f64 {
        self.slices.values().map(|s| s.norm_sqr()).sum::<f64>() / self.spec.t_extent
    }

    /// Largest per-slice fraction of mass at the truncation degree.
    pub fn truncation_indicator(&self) -> f64 {
        self.slices
            .values()
            .map(|s| s.truncation_indicator())
            .fold(0.0, f64::max)
    }

    /// Applies a per-slice map in parallel and re-pads the results to a
    /// common truncation degree.
    pub fn try_map_slices<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&HermiteSlice) -> Result<HermiteSlice> + Sync,
    {
        let mapped: Result<Vec<(i64, HermiteSlice)>> = self
            .slices
            .par_iter()
            .map(|(&m, s)| f(s).map(|o| (m, o)))
            .collect();
        let mapped = mapped?;
        let k = mapped.iter().map(|(_, s)| s.max_degree()).max().unwrap_or(0);
        let simplex = Arc::new(Simplex::new(self.spec.n, k)?);
        let slices = mapped
            .into_iter()
            .map(|(m, s)| {
                let s = if s.max_degree() == k { s } else { s.resized(simplex.clone()) };
                (m, s)
            })
            .collect();
        Ok(Self {
            spec: self.spec,
            slices,
            zero_mode_energy: self.zero_mode_energy,
        })
    }

    pub fn map_slices<F>(&self, f: F) -> Self
    where
        F: Fn(&HermiteSlice) -> HermiteSlice + Sync,
    {
        self.try_map_slices(|s| Ok(f(s))).expect("infallible map")
    }

    /// Same functions with a different truncation degree.
    pub fn with_max_degree(&self, k: usize) -> Self {
        self.map_slices(|s| s.with_max_degree(k))
    }

    /// Largest coefficient difference, after padding both to a common degree.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let k = self.max_degree().max(other.max_degree());
        self.slices
            .iter()
            .map(|(m, a)| {
                let a = a.with_max_degree(k);
                let b = other
                    .slices
                    .get(m)
                    .map(|b| b.with_max_degree(k))
                    .unwrap_or_else(|| HermiteSlice::zeros(a.dim(), k, a.lambda()).expect("valid"));
                a.coeffs()
                    .iter()
                    .zip(b.coeffs())
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Discrete inner product (1/T) Σ_m Σ_α a conj(b).
    pub fn inner(&self, other: &Self) -> Complex64 {
        let k = self.max_degree().max(other.max_degree());
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, a) in &self.slices {
            if let Some(b) = other.slices.get(m) {
                acc += a.with_max_degree(k).inner(&b.with_max_degree(k));
            }
        }
        acc / self.spec.t_extent
    }
}

/// Per-axis least-squares analysis matrix, row-major (K+1) × Nx.
fn analysis_matrix(points: &[f64], lambda: f64, max_degree: usize) -> Vec<f64> {
    let k1 = max_degree + 1;
    let nx = points.len();
    let table = axis_table(points, lambda, max_degree);
    let b = DMatrix::from_row_slice(nx, k1, &table);
    let svd = b.svd(true, true);
    let smax = svd.singular_values.max();
    let pinv = svd
        .pseudo_inverse(1e-4 * smax)
        .expect("both singular-vector sets were computed");
    let mut out = Vec::with_capacity(k1 * nx);
    for k in 0..k1 {
        for i in 0..nx {
            out.push(pinv[(k, i)]);
        }
    }
    out
}

fn fft_along_time(values: &mut [Complex64], spatial: usize, nt: usize, direction: FftDirection) {
    let fft = FftPlanner::new().plan_fft(nt, direction);
    let mut buf = vec![Complex64::new(0.0, 0.0); nt];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for s in 0..spatial {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = values[k * spatial + s];
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (k, b) in buf.iter().enumerate() {
            values[k * spatial + s] = *b;
        }
    }
}

/// f ↦ {c_α(λ_m)}.
pub fn forward_transform(f: &GridFunction, max_degree: usize) -> Result<SpectralCoefficients> {
    let spec = *f.spec();
    if !spec.resolves(max_degree) {
        return Err(Error::Capability(format!(
            "grid half-width {} below sqrt(2K+1)/sqrt(lambda_min) = {:.4} for K = {max_degree}",
            spec.x_extent,
            ((2 * max_degree + 1) as f64 / spec.lambda_min()).sqrt()
        )));
    }
    if f.values().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::data("non-finite grid sample"));
    }
    let sp = spec.spatial();
    let ns = sp.len();
    let nt = spec.nt;

    // f^{λ_m}(x) = Δt Σ_k f(x, t_k) e^{+2πimk/Nt}
    let mut hat = f.values().to_vec();
    fft_along_time(&mut hat, ns, nt, FftDirection::Inverse);
    let dt = spec.dt();
    hat.iter_mut().for_each(|v| *v *= dt);

    let zero_mode_energy = hat[..ns]
        .iter()
        .map(|v| (v / spec.t_extent).norm_sqr())
        .sum::<f64>()
        * sp.cell_volume();

    let points = sp.axis_points();
    let k1 = max_degree + 1;
    let simplex = Arc::new(Simplex::new(spec.n, max_degree)?);
    let abs_ms: Vec<i64> = {
        let mut v: Vec<i64> = spec.frequency_indices().map(|m| m.abs()).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let matrices: HashMap<i64, Vec<f64>> = abs_ms
        .par_iter()
        .map(|&am| (am, analysis_matrix(&points, spec.lambda(am), max_degree)))
        .collect();

    let ms: Vec<i64> = spec.frequency_indices().collect();
    let slices: BTreeMap<i64, HermiteSlice> = ms
        .par_iter()
        .map(|&m| {
            let bin = spec.fft_bin(m);
            let data = &hat[bin * ns..(bin + 1) * ns];
            let mut shape = vec![spec.nx; spec.n];
            let full = contract_all(data, &mut shape, &matrices[&m.abs()], k1);
            (m, HermiteSlice::from_full_tensor(simplex.clone(), spec.lambda(m), &full, k1))
        })
        .collect();

    Ok(SpectralCoefficients {
        spec,
        slices,
        zero_mode_energy,
    })
}

/// {c_α(λ_m)} ↦ f(x, t_k) = (1/T) Σ_m e^{−iλ_m t_k} Σ_α c_α(λ_m) Φ_α^{λ_m}(x).
pub fn inverse_transform(c: &SpectralCoefficients) -> GridFunction {
    let spec = c.spec;
    let sp = spec.spatial();
    let ns = sp.len();
    let points = sp.axis_points();
    let synthesized: Vec<(usize, Vec<Complex64>)> = c
        .slices
        .par_iter()
        .map(|(&m, s)| (spec.fft_bin(m), s.synthesize_tensor(&points)))
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); ns * spec.nt];
    for (bin, data) in synthesized {
        values[bin * ns..(bin + 1) * ns].copy_from_slice(&data);
    }
    fft_along_time(&mut values, ns, spec.nt, FftDirection::Forward);
    let scale = 1.0 / spec.t_extent;
    values.iter_mut().for_each(|v| *v *= scale);
    GridFunction::from_parts_unchecked(spec, values)
}

/// G in the joint eigenbasis: c_α(λ) ↦ (2|α| + n)|λ| c_α(λ).
pub fn apply_grushin(c: &SpectralCoefficients) -> SpectralCoefficients {
    c.map_slices(|s| {
        let lam = s.lambda().abs();
        let n = s.dim();
        s.map_diagonal(|a| Complex64::new((2 * a.degree() + n) as f64 * lam, 0.0))
    })
}

/// How D_r reads the time axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeAxis {
    /// Centred window [−T/2, T/2); samples outside read zero.
    Window,
    /// One period of a T-periodic function; needs r² to be an integer so that
    /// f(·, r²t) is again T-periodic.
    Periodic,
}

/// Scale parameter of the nonisotropic dilation D_r.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DilationParams {
    r: f64,
    time: TimeAxis,
}

impl DilationParams {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("dilation scale r = {r} must be positive")));
        }
        Ok(Self {
            r,
            time: TimeAxis::Window,
        })
    }

    pub fn periodic(r: f64) -> Result<Self> {
        let d = Self::new(r)?;
        let r2 = r * r;
        if (r2 - r2.round()).abs() > 1e-12 * r2 || r2.round() < 1.0 {
            return Err(Error::domain(format!(
                "periodic dilation needs an integer r^2, got {r2}"
            )));
        }
        Ok(Self {
            time: TimeAxis::Periodic,
            ..d
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn time_axis(&self) -> TimeAxis {
        self.time
    }
}

/// Trigonometric interpolation matrix (row-major, targets × samples) for a
/// periodic grid `x_j = origin + j·period/N`. Targets outside
/// `[lo, hi]` get a zero row.
fn trig_interp_matrix(
    n: usize,
    origin: f64,
    period: f64,
    targets: &[f64],
    window: Option<(f64, f64)>,
) -> Vec<Complex64> {
    let h = period / n as f64;
    let half = (n / 2) as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); targets.len() * n];
    for (i, &y) in targets.iter().enumerate() {
        if let Some((lo, hi)) = window {
            if y < lo || y > hi {
                continue;
            }
        }
        for j in 0..n {
            let d = y - (origin + j as f64 * h);
            let w = 2.0 * std::f64::consts::PI * d / period;
            // Σ_{|ξ|<N/2} e^{iξw} + cos(N w/2), all over N
            let mut acc = (half as f64 * w).cos();
            for xi in 1..half {
                acc += 2.0 * (xi as f64 * w).cos();
            }
            acc += 1.0;
            out[i * n + j] = Complex64::new(acc / n as f64, 0.0);
        }
    }
    out
}

/// D_r f(x,t) = r^{n+2} f(rx, r²t), resampled by band-limited trigonometric
/// interpolation in t and in each spatial axis.
///
/// With [`TimeAxis::Window`] the time axis is the centred window [−T/2, T/2)
/// (t_k ≥ T/2 stands for t_k − T) and D_r acts on functions localized in t;
/// then ‖D_r f‖² = r^{n+2}‖f‖². With [`TimeAxis::Periodic`] f is read as
/// T-periodic, D_r maps frequency m to r²m, and ‖D_r f‖² = r^{n+4}‖f‖² over
/// one period. Targets with |r x_j| > L (or |r² t| > T/2 in a window) read
/// zero.
pub fn nonisotropic_dilate(f: &GridFunction, d: DilationParams) -> GridFunction {
    let r = d.r;
    if r == 1.0 {
        return f.clone();
    }
    let spec = *f.spec();
    let sp = spec.spatial();
    let l = spec.x_extent;
    let h = sp.dx();
    let xs: Vec<f64> = sp.axis_points().iter().map(|x| r * x).collect();
    let mx = trig_interp_matrix(spec.nx, -l + 0.5 * h, 2.0 * l, &xs, Some((-l, l)));
    let period = spec.t_extent;
    let mt = match d.time {
        TimeAxis::Window => {
            let ts: Vec<f64> = spec
                .t_points()
                .iter()
                .map(|&t| r * r * if t >= 0.5 * period { t - period } else { t })
                .collect();
            trig_interp_matrix(spec.nt, 0.0, period, &ts, Some((-0.5 * period, 0.5 * period)))
        }
        TimeAxis::Periodic => {
            let ts: Vec<f64> = spec.t_points().iter().map(|t| (r * r * t).rem_euclid(period)).collect();
            trig_interp_matrix(spec.nt, 0.0, period, &ts, None)
        }
    };

    let mut shape = vec![spec.nx; spec.n];
    shape.push(spec.nt);
    let mut data = f.values().to_vec();
    for axis in 0..spec.n {
        data = contract_axis(&data, &shape, axis, &mx, spec.nx);
    }
    data = contract_axis(&data, &shape, spec.n, &mt, spec.nt);
    let amp = r.powi(spec.n as i32 + 2);
    data.iter_mut().for_each(|v| *v *= amp);
    GridFunction::from_parts_unchecked(spec, data)
}
