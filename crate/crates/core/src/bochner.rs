//! Bochner–Riesz means B_R^δ = (1 − G/R)_+^δ and S_R^δ = (1 − H/R)_+^δ, the
//! slice dilation relating them, and the dyadic Hardy–Littlewood maximal
//! function with the pointwise domination check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::truncated_power;
use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::hermite::HermiteSlice;
use crate::lab::lp_norm_abs;
use crate::transform::SpectralCoefficients;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszMeanSpec {
    pub r: f64,
    pub delta: f64,
}

impl RieszMeanSpec {
    pub fn new(r: f64, delta: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("threshold R = {r} must be positive")));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::domain(format!("order delta = {delta} must be >= 0")));
        }
        Ok(Self { r, delta })
    }
}

fn real(v: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(v, 0.0)
}

/// (1 − (2|α|+n)|λ|/R)_+^δ on one slice of the full operator.
pub fn bochner_riesz_slice(spec: RieszMeanSpec, s: &HermiteSlice) -> HermiteSlice {
    let lam = s.lambda().abs();
    let n = s.dim();
    s.map_diagonal(|a| real(truncated_power((2 * a.degree() + n) as f64 * lam / spec.r, spec.delta)))
}

pub fn bochner_riesz_apply(spec: RieszMeanSpec, c: &SpectralCoefficients) -> SpectralCoefficients {
    c.map_slices(|s| bochner_riesz_slice(spec, s))
}

/// Hermite means S_R^δ: per-degree factor (1 − (2k+n)/R)_+^δ regardless of
/// the slice's scale.
pub fn hermite_bochner_riesz(spec: RieszMeanSpec, s: &HermiteSlice) -> HermiteSlice {
    let n = s.dim();
    s.map_diagonal(|a| real(truncated_power((2 * a.degree() + n) as f64 / spec.r, spec.delta)))
}

/// x ↦ g(√s x) for g given on `slice`; Φ_α^λ(√s x) = s^{−n/4} Φ_α^{λs}(x), so
/// the result lives at scale λs with coefficients times s^{−n/4}.
pub fn slice_dilate(slice: &HermiteSlice, s: f64) -> Result<HermiteSlice> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("slice dilation s = {s} must be positive")));
    }
    let amp = s.powf(-(slice.dim() as f64) / 4.0);
    let mut out = slice.with_lambda(slice.lambda() * s)?;
    out.coeffs_mut().iter_mut().for_each(|v| *v *= amp);
    Ok(out)
}

/// (1 − H(λ))_+^δ computed as δ_{|λ|} S_{1/|λ|}^δ δ_{|λ|}^{−1}.
pub fn conjugated_hermite_mean(delta: f64, s: &HermiteSlice) -> Result<HermiteSlice> {
    let a = s.lambda().abs();
    let unit = slice_dilate(s, 1.0 / a)?;
    let mean = hermite_bochner_riesz(RieszMeanSpec::new(1.0 / a, delta)?, &unit);
    slice_dilate(&mean, a)
}

/// Dyadic centred maximal function on a spatial grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalProfile {
    pub values: Vec<f64>,
    pub radii_used: Vec<f64>,
}

/// Radii h·2^{i−1}, i = 0, 1, …, from half a cell (the centre cell alone) up
/// to the first radius covering the whole box.
pub fn dyadic_radii(grid: &SpatialGrid) -> Vec<f64> {
    let h = grid.dx();
    let diam = 2.0 * grid.x_extent * (grid.n as f64).sqrt();
    let mut out = vec![0.5 * h];
    while *out.last().expect("nonempty") < diam {
        let r = 2.0 * out.last().expect("nonempty");
        out.push(r);
    }
    out
}

/// Mg(x) = max over `radii` of the average of g over grid points in the
/// closed ball B(x, r).
pub fn hardy_littlewood_maximal_with(grid: &SpatialGrid, g: &[f64], radii: &[f64]) -> Result<MaximalProfile> {
    grid.validate()?;
    if g.len() != grid.len() {
        return Err(Error::data(format!("{} values on a grid of {}", g.len(), grid.len())));
    }
    if let Some(v) = g.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!("maximal function needs finite g >= 0, found {v}")));
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("radii must be non-empty and increasing"));
    }
    let n = grid.n;
    let pts = grid.points();
    let r2: Vec<f64> = radii.iter().map(|r| r * r).collect();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|a| {
            let x = &pts[a * n..(a + 1) * n];
            let mut sums = vec![0.0; radii.len()];
            let mut counts = vec![0usize; radii.len()];
            for (b, &gb) in g.iter().enumerate() {
                let y = &pts[b * n..(b + 1) * n];
                let d2: f64 = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum();
                let bin = r2.partition_point(|&r| r < d2 * (1.0 - 1e-12));
                if bin < radii.len() {
                    sums[bin] += gb;
                    counts[bin] += 1;
                }
            }
            let (mut s, mut c, mut best) = (0.0, 0usize, 0.0f64);
            for (si, ci) in sums.iter().zip(&counts) {
                s += si;
                c += ci;
                if c > 0 {
                    best = best.max(s / c as f64);
                }
            }
            best
        })
        .collect();
    Ok(MaximalProfile {
        values,
        radii_used: radii.to_vec(),
    })
}

pub fn hardy_littlewood_maximal(grid: &SpatialGrid, g: &[f64]) -> Result<MaximalProfile> {
    hardy_littlewood_maximal_with(grid, g, &dyadic_radii(grid))
}

/// Log-spaced thresholds, `per_decade` per factor of ten, across [lo, hi].
pub fn log_spaced(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let count = ((decades * per_decade as f64).ceil() as usize).max(1) + 1;
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Default threshold set: 33 per decade across [n|λ|, (4K+n)|λ|].
pub fn default_r_set(n: usize, max_degree: usize, lambda: f64) -> Vec<f64> {
    let a = lambda.abs();
    log_spaced(n as f64 * a, (4 * max_degree + n) as f64 * a, 33)
}

/// Inserts the geometric midpoint between neighbouring thresholds.
pub fn refine_r_set(r_set: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * r_set.len());
    for w in r_set.windows(2) {
        out.push(w[0]);
        out.push((w[0] * w[1]).sqrt());
    }
    out.extend(r_set.last());
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub delta: f64,
    pub lambda: f64,
    pub threshold_met: bool,
    pub r_count: usize,
    /// max_x sup_R |S_R^δ f(x)| / (Mf(x) + Mf(−x))
    pub c_emp: f64,
    pub c_emp_refined: f64,
    /// max_x sup_R |S_R^δ f(x)| / Mf(x), without the reflected term
    pub one_sided: f64,
    pub stable: bool,
}

const GUARD: f64 = 1e-14;

fn domination_constants(grid: &SpatialGrid, f: &HermiteSlice, delta: f64, r_set: &[f64], mf: &[f64]) -> Result<(f64, f64)> {
    let axis = grid.axis_points();
    let means: Vec<Vec<f64>> = r_set
        .par_iter()
        .map(|&r| {
            let s = bochner_riesz_slice(RieszMeanSpec::new(r, delta)?, f);
            Ok(s.synthesize_tensor(&axis).iter().map(|v| v.norm()).collect())
        })
        .collect::<Result<_>>()?;
    let (mut two, mut one) = (0.0f64, 0.0f64);
    for x in 0..grid.len() {
        let num = means.iter().map(|m| m[x]).fold(0.0, f64::max);
        let dom = mf[x] + mf[grid.mirror(x)];
        if num >= GUARD || dom >= GUARD {
            two = two.max(num / dom);
        }
        if num >= GUARD || mf[x] >= GUARD {
            one = one.max(num / mf[x]);
        }
    }
    Ok((two, one))
}

/// Empirical constant in sup_R |S_R^δ f(x)| ≤ C (Mf(x) + Mf(−x)) on the grid,
/// with S_R^δ the means of H(λ) at the slice's λ, and its change when
/// `r_set` is refined twofold.
pub fn maximal_domination_check(grid: &SpatialGrid, f: &HermiteSlice, delta: f64, r_set: &[f64]) -> Result<DominationReport> {
    if f.dim() != grid.n {
        return Err(Error::domain("slice and grid dimensions differ"));
    }
    if r_set.is_empty() {
        return Err(Error::Input("empty threshold set".into()));
    }
    let vals: Vec<f64> = f.synthesize_tensor(&grid.axis_points()).iter().map(|v| v.norm()).collect();
    let mf = hardy_littlewood_maximal(grid, &vals)?.values;
    let (c_emp, one_sided) = domination_constants(grid, f, delta, r_set, &mf)?;
    let (c_emp_refined, _) = domination_constants(grid, f, delta, &refine_r_set(r_set), &mf)?;
    let stable = if c_emp == 0.0 {
        c_emp_refined == 0.0
    } else {
        (c_emp_refined / c_emp - 1.0).abs() < 0.25
    };
    Ok(DominationReport {
        delta,
        lambda: f.lambda(),
        threshold_met: delta > (grid.n as f64 - 1.0) / 2.0 + 1.0 / 6.0,
        r_count: r_set.len(),
        c_emp,
        c_emp_refined,
        one_sided,
        stable,
    })
}

/// ‖(Σ_j (Mf_j)²)^{1/2}‖_p / ‖(Σ_j f_j²)^{1/2}‖_p for one family of
/// non-negative grid functions; `None` when the denominator vanishes.
pub fn fefferman_stein_ratio(grid: &SpatialGrid, family: &[Vec<f64>], p: f64) -> Result<Option<f64>> {
    let maxed: Vec<Vec<f64>> = family
        .iter()
        .map(|f| hardy_littlewood_maximal(grid, f).map(|m| m.values))
        .collect::<Result<_>>()?;
    let square = |fs: &[Vec<f64>]| -> Vec<f64> {
        (0..grid.len())
            .map(|x| fs.iter().map(|f| f[x] * f[x]).sum::<f64>().sqrt())
            .collect()
    };
    let den = lp_norm_abs(square(family), grid.cell_volume(), p)?;
    if den < GUARD {
        return Ok(None);
    }
    let num = lp_norm_abs(square(&maxed), grid.cell_volume(), p)?;
    Ok(Some(num / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::multi_index::MultiIndex;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn random_slice(n: usize, k: usize, lam: f64, seed: u64) -> HermiteSlice {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut s = HermiteSlice::zeros(n, k, lam).unwrap();
        for v in s.coeffs_mut() {
            *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        s
    }

    #[test]
    fn high_frequencies_vanish() {
        let g = GridSpec::new(1, 16, 8.0, 16, 2.0 * PI).unwrap();
        let mut c = SpectralCoefficients::zeros(g, 4).unwrap();
        for m in g.frequency_indices() {
            c.slice_mut(m).unwrap().coeffs_mut().iter_mut().for_each(|v| *v = Complex64::new(1.0, 0.0));
        }
        let out = bochner_riesz_apply(RieszMeanSpec::new(1.0, 0.5).unwrap(), &c);
        for (m, s) in out.slices() {
            assert!(m.abs() < 1 || s.norm_sqr() == 0.0);
        }
    }

    #[test]
    fn half_factor() {
        let s = HermiteSlice::unit(&MultiIndex::zero(1), 3, 0.5).unwrap();
        let out = bochner_riesz_slice(RieszMeanSpec::new(1.0, 1.0).unwrap(), &s);
        assert!((out.coeffs()[0].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hermite_means() {
        let s = random_slice(1, 6, 1.0, 1);
        let z = hermite_bochner_riesz(RieszMeanSpec::new(0.9, 1.0).unwrap(), &s);
        assert!(z.norm_sqr() == 0.0);
        let id = hermite_bochner_riesz(RieszMeanSpec::new(1e9, 0.0).unwrap(), &s);
        assert_eq!(id, s);
    }

    #[test]
    fn conjugation_identity() {
        for lam in [0.3, -1.7, 4.0] {
            for delta in [0.0, 0.5, 1.0, 2.5] {
                let s = random_slice(2, 8, lam, 2);
                let direct = bochner_riesz_slice(RieszMeanSpec::new(1.0, delta).unwrap(), &s);
                let conj = conjugated_hermite_mean(delta, &s).unwrap();
                assert_eq!(conj.lambda(), s.lambda());
                for (a, b) in direct.coeffs().iter().zip(conj.coeffs()) {
                    assert!((a - b).norm() < 1e-14, "lam={lam} delta={delta}");
                }
            }
        }
    }

    #[test]
    fn slice_dilation_matches_pointwise() {
        let s = random_slice(1, 5, 1.3, 3);
        let d = slice_dilate(&s, 2.5).unwrap();
        for x in [-0.7, 0.0, 1.2] {
            let a = d.value_at(&[x]);
            let b = s.value_at(&[2.5f64.sqrt() * x]);
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn maximal_of_constant() {
        let g = SpatialGrid::new(2, 8, 1.0).unwrap();
        let m = hardy_littlewood_maximal(&g, &vec![3.0; g.len()]).unwrap();
        assert!(m.values.iter().all(|v| (v - 3.0).abs() < 1e-14));
    }

    #[test]
    fn maximal_of_indicator() {
        let g = SpatialGrid::new(1, 64, 8.0).unwrap();
        let pts = g.axis_points();
        let f: Vec<f64> = pts.iter().map(|x| if x.abs() <= 1.0 { 1.0 } else { 0.0 }).collect();
        let m = hardy_littlewood_maximal(&g, &f).unwrap();
        let i = pts.iter().position(|&x| (x - 3.125).abs() < 1e-12).unwrap();
        let expect = 1.0 / (pts[i] + 1.0);
        assert!((m.values[i] / expect - 1.0).abs() < 0.02, "{} vs {expect}", m.values[i]);
        assert!(m.values.iter().zip(&f).all(|(a, b)| a >= b));
    }

    #[test]
    fn maximal_monotone_and_rejects_negative() {
        let g = SpatialGrid::new(1, 32, 4.0).unwrap();
        let a: Vec<f64> = g.axis_points().iter().map(|x| (-x * x).exp()).collect();
        let b: Vec<f64> = a.iter().zip(g.axis_points()).map(|(v, x)| v + 0.1 * x.cos().abs()).collect();
        let ma = hardy_littlewood_maximal(&g, &a).unwrap();
        let mb = hardy_littlewood_maximal(&g, &b).unwrap();
        assert!(ma.values.iter().zip(&mb.values).all(|(x, y)| x <= y));
        let mut neg = a.clone();
        neg[3] = -1.0;
        assert!(hardy_littlewood_maximal(&g, &neg).is_err());
    }

    #[test]
    fn domination_zero_and_ground_state() {
        let g = SpatialGrid::new(1, 64, 8.0).unwrap();
        let r = default_r_set(1, 8, 1.0);
        let z = HermiteSlice::zeros(1, 8, 1.0).unwrap();
        let rep = maximal_domination_check(&g, &z, 1.0, &r).unwrap();
        assert_eq!(rep.c_emp, 0.0);
        let f = HermiteSlice::unit(&MultiIndex::zero(1), 8, 1.0).unwrap();
        let rep = maximal_domination_check(&g, &f, 1.0, &r).unwrap();
        assert!(rep.c_emp.is_finite() && rep.c_emp > 0.0);
        assert!(rep.stable && rep.threshold_met);
    }

    #[test]
    fn fefferman_stein_of_zero() {
        let g = SpatialGrid::new(1, 16, 2.0).unwrap();
        assert_eq!(fefferman_stein_ratio(&g, &[vec![0.0; 16]], 2.0).unwrap(), None);
    }

    #[test]
    fn refine_doubles() {
        let r = log_spaced(1.0, 10.0, 4);
        let f = refine_r_set(&r);
        assert_eq!(f.len(), 2 * r.len() - 1);
        assert!(f.windows(2).all(|w| w[0] < w[1]));
    }
}
