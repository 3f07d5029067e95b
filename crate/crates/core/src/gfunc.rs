//! Littlewood–Paley square functions of the semigroup T_t = e^{−tH(λ)}:
//!
//!   g_k(f, x)² = ∫₀^∞ |∂_t^k T_t f(x)|² t^{2k−1} dt,
//!   g_k*(f, x)² = ∫₀^∞ ∫ t^{−n/2} (1 + |x−y|²/t)^{−k} |∂_t T_t f(y)|² t dy dt.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::hermite::HermiteSlice;
use crate::lab::lp_norm_abs;
use crate::quadrature::LogRule;

#[derive(Clone, Debug, PartialEq)]
pub struct GFunctionSpec {
    pub k: usize,
    pub t_rule: LogRule,
}

impl GFunctionSpec {
    pub fn new(k: usize, t_rule: LogRule) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("g-function order k must be >= 1"));
        }
        if t_rule.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::domain("t-rule weights must be positive"));
        }
        Ok(Self { k, t_rule })
    }

    /// 160 log-spaced nodes over [10^{−6}/((2K+n)|λ|), 20/(n|λ|)].
    pub fn for_slice(k: usize, slice: &HermiteSlice) -> Result<Self> {
        let a = slice.lambda().abs();
        let n = slice.dim() as f64;
        let top = (2 * slice.max_degree()) as f64 + n;
        Self::new(k, LogRule::new(1e-6 / (top * a), 20.0 / (n * a), 160)?)
    }
}

/// Γ(2k) 4^{−k}: the exact ratio ‖g_k f‖₂² / ‖f‖₂².
pub fn g_isometry_constant(k: usize) -> f64 {
    let gamma: f64 = (1..2 * k).map(|j| j as f64).product();
    gamma * 0.25f64.powi(k as i32)
}

/// Per-degree parts F_d(x) = Σ_{|α|=d} c_α Φ_α^λ(x) on the grid.
fn degree_parts(slice: &HermiteSlice, grid: &SpatialGrid) -> Vec<Vec<Complex64>> {
    let axis = grid.axis_points();
    (0..=slice.max_degree())
        .into_par_iter()
        .map(|d| {
            let part = slice.map_diagonal(|a| Complex64::new(if a.degree() == d { 1.0 } else { 0.0 }, 0.0));
            part.synthesize_tensor(&axis)
        })
        .collect()
}

/// ∂_t^k T_t f on the grid at every node of `rule`.
fn semigroup_derivatives(slice: &HermiteSlice, grid: &SpatialGrid, k: usize, rule: &LogRule) -> Vec<Vec<Complex64>> {
    let parts = degree_parts(slice, grid);
    let lam = slice.lambda().abs();
    let n = slice.dim();
    rule.nodes
        .par_iter()
        .map(|&t| {
            let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
            for (d, part) in parts.iter().enumerate() {
                let mu = (2 * d + n) as f64 * lam;
                let f = (-mu).powi(k as i32) * (-t * mu).exp();
                if f == 0.0 {
                    continue;
                }
                for (a, v) in acc.iter_mut().zip(part) {
                    *a += v * f;
                }
            }
            acc
        })
        .collect()
}

fn check_grid(slice: &HermiteSlice, grid: &SpatialGrid) -> Result<()> {
    grid.validate()?;
    if slice.dim() != grid.n {
        return Err(Error::domain("slice and grid dimensions differ"));
    }
    Ok(())
}

/// g_k^λ(f, x) at every grid point.
pub fn g_k_eval(spec: &GFunctionSpec, slice: &HermiteSlice, grid: &SpatialGrid) -> Result<Vec<f64>> {
    check_grid(slice, grid)?;
    let k = spec.k;
    let derivs = semigroup_derivatives(slice, grid, k, &spec.t_rule);
    let mut sq = vec![0.0; grid.len()];
    for ((d, &t), &w) in derivs.iter().zip(&spec.t_rule.nodes).zip(&spec.t_rule.weights) {
        let tw = w * t.powi(2 * k as i32 - 1);
        for (s, v) in sq.iter_mut().zip(d) {
            *s += tw * v.norm_sqr();
        }
    }
    Ok(sq.into_iter().map(f64::sqrt).collect())
}

/// g_k*^λ(f, x) at every grid point, with the y-integral taken on the same
/// grid. `bounded_regime` in the result records k > n/2.
pub fn g_star_eval(spec: &GFunctionSpec, slice: &HermiteSlice, grid: &SpatialGrid) -> Result<GStar> {
    let values = g_star_at(spec, slice, grid, &grid.points())?;
    Ok(GStar {
        values,
        bounded_regime: 2 * spec.k > grid.n,
    })
}

/// g_k*^λ(f, x) at arbitrary points `xs` (flattened, stride n); the
/// y-integral runs over `grid`.
pub fn g_star_at(spec: &GFunctionSpec, slice: &HermiteSlice, grid: &SpatialGrid, xs: &[f64]) -> Result<Vec<f64>> {
    check_grid(slice, grid)?;
    let n = grid.n;
    if xs.len() % n != 0 {
        return Err(Error::domain("point list is not a multiple of the dimension"));
    }
    let derivs = semigroup_derivatives(slice, grid, 1, &spec.t_rule);
    let pts = grid.points();
    let cell = grid.cell_volume();
    let k = spec.k as i32;
    let dens: Vec<Vec<f64>> = derivs.iter().map(|d| d.iter().map(|v| v.norm_sqr()).collect()).collect();
    Ok(xs
        .par_chunks(n)
        .map(|x| {
            let mut acc = 0.0;
            for ((den, &t), &w) in dens.iter().zip(&spec.t_rule.nodes).zip(&spec.t_rule.weights) {
                let pre = w * t * t.powf(-0.5 * n as f64) * cell;
                let mut inner = 0.0;
                for (b, &dv) in den.iter().enumerate() {
                    if dv == 0.0 {
                        continue;
                    }
                    let y = &pts[b * n..(b + 1) * n];
                    let d2: f64 = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum();
                    inner += (1.0 + d2 / t).powi(-k) * dv;
                }
                acc += pre * inner;
            }
            acc.sqrt()
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GStar {
    pub values: Vec<f64>,
    pub bounded_regime: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaConstants {
    pub lambda: f64,
    /// min ‖g_1 f‖_p / ‖f‖_p over the family at this λ
    pub c1: f64,
    /// max of the same ratio
    pub c2: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub p: f64,
    pub per_lambda: Vec<LambdaConstants>,
    /// max/min − 1 of c1 across λ
    pub c1_spread: f64,
    pub c2_spread: f64,
    pub skipped: usize,
    pub lambda_stable: bool,
}

fn spread(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let hi = v.clone().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.fold(f64::INFINITY, f64::min);
    hi / lo - 1.0
}

/// Empirical constants of C₁‖f‖_p ≤ ‖g_1 f‖_p ≤ C₂‖f‖_p for each λ in the
/// family and their spread across λ; zero functions are skipped.
pub fn g_norm_equivalence_report(family: &[HermiteSlice], grid: &SpatialGrid, p: f64) -> Result<EquivalenceReport> {
    if family.is_empty() {
        return Err(Error::Input("empty test family".into()));
    }
    let axis = grid.axis_points();
    let cell = grid.cell_volume();
    let ratios: Vec<Option<(f64, f64)>> = family
        .iter()
        .map(|f| {
            let spec = GFunctionSpec::for_slice(1, f)?;
            let fv: Vec<f64> = f.synthesize_tensor(&axis).iter().map(|v| v.norm()).collect();
            let den = lp_norm_abs(fv, cell, p)?;
            if den < 1e-14 {
                return Ok(None);
            }
            let num = lp_norm_abs(g_k_eval(&spec, f, grid)?, cell, p)?;
            Ok(Some((f.lambda(), num / den)))
        })
        .collect::<Result<_>>()?;
    let skipped = ratios.iter().filter(|r| r.is_none()).count();
    let mut by_lambda: BTreeMap<u64, LambdaConstants> = BTreeMap::new();
    for (lam, r) in ratios.into_iter().flatten() {
        let e = by_lambda.entry(lam.to_bits()).or_insert(LambdaConstants {
            lambda: lam,
            c1: f64::INFINITY,
            c2: 0.0,
            count: 0,
        });
        e.c1 = e.c1.min(r);
        e.c2 = e.c2.max(r);
        e.count += 1;
    }
    let mut per_lambda: Vec<LambdaConstants> = by_lambda.into_values().collect();
    per_lambda.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    if per_lambda.is_empty() {
        return Err(Error::Input("every test function vanished".into()));
    }
    let c1_spread = spread(per_lambda.iter().map(|c| c.c1));
    let c2_spread = spread(per_lambda.iter().map(|c| c.c2));
    Ok(EquivalenceReport {
        p,
        per_lambda,
        c1_spread,
        c2_spread,
        skipped,
        lambda_stable: c1_spread < 0.25 && c2_spread < 0.25,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_index::MultiIndex;
    use crate::quadrature::gauss_legendre;
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

    fn l2(grid: &SpatialGrid, v: impl IntoIterator<Item = f64>) -> f64 {
        lp_norm_abs(v, grid.cell_volume(), 2.0).unwrap()
    }

    #[test]
    fn single_mode_half() {
        let grid = SpatialGrid::new(1, 64, 8.0).unwrap();
        let a = MultiIndex::new(&[3]).unwrap();
        let s = HermiteSlice::unit(&a, 6, 1.0).unwrap();
        let g = g_k_eval(&GFunctionSpec::for_slice(1, &s).unwrap(), &s, &grid).unwrap();
        for (gx, fx) in g.iter().zip(s.synthesize_tensor(&grid.axis_points())) {
            assert!((gx - 0.5 * fx.norm()).abs() < 1e-8);
        }
        let z = HermiteSlice::zeros(1, 6, 1.0).unwrap();
        assert!(g_k_eval(&GFunctionSpec::for_slice(1, &z).unwrap(), &z, &grid).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn isometry_constants() {
        let grid = SpatialGrid::new(1, 128, 8.0).unwrap();
        for k in 1..=3 {
            let s = random_slice(1, 8, 1.5, k as u64);
            let g = g_k_eval(&GFunctionSpec::for_slice(k, &s).unwrap(), &s, &grid).unwrap();
            let f = l2(&grid, s.synthesize_tensor(&grid.axis_points()).iter().map(|v| v.norm()));
            let ratio = l2(&grid, g).powi(2) / f.powi(2);
            assert!((ratio / g_isometry_constant(k) - 1.0).abs() < 1e-6, "k={k}: {ratio}");
        }
        assert!((g_isometry_constant(1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn g_star_monotone_in_k() {
        let grid = SpatialGrid::new(1, 32, 6.0).unwrap();
        let s = random_slice(1, 4, 1.0, 5);
        let rule = GFunctionSpec::for_slice(1, &s).unwrap().t_rule;
        let a = g_star_eval(&GFunctionSpec::new(1, rule.clone()).unwrap(), &s, &grid).unwrap();
        let b = g_star_eval(&GFunctionSpec::new(2, rule).unwrap(), &s, &grid).unwrap();
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| y <= x));
        assert!(a.bounded_regime);
    }

    #[test]
    fn g_star_brute_force() {
        // Φ_1, n = 1, k = 1 at x = 0: ∫∫ t^{1/2} (1 + y²/t)^{−1} 9 e^{−6t} Φ_1(y)² dy dt
        let grid = SpatialGrid::new(1, 256, 8.0).unwrap();
        let a = MultiIndex::new(&[1]).unwrap();
        let s = HermiteSlice::unit(&a, 3, 1.0).unwrap();
        let phi1 = |y: f64| 2f64.sqrt() * y * (-y * y / 2.0).exp() / PI.powf(0.25);
        let mut total = 0.0;
        // t = e^u on panels over u ∈ [−18, 4]; y on panels over [−10, 10]
        for pu in 0..88 {
            let (us, uw) = gauss_legendre(10, -18.0 + pu as f64 * 0.25, -18.0 + (pu + 1) as f64 * 0.25).unwrap();
            for (u, wu) in us.iter().zip(&uw) {
                let t = u.exp();
                let mut inner = 0.0;
                for py in 0..80 {
                    let (ys, yw) = gauss_legendre(10, -10.0 + py as f64 * 0.25, -10.0 + (py + 1) as f64 * 0.25).unwrap();
                    for (y, wy) in ys.iter().zip(&yw) {
                        inner += wy / (1.0 + y * y / t) * 9.0 * (-6.0 * t).exp() * phi1(*y).powi(2);
                    }
                }
                total += wu * t * t.sqrt() * inner;
            }
        }
        let v = g_star_at(&GFunctionSpec::for_slice(1, &s).unwrap(), &s, &grid, &[0.0]).unwrap()[0];
        assert!((v / total.sqrt() - 1.0).abs() < 1e-4, "{v} vs {}", total.sqrt());
    }

    #[test]
    fn equivalence_on_eigenmodes() {
        let grid = SpatialGrid::new(1, 128, 8.0).unwrap();
        let mut fam = Vec::new();
        for lam in [0.5, 1.0, 2.0] {
            for d in 0..4 {
                fam.push(HermiteSlice::unit(&MultiIndex::new(&[d]).unwrap(), 6, lam).unwrap());
            }
        }
        fam.push(HermiteSlice::zeros(1, 6, 1.0).unwrap());
        let rep = g_norm_equivalence_report(&fam, &grid, 2.0).unwrap();
        assert_eq!(rep.skipped, 1);
        for c in &rep.per_lambda {
            assert!((c.c1 - 0.5).abs() < 1e-4 && (c.c2 - 0.5).abs() < 1e-4);
        }
        assert!(g_norm_equivalence_report(&[], &grid, 2.0).is_err());
    }
}
