//! Empirical verification: discrete L^p norms, seeded test functions,
//! operator-norm probes and vector-valued (R-bound) probes.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bochner::{bochner_riesz_apply, bochner_riesz_slice, RieszMeanSpec};
use crate::calculus::{apply_scalar_multiplier, multiplier_slice, ScalarSymbol};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec, SpatialGrid};
use crate::hermite::{hermite_functions, HermiteSlice};
use crate::multi_index::Simplex;
use crate::riesz::{higher_riesz_apply, higher_riesz_slice, riesz_apply, riesz_slice, HigherRieszSpec, RieszKind, RieszSpec};
use crate::transform::{apply_grushin, inverse_transform, SpectralCoefficients};

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::UnsupportedExponent(p));
    }
    Ok(())
}

/// (Σ |v_i|^p · cell)^{1/p} for non-negative magnitudes.
pub fn lp_norm_abs(values: impl IntoIterator<Item = f64>, cell: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let mut scale = 0.0f64;
    let vals: Vec<f64> = values.into_iter().collect();
    for &v in &vals {
        if !v.is_finite() {
            return Err(Error::data("non-finite value in L^p norm"));
        }
        scale = scale.max(v.abs());
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = vals.iter().map(|v| (v.abs() / scale).powf(p)).sum();
    Ok(scale * (sum * cell).powf(1.0 / p))
}

/// Discrete L^p norm of complex samples with cell volume `cell`.
pub fn lp_norm_complex(values: &[Complex64], cell: f64, p: f64) -> Result<f64> {
    lp_norm_abs(values.iter().map(|v| v.norm()), cell, p)
}

/// ‖f‖_p over the space-time grid.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    lp_norm_complex(f.values(), f.spec().cell_volume(), p)
}

/// Shape of seeded test functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    /// Random complex Hermite coefficients on every allowed (m, α).
    HermiteRandom,
    /// A Gaussian bump with random centre and widths, projected to the band.
    Bump,
    /// One joint eigenmode (m, α) chosen at random.
    Mode,
}

fn default_decay() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionSpec {
    pub kind: TestKind,
    /// Largest Hermite degree.
    pub k_max: usize,
    /// Largest |m| among frequency indices (full operator only).
    pub m_max: usize,
    pub seed: u64,
    /// Coefficients are damped by (1 + |α|)^{−decay}.
    #[serde(default = "default_decay")]
    pub decay: f64,
}

impl TestFunctionSpec {
    pub fn new(kind: TestKind, k_max: usize, m_max: usize, seed: u64) -> Self {
        Self {
            kind,
            k_max,
            m_max,
            seed,
            decay: default_decay(),
        }
    }
}

/// Generator for trial `stream` of `seed`; independent of evaluation order.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_unit(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random coefficients of one slice at `lambda` per `spec`.
pub fn random_slice(n: usize, lambda: f64, spec: &TestFunctionSpec, rng: &mut ChaCha8Rng) -> Result<HermiteSlice> {
    let mut s = HermiteSlice::zeros(n, spec.k_max, lambda)?;
    match spec.kind {
        TestKind::HermiteRandom => {
            let idx = s.simplex().clone();
            for (a, v) in idx.iter().zip(s.coeffs_mut()) {
                *v = random_unit(rng) * (1.0 + a.degree() as f64).powf(-spec.decay);
            }
        }
        TestKind::Mode => {
            let i = rng.gen_range(0..s.coeffs().len());
            s.coeffs_mut()[i] = Complex64::new(1.0, 0.0);
        }
        TestKind::Bump => {
            let scale = lambda.abs().sqrt();
            let centre: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0) / scale).collect();
            let w = rng.gen_range(0.6..1.6) / scale;
            s = crate::hermite::hermite_analyze(
                |x| {
                    let d2: f64 = x.iter().zip(&centre).map(|(a, b)| (a - b) * (a - b)).sum();
                    Complex64::new((-0.5 * d2 / (w * w)).exp(), 0.0)
                },
                n,
                lambda,
                spec.k_max,
            )?;
        }
    }
    Ok(s)
}

fn check_band(grid: &GridSpec, spec: &TestFunctionSpec) -> Result<()> {
    if !grid.resolves(spec.k_max) {
        return Err(Error::Capability(format!(
            "grid half-width {} cannot hold Hermite degree {}",
            grid.x_extent, spec.k_max
        )));
    }
    if spec.m_max == 0 || spec.m_max >= grid.nt / 2 {
        return Err(Error::Capability(format!(
            "frequency limit {} outside 1..{}",
            spec.m_max,
            grid.nt / 2
        )));
    }
    Ok(())
}

/// Unit-energy band-limited coefficients for trial `stream`.
pub fn trial_coefficients(grid: GridSpec, spec: &TestFunctionSpec, stream: u64) -> Result<SpectralCoefficients> {
    check_band(&grid, spec)?;
    let mut rng = trial_rng(spec.seed, stream);
    let mut c = SpectralCoefficients::zeros(grid, spec.k_max)?;
    let m_max = spec.m_max as i64;
    match spec.kind {
        TestKind::Mode => {
            let m = rng.gen_range(1..=m_max) * if rng.gen::<bool>() { 1 } else { -1 };
            let lam = grid.lambda(m);
            *c.slice_mut(m).expect("m inside the band") = random_slice(grid.n, lam, spec, &mut rng)?;
        }
        TestKind::HermiteRandom | TestKind::Bump => {
            for m in (-m_max..=m_max).filter(|&m| m != 0) {
                let lam = grid.lambda(m);
                let mut s = random_slice(grid.n, lam, spec, &mut rng)?;
                if spec.kind == TestKind::Bump {
                    // Gaussian profile in λ, random phase
                    let env = (-(m as f64 / m_max as f64).powi(2)).exp();
                    let phase = Complex64::from_polar(env, rng.gen_range(0.0..std::f64::consts::TAU));
                    s.coeffs_mut().iter_mut().for_each(|v| *v *= phase);
                }
                *c.slice_mut(m).expect("m inside the band") = s;
            }
        }
    }
    let energy = c.energy();
    if energy > 0.0 {
        let inv = 1.0 / energy.sqrt();
        c = c.map_slices(|s| s.map_diagonal(|_| Complex64::new(inv, 0.0)));
    }
    Ok(c)
}

/// Band-limited function of unit L² norm on the grid, a pure function of
/// `spec` (trial 0).
pub fn make_test_function(grid: GridSpec, spec: &TestFunctionSpec) -> Result<GridFunction> {
    make_trial_function(grid, spec, 0)
}

pub fn make_trial_function(grid: GridSpec, spec: &TestFunctionSpec, stream: u64) -> Result<GridFunction> {
    let c = trial_coefficients(grid, spec, stream)?;
    let f = inverse_transform(&c);
    let norm = f.norm_sqr().sqrt();
    if norm == 0.0 {
        return Ok(f);
    }
    let values = f.into_values().into_iter().map(|v| v / norm).collect();
    GridFunction::new(grid, values)
}

/// One stage of an operator pipeline.
#[derive(Clone, Debug)]
pub enum Stage {
    Identity,
    Zero,
    Grushin,
    Multiplier(ScalarSymbol),
    Riesz(RieszSpec),
    HigherRiesz(HigherRieszSpec),
    Bochner(RieszMeanSpec),
}

fn parse_list(arg: &str, count: usize, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = arg
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Input(format!("bad parameters {arg:?} for {what}")))?;
    if parts.len() != count || parts.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input(format!("{what} takes {count} parameter(s), got {arg:?}")));
    }
    Ok(parts)
}

fn parse_index(v: f64, what: &str) -> Result<usize> {
    if v < 0.0 || v.fract() != 0.0 {
        return Err(Error::Input(format!("{what} needs non-negative integers, got {v}")));
    }
    Ok(v as usize)
}

impl Stage {
    /// Parses `identity`, `zero`, `grushin`, `riesz:j`, `riesz*:j`,
    /// `riesz:p,q`, `bochner:R,δ`, or any scalar symbol name.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "identity" => return Ok(Stage::Identity),
            "zero" => return Ok(Stage::Zero),
            "grushin" => return Ok(Stage::Grushin),
            _ => {}
        }
        if let Some(arg) = s.strip_prefix("riesz*:") {
            let j = parse_index(parse_list(arg, 1, "riesz*")?[0], "riesz*")?;
            return Ok(Stage::Riesz(RieszSpec::new(j, RieszKind::Star)?));
        }
        if let Some(arg) = s.strip_prefix("riesz:") {
            if arg.contains(',') {
                let v = parse_list(arg, 2, "riesz:p,q")?;
                let (p, q) = (parse_index(v[0], "riesz")?, parse_index(v[1], "riesz")?);
                return Ok(Stage::HigherRiesz(HigherRieszSpec::new(p, q)?));
            }
            let j = parse_index(parse_list(arg, 1, "riesz")?[0], "riesz")?;
            return Ok(Stage::Riesz(RieszSpec::new(j, RieszKind::Plain)?));
        }
        if let Some(arg) = s.strip_prefix("bochner:") {
            let v = parse_list(arg, 2, "bochner")?;
            return Ok(Stage::Bochner(RieszMeanSpec::new(v[0], v[1])?));
        }
        ScalarSymbol::parse(s).map(Stage::Multiplier)
    }

    /// Smallest spatial dimension the stage acts on.
    pub fn min_dim(&self) -> usize {
        match self {
            Stage::Riesz(r) => r.j,
            Stage::HigherRiesz(h) if h.q > 0 => 2,
            _ => 1,
        }
    }

    pub fn apply(&self, c: &SpectralCoefficients) -> Result<SpectralCoefficients> {
        match self {
            Stage::Identity => Ok(c.clone()),
            Stage::Zero => Ok(c.map_slices(|s| s.map_diagonal(|_| Complex64::new(0.0, 0.0)))),
            Stage::Grushin => Ok(apply_grushin(c)),
            Stage::Multiplier(m) => apply_scalar_multiplier(m, c),
            Stage::Riesz(r) => riesz_apply(*r, c),
            Stage::HigherRiesz(h) => higher_riesz_apply(*h, c),
            Stage::Bochner(b) => Ok(bochner_riesz_apply(*b, c)),
        }
    }

    /// The fixed-λ operator T(λ) acting on one slice.
    pub fn apply_slice(&self, s: &HermiteSlice) -> Result<HermiteSlice> {
        match self {
            Stage::Identity => Ok(s.clone()),
            Stage::Zero => Ok(s.map_diagonal(|_| Complex64::new(0.0, 0.0))),
            Stage::Grushin => {
                let lam = s.lambda().abs();
                let n = s.dim();
                Ok(s.map_diagonal(|a| Complex64::new((2 * a.degree() + n) as f64 * lam, 0.0)))
            }
            Stage::Multiplier(m) => multiplier_slice(m, s),
            Stage::Riesz(r) => riesz_slice(*r, s),
            Stage::HigherRiesz(h) => higher_riesz_slice(*h, s),
            Stage::Bochner(b) => Ok(bochner_riesz_slice(*b, s)),
        }
    }
}

/// Stages applied left to right.
#[derive(Clone, Debug)]
pub struct Pipeline {
    names: Vec<String>,
    stages: Vec<Stage>,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.names.join(" | "))
    }
}

impl Pipeline {
    pub fn parse<S: AsRef<str>>(stages: &[S]) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Input("empty operator pipeline".into()));
        }
        let parsed = stages.iter().map(|s| Stage::parse(s.as_ref())).collect::<Result<_>>()?;
        Ok(Self {
            names: stages.iter().map(|s| s.as_ref().trim().to_string()).collect(),
            stages: parsed,
        })
    }

    pub fn single(stage: &str) -> Result<Self> {
        Self::parse(&[stage])
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn apply(&self, c: &SpectralCoefficients) -> Result<SpectralCoefficients> {
        let mut out = c.clone();
        for s in &self.stages {
            out = s.apply(&out)?;
        }
        Ok(out)
    }

    pub fn apply_slice(&self, s: &HermiteSlice) -> Result<HermiteSlice> {
        let mut out = s.clone();
        for st in &self.stages {
            out = st.apply_slice(&out)?;
        }
        Ok(out)
    }
}

/// Grid metadata carried by a report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub n: usize,
    pub nx: usize,
    pub x_extent: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nt: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_extent: Option<f64>,
}

impl From<GridSpec> for GridInfo {
    fn from(g: GridSpec) -> Self {
        Self {
            n: g.n,
            nx: g.nx,
            x_extent: g.x_extent,
            nt: Some(g.nt),
            t_extent: Some(g.t_extent),
        }
    }
}

impl From<SpatialGrid> for GridInfo {
    fn from(g: SpatialGrid) -> Self {
        Self {
            n: g.n,
            nx: g.nx,
            x_extent: g.x_extent,
            nt: None,
            t_extent: None,
        }
    }
}

pub const PROBE_NOTE: &str =
    "empirical lower bound with refinement evidence; not a proof of boundedness";

/// Result of a norm or R-bound probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub operator: String,
    pub probe: String,
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    /// Base-grid ratios of non-degenerate trials, in trial order.
    pub ratios: Vec<f64>,
    pub skipped: usize,
    pub max_ratio: f64,
    /// Maxima on the base grid and on the 2× grid with 2× trials.
    pub refinement: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub stable: bool,
    pub grid: GridInfo,
    #[serde(rename = "K")]
    pub k: usize,
    pub note: String,
    pub version: String,
}

/// Refined maximum within 25% of the base maximum.
pub fn stability_flag(refinement: &[f64]) -> bool {
    match refinement {
        [base, rest @ ..] if !rest.is_empty() => rest.iter().all(|r| {
            if *base == 0.0 {
                *r == 0.0
            } else {
                (r / base - 1.0).abs() < 0.25
            }
        }),
        _ => false,
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

const DEGENERATE: f64 = 1e-14;

fn collect_trials(results: Vec<Option<f64>>) -> (Vec<f64>, usize) {
    let skipped = results.iter().filter(|r| r.is_none()).count();
    (results.into_iter().flatten().collect(), skipped)
}

fn norm_trials(op: &Pipeline, grid: GridSpec, k: usize, p: f64, trials: usize, tf: &TestFunctionSpec) -> Result<(Vec<f64>, usize)> {
    if k < tf.k_max {
        return Err(Error::Input(format!("truncation {k} below test degree {}", tf.k_max)));
    }
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let c = trial_coefficients(grid, tf, i)?.with_max_degree(k);
            let f = inverse_transform(&c);
            let nf = lp_norm(&f, p)?;
            if nf < DEGENERATE {
                return Ok(None);
            }
            let out = inverse_transform(&op.apply(&c)?);
            Ok(Some(lp_norm(&out, p)? / nf))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_trials(results))
}

/// max ‖op f‖_p / ‖f‖_p over seeded trials, plus the same on the refined grid
/// with twice the trials.
pub fn operator_norm_probe(
    op: &Pipeline,
    grid: GridSpec,
    k: usize,
    p: f64,
    trials: usize,
    tf: &TestFunctionSpec,
) -> Result<NormReport> {
    check_exponent(p)?;
    let (ratios, skipped) = norm_trials(op, grid, k, p, trials, tf)?;
    let (fine, _) = norm_trials(op, grid.refined(), k, p, 2 * trials, tf)?;
    let refinement = vec![max_of(&ratios), max_of(&fine)];
    Ok(NormReport {
        operator: op.to_string(),
        probe: "norm".into(),
        p,
        trials,
        seed: tf.seed,
        max_ratio: refinement[0],
        stable: stability_flag(&refinement),
        refinement,
        ratios,
        skipped,
        lambdas: grid.frequency_indices().filter(|m| m.unsigned_abs() as usize <= tf.m_max).map(|m| grid.lambda(m)).collect(),
        grid: grid.into(),
        k,
        note: PROBE_NOTE.into(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

/// J values log-uniform in [1/4, 4].
pub fn default_lambdas(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = trial_rng(seed, u64::MAX);
    (0..count).map(|_| 4f64.powf(rng.gen_range(-1.0..1.0))).collect()
}

fn lambda_stream_seed(seed: u64, lambda: f64) -> u64 {
    seed ^ lambda.to_bits().rotate_left(17).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn check_lambdas(lambdas: &[f64], grid: &SpatialGrid, k_max: usize) -> Result<f64> {
    if lambdas.is_empty() {
        return Err(Error::Input("empty lambda list".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| **l == 0.0 || !l.is_finite()) {
        return Err(Error::domain(format!("lambda {l} is excluded")));
    }
    let lmin = lambdas.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    let need = ((2 * k_max + 1) as f64 / lmin).sqrt();
    if grid.x_extent < need {
        return Err(Error::Capability(format!(
            "grid half-width {} below {need:.4} needed at lambda {lmin}",
            grid.x_extent
        )));
    }
    Ok(lmin)
}

fn square_function(parts: &[Vec<Complex64>]) -> Vec<f64> {
    let len = parts.first().map_or(0, |p| p.len());
    (0..len)
        .map(|x| parts.iter().map(|p| p[x].norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

fn rbound_trials(op: &Pipeline, lambdas: &[f64], grid: &SpatialGrid, p: f64, trials: usize, tf: &TestFunctionSpec) -> Result<(Vec<f64>, usize)> {
    let axis = grid.axis_points();
    let cell = grid.cell_volume();
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut ins = Vec::with_capacity(lambdas.len());
            let mut outs = Vec::with_capacity(lambdas.len());
            for &lam in lambdas {
                let mut rng = trial_rng(lambda_stream_seed(tf.seed, lam), i);
                let f = random_slice(grid.n, lam, tf, &mut rng)?;
                outs.push(op.apply_slice(&f)?.synthesize_tensor(&axis));
                ins.push(f.synthesize_tensor(&axis));
            }
            let den = lp_norm_abs(square_function(&ins), cell, p)?;
            if den < DEGENERATE {
                return Ok(None);
            }
            Ok(Some(lp_norm_abs(square_function(&outs), cell, p)? / den))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_trials(results))
}

/// max ‖(Σ_j |T(λ_j) f_j|²)^{1/2}‖_p / ‖(Σ_j |f_j|²)^{1/2}‖_p over seeded
/// families (f_j), plus the same on the 2× spatial grid with twice the trials.
/// Each f_j depends on (seed, trial, λ_j) only, so permuting `lambdas` does
/// not change the ratios.
pub fn r_bound_probe(
    op: &Pipeline,
    lambdas: &[f64],
    grid: SpatialGrid,
    p: f64,
    trials: usize,
    tf: &TestFunctionSpec,
) -> Result<NormReport> {
    check_exponent(p)?;
    grid.validate()?;
    check_lambdas(lambdas, &grid, tf.k_max)?;
    let (ratios, skipped) = rbound_trials(op, lambdas, &grid, p, trials, tf)?;
    let (fine, _) = rbound_trials(op, lambdas, &grid.refined(), p, 2 * trials, tf)?;
    let refinement = vec![max_of(&ratios), max_of(&fine)];
    Ok(NormReport {
        operator: op.to_string(),
        probe: "rbound".into(),
        p,
        trials,
        seed: tf.seed,
        max_ratio: refinement[0],
        stable: stability_flag(&refinement),
        refinement,
        ratios,
        skipped,
        lambdas: lambdas.to_vec(),
        grid: grid.into(),
        k: tf.k_max,
        note: PROBE_NOTE.into(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

fn fs_trials(grid: &SpatialGrid, lambdas: &[f64], p: f64, trials: usize, tf: &TestFunctionSpec) -> Result<(Vec<f64>, usize)> {
    let axis = grid.axis_points();
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let family: Vec<Vec<f64>> = lambdas
                .iter()
                .map(|&lam| {
                    let mut rng = trial_rng(lambda_stream_seed(tf.seed, lam), i);
                    let f = random_slice(grid.n, lam, tf, &mut rng)?;
                    Ok(f.synthesize_tensor(&axis).iter().map(|v| v.norm()).collect())
                })
                .collect::<Result<_>>()?;
            crate::bochner::fefferman_stein_ratio(grid, &family, p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_trials(results))
}

/// Vector-valued maximal inequality ‖(Σ_j (Mf_j)²)^{1/2}‖_p ≤ C‖(Σ_j f_j²)^{1/2}‖_p
/// probed over families f_j = |Σ c_α Φ_α^{λ_j}|.
pub fn fefferman_stein_probe(
    lambdas: &[f64],
    grid: SpatialGrid,
    p: f64,
    trials: usize,
    tf: &TestFunctionSpec,
) -> Result<NormReport> {
    check_exponent(p)?;
    grid.validate()?;
    check_lambdas(lambdas, &grid, tf.k_max)?;
    let (ratios, skipped) = fs_trials(&grid, lambdas, p, trials, tf)?;
    let (fine, _) = fs_trials(&grid.refined(), lambdas, p, 2 * trials, tf)?;
    let refinement = vec![max_of(&ratios), max_of(&fine)];
    Ok(NormReport {
        operator: "maximal".into(),
        probe: "fefferman-stein".into(),
        p,
        trials,
        seed: tf.seed,
        max_ratio: refinement[0],
        stable: stability_flag(&refinement),
        refinement,
        ratios,
        skipped,
        lambdas: lambdas.to_vec(),
        grid: grid.into(),
        k: tf.k_max,
        note: PROBE_NOTE.into(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

/// Kernel Σ_{|α|≤K} m((2|α|+n)|λ|) Φ_α^λ(x) Φ_α^λ(y) of m(H(λ)).
pub fn multiplier_kernel(m: &ScalarSymbol, lambda: f64, x: &[f64], y: &[f64], max_degree: usize) -> Result<Complex64> {
    crate::hermite::hermite_eval(&crate::multi_index::MultiIndex::zero(x.len()), lambda, x)?;
    if x.len() != y.len() {
        return Err(Error::domain("kernel points must share a dimension"));
    }
    let n = x.len();
    let a = lambda.abs();
    let r = a.sqrt();
    let hx: Vec<Vec<f64>> = x.iter().map(|v| hermite_functions(max_degree, r * v)).collect();
    let hy: Vec<Vec<f64>> = y.iter().map(|v| hermite_functions(max_degree, r * v)).collect();
    let simplex = Simplex::new(n, max_degree)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for al in simplex.iter() {
        let mu = (2 * al.degree() + n) as f64 * a;
        let mut prod = a.powf(0.5 * n as f64);
        for j in 0..n {
            let k = al.get(j) as usize;
            prod *= hx[j][k] * hy[j][k];
        }
        acc += m.eval(mu) * prod;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelDerivativeCheck {
    pub lambda: f64,
    pub finite_difference: [f64; 2],
    pub analytic: [f64; 2],
    pub rel_err: f64,
}

/// Compares the central difference in λ of the kernel of m(H(λ)) with the
/// derivative of its scaling form λ^{n/2} m_λ(H)(√λx, √λy), m_λ(μ) = m(λμ),
/// differentiated analytically (λ > 0).
pub fn kernel_lambda_derivative_check(
    m: &ScalarSymbol,
    lambda: f64,
    x: &[f64],
    y: &[f64],
    max_degree: usize,
) -> Result<KernelDerivativeCheck> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("derivative check needs lambda > 0, got {lambda}")));
    }
    let h = 1e-4 * lambda;
    let fd = (multiplier_kernel(m, lambda + h, x, y, max_degree)? - multiplier_kernel(m, lambda - h, x, y, max_degree)?)
        / (2.0 * h);

    let n = x.len();
    let r = lambda.sqrt();
    let table = |v: f64| {
        let h = hermite_functions(max_degree + 1, r * v);
        // h_k' = √(k/2) h_{k−1} − √((k+1)/2) h_{k+1}
        let d: Vec<f64> = (0..=max_degree)
            .map(|k| {
                let lo = if k > 0 { (k as f64 / 2.0).sqrt() * h[k - 1] } else { 0.0 };
                lo - ((k as f64 + 1.0) / 2.0).sqrt() * h[k + 1]
            })
            .collect();
        (h, d)
    };
    let tx: Vec<_> = x.iter().map(|&v| table(v)).collect();
    let ty: Vec<_> = y.iter().map(|&v| table(v)).collect();
    let simplex = Simplex::new(n, max_degree)?;
    let pre = lambda.powf(0.5 * n as f64);
    let mut acc = Complex64::new(0.0, 0.0);
    for al in simplex.iter() {
        let unit_mu = (2 * al.degree() + n) as f64;
        let mut prod = 1.0;
        let mut dprod = 0.0;
        for j in 0..n {
            let k = al.get(j) as usize;
            let (hx, dx) = (&tx[j].0, &tx[j].1);
            let (hy, dy) = (&ty[j].0, &ty[j].1);
            let own = hx[k] * hy[k];
            let down = (dx[k] * x[j] * hy[k] + hx[k] * dy[k] * y[j]) / (2.0 * r);
            dprod = dprod * own + prod * down;
            prod *= own;
        }
        let mv = m.eval(lambda * unit_mu);
        let dm = m.derivative(1, lambda * unit_mu) * unit_mu;
        acc += (mv * (0.5 * n as f64 / lambda) + dm) * pre * prod + mv * pre * dprod;
    }
    let rel_err = (fd - acc).norm() / acc.norm().max(f64::MIN_POSITIVE);
    Ok(KernelDerivativeCheck {
        lambda,
        finite_difference: [fd.re, fd.im],
        analytic: [acc.re, acc.im],
        rel_err,
    })
}
