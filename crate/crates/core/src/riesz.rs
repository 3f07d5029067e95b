//! Riesz transforms R_j(λ) = A_j(λ)H(λ)^{−1/2} and R_j*(λ) = A_j(λ)*H(λ)^{−1/2},
//! the higher-order family A_2^q A_1^{*p} H^{−(p+q)/2}, shifted powers
//! (H + aλ)^{−β}, and the integral kernel of R_j(λ).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{ladder_apply, mehler_kernel, HermiteSlice, LadderKind, MEHLER_ONE_TERM_THRESHOLD};
use crate::quadrature::{gauss_legendre, LogRule};
use crate::transform::SpectralCoefficients;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RieszKind {
    /// A_j H^{−1/2}
    Plain,
    /// A_j* H^{−1/2}
    Star,
}

/// First-order Riesz transform on axis `j` (one-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RieszSpec {
    pub j: usize,
    pub kind: RieszKind,
}

impl RieszSpec {
    pub fn new(j: usize, kind: RieszKind) -> Result<Self> {
        if j == 0 {
            return Err(Error::domain("Riesz axis is one-based"));
        }
        Ok(Self { j, kind })
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.j == 0 || self.j > n {
            return Err(Error::domain(format!("Riesz axis {} outside 1..={n}", self.j)));
        }
        Ok(())
    }
}

/// A_2^q A_1^{*p} H^{−(p+q)/2}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HigherRieszSpec {
    pub p: usize,
    pub q: usize,
}

impl HigherRieszSpec {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p + q == 0 {
            return Err(Error::domain("higher Riesz transform needs p + q >= 1"));
        }
        Ok(Self { p, q })
    }
}

/// ((2|α|+n)|λ| + a|λ|)^{−β} on one slice.
pub fn shifted_power_slice(a: f64, beta: f64, s: &HermiteSlice) -> HermiteSlice {
    let lam = s.lambda().abs();
    let n = s.dim();
    s.map_diagonal(|al| {
        let mu = (2 * al.degree() + n) as f64 * lam + a * lam;
        Complex64::new(mu.powf(-beta), 0.0)
    })
}

pub fn riesz_slice(spec: RieszSpec, s: &HermiteSlice) -> Result<HermiteSlice> {
    spec.check(s.dim())?;
    let kind = match spec.kind {
        RieszKind::Plain => LadderKind::Creation,
        RieszKind::Star => LadderKind::Annihilation,
    };
    ladder_apply(&shifted_power_slice(0.0, 0.5, s), spec.j - 1, kind)
}

pub fn higher_riesz_slice(spec: HigherRieszSpec, s: &HermiteSlice) -> Result<HermiteSlice> {
    if spec.q > 0 && s.dim() < 2 {
        return Err(Error::domain("higher Riesz transforms with q >= 1 need n >= 2"));
    }
    let mut out = shifted_power_slice(0.0, 0.5 * (spec.p + spec.q) as f64, s);
    for _ in 0..spec.p {
        out = ladder_apply(&out, 0, LadderKind::Annihilation)?;
    }
    for _ in 0..spec.q {
        out = ladder_apply(&out, 1, LadderKind::Creation)?;
    }
    Ok(out)
}

pub fn riesz_apply(spec: RieszSpec, c: &SpectralCoefficients) -> Result<SpectralCoefficients> {
    spec.check(c.spec().n)?;
    c.try_map_slices(|s| riesz_slice(spec, s))
}

pub fn higher_riesz_apply(spec: HigherRieszSpec, c: &SpectralCoefficients) -> Result<SpectralCoefficients> {
    if spec.q > 0 && c.spec().n < 2 {
        return Err(Error::domain("higher Riesz transforms with q >= 1 need n >= 2"));
    }
    c.try_map_slices(|s| higher_riesz_slice(spec, s))
}

/// (H(λ) + a|λ|)^{−β} on every slice.
pub fn shifted_power_apply(a: f64, beta: f64, c: &SpectralCoefficients) -> Result<SpectralCoefficients> {
    if !(a >= 0.0 && a.is_finite() && beta.is_finite()) {
        return Err(Error::domain(format!("shift a = {a} must be finite and >= 0")));
    }
    Ok(c.map_slices(|s| shifted_power_slice(a, beta, s)))
}

/// |λ| ∫₀¹ (H(λ) + 2|λ|s)^{−3/2} ds by `nodes`-point Gauss–Legendre; equals
/// H^{−1/2} − (H + 2|λ|)^{−1/2}.
pub fn resolvent_integral_apply(c: &SpectralCoefficients, nodes: usize) -> Result<SpectralCoefficients> {
    let (s, w) = gauss_legendre(nodes, 0.0, 1.0)?;
    c.try_map_slices(|sl| {
        let mut acc = sl.map_diagonal(|_| Complex64::new(0.0, 0.0));
        for (&si, &wi) in s.iter().zip(&w) {
            acc.axpy(Complex64::new(wi * sl.lambda().abs(), 0.0), &shifted_power_slice(2.0 * si, 1.5, sl));
        }
        Ok(acc)
    })
}

/// (A_j(λ) h_t^λ)(x, y) with A_j acting in x; `axis` is zero-based.
pub fn ladder_kernel(axis: usize, lambda: f64, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let h = mehler_kernel(t, lambda, x, y)?;
    if axis >= x.len() {
        return Err(Error::domain(format!("kernel axis {} outside 1..={}", axis + 1, x.len())));
    }
    let a = lambda.abs();
    let r = a.sqrt();
    let s = a * t;
    let (u, v) = (r * x[axis], r * y[axis]);
    let dlog = if s > MEHLER_ONE_TERM_THRESHOLD {
        -u
    } else {
        -0.5 * ((u + v) * s.tanh() + (u - v) / s.tanh())
    };
    // −∂_j h + λ x_j h
    Ok((-r * dlog + lambda * x[axis]) * h)
}

/// Log-spaced rule in the dimensionless time s = |λ|t.
pub fn kernel_time_rule(count: usize) -> Result<LogRule> {
    LogRule::new(1e-10, 40.0, count)
}

/// Kernel of R_j(λ) at (x, y): Γ(1/2)^{−1} ∫₀^∞ t^{−1/2} (A_j(λ)h_t^λ)(x, y) dt,
/// with `rule` in units of s = |λ|t. `j` is one-based.
pub fn riesz_kernel_eval(j: usize, lambda: f64, x: &[f64], y: &[f64], rule: &LogRule) -> Result<f64> {
    if j == 0 || j > x.len() {
        return Err(Error::domain(format!("Riesz axis {j} outside 1..={}", x.len())));
    }
    if x == y {
        return Err(Error::DiagonalExcluded);
    }
    let a = lambda.abs();
    let mut acc = 0.0;
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        let t = s / a;
        acc += w / a * t.powf(-0.5) * ladder_kernel(j - 1, lambda, t, x, y)?;
    }
    Ok(acc / std::f64::consts::PI.sqrt())
}

/// sup over off-diagonal point pairs of |x − y|^n |K_j^λ(x, y)|.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CzProfile {
    pub j: usize,
    pub lambda: f64,
    pub sup: f64,
    pub argmax: (Vec<f64>, Vec<f64>),
    pub pairs: usize,
    pub t_nodes: usize,
}

/// Profiles the Calderón–Zygmund size constant of R_j(λ) over all pairs of
/// `points` (flattened with stride n).
pub fn cz_profile(j: usize, lambda: f64, points: &[f64], n: usize, rule: &LogRule) -> Result<CzProfile> {
    if n == 0 || points.len() % n != 0 {
        return Err(Error::domain("point list is not a multiple of the dimension"));
    }
    let count = points.len() / n;
    let rows: Result<Vec<(f64, usize, usize)>> = (0..count)
        .into_par_iter()
        .map(|a| {
            let x = &points[a * n..(a + 1) * n];
            let mut best = (0.0, a, a);
            for b in 0..count {
                let y = &points[b * n..(b + 1) * n];
                if x == y {
                    continue;
                }
                let d: f64 = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
                let v = d.powi(n as i32) * riesz_kernel_eval(j, lambda, x, y, rule)?.abs();
                if v > best.0 {
                    best = (v, a, b);
                }
            }
            Ok(best)
        })
        .collect();
    let (sup, a, b) = rows?
        .into_iter()
        .fold((0.0, 0, 0), |acc, r| if r.0 > acc.0 { r } else { acc });
    Ok(CzProfile {
        j,
        lambda,
        sup,
        argmax: (points[a * n..(a + 1) * n].to_vec(), points[b * n..(b + 1) * n].to_vec()),
        pairs: count * count.saturating_sub(1),
        t_nodes: rule.len(),
    })
}
