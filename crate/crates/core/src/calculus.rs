//! Functional calculus m(G): diagonal multipliers on the joint spectrum,
//! fractional powers, and a Hörmander–Mihlin derivative checker.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::HermiteSlice;
use crate::quadrature::LogRule;
use crate::transform::SpectralCoefficients;

type Eval = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
type Deriv = Arc<dyn Fn(usize, f64) -> Complex64 + Send + Sync>;

/// A scalar function m on (0, ∞), optionally with analytic derivatives.
#[derive(Clone)]
pub struct ScalarSymbol {
    name: String,
    eval: Eval,
    derivative: Option<Deriv>,
    declared_order: usize,
}

impl fmt::Debug for ScalarSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarSymbol")
            .field("name", &self.name)
            .field("analytic_derivatives", &self.derivative.is_some())
            .field("declared_order", &self.declared_order)
            .finish()
    }
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// e(e−1)…(e−k+1) for a complex exponent e.
fn falling(e: Complex64, k: usize) -> Complex64 {
    (0..k).fold(real(1.0), |acc, j| acc * (e - j as f64))
}

impl ScalarSymbol {
    /// Symbol without analytic derivatives; the checker falls back to
    /// finite differences.
    pub fn new(
        name: impl Into<String>,
        declared_order: usize,
        eval: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            derivative: None,
            declared_order,
        }
    }

    /// Attaches analytic derivatives, `d(k, μ) = m^{(k)}(μ)` for k ≥ 1.
    pub fn with_derivatives(mut self, d: impl Fn(usize, f64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn one() -> Self {
        Self::new("one", usize::MAX, |_| real(1.0)).with_derivatives(|_, _| real(0.0))
    }

    /// e^{−sμ}.
    pub fn heat(s: f64) -> Self {
        Self::new(format!("heat:{s}"), usize::MAX, move |mu| real((-s * mu).exp()))
            .with_derivatives(move |k, mu| real((-s).powi(k as i32) * (-s * mu).exp()))
    }

    /// μ^s.
    pub fn power(s: f64) -> Self {
        Self::new(format!("power:{s}"), usize::MAX, move |mu| real(mu.powf(s)))
            .with_derivatives(move |k, mu| falling(real(s), k) * mu.powf(s - k as f64))
    }

    /// μ^{iτ}.
    pub fn imaginary_power(tau: f64) -> Self {
        let e = Complex64::new(0.0, tau);
        Self::new(format!("imaginary-power:{tau}"), usize::MAX, move |mu| real(mu).powc(e))
            .with_derivatives(move |k, mu| falling(e, k) * real(mu).powc(e - k as f64))
    }

    /// (1 + μ)^{−1}.
    pub fn rational() -> Self {
        Self::new("rational:(1+mu)^-1", usize::MAX, |mu| real(1.0 / (1.0 + mu))).with_derivatives(|k, mu| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let fact: f64 = (1..=k).map(|j| j as f64).product();
            real(sign * fact * (1.0 + mu).powi(-(k as i32) - 1))
        })
    }

    /// (1 − μ)_+^δ, with the δ = 0 case read as the indicator of μ < 1.
    pub fn cesaro(delta: f64) -> Self {
        Self::new(format!("cesaro-delta:{delta}"), usize::MAX, move |mu| {
            real(truncated_power(mu, delta))
        })
        .with_derivatives(move |k, mu| {
            if mu >= 1.0 {
                return real(0.0);
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            falling(real(delta), k) * sign * (1.0 - mu).powf(delta - k as f64)
        })
    }

    /// Parses the CLI symbol names `one`, `heat:s`, `power:s`,
    /// `cesaro-delta:δ`, `imaginary-power:τ` and `rational`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (head, arg) = match spec.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (spec.trim(), None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            let a = a.ok_or_else(|| Error::Input(format!("symbol {head} needs a parameter")))?;
            a.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Input(format!("bad symbol parameter {a:?} in {spec:?}")))
        };
        match head {
            "one" => Ok(Self::one()),
            "heat" => Ok(Self::heat(num(arg)?)),
            "power" => Ok(Self::power(num(arg)?)),
            "imaginary-power" => Ok(Self::imaginary_power(num(arg)?)),
            "cesaro-delta" => {
                let d = num(arg)?;
                if d < 0.0 {
                    return Err(Error::Input(format!("cesaro order {d} must be >= 0")));
                }
                Ok(Self::cesaro(d))
            }
            "rational" => Ok(Self::rational()),
            _ => Err(Error::Input(format!("unknown symbol {spec:?}"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn declared_order(&self) -> usize {
        self.declared_order
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn eval(&self, mu: f64) -> Complex64 {
        (self.eval)(mu)
    }

    /// m^{(k)}(μ), analytic when available, else a fourth-order central
    /// difference with step μ·ε^{1/(k+2)}.
    pub fn derivative(&self, k: usize, mu: f64) -> Complex64 {
        if k == 0 {
            return self.eval(mu);
        }
        match &self.derivative {
            Some(d) => d(k, mu),
            None => self.fd_derivative(k, mu),
        }
    }

    pub fn fd_derivative(&self, k: usize, mu: f64) -> Complex64 {
        if k == 0 {
            return self.eval(mu);
        }
        let h = mu * f64::EPSILON.powf(1.0 / (k as f64 + 2.0));
        let p = (k + 1) / 2 + 1;
        let offsets: Vec<f64> = (0..=2 * p).map(|i| i as f64 - p as f64).collect();
        let w = fornberg_weights(&offsets, k);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&o, &wi) in offsets.iter().zip(&w) {
            let v = self.eval(mu + o * h);
            if v.re.is_infinite() || v.im.is_infinite() {
                return real(f64::INFINITY);
            }
            acc += v * wi;
        }
        acc / h.powi(k as i32)
    }
}

/// (1 − u)_+^δ; δ = 0 gives the indicator of u < 1.
pub fn truncated_power(u: f64, delta: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else if delta == 0.0 {
        1.0
    } else {
        (1.0 - u).powf(delta)
    }
}

/// Weights of the k-th derivative at 0 on the given stencil offsets.
fn fornberg_weights(offsets: &[f64], k: usize) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0; k + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    for i in 1..n {
        let mn = i.min(k);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for m in (1..=mn).rev() {
                    c[i][m] = c1 * (m as f64 * c[i - 1][m - 1] - c5 * c[i - 1][m]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for m in (1..=mn).rev() {
                c[j][m] = (c4 * c[j][m] - m as f64 * c[j][m - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[k]).collect()
}

/// m((2|α|+n)|λ|) on one slice.
pub fn multiplier_slice(m: &ScalarSymbol, s: &HermiteSlice) -> Result<HermiteSlice> {
    let lam = s.lambda().abs();
    let n = s.dim();
    let mut failure = None;
    let out = s.map_diagonal(|a| {
        let mu = (2 * a.degree() + n) as f64 * lam;
        let v = m.eval(mu);
        if !(v.re.is_finite() && v.im.is_finite()) && failure.is_none() {
            failure = Some(mu);
        }
        v
    });
    match failure {
        Some(mu) => Err(Error::Evaluation {
            mu,
            reason: format!("symbol {} is not finite", m.name()),
        }),
        None => Ok(out),
    }
}

/// c_α(λ) ↦ m((2|α|+n)|λ|) c_α(λ).
pub fn apply_scalar_multiplier(m: &ScalarSymbol, c: &SpectralCoefficients) -> Result<SpectralCoefficients> {
    c.try_map_slices(|s| multiplier_slice(m, s))
}

/// c_α(λ) ↦ μ^s c_α(λ) with μ = (2|α|+n)|λ|.
pub fn fractional_power_apply(s: f64, c: &SpectralCoefficients) -> SpectralCoefficients {
    c.map_slices(|sl| {
        let lam = sl.lambda().abs();
        let n = sl.dim();
        sl.map_diagonal(|a| real(((2 * a.degree() + n) as f64 * lam).powf(s)))
    })
}

/// Γ(1/2)^{−1} ∫₀^∞ t^{−1/2} e^{−tμ} dt on a log-spaced trapezoid rule; equals
/// μ^{−1/2}.
pub fn inverse_sqrt_by_semigroup(mu: f64) -> f64 {
    let rule = LogRule::new(1e-16 / mu, 60.0 / mu, 400).expect("valid range");
    rule.integrate(|t| t.powf(-0.5) * (-t * mu).exp()) / std::f64::consts::PI.sqrt()
}

/// H^{−1/2} applied through the semigroup integral instead of the direct
/// diagonal power; a cross-check of [`fractional_power_apply`] at s = −1/2.
pub fn inverse_sqrt_semigroup_apply(c: &SpectralCoefficients) -> SpectralCoefficients {
    c.map_slices(|sl| {
        let lam = sl.lambda().abs();
        let n = sl.dim();
        sl.map_diagonal(|a| real(inverse_sqrt_by_semigroup((2 * a.degree() + n) as f64 * lam)))
    })
}

/// Derivative values above this count as unbounded.
pub const HORMANDER_OVERFLOW: f64 = 1e12;

/// Sampled suprema S_k = sup |μ^k m^{(k)}(μ)| for k = 0..=N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HormanderReport {
    pub symbol: String,
    pub order: usize,
    pub mu_range: (f64, f64),
    pub samples: usize,
    pub sup: Vec<f64>,
    pub argmax: Vec<f64>,
    pub analytic_derivatives: bool,
    pub bounded: bool,
}

pub fn hormander_check(m: &ScalarSymbol, order: usize, mu_range: (f64, f64), samples: usize) -> Result<HormanderReport> {
    if order == 0 {
        return Err(Error::domain("Hormander order must be at least 1"));
    }
    let (lo, hi) = mu_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::domain(format!("mu range [{lo}, {hi}] must lie in (0, inf)")));
    }
    let rule = LogRule::new(lo, hi, samples.max(2))?;
    let mut sup = vec![0.0; order + 1];
    let mut argmax = vec![lo; order + 1];
    for &mu in &rule.nodes {
        for k in 0..=order {
            let d = m.derivative(k, mu);
            if d.re.is_nan() || d.im.is_nan() {
                return Err(Error::Evaluation {
                    mu,
                    reason: format!("derivative of order {k} of {} is NaN", m.name()),
                });
            }
            let v = mu.powi(k as i32) * d.norm();
            if v > sup[k] || v.is_infinite() && sup[k].is_finite() {
                sup[k] = v;
                argmax[k] = mu;
            }
        }
    }
    let bounded = sup.iter().all(|s| s.is_finite() && *s < HORMANDER_OVERFLOW);
    Ok(HormanderReport {
        symbol: m.name().to_string(),
        order,
        mu_range,
        samples: rule.len(),
        sup,
        argmax,
        analytic_derivatives: m.has_analytic_derivatives(),
        bounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::transform::apply_grushin;
    use std::f64::consts::PI;

    fn coeffs(seed: u64) -> SpectralCoefficients {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = GridSpec::new(2, 16, 6.0, 8, 2.0 * PI).unwrap();
        let mut c = SpectralCoefficients::zeros(g, 6).unwrap();
        for m in g.frequency_indices() {
            for v in c.slice_mut(m).unwrap().coeffs_mut() {
                *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        c
    }

    #[test]
    fn identity_and_grushin() {
        let c = coeffs(1);
        assert_eq!(apply_scalar_multiplier(&ScalarSymbol::one(), &c).unwrap(), c);
        let a = apply_scalar_multiplier(&ScalarSymbol::power(1.0), &c).unwrap();
        assert!(a.max_abs_diff(&apply_grushin(&c)) < 1e-12);
    }

    #[test]
    fn heat_composition() {
        let c = coeffs(2);
        let two = apply_scalar_multiplier(
            &ScalarSymbol::heat(0.7),
            &apply_scalar_multiplier(&ScalarSymbol::heat(0.3), &c).unwrap(),
        )
        .unwrap();
        let one = apply_scalar_multiplier(&ScalarSymbol::heat(1.0), &c).unwrap();
        assert!(two.max_abs_diff(&one) < 1e-15);
    }

    #[test]
    fn non_finite_symbol_names_mu() {
        let c = coeffs(3);
        let bad = ScalarSymbol::new("bad", 0, |mu| real(if mu > 5.0 { f64::INFINITY } else { 1.0 }));
        match apply_scalar_multiplier(&bad, &c) {
            Err(Error::Evaluation { mu, .. }) => assert!(mu > 5.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inverse_sqrt_routes_agree() {
        let c = coeffs(4);
        let h = fractional_power_apply(-0.5, &c);
        let back = apply_grushin(&fractional_power_apply(-0.5, &h));
        assert!(back.max_abs_diff(&c) < 1e-12);
        let semi = inverse_sqrt_semigroup_apply(&c);
        let scale = h.slices().values().flat_map(|s| s.coeffs()).map(|v| v.norm()).fold(0.0, f64::max);
        assert!(semi.max_abs_diff(&h) < 1e-6 * scale);
        // α = 0, n = 2, λ = 2 gives μ = 4
        let ratio = h.slice(2).unwrap().coeffs()[0] / c.slice(2).unwrap().coeffs()[0];
        assert!((ratio - 0.5).norm() < 1e-15);
    }

    #[test]
    fn semigroup_quadrature_oracle() {
        // independent route: t = u², Γ(1/2)^{−1}·2∫₀^∞ e^{−μu²} du by Gauss–Legendre panels
        for mu in [1.0f64, 3.0, 10.0] {
            let mut acc = 0.0;
            let width = 0.25 / mu.sqrt();
            for p in 0..200 {
                let (x, w) = crate::quadrature::gauss_legendre(12, p as f64 * width, (p + 1) as f64 * width).unwrap();
                acc += x.iter().zip(&w).map(|(u, w)| w * (-mu * u * u).exp()).sum::<f64>();
            }
            let oracle = 2.0 * acc / PI.sqrt();
            assert!((oracle * mu.sqrt() - 1.0).abs() < 1e-12);
            let v = inverse_sqrt_by_semigroup(mu);
            assert!((v / oracle - 1.0).abs() < 1e-6, "mu={mu}: {v} vs {oracle}");
        }
    }

    #[test]
    fn rational_hormander() {
        let r = hormander_check(&ScalarSymbol::rational(), 2, (1.0, 1e4), 400).unwrap();
        assert!(r.bounded);
        for (k, bound) in [1.0, 1.0, 2.0].iter().enumerate() {
            assert!(r.sup[k] <= bound * 1.05, "k={k}: {}", r.sup[k]);
        }
    }

    #[test]
    fn imaginary_power_hormander() {
        let tau = 2.0;
        let r = hormander_check(&ScalarSymbol::imaginary_power(tau), 2, (1.0, 1e6), 200).unwrap();
        let e = Complex64::new(0.0, tau);
        for k in 0..=2 {
            let expect: f64 = (0..k).map(|j| (e - j as f64).norm()).product();
            assert!((r.sup[k] / expect - 1.0).abs() < 0.05, "k={k}");
        }
        assert!(r.bounded);
    }

    #[test]
    fn exponential_is_unbounded() {
        let m = ScalarSymbol::new("exp", 2, |mu| real(mu.exp()));
        let r = hormander_check(&m, 2, (1.0, 1e4), 100).unwrap();
        assert!(!r.bounded);
        assert!(r.sup[0] > HORMANDER_OVERFLOW);
    }

    #[test]
    fn finite_differences_match_analytic() {
        let symbols = [
            ScalarSymbol::rational(),
            ScalarSymbol::heat(0.3),
            ScalarSymbol::power(-0.5),
            ScalarSymbol::imaginary_power(2.0),
            ScalarSymbol::cesaro(2.5),
        ];
        for m in &symbols {
            for &mu in &[0.3, 0.7, 2.0, 9.0] {
                if m.name().starts_with("cesaro") && mu >= 1.0 {
                    continue;
                }
                for k in 1..=3 {
                    let a = m.derivative(k, mu);
                    let f = m.fd_derivative(k, mu);
                    let scale = a.norm().max(mu.powi(-(k as i32)) * m.eval(mu).norm());
                    assert!((a - f).norm() < 1e-6 * scale, "{} k={k} mu={mu}: {a} vs {f}", m.name());
                }
            }
        }
    }

    #[test]
    fn parse_names() {
        for s in ["one", "heat:0.5", "power:-0.5", "cesaro-delta:1", "imaginary-power:2", "rational", "rational:(1+mu)^-1"] {
            assert!(ScalarSymbol::parse(s).is_ok(), "{s}");
        }
        assert!(ScalarSymbol::parse("heat").is_err());
        assert!(ScalarSymbol::parse("heat:x").is_err());
        assert!(ScalarSymbol::parse("cesaro-delta:-1").is_err());
        assert!(ScalarSymbol::parse("nope").is_err());
    }

    #[test]
    fn truncated_power_boundary() {
        assert_eq!(truncated_power(1.0, 0.0), 0.0);
        assert_eq!(truncated_power(0.999, 0.0), 1.0);
        assert_eq!(truncated_power(2.0, 1.5), 0.0);
    }
}
