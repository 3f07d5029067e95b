//! Quadrature rules: Gauss–Hermite (weight e^{−x²}), Gauss–Legendre on
//! [a, b], and log-spaced trapezoid rules on half-lines.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::hermite_functions;

/// Gauss rule against the weight e^{−x²} on R.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    /// Weights against e^{−x²}; they sum to √π.
    pub weights: Vec<f64>,
    /// Weights multiplied by e^{x²}, i.e. the rule for plain ∫ dx applied
    /// to functions of the form (polynomial)·e^{−x²}.
    pub scaled_weights: Vec<f64>,
    pub exactness_degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Q-point Gauss–Hermite rule, exact for x^m e^{−x²} with m ≤ 2Q − 1.
///
/// Nodes come from the Jacobi matrix eigenvalues and are polished by Newton
/// steps on the normalized Hermite function h_Q. Weights use the Christoffel
/// form 1/Σ_{k<Q} h_k(x)², which never forms e^{x²} explicitly.
pub fn gauss_hermite_rule(q: usize) -> Result<QuadratureRule> {
    if q == 0 {
        return Err(Error::domain("Gauss-Hermite rule needs at least one node"));
    }
    let mut jacobi = DMatrix::<f64>::zeros(q, q);
    for k in 1..q {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));

    let mut scaled_weights = Vec::with_capacity(q);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let h = hermite_functions(q, *x);
            let deriv = (2.0 * q as f64).sqrt() * h[q - 1] - *x * h[q];
            if deriv == 0.0 {
                break;
            }
            let step = h[q] / deriv;
            *x -= step;
            if step.abs() < 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        // symmetric rules have an exact zero node when q is odd
        if x.abs() < 1e-15 {
            *x = 0.0;
        }
        let h = hermite_functions(q - 1, *x);
        scaled_weights.push(1.0 / h.iter().map(|v| v * v).sum::<f64>());
    }
    let weights = nodes
        .iter()
        .zip(&scaled_weights)
        .map(|(x, w)| w * (-x * x).exp())
        .collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        scaled_weights,
        exactness_degree: 2 * q - 1,
    })
}

/// Gauss–Legendre nodes and weights on [a, b].
pub fn gauss_legendre(q: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if q == 0 {
        return Err(Error::domain("Gauss-Legendre rule needs at least one node"));
    }
    let mut nodes = Vec::with_capacity(q);
    let mut weights = Vec::with_capacity(q);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for i in 0..q {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(q, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(mid - half * x);
        weights.push(half * 2.0 / ((1.0 - x * x) * dp * dp));
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(q: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Trapezoid rule in log t on [lo, hi]: ∫ g(t) dt ≈ Σ w_i g(t_i), with
/// t_i log-spaced and w_i = t_i Δs (halved at the ends).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LogRule {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) || count < 2 {
            return Err(Error::domain(format!(
                "log rule needs 0 < lo < hi and at least two nodes (lo={lo}, hi={hi}, count={count})"
            )));
        }
        let (s0, s1) = (lo.ln(), hi.ln());
        let ds = (s1 - s0) / (count - 1) as f64;
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for i in 0..count {
            let t = (s0 + ds * i as f64).exp();
            let end = i == 0 || i == count - 1;
            nodes.push(t);
            weights.push(if end { 0.5 } else { 1.0 } * t * ds);
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * g(t))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn one_node_rule() {
        let r = gauss_hermite_rule(1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert!((r.weights[0] - PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_node_rule() {
        let r = gauss_hermite_rule(2).unwrap();
        let s = 0.5f64.sqrt();
        assert!((r.nodes[0] + s).abs() < 1e-15 && (r.nodes[1] - s).abs() < 1e-15);
        for w in &r.weights {
            assert!((w - PI.sqrt() / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(gauss_hermite_rule(0).is_err());
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
    }

    // ∫ x^m e^{−x²} dx = Γ((m+1)/2) for even m, 0 for odd m
    fn moment(m: usize) -> f64 {
        if m % 2 == 1 {
            return 0.0;
        }
        // Γ(j + 1/2) = (2j)! √π / (4^j j!)
        let j = m / 2;
        let mut g = PI.sqrt();
        for i in 0..j {
            g *= i as f64 + 0.5;
        }
        g
    }

    #[test]
    fn moments_exact_to_degree() {
        for q in [1, 3, 8, 20, 40, 66] {
            let r = gauss_hermite_rule(q).unwrap();
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.weights.iter().all(|&w| w > 0.0));
            let total: f64 = r.weights.iter().sum();
            assert!((total - PI.sqrt()).abs() < 1e-13, "q={q}: {total}");
            for m in 0..=(2 * q - 1).min(30) {
                let approx: f64 = r
                    .nodes
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x.powi(m as i32))
                    .sum();
                let exact = moment(m);
                let scale: f64 = r
                    .nodes
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x.abs().powi(m as i32))
                    .sum();
                assert!(
                    (approx - exact).abs() < 1e-13 * scale.max(1.0),
                    "q={q} m={m}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10, 0.0, 2.0).unwrap();
        let val: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(19)).sum();
        assert!((val - 2f64.powi(20) / 20.0).abs() < 1e-9);
    }

    #[test]
    fn log_rule_gamma_integral() {
        let r = LogRule::new(1e-8, 60.0, 300).unwrap();
        let v = r.integrate(|t| t * (-2.0 * t).exp());
        assert!((v - 0.25).abs() < 1e-10, "{v}");
    }
}
