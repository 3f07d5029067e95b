use std::f64::consts::PI;

use super::check_lambda;
use crate::error::{Error, Result};

/// Beyond s = |λ|t of this size the kernel is replaced by its ground-state
/// term e^{−n s} Φ_0^λ(x) Φ_0^λ(y).
pub const MEHLER_ONE_TERM_THRESHOLD: f64 = 12.0;

/// Kernel h_t^λ(x, y) of e^{−tH(λ)}.
///
/// At λ = 1 this is (2π sinh 2t)^{−n/2} exp(−¼(|x+y|² tanh t + |x−y|² coth t));
/// general λ follows from h_t^λ(x,y) = |λ|^{n/2} h_{|λ|t}(|λ|^{1/2}x, |λ|^{1/2}y).
pub fn mehler_kernel(t: f64, lambda: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("semigroup time t = {t} must be positive")));
    }
    check_lambda(lambda)?;
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::domain("kernel points must share a positive dimension"));
    }
    let a = lambda.abs();
    let r = a.sqrt();
    let n = x.len() as f64;
    let s = a * t;
    let (mut plus, mut minus, mut sq) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let (u, v) = (r * xi, r * yi);
        plus += (u + v) * (u + v);
        minus += (u - v) * (u - v);
        sq += u * u + v * v;
    }
    let unit = if s > MEHLER_ONE_TERM_THRESHOLD {
        (-n * s).exp() * PI.powf(-0.5 * n) * (-0.5 * sq).exp()
    } else {
        (2.0 * PI * (2.0 * s).sinh()).powf(-0.5 * n)
            * (-0.25 * (plus * s.tanh() + minus / s.tanh())).exp()
    };
    Ok(a.powf(0.5 * n) * unit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::hermite_functions;

    #[test]
    fn symmetric() {
        let pairs = [([0.3, -1.1], [0.8, 0.2]), ([2.0, 0.0], [-0.5, 1.5])];
        for (x, y) in pairs {
            for (t, lam) in [(0.2, 1.0), (1.5, -3.0), (30.0, 1.0)] {
                let a = mehler_kernel(t, lam, &x, &y).unwrap();
                let b = mehler_kernel(t, lam, &y, &x).unwrap();
                assert!((a - b).abs() <= 1e-15 * a.abs());
                assert!(a > 0.0);
            }
        }
    }

    #[test]
    fn eigen_sum_oracle() {
        let (t, x, y) = (0.5, 0.3, -0.2);
        let hx = hermite_functions(60, x);
        let hy = hermite_functions(60, y);
        let sum: f64 = (0..=60)
            .map(|k| (-(2.0 * k as f64 + 1.0) * t).exp() * hx[k] * hy[k])
            .sum();
        let v = mehler_kernel(t, 1.0, &[x], &[y]).unwrap();
        assert!((v - sum).abs() < 1e-10, "{v} vs {sum}");
    }

    #[test]
    fn one_term_regime_is_continuous() {
        let x = [0.4];
        let y = [-0.3];
        let below = mehler_kernel(11.999_999, 1.0, &x, &y).unwrap();
        let above = mehler_kernel(12.000_001, 1.0, &x, &y).unwrap();
        assert!((below / above - 1.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_nonpositive_time() {
        assert!(mehler_kernel(0.0, 1.0, &[0.0], &[0.0]).is_err());
        assert!(mehler_kernel(-1.0, 1.0, &[0.0], &[0.0]).is_err());
        assert!(mehler_kernel(1.0, 0.0, &[0.0], &[0.0]).is_err());
    }
}
