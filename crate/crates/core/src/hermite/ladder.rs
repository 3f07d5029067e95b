use std::sync::Arc;

use num_complex::Complex64;

use super::HermiteSlice;
use crate::error::{Error, Result};
use crate::multi_index::Simplex;

/// Which ladder operator to apply.
///
/// `Creation` is A_j(λ) = −∂_j + λx_j and `Annihilation` is
/// A_j(λ)* = ∂_j + λx_j. For λ > 0 they raise and lower α_j. For λ < 0,
/// A_j(λ) = −A_j(|λ|)*, so the roles swap and pick up a minus sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LadderKind {
    Creation,
    Annihilation,
}

impl LadderKind {
    /// Whether the operator raises the index on a slice at `lambda`.
    pub fn raises(self, lambda: f64) -> bool {
        matches!(
            (self, lambda > 0.0),
            (LadderKind::Creation, true) | (LadderKind::Annihilation, false)
        )
    }

    pub fn adjoint(self) -> Self {
        match self {
            LadderKind::Creation => LadderKind::Annihilation,
            LadderKind::Annihilation => LadderKind::Creation,
        }
    }
}

/// Applies A_j(λ) or A_j(λ)* along zero-based `axis` in coefficient space.
///
/// A raising action returns a slice of truncation K+1; a lowering action
/// keeps K (its top degree is then empty).
pub fn ladder_apply(slice: &HermiteSlice, axis: usize, kind: LadderKind) -> Result<HermiteSlice> {
    let n = slice.dim();
    if axis >= n {
        return Err(Error::domain(format!(
            "ladder axis {} outside 1..={n}",
            axis + 1
        )));
    }
    let lambda = slice.lambda();
    let two_lam = 2.0 * lambda.abs();
    let sign = if lambda > 0.0 { 1.0 } else { -1.0 };
    let k = slice.max_degree();
    let raises = kind.raises(lambda);
    let out_simplex = if raises {
        Arc::new(Simplex::new(n, k + 1)?)
    } else {
        slice.simplex().clone()
    };
    let mut out = vec![Complex64::new(0.0, 0.0); out_simplex.len()];
    for (alpha, &c) in slice.iter() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let aj = alpha.get(axis) as f64;
        if raises {
            let target = alpha.raised(axis);
            let pos = out_simplex.position(&target).expect("degree K+1 fits");
            out[pos] += c * (sign * (two_lam * (aj + 1.0)).sqrt());
        } else if let Some(target) = alpha.lowered(axis) {
            let pos = out_simplex.position(&target).expect("lower degree fits");
            out[pos] += c * (sign * (two_lam * aj).sqrt());
        }
    }
    Ok(HermiteSlice::from_parts_unchecked(out_simplex, lambda, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_index::MultiIndex;

    fn unit(a: &[u32], k: usize, lam: f64) -> HermiteSlice {
        HermiteSlice::unit(&MultiIndex::new(a).unwrap(), k, lam).unwrap()
    }

    #[test]
    fn creation_on_ground_state() {
        let out = ladder_apply(&unit(&[0], 4, 1.0), 0, LadderKind::Creation).unwrap();
        assert_eq!(out.max_degree(), 5);
        assert!((out.coeffs()[1].re - 2f64.sqrt()).abs() < 1e-15);
        let out4 = ladder_apply(&unit(&[0], 4, 4.0), 0, LadderKind::Creation).unwrap();
        assert!((out4.coeffs()[1].re - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn annihilation_kills_ground_state() {
        let out = ladder_apply(&unit(&[0], 4, 1.0), 0, LadderKind::Annihilation).unwrap();
        assert!(out.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn negative_lambda_swaps_roles() {
        let out = ladder_apply(&unit(&[2], 4, -1.0), 0, LadderKind::Creation).unwrap();
        // A(−1) = −A(1)*: lowers with factor −√(2·2)
        assert!((out.coeffs()[1].re + 2.0).abs() < 1e-15);
        assert_eq!(out.max_degree(), 4);
    }

    #[test]
    fn number_relation() {
        for lam in [0.7, -1.3] {
            let s = unit(&[3, 1], 6, lam);
            let up = ladder_apply(&s, 0, LadderKind::Creation).unwrap();
            let back = ladder_apply(&up, 0, LadderKind::Annihilation).unwrap();
            let a = MultiIndex::new(&[3, 1]).unwrap();
            let factor = if lam > 0.0 { 2.0 * 4.0 } else { 2.0 * 3.0 } * lam.abs();
            assert!((back.coeff(&a).re - factor).abs() < 1e-13);
        }
    }

    #[test]
    fn bad_axis() {
        assert!(ladder_apply(&unit(&[0], 2, 1.0), 1, LadderKind::Creation).is_err());
    }
}
