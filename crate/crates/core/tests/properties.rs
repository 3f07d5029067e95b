use std::f64::consts::PI;

use grushin::calculus::{multiplier_slice, ScalarSymbol};
use grushin::grid::{GridFunction, GridSpec};
use grushin::hermite::{ladder_apply, HermiteSlice, LadderKind};
use grushin::io::{decode_grid_function, encode_grid_function};
use grushin::lab::lp_norm_complex;
use grushin::transform::{forward_transform, inverse_transform, SpectralCoefficients};
use num_complex::Complex64;
use proptest::prelude::*;

fn lambda() -> impl Strategy<Value = f64> {
    (0.1f64..5.0, any::<bool>()).prop_map(|(l, neg)| if neg { -l } else { l })
}

fn slice(n: usize, k: usize, lam: f64, seed: &[(f64, f64)]) -> HermiteSlice {
    let mut s = HermiteSlice::zeros(n, k, lam).unwrap();
    for (c, (re, im)) in s.coeffs_mut().iter_mut().zip(seed.iter().cycle()) {
        *c = Complex64::new(*re, *im);
    }
    s
}

fn pairs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ladder_operators_are_adjoint(n in 1usize..=2, k in 0usize..7, lam in lambda(), a in pairs(), b in pairs(), axis in 0usize..2) {
        let axis = axis % n;
        let s = slice(n, k, lam, &a);
        let t = slice(n, k + 1, lam, &b);
        let lhs = ladder_apply(&s, axis, LadderKind::Creation).unwrap().inner(&t);
        let rhs = s.inner(&ladder_apply(&t, axis, LadderKind::Annihilation).unwrap());
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn ladder_commutator_is_two_lambda(n in 1usize..=2, k in 1usize..7, lam in lambda(), a in pairs(), axis in 0usize..2) {
        let axis = axis % n;
        let s = slice(n, k, lam, &a).with_max_degree(k - 1).with_max_degree(k);
        let cre = |x: &HermiteSlice| ladder_apply(x, axis, LadderKind::Creation).unwrap();
        let ann = |x: &HermiteSlice| ladder_apply(x, axis, LadderKind::Annihilation).unwrap();
        let lhs = ann(&cre(&s)).with_max_degree(k);
        let rhs = cre(&ann(&s)).with_max_degree(k);
        for ((l, r), c) in lhs.coeffs().iter().zip(rhs.coeffs()).zip(s.coeffs()) {
            prop_assert!((l - r - 2.0 * lam * c).norm() < 1e-10 * (1.0 + lam.abs()));
        }
    }

    #[test]
    fn heat_symbols_compose(s1 in 0.0f64..2.0, s2 in 0.0f64..2.0, lam in lambda(), a in pairs()) {
        let f = slice(2, 5, lam, &a);
        let two = multiplier_slice(&ScalarSymbol::heat(s2), &multiplier_slice(&ScalarSymbol::heat(s1), &f).unwrap()).unwrap();
        let one = multiplier_slice(&ScalarSymbol::heat(s1 + s2), &f).unwrap();
        for (x, y) in two.coeffs().iter().zip(one.coeffs()) {
            prop_assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn transform_round_trip(k in 0usize..7, m_max in 0i64..4, a in pairs()) {
        let grid = GridSpec::new(1, 64, 8.0, 16, 2.0 * PI).unwrap();
        let mut c = SpectralCoefficients::zeros(grid, k).unwrap();
        let mut it = a.iter().cycle();
        for m in grid.frequency_indices().filter(|m| m.abs() <= m_max) {
            for v in c.slice_mut(m).unwrap().coeffs_mut() {
                let (re, im) = it.next().unwrap();
                *v = Complex64::new(*re, *im);
            }
        }
        let back = forward_transform(&inverse_transform(&c), k).unwrap();
        prop_assert!(back.max_abs_diff(&c) < 1e-9);
    }

    #[test]
    fn grid_files_round_trip(nx_pow in 3u32..6, nt_pow in 3u32..6, vals in prop::collection::vec(-1e6f64..1e6, 2..64)) {
        let grid = GridSpec::new(1, 1 << nx_pow, 5.0, 1 << nt_pow, 3.0).unwrap();
        let values = (0..grid.len())
            .map(|i| Complex64::new(vals[i % vals.len()], vals[(i + 1) % vals.len()]))
            .collect();
        let f = GridFunction::new(grid, values).unwrap();
        let g = decode_grid_function(&encode_grid_function(&f)).unwrap();
        prop_assert_eq!(f, g);
    }

    #[test]
    fn lp_norm_is_homogeneous(vals in prop::collection::vec(-10.0f64..10.0, 1..50), c in -5.0f64..5.0, p in 1.01f64..8.0) {
        let v: Vec<Complex64> = vals.iter().map(|x| Complex64::new(*x, 0.5 * x)).collect();
        let w: Vec<Complex64> = v.iter().map(|x| x * c).collect();
        let (a, b) = (lp_norm_complex(&v, 0.3, p).unwrap(), lp_norm_complex(&w, 0.3, p).unwrap());
        prop_assert!((b - c.abs() * a).abs() <= 1e-12 * (1.0 + b));
    }
}
