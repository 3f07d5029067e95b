//! Mode-k products on dense tensors stored with axis 0 fastest.

use std::ops::Mul;

use num_complex::Complex64;

/// Applies `mat` (row-major, `rows × shape[axis]`) along `axis`.
///
/// Returns the new data; the caller updates `shape[axis] = rows`.
pub fn contract_axis<M>(
    data: &[Complex64],
    shape: &[usize],
    axis: usize,
    mat: &[M],
    rows: usize,
) -> Vec<Complex64>
where
    M: Copy,
    Complex64: Mul<M, Output = Complex64>,
{
    let cols = shape[axis];
    debug_assert_eq!(mat.len(), rows * cols);
    debug_assert_eq!(data.len(), shape.iter().product::<usize>());
    let inner: usize = shape[..axis].iter().product();
    let outer: usize = shape[axis + 1..].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); inner * rows * outer];
    for o in 0..outer {
        let src = &data[o * cols * inner..(o + 1) * cols * inner];
        let dst = &mut out[o * rows * inner..(o + 1) * rows * inner];
        for r in 0..rows {
            let row = &mat[r * cols..(r + 1) * cols];
            let d = &mut dst[r * inner..(r + 1) * inner];
            for (c, &m) in row.iter().enumerate() {
                let s = &src[c * inner..(c + 1) * inner];
                for (di, &si) in d.iter_mut().zip(s) {
                    *di += si * m;
                }
            }
        }
    }
    out
}

/// Applies the same matrix along every axis.
pub fn contract_all<M>(data: &[Complex64], shape: &mut [usize], mat: &[M], rows: usize) -> Vec<Complex64>
where
    M: Copy,
    Complex64: Mul<M, Output = Complex64>,
{
    let mut cur = data.to_vec();
    for axis in 0..shape.len() {
        cur = contract_axis(&cur, shape, axis, mat, rows);
        shape[axis] = rows;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contracts_middle_axis() {
        // shape (2, 3, 2); sum along axis 1
        let data: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let out = contract_axis(&data, &[2, 3, 2], 1, &[1.0, 1.0, 1.0], 1);
        // element (i0, i2) = Σ_{i1} data[i0 + 2 i1 + 6 i2]
        let expect = [0 + 2 + 4, 1 + 3 + 5, 6 + 8 + 10, 7 + 9 + 11];
        for (o, e) in out.iter().zip(expect) {
            assert_eq!(o.re, e as f64);
        }
    }
}
