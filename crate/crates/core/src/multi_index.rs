//! Multi-indices α ∈ N^n and the truncated simplex {α : |α| ≤ K}.
//!
//! Coefficient arrays are stored densely in graded order: all indices of
//! degree 0, then degree 1, and so on. Within a degree the first coordinate
//! runs downwards, recursively. [`Simplex::position`] computes the rank in
//! closed form so lookups never allocate.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    entries: [u32; MAX_DIM],
    dim: u8,
}

impl MultiIndex {
    pub fn new(entries: &[u32]) -> Result<Self> {
        if entries.is_empty() || entries.len() > MAX_DIM {
            return Err(Error::domain(format!(
                "multi-index dimension {} outside 1..={MAX_DIM}",
                entries.len()
            )));
        }
        let mut e = [0; MAX_DIM];
        e[..entries.len()].copy_from_slice(entries);
        Ok(Self {
            entries: e,
            dim: entries.len() as u8,
        })
    }

    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        Self {
            entries: [0; MAX_DIM],
            dim: dim as u8,
        }
    }

    /// Unit index e_j (zero-based axis).
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut a = Self::zero(dim);
        a.entries[axis] = 1;
        a
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries[..self.dim()]
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.entries()[axis]
    }

    pub fn degree(&self) -> usize {
        self.entries().iter().map(|&a| a as usize).sum()
    }

    /// α + e_j.
    pub fn raised(&self, axis: usize) -> Self {
        let mut a = *self;
        a.entries[axis] += 1;
        a
    }

    /// α − e_j, or `None` when α_j = 0.
    pub fn lowered(&self, axis: usize) -> Option<Self> {
        if self.entries[axis] == 0 {
            return None;
        }
        let mut a = *self;
        a.entries[axis] -= 1;
        Some(a)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.entries())
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of α ∈ N^dim with |α| = degree.
fn count_exact(dim: usize, degree: usize) -> usize {
    if dim == 0 {
        return usize::from(degree == 0);
    }
    binomial(degree + dim - 1, dim - 1)
}

/// Number of α ∈ N^dim with |α| < degree.
fn count_below(dim: usize, degree: usize) -> usize {
    if degree == 0 {
        0
    } else {
        binomial(degree - 1 + dim, dim)
    }
}

fn rank_within(entries: &[u32], degree: usize) -> usize {
    if entries.len() <= 1 {
        return 0;
    }
    let a0 = entries[0] as usize;
    let rest_dim = entries.len() - 1;
    let skipped: usize = (a0 + 1..=degree)
        .map(|b| count_exact(rest_dim, degree - b))
        .sum();
    skipped + rank_within(&entries[1..], degree - a0)
}

/// The index set {α ∈ N^n : |α| ≤ K} in graded order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplex {
    dim: usize,
    max_degree: usize,
    indices: Vec<MultiIndex>,
}

impl Simplex {
    pub fn new(dim: usize, max_degree: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::domain(format!(
                "spatial dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        let mut indices = Vec::with_capacity(Self::size_of(dim, max_degree));
        let mut buf = vec![0u32; dim];
        for d in 0..=max_degree {
            push_degree(&mut indices, &mut buf, 0, d);
        }
        Ok(Self {
            dim,
            max_degree,
            indices,
        })
    }

    /// Cardinality of the simplex without building it.
    pub fn size_of(dim: usize, max_degree: usize) -> usize {
        count_below(dim, max_degree + 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.indices.iter()
    }

    /// Dense position of α, or `None` if α lies outside the simplex.
    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        debug_assert_eq!(alpha.dim(), self.dim);
        let d = alpha.degree();
        if d > self.max_degree {
            return None;
        }
        Some(count_below(self.dim, d) + rank_within(alpha.entries(), d))
    }

    /// Range of dense positions holding indices of exactly `degree`.
    pub fn degree_range(&self, degree: usize) -> std::ops::Range<usize> {
        let start = count_below(self.dim, degree);
        start..start + count_exact(self.dim, degree)
    }
}

fn push_degree(out: &mut Vec<MultiIndex>, buf: &mut [u32], axis: usize, remaining: usize) {
    let dim = buf.len();
    if axis == dim - 1 {
        buf[axis] = remaining as u32;
        out.push(MultiIndex::new(buf).expect("dimension checked"));
        return;
    }
    for a in (0..=remaining).rev() {
        buf[axis] = a as u32;
        push_degree(out, buf, axis + 1, remaining - a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_match_binomials() {
        assert_eq!(Simplex::new(1, 5).unwrap().len(), 6);
        assert_eq!(Simplex::new(2, 32).unwrap().len(), 561);
        assert_eq!(Simplex::new(3, 4).unwrap().len(), 35);
        assert_eq!(Simplex::size_of(2, 8), 45);
    }

    #[test]
    fn position_inverts_enumeration() {
        for dim in 1..=3 {
            let s = Simplex::new(dim, 9).unwrap();
            for (i, a) in s.iter().enumerate() {
                assert_eq!(s.position(a), Some(i), "{a:?}");
            }
        }
    }

    #[test]
    fn degree_ranges_are_graded() {
        let s = Simplex::new(2, 6).unwrap();
        for d in 0..=6 {
            for i in s.degree_range(d) {
                assert_eq!(s.indices()[i].degree(), d);
            }
        }
    }

    #[test]
    fn outside_simplex_has_no_position() {
        let s = Simplex::new(2, 3).unwrap();
        let a = MultiIndex::new(&[2, 2]).unwrap();
        assert_eq!(s.position(&a), None);
    }

    #[test]
    fn ladder_moves() {
        let a = MultiIndex::new(&[0, 3]).unwrap();
        assert_eq!(a.lowered(0), None);
        assert_eq!(a.lowered(1).unwrap().entries(), &[0, 2]);
        assert_eq!(a.raised(0).degree(), 4);
    }

    #[test]
    fn rejects_bad_dimension() {
        assert!(MultiIndex::new(&[]).is_err());
        assert!(Simplex::new(4, 2).is_err());
    }
}
