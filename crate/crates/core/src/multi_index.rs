//! Action multi-indices `α ∈ ℕⁿ` in graded-lexicographic order.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A multi-index `α = (α_1, …, α_n)`.
///
/// Ordering is graded-lexicographic: first by `|α|`, then lexicographically
/// with the first axis most significant.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Self {
        MultiIndex(components)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The unit vector `e_j`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = vec![0; dim];
        v[axis] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Length `|α| = Σ α_j`.
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.0[axis]
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `α − e_j`, or `None` when `α_j = 0`.
    pub fn lower(&self, axis: usize) -> Option<MultiIndex> {
        let a = *self.0.get(axis)?;
        if a == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[axis] -= 1;
        Some(MultiIndex(v))
    }

    /// `α! = Π α_j!` as an exact integer.
    pub fn factorial(&self) -> u128 {
        self.0.iter().map(|&a| factorial(a as u64)).product()
    }

    /// `x^α = Π x_j^{α_j}`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product()
    }

    /// Every multi-index of dimension `dim` and length exactly `degree`,
    /// in graded-lex order.
    pub fn all_of_degree(dim: usize, degree: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = vec![0u32; dim];
        fill_degree(&mut current, 0, degree, &mut out);
        out.sort();
        out
    }
}

fn fill_degree(current: &mut Vec<u32>, axis: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
    let dim = current.len();
    if dim == 0 {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if axis == dim - 1 {
        current[axis] = remaining as u32;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for a in 0..=remaining {
        current[axis] = a as u32;
        fill_degree(current, axis + 1, remaining - a, out);
    }
    current[axis] = 0;
}

pub(crate) fn factorial(n: u64) -> u128 {
    (1..=n as u128).product()
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let all = MultiIndex::all_of_degree(2, 2);
        let raw: Vec<_> = all.iter().map(|a| a.as_slice().to_vec()).collect();
        assert_eq!(raw, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert!(MultiIndex::new(vec![0, 1]) < MultiIndex::new(vec![2, 0]));
    }

    #[test]
    fn counts_match_stars_and_bars() {
        // C(d + n - 1, n - 1)
        assert_eq!(MultiIndex::all_of_degree(3, 4).len(), 15);
        assert_eq!(MultiIndex::all_of_degree(1, 7).len(), 1);
        assert_eq!(MultiIndex::all_of_degree(2, 0).len(), 1);
    }

    #[test]
    fn factorial_and_lower() {
        let a = MultiIndex::new(vec![3, 2]);
        assert_eq!(a.factorial(), 12);
        assert_eq!(a.lower(1), Some(MultiIndex::new(vec![3, 1])));
        assert_eq!(MultiIndex::new(vec![0, 2]).lower(0), None);
    }
}
