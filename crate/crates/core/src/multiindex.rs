//! Multi-indices of partial derivatives and monomial exponents.

use std::cmp::Ordering;

use crate::rat::{binomial, factorial, rone, Rat};

/// A sequence of non-negative integer exponents.
///
/// Ordered graded-lexicographically so that sparse maps keyed by
/// `MultiIndex` iterate in the canonical printing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// |alpha| = sum of the entries.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference; `None` unless `other <= self`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// alpha! = prod alpha_i!.
    pub fn factorial(&self) -> Rat {
        self.0.iter().map(|&e| factorial(e)).product()
    }

    /// Componentwise binomial C(alpha, gamma); zero unless gamma <= alpha.
    pub fn binomial(&self, gamma: &MultiIndex) -> Rat {
        self.0
            .iter()
            .zip(&gamma.0)
            .map(|(&a, &g)| binomial(a, g))
            .fold(rone(), |acc, b| acc * b)
    }

    /// All gamma with 0 <= gamma <= self, componentwise.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex(Vec::with_capacity(self.len()))];
        for &a in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (a as usize + 1));
            for prefix in &out {
                for g in 0..=a {
                    let mut v = prefix.0.clone();
                    v.push(g);
                    next.push(MultiIndex(v));
                }
            }
            out = next;
        }
        out
    }

    /// Pad with trailing zeros up to dimension `n`.
    pub fn padded(&self, n: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v.resize(n.max(v.len()), 0);
        MultiIndex(v)
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// All multi-indices of dimension `n` with total degree exactly `d`.
pub fn indices_of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
    if n == 0 {
        return if d == 0 {
            vec![MultiIndex(vec![])]
        } else {
            vec![]
        };
    }
    let mut out = Vec::new();
    for first in 0..=d {
        for rest in indices_of_degree(n - 1, d - first) {
            let mut v = vec![first];
            v.extend(rest.0);
            out.push(MultiIndex(v));
        }
    }
    out
}

/// All multi-indices of dimension `n` with total degree at most `d`.
pub fn indices_up_to(n: usize, d: u32) -> Vec<MultiIndex> {
    (0..=d).flat_map(|k| indices_of_degree(n, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rint;

    #[test]
    fn graded_lex_order() {
        let a = MultiIndex(vec![0, 2]);
        let b = MultiIndex(vec![1, 0]);
        assert!(b < a); // degree decides first
        let c = MultiIndex(vec![1, 1]);
        let d = MultiIndex(vec![0, 2]);
        assert!(d < c); // same degree, lex on entries
    }

    #[test]
    fn sub_indices_count() {
        let a = MultiIndex(vec![2, 1]);
        assert_eq!(a.sub_indices().len(), 6);
        assert_eq!(a.binomial(&MultiIndex(vec![1, 1])), rint(2));
    }

    #[test]
    fn degree_enumeration() {
        assert_eq!(indices_of_degree(2, 2).len(), 3);
        assert_eq!(indices_up_to(2, 2).len(), 6);
        assert_eq!(indices_up_to(3, 3).len(), 20);
    }
}
