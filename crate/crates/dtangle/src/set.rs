//! Fixed-universe vertex sets.

use std::cmp::Ordering;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::Vertex;

/// A set of vertex ids drawn from `0..capacity`.
///
/// Ordering is lexicographic on the ascending member sequence, so a family of
/// sets sorts by smallest member first.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct VertexSet(FixedBitSet);

impl VertexSet {
    pub fn new(n: usize) -> Self {
        VertexSet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut b = FixedBitSet::with_capacity(n);
        b.insert_range(..);
        VertexSet(b)
    }

    pub fn from_iter<I: IntoIterator<Item = Vertex>>(n: usize, it: I) -> Self {
        let mut s = Self::new(n);
        for v in it {
            s.insert(v);
        }
        s
    }

    pub fn capacity(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, v: Vertex) -> bool {
        !self.0.put(v)
    }

    pub fn remove(&mut self, v: Vertex) {
        self.0.set(v, false);
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.contains(v)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0.ones()
    }

    pub fn to_vec(&self) -> Vec<Vertex> {
        self.0.ones().collect()
    }

    pub fn first(&self) -> Option<Vertex> {
        self.0.ones().next()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut b = self.0.clone();
        b.union_with(&other.0);
        VertexSet(b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut b = self.0.clone();
        b.intersect_with(&other.0);
        VertexSet(b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut b = self.0.clone();
        b.difference_with(&other.0);
        VertexSet(b)
    }

    pub fn complement(&self) -> Self {
        let mut b = self.0.clone();
        b.toggle_range(..);
        VertexSet(b)
    }

    pub fn union_with(&mut self, other: &Self) {
        self.0.union_with(&other.0);
    }

    pub fn intersect_with(&mut self, other: &Self) {
        self.0.intersect_with(&other.0);
    }

    pub fn difference_with(&mut self, other: &Self) {
        self.0.difference_with(&other.0);
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn intersects(&self, other: &Self) -> bool {
        !self.0.is_disjoint(&other.0)
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        self.0.intersection_count(&other.0)
    }
}

impl Ord for VertexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for VertexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// All `r`-subsets of `items`, in lexicographic order of positions.
pub fn combinations(items: &[Vertex], r: usize) -> Combinations<'_> {
    Combinations { items, idx: (0..r).collect(), done: r > items.len() }
}

pub struct Combinations<'a> {
    items: &'a [Vertex],
    idx: Vec<usize>,
    done: bool,
}

impl Iterator for Combinations<'_> {
    type Item = Vec<Vertex>;

    fn next(&mut self) -> Option<Vec<Vertex>> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&i| self.items[i]).collect();
        let n = self.items.len();
        let r = self.idx.len();
        let mut i = r;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < n - r + i {
                self.idx[i] += 1;
                for j in i + 1..r {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Number of `r`-subsets of an `n`-set, saturating.
pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_by_smallest_member() {
        let n = 6;
        let mut v = vec![
            VertexSet::from_iter(n, [2, 3]),
            VertexSet::from_iter(n, [0, 5]),
            VertexSet::from_iter(n, [1]),
            VertexSet::from_iter(n, [0, 1, 4]),
        ];
        v.sort();
        let firsts: Vec<_> = v.iter().map(|s| s.to_vec()).collect();
        assert_eq!(firsts, vec![vec![0, 1, 4], vec![0, 5], vec![1], vec![2, 3]]);
    }

    #[test]
    fn combinations_count() {
        let items: Vec<_> = (0..7).collect();
        for r in 0..=7 {
            assert_eq!(combinations(&items, r).count() as u128, binomial(7, r));
        }
        assert_eq!(combinations(&items, 8).count(), 0);
        assert_eq!(combinations(&[], 0).count(), 1);
    }

    #[test]
    fn set_algebra() {
        let a = VertexSet::from_iter(8, [0, 1, 2]);
        let b = VertexSet::from_iter(8, [2, 3]);
        assert_eq!(a.union(&b).to_vec(), vec![0, 1, 2, 3]);
        assert_eq!(a.intersection(&b).to_vec(), vec![2]);
        assert_eq!(a.difference(&b).to_vec(), vec![0, 1]);
        assert_eq!(a.complement().len(), 5);
        assert!(VertexSet::new(8).is_subset(&a));
    }
}
