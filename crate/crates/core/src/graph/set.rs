use std::fmt;

use fixedbitset::FixedBitSet;

use super::VertexId;

/// A subset of the vertices of one graph, stored as a bitset over `0..n`.
///
/// The cardinality is cached because nearly every scoring step needs it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    bits: FixedBitSet,
    len: usize,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet {
            bits: FixedBitSet::with_capacity(n),
            len: 0,
        }
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        VertexSet { bits, len: n }
    }

    /// Ids outside `0..n` are ignored.
    pub fn from_ids<I: IntoIterator<Item = VertexId>>(n: usize, ids: I) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        for id in ids {
            if (id as usize) < n {
                bits.insert(id as usize);
            }
        }
        let len = bits.count_ones(..);
        VertexSet { bits, len }
    }

    pub(crate) fn from_bits(bits: FixedBitSet) -> Self {
        let len = bits.count_ones(..);
        VertexSet { bits, len }
    }

    /// Size of the universe this set lives in.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        self.bits.contains(v as usize)
    }

    pub fn ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.bits.ones().map(|i| i as VertexId)
    }

    pub fn to_vec(&self) -> Vec<VertexId> {
        self.ids().collect()
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        VertexSet::from_bits(bits)
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        VertexSet::from_bits(bits)
    }

    pub fn complement(&self) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        VertexSet::from_bits(bits)
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        self.bits.intersection_count(&other.bits)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ids()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = VertexSet::from_ids(6, [0, 1, 2, 3]);
        let b = VertexSet::from_ids(6, [2, 3, 4]);
        assert_eq!(a.intersection(&b).to_vec(), vec![2, 3]);
        assert_eq!(a.difference(&b).to_vec(), vec![0, 1]);
        assert_eq!(b.complement().to_vec(), vec![0, 1, 5]);
        assert_eq!(a.intersection_len(&b), 2);
        assert!(!a.is_disjoint(&b));
        assert!(VertexSet::from_ids(6, [2]).is_subset(&b));
        assert_eq!(VertexSet::full(6).len(), 6);
        assert!(VertexSet::empty(6).is_empty());
    }

    #[test]
    fn out_of_range_ids_are_dropped() {
        let s = VertexSet::from_ids(3, [0, 7, 2]);
        assert_eq!(s.to_vec(), vec![0, 2]);
    }
}
