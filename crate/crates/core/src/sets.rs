//! Bit sets over the systems of one structure (at most 64 systems).

use std::fmt;

/// Maximum number of systems a structure may declare.
pub const MAX_SYSTEMS: usize = 64;

/// A set of system indices, stored as a bit mask (bit `i` = system `i`).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SysSet(pub u64);

impl SysSet {
    pub const EMPTY: SysSet = SysSet(0);

    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_SYSTEMS);
        SysSet(1u64 << i)
    }

    /// `{0, 1, ..., n-1}`
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            SysSet(u64::MAX)
        } else {
            SysSet((1u64 << n) - 1)
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        it.into_iter().fold(Self::EMPTY, |s, i| s.with(i))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        SysSet(self.0 | 1u64 << i)
    }

    pub fn without(self, i: usize) -> Self {
        SysSet(self.0 & !(1u64 << i))
    }

    pub fn union(self, other: SysSet) -> Self {
        SysSet(self.0 | other.0)
    }

    pub fn intersection(self, other: SysSet) -> Self {
        SysSet(self.0 & other.0)
    }

    pub fn difference(self, other: SysSet) -> Self {
        SysSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: SysSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: SysSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `self`, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = SysSet> {
        let full = self.0;
        let mut cur = Some(0u64);
        std::iter::from_fn(move || {
            let c = cur?;
            cur = if c == full { None } else { Some(((c | !full).wrapping_add(1)) & full) };
            Some(SysSet(c))
        })
    }

    /// Ordering key where system 0 is the most significant digit, so that
    /// subsets of `(A, B, C)` sort as `C, B, BC, A, AC, AB, ABC`.
    pub fn order_key(self, n: usize) -> u64 {
        if n == 0 {
            return 0;
        }
        self.0.reverse_bits() >> (64 - n)
    }
}

impl fmt::Debug for SysSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for SysSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::from_indices(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerates_powerset() {
        let s = SysSet::from_indices([1, 3, 4]);
        let all: Vec<_> = s.subsets().collect();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|t| t.is_subset(s)));
        assert_eq!(SysSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn order_key_matches_binary_listing() {
        // systems A=0, B=1, C=2
        let names = ["C", "B", "BC", "A", "AC", "AB", "ABC"];
        let sets = [
            SysSet::from_indices([2]),
            SysSet::from_indices([1]),
            SysSet::from_indices([1, 2]),
            SysSet::from_indices([0]),
            SysSet::from_indices([0, 2]),
            SysSet::from_indices([0, 1]),
            SysSet::from_indices([0, 1, 2]),
        ];
        for (k, s) in sets.iter().enumerate() {
            assert_eq!(s.order_key(3), k as u64 + 1, "{}", names[k]);
        }
    }
}
