//! Item index sets.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Largest supported item count per instance.
pub const MAX_ITEMS: usize = 64;

/// A set of item indices, stored as a 64-bit mask. Instances are capped at
/// [`MAX_ITEMS`] items; the oracle's search budget sits well below that.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ItemSet(u64);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub fn empty() -> Self {
        ItemSet(0)
    }

    /// Set `{0, 1, ..., m-1}`.
    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_ITEMS);
        if m == MAX_ITEMS {
            ItemSet(u64::MAX)
        } else {
            ItemSet((1u64 << m) - 1)
        }
    }

    pub fn singleton(item: usize) -> Self {
        assert!(item < MAX_ITEMS);
        ItemSet(1u64 << item)
    }

    pub fn from_mask(mask: u64) -> Self {
        ItemSet(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, item: usize) -> bool {
        item < MAX_ITEMS && self.0 & (1u64 << item) != 0
    }

    #[must_use]
    pub fn with(self, item: usize) -> Self {
        assert!(item < MAX_ITEMS);
        ItemSet(self.0 | (1u64 << item))
    }

    #[must_use]
    pub fn without(self, item: usize) -> Self {
        assert!(item < MAX_ITEMS);
        ItemSet(self.0 & !(1u64 << item))
    }

    #[must_use]
    pub fn union(self, other: ItemSet) -> Self {
        ItemSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: ItemSet) -> Self {
        ItemSet(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: ItemSet) -> Self {
        ItemSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: ItemSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Lowest item index, if nonempty.
    pub fn lowest(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    /// Items in ascending index order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    pub fn to_indices(self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut s = ItemSet::empty();
        for i in iter {
            s = s.with(i);
        }
        s
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (pos, i) in self.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

// JSON form: sorted array of item indices.
impl Serialize for ItemSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ItemSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<ItemSet, D::Error> {
        let indices = Vec::<usize>::deserialize(deserializer)?;
        for &i in &indices {
            if i >= MAX_ITEMS {
                return Err(serde::de::Error::custom(format!(
                    "item index {i} out of range (max {MAX_ITEMS})"
                )));
            }
        }
        Ok(indices.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a: ItemSet = [0, 2, 5].into_iter().collect();
        assert_eq!(a.len(), 3);
        assert!(a.contains(2) && !a.contains(1));
        assert_eq!(a.lowest(), Some(0));
        assert_eq!(a.to_indices(), vec![0, 2, 5]);
        let b = ItemSet::singleton(2);
        assert_eq!(a.difference(b).to_indices(), vec![0, 5]);
        assert!(b.is_subset_of(a));
        assert_eq!(a.intersection(b), b);
        assert_eq!(ItemSet::full(3).to_indices(), vec![0, 1, 2]);
        assert!(ItemSet::empty().lowest().is_none());
    }

    #[test]
    fn serde_round_trip() {
        let a: ItemSet = [1, 3].into_iter().collect();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[1,3]");
        let back: ItemSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
    }
}
