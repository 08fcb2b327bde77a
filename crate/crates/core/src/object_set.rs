//! Sets of exogenous-variable (object) ids.

use std::fmt;

use fixedbitset::FixedBitSet;

/// Dense index of an object in `0..object_count`.
pub type ObjectId = usize;

/// A set of object ids over a fixed universe `0..capacity`.
///
/// Iteration is always in ascending id order, which keeps every consumer
/// deterministic.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ObjectSet {
    bits: FixedBitSet,
}

impl ObjectSet {
    pub fn empty(capacity: usize) -> Self {
        ObjectSet {
            bits: FixedBitSet::with_capacity(capacity),
        }
    }

    pub fn from_ids<I: IntoIterator<Item = ObjectId>>(capacity: usize, ids: I) -> Self {
        let mut set = Self::empty(capacity);
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    /// Panics if `id` is outside the universe.
    pub fn insert(&mut self, id: ObjectId) {
        assert!(
            id < self.bits.len(),
            "object id {id} outside universe of {}",
            self.bits.len()
        );
        self.bits.insert(id);
    }

    pub fn remove(&mut self, id: ObjectId) {
        if id < self.bits.len() {
            self.bits.set(id, false);
        }
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.bits.contains(id)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<ObjectId> {
        self.iter().collect()
    }

    pub fn union_with(&mut self, other: &ObjectSet) {
        self.grow_to(other.capacity());
        self.bits.union_with(&other.bits);
    }

    pub fn intersection(&self, other: &ObjectSet) -> ObjectSet {
        let mut out = self.clone();
        out.bits.intersect_with(&other.bits);
        out
    }

    pub fn difference(&self, other: &ObjectSet) -> ObjectSet {
        let mut out = self.clone();
        out.bits.difference_with(&other.bits);
        out
    }

    pub fn intersection_count(&self, other: &ObjectSet) -> usize {
        self.bits.intersection_count(&other.bits)
    }

    pub fn is_subset(&self, other: &ObjectSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &ObjectSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    fn grow_to(&mut self, capacity: usize) {
        if capacity > self.bits.len() {
            self.bits.grow(capacity);
        }
    }
}

impl fmt::Debug for ObjectSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
