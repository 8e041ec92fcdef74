use std::collections::BTreeMap;
use std::fmt::Display;

use serde::{Serialize, Serializer};

/// Sorted collection of canonical items with occurrence counts.
///
/// Under set semantics every count is 1. Cardinality is the sum of counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bag<T: Ord> {
    items: BTreeMap<T, usize>,
    multiset: bool,
}

impl<T: Ord> Default for Bag<T> {
    fn default() -> Self {
        Bag { items: BTreeMap::new(), multiset: false }
    }
}

impl<T: Ord> Bag<T> {
    pub fn new(multiset: bool) -> Self {
        Bag { items: BTreeMap::new(), multiset }
    }

    pub fn is_multiset(&self) -> bool {
        self.multiset
    }

    pub fn insert(&mut self, item: T) {
        let count = self.items.entry(item).or_insert(0);
        if self.multiset || *count == 0 {
            *count += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.items.values().sum()
    }

    pub fn distinct_len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn count(&self, item: &T) -> usize {
        self.items.get(item).copied().unwrap_or(0)
    }

    pub fn contains(&self, item: &T) -> bool {
        self.items.contains_key(item)
    }

    /// Distinct items in sorted order.
    pub fn items(&self) -> impl Iterator<Item = &T> {
        self.items.keys()
    }

    pub fn counts(&self) -> impl Iterator<Item = (&T, usize)> {
        self.items.iter().map(|(k, v)| (k, *v))
    }

    /// Every item of `self` occurs in `other` at least as often.
    pub fn is_subbag(&self, other: &Bag<T>) -> bool {
        self.items.iter().all(|(k, v)| other.count(k) >= *v)
    }

    pub fn absorb(&mut self, other: Bag<T>) {
        for (k, v) in other.items {
            let count = self.items.entry(k).or_insert(0);
            *count = if self.multiset { *count + v } else { 1 };
        }
    }

    pub fn map<U: Ord>(&self, mut f: impl FnMut(&T) -> U) -> Bag<U> {
        let mut out = Bag::new(self.multiset);
        for (k, v) in &self.items {
            *out.items.entry(f(k)).or_insert(0) += v;
        }
        if !self.multiset {
            out.items.values_mut().for_each(|v| *v = 1);
        }
        out
    }
}

impl<T: Ord + Display> Bag<T> {
    /// Sorted canonical strings, repeated by count.
    pub fn to_strings(&self) -> Vec<String> {
        let mut out: Vec<String> =
            self.items.iter().flat_map(|(k, v)| std::iter::repeat_n(k.to_string(), *v)).collect();
        out.sort();
        out
    }

    pub fn to_string_bag(&self) -> Bag<String> {
        self.map(|k| k.to_string())
    }
}

impl<T: Ord> FromIterator<T> for Bag<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut bag = Bag::new(false);
        iter.into_iter().for_each(|x| bag.insert(x));
        bag
    }
}

impl<T: Ord + Display> Serialize for Bag<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}
