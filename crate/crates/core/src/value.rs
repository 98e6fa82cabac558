//! Interned domain values and compact value sets.

use std::fmt;

use serde::Serialize;

/// Largest declared domain a variable may have.
pub const MAX_DOMAIN_SIZE: usize = 64;

/// A value token, stored as its index in the owning variable's declared domain.
///
/// Values of different variables are never compared with each other; the
/// token text lives on the variable (see [`crate::FiniteDomain::token`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Value(pub u16);

impl Value {
    pub const FALSE: Value = Value(0);
    pub const TRUE: Value = Value(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_bool(b: bool) -> Value {
        if b {
            Value::TRUE
        } else {
            Value::FALSE
        }
    }
}

/// A set of values of one variable, as a bitset over declared indices.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ValueSet(u64);

impl ValueSet {
    pub const EMPTY: ValueSet = ValueSet(0);

    /// Every value of a domain of `size` values.
    pub fn full(size: usize) -> ValueSet {
        debug_assert!(size <= MAX_DOMAIN_SIZE);
        if size == MAX_DOMAIN_SIZE {
            ValueSet(u64::MAX)
        } else {
            ValueSet((1u64 << size) - 1)
        }
    }

    pub fn singleton(v: Value) -> ValueSet {
        ValueSet(1u64 << v.0)
    }

    pub fn contains(self, v: Value) -> bool {
        v.index() < MAX_DOMAIN_SIZE && self.0 & (1u64 << v.0) != 0
    }

    pub fn insert(&mut self, v: Value) {
        self.0 |= 1u64 << v.0;
    }

    pub fn remove(&mut self, v: Value) {
        self.0 &= !(1u64 << v.0);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersection(self, other: ValueSet) -> ValueSet {
        ValueSet(self.0 & other.0)
    }

    pub fn union(self, other: ValueSet) -> ValueSet {
        ValueSet(self.0 | other.0)
    }

    pub fn difference(self, other: ValueSet) -> ValueSet {
        ValueSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: ValueSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// The single member, if the set has exactly one.
    pub fn single(self) -> Option<Value> {
        (self.len() == 1).then(|| Value(self.0.trailing_zeros() as u16))
    }

    pub fn iter(self) -> impl Iterator<Item = Value> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros();
                bits &= bits - 1;
                Some(Value(i as u16))
            }
        })
    }

    pub fn bits(self) -> u64 {
        self.0
    }
}

impl FromIterator<Value> for ValueSet {
    fn from_iter<I: IntoIterator<Item = Value>>(iter: I) -> Self {
        let mut s = ValueSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl fmt::Debug for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|v| v.0)).finish()
    }
}

impl Serialize for ValueSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}
