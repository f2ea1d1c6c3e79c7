//! Multisets as frequency maps.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub type Freq = BigUint;

/// A bag. Only positive frequencies are stored, so structural equality is bag equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bag<E: Ord> {
    freq: BTreeMap<E, Freq>,
}

impl<E: Ord> Default for Bag<E> {
    fn default() -> Self {
        Bag { freq: BTreeMap::new() }
    }
}

impl<E: Ord + Clone> Bag<E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(e: E) -> Self {
        let mut b = Self::new();
        b.insert(e);
        b
    }

    pub fn insert(&mut self, e: E) {
        self.insert_n(e, Freq::one());
    }

    pub fn insert_n(&mut self, e: E, n: Freq) {
        if n.is_zero() {
            return;
        }
        *self.freq.entry(e).or_insert_with(Freq::zero) += n;
    }

    pub fn frequency(&self, e: &E) -> Freq {
        self.freq.get(e).cloned().unwrap_or_else(Freq::zero)
    }

    pub fn contains(&self, e: &E) -> bool {
        self.freq.contains_key(e)
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }

    pub fn cardinality(&self) -> Freq {
        self.freq.values().sum()
    }

    /// Number of distinct elements.
    pub fn support_len(&self) -> usize {
        self.freq.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&E, &Freq)> {
        self.freq.iter()
    }

    pub fn elements(&self) -> impl Iterator<Item = &E> {
        self.freq.keys()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, n) in &other.freq {
            out.insert_n(e.clone(), n.clone());
        }
        out
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Self::new();
        for (e, n) in &self.freq {
            if let Some(m) = other.freq.get(e) {
                out.insert_n(e.clone(), n.min(m).clone());
            }
        }
        out
    }

    pub fn diff(&self, other: &Self) -> Self {
        let mut out = Self::new();
        for (e, n) in &self.freq {
            let m = other.frequency(e);
            if *n > m {
                out.insert_n(e.clone(), n - m);
            }
        }
        out
    }

    pub fn is_subbag(&self, other: &Self) -> bool {
        self.freq.iter().all(|(e, n)| *n <= other.frequency(e))
    }

    pub fn to_set(&self) -> Self {
        Bag {
            freq: self.freq.keys().map(|e| (e.clone(), Freq::one())).collect(),
        }
    }

    pub fn from_set<I: IntoIterator<Item = E>>(set: I) -> Self {
        Bag {
            freq: set.into_iter().map(|e| (e, Freq::one())).collect(),
        }
    }

    /// The comprehension idiom: keep elements satisfying `keep`, preserving frequency.
    pub fn filter<F: FnMut(&E) -> bool>(&self, mut keep: F) -> Self {
        Bag {
            freq: self
                .freq
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, n)| (e.clone(), n.clone()))
                .collect(),
        }
    }

    /// Image under `f`, adding frequencies of colliding images.
    pub fn map<F: Ord + Clone, G: FnMut(&E) -> F>(&self, mut f: G) -> Bag<F> {
        let mut out = Bag::new();
        for (e, n) in &self.freq {
            out.insert_n(f(e), n.clone());
        }
        out
    }

    /// Elements repeated by frequency, in canonical order.
    pub fn expand(&self) -> Vec<E> {
        let mut out = Vec::new();
        for (e, n) in &self.freq {
            let mut k = n.clone();
            while !k.is_zero() {
                out.push(e.clone());
                k -= 1u32;
            }
        }
        out
    }
}

impl<E: Ord + Clone> FromIterator<E> for Bag<E> {
    fn from_iter<I: IntoIterator<Item = E>>(iter: I) -> Self {
        let mut b = Bag::new();
        for e in iter {
            b.insert(e);
        }
        b
    }
}

impl<E: Ord + Clone> FromIterator<(E, Freq)> for Bag<E> {
    fn from_iter<I: IntoIterator<Item = (E, Freq)>>(iter: I) -> Self {
        let mut b = Bag::new();
        for (e, n) in iter {
            b.insert_n(e, n);
        }
        b
    }
}

impl<E: Ord + fmt::Debug> fmt::Debug for Bag<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{{")?;
        for (i, (e, n)) in self.freq.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if n.is_one() {
                write!(f, "{e:?}")?;
            } else {
                write!(f, "{e:?}^{n}")?;
            }
        }
        f.write_str("}}")
    }
}

/// Element domains that support the arithmetic aggregates.
pub trait Arith: Ord + Clone {
    fn null() -> Self;
    fn is_null(&self) -> bool;
    /// `None` when the element is not arithmetic.
    fn add(&self, other: &Self) -> Option<Self>;
    fn times(&self, n: &Freq) -> Option<Self>;
    fn is_arith(&self) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("aggregate over non-arithmetic element {0}")]
pub struct AggError(pub String);

impl<E: Arith + fmt::Debug> Bag<E> {
    fn non_null(&self) -> Result<Vec<(&E, &Freq)>, AggError> {
        let mut out = Vec::new();
        for (e, n) in &self.freq {
            if e.is_null() {
                continue;
            }
            if !e.is_arith() {
                return Err(AggError(format!("{e:?}")));
            }
            out.push((e, n));
        }
        Ok(out)
    }

    pub fn maximum(&self) -> Result<E, AggError> {
        Ok(self.non_null()?.last().map(|(e, _)| (*e).clone()).unwrap_or_else(E::null))
    }

    pub fn minimum(&self) -> Result<E, AggError> {
        Ok(self.non_null()?.first().map(|(e, _)| (*e).clone()).unwrap_or_else(E::null))
    }

    pub fn sum(&self) -> Result<E, AggError> {
        let mut acc: Option<E> = None;
        for (e, n) in self.non_null()? {
            let term = e.times(n).ok_or_else(|| AggError(format!("{e:?}")))?;
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term).ok_or_else(|| AggError(format!("{e:?}")))?,
            });
        }
        Ok(acc.unwrap_or_else(E::null))
    }

    /// Count of non-NULL elements, frequencies included.
    pub fn count_non_null(&self) -> Freq {
        self.freq.iter().filter(|(e, _)| !e.is_null()).map(|(_, n)| n).sum()
    }
}
