use std::collections::BTreeMap;

use num_complex::Complex64;

/// Finitely supported vector in ℓ². Index 0 is the first basis vector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SupportedVector {
    entries: BTreeMap<usize, Complex64>,
}

impl SupportedVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(i: usize) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(i, Complex64::new(1.0, 0.0));
        SupportedVector { entries }
    }

    /// Later duplicates add to earlier ones; exact zeros are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Complex64)>) -> Self {
        let mut v = Self::zero();
        for (i, a) in pairs {
            v.add_at(i, a);
        }
        v
    }

    pub fn from_dense(x: &[Complex64]) -> Self {
        Self::from_pairs(x.iter().copied().enumerate())
    }

    pub fn add_at(&mut self, i: usize, a: Complex64) {
        let e = self.entries.entry(i).or_insert(Complex64::new(0.0, 0.0));
        *e += a;
        if *e == Complex64::new(0.0, 0.0) {
            self.entries.remove(&i);
        }
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.entries.get(&i).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.entries.iter().map(|(&i, &a)| (i, a))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Largest index in the support.
    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩`, linear in `self`.
    pub fn inner(&self, other: &SupportedVector) -> Complex64 {
        self.entries.iter().map(|(i, a)| a * other.get(*i).conj()).sum()
    }

    pub fn scale(&self, s: Complex64) -> SupportedVector {
        Self::from_pairs(self.iter().map(|(i, a)| (i, a * s)))
    }

    pub fn add(&self, other: &SupportedVector) -> SupportedVector {
        Self::from_pairs(self.iter().chain(other.iter()))
    }

    pub fn sub(&self, other: &SupportedVector) -> SupportedVector {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Dense copy of length `dim`; `None` when the support does not fit.
    pub fn to_dense(&self, dim: usize) -> Option<Vec<Complex64>> {
        if self.max_index().is_some_and(|m| m >= dim) {
            return None;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (i, a) in self.iter() {
            out[i] = a;
        }
        Some(out)
    }

    /// Entries with index in `[lo, hi)`, shifted down by `lo`.
    pub fn slice(&self, lo: usize, hi: Option<usize>) -> SupportedVector {
        let range = self.entries.range(lo..hi.unwrap_or(usize::MAX));
        Self::from_pairs(range.map(|(&i, &a)| (i - lo, a)))
    }

    pub fn offset(&self, by: usize) -> SupportedVector {
        Self::from_pairs(self.iter().map(|(i, a)| (i + by, a)))
    }
}
