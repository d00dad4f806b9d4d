use serde::Serialize;

/// A vector of ±1 entries; the vertex of the ambient cube it names is odd when
/// the entries multiply to −1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(entries: Vec<i8>) -> Self {
        assert!(entries.iter().all(|&s| s == 1 || s == -1), "entries must be ±1");
        Self(entries)
    }

    /// Bit `i` of `mask` set means entry `i` is −1.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self((0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn parity(&self) -> i8 {
        self.0.iter().product()
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == -1
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&s, &v)| f64::from(s) * v).sum()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| f64::from(s)).collect()
    }
}

/// All `2^(n-1)` sign vectors of length `n` with product −1, in mask order.
pub fn odd_sign_vectors(n: usize) -> impl Iterator<Item = SignVector> {
    assert!(n < 64);
    (0..1u64 << n)
        .filter(|m| m.count_ones() % 2 == 1)
        .map(move |m| SignVector::from_mask(n, m))
}

/// All `2^(n-1)` sign vectors of length `n` with product +1.
pub fn even_sign_vectors(n: usize) -> impl Iterator<Item = SignVector> {
    assert!(n < 64);
    (0..1u64 << n)
        .filter(|m| m.count_ones() % 2 == 0)
        .map(move |m| SignVector::from_mask(n, m))
}
