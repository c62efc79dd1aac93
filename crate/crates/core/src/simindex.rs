//! TF-IDF vectors and cosine similarity.
//!
//! IDF uses add-one smoothing in both numerator and denominator:
//! `idf(t) = ln((1 + U) / (1 + df(t))) + 1`, where `U` is the number of
//! fitting units. Every weight is therefore at least 1 and cosine values stay
//! in `[0, 1]`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Term ids at or above this value are hashed out-of-vocabulary tokens.
const OOV_BASE: u64 = 1 << 63;

#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfModel {
    vocabulary: HashMap<String, u64>,
    idf: Vec<f64>,
    units: usize,
    fitted_on: String,
}

impl TfIdfModel {
    /// Fits document frequencies over `units` (sentences, queries, ...).
    pub fn fit<S: AsRef<str>>(units: &[&[S]]) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::EmptyUnits);
        }
        let mut vocabulary: HashMap<String, u64> = HashMap::new();
        let mut df: Vec<usize> = Vec::new();
        let mut hasher = Sha256::new();
        for unit in units {
            let mut seen_in_unit: Vec<u64> = Vec::new();
            for token in unit.iter() {
                let token = token.as_ref();
                hasher.update(token.as_bytes());
                hasher.update([0u8]);
                let next = vocabulary.len() as u64;
                let id = *vocabulary.entry(token.to_string()).or_insert_with(|| {
                    df.push(0);
                    next
                });
                if !seen_in_unit.contains(&id) {
                    seen_in_unit.push(id);
                    df[id as usize] += 1;
                }
            }
            hasher.update([0xffu8]);
        }
        let u = units.len() as f64;
        let idf = df
            .iter()
            .map(|&d| ((1.0 + u) / (1.0 + d as f64)).ln() + 1.0)
            .collect();
        let digest = hasher.finalize();
        Ok(TfIdfModel {
            vocabulary,
            idf,
            units: units.len(),
            fitted_on: digest.iter().take(8).map(|b| format!("{b:02x}")).collect(),
        })
    }

    pub fn units(&self) -> usize {
        self.units
    }

    pub fn vocabulary_size(&self) -> usize {
        self.idf.len()
    }

    /// Short hex digest of the fitting units.
    pub fn fingerprint(&self) -> &str {
        &self.fitted_on
    }

    /// IDF weight; tokens never seen during fitting get `ln(1 + U) + 1`.
    pub fn idf(&self, token: &str) -> f64 {
        match self.vocabulary.get(token) {
            Some(&id) => self.idf[id as usize],
            None => self.oov_idf(),
        }
    }

    fn oov_idf(&self) -> f64 {
        (1.0 + self.units as f64).ln() + 1.0
    }

    fn term_id(&self, token: &str) -> u64 {
        match self.vocabulary.get(token) {
            Some(&id) => id,
            None => {
                let digest = Sha256::digest(token.as_bytes());
                let mut head = [0u8; 8];
                head.copy_from_slice(&digest[..8]);
                OOV_BASE | (u64::from_le_bytes(head) >> 1)
            }
        }
    }

    /// Raw term counts times IDF.
    pub fn vectorize<S: AsRef<str>>(&self, tokens: &[S]) -> SparseVector {
        let mut counts: HashMap<u64, (f64, f64)> = HashMap::new();
        for token in tokens {
            let token = token.as_ref();
            let id = self.term_id(token);
            let idf = self.idf(token);
            counts.entry(id).or_insert((0.0, idf)).0 += 1.0;
        }
        SparseVector::from_pairs(counts.into_iter().map(|(id, (tf, idf))| (id, tf * idf)))
    }
}

/// Sorted `(term id, weight)` pairs with strictly positive weights.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(u64, f64)>,
}

impl SparseVector {
    /// Sums duplicate indices and drops zero weights.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, f64)>) -> Self {
        let mut entries: Vec<(u64, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(u64, f64)> = Vec::with_capacity(entries.len());
        for (i, w) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => merged.push((i, w)),
            }
        }
        merged.retain(|&(_, w)| w != 0.0);
        SparseVector { entries: merged }
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn scale(&self, alpha: f64) -> SparseVector {
        SparseVector::from_pairs(self.entries.iter().map(|&(i, w)| (i, w * alpha)))
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (0usize, 0usize);
        let mut sum = 0.0;
        while a < self.entries.len() && b < other.entries.len() {
            let (ia, wa) = self.entries[a];
            let (ib, wb) = other.entries[b];
            match ia.cmp(&ib) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    sum += wa * wb;
                    a += 1;
                    b += 1;
                }
            }
        }
        sum
    }

    /// Element-wise sum of several vectors.
    pub fn sum<'a>(vectors: impl IntoIterator<Item = &'a SparseVector>) -> SparseVector {
        SparseVector::from_pairs(vectors.into_iter().flat_map(|v| v.entries.iter().copied()))
    }
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(u: &SparseVector, v: &SparseVector) -> f64 {
    if u.is_zero() || v.is_zero() {
        return 0.0;
    }
    // One square root over the product makes cos(v, v) exactly 1.
    let denom = (u.dot(u) * v.dot(v)).sqrt();
    (u.dot(v) / denom).clamp(0.0, 1.0)
}
