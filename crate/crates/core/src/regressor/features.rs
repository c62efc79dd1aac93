//! Hand-crafted sentence features.
//!
//! Every feature is computed relative to the sentences passed in, so a
//! sliding window is featurized as if it were a whole document.

use serde::{Deserialize, Serialize};

use crate::corpus::{surface_words, Sentence};
use crate::simindex::{cosine, SparseVector, TfIdfModel};

pub const FEATURE_NAMES: [&str; 11] = [
    "relative_position",
    "inverse_position",
    "token_count",
    "relative_length",
    "tfidf_norm",
    "centroid_cosine",
    "mean_cosine_to_others",
    "max_cosine_to_others",
    "capitalized_fraction",
    "has_digit",
    "has_quote",
];

pub const FEATURE_DIM: usize = FEATURE_NAMES.len();

/// Columns that carry sentence position rather than content.
pub const POSITIONAL_FEATURES: [usize; 2] = [0, 1];

const QUOTE_MARKS: &[char] = &['"', '\u{201c}', '\u{201d}', '\u{00ab}', '\u{00bb}'];

/// Row-major `rows x cols` feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let cols = rows.first().map_or(FEATURE_DIM, Vec::len);
        let n = rows.len();
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        assert_eq!(values.len(), n * cols, "ragged feature rows");
        FeatureMatrix { rows: n, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.cols.max(1)).take(self.rows)
    }
}

pub fn extract_features(sentences: &[Sentence]) -> FeatureMatrix {
    let n = sentences.len();
    if n == 0 {
        return FeatureMatrix {
            rows: 0,
            cols: FEATURE_DIM,
            values: Vec::new(),
        };
    }
    let units: Vec<&[String]> = sentences.iter().map(|s| s.tokens.as_slice()).collect();
    let model = TfIdfModel::fit(&units).expect("non-empty sentence list");
    let vectors: Vec<SparseVector> = units.iter().map(|u| model.vectorize(u)).collect();
    let centroid = SparseVector::sum(&vectors);

    let mut pairwise = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let c = cosine(&vectors[i], &vectors[j]);
            pairwise[i * n + j] = c;
            pairwise[j * n + i] = c;
        }
    }
    let max_len = sentences.iter().map(|s| s.tokens.len()).max().unwrap_or(0).max(1) as f64;

    let rows = sentences
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let position = (i + 1) as f64;
            // Sorted so that duplicate sentences sum the same multiset in the same order.
            let mut others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| pairwise[i * n + j]).collect();
            others.sort_by(f64::total_cmp);
            let sum: f64 = others.iter().sum();
            let max = others.last().copied().unwrap_or(0.0);
            let mean = if n > 1 { sum / (n - 1) as f64 } else { 0.0 };
            let words = surface_words(&s.text);
            let capitalized = words
                .iter()
                .filter(|w| w.chars().find(|c| c.is_alphabetic()).is_some_and(char::is_uppercase))
                .count();
            let tokens = s.tokens.len() as f64;
            vec![
                position / n as f64,
                1.0 / position,
                tokens,
                tokens / max_len,
                vectors[i].norm(),
                cosine(&vectors[i], &centroid),
                mean,
                max,
                if words.is_empty() {
                    0.0
                } else {
                    capitalized as f64 / words.len() as f64
                },
                indicator(s.text.chars().any(|c| c.is_ascii_digit())),
                indicator(s.text.contains(QUOTE_MARKS)),
            ]
        })
        .collect();
    FeatureMatrix::from_rows(rows)
}

fn indicator(flag: bool) -> f64 {
    if flag {
        1.0
    } else {
        0.0
    }
}

/// Per-column z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn identity(dim: usize) -> Self {
        Standardizer {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    /// Population statistics over every row of every matrix. Constant columns get unit scale.
    pub fn fit<'a>(matrices: impl IntoIterator<Item = &'a FeatureMatrix>) -> Self {
        let mut count = 0usize;
        let mut sum = vec![0.0; FEATURE_DIM];
        let mut sum_sq = vec![0.0; FEATURE_DIM];
        let matrices: Vec<&FeatureMatrix> = matrices.into_iter().collect();
        for m in &matrices {
            for row in m.iter_rows() {
                count += 1;
                for (k, &x) in row.iter().enumerate() {
                    sum[k] += x;
                }
            }
        }
        if count == 0 {
            return Standardizer::identity(FEATURE_DIM);
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
        for m in &matrices {
            for row in m.iter_rows() {
                for (k, &x) in row.iter().enumerate() {
                    sum_sq[k] += (x - mean[k]).powi(2);
                }
            }
        }
        let std = sum_sq
            .iter()
            .map(|s| {
                let sd = (s / count as f64).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn apply(&self, m: &FeatureMatrix) -> FeatureMatrix {
        let mut out = m.clone();
        for i in 0..out.rows() {
            for (k, x) in out.row_mut(i).iter_mut().enumerate() {
                *x = (*x - self.mean[k]) / self.std[k];
            }
        }
        out
    }
}
