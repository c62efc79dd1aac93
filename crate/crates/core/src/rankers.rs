//! Unsupervised sentence scorers over a shared PageRank core.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::simindex::{cosine, TfIdfModel};

/// Minimum TextRank denominator, used when both sentences are a single token long.
pub const TEXTRANK_EPSILON: f64 = 1e-6;

/// Predicted per-sentence scores of one scorer on one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub document_id: String,
    pub scorer: String,
    pub values: Vec<f64>,
}

/// Anything that assigns one score per sentence of a (sub)document.
pub trait SentenceScorer: Sync {
    fn name(&self) -> String;
    fn score(&self, sentences: &[Sentence]) -> Result<Vec<f64>>;
}

/// Dense symmetric weight matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    n: usize,
    weights: Vec<f64>,
}

impl SimilarityGraph {
    /// Validates a row-major `n x n` matrix.
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                found: weights.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let w = weights[i * n + j];
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::NegativeValue { index: i * n + j, value: w });
                }
                if i == j && w != 0.0 {
                    return Err(Error::InvalidConfig(format!("nonzero diagonal at node {i}")));
                }
                if w != weights[j * n + i] {
                    return Err(Error::InvalidConfig(format!("asymmetric weight at ({i}, {j})")));
                }
            }
        }
        Ok(SimilarityGraph { n, weights })
    }

    /// Evaluates `edge(i, j)` once per unordered pair `i < j` and mirrors it.
    pub fn from_pairs(n: usize, mut edge: impl FnMut(usize, usize) -> f64) -> Self {
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = edge(i, j).max(0.0);
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        SimilarityGraph { n, weights }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Column-stochastic transition matrix; zero-degree columns become uniform.
    pub fn transition_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for j in 0..n {
            let degree: f64 = (0..n).map(|i| self.weight(i, j)).sum();
            for i in 0..n {
                m[i * n + j] = if degree > 0.0 {
                    self.weight(i, j) / degree
                } else {
                    1.0 / n as f64
                };
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            damping: 0.85,
            tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

/// Power iteration with uniform teleport. Stops when the L1 change drops below `tol`.
pub fn pagerank(graph: &SimilarityGraph, cfg: &PageRankConfig) -> Result<Vec<f64>> {
    if !(cfg.damping > 0.0 && cfg.damping < 1.0) {
        return Err(Error::InvalidConfig(format!("damping {} not in (0, 1)", cfg.damping)));
    }
    let n = graph.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let degree: Vec<f64> = (0..n).map(|j| (0..n).map(|i| graph.weight(i, j)).sum()).collect();
    let teleport = (1.0 - cfg.damping) / n as f64;
    let mut rank = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];

    for _ in 0..cfg.max_iter {
        let dangling: f64 = (0..n).filter(|&j| degree[j] == 0.0).map(|j| rank[j]).sum();
        for (i, slot) in next.iter_mut().enumerate() {
            let mut inflow = dangling / n as f64;
            for j in 0..n {
                if degree[j] > 0.0 {
                    inflow += graph.weight(i, j) / degree[j] * rank[j];
                }
            }
            *slot = cfg.damping * inflow + teleport;
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let change: f64 = next.iter().zip(&rank).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if change < cfg.tol {
            return Ok(rank);
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        last: rank,
    })
}

/// Whether sentence indices count from 0 or 1 in the position score `1 - i/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PositionBase {
    Zero,
    #[default]
    One,
}

/// `1 - i/n` for the i-th of `n` sentences.
pub fn position_scores(n: usize, base: PositionBase) -> Vec<f64> {
    let offset = match base {
        PositionBase::Zero => 0,
        PositionBase::One => 1,
    };
    (0..n).map(|i| 1.0 - (i + offset) as f64 / n as f64).collect()
}

/// Rescales non-negative scores to sum to one; all-zero input becomes uniform.
pub fn normalize_scores(values: &[f64]) -> Result<Vec<f64>> {
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativeValue { index, value });
    }
    let total: f64 = values.iter().sum();
    let n = values.len();
    if total > 0.0 {
        Ok(values.iter().map(|v| v / total).collect())
    } else {
        Ok(vec![1.0 / n as f64; n])
    }
}

pub fn textrank_graph(sentences: &[Sentence]) -> SimilarityGraph {
    let sets: Vec<HashSet<&str>> = sentences
        .iter()
        .map(|s| s.tokens.iter().map(String::as_str).collect())
        .collect();
    let lens: Vec<f64> = sentences.iter().map(|s| s.tokens.len() as f64).collect();
    SimilarityGraph::from_pairs(sentences.len(), |i, j| {
        let overlap = sets[i].intersection(&sets[j]).count();
        if overlap == 0 {
            return 0.0;
        }
        let denom = (lens[i].ln() + lens[j].ln()).max(TEXTRANK_EPSILON);
        overlap as f64 / denom
    })
}

pub fn textrank_scores(sentences: &[Sentence], cfg: &PageRankConfig) -> Result<Vec<f64>> {
    pagerank(&textrank_graph(sentences), cfg)
}

/// TF-IDF cosine graph, fit on the sentences themselves.
///
/// A positive `threshold` binarizes edges at `cosine >= threshold`; zero keeps
/// the continuous cosine weights.
pub fn lexrank_graph(sentences: &[Sentence], threshold: f64) -> Result<SimilarityGraph> {
    if sentences.is_empty() {
        return Ok(SimilarityGraph::from_pairs(0, |_, _| 0.0));
    }
    let units: Vec<&[String]> = sentences.iter().map(|s| s.tokens.as_slice()).collect();
    let model = TfIdfModel::fit(&units)?;
    let vectors: Vec<_> = units.iter().map(|u| model.vectorize(u)).collect();
    Ok(SimilarityGraph::from_pairs(sentences.len(), |i, j| {
        let sim = cosine(&vectors[i], &vectors[j]);
        if threshold > 0.0 {
            if sim >= threshold {
                1.0
            } else {
                0.0
            }
        } else {
            sim
        }
    }))
}

pub fn lexrank_scores(sentences: &[Sentence], threshold: f64, cfg: &PageRankConfig) -> Result<Vec<f64>> {
    let ranks = pagerank(&lexrank_graph(sentences, threshold)?, cfg)?;
    normalize_scores(&ranks)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PositionScorer {
    pub base: PositionBase,
}

impl SentenceScorer for PositionScorer {
    fn name(&self) -> String {
        "position".into()
    }

    fn score(&self, sentences: &[Sentence]) -> Result<Vec<f64>> {
        Ok(position_scores(sentences.len(), self.base))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TextRankScorer {
    pub pagerank: PageRankConfig,
}

impl SentenceScorer for TextRankScorer {
    fn name(&self) -> String {
        "textrank".into()
    }

    fn score(&self, sentences: &[Sentence]) -> Result<Vec<f64>> {
        textrank_scores(sentences, &self.pagerank)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LexRankScorer {
    pub threshold: f64,
    pub pagerank: PageRankConfig,
}

impl Default for LexRankScorer {
    fn default() -> Self {
        LexRankScorer {
            threshold: 0.1,
            pagerank: PageRankConfig::default(),
        }
    }
}

impl SentenceScorer for LexRankScorer {
    fn name(&self) -> String {
        "lexrank".into()
    }

    fn score(&self, sentences: &[Sentence]) -> Result<Vec<f64>> {
        lexrank_scores(sentences, self.threshold, &self.pagerank)
    }
}

/// Scorer that assigns every sentence the same value.
#[derive(Debug, Clone, Copy)]
pub struct ConstantScorer(pub f64);

impl SentenceScorer for ConstantScorer {
    fn name(&self) -> String {
        "constant".into()
    }

    fn score(&self, sentences: &[Sentence]) -> Result<Vec<f64>> {
        Ok(vec![self.0; sentences.len()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn sentences(texts: &[&str]) -> Vec<Sentence> {
        Document::from_sentences("d", "s", texts).sentences
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn position_examples() {
        assert_eq!(position_scores(4, PositionBase::One), vec![0.75, 0.5, 0.25, 0.0]);
        assert_eq!(position_scores(1, PositionBase::One), vec![0.0]);
        assert!((position_scores(10, PositionBase::One)[0] - 0.9).abs() < 1e-15);
        assert_eq!(position_scores(4, PositionBase::Zero), vec![1.0, 0.75, 0.5, 0.25]);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_scores(&[2.0, 2.0]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(normalize_scores(&[0.0, 0.0, 0.0]).unwrap(), vec![1.0 / 3.0; 3]);
        assert_eq!(normalize_scores(&[1.0, 3.0]).unwrap(), vec![0.25, 0.75]);
        assert!(matches!(
            normalize_scores(&[1.0, -0.5]),
            Err(Error::NegativeValue { index: 1, .. })
        ));
    }

    #[test]
    fn graph_validation() {
        assert!(SimilarityGraph::new(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(SimilarityGraph::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(SimilarityGraph::new(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(SimilarityGraph::new(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
        assert!(SimilarityGraph::new(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn pagerank_symmetric_graphs_are_uniform() {
        let complete = SimilarityGraph::from_pairs(4, |_, _| 1.0);
        assert_close(&pagerank(&complete, &PageRankConfig::default()).unwrap(), &[0.25; 4], 1e-12);
        let pair = SimilarityGraph::from_pairs(2, |_, _| 0.3);
        assert_close(&pagerank(&pair, &PageRankConfig::default()).unwrap(), &[0.5, 0.5], 1e-12);
    }

    #[test]
    fn pagerank_rejects_bad_damping_and_reports_nonconvergence() {
        let g = SimilarityGraph::from_pairs(3, |i, j| (i + j) as f64);
        let bad = PageRankConfig {
            damping: 1.0,
            ..Default::default()
        };
        assert!(pagerank(&g, &bad).is_err());
        let short = PageRankConfig {
            max_iter: 1,
            tol: 0.0,
            ..Default::default()
        };
        match pagerank(&g, &short) {
            Err(Error::NotConverged { last, .. }) => {
                assert!((last.iter().sum::<f64>() - 1.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pagerank_star_graph_favors_the_hub() {
        let g = SimilarityGraph::from_pairs(4, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let r = pagerank(&g, &PageRankConfig::default()).unwrap();
        assert!(r[0] > r[1] && (r[1] - r[2]).abs() < 1e-12);
    }

    #[test]
    fn textrank_symmetric_cases_are_uniform() {
        let same = sentences(&["the cat sat", "the cat sat", "the cat sat"]);
        assert_close(&textrank_scores(&same, &PageRankConfig::default()).unwrap(), &[1.0 / 3.0; 3], 1e-12);
        let disjoint = sentences(&["alpha beta", "gamma delta", "epsilon zeta"]);
        assert_close(
            &textrank_scores(&disjoint, &PageRankConfig::default()).unwrap(),
            &[1.0 / 3.0; 3],
            1e-12,
        );
    }

    #[test]
    fn textrank_single_token_sentences_use_epsilon_denominator() {
        let g = textrank_graph(&sentences(&["alpha", "alpha", "beta"]));
        assert_eq!(g.weight(0, 1), 1.0 / TEXTRANK_EPSILON);
        assert_eq!(g.weight(0, 2), 0.0);
    }

    #[test]
    fn textrank_edge_weights() {
        let g = textrank_graph(&sentences(&["a b c", "a b d e", "x y"]));
        let expected = 2.0 / (3f64.ln() + 4f64.ln());
        assert!((g.weight(0, 1) - expected).abs() < 1e-15);
        assert_eq!(g.weight(2, 0), 0.0);
        assert_eq!(g.weight(1, 1), 0.0);
    }

    #[test]
    fn lexrank_uniform_cases() {
        let cfg = PageRankConfig::default();
        let same = sentences(&["rates rose today", "rates rose today", "rates rose today", "rates rose today"]);
        assert_close(&lexrank_scores(&same, 0.1, &cfg).unwrap(), &[0.25; 4], 1e-12);
        let mixed = sentences(&["rates rose today", "rates fell", "markets rose", "nothing here"]);
        assert_close(&lexrank_scores(&mixed, 1.1, &cfg).unwrap(), &[0.25; 4], 1e-12);
        let sum: f64 = lexrank_scores(&mixed, 0.0, &cfg).unwrap().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scorers_return_one_value_per_sentence() {
        let s = sentences(&["a b", "b c", "c d"]);
        let scorers: Vec<Box<dyn SentenceScorer>> = vec![
            Box::new(PositionScorer::default()),
            Box::new(TextRankScorer::default()),
            Box::new(LexRankScorer::default()),
            Box::new(ConstantScorer(0.3)),
        ];
        for scorer in &scorers {
            assert_eq!(scorer.score(&s).unwrap().len(), 3, "{}", scorer.name());
        }
    }
}
