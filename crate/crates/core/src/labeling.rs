//! Supervised targets: query-driven popularity labels and ROUGE-based
//! salience labels, both normalized to sum to one per document.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Document, QuerySet};
use crate::error::{Error, Result};
use crate::simindex::{cosine, TfIdfModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "popularity")]
    Popularity,
    #[serde(rename = "s1")]
    S1,
    #[serde(rename = "s2")]
    S2,
    #[serde(rename = "sl")]
    SL,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Popularity, Task::S1, Task::S2, Task::SL];
    pub const SALIENCE: [Task; 3] = [Task::S1, Task::S2, Task::SL];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Popularity => "popularity",
            Task::S1 => "s1",
            Task::S2 => "s2",
            Task::SL => "sl",
        }
    }

    /// Field holding this task's labels in the canonical corpus format.
    pub fn field_name(self) -> &'static str {
        match self {
            Task::Popularity => "popularity",
            Task::S1 => "salience_1",
            Task::S2 => "salience_2",
            Task::SL => "salience_l",
        }
    }

    pub fn is_salience(self) -> bool {
        self != Task::Popularity
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "popularity" | "pf" => Ok(Task::Popularity),
            "s1" => Ok(Task::S1),
            "s2" => Ok(Task::S2),
            "sl" | "s_l" => Ok(Task::SL),
            other => Err(Error::InvalidConfig(format!("unknown task `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelVector {
    pub document_id: String,
    pub task: Task,
    pub values: Vec<f64>,
}

/// Reference summary of a document, tokenized per summary sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryRef {
    pub document_id: String,
    pub summary_sentences: Vec<Vec<String>>,
}

impl SummaryRef {
    pub fn from_strings<S: AsRef<str>>(document_id: impl Into<String>, sentences: &[S]) -> Self {
        SummaryRef {
            document_id: document_id.into(),
            summary_sentences: sentences.iter().map(|s| tokenize(s.as_ref())).collect(),
        }
    }

    /// All summary tokens as one sequence.
    pub fn concatenated(&self) -> Vec<String> {
        self.summary_sentences.iter().flatten().cloned().collect()
    }
}

/// Where popularity labeling takes its IDF statistics from.
#[derive(Debug, Clone, Copy)]
pub enum IdfScope<'a> {
    /// Fit over the document's sentences plus its queries.
    Document,
    /// A model fit once over a whole corpus.
    Corpus(&'a TfIdfModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unlabelable {
    NoQueries,
    ZeroSimilarity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PopularityOutcome {
    Labeled(LabelVector),
    Unlabelable(Unlabelable),
}

/// Fits the corpus-level IDF used by [`IdfScope::Corpus`].
pub fn fit_corpus_idf(docs: &[Document], queries: &[QuerySet]) -> Result<TfIdfModel> {
    let mut units: Vec<&[String]> = docs
        .iter()
        .flat_map(|d| d.sentences.iter().map(|s| s.tokens.as_slice()))
        .collect();
    units.extend(queries.iter().flat_map(|q| q.queries.iter().map(Vec::as_slice)));
    TfIdfModel::fit(&units)
}

/// Unnormalized per-sentence popularity: summed query-sentence cosine.
pub fn popularity_base_scores(doc: &Document, qs: &QuerySet, scope: IdfScope<'_>) -> Result<Vec<f64>> {
    if qs.document_id != doc.id {
        return Err(Error::DocumentMismatch {
            expected: doc.id.clone(),
            found: qs.document_id.clone(),
        });
    }
    let fitted;
    let model = match scope {
        IdfScope::Corpus(model) => model,
        IdfScope::Document => {
            let mut units: Vec<&[String]> = doc.token_lists();
            units.extend(qs.queries.iter().map(Vec::as_slice));
            if units.is_empty() {
                return Ok(Vec::new());
            }
            fitted = TfIdfModel::fit(&units)?;
            &fitted
        }
    };
    let query_vectors: Vec<_> = qs.queries.iter().map(|q| model.vectorize(q)).collect();
    Ok(doc
        .sentences
        .iter()
        .map(|s| {
            let sv = model.vectorize(&s.tokens);
            query_vectors.iter().map(|qv| cosine(qv, &sv)).sum()
        })
        .collect())
}

pub fn popularity_labels(doc: &Document, qs: &QuerySet, scope: IdfScope<'_>) -> Result<PopularityOutcome> {
    if qs.document_id != doc.id {
        return Err(Error::DocumentMismatch {
            expected: doc.id.clone(),
            found: qs.document_id.clone(),
        });
    }
    if qs.is_empty() {
        return Ok(PopularityOutcome::Unlabelable(Unlabelable::NoQueries));
    }
    let base = popularity_base_scores(doc, qs, scope)?;
    let total: f64 = base.iter().sum();
    if total <= 0.0 {
        return Ok(PopularityOutcome::Unlabelable(Unlabelable::ZeroSimilarity));
    }
    Ok(PopularityOutcome::Labeled(LabelVector {
        document_id: doc.id.clone(),
        task: Task::Popularity,
        values: base.iter().map(|b| b / total).collect(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RougeMode {
    #[default]
    F1,
    Recall,
}

impl FromStr for RougeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(RougeMode::F1),
            "recall" => Ok(RougeMode::Recall),
            other => Err(Error::InvalidConfig(format!("unknown rouge mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    const ZERO: RougeScore = RougeScore {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };

    fn from_matches(matches: usize, candidate_len: usize, reference_len: usize) -> Self {
        if candidate_len == 0 || reference_len == 0 {
            return RougeScore::ZERO;
        }
        let m = matches as f64;
        RougeScore {
            precision: m / candidate_len as f64,
            recall: m / reference_len as f64,
            // 2PR / (P + R) with the common factor cancelled; symmetric in the arguments.
            f1: 2.0 * m / (candidate_len + reference_len) as f64,
        }
    }

    pub fn value(&self, mode: RougeMode) -> f64 {
        match mode {
            RougeMode::F1 => self.f1,
            RougeMode::Recall => self.recall,
        }
    }
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            let gram: Vec<&str> = window.iter().map(AsRef::as_ref).collect();
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// ROUGE-N with clipped n-gram counts.
pub fn rouge_n<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> RougeScore {
    assert!(n >= 1, "n-gram order must be positive");
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let cand_total: usize = cand.values().sum();
    let ref_total: usize = refs.values().sum();
    let matches: usize = cand
        .iter()
        .map(|(gram, &c)| refs.get(gram).map_or(0, |&r| c.min(r)))
        .sum();
    RougeScore::from_matches(matches, cand_total, ref_total)
}

/// Length of the longest common subsequence.
pub fn lcs_length<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

pub fn rouge_l<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> RougeScore {
    RougeScore::from_matches(lcs_length(candidate, reference), candidate.len(), reference.len())
}

/// ROUGE flavor behind a salience task; `None` for popularity.
pub fn rouge_for_task<S: AsRef<str>>(task: Task, candidate: &[S], reference: &[S]) -> Option<RougeScore> {
    match task {
        Task::Popularity => None,
        Task::S1 => Some(rouge_n(candidate, reference, 1)),
        Task::S2 => Some(rouge_n(candidate, reference, 2)),
        Task::SL => Some(rouge_l(candidate, reference)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SalienceOutcome {
    pub labels: LabelVector,
    /// Set when no sentence overlapped the summary and labels fell back to uniform.
    pub uniform_fallback: bool,
}

pub fn salience_labels(
    doc: &Document,
    summary: &SummaryRef,
    task: Task,
    mode: RougeMode,
) -> Result<SalienceOutcome> {
    if summary.document_id != doc.id {
        return Err(Error::DocumentMismatch {
            expected: doc.id.clone(),
            found: summary.document_id.clone(),
        });
    }
    if !task.is_salience() {
        return Err(Error::InvalidConfig("salience labels need task s1, s2 or sl".into()));
    }
    let reference = summary.concatenated();
    let raw: Vec<f64> = doc
        .sentences
        .iter()
        .map(|s| {
            rouge_for_task(task, &s.tokens, &reference)
                .map_or(0.0, |score| score.value(mode))
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let n = raw.len();
    let (values, uniform_fallback) = if total > 0.0 {
        (raw.iter().map(|r| r / total).collect(), false)
    } else {
        (vec![1.0 / n as f64; n], true)
    };
    Ok(SalienceOutcome {
        labels: LabelVector {
            document_id: doc.id.clone(),
            task,
            values,
        },
        uniform_fallback,
    })
}
