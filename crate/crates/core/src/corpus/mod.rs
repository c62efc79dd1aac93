//! Documents, query sets, corpus filters and the canonical JSONL format.

mod io;
mod text;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use io::{
    load_corpus, load_grammaticality, load_queries, load_raw_documents, load_summaries,
    read_corpus, read_queries, read_raw_documents, read_summaries, save_corpus, save_jsonl,
    write_corpus, write_jsonl, CorpusRecord, QueryRecord, SummaryRecord,
};
pub use text::{split_sentences, tokenize};
pub(crate) use text::surface_words;

/// Documents outside this sentence-count range are discarded.
pub const MIN_SENTENCES: usize = 3;
pub const MAX_SENTENCES: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<String>,
}

impl Sentence {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Sentence { text, tokens }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub source: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn new(id: impl Into<String>, source: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        Document {
            id: id.into(),
            source: source.into(),
            sentences,
        }
    }

    /// Builds a document from already split sentence strings.
    pub fn from_sentences<S: AsRef<str>>(
        id: impl Into<String>,
        source: impl Into<String>,
        sentences: &[S],
    ) -> Self {
        let sentences = sentences.iter().map(|s| Sentence::new(s.as_ref())).collect();
        Document::new(id, source, sentences)
    }

    /// Splits raw text with [`split_sentences`].
    pub fn from_text(id: impl Into<String>, source: impl Into<String>, text: &str) -> Self {
        Document::from_sentences(id, source, &split_sentences(text))
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_lists(&self) -> Vec<&[String]> {
        self.sentences.iter().map(|s| s.tokens.as_slice()).collect()
    }
}

/// Queries for which a document ranked in the top search results.
///
/// Relevance filtering happens upstream; every query here is assumed to
/// have surfaced the document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QuerySet {
    pub document_id: String,
    pub queries: Vec<Vec<String>>,
}

impl QuerySet {
    /// Tokenizes raw query strings, dropping queries with no tokens.
    pub fn from_strings<S: AsRef<str>>(document_id: impl Into<String>, queries: &[S]) -> Self {
        QuerySet {
            document_id: document_id.into(),
            queries: queries
                .iter()
                .map(|q| tokenize(q.as_ref()))
                .filter(|q| !q.is_empty())
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TooShort,
    TooLong,
    NoGrammaticalSentences,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterOutcome {
    Accept,
    Reject(RejectReason),
}

/// Per-sentence grammaticality judgment used by the corpus filter.
pub trait Grammaticality {
    fn is_grammatical(&self, document_id: &str, index: usize, sentence: &Sentence) -> bool;
}

/// Accepts sentences with at least `min_tokens` tokens.
#[derive(Debug, Clone, Copy)]
pub struct MinTokens(pub usize);

impl Default for MinTokens {
    fn default() -> Self {
        MinTokens(2)
    }
}

impl Grammaticality for MinTokens {
    fn is_grammatical(&self, _: &str, _: usize, sentence: &Sentence) -> bool {
        sentence.tokens.len() >= self.0
    }
}

/// Judgments supplied by an external tool, one boolean per sentence.
///
/// Documents absent from the table fall back to [`MinTokens::default`].
#[derive(Debug, Clone, Default)]
pub struct ExternalJudgments {
    pub judgments: HashMap<String, Vec<bool>>,
}

impl Grammaticality for ExternalJudgments {
    fn is_grammatical(&self, document_id: &str, index: usize, sentence: &Sentence) -> bool {
        match self.judgments.get(document_id) {
            Some(flags) => flags.get(index).copied().unwrap_or(false) && !sentence.tokens.is_empty(),
            None => MinTokens::default().is_grammatical(document_id, index, sentence),
        }
    }
}

/// Applies the sentence-count bounds and the grammaticality predicate.
pub fn filter_document(doc: &Document, predicate: &dyn Grammaticality) -> FilterOutcome {
    let n = doc.len();
    if n > MAX_SENTENCES {
        return FilterOutcome::Reject(RejectReason::TooLong);
    }
    if n < MIN_SENTENCES {
        return FilterOutcome::Reject(RejectReason::TooShort);
    }
    let all_grammatical = doc
        .sentences
        .iter()
        .enumerate()
        .all(|(i, s)| !s.tokens.is_empty() && predicate.is_grammatical(&doc.id, i, s));
    if all_grammatical {
        FilterOutcome::Accept
    } else {
        FilterOutcome::Reject(RejectReason::NoGrammaticalSentences)
    }
}

/// Drops the sentences that fail the predicate, keeping order.
pub fn prune_ungrammatical(doc: &Document, predicate: &dyn Grammaticality) -> Document {
    let sentences = doc
        .sentences
        .iter()
        .enumerate()
        .filter(|(i, s)| !s.tokens.is_empty() && predicate.is_grammatical(&doc.id, *i, s))
        .map(|(_, s)| s.clone())
        .collect();
    Document::new(doc.id.clone(), doc.source.clone(), sentences)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

/// Hash bucket of a document id: 0-7 train, 8 validation, 9 test.
pub fn split_of(document_id: &str) -> Split {
    let digest = Sha256::digest(document_id.as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    match u64::from_le_bytes(head) % 10 {
        0..=7 => Split::Train,
        8 => Split::Validation,
        _ => Split::Test,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

impl CorpusSplit {
    pub fn from_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> Self {
        let mut split = CorpusSplit::default();
        for id in ids {
            match split_of(id) {
                Split::Train => split.train.push(id.to_string()),
                Split::Validation => split.validation.push(id.to_string()),
                Split::Test => split.test.push(id.to_string()),
            }
        }
        split
    }
}

/// Document and sentence counts of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub sentences: usize,
    pub min_sentences: usize,
    pub max_sentences: usize,
    pub mean_sentences: f64,
}

/// Size of the full released popularity dataset.
pub const RELEASED_DOCUMENTS: usize = 51_770;
pub const RELEASED_SENTENCES: usize = 1_711_890;

impl CorpusStats {
    pub fn from_lengths(lengths: impl IntoIterator<Item = usize>) -> Self {
        let lengths: Vec<usize> = lengths.into_iter().collect();
        let sentences: usize = lengths.iter().sum();
        CorpusStats {
            documents: lengths.len(),
            sentences,
            min_sentences: lengths.iter().copied().min().unwrap_or(0),
            max_sentences: lengths.iter().copied().max().unwrap_or(0),
            mean_sentences: if lengths.is_empty() {
                0.0
            } else {
                sentences as f64 / lengths.len() as f64
            },
        }
    }

    /// Problems found when checking ingested data against the corpus contract.
    ///
    /// `expect_full_release` additionally checks the released dataset's totals.
    pub fn violations(&self, expect_full_release: bool) -> Vec<String> {
        let mut out = Vec::new();
        if self.documents > 0 && self.min_sentences < MIN_SENTENCES {
            out.push(format!("a document has {} sentences (< {MIN_SENTENCES})", self.min_sentences));
        }
        if self.max_sentences > MAX_SENTENCES {
            out.push(format!("a document has {} sentences (> {MAX_SENTENCES})", self.max_sentences));
        }
        if expect_full_release {
            if self.documents != RELEASED_DOCUMENTS {
                out.push(format!("{} documents, expected {RELEASED_DOCUMENTS}", self.documents));
            }
            if self.sentences != RELEASED_SENTENCES {
                out.push(format!("{} sentences, expected {RELEASED_SENTENCES}", self.sentences));
            }
        }
        out
    }
}
