//! Synthetic corpora with controllable popularity/salience correlation.
//!
//! Sentences are strings of pseudo-words. Each document has a small topic
//! vocabulary and a latent salience vector; salient sentences carry more
//! topic words, and the reference summary is built from the topic words of
//! the most salient sentences.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

use crate::corpus::{CorpusRecord, Document, QueryRecord, SummaryRecord};
use crate::error::{Error, Result};
use crate::labeling::{salience_labels, RougeMode, SummaryRef, Task};

const MIN_LEN: usize = 5;
const MAX_LEN: usize = 40;
const VOCABULARY: usize = 800;
const TOPIC_WORDS: usize = 8;
const SUMMARY_SENTENCES: usize = 3;
const DUPLICATE_RATE: f64 = 0.05;
const FUNCTION_WORDS: [&str; 14] = [
    "the", "of", "and", "to", "in", "a", "is", "for", "on", "with", "that", "by", "was", "at",
];
const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDocument {
    /// Popularity holds the latent popularity; salience fields hold ROUGE labels.
    pub record: CorpusRecord,
    pub queries: QueryRecord,
    pub summary: SummaryRecord,
    pub latent_salience: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub seed: u64,
    pub task_correlation: f64,
    pub documents: Vec<SyntheticDocument>,
}

impl SyntheticCorpus {
    pub fn records(&self) -> Vec<CorpusRecord> {
        self.documents.iter().map(|d| d.record.clone()).collect()
    }

    pub fn query_records(&self) -> Vec<QueryRecord> {
        self.documents.iter().map(|d| d.queries.clone()).collect()
    }

    pub fn summary_records(&self) -> Vec<SummaryRecord> {
        self.documents.iter().map(|d| d.summary.clone()).collect()
    }
}

fn normalize(values: &mut [f64]) {
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        values.iter_mut().for_each(|v| *v /= total);
    } else {
        let n = values.len() as f64;
        values.iter_mut().for_each(|v| *v = 1.0 / n);
    }
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn sentence_text(words: &[String]) -> String {
    let mut out = String::new();
    for (i, w) in words.iter().enumerate() {
        if i == 0 {
            out.push_str(&capitalize(w));
        } else {
            out.push(' ');
            out.push_str(w);
        }
    }
    out.push('.');
    out
}

fn vocabulary(rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut words: Vec<String> = Vec::with_capacity(VOCABULARY);
    while words.len() < VOCABULARY {
        let syllables = rng.random_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(*CONSONANTS.choose(rng).unwrap() as char);
            w.push(*VOWELS.choose(rng).unwrap() as char);
        }
        if !FUNCTION_WORDS.contains(&w.as_str()) && !words.contains(&w) {
            words.push(w);
        }
    }
    words
}

fn dirichlet(rng: &mut ChaCha8Rng, alphas: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = alphas
        .map(|a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
        .collect();
    normalize(&mut v);
    v
}

/// Generates `n_docs` documents. `task_correlation` mixes latent salience
/// into popularity: `popularity = normalize(rho * salience + (1 - rho) * noise)`.
pub fn generate_synthetic_corpus(seed: u64, n_docs: usize, task_correlation: f64) -> Result<SyntheticCorpus> {
    if !(0.0..=1.0).contains(&task_correlation) {
        return Err(Error::InvalidConfig(format!(
            "task correlation must be in [0, 1] (got {task_correlation})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = vocabulary(&mut rng);
    let documents = (0..n_docs)
        .map(|i| {
            let mut doc_rng = ChaCha8Rng::seed_from_u64(seed);
            doc_rng.set_stream(i as u64 + 1);
            generate_document(&mut doc_rng, &pool, format!("synth-{seed}-{i:05}"), task_correlation)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticCorpus {
        seed,
        task_correlation,
        documents,
    })
}

fn generate_document(rng: &mut ChaCha8Rng, pool: &[String], id: String, rho: f64) -> Result<SyntheticDocument> {
    let n = rng.random_range(MIN_LEN..=MAX_LEN);
    let topic: Vec<String> = pool.choose_multiple(rng, TOPIC_WORDS).cloned().collect();
    let filler: Vec<&String> = pool.iter().filter(|w| !topic.contains(w)).collect();

    // Each duplicate points at the first occurrence of its text.
    let origin: Vec<usize> = (0..n)
        .map(|i| {
            if i > 0 && rng.random_bool(DUPLICATE_RATE) {
                rng.random_range(0..i)
            } else {
                i
            }
        })
        .collect();
    let origin: Vec<usize> = (0..n)
        .map(|i| {
            let mut j = i;
            while origin[j] != j {
                j = origin[j];
            }
            j
        })
        .collect();

    let mut salience = dirichlet(rng, (1..=n).map(|i| 0.3 + 3.0 / i as f64));
    let mut noise = dirichlet(rng, (0..n).map(|_| 1.0));
    for i in 0..n {
        salience[i] = salience[origin[i]];
        noise[i] = noise[origin[i]];
    }
    normalize(&mut salience);
    normalize(&mut noise);
    let mut popularity: Vec<f64> = salience
        .iter()
        .zip(&noise)
        .map(|(s, z)| rho * s + (1.0 - rho) * z)
        .collect();
    normalize(&mut popularity);

    let mut words: Vec<Vec<String>> = Vec::with_capacity(n);
    let mut topic_used: Vec<Vec<String>> = Vec::with_capacity(n);
    for i in 0..n {
        if origin[i] != i {
            words.push(words[origin[i]].clone());
            topic_used.push(topic_used[origin[i]].clone());
            continue;
        }
        let topical = ((3.0 * salience[i] * n as f64).round() as usize).min(7);
        let length = rng.random_range(8..=20).max(topical + 2);
        let chosen: Vec<String> = (0..topical).map(|_| topic.choose(rng).unwrap().clone()).collect();
        let mut sentence = chosen.clone();
        while sentence.len() < length {
            if rng.random_bool(0.4) {
                sentence.push(FUNCTION_WORDS.choose(rng).unwrap().to_string());
            } else {
                sentence.push(filler.choose(rng).unwrap().to_string());
            }
        }
        if rng.random_bool(0.15) {
            sentence.push(rng.random_range(2..2000).to_string());
        }
        sentence.shuffle(rng);
        words.push(sentence);
        topic_used.push(chosen);
    }
    let sentences: Vec<String> = words.iter().map(|w| sentence_text(w)).collect();

    let mut by_salience: Vec<usize> = (0..n).filter(|&i| origin[i] == i).collect();
    by_salience.sort_by(|&a, &b| salience[b].total_cmp(&salience[a]).then(a.cmp(&b)));
    let summary: Vec<String> = by_salience
        .iter()
        .take(SUMMARY_SENTENCES)
        .map(|&i| {
            let mut w = if topic_used[i].is_empty() {
                words[i].iter().take(3).cloned().collect()
            } else {
                topic_used[i].clone()
            };
            w.push(FUNCTION_WORDS.choose(rng).unwrap().to_string());
            sentence_text(&w)
        })
        .collect();

    let picker = WeightedIndex::new(&popularity).expect("normalized weights");
    let query_count = rng.random_range(3..=8);
    let queries: Vec<String> = (0..query_count)
        .map(|_| {
            let s = picker.sample(rng);
            let content: Vec<&String> = words[s]
                .iter()
                .filter(|w| !FUNCTION_WORDS.contains(&w.as_str()))
                .collect();
            let k = rng.random_range(2..=4).min(content.len());
            content
                .choose_multiple(rng, k)
                .map(|w| w.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();

    let doc = Document::from_sentences(id.clone(), "synthetic", &sentences);
    let reference = SummaryRef::from_strings(id.clone(), &summary);
    let mut record = CorpusRecord::unlabeled(&doc);
    record.set_labels(Task::Popularity, Some(popularity));
    for task in Task::SALIENCE {
        let out = salience_labels(&doc, &reference, task, RougeMode::F1)?;
        record.set_labels(task, Some(out.labels.values));
    }
    Ok(SyntheticDocument {
        record,
        queries: QueryRecord { id: id.clone(), queries },
        summary: SummaryRecord { id, summary },
        latent_salience: salience,
    })
}
