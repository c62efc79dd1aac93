use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{split_sentences, Document, ExternalJudgments, QuerySet};
use crate::error::{Error, Result};
use crate::labeling::{SummaryRef, Task};

/// One line of the canonical labeled corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRecord {
    pub id: String,
    pub source: String,
    pub sentences: Vec<String>,
    pub popularity: Option<Vec<f64>>,
    pub salience_1: Option<Vec<f64>>,
    pub salience_2: Option<Vec<f64>>,
    pub salience_l: Option<Vec<f64>>,
}

impl CorpusRecord {
    pub fn unlabeled(doc: &Document) -> Self {
        CorpusRecord {
            id: doc.id.clone(),
            source: doc.source.clone(),
            sentences: doc.sentences.iter().map(|s| s.text.clone()).collect(),
            popularity: None,
            salience_1: None,
            salience_2: None,
            salience_l: None,
        }
    }

    pub fn document(&self) -> Document {
        Document::from_sentences(self.id.clone(), self.source.clone(), &self.sentences)
    }

    pub fn labels(&self, task: Task) -> Option<&[f64]> {
        match task {
            Task::Popularity => self.popularity.as_deref(),
            Task::S1 => self.salience_1.as_deref(),
            Task::S2 => self.salience_2.as_deref(),
            Task::SL => self.salience_l.as_deref(),
        }
    }

    pub fn set_labels(&mut self, task: Task, values: Option<Vec<f64>>) {
        let slot = match task {
            Task::Popularity => &mut self.popularity,
            Task::S1 => &mut self.salience_1,
            Task::S2 => &mut self.salience_2,
            Task::SL => &mut self.salience_l,
        };
        *slot = values;
    }

    fn check_lengths(&self) -> std::result::Result<(), String> {
        for task in Task::ALL {
            if let Some(values) = self.labels(task) {
                if values.len() != self.sentences.len() {
                    return Err(format!(
                        "{} has {} values for {} sentences",
                        task.field_name(),
                        values.len(),
                        self.sentences.len()
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    #[serde(default)]
    source: String,
    text: Option<String>,
    sentences: Option<Vec<String>>,
}

/// One line of a query file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRecord {
    pub id: String,
    pub queries: Vec<String>,
}

/// One line of a reference-summary file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryRecord {
    pub id: String,
    pub summary: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JudgmentRecord {
    id: String,
    grammatical: Vec<bool>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Parses every non-blank line, rejecting duplicate ids. Yields 1-based line numbers.
fn read_jsonl<T, R, F>(reader: R, id_of: F) -> Result<Vec<(usize, T)>>
where
    T: DeserializeOwned,
    R: BufRead,
    F: Fn(&T) -> &str,
{
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if !seen.insert(id_of(&record).to_string()) {
            return Err(Error::DuplicateId(id_of(&record).to_string()));
        }
        out.push((line_no, record));
    }
    Ok(out)
}

/// Reads raw documents, splitting `text` fields into sentences.
pub fn read_raw_documents<R: BufRead>(reader: R) -> Result<Vec<Document>> {
    read_jsonl(reader, |r: &RawRecord| r.id.as_str())?
        .into_iter()
        .map(|(n, r)| match (r.text, r.sentences) {
            (Some(text), None) => Ok(Document::from_sentences(r.id, r.source, &split_sentences(&text))),
            (None, Some(sentences)) => Ok(Document::from_sentences(r.id, r.source, &sentences)),
            _ => Err(Error::Malformed {
                line: n,
                message: format!("document `{}` needs exactly one of `text` or `sentences`", r.id),
            }),
        })
        .collect()
}

pub fn load_raw_documents(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    read_raw_documents(open(path.as_ref())?)
}

pub fn read_queries<R: BufRead>(reader: R) -> Result<Vec<QuerySet>> {
    Ok(read_jsonl(reader, |r: &QueryRecord| r.id.as_str())?
        .into_iter()
        .map(|(_, r)| QuerySet::from_strings(r.id, &r.queries))
        .collect())
}

pub fn load_queries(path: impl AsRef<Path>) -> Result<Vec<QuerySet>> {
    read_queries(open(path.as_ref())?)
}

pub fn read_summaries<R: BufRead>(reader: R) -> Result<Vec<SummaryRef>> {
    Ok(read_jsonl(reader, |r: &SummaryRecord| r.id.as_str())?
        .into_iter()
        .map(|(_, r)| SummaryRef::from_strings(r.id, &r.summary))
        .collect())
}

pub fn load_summaries(path: impl AsRef<Path>) -> Result<Vec<SummaryRef>> {
    read_summaries(open(path.as_ref())?)
}

/// Per-sentence grammaticality flags produced by an external parser.
pub fn load_grammaticality(path: impl AsRef<Path>) -> Result<ExternalJudgments> {
    let records = read_jsonl(open(path.as_ref())?, |r: &JudgmentRecord| r.id.as_str())?;
    Ok(ExternalJudgments {
        judgments: records.into_iter().map(|(_, r)| (r.id, r.grammatical)).collect(),
    })
}

pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<CorpusRecord>> {
    read_jsonl(reader, |r: &CorpusRecord| r.id.as_str())?
        .into_iter()
        .map(|(line, record)| {
            record
                .check_lengths()
                .map(|()| record)
                .map_err(|message| Error::Malformed { line, message })
        })
        .collect()
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<CorpusRecord>> {
    read_corpus(open(path.as_ref())?)
}

pub fn write_corpus<W: Write>(writer: W, records: &[CorpusRecord]) -> Result<()> {
    write_jsonl(writer, records)
}

/// Writes one compact JSON value per line.
pub fn write_jsonl<W: Write, T: Serialize>(mut writer: W, records: &[T]) -> Result<()> {
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
    }
    writer.flush().map_err(|e| Error::io("<writer>", e))
}

pub fn save_corpus(path: impl AsRef<Path>, records: &[CorpusRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(BufWriter::new(file), records)
}

pub fn save_jsonl<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_jsonl(BufWriter::new(file), records)
}
