use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use popcast::corpus::{load_corpus, load_queries, load_summaries, save_corpus, Document, QuerySet};
use popcast::labeling::{
    fit_corpus_idf, popularity_labels, salience_labels, IdfScope, PopularityOutcome, RougeMode, SummaryRef, Task,
    Unlabelable,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{config_error, layer, require, CmdResult, ConfigSource};
use crate::manifest::{with_suffix, write_json, write_manifest};

pub const UNLABELABLE_SCHEMA_VERSION: &str = "popcast.unlabelable.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdfScopeArg {
    Document,
    Corpus,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct LabelArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Tasks to label, comma separated: popularity, s1, s2, sl.
    #[arg(long, value_delimiter = ',')]
    pub task: Option<Vec<Task>>,
    /// Query sets; required for popularity.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Reference summaries; required for s1, s2 and sl.
    #[arg(long)]
    pub summaries: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// IDF statistics per document (default) or over the whole corpus.
    #[arg(long, value_enum)]
    pub idf_scope: Option<IdfScopeArg>,
    /// ROUGE value used for salience labels: f1 (default) or recall.
    #[arg(long)]
    pub rouge_mode: Option<RougeMode>,
    /// Unlabelable-document sidecar; defaults to `<output>.unlabelable.json`.
    #[arg(long)]
    pub unlabelable: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Reason {
    NoQueries,
    ZeroSimilarity,
    NoSummary,
}

#[derive(Debug, Serialize)]
struct Entry {
    id: String,
    task: Task,
    reason: Reason,
}

#[derive(Debug, Serialize)]
struct FallbackEntry {
    id: String,
    task: Task,
}

#[derive(Debug, Serialize)]
struct Sidecar {
    schema_version: &'static str,
    unlabelable: Vec<Entry>,
    /// Labeled, but uniformly: no sentence overlapped the summary.
    uniform_fallback: Vec<FallbackEntry>,
}

enum Outcome {
    Labeled(Vec<f64>, bool),
    Unlabelable(Reason),
}

pub fn run(flags: &LabelArgs, source: &ConfigSource) -> CmdResult<()> {
    let mut args = layer(flags, source.section("label", false)?)?;
    let corpus_path = require(&args.corpus, "corpus")?.clone();
    let output = require(&args.output, "output")?.clone();
    let tasks = require(&args.task, "task")?.clone();
    if tasks.is_empty() {
        return config_error("--task needs at least one task");
    }
    let needs_queries = tasks.contains(&Task::Popularity);
    let needs_summaries = tasks.iter().any(|t| t.is_salience());
    if needs_queries && args.queries.is_none() {
        return config_error("--task popularity requires --queries");
    }
    if needs_summaries && args.summaries.is_none() {
        return config_error("--task s1/s2/sl requires --summaries");
    }
    if !needs_queries && args.idf_scope.is_some() {
        return config_error("--idf-scope only applies to --task popularity");
    }
    if !needs_summaries && args.rouge_mode.is_some() {
        return config_error("--rouge-mode only applies to --task s1/s2/sl");
    }
    let scope = if needs_queries { Some(args.idf_scope.unwrap_or(IdfScopeArg::Document)) } else { None };
    args.idf_scope = scope;
    let mode = if needs_summaries { Some(args.rouge_mode.unwrap_or_default()) } else { None };
    args.rouge_mode = mode;
    let sidecar_path = args.unlabelable.clone().unwrap_or_else(|| with_suffix(&output, "unlabelable.json"));
    args.unlabelable = Some(sidecar_path.clone());

    let mut records = load_corpus(&corpus_path)?;
    let docs: Vec<Document> = records.iter().map(|r| r.document()).collect();
    let queries: HashMap<String, QuerySet> = match &args.queries {
        Some(p) => load_queries(p)?.into_iter().map(|q| (q.document_id.clone(), q)).collect(),
        None => HashMap::new(),
    };
    let summaries: HashMap<String, SummaryRef> = match &args.summaries {
        Some(p) => load_summaries(p)?.into_iter().map(|s| (s.document_id.clone(), s)).collect(),
        None => HashMap::new(),
    };
    let corpus_idf = match scope {
        Some(IdfScopeArg::Corpus) => {
            let sets: Vec<QuerySet> = docs.iter().filter_map(|d| queries.get(&d.id).cloned()).collect();
            Some(fit_corpus_idf(&docs, &sets)?)
        }
        _ => None,
    };

    let mut sidecar = Sidecar {
        schema_version: UNLABELABLE_SCHEMA_VERSION,
        unlabelable: Vec::new(),
        uniform_fallback: Vec::new(),
    };
    for &task in &tasks {
        let outcomes: Vec<Outcome> = docs
            .par_iter()
            .map(|doc| -> popcast::Result<Outcome> {
                if task == Task::Popularity {
                    let empty = QuerySet { document_id: doc.id.clone(), queries: Vec::new() };
                    let qs = queries.get(&doc.id).unwrap_or(&empty);
                    let scope = corpus_idf.as_ref().map_or(IdfScope::Document, IdfScope::Corpus);
                    Ok(match popularity_labels(doc, qs, scope)? {
                        PopularityOutcome::Labeled(l) => Outcome::Labeled(l.values, false),
                        PopularityOutcome::Unlabelable(Unlabelable::NoQueries) => Outcome::Unlabelable(Reason::NoQueries),
                        PopularityOutcome::Unlabelable(Unlabelable::ZeroSimilarity) => {
                            Outcome::Unlabelable(Reason::ZeroSimilarity)
                        }
                    })
                } else {
                    Ok(match summaries.get(&doc.id) {
                        None => Outcome::Unlabelable(Reason::NoSummary),
                        Some(summary) => {
                            let out = salience_labels(doc, summary, task, mode.unwrap_or_default())?;
                            Outcome::Labeled(out.labels.values, out.uniform_fallback)
                        }
                    })
                }
            })
            .collect::<popcast::Result<_>>()?;
        let mut labeled = 0;
        for (record, outcome) in records.iter_mut().zip(outcomes) {
            match outcome {
                Outcome::Labeled(values, fallback) => {
                    labeled += 1;
                    if fallback {
                        sidecar.uniform_fallback.push(FallbackEntry { id: record.id.clone(), task });
                    }
                    record.set_labels(task, Some(values));
                }
                Outcome::Unlabelable(reason) => {
                    sidecar.unlabelable.push(Entry { id: record.id.clone(), task, reason });
                    record.set_labels(task, None);
                }
            }
        }
        eprintln!("{task}: labeled {labeled} of {} documents", records.len());
    }

    save_corpus(&output, &records)?;
    write_json(&sidecar_path, &sidecar)?;
    let inputs: Vec<&Path> = [Some(&corpus_path), args.queries.as_ref(), args.summaries.as_ref()]
        .into_iter()
        .flatten()
        .map(PathBuf::as_path)
        .collect();
    write_manifest("label", &args, &inputs, &[&output, &sidecar_path])?;
    Ok(())
}
