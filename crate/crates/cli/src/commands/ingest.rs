use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use popcast::corpus::{
    filter_document, load_grammaticality, load_queries, load_raw_documents, load_summaries, prune_ungrammatical,
    save_corpus, CorpusRecord, CorpusStats, FilterOutcome, Grammaticality, MinTokens, RejectReason,
};
use serde::{Deserialize, Serialize};

use crate::config::{config_error, layer, require, CmdResult, ConfigSource};
use crate::manifest::{with_suffix, write_json, write_manifest};

pub const INGEST_SCHEMA_VERSION: &str = "popcast.ingest.v1";

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct IngestArgs {
    /// Raw documents: JSONL with `id`, `source` and `text` or `sentences`.
    #[arg(long)]
    pub docs: Option<PathBuf>,
    /// Query sets (JSONL `{"id", "queries"}`), checked for coverage.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Reference summaries (JSONL `{"id", "summary"}`), checked for coverage.
    #[arg(long)]
    pub summaries: Option<PathBuf>,
    /// Per-sentence grammaticality flags (JSONL `{"id", "grammatical"}`).
    #[arg(long)]
    pub grammaticality: Option<PathBuf>,
    /// Drop failing sentences instead of rejecting the whole document.
    #[arg(long)]
    pub prune_ungrammatical: bool,
    /// Token threshold of the default grammaticality predicate.
    #[arg(long)]
    pub min_tokens: Option<usize>,
    /// Also check the totals of the full released dataset.
    #[arg(long)]
    pub expect_full_release: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Ingestion report; defaults to `<output>.ingest.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize)]
struct Rejections {
    too_short: usize,
    too_long: usize,
    no_grammatical_sentences: usize,
}

#[derive(Debug, Serialize)]
struct Rejected {
    id: String,
    reason: RejectReason,
}

#[derive(Debug, Serialize)]
struct Coverage {
    records: usize,
    matched: usize,
    unknown_ids: usize,
    documents_without: usize,
}

#[derive(Debug, Serialize)]
struct IngestReport {
    schema_version: &'static str,
    input_documents: usize,
    accepted: usize,
    rejected: Rejections,
    rejected_ids: Vec<Rejected>,
    pruned_sentences: usize,
    stats: CorpusStats,
    violations: Vec<String>,
    queries: Option<Coverage>,
    summaries: Option<Coverage>,
}

fn coverage<'a>(ids: impl Iterator<Item = &'a str>, accepted: &HashSet<&str>) -> Coverage {
    let ids: Vec<&str> = ids.collect();
    let matched = ids.iter().filter(|id| accepted.contains(*id)).count();
    Coverage {
        records: ids.len(),
        matched,
        unknown_ids: ids.len() - matched,
        documents_without: accepted.len() - matched,
    }
}

pub fn run(flags: &IngestArgs, source: &ConfigSource) -> CmdResult<()> {
    let mut args = layer(flags, source.section("ingest", false)?)?;
    let docs_path = require(&args.docs, "docs")?.clone();
    let output = require(&args.output, "output")?.clone();
    if args.grammaticality.is_some() && args.min_tokens.is_some() {
        return config_error("--grammaticality and --min-tokens cannot be combined");
    }
    let report_path = args.report.clone().unwrap_or_else(|| with_suffix(&output, "ingest.json"));
    args.report = Some(report_path.clone());

    let predicate: Box<dyn Grammaticality> = match &args.grammaticality {
        Some(path) => Box::new(load_grammaticality(path)?),
        None => {
            let min = args.min_tokens.unwrap_or(MinTokens::default().0);
            args.min_tokens = Some(min);
            Box::new(MinTokens(min))
        }
    };
    let raw = load_raw_documents(&docs_path).with_context(|| format!("ingesting {}", docs_path.display()))?;
    if raw.is_empty() {
        eprintln!("warning: {} contains no documents; writing an empty corpus", docs_path.display());
    }

    let mut rejected = Rejections::default();
    let mut rejected_ids = Vec::new();
    let mut pruned_sentences = 0;
    let mut kept = Vec::new();
    for doc in &raw {
        let outcome = if args.prune_ungrammatical {
            let pruned = prune_ungrammatical(doc, predicate.as_ref());
            pruned_sentences += doc.len() - pruned.len();
            (filter_document(&pruned, &MinTokens(0)), pruned)
        } else {
            (filter_document(doc, predicate.as_ref()), doc.clone())
        };
        match outcome {
            (FilterOutcome::Accept, d) => kept.push(CorpusRecord::unlabeled(&d)),
            (FilterOutcome::Reject(reason), _) => {
                match reason {
                    RejectReason::TooShort => rejected.too_short += 1,
                    RejectReason::TooLong => rejected.too_long += 1,
                    RejectReason::NoGrammaticalSentences => rejected.no_grammatical_sentences += 1,
                }
                rejected_ids.push(Rejected { id: doc.id.clone(), reason });
            }
        }
    }

    let accepted: HashSet<&str> = kept.iter().map(|r| r.id.as_str()).collect();
    let queries = match &args.queries {
        Some(p) => Some(coverage(load_queries(p)?.iter().map(|q| q.document_id.as_str()), &accepted)),
        None => None,
    };
    let summaries = match &args.summaries {
        Some(p) => Some(coverage(load_summaries(p)?.iter().map(|s| s.document_id.as_str()), &accepted)),
        None => None,
    };
    let stats = CorpusStats::from_lengths(kept.iter().map(|r| r.sentences.len()));
    let violations = stats.violations(args.expect_full_release);
    for v in &violations {
        eprintln!("warning: {v}");
    }
    let report = IngestReport {
        schema_version: INGEST_SCHEMA_VERSION,
        input_documents: raw.len(),
        accepted: kept.len(),
        rejected,
        rejected_ids,
        pruned_sentences,
        stats,
        violations,
        queries,
        summaries,
    };
    save_corpus(&output, &kept)?;
    write_json(&report_path, &report)?;
    eprintln!(
        "ingested {} of {} documents (too_short {}, too_long {}, no_grammatical_sentences {})",
        report.accepted,
        report.input_documents,
        report.rejected.too_short,
        report.rejected.too_long,
        report.rejected.no_grammatical_sentences
    );

    let inputs: Vec<&Path> = [Some(&docs_path), args.queries.as_ref(), args.summaries.as_ref(), args.grammaticality.as_ref()]
        .into_iter()
        .flatten()
        .map(PathBuf::as_path)
        .collect();
    write_manifest("ingest", &args, &inputs, &[&output, &report_path])?;
    Ok(())
}
