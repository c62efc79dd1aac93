use std::collections::HashSet;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;
use popcast::corpus::CorpusRecord;
use popcast::labeling::{LabelVector, Task};
use popcast::metrics::{evaluate_corpus, labels_from_records, render_table};
use popcast::rankers::ScoreVector;
use serde::{Deserialize, Serialize};

use super::{in_split, parse_k, read_corpus_file, read_scores, SplitArg};
use crate::config::{layer, require, CmdResult, ConfigSource};
use crate::manifest::{with_suffix, write_manifest};

pub const DEFAULT_K: [usize; 3] = [1, 2, 3];

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct EvalArgs {
    /// Score vectors written by `rank`.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Corpus holding the reference labels.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub task: Option<Task>,
    /// Top-k cutoffs, comma separated (default 1,2,3).
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// JSON report.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Text table; defaults to `<output>.txt`.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub split: Option<SplitArg>,
}

/// Labels and matching scores, skipping documents that lack `task` labels.
pub fn align(
    records: &[CorpusRecord],
    scores: Vec<ScoreVector>,
    task: Task,
    split: Option<SplitArg>,
) -> CmdResult<(Vec<LabelVector>, Vec<ScoreVector>)> {
    let labeled: Vec<CorpusRecord> = records.iter().filter(|r| r.labels(task).is_some()).cloned().collect();
    let skipped = records.len() - labeled.len();
    if skipped > 0 {
        eprintln!("warning: skipping {skipped} documents without {task} labels");
    }
    let known: HashSet<&str> = records.iter().map(|r| r.id.as_str()).collect();
    let unknown: Vec<&str> = scores
        .iter()
        .filter(|s| in_split(&s.document_id, split) && !known.contains(s.document_id.as_str()))
        .map(|s| s.document_id.as_str())
        .collect();
    if !unknown.is_empty() {
        return Err(anyhow!("scores for documents not in the corpus: {}", unknown.join(", ")).into());
    }
    let keep: HashSet<&str> = labeled.iter().map(|r| r.id.as_str()).collect();
    let scores = scores.into_iter().filter(|s| keep.contains(s.document_id.as_str())).collect();
    Ok((labels_from_records(&labeled, task)?, scores))
}

pub fn scorer_name(scores: &[ScoreVector]) -> String {
    scores.first().map_or_else(|| "unknown".into(), |s| s.scorer.clone())
}

pub fn run(flags: &EvalArgs, source: &ConfigSource) -> CmdResult<()> {
    let mut args = layer(flags, source.section("eval", false)?)?;
    let scores_path = require(&args.scores, "scores")?.clone();
    let corpus_path = require(&args.corpus, "corpus")?.clone();
    let output = require(&args.output, "output")?.clone();
    let task = *require(&args.task, "task")?;
    let k = parse_k(args.k.as_deref().unwrap_or(&DEFAULT_K))?;
    args.k = Some(k.clone());
    let table_path = args.table.clone().unwrap_or_else(|| with_suffix(&output, "txt"));
    args.table = Some(table_path.clone());

    let records = read_corpus_file(&corpus_path, args.split)?;
    let scores = read_scores(&scores_path)?;
    let name = scorer_name(&scores);
    let (labels, scores) = align(&records, scores, task, args.split)?;
    let report = evaluate_corpus(&name, task, &scores, &labels, &k)?;
    fs::write(&output, report.to_json()?).with_context(|| format!("writing {}", output.display()))?;
    let table = render_table(&[&report]);
    fs::write(&table_path, &table).with_context(|| format!("writing {}", table_path.display()))?;
    print!("{table}");

    write_manifest("eval", &args, &[&scores_path, &corpus_path], &[&output, &table_path])?;
    Ok(())
}
