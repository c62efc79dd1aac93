use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::Args;
use popcast::corpus::Document;
use popcast::labeling::Task;
use popcast::metrics::{cross_task_eval, render_table, EvalReport};
use popcast::regressor::{score_documents, ModelScorer, RegressorModel};
use serde::{Deserialize, Serialize};

use super::eval::{align, scorer_name, DEFAULT_K};
use super::{parse_k, read_corpus_file, read_scores, window_config, SplitArg};
use crate::config::{config_error, layer, require, CmdResult, ConfigSource};
use crate::manifest::{with_suffix, write_json, write_manifest};

pub const CROSS_EVAL_SCHEMA_VERSION: &str = "popcast.cross_eval.v1";

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct CrossEvalArgs {
    /// Trained model; its final training task is the default source task.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Precomputed score vectors instead of a model.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Task the scorer was trained on.
    #[arg(long)]
    pub source_task: Option<Task>,
    /// Task whose labels the scores are compared against.
    #[arg(long)]
    pub target_task: Option<Task>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Text table; defaults to `<output>.txt`.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, value_enum)]
    pub split: Option<SplitArg>,
}

#[derive(Serialize)]
struct CrossEvalReport {
    schema_version: &'static str,
    /// Scores against the source task's own labels, when the corpus has them.
    same_task: Option<EvalReport>,
    cross_task: EvalReport,
}

pub fn run(flags: &CrossEvalArgs, source: &ConfigSource) -> CmdResult<()> {
    let mut args = layer(flags, source.section("cross-eval", false)?)?;
    let corpus_path = require(&args.corpus, "corpus")?.clone();
    let output = require(&args.output, "output")?.clone();
    let target = *require(&args.target_task, "target-task")?;
    let k = parse_k(args.k.as_deref().unwrap_or(&DEFAULT_K))?;
    args.k = Some(k.clone());
    let table_path = args.table.clone().unwrap_or_else(|| with_suffix(&output, "txt"));
    args.table = Some(table_path.clone());

    let records = read_corpus_file(&corpus_path, args.split)?;
    let (scores, source_task) = match (&args.model, &args.scores) {
        (Some(_), Some(_)) => return config_error("--model and --scores are mutually exclusive"),
        (None, None) => return config_error("cross-eval needs --model or --scores"),
        (None, Some(path)) => {
            if args.window.is_some() || args.stride.is_some() {
                return config_error("--window/--stride only apply with --model");
            }
            let task = *require(&args.source_task, "source-task")?;
            (read_scores(path)?, task)
        }
        (Some(path), None) => {
            let model = RegressorModel::load(path)?;
            let trained = model.provenance.stages.last().map(|s| s.task);
            let task = match args.source_task.or(trained) {
                Some(t) => t,
                None => return config_error("model has no training stages; pass --source-task"),
            };
            let wc = window_config(args.window, args.stride)?;
            args.window = Some(wc.window);
            args.stride = Some(wc.stride);
            let docs: Vec<Document> = records.iter().map(|r| r.document()).collect();
            (score_documents(&ModelScorer { model }, &docs, Some(&wc))?, task)
        }
    };
    args.source_task = Some(source_task);
    let name = scorer_name(&scores);

    let same_task = if records.iter().any(|r| r.labels(source_task).is_some()) && source_task != target {
        let (labels, s) = align(&records, scores.clone(), source_task, args.split)?;
        Some(cross_task_eval(&name, source_task, source_task, &s, &labels, &k)?)
    } else {
        None
    };
    let (labels, s) = align(&records, scores, target, args.split)?;
    if labels.is_empty() {
        return Err(anyhow!("{}: no documents carry {target} labels", corpus_path.display()).into());
    }
    let cross_task = cross_task_eval(&name, source_task, target, &s, &labels, &k)?;

    let rows: Vec<&EvalReport> = same_task.iter().chain([&cross_task]).collect();
    let table = render_table(&rows);
    fs::write(&table_path, &table).with_context(|| format!("writing {}", table_path.display()))?;
    print!("{table}");
    write_json(
        &output,
        &CrossEvalReport {
            schema_version: CROSS_EVAL_SCHEMA_VERSION,
            same_task,
            cross_task,
        },
    )?;

    let inputs: Vec<&Path> = [args.model.as_ref(), args.scores.as_ref(), Some(&corpus_path)]
        .into_iter()
        .flatten()
        .map(PathBuf::as_path)
        .collect();
    write_manifest("cross-eval", &args, &inputs, &[&output, &table_path])?;
    Ok(())
}
