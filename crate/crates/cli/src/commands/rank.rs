use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use popcast::corpus::{save_jsonl, Document};
use popcast::rankers::{LexRankScorer, PageRankConfig, PositionBase, PositionScorer, SentenceScorer, TextRankScorer};
use popcast::regressor::{score_documents, ModelScorer, RegressorModel};
use serde::{Deserialize, Serialize};

use super::{read_corpus_file, window_config, SplitArg};
use crate::config::{config_error, layer, require, CmdResult, ConfigSource};
use crate::manifest::write_manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    Position,
    Textrank,
    Lexrank,
    Model,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RankArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scorer: Option<ScorerKind>,
    /// Trained model file; required by `--scorer model`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Score vectors, one JSON object per document.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Only score documents of this split.
    #[arg(long, value_enum)]
    pub split: Option<SplitArg>,
    /// Sliding-window size; the model scorer always windows (default 50).
    #[arg(long)]
    pub window: Option<usize>,
    /// Window start advance (default 10).
    #[arg(long)]
    pub stride: Option<usize>,
    /// Sentence index base of the position score: 0 or 1 (default 1).
    #[arg(long)]
    pub position_base: Option<u8>,
    #[arg(long)]
    pub lexrank_threshold: Option<f64>,
    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

pub fn run(flags: &RankArgs, source: &ConfigSource) -> CmdResult<()> {
    let mut args = layer(flags, source.section("rank", false)?)?;
    let corpus_path = require(&args.corpus, "corpus")?.clone();
    let output = require(&args.output, "output")?.clone();
    let kind = *require(&args.scorer, "scorer")?;
    match (kind, &args.model) {
        (ScorerKind::Model, None) => return config_error("--scorer model requires --model"),
        (ScorerKind::Model, Some(_)) => {}
        (_, Some(_)) => return config_error("--model is only used with --scorer model"),
        _ => {}
    }
    if kind != ScorerKind::Lexrank && args.lexrank_threshold.is_some() {
        return config_error("--lexrank-threshold requires --scorer lexrank");
    }
    if kind != ScorerKind::Position && args.position_base.is_some() {
        return config_error("--position-base requires --scorer position");
    }
    let graph = matches!(kind, ScorerKind::Textrank | ScorerKind::Lexrank);
    if !graph && (args.damping.is_some() || args.tol.is_some() || args.max_iter.is_some()) {
        return config_error("--damping/--tol/--max-iter require --scorer textrank or lexrank");
    }

    let windowed = kind == ScorerKind::Model || args.window.is_some() || args.stride.is_some();
    let wc = if windowed {
        let wc = window_config(args.window, args.stride)?;
        args.window = Some(wc.window);
        args.stride = Some(wc.stride);
        Some(wc)
    } else {
        None
    };
    let pr = if graph {
        let d = PageRankConfig::default();
        let pr = PageRankConfig {
            damping: args.damping.unwrap_or(d.damping),
            tol: args.tol.unwrap_or(d.tol),
            max_iter: args.max_iter.unwrap_or(d.max_iter),
        };
        args.damping = Some(pr.damping);
        args.tol = Some(pr.tol);
        args.max_iter = Some(pr.max_iter);
        pr
    } else {
        PageRankConfig::default()
    };

    let scorer: Box<dyn SentenceScorer> = match kind {
        ScorerKind::Position => {
            let base = match args.position_base.unwrap_or(1) {
                0 => PositionBase::Zero,
                1 => PositionBase::One,
                b => return config_error(format!("--position-base {b}: expected 0 or 1")),
            };
            args.position_base = Some(if base == PositionBase::Zero { 0 } else { 1 });
            Box::new(PositionScorer { base })
        }
        ScorerKind::Textrank => Box::new(TextRankScorer { pagerank: pr }),
        ScorerKind::Lexrank => {
            let threshold = args.lexrank_threshold.unwrap_or(LexRankScorer::default().threshold);
            args.lexrank_threshold = Some(threshold);
            Box::new(LexRankScorer { threshold, pagerank: pr })
        }
        ScorerKind::Model => {
            let path = args.model.as_ref().expect("checked above");
            Box::new(ModelScorer { model: RegressorModel::load(path)? })
        }
    };

    let records = read_corpus_file(&corpus_path, args.split)?;
    let docs: Vec<Document> = records.iter().map(|r| r.document()).collect();
    let scores = score_documents(scorer.as_ref(), &docs, wc.as_ref())?;
    save_jsonl(&output, &scores)?;
    eprintln!("{}: scored {} documents", scorer.name(), scores.len());

    let inputs: Vec<&Path> = [Some(&corpus_path), args.model.as_ref()]
        .into_iter()
        .flatten()
        .map(PathBuf::as_path)
        .collect();
    write_manifest("rank", &args, &inputs, &[&output])?;
    Ok(())
}
