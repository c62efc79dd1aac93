use std::path::PathBuf;

use clap::Args;
use popcast::corpus::{save_corpus, save_jsonl};
use popcast::regressor::generate_synthetic_corpus;
use serde::{Deserialize, Serialize};

use crate::config::{layer, require, resolve_seed, CmdResult, ConfigSource};
use crate::manifest::{with_suffix, write_manifest};

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of documents (default 1000).
    #[arg(long)]
    pub docs: Option<usize>,
    /// Mixing weight of salience in latent popularity, in [0, 1] (default 0.7).
    #[arg(long)]
    pub task_correlation: Option<f64>,
    /// Labeled corpus.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Query sets; defaults to `<output>.queries.jsonl`.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Reference summaries; defaults to `<output>.summaries.jsonl`.
    #[arg(long)]
    pub summaries: Option<PathBuf>,
}

pub fn run(flags: &SynthArgs, source: &ConfigSource) -> CmdResult<()> {
    let mut args = layer(flags, source.section("synth", true)?)?;
    let output = require(&args.output, "output")?.clone();
    let seed = resolve_seed(args.seed)?;
    args.seed = Some(seed);
    let docs = *args.docs.get_or_insert(1000);
    let rho = *args.task_correlation.get_or_insert(0.7);
    let queries = args.queries.get_or_insert_with(|| with_suffix(&output, "queries.jsonl")).clone();
    let summaries = args.summaries.get_or_insert_with(|| with_suffix(&output, "summaries.jsonl")).clone();

    let corpus = generate_synthetic_corpus(seed, docs, rho)?;
    save_corpus(&output, &corpus.records())?;
    save_jsonl(&queries, &corpus.query_records())?;
    save_jsonl(&summaries, &corpus.summary_records())?;
    eprintln!("generated {docs} synthetic documents (seed {seed}, task correlation {rho})");
    write_manifest("synth", &args, &[], &[&output, &queries, &summaries])?;
    Ok(())
}
