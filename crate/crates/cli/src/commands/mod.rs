pub mod cross_eval;
pub mod eval;
pub mod ingest;
pub mod label;
pub mod rank;
pub mod synth;
pub mod train;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use anyhow::{anyhow, Context};
use clap::ValueEnum;
use popcast::corpus::{load_corpus, split_of, CorpusRecord, Split};
use popcast::rankers::ScoreVector;
use popcast::regressor::WindowConfig;
use serde::{Deserialize, Serialize};

use crate::config::{config_error, CmdResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitArg {
    Train,
    Validation,
    Test,
}

impl SplitArg {
    pub fn split(self) -> Split {
        match self {
            SplitArg::Train => Split::Train,
            SplitArg::Validation => Split::Validation,
            SplitArg::Test => Split::Test,
        }
    }
}

pub fn in_split(id: &str, split: Option<SplitArg>) -> bool {
    split.is_none_or(|s| split_of(id) == s.split())
}

pub fn read_corpus_file(path: &Path, split: Option<SplitArg>) -> CmdResult<Vec<CorpusRecord>> {
    let records = load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))?;
    Ok(records.into_iter().filter(|r| in_split(&r.id, split)).collect())
}

pub fn read_scores(path: &Path) -> CmdResult<Vec<ScoreVector>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let sv: ScoreVector = serde_json::from_str(&line)
            .map_err(|e| anyhow!("{}: line {}: {e}", path.display(), i + 1))?;
        out.push(sv);
    }
    Ok(out)
}

/// Window flags: `--stride` alone keeps the default window size.
pub fn window_config(window: Option<usize>, stride: Option<usize>) -> CmdResult<WindowConfig> {
    let d = WindowConfig::default();
    let window = window.unwrap_or(d.window);
    let stride = stride.unwrap_or(d.stride.min(window));
    if window == 0 || stride == 0 || stride > window {
        return config_error(format!(
            "--window {window} / --stride {stride}: need 1 <= stride <= window"
        ));
    }
    Ok(WindowConfig::new(window, stride)?)
}

pub fn parse_k(k: &[usize]) -> CmdResult<Vec<usize>> {
    if k.is_empty() || k.contains(&0) {
        return config_error(format!("--k {k:?}: every k must be at least 1"));
    }
    Ok(k.to_vec())
}
