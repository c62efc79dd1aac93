use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use popcast::corpus::CorpusRecord;
use popcast::labeling::Task;
use popcast::regressor::{corpus_examples, stilts_train, EpochLoss, Example, TaskData, TrainConfig, WindowConfig};
use serde::{Deserialize, Serialize};

use super::{read_corpus_file, window_config, SplitArg};
use crate::config::{config_error, layer, require, resolve_seed, CmdResult, ConfigSource};
use crate::manifest::{with_suffix, write_json, write_manifest};

pub const CURVE_SCHEMA_VERSION: &str = "popcast.curve.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TlVariant {
    None,
    S1,
    S2,
    Sl,
}

impl TlVariant {
    pub fn task(self) -> Option<Task> {
        match self {
            TlVariant::None => None,
            TlVariant::S1 => Some(Task::S1),
            TlVariant::S2 => Some(Task::S2),
            TlVariant::Sl => Some(Task::SL),
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct TrainArgs {
    /// Popularity-labeled training corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Popularity-labeled validation corpus for early stopping.
    #[arg(long)]
    pub validation: Option<PathBuf>,
    /// Take train and validation documents from the id-hashed splits of `--corpus`.
    #[arg(long)]
    pub use_splits: bool,
    /// Intermediate salience task: none, s1, s2 or sl.
    #[arg(long, value_enum)]
    pub tl: Option<TlVariant>,
    /// Corpus carrying the intermediate-task labels; defaults to `--corpus`.
    #[arg(long)]
    pub salience_corpus: Option<PathBuf>,
    #[arg(long)]
    pub salience_validation: Option<PathBuf>,
    /// Model file.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub pretrain_epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub finetune_learning_rate: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Serialize)]
struct Curve<'a> {
    schema_version: &'static str,
    pretrain: Option<&'a [EpochLoss]>,
    finetune: &'a [EpochLoss],
}

fn examples(records: &[CorpusRecord], task: Task, wc: &WindowConfig) -> CmdResult<Vec<Example>> {
    Ok(corpus_examples(records, task, wc)?)
}

fn load(path: &Path, split: Option<SplitArg>) -> CmdResult<Vec<CorpusRecord>> {
    read_corpus_file(path, split)
}

pub fn run(flags: &TrainArgs, source: &ConfigSource) -> CmdResult<()> {
    let mut args = layer(flags, source.section("train", true)?)?;
    let corpus_path = require(&args.corpus, "corpus")?.clone();
    let output = require(&args.output, "output")?.clone();
    let tl = args.tl.unwrap_or(TlVariant::None);
    args.tl = Some(tl);
    let variant = tl.task();
    if variant.is_none() {
        let stray: Vec<&str> = [
            ("--pretrain-epochs", args.pretrain_epochs.is_some()),
            ("--salience-corpus", args.salience_corpus.is_some()),
            ("--salience-validation", args.salience_validation.is_some()),
            ("--finetune-learning-rate", args.finetune_learning_rate.is_some()),
        ]
        .into_iter()
        .filter_map(|(f, set)| set.then_some(f))
        .collect();
        if !stray.is_empty() {
            return config_error(format!("{} cannot be used with --tl none", stray.join(", ")));
        }
    }
    if args.use_splits && (args.validation.is_some() || args.salience_validation.is_some()) {
        return config_error("--use-splits cannot be combined with --validation or --salience-validation");
    }

    let wc = window_config(args.window, args.stride)?;
    args.window = Some(wc.window);
    args.stride = Some(wc.stride);
    let d = TrainConfig::default();
    let seed = resolve_seed(args.seed)?;
    args.seed = Some(seed);
    let cfg = TrainConfig {
        learning_rate: *args.learning_rate.get_or_insert(d.learning_rate),
        momentum: *args.momentum.get_or_insert(d.momentum),
        epochs: *args.epochs.get_or_insert(d.epochs),
        pretrain_epochs: args.pretrain_epochs,
        batch_size: *args.batch_size.get_or_insert(d.batch_size),
        seed,
        patience: args.patience,
        finetune_learning_rate: match variant {
            Some(_) => *args.finetune_learning_rate.get_or_insert(d.finetune_learning_rate),
            None => d.finetune_learning_rate,
        },
    };
    cfg.validate()?;

    let (train_split, val_split) = if args.use_splits {
        (Some(SplitArg::Train), Some(SplitArg::Validation))
    } else {
        (None, None)
    };
    let pop_train = examples(&load(&corpus_path, train_split)?, Task::Popularity, &wc)?;
    let pop_val = match (&args.validation, val_split) {
        (Some(p), _) => examples(&load(p, None)?, Task::Popularity, &wc)?,
        (None, Some(s)) => examples(&load(&corpus_path, Some(s))?, Task::Popularity, &wc)?,
        (None, None) => Vec::new(),
    };
    let (sal_train, sal_val) = match variant {
        Some(task) => {
            let sal_path = args.salience_corpus.clone().unwrap_or_else(|| corpus_path.clone());
            let train = examples(&load(&sal_path, train_split)?, task, &wc)?;
            let val = match (&args.salience_validation, val_split) {
                (Some(p), _) => examples(&load(p, None)?, task, &wc)?,
                (None, Some(s)) => examples(&load(&sal_path, Some(s))?, task, &wc)?,
                (None, None) => Vec::new(),
            };
            (train, val)
        }
        None => (Vec::new(), Vec::new()),
    };
    if pop_train.is_empty() {
        return Err(anyhow::anyhow!("{}: no training documents", corpus_path.display()).into());
    }

    let out = stilts_train(
        TaskData::new(&sal_train, &sal_val),
        TaskData::new(&pop_train, &pop_val),
        variant,
        &cfg,
    )?;
    out.model.save(&output)?;
    let curve_path = with_suffix(&output, "curve.json");
    write_json(
        &curve_path,
        &Curve {
            schema_version: CURVE_SCHEMA_VERSION,
            pretrain: out.pretrain_curve.as_deref(),
            finetune: &out.curve,
        },
    )?;
    if let Some(last) = out.curve.last() {
        match last.validation {
            Some(v) => eprintln!("trained {} epochs: train loss {:.6}, validation loss {v:.6}", last.epoch, last.train),
            None => eprintln!("trained {} epochs: train loss {:.6}", last.epoch, last.train),
        }
    }

    let inputs: Vec<&Path> = [
        Some(&corpus_path),
        args.validation.as_ref(),
        args.salience_corpus.as_ref(),
        args.salience_validation.as_ref(),
    ]
    .into_iter()
    .flatten()
    .map(PathBuf::as_path)
    .collect();
    write_manifest("train", &args, &inputs, &[&output, &curve_path])?;
    Ok(())
}
