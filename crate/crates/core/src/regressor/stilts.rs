//! Pretrain on a salience task, then fine-tune every parameter on popularity.

use super::features::Standardizer;
use super::model::{Example, RegressorModel, StageRecord};
use super::train::{train_with_rate, EpochLoss, TrainConfig};
use crate::error::Result;
use crate::labeling::Task;

/// Training and validation examples for one task.
#[derive(Debug, Clone, Copy)]
pub struct TaskData<'a> {
    pub train: &'a [Example],
    pub validation: &'a [Example],
}

impl<'a> TaskData<'a> {
    pub fn new(train: &'a [Example], validation: &'a [Example]) -> Self {
        TaskData { train, validation }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StiltsOutcome {
    pub model: RegressorModel,
    pub pretrain_curve: Option<Vec<EpochLoss>>,
    pub curve: Vec<EpochLoss>,
}

/// Standardization statistics of the popularity training features.
pub fn fit_standardizer(examples: &[Example]) -> Standardizer {
    Standardizer::fit(examples.iter().map(|e| &e.features))
}

/// Plain popularity training from a seeded random initialization.
pub fn train_from_scratch(popularity: TaskData<'_>, cfg: &TrainConfig) -> Result<StiltsOutcome> {
    stilts_train(TaskData::new(&[], &[]), popularity, None, cfg)
}

/// Runs the two-stage schedule. `variant` names the salience task the
/// `salience` examples were labeled with; `None` skips pretraining.
pub fn stilts_train(
    salience: TaskData<'_>,
    popularity: TaskData<'_>,
    variant: Option<Task>,
    cfg: &TrainConfig,
) -> Result<StiltsOutcome> {
    cfg.validate()?;
    let mut model = RegressorModel::new(fit_standardizer(popularity.train), cfg.seed);
    let pretrain_epochs = cfg.pretrain_epochs.unwrap_or(cfg.epochs);
    let pretrain = variant.filter(|_| pretrain_epochs > 0 && !salience.train.is_empty());

    let mut stages = Vec::new();
    let mut pretrain_curve = None;
    let (rate, seed) = match pretrain {
        Some(task) => {
            let out = train_with_rate(
                model,
                salience.train,
                salience.validation,
                cfg,
                cfg.learning_rate,
                pretrain_epochs,
            )?;
            stages.push(StageRecord {
                task,
                learning_rate: cfg.learning_rate,
                epochs_run: out.epochs_run,
                seed: cfg.seed,
            });
            model = out.model;
            pretrain_curve = Some(out.curve);
            (cfg.finetune_learning_rate, cfg.seed.wrapping_add(1))
        }
        None => (cfg.learning_rate, cfg.seed),
    };

    let stage_cfg = TrainConfig { seed, ..cfg.clone() };
    let out = train_with_rate(model, popularity.train, popularity.validation, &stage_cfg, rate, cfg.epochs)?;
    stages.push(StageRecord {
        task: Task::Popularity,
        learning_rate: rate,
        epochs_run: out.epochs_run,
        seed,
    });
    let mut model = out.model;
    model.provenance.transfer = pretrain;
    model.provenance.stages = stages;
    model.provenance.config = Some(cfg.clone());
    Ok(StiltsOutcome {
        model,
        pretrain_curve,
        curve: out.curve,
    })
}
