//! Mini-batch gradient descent with momentum on the per-document MSE.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{batch_loss, gradient, Example, Params, RegressorModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// Epochs on the intermediate task; defaults to `epochs`.
    pub pretrain_epochs: Option<usize>,
    /// Documents per mini-batch.
    pub batch_size: usize,
    pub seed: u64,
    /// Stop after this many epochs without validation improvement.
    pub patience: Option<usize>,
    pub finetune_learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-2,
            momentum: 0.9,
            epochs: 50,
            pretrain_epochs: None,
            batch_size: 32,
            seed: 0,
            patience: None,
            finetune_learning_rate: 1e-3,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !(self.finetune_learning_rate >= 0.0) {
            return Err(Error::InvalidConfig("learning rates must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig("momentum must be in [0, 1)".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train: f64,
    pub validation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: RegressorModel,
    /// Entry 0 holds the losses before any update.
    pub curve: Vec<EpochLoss>,
    pub epochs_run: usize,
}

/// Standardizes raw examples with the model's stored statistics.
pub fn standardize_examples(model: &RegressorModel, raw: &[Example]) -> Vec<Example> {
    raw.iter()
        .map(|ex| Example {
            features: model.standardizer.apply(&ex.features),
            labels: ex.labels.clone(),
        })
        .collect()
}

fn full_loss(params: &Params, set: &[Example]) -> Result<f64> {
    let refs: Vec<&Example> = set.iter().collect();
    batch_loss(params, &refs)
}

/// Trains every parameter of `model` on raw (unstandardized) examples.
///
/// `learning_rate` overrides `cfg.learning_rate` so fine-tuning stages can
/// reuse the same config.
pub fn train_with_rate(
    model: RegressorModel,
    train: &[Example],
    validation: &[Example],
    cfg: &TrainConfig,
    learning_rate: f64,
    epochs: usize,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let train_set = standardize_examples(&model, train);
    let val_set = standardize_examples(&model, validation);
    let mut params = model.params.clone();
    let mut velocity = vec![0.0; params.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    let val_loss = |p: &Params| -> Result<Option<f64>> {
        if val_set.is_empty() {
            Ok(None)
        } else {
            full_loss(p, &val_set).map(Some)
        }
    };
    let mut curve = vec![EpochLoss {
        epoch: 0,
        train: full_loss(&params, &train_set)?,
        validation: val_loss(&params)?,
    }];
    let mut best = (curve[0].validation.unwrap_or(f64::INFINITY), params.clone());
    let mut since_best = 0usize;
    let mut epochs_run = 0usize;

    for epoch in 1..=epochs {
        order.shuffle(&mut rng);
        for (batch_index, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (loss, grad) = gradient(&params, &batch)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: batch_index,
                });
            }
            let mut flat = params.to_vec();
            for ((theta, v), g) in flat.iter_mut().zip(velocity.iter_mut()).zip(grad.to_vec()) {
                *v = cfg.momentum * *v - learning_rate * g;
                *theta += *v;
            }
            params = Params::from_slice(params.inputs, params.hidden, &flat);
            if !params.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: batch_index,
                });
            }
        }
        epochs_run = epoch;
        let entry = EpochLoss {
            epoch,
            train: full_loss(&params, &train_set)?,
            validation: val_loss(&params)?,
        };
        if !entry.train.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, batch: 0 });
        }
        curve.push(entry);
        if let (Some(patience), Some(v)) = (cfg.patience, entry.validation) {
            if v < best.0 {
                best = (v, params.clone());
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= patience {
                    params = best.1.clone();
                    break;
                }
            }
        }
    }

    let mut model = model;
    model.params = params;
    Ok(TrainOutcome {
        model,
        curve,
        epochs_run,
    })
}

/// Trains with `cfg.learning_rate` for `cfg.epochs` epochs.
pub fn train(
    model: RegressorModel,
    train: &[Example],
    validation: &[Example],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    train_with_rate(model, train, validation, cfg, cfg.learning_rate, cfg.epochs)
}
