//! One-hidden-layer sentence regressor: `sigmoid(w2 . tanh(W1 x + b1) + b2)`.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{FeatureMatrix, Standardizer, FEATURE_DIM, FEATURE_NAMES};
use super::train::TrainConfig;
use crate::error::{Error, Result};
use crate::labeling::Task;

pub const MODEL_SCHEMA_VERSION: &str = "popcast.regressor.v1";
pub const HIDDEN_UNITS: usize = 16;

/// Trainable parameters. `w1` is row-major `inputs x hidden`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub inputs: usize,
    pub hidden: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl Params {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        Params {
            inputs,
            hidden,
            w1: vec![0.0; inputs * hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Params::zeros(inputs, hidden);
        let a1 = (6.0 / (inputs + hidden) as f64).sqrt();
        p.w1.iter_mut().for_each(|w| *w = rng.random_range(-a1..a1));
        let a2 = (6.0 / (hidden + 1) as f64).sqrt();
        p.w2.iter_mut().for_each(|w| *w = rng.random_range(-a2..a2));
        p
    }

    pub fn len(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat view in the order `w1, b1, w2, b2`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.w1);
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(&self.w2);
        v.push(self.b2);
        v
    }

    pub fn from_slice(inputs: usize, hidden: usize, flat: &[f64]) -> Self {
        let mut p = Params::zeros(inputs, hidden);
        assert_eq!(flat.len(), p.len(), "parameter vector length");
        let (w1, rest) = flat.split_at(inputs * hidden);
        let (b1, rest) = rest.split_at(hidden);
        let (w2, rest) = rest.split_at(hidden);
        p.w1.copy_from_slice(w1);
        p.b1.copy_from_slice(b1);
        p.w2.copy_from_slice(w2);
        p.b2 = rest[0];
        p
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|x| x.is_finite())
    }

    fn hidden_activations(&self, x: &[f64], out: &mut [f64]) {
        for (j, a) in out.iter_mut().enumerate() {
            let mut u = self.b1[j];
            for (k, xk) in x.iter().enumerate() {
                u += self.w1[k * self.hidden + j] * xk;
            }
            *a = u.tanh();
        }
    }

    /// Scores already standardized rows.
    pub fn forward(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.rows() > 0 && x.cols() != self.inputs {
            return Err(Error::DimensionMismatch {
                expected: self.inputs,
                found: x.cols(),
            });
        }
        let mut hidden = vec![0.0; self.hidden];
        Ok(x.iter_rows()
            .map(|row| {
                self.hidden_activations(row, &mut hidden);
                let z = self.b2 + self.w2.iter().zip(&hidden).map(|(w, a)| w * a).sum::<f64>();
                sigmoid(z)
            })
            .collect())
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// One document (or window) with standardized features and its targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: FeatureMatrix,
    pub labels: Vec<f64>,
}

/// Mean over examples of the per-example mean squared error.
pub fn batch_loss(params: &Params, batch: &[&Example]) -> Result<f64> {
    if batch.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for ex in batch {
        let pred = params.forward(&ex.features)?;
        if pred.len() != ex.labels.len() {
            return Err(Error::LengthMismatch {
                expected: pred.len(),
                found: ex.labels.len(),
            });
        }
        if pred.is_empty() {
            continue;
        }
        let se: f64 = pred.iter().zip(&ex.labels).map(|(p, y)| (p - y).powi(2)).sum();
        total += se / pred.len() as f64;
    }
    Ok(total / batch.len() as f64)
}

/// Loss and exact gradient of [`batch_loss`] by backpropagation.
pub fn gradient(params: &Params, batch: &[&Example]) -> Result<(f64, Params)> {
    let mut grad = Params::zeros(params.inputs, params.hidden);
    if batch.is_empty() {
        return Ok((0.0, grad));
    }
    let h = params.hidden;
    let mut hidden = vec![0.0; h];
    let mut total = 0.0;
    let scale = 1.0 / batch.len() as f64;
    for ex in batch {
        let n = ex.features.rows();
        if n != ex.labels.len() {
            return Err(Error::LengthMismatch {
                expected: n,
                found: ex.labels.len(),
            });
        }
        if n > 0 && ex.features.cols() != params.inputs {
            return Err(Error::DimensionMismatch {
                expected: params.inputs,
                found: ex.features.cols(),
            });
        }
        if n == 0 {
            continue;
        }
        let doc_scale = scale / n as f64;
        let mut se = 0.0;
        for (row, &y) in ex.features.iter_rows().zip(&ex.labels) {
            params.hidden_activations(row, &mut hidden);
            let z = params.b2 + params.w2.iter().zip(&hidden).map(|(w, a)| w * a).sum::<f64>();
            let p = sigmoid(z);
            let residual = p - y;
            se += residual * residual;
            let dz = 2.0 * residual * doc_scale * p * (1.0 - p);
            grad.b2 += dz;
            for j in 0..h {
                grad.w2[j] += dz * hidden[j];
                let du = dz * params.w2[j] * (1.0 - hidden[j] * hidden[j]);
                grad.b1[j] += du;
                for (k, xk) in row.iter().enumerate() {
                    grad.w1[k * h + j] += du * xk;
                }
            }
        }
        total += se / n as f64;
    }
    Ok((total * scale, grad))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub task: Task,
    pub learning_rate: f64,
    pub epochs_run: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub init_seed: u64,
    /// Intermediate task requested for transfer learning, if any.
    pub transfer: Option<Task>,
    pub stages: Vec<StageRecord>,
    pub config: Option<TrainConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressorModel {
    pub schema_version: String,
    pub feature_names: Vec<String>,
    pub activation: String,
    pub output: String,
    pub standardizer: Standardizer,
    pub params: Params,
    pub provenance: Provenance,
}

impl RegressorModel {
    pub fn new(standardizer: Standardizer, seed: u64) -> Self {
        RegressorModel {
            schema_version: MODEL_SCHEMA_VERSION.to_string(),
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            activation: "tanh".into(),
            output: "sigmoid".into(),
            standardizer,
            params: Params::init(FEATURE_DIM, HIDDEN_UNITS, seed),
            provenance: Provenance {
                init_seed: seed,
                transfer: None,
                stages: Vec::new(),
                config: None,
            },
        }
    }

    /// Standardizes raw features with the stored statistics and scores them.
    pub fn predict(&self, raw: &FeatureMatrix) -> Result<Vec<f64>> {
        if raw.rows() > 0 && raw.cols() != self.standardizer.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.standardizer.mean.len(),
                found: raw.cols(),
            });
        }
        self.params.forward(&self.standardizer.apply(raw))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses a model file, refusing other schema versions.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let found = value
            .get("schema_version")
            .and_then(|v| v.as_str())
            .unwrap_or("<missing>");
        if found != MODEL_SCHEMA_VERSION {
            return Err(Error::SchemaMismatch {
                expected: MODEL_SCHEMA_VERSION.into(),
                found: found.into(),
            });
        }
        let model: RegressorModel = serde_json::from_value(value)?;
        if !model.params.is_finite() {
            return Err(Error::InvalidConfig("model file contains non-finite parameters".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RegressorModel::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[[f64; 3]]) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn zero_weights_score_one_half() {
        let p = Params::zeros(3, 4);
        let out = p.forward(&matrix(&[[1.0, -2.0, 3.0], [0.0, 0.0, 9.0]])).unwrap();
        assert_eq!(out, vec![0.5, 0.5]);
    }

    #[test]
    fn identical_rows_identical_scores() {
        let p = Params::init(3, 4, 11);
        let out = p.forward(&matrix(&[[0.3, 0.1, -0.7], [0.3, 0.1, -0.7]])).unwrap();
        assert_eq!(out[0].to_bits(), out[1].to_bits());
    }

    #[test]
    fn hand_evaluated_small_model() {
        // inputs 2, hidden 2. u = W1^T x + b1.
        let p = Params {
            inputs: 2,
            hidden: 2,
            w1: vec![0.5, -1.0, 0.25, 2.0],
            b1: vec![0.1, -0.2],
            w2: vec![1.5, -0.5],
            b2: 0.3,
        };
        let x = FeatureMatrix::from_rows(vec![vec![1.0, 2.0]]);
        // u0 = 0.5*1 + 0.25*2 + 0.1 = 1.1; u1 = -1*1 + 2*2 - 0.2 = 2.8
        let z = 0.3 + 1.5 * 1.1f64.tanh() - 0.5 * 2.8f64.tanh();
        let expected = 1.0 / (1.0 + (-z).exp());
        let out = p.forward(&x).unwrap();
        assert!((out[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = Params::zeros(4, 2);
        assert!(matches!(
            p.forward(&matrix(&[[1.0, 2.0, 3.0]])),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn sigmoid_is_stable_for_large_inputs() {
        assert!(sigmoid(800.0) <= 1.0 && sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(-800.0).is_finite());
    }

    #[test]
    fn zero_model_with_half_labels_has_zero_bias_gradient() {
        let p = Params::zeros(3, 4);
        let ex = Example {
            features: matrix(&[[1.0, 2.0, 3.0], [-1.0, 0.5, 0.0]]),
            labels: vec![0.5, 0.5],
        };
        let (loss, g) = gradient(&p, &[&ex]).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(g.b2, 0.0);
    }

    #[test]
    fn flat_round_trip() {
        let p = Params::init(5, 3, 9);
        assert_eq!(Params::from_slice(5, 3, &p.to_vec()), p);
    }

    #[test]
    fn model_json_round_trip_and_schema_check() {
        let model = RegressorModel::new(Standardizer::identity(FEATURE_DIM), 3);
        let text = model.to_json().unwrap();
        assert_eq!(RegressorModel::from_json(&text).unwrap(), model);
        let wrong = text.replace(MODEL_SCHEMA_VERSION, "popcast.regressor.v0");
        assert!(matches!(RegressorModel::from_json(&wrong), Err(Error::SchemaMismatch { .. })));
    }
}
