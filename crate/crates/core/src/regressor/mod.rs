//! Feature-based sentence regressor, its training schedules and helpers.

mod features;
mod model;
mod stilts;
mod synth;
mod train;
mod window;

use rayon::prelude::*;

pub use features::{
    extract_features, FeatureMatrix, Standardizer, FEATURE_DIM, FEATURE_NAMES, POSITIONAL_FEATURES,
};
pub use model::{
    batch_loss, gradient, sigmoid, Example, Params, Provenance, RegressorModel, StageRecord,
    HIDDEN_UNITS, MODEL_SCHEMA_VERSION,
};
pub use stilts::{fit_standardizer, stilts_train, train_from_scratch, StiltsOutcome, TaskData};
pub use synth::{generate_synthetic_corpus, SyntheticCorpus, SyntheticDocument};
pub use train::{standardize_examples, train, train_with_rate, EpochLoss, TrainConfig, TrainOutcome};
pub use window::{window_spans, windowed_score, WindowConfig};

use crate::corpus::{CorpusRecord, Document};
use crate::error::{Error, Result};
use crate::labeling::Task;
use crate::rankers::{ScoreVector, SentenceScorer};

/// Scores sentences with a trained model on raw features.
#[derive(Debug, Clone)]
pub struct ModelScorer {
    pub model: RegressorModel,
}

impl SentenceScorer for ModelScorer {
    fn name(&self) -> String {
        "model".into()
    }

    fn score(&self, sentences: &[crate::corpus::Sentence]) -> Result<Vec<f64>> {
        self.model.predict(&extract_features(sentences))
    }
}

/// One training example per window, with label slices left unnormalized.
pub fn document_examples(doc: &Document, labels: &[f64], wc: &WindowConfig) -> Result<Vec<Example>> {
    if labels.len() != doc.len() {
        return Err(Error::LengthMismatch {
            expected: doc.len(),
            found: labels.len(),
        });
    }
    Ok(window_spans(doc.len(), wc)
        .into_iter()
        .filter(|span| !span.is_empty())
        .map(|span| Example {
            features: extract_features(&doc.sentences[span.clone()]),
            labels: labels[span].to_vec(),
        })
        .collect())
}

/// Examples for every record, failing with the ids that lack `task` labels.
pub fn corpus_examples(records: &[CorpusRecord], task: Task, wc: &WindowConfig) -> Result<Vec<Example>> {
    wc.validate()?;
    let missing: Vec<String> = records
        .iter()
        .filter(|r| r.labels(task).is_none())
        .map(|r| r.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Missing {
            what: "labels",
            ids: missing,
        });
    }
    let per_doc: Vec<Vec<Example>> = records
        .par_iter()
        .map(|r| document_examples(&r.document(), r.labels(task).unwrap_or_default(), wc))
        .collect::<Result<_>>()?;
    Ok(per_doc.into_iter().flatten().collect())
}

/// Scores every document, windowing long ones when `wc` is given.
pub fn score_documents(
    scorer: &dyn SentenceScorer,
    docs: &[Document],
    wc: Option<&WindowConfig>,
) -> Result<Vec<ScoreVector>> {
    let name = scorer.name();
    docs.par_iter()
        .map(|doc| {
            let values = match wc {
                Some(wc) => windowed_score(scorer, &doc.sentences, wc)?,
                None => scorer.score(&doc.sentences)?,
            };
            Ok(ScoreVector {
                document_id: doc.id.clone(),
                scorer: name.clone(),
                values,
            })
        })
        .collect()
}
