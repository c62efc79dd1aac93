//! Sentence popularity forecasting: labeling, unsupervised rankers, a
//! trainable regressor with transfer learning, and evaluation metrics.

pub mod corpus;
pub mod error;
pub mod labeling;
pub mod metrics;
pub mod rankers;
pub mod regressor;
pub mod simindex;

pub use error::{Error, Result};
