//! Sliding-window scoring for documents longer than a scorer's budget.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::rankers::SentenceScorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    /// Maximum sentences per window.
    pub window: usize,
    /// Sentences between consecutive window starts.
    pub stride: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig { window: 50, stride: 10 }
    }
}

impl WindowConfig {
    pub fn new(window: usize, stride: usize) -> Result<Self> {
        let wc = WindowConfig { window, stride };
        wc.validate()?;
        Ok(wc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 || self.stride > self.window {
            return Err(Error::InvalidConfig(format!(
                "window stride must satisfy 1 <= stride <= window (got stride {} window {})",
                self.stride, self.window
            )));
        }
        Ok(())
    }
}

/// Window spans over `n` sentences. Starts advance by `stride`; the last
/// window is aligned to end at `n` so every window is full-size.
pub fn window_spans(n: usize, wc: &WindowConfig) -> Vec<Range<usize>> {
    if n <= wc.window {
        return vec![0..n];
    }
    let mut spans = Vec::new();
    let mut start = 0;
    while start + wc.window < n {
        spans.push(start..start + wc.window);
        start += wc.stride;
    }
    spans.push(n - wc.window..n);
    spans
}

/// Scores each window independently and averages overlapping sentences.
pub fn windowed_score(scorer: &dyn SentenceScorer, sentences: &[Sentence], wc: &WindowConfig) -> Result<Vec<f64>> {
    wc.validate()?;
    let n = sentences.len();
    if n <= wc.window {
        return scorer.score(sentences);
    }
    let mut sum = vec![0.0; n];
    let mut count = vec![0usize; n];
    for span in window_spans(n, wc) {
        let local = scorer.score(&sentences[span.clone()])?;
        if local.len() != span.len() {
            return Err(Error::LengthMismatch {
                expected: span.len(),
                found: local.len(),
            });
        }
        for (i, v) in span.zip(local) {
            sum[i] += v;
            count[i] += 1;
        }
    }
    Ok(sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect())
}
