//! Corpus-level evaluation reports.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{kendall_tau, mae, mse, ndcg, spearman_rho, top_k_overlap};
use crate::corpus::CorpusRecord;
use crate::error::{Error, Result};
use crate::labeling::{LabelVector, Task};
use crate::rankers::ScoreVector;

pub const EVAL_SCHEMA_VERSION: &str = "popcast.eval.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentMetrics {
    pub id: String,
    /// Top-k overlap in percent, one entry per requested k.
    pub top: Vec<f64>,
    pub mse: f64,
    pub mae: f64,
    pub tau: f64,
    pub rho: f64,
    pub ndcg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricMeans {
    pub top: Vec<f64>,
    pub mse: f64,
    pub mae: f64,
    pub tau: f64,
    pub rho: f64,
    pub ndcg: f64,
}

/// Documents whose metric was set by convention rather than computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub constant_tau: usize,
    pub constant_rho: usize,
    pub zero_ideal_gain: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub aggregation: String,
    pub ndcg: String,
    pub ties: String,
    pub constant_correlation: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            aggregation: "macro".into(),
            ndcg: "raw gains, log2(rank + 1) discount, no cutoff".into(),
            ties: "lower sentence index ranks first".into(),
            constant_correlation: "0 and counted in diagnostics".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: String,
    pub scorer: String,
    /// Task whose labels were evaluated against.
    pub task: Task,
    /// Task the scorer was trained on, for cross-task reports.
    pub train_task: Option<Task>,
    pub k: Vec<usize>,
    pub document_count: usize,
    pub means: MetricMeans,
    pub diagnostics: Diagnostics,
    pub conventions: Conventions,
    pub fingerprint: String,
    pub documents: Vec<DocumentMetrics>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Label vectors of `task` for every record, failing with the unlabeled ids.
pub fn labels_from_records(records: &[CorpusRecord], task: Task) -> Result<Vec<LabelVector>> {
    let mut missing = Vec::new();
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        match r.labels(task) {
            Some(values) => out.push(LabelVector {
                document_id: r.id.clone(),
                task,
                values: values.to_vec(),
            }),
            None => missing.push(r.id.clone()),
        }
    }
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(Error::Missing { what: "labels", ids: missing })
    }
}

struct Scored {
    metrics: DocumentMetrics,
    diagnostics: Diagnostics,
}

fn score_document(truth: &LabelVector, pred: &ScoreVector, k: &[usize]) -> Result<Scored> {
    let (t, p) = (&truth.values, &pred.values);
    let top = k
        .iter()
        .map(|&k| top_k_overlap(t, p, k).map(|v| 100.0 * v))
        .collect::<Result<Vec<_>>>()?;
    let tau = kendall_tau(t, p)?;
    let rho = spearman_rho(t, p)?;
    let gain = ndcg(t, p)?;
    Ok(Scored {
        metrics: DocumentMetrics {
            id: truth.document_id.clone(),
            top,
            mse: mse(t, p)?,
            mae: mae(t, p)?,
            tau: tau.value,
            rho: rho.value,
            ndcg: gain.value,
        },
        diagnostics: Diagnostics {
            constant_tau: tau.degenerate as usize,
            constant_rho: rho.degenerate as usize,
            zero_ideal_gain: gain.degenerate as usize,
        },
    })
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        values.sum::<f64>() / n as f64
    }
}

fn fingerprint(scorer: &str, task: Task, train_task: Option<Task>, k: &[usize], ids: &[&str]) -> String {
    let config = serde_json::json!({
        "scorer": scorer,
        "task": task,
        "train_task": train_task,
        "k": k,
        "conventions": Conventions::default(),
        "documents": ids,
    });
    let digest = Sha256::digest(config.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn build(
    scorer: &str,
    task: Task,
    train_task: Option<Task>,
    scores: &[ScoreVector],
    labels: &[LabelVector],
    k: &[usize],
) -> Result<EvalReport> {
    let by_id: HashMap<&str, &ScoreVector> = scores.iter().map(|s| (s.document_id.as_str(), s)).collect();
    let missing: Vec<String> = labels
        .iter()
        .filter(|l| !by_id.contains_key(l.document_id.as_str()))
        .map(|l| l.document_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Missing { what: "scores", ids: missing });
    }
    let labeled: HashMap<&str, ()> = labels.iter().map(|l| (l.document_id.as_str(), ())).collect();
    let unlabeled: Vec<String> = scores
        .iter()
        .filter(|s| !labeled.contains_key(s.document_id.as_str()))
        .map(|s| s.document_id.clone())
        .collect();
    if !unlabeled.is_empty() {
        return Err(Error::Missing { what: "labels", ids: unlabeled });
    }

    let scored: Vec<Scored> = labels
        .par_iter()
        .map(|l| score_document(l, by_id[l.document_id.as_str()], k))
        .collect::<Result<_>>()?;
    let n = scored.len();
    let docs: Vec<DocumentMetrics> = scored.iter().map(|s| s.metrics.clone()).collect();
    let means = MetricMeans {
        top: (0..k.len()).map(|j| mean(docs.iter().map(|d| d.top[j]), n)).collect(),
        mse: mean(docs.iter().map(|d| d.mse), n),
        mae: mean(docs.iter().map(|d| d.mae), n),
        tau: mean(docs.iter().map(|d| d.tau), n),
        rho: mean(docs.iter().map(|d| d.rho), n),
        ndcg: mean(docs.iter().map(|d| d.ndcg), n),
    };
    let diagnostics = scored.iter().fold(Diagnostics::default(), |acc, s| Diagnostics {
        constant_tau: acc.constant_tau + s.diagnostics.constant_tau,
        constant_rho: acc.constant_rho + s.diagnostics.constant_rho,
        zero_ideal_gain: acc.zero_ideal_gain + s.diagnostics.zero_ideal_gain,
    });
    let ids: Vec<&str> = labels.iter().map(|l| l.document_id.as_str()).collect();
    Ok(EvalReport {
        schema_version: EVAL_SCHEMA_VERSION.into(),
        scorer: scorer.into(),
        task,
        train_task,
        k: k.to_vec(),
        document_count: n,
        means,
        diagnostics,
        conventions: Conventions::default(),
        fingerprint: fingerprint(scorer, task, train_task, k, &ids),
        documents: docs,
    })
}

/// Macro-averaged metrics of `scores` against `labels`, in label order.
pub fn evaluate_corpus(
    scorer: &str,
    task: Task,
    scores: &[ScoreVector],
    labels: &[LabelVector],
    k: &[usize],
) -> Result<EvalReport> {
    build(scorer, task, None, scores, labels, k)
}

/// Evaluates scores from a `source`-trained scorer against `target` labels.
pub fn cross_task_eval(
    scorer: &str,
    source: Task,
    target: Task,
    scores: &[ScoreVector],
    labels: &[LabelVector],
    k: &[usize],
) -> Result<EvalReport> {
    build(scorer, target, Some(source), scores, labels, k)
}

/// Aligned text table, one row per report.
pub fn render_table(reports: &[&EvalReport]) -> String {
    let k: Vec<usize> = reports.first().map(|r| r.k.clone()).unwrap_or_default();
    let mut header = vec!["Scorer".to_string(), "Train".into(), "Eval".into()];
    header.extend(k.iter().map(|k| format!("Top{k}")));
    header.extend(["MSE", "MAE", "tau", "rho", "nDCG"].map(String::from));
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![
                r.scorer.clone(),
                r.train_task.map_or("-".into(), |t| t.to_string()),
                r.task.to_string(),
            ];
            row.extend(r.means.top.iter().map(|v| format!("{v:.2}")));
            row.push(format!("{:.6}", r.means.mse));
            row.push(format!("{:.6}", r.means.mae));
            row.push(format!("{:.4}", r.means.tau));
            row.push(format!("{:.4}", r.means.rho));
            row.push(format!("{:.4}", r.means.ndcg));
            row
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(String::len)
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in std::iter::once(&header).chain(&rows) {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c < 3 {
                    format!("{cell:<w$}", w = widths[c])
                } else {
                    format!("{cell:>w$}", w = widths[c])
                }
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}
