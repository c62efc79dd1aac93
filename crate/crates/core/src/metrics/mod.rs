//! Per-document ranking and regression metrics.
//!
//! Ties between equal scores are always broken in favour of the lower
//! sentence index.

mod report;
mod significance;

use std::cmp::Ordering;

use crate::error::{Error, Result};

pub use report::{
    cross_task_eval, evaluate_corpus, labels_from_records, render_table, Conventions, Diagnostics,
    DocumentMetrics, EvalReport, MetricMeans, EVAL_SCHEMA_VERSION,
};
pub use significance::{paired_permutation_test, paired_sign_test, PermutationTest, SignTest};

/// A correlation value and whether it was defined by convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Graded {
    pub value: f64,
    /// Set when an input was constant (correlations) or ideal gain was zero (nDCG).
    pub degenerate: bool,
}

fn check_pair(truth: &[f64], pred: &[f64]) -> Result<()> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    for v in [truth, pred] {
        if let Some(index) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
    }
    Ok(())
}

fn cmp(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Indices sorted by value descending, lower index first on ties.
pub fn ranking(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| cmp(values[b], values[a]).then(a.cmp(&b)));
    idx
}

/// Indices of the `k` highest values.
pub fn top_k_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut top = ranking(values);
    top.truncate(k);
    top
}

/// `|A_k ∩ P_k| / k` over the top-k index sets of truth and prediction.
pub fn top_k_overlap(truth: &[f64], pred: &[f64], k: usize) -> Result<f64> {
    check_pair(truth, pred)?;
    let n = truth.len();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let mut in_truth = vec![false; n];
    for i in top_k_indices(truth, k) {
        in_truth[i] = true;
    }
    let hits = top_k_indices(pred, k).into_iter().filter(|&i| in_truth[i]).count();
    Ok(hits as f64 / k as f64)
}

pub fn mse(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check_pair(truth, pred)?;
    if truth.is_empty() {
        return Err(Error::TooFewItems(0));
    }
    Ok(truth.iter().zip(pred).map(|(t, p)| (t - p).powi(2)).sum::<f64>() / truth.len() as f64)
}

pub fn mae(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check_pair(truth, pred)?;
    if truth.is_empty() {
        return Err(Error::TooFewItems(0));
    }
    Ok(truth.iter().zip(pred).map(|(t, p)| (t - p).abs()).sum::<f64>() / truth.len() as f64)
}

fn tied_pairs<T: PartialEq>(sorted: &[T]) -> i64 {
    let mut total = 0i64;
    let mut run = 1i64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    if !sorted.is_empty() {
        total += run * (run - 1) / 2;
    }
    total
}

/// Sorts `v` in place and returns the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> i64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as i64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    let k = k + mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Kendall tau-b in O(n log n).
pub fn kendall_tau(truth: &[f64], pred: &[f64]) -> Result<Graded> {
    check_pair(truth, pred)?;
    let n = truth.len();
    if n < 2 {
        return Err(Error::TooFewItems(n));
    }
    // Adding 0.0 folds -0.0 into 0.0 so ties are judged by value.
    let x: Vec<f64> = truth.iter().map(|v| v + 0.0).collect();
    let y: Vec<f64> = pred.iter().map(|v| v + 0.0).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| cmp(x[a], x[b]).then(cmp(y[a], y[b])));
    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let xy: Vec<(f64, f64)> = idx.iter().map(|&i| (x[i], y[i])).collect();
    let n0 = (n as i64) * (n as i64 - 1) / 2;
    let n1 = tied_pairs(&xs);
    let n3 = tied_pairs(&xy);
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);
    let n2 = tied_pairs(&ys);
    if n0 == n1 || n0 == n2 {
        return Ok(Graded {
            value: 0.0,
            degenerate: true,
        });
    }
    let numerator = (n0 - n1 - n2 + n3 - 2 * swaps) as f64;
    let denominator = (((n0 - n1) as f64) * ((n0 - n2) as f64)).sqrt();
    Ok(Graded {
        value: (numerator / denominator).clamp(-1.0, 1.0),
        degenerate: false,
    })
}

/// 1-based ranks in ascending value order; ties share their mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| cmp(values[a], values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        None
    } else {
        Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
    }
}

/// Spearman rho: Pearson correlation of average ranks.
pub fn spearman_rho(truth: &[f64], pred: &[f64]) -> Result<Graded> {
    check_pair(truth, pred)?;
    let n = truth.len();
    if n < 2 {
        return Err(Error::TooFewItems(n));
    }
    Ok(match pearson(&average_ranks(truth), &average_ranks(pred)) {
        Some(value) => Graded {
            value,
            degenerate: false,
        },
        None => Graded {
            value: 0.0,
            degenerate: true,
        },
    })
}

fn dcg(gains: impl Iterator<Item = f64>) -> f64 {
    gains
        .enumerate()
        .map(|(r, g)| g / ((r + 2) as f64).log2())
        .sum()
}

/// Untruncated nDCG with raw labels as gains.
pub fn ndcg(truth: &[f64], pred: &[f64]) -> Result<Graded> {
    check_pair(truth, pred)?;
    if let Some((index, &value)) = truth.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeValue { index, value });
    }
    let ideal = dcg(ranking(truth).into_iter().map(|i| truth[i]));
    if ideal == 0.0 {
        return Ok(Graded {
            value: 1.0,
            degenerate: true,
        });
    }
    let actual = dcg(ranking(pred).into_iter().map(|i| truth[i]));
    Ok(Graded {
        value: (actual / ideal).clamp(0.0, 1.0),
        degenerate: false,
    })
}
