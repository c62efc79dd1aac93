use std::collections::BTreeSet;

use popcast::labeling::{LabelVector, Task};
use popcast::metrics::{
    cross_task_eval, evaluate_corpus, kendall_tau, mae, mse, ndcg, render_table, spearman_rho, top_k_overlap,
};
use popcast::rankers::ScoreVector;
use proptest::prelude::*;

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn tau_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut s, mut tx, mut ty) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let a = sign(x[i] - x[j]);
            let b = sign(y[i] - y[j]);
            s += a * b;
            tx += a * a;
            ty += b * b;
        }
    }
    if tx == 0.0 || ty == 0.0 {
        0.0
    } else {
        s / (tx * ty).sqrt()
    }
}

fn rank_oracle(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let less = x.iter().filter(|w| *w < v).count() as f64;
            let equal = x.iter().filter(|w| *w == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

fn rho_oracle(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (rank_oracle(x), rank_oracle(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

fn top_set(x: &[f64], k: usize) -> BTreeSet<usize> {
    // Selection by repeated arg-max, first index wins.
    let mut chosen = BTreeSet::new();
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for i in 0..x.len() {
            if chosen.contains(&i) {
                continue;
            }
            if best.is_none_or(|b| x[i] > x[b]) {
                best = Some(i);
            }
        }
        chosen.insert(best.unwrap());
    }
    chosen
}

fn top_oracle(x: &[f64], y: &[f64], k: usize) -> f64 {
    top_set(x, k).intersection(&top_set(y, k)).count() as f64 / k as f64
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn exhaustive_permutations_up_to_six() {
    for n in 2..=6 {
        let truth: Vec<f64> = (0..n).map(|i| i as f64).collect();
        for p in permutations(n) {
            let pred: Vec<f64> = p.iter().map(|&i| i as f64).collect();
            assert!((kendall_tau(&truth, &pred).unwrap().value - tau_oracle(&truth, &pred)).abs() < 1e-12);
            assert!((spearman_rho(&truth, &pred).unwrap().value - rho_oracle(&truth, &pred)).abs() < 1e-12);
            for k in 1..=n {
                assert_eq!(top_k_overlap(&truth, &pred, k).unwrap(), top_oracle(&truth, &pred, k));
            }
        }
    }
}

#[test]
fn two_document_report_is_the_mean() {
    let labels = vec![
        LabelVector { document_id: "a".into(), task: Task::Popularity, values: vec![0.5, 0.3, 0.2] },
        LabelVector { document_id: "b".into(), task: Task::Popularity, values: vec![0.1, 0.6, 0.3] },
    ];
    let scores = vec![
        ScoreVector { document_id: "b".into(), scorer: "x".into(), values: vec![0.9, 0.1, 0.4] },
        ScoreVector { document_id: "a".into(), scorer: "x".into(), values: vec![0.2, 0.3, 0.5] },
    ];
    let r = evaluate_corpus("x", Task::Popularity, &scores, &labels, &[1, 2, 3]).unwrap();
    assert_eq!(r.document_count, 2);
    let a = ndcg(&labels[0].values, &scores[1].values).unwrap().value;
    let b = ndcg(&labels[1].values, &scores[0].values).unwrap().value;
    assert!((r.means.ndcg - (a + b) / 2.0).abs() < 1e-12);
    let m = (mse(&labels[0].values, &scores[1].values).unwrap() + mse(&labels[1].values, &scores[0].values).unwrap()) / 2.0;
    assert!((r.means.mse - m).abs() < 1e-12);
    assert_eq!(r.documents[0].id, "a");
    assert_eq!(r.means.top[2], 100.0);

    let cross = cross_task_eval("x", Task::Popularity, Task::Popularity, &scores, &labels, &[1, 2, 3]).unwrap();
    assert_eq!(cross.documents, r.documents);
    assert_eq!(cross.means, r.means);
    assert_eq!(cross.train_task, Some(Task::Popularity));

    let table = render_table(&[&r, &cross]);
    let header = table.lines().next().unwrap();
    let cols: Vec<&str> = header.split_whitespace().collect();
    assert_eq!(cols, ["Scorer", "Train", "Eval", "Top1", "Top2", "Top3", "MSE", "MAE", "tau", "rho", "nDCG"]);
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn perfect_single_document() {
    let labels = vec![LabelVector { document_id: "a".into(), task: Task::S1, values: vec![0.1, 0.7, 0.2] }];
    let scores = vec![ScoreVector { document_id: "a".into(), scorer: "x".into(), values: vec![0.1, 0.7, 0.2] }];
    let r = evaluate_corpus("x", Task::S1, &scores, &labels, &[1, 2, 3]).unwrap();
    assert_eq!(r.means.top, vec![100.0; 3]);
    assert_eq!((r.means.tau, r.means.rho, r.means.ndcg), (1.0, 1.0, 1.0));
    assert_eq!((r.means.mse, r.means.mae), (0.0, 0.0));
}

#[test]
fn missing_documents_are_listed() {
    let labels = vec![
        LabelVector { document_id: "a".into(), task: Task::S1, values: vec![0.5, 0.5] },
        LabelVector { document_id: "b".into(), task: Task::S1, values: vec![0.5, 0.5] },
    ];
    let scores = vec![ScoreVector { document_id: "a".into(), scorer: "x".into(), values: vec![0.1, 0.2] }];
    let err = evaluate_corpus("x", Task::S1, &scores, &labels, &[1]).unwrap_err();
    assert!(err.to_string().contains('b'), "{err}");
}

fn tied_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec((0u8..4).prop_map(|v| v as f64 / 4.0), n)
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..=8).prop_flat_map(|n| (tied_vec(n), tied_vec(n)))
}

proptest! {
    #[test]
    fn tied_vectors_match_oracles((x, y) in pair()) {
        prop_assert!((kendall_tau(&x, &y).unwrap().value - tau_oracle(&x, &y)).abs() < 1e-12);
        prop_assert!((spearman_rho(&x, &y).unwrap().value - rho_oracle(&x, &y)).abs() < 1e-12);
        for k in 1..=x.len() {
            prop_assert_eq!(top_k_overlap(&x, &y, k).unwrap(), top_oracle(&x, &y, k));
        }
    }

    #[test]
    fn monotone_transforms_preserve_rank_metrics(
        (x, y) in (2usize..=30).prop_flat_map(|n| (
            proptest::collection::vec(0.0..1.0f64, n),
            proptest::collection::vec(-5.0..5.0f64, n),
        ))
    ) {
        let z: Vec<f64> = y.iter().map(|v| 2.0 * v + 1.0).collect();
        prop_assert_eq!(kendall_tau(&x, &y).unwrap(), kendall_tau(&x, &z).unwrap());
        prop_assert_eq!(spearman_rho(&x, &y).unwrap(), spearman_rho(&x, &z).unwrap());
        prop_assert_eq!(ndcg(&x, &y).unwrap(), ndcg(&x, &z).unwrap());
        for k in 1..=x.len() {
            prop_assert_eq!(top_k_overlap(&x, &y, k).unwrap(), top_k_overlap(&x, &z, k).unwrap());
        }
    }

    #[test]
    fn reversal_negates_correlations(
        x in proptest::collection::btree_set(0u32..1000, 2..20),
        y in proptest::collection::btree_set(0u32..1000, 20),
    ) {
        let x: Vec<f64> = x.into_iter().map(|v| v as f64).collect();
        let y: Vec<f64> = y.into_iter().take(x.len()).map(|v| v as f64).rev().collect();
        prop_assume!(y.len() == x.len());
        let r: Vec<f64> = y.iter().map(|v| -v).collect();
        prop_assert_eq!(kendall_tau(&x, &y).unwrap().value, -kendall_tau(&x, &r).unwrap().value);
        prop_assert_eq!(spearman_rho(&x, &y).unwrap().value, -spearman_rho(&x, &r).unwrap().value);
    }

    #[test]
    fn ndcg_bounds_and_error_metrics(
        (x, y) in (1usize..=20).prop_flat_map(|n| (
            proptest::collection::vec(0.0..1.0f64, n),
            proptest::collection::vec(0.0..1.0f64, n),
        ))
    ) {
        let g = ndcg(&x, &y).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&g));
        prop_assert_eq!(ndcg(&x, &x).unwrap().value, 1.0);
        prop_assert!(mse(&x, &y).unwrap() >= 0.0 && mae(&x, &y).unwrap() >= 0.0);
        prop_assert_eq!(mse(&x, &y).unwrap() == 0.0, x == y);
    }
}
