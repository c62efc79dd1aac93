use popcast::corpus::Document;
use popcast::labeling::Task;
use popcast::regressor::{
    batch_loss, corpus_examples, extract_features, generate_synthetic_corpus, gradient, stilts_train, train,
    train_from_scratch, Example, FeatureMatrix, ModelScorer, Params, RegressorModel, Standardizer, TaskData,
    TrainConfig, WindowConfig, FEATURE_DIM,
};
use popcast::rankers::SentenceScorer;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_batch(rng: &mut ChaCha8Rng, inputs: usize) -> Vec<Example> {
    (0..rng.random_range(1..=4))
        .map(|_| {
            let rows = rng.random_range(1..=8);
            Example {
                features: FeatureMatrix::from_rows(
                    (0..rows).map(|_| (0..inputs).map(|_| rng.random_range(-2.0..2.0)).collect()).collect(),
                ),
                labels: (0..rows).map(|_| rng.random_range(0.0..1.0)).collect(),
            }
        })
        .collect()
}

fn random_params(rng: &mut ChaCha8Rng, inputs: usize, hidden: usize) -> Params {
    let mut p = Params::init(inputs, hidden, rng.random());
    p.b1.iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
    p.b2 = rng.random_range(-0.5..0.5);
    p
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest relative error between the analytic gradient and central differences.
fn gradient_error(p: &Params, batch: &[Example]) -> f64 {
    let refs: Vec<&Example> = batch.iter().collect();
    let (_, g) = gradient(p, &refs).unwrap();
    let analytic = g.to_vec();
    let base = p.to_vec();
    let h = 1e-5;
    let numeric: Vec<f64> = (0..base.len())
        .map(|k| {
            let mut plus = base.clone();
            plus[k] += h;
            let mut minus = base.clone();
            minus[k] -= h;
            let lp = batch_loss(&Params::from_slice(p.inputs, p.hidden, &plus), &refs).unwrap();
            let lm = batch_loss(&Params::from_slice(p.inputs, p.hidden, &minus), &refs).unwrap();
            (lp - lm) / (2.0 * h)
        })
        .collect();
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(&analytic).max(norm(&numeric)).max(1e-12)
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let p = random_params(&mut rng, FEATURE_DIM, 16);
        let batch = random_batch(&mut rng, FEATURE_DIM);
        let err = gradient_error(&p, &batch);
        assert!(err < 1e-4, "relative error {err}");
    }
}

#[test]
fn scaling_residuals_scales_gradients() {
    // With a zero hidden layer the output is sigmoid(b2) = 0.5 for every row,
    // so label 0.5 - 2r doubles the residual of label 0.5 - r.
    let mut p = Params::zeros(3, 2);
    p.w2 = vec![0.3, -0.1];
    let rows = vec![vec![1.0, 0.0, -1.0], vec![0.5, 0.5, 0.5]];
    let make = |r: f64| Example {
        features: FeatureMatrix::from_rows(rows.clone()),
        labels: vec![0.5 - r, 0.5 + r],
    };
    let (_, g1) = gradient(&p, &[&make(0.1)]).unwrap();
    let (_, g2) = gradient(&p, &[&make(0.2)]).unwrap();
    for (a, b) in g1.to_vec().iter().zip(g2.to_vec()) {
        assert!((2.0 * a - b).abs() < 1e-15);
    }
}

fn small_corpus(seed: u64, n: usize) -> Vec<Example> {
    let corpus = generate_synthetic_corpus(seed, n, 0.7).unwrap();
    corpus_examples(&corpus.records(), Task::Popularity, &WindowConfig::default()).unwrap()
}

#[test]
fn zero_learning_rate_leaves_parameters_unchanged() {
    let data = small_corpus(1, 20);
    let model = RegressorModel::new(Standardizer::fit(data.iter().map(|e| &e.features)), 4);
    let cfg = TrainConfig { learning_rate: 0.0, epochs: 3, ..TrainConfig::default() };
    let out = train(model.clone(), &data, &[], &cfg).unwrap();
    assert_eq!(out.model.params, model.params);
}

#[test]
fn constant_targets_are_learned() {
    let doc = Document::from_sentences("d", "s", &["One two three.", "Four five.", "Six seven eight nine."]);
    let ex = Example { features: extract_features(&doc.sentences), labels: vec![0.5; 3] };
    let model = RegressorModel::new(Standardizer::fit([&ex.features]), 2);
    let cfg = TrainConfig { epochs: 300, ..TrainConfig::default() };
    let out = train(model, std::slice::from_ref(&ex), &[], &cfg).unwrap();
    assert!(out.curve.last().unwrap().train < 1e-4, "{:?}", out.curve.last());
}

#[test]
fn synthetic_validation_loss_improves() {
    let train_set = small_corpus(2, 200);
    let val = small_corpus(3, 50);
    let cfg = TrainConfig { epochs: 50, seed: 5, ..TrainConfig::default() };
    let out = train_from_scratch(TaskData::new(&train_set, &val), &cfg).unwrap();
    let first = out.curve[0];
    let last = out.curve.last().unwrap();
    assert_eq!(out.curve.len(), 51);
    assert!(last.validation.unwrap() < first.validation.unwrap());
    assert!(last.train < first.train);
}

#[test]
fn training_is_bitwise_deterministic() {
    let data = small_corpus(4, 60);
    let cfg = TrainConfig { epochs: 5, seed: 7, ..TrainConfig::default() };
    let a = train_from_scratch(TaskData::new(&data, &[]), &cfg).unwrap();
    let b = train_from_scratch(TaskData::new(&data, &[]), &cfg).unwrap();
    assert_eq!(a.model.to_json().unwrap(), b.model.to_json().unwrap());
}

#[test]
fn early_stopping_restores_best_parameters() {
    let data = small_corpus(5, 40);
    let val = small_corpus(6, 10);
    let cfg = TrainConfig { epochs: 40, patience: Some(2), learning_rate: 0.5, seed: 1, ..TrainConfig::default() };
    let out = train_from_scratch(TaskData::new(&data, &val), &cfg).unwrap();
    assert!(out.model.params.is_finite());
    assert!(out.curve.len() >= 2);
}

#[test]
fn stilts_without_pretraining_equals_plain_training() {
    let pop = small_corpus(8, 40);
    let corpus = generate_synthetic_corpus(9, 40, 0.7).unwrap();
    let sal = corpus_examples(&corpus.records(), Task::SL, &WindowConfig::default()).unwrap();
    let cfg = TrainConfig { epochs: 4, seed: 3, ..TrainConfig::default() };
    let plain = train_from_scratch(TaskData::new(&pop, &[]), &cfg).unwrap();
    let none = stilts_train(TaskData::new(&sal, &[]), TaskData::new(&pop, &[]), None, &cfg).unwrap();
    assert_eq!(none.model, plain.model);
    let zero_cfg = TrainConfig { pretrain_epochs: Some(0), ..cfg.clone() };
    let zero = stilts_train(TaskData::new(&sal, &[]), TaskData::new(&pop, &[]), Some(Task::SL), &zero_cfg).unwrap();
    assert_eq!(zero.model.params, plain.model.params);
    let tl = stilts_train(TaskData::new(&sal, &[]), TaskData::new(&pop, &[]), Some(Task::SL), &cfg).unwrap();
    assert_eq!(tl.model.provenance.transfer, Some(Task::SL));
    assert_eq!(tl.model.provenance.stages.len(), 2);
    assert_eq!(tl.model.provenance.stages[1].learning_rate, cfg.finetune_learning_rate);
    assert_ne!(tl.model.params, plain.model.params);
}

#[test]
fn model_file_round_trip_scores_identically() {
    let data = small_corpus(10, 20);
    let cfg = TrainConfig { epochs: 2, ..TrainConfig::default() };
    let model = train_from_scratch(TaskData::new(&data, &[]), &cfg).unwrap().model;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    let loaded = RegressorModel::load(&path).unwrap();
    assert_eq!(loaded, model);
    let doc = Document::from_sentences("d", "s", &["The Fed met.", "Rates rose 2%.", "\"Fine,\" he said."]);
    let a = ModelScorer { model }.score(&doc.sentences).unwrap();
    let b = ModelScorer { model: loaded }.score(&doc.sentences).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|s| *s > 0.0 && *s < 1.0));
}

#[test]
fn duplicate_sentences_score_identically() {
    let corpus = generate_synthetic_corpus(11, 30, 0.5).unwrap();
    let data = corpus_examples(&corpus.records(), Task::Popularity, &WindowConfig::default()).unwrap();
    let cfg = TrainConfig { epochs: 2, ..TrainConfig::default() };
    let model = train_from_scratch(TaskData::new(&data, &[]), &cfg).unwrap().model;
    let scorer = ModelScorer { model };
    let doc = Document::from_sentences("d", "s", &["A b c d.", "E f g.", "A b c d.", "H i j k l."]);
    let s = scorer.score(&doc.sentences).unwrap();
    // Content features coincide; positional features still separate duplicates.
    let f = extract_features(&doc.sentences);
    for k in 2..FEATURE_DIM {
        assert_eq!(f.row(0)[k].to_bits(), f.row(2)[k].to_bits());
    }
    assert!(s.iter().all(|v| v.is_finite()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_check_small_models(seed in any::<u64>(), inputs in 1usize..6, hidden in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_params(&mut rng, inputs, hidden);
        let batch = random_batch(&mut rng, inputs);
        prop_assert!(gradient_error(&p, &batch) < 1e-4);
    }

    #[test]
    fn forward_stays_in_unit_interval(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = random_params(&mut rng, 4, 3);
        p.w2.iter_mut().for_each(|w| *w *= 5.0);
        let batch = random_batch(&mut rng, 4);
        for ex in &batch {
            for s in p.forward(&ex.features).unwrap() {
                prop_assert!(s > 0.0 && s < 1.0);
            }
        }
    }
}
