use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use popcast::corpus::{load_corpus, read_corpus, write_corpus};
use popcast::rankers::ScoreVector;
use popcast::regressor::generate_synthetic_corpus;
use serde_json::{json, Value};

fn popcast(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_popcast"))
        .args(args)
        .current_dir(dir)
        .env_remove("POPCAST_SEED")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = popcast(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_lines(path: &Path, lines: &[Value]) {
    let text: String = lines.iter().map(|l| format!("{l}\n")).collect();
    fs::write(path, text).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn three(id: &str) -> Value {
    json!({"id": id, "source": "wire", "sentences": [
        "Rates rose sharply today.", "Markets fell across Asia.", "Analysts expect more volatility."
    ]})
}

#[test]
fn ingest_reports_a_too_short_document() {
    let dir = tempfile::tempdir().unwrap();
    write_lines(
        &dir.path().join("raw.jsonl"),
        &[three("a"), json!({"id": "b", "source": "wire", "text": "Only one sentence. And a second one."}), three("c")],
    );
    ok(dir.path(), &["ingest", "--docs", "raw.jsonl", "-o", "corpus.jsonl"]);
    let report = read_json(&dir.path().join("corpus.jsonl.ingest.json"));
    assert_eq!(report["rejected"]["too_short"], 1);
    assert_eq!(report["rejected"]["too_long"], 0);
    assert_eq!(report["rejected_ids"][0]["id"], "b");
    assert_eq!(report["rejected_ids"][0]["reason"], "too_short");
    assert_eq!(report["accepted"], 2);
    assert_eq!(load_corpus(dir.path().join("corpus.jsonl")).unwrap().len(), 2);
    let manifest = read_json(&dir.path().join("corpus.jsonl.manifest.json"));
    assert_eq!(manifest["schema_version"], "popcast.manifest.v1");
    assert_eq!(manifest["command"], "ingest");
    assert!(manifest["fingerprint"].as_str().unwrap().len() == 64);
}

#[test]
fn ingest_of_empty_input_warns() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("raw.jsonl"), "").unwrap();
    let out = ok(dir.path(), &["ingest", "--docs", "raw.jsonl", "-o", "corpus.jsonl"]);
    assert!(stderr(&out).contains("warning"), "{}", stderr(&out));
    assert_eq!(fs::read(dir.path().join("corpus.jsonl")).unwrap(), b"");
}

#[test]
fn ingest_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("raw.jsonl"), format!("{}\n{{not json\n", three("a"))).unwrap();
    let out = popcast(dir.path(), &["ingest", "--docs", "raw.jsonl", "-o", "corpus.jsonl"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    let out = popcast(dir.path(), &["ingest", "--docs", "missing.jsonl", "-o", "corpus.jsonl"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn ingested_synthetic_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = generate_synthetic_corpus(5, 100, 0.7).unwrap();
    let raw: Vec<Value> = corpus
        .records()
        .iter()
        .map(|r| json!({"id": r.id, "source": r.source, "sentences": r.sentences}))
        .collect();
    write_lines(&dir.path().join("raw.jsonl"), &raw);
    ok(dir.path(), &["ingest", "--docs", "raw.jsonl", "-o", "corpus.jsonl"]);
    let bytes = fs::read(dir.path().join("corpus.jsonl")).unwrap();
    let records = read_corpus(bytes.as_slice()).unwrap();
    assert_eq!(records.len(), 100);
    let mut again = Vec::new();
    write_corpus(&mut again, &records).unwrap();
    assert_eq!(again, bytes);
}

#[test]
fn prune_drops_short_sentences_before_filtering() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json!({"id": "a", "source": "s", "sentences": [
        "Rates rose sharply today.", "Yes.", "Markets fell across Asia.", "Analysts expect more volatility."
    ]});
    write_lines(&dir.path().join("raw.jsonl"), &[doc]);
    ok(dir.path(), &["ingest", "--docs", "raw.jsonl", "-o", "strict.jsonl"]);
    let report = read_json(&dir.path().join("strict.jsonl.ingest.json"));
    assert_eq!(report["rejected"]["no_grammatical_sentences"], 1);
    ok(dir.path(), &["ingest", "--docs", "raw.jsonl", "--prune-ungrammatical", "-o", "pruned.jsonl"]);
    let records = load_corpus(dir.path().join("pruned.jsonl")).unwrap();
    assert_eq!(records[0].sentences.len(), 3);
}

#[test]
fn label_writes_popularity_and_lists_unlabelable_documents() {
    let dir = tempfile::tempdir().unwrap();
    write_lines(&dir.path().join("raw.jsonl"), &[three("a"), three("b")]);
    ok(dir.path(), &["ingest", "--docs", "raw.jsonl", "-o", "corpus.jsonl"]);
    write_lines(&dir.path().join("queries.jsonl"), &[json!({"id": "a", "queries": ["markets asia"]})]);
    write_lines(
        &dir.path().join("summaries.jsonl"),
        &[json!({"id": "a", "summary": ["Rates rose sharply today."]}), json!({"id": "b", "summary": ["zzz"]})],
    );
    ok(
        dir.path(),
        &[
            "label", "--corpus", "corpus.jsonl", "--task", "popularity,s1", "--queries", "queries.jsonl",
            "--summaries", "summaries.jsonl", "-o", "labeled.jsonl",
        ],
    );
    let records = load_corpus(dir.path().join("labeled.jsonl")).unwrap();
    assert_eq!(records[0].popularity, Some(vec![0.0, 1.0, 0.0]));
    assert_eq!(records[1].popularity, None);
    assert_eq!(records[0].salience_1, Some(vec![1.0, 0.0, 0.0]));
    assert_eq!(records[1].salience_1, Some(vec![1.0 / 3.0; 3]));
    let sidecar = read_json(&dir.path().join("labeled.jsonl.unlabelable.json"));
    assert_eq!(sidecar["unlabelable"], json!([{"id": "b", "task": "popularity", "reason": "no_queries"}]));
    assert_eq!(sidecar["uniform_fallback"], json!([{"id": "b", "task": "s1"}]));
}

#[test]
fn label_input_problems() {
    let dir = tempfile::tempdir().unwrap();
    write_lines(&dir.path().join("raw.jsonl"), &[three("a")]);
    ok(dir.path(), &["ingest", "--docs", "raw.jsonl", "-o", "corpus.jsonl"]);
    let out = popcast(dir.path(), &["label", "--corpus", "corpus.jsonl", "--task", "popularity", "-o", "l.jsonl"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--queries"), "{}", stderr(&out));
    let out = popcast(
        dir.path(),
        &["label", "--corpus", "corpus.jsonl", "--task", "sl", "--summaries", "nope.jsonl", "-o", "l.jsonl"],
    );
    assert_eq!(code(&out), 1);
    let out = popcast(dir.path(), &["label", "--corpus", "corpus.jsonl", "--task", "rouge9", "-o", "l.jsonl"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn position_ranks_the_first_sentence_first() {
    let dir = tempfile::tempdir().unwrap();
    write_lines(&dir.path().join("raw.jsonl"), &[three("a")]);
    ok(dir.path(), &["ingest", "--docs", "raw.jsonl", "-o", "corpus.jsonl"]);
    ok(dir.path(), &["rank", "--corpus", "corpus.jsonl", "--scorer", "position", "-o", "scores.jsonl"]);
    let line = fs::read_to_string(dir.path().join("scores.jsonl")).unwrap();
    let sv: ScoreVector = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(sv.scorer, "position");
    let best = (0..sv.values.len()).fold(0, |b, i| if sv.values[i] > sv.values[b] { i } else { b });
    assert_eq!(best, 0);
    assert_eq!(sv.values, vec![1.0 - 1.0 / 3.0, 1.0 - 2.0 / 3.0, 0.0]);
}

#[test]
fn config_conflicts_exit_two_naming_flags() {
    let dir = tempfile::tempdir().unwrap();
    write_lines(&dir.path().join("raw.jsonl"), &[three("a")]);
    ok(dir.path(), &["ingest", "--docs", "raw.jsonl", "-o", "corpus.jsonl"]);
    let cases: [(&[&str], &str); 6] = [
        (&["rank", "--corpus", "corpus.jsonl", "--scorer", "model", "-o", "s.jsonl"], "--model"),
        (&["rank", "--corpus", "corpus.jsonl", "--scorer", "textrank", "--lexrank-threshold", "0.2", "-o", "s.jsonl"], "--lexrank-threshold"),
        (&["rank", "--corpus", "corpus.jsonl", "--scorer", "lexrank", "--window", "5", "--stride", "6", "-o", "s.jsonl"], "--stride"),
        (&["train", "--corpus", "corpus.jsonl", "--tl", "none", "--pretrain-epochs", "3", "-o", "m.json"], "--pretrain-epochs"),
        (&["eval", "--scores", "s.jsonl", "--corpus", "corpus.jsonl", "--task", "popularity", "--k", "0", "-o", "r.json"], "--k"),
        (&["rank", "--corpus", "corpus.jsonl", "-o", "s.jsonl"], "--scorer"),
    ];
    for (args, flag) in cases {
        let out = popcast(dir.path(), args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(stderr(&out).contains(flag), "{args:?}: {}", stderr(&out));
    }
    let out = popcast(dir.path(), &["rank", "--bogus"]);
    assert_eq!(code(&out), 2);
    let out = popcast(dir.path(), &["--jobs", "0", "rank"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn config_file_layering() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--seed", "2", "--docs", "40", "-o", "c.jsonl"]);
    fs::write(dir.path().join("bad.toml"), "[train]\nepochs = 2\nwarp = 9\n").unwrap();
    let out = popcast(dir.path(), &["--config", "bad.toml", "train", "--corpus", "c.jsonl", "-o", "m.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("warp"), "{}", stderr(&out));
    fs::write(dir.path().join("top.toml"), "[tarin]\nepochs = 2\n").unwrap();
    let out = popcast(dir.path(), &["--config", "top.toml", "train", "--corpus", "c.jsonl", "-o", "m.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("tarin"), "{}", stderr(&out));

    fs::write(dir.path().join("run.toml"), "seed = 4\n[train]\nepochs = 2\nbatch-size = 8\n").unwrap();
    ok(dir.path(), &["--config", "run.toml", "train", "--corpus", "c.jsonl", "--epochs", "3", "-o", "m.json"]);
    let manifest = read_json(&dir.path().join("m.json.manifest.json"));
    assert_eq!(manifest["config"]["epochs"], 3);
    assert_eq!(manifest["config"]["batch-size"], 8);
    assert_eq!(manifest["config"]["seed"], 4);

    let with_env = Command::new(env!("CARGO_BIN_EXE_popcast"))
        .args(["train", "--corpus", "c.jsonl", "--epochs", "3", "--batch-size", "8", "-o", "env.json"])
        .current_dir(dir.path())
        .env("POPCAST_SEED", "4")
        .output()
        .unwrap();
    assert!(with_env.status.success());
    assert_eq!(fs::read(dir.path().join("m.json")).unwrap(), fs::read(dir.path().join("env.json")).unwrap());

    let out = popcast(dir.path(), &["--config", "m.json.manifest.json", "rank"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn training_twice_with_the_same_seed_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--seed", "1", "--docs", "60", "-o", "c.jsonl"]);
    for name in ["a.json", "b.json"] {
        ok(dir.path(), &["train", "--corpus", "c.jsonl", "--tl", "none", "--seed", "7", "--epochs", "3", "-o", name]);
    }
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    let model = read_json(&dir.path().join("a.json"));
    assert_eq!(model["provenance"]["init_seed"], 7);
    ok(dir.path(), &["train", "--corpus", "c.jsonl", "--tl", "none", "--seed", "8", "--epochs", "3", "-o", "c.json"]);
    assert_ne!(a, fs::read(dir.path().join("c.json")).unwrap());
}

#[test]
fn eval_and_cross_eval_reports() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--seed", "9", "--docs", "40", "-o", "c.jsonl"]);
    ok(dir.path(), &["rank", "--corpus", "c.jsonl", "--scorer", "textrank", "-o", "s.jsonl"]);
    let out = ok(dir.path(), &["eval", "--scores", "s.jsonl", "--corpus", "c.jsonl", "--task", "sl", "--k", "1,3", "-o", "r.json"]);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.starts_with("Scorer"), "{table}");
    assert_eq!(table, fs::read_to_string(dir.path().join("r.json.txt")).unwrap());
    let report = read_json(&dir.path().join("r.json"));
    assert_eq!(report["schema_version"], "popcast.eval.v1");
    assert_eq!(report["document_count"], 40);
    assert_eq!(report["k"], json!([1, 3]));

    ok(dir.path(), &["train", "--corpus", "c.jsonl", "--tl", "s1", "--epochs", "2", "--pretrain-epochs", "2", "-o", "m.json"]);
    let out = ok(dir.path(), &["cross-eval", "--model", "m.json", "--corpus", "c.jsonl", "--target-task", "s2", "-o", "x.json"]);
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().count(), 3, "{table}");
    let x = read_json(&dir.path().join("x.json"));
    assert_eq!(x["cross_task"]["train_task"], "popularity");
    assert_eq!(x["cross_task"]["task"], "s2");
    assert_eq!(x["same_task"]["task"], "popularity");
    let out = popcast(
        dir.path(),
        &["cross-eval", "--scores", "s.jsonl", "--corpus", "c.jsonl", "--target-task", "s2", "-o", "y.json"],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--source-task"));
}
