//! End-to-end runs of the `humour` binary on the bundled samples.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use humour_styles::core::features::EmbeddingMatrix;
use humour_styles::dataset::read_corpus;
use humour_styles::embeddings::save_embeddings;

fn samples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/samples.jsonl")
}

fn humour(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_humour"))
        .args(args)
        .env_remove("HUMOUR_EMBED_URL")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Label one-hot plus a small id-dependent offset, so stage classifiers can
/// separate every class.
fn label_embeddings(dataset: &Path, model: &str, dest: &Path) {
    let corpus = read_corpus(dataset, None).unwrap();
    let mut m = EmbeddingMatrix::new(model, 6);
    for (k, i) in corpus.instances().iter().enumerate() {
        let mut v = vec![0.0; 6];
        v[i.label.unwrap().index()] = 1.0;
        v[5] = (k * 37 % 11) as f64 / 11.0;
        m.push(i.id.clone(), v).unwrap();
    }
    save_embeddings(&m, dest).unwrap();
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ingest_prints_census() {
    let o = humour(&["ingest", s(&samples())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("| 0 | self-enhancing | 8 |"), "{out}");
    assert!(out.contains("| | total | 30 |"), "{out}");
}

#[test]
fn ingest_failures_exit_2() {
    assert_eq!(code(&humour(&["ingest", "/no/such/file.jsonl"])), 2);
    let o = humour(&["ingest", "--format", "csv", s(&samples())]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("samples.jsonl"));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{\"id\":\"a\",\"text\":\"x\",\"label\":1}\n{\"id\":\"b\",\"text\":\"y\",\"label\":5}\n").unwrap();
    let o = humour(&["ingest", s(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.jsonl:2:"));
}

#[test]
fn annotate_and_terms() {
    let ann = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/annotation_disagreement.jsonl");
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.jsonl");
    let o = humour(&["annotate", s(&ann), "--out", s(&labels)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("items: 10, raters: 7"), "{}", stdout(&o));
    assert_eq!(fs::read_to_string(&labels).unwrap().lines().count(), 10);

    let o = humour(&["terms", s(&samples()), "--label", "aggressive", "--top", "5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 7);
    assert_eq!(code(&humour(&["terms", s(&samples()), "--label", "sarcastic"])), 2);
}

#[test]
fn train_spec_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let data = samples();
    let base = ["train", "--dataset", s(&data), "--out", s(&out)];
    let with = |extra: &[&str]| code(&humour(&[&base[..], extra].concat()));
    assert_eq!(with(&["--spec", "counts:svm"]), 2);
    assert_eq!(with(&["--spec", "counts:rf"]), 2);
    assert_eq!(with(&["--mode", "cascade", "--stage1", "mul:gbt"]), 2);
    assert_eq!(with(&["--mode", "single"]), 2);
    assert_eq!(with(&["--spec", "mul:rf"]), 2, "missing embedding provider");
    assert!(!out.join("model.json").exists());
}

#[test]
fn train_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("four.jsonl");
    let text: String = fs::read_to_string(samples())
        .unwrap()
        .lines()
        .filter(|l| !l.contains("\"label\": 4"))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(&data, text).unwrap();
    let o = humour(&["train", "--dataset", s(&data), "--spec", "nb", "--out", s(&dir.path().join("m"))]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

/// 200 instances, 40 per class, so the 20% test split holds every class.
fn balanced_dataset(dir: &Path) -> PathBuf {
    let path = dir.join("balanced.jsonl");
    let body: String = (0..200)
        .map(|k| format!("{{\"id\":\"b{k}\",\"text\":\"sample number {k}\",\"label\":{}}}\n", k % 5))
        .collect();
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn train_then_test_single_and_cascade() {
    let dir = tempfile::tempdir().unwrap();
    let data = balanced_dataset(dir.path());
    let mul = dir.path().join("mul.embv1");
    let ali = dir.path().join("ali.embv1");
    label_embeddings(&data, "mul", &mul);
    label_embeddings(&data, "ali", &ali);

    let nb_out = dir.path().join("nb");
    let o = humour(&["train", "--mode", "single", "--spec", "nb", "--dataset", s(&samples()), "--out", s(&nb_out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(nb_out.join("model.json").is_file() && nb_out.join("run.json").is_file());

    let cascade = dir.path().join("cascade");
    let o = humour(&[
        "train",
        "--mode",
        "cascade",
        "--stage1",
        "mul:gbt",
        "--stage2",
        "ali:rf",
        "--embeddings",
        &format!("mul={}", s(&mul)),
        "--embeddings",
        &format!("ali={}", s(&ali)),
        "--dataset",
        s(&data),
        "--out",
        s(&cascade),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let bundle: serde_json::Value = serde_json::from_str(&fs::read_to_string(cascade.join("model.json")).unwrap()).unwrap();
    assert_eq!(bundle["mode"], "cascade");
    assert_eq!(bundle["name"], "ALI+RF");
    assert_eq!(bundle["stage1"]["kind"], "gradient_boosting");

    let run = cascade.join("run.json");
    let o = humour(&["eval", "test", "--config", s(&run)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(cascade.join("reports/ali-rf.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..4], ["ALI+RF", "test", "test", "1"]);
    assert!(stdout(&o).contains("| test | 100.0 | 100.0 | 100.0 | 100.0 |"), "{}", stdout(&o));
}

#[test]
fn eval_test_without_bundle_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        format!(
            "{{\"dataset\":{:?},\"pipeline\":{{\"mode\":\"single\",\"spec\":\"nb\"}},\"output_dir\":\"out\"}}",
            s(&samples())
        ),
    )
    .unwrap();
    let o = humour(&["eval", "test", "--config", s(&config)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("model bundle"));
}

fn cv_config(dir: &Path, spec: &str) -> PathBuf {
    let mul = dir.join("mul.embv1");
    label_embeddings(&samples(), "mul", &mul);
    let config = dir.join(format!("{}.json", spec.replace(':', "_")));
    let body = serde_json::json!({
        "dataset": samples(),
        "pipeline": {"mode": "single", "spec": spec},
        "embeddings": {"mul": {"kind": "file", "path": "mul.embv1"}},
        "output_dir": "out",
    });
    fs::write(&config, body.to_string()).unwrap();
    config
}

#[test]
fn eval_cv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = cv_config(dir.path(), "mul:rf");
    let read = || {
        let o = humour(&["eval", "cv", "--config", s(&config)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(dir.path().join("out/reports/mul-rf.csv")).unwrap()
    };
    let first = read();
    let second = read();
    assert_eq!(first, second);
    let text = String::from_utf8(first).unwrap();
    let folds: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(folds, ["1", "2", "3", "4", "5", "mean"]);
}

#[test]
fn compare_report_directories() {
    let dir = tempfile::tempdir().unwrap();
    let config = cv_config(dir.path(), "nb");
    let (single, two) = (dir.path().join("single"), dir.path().join("two"));
    for k in 0..5 {
        let name = format!("model{k}");
        for target in [&single, &two] {
            let o = humour(&["eval", "cv", "--config", s(&config), "--name", &name, "--out", s(target)]);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        }
    }
    let cmp = dir.path().join("cmp");
    let o = humour(&["compare", "--single", s(&single), "--two", s(&two), "--out", s(&cmp)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    for metric in ["precision", "recall", "f1", "accuracy", "self-enhancing", "self-deprecating", "affiliative", "aggressive", "neutral"] {
        assert!(table.contains(&format!("| {metric} |")), "{metric}: {table}");
    }
    assert!(table.contains("not applicable"));
    assert!(cmp.join("comparison.csv").is_file());

    let lonely = dir.path().join("lonely");
    humour(&["eval", "cv", "--config", s(&config), "--name", "model0", "--out", s(&lonely)]);
    let lonely_two = dir.path().join("lonely_two");
    humour(&["eval", "cv", "--config", s(&config), "--name", "model0", "--out", s(&lonely_two)]);
    assert_eq!(code(&humour(&["compare", "--single", s(&lonely), "--two", s(&lonely_two)])), 2);

    let other = dir.path().join("other");
    for k in 0..5 {
        humour(&["eval", "cv", "--config", s(&config), "--name", &format!("other{k}"), "--out", s(&other)]);
    }
    assert_eq!(code(&humour(&["compare", "--single", s(&single), "--two", s(&other)])), 2);
}
