use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_hitpredict");

fn hp(args: &[&str]) -> Output {
    hp_env(args, &[])
}

fn hp_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    // Keep the caller's environment from leaking settings into the tests.
    for (key, _) in std::env::vars() {
        if key.starts_with("HITPREDICT_") {
            cmd.env_remove(key);
        }
    }
    cmd.envs(env.iter().copied());
    cmd.output().expect("spawn hitpredict")
}

fn ok(args: &[&str]) -> String {
    let out = hp(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn corpus(dir: &Path, scenario: &str, songs: usize, seed: u64) {
    ok(&[
        "gen-synthetic",
        "--scenario",
        scenario,
        "--n-songs",
        &songs.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        s(dir),
    ]);
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .records()
        .map(Result::unwrap)
        .collect()
}

/// Ten rows, two features, alternating labels.
fn tiny_dataset(path: &Path, constant: bool) {
    let mut text = String::from("a,b,label,date\n");
    for i in 0..10 {
        let (a, b) = if constant { (1.0, 2.0) } else { (i as f64, (i % 3) as f64) };
        let label = if i % 2 == 0 { "Hit" } else { "NonHit" };
        text.push_str(&format!("{a},{b},{label},2000-01-{:02}\n", i + 1));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn missing_analyses_dir_fails_without_output() {
    let tmp = TempDir::new().unwrap();
    let syn = tmp.path().join("syn");
    corpus(&syn, "separable", 20, 1);
    let out = tmp.path().join("out");
    let res = hp(&[
        "build-dataset",
        "--charts",
        s(&syn.join("charts.csv")),
        "--analyses",
        s(&tmp.path().join("nowhere")),
        "--out",
        s(&out),
    ]);
    assert!(!res.status.success());
    assert!(!String::from_utf8_lossy(&res.stderr).is_empty());
    assert!(!out.exists(), "no output directory on failure");
}

#[test]
fn wider_gap_scheme_keeps_fewer_rows() {
    let tmp = TempDir::new().unwrap();
    let syn = tmp.path().join("syn");
    corpus(&syn, "separable", 120, 2);
    let rows = |scheme: &str| {
        let out = tmp.path().join(scheme);
        ok(&[
            "build-dataset",
            "--charts",
            s(&syn.join("charts.csv")),
            "--analyses",
            s(&syn.join("analyses")),
            "--scheme",
            scheme,
            "--out",
            s(&out),
        ]);
        csv_rows(&out.join("dataset.csv")).len()
    };
    let (d1, d2, d3) = (rows("D1"), rows("D2"), rows("d3"));
    assert!(d2 > d1, "D2 {d2} vs D1 {d1}");
    assert_eq!(d3, 120, "D3 has no gap");
}

#[test]
fn smallest_valid_evaluation() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("tiny.csv");
    tiny_dataset(&data, false);
    let out = tmp.path().join("out");
    ok(&[
        "evaluate",
        "--dataset",
        s(&data),
        "--runs",
        "1",
        "--folds",
        "2",
        "--no-fs",
        "--models",
        "c45,nb,logistic",
        "--out",
        s(&out),
    ]);
    let folds = csv_rows(&out.join("cv_folds.csv"));
    for model in ["c45", "nb", "logistic"] {
        assert_eq!(folds.iter().filter(|r| &r[0] == model).count(), 2, "{model}");
    }
    assert_eq!(csv_rows(&out.join("results.csv")).len(), 3);
}

#[test]
fn constant_features_give_chance_auc() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("flat.csv");
    tiny_dataset(&data, true);
    let out = tmp.path().join("out");
    ok(&[
        "evaluate", "--dataset", s(&data), "--runs", "1", "--folds", "2", "--no-fs", "--out", s(&out),
    ]);
    let rows = csv_rows(&out.join("results.csv"));
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(&r[2], "0.5", "{} AUC", &r[0]);
    }
}

#[test]
fn results_have_one_best_per_column() {
    let tmp = TempDir::new().unwrap();
    let syn = tmp.path().join("syn");
    corpus(&syn, "separable", 80, 3);
    let out = tmp.path().join("out");
    ok(&[
        "evaluate",
        "--charts",
        s(&syn.join("charts.csv")),
        "--analyses",
        s(&syn.join("analyses")),
        "--runs",
        "1",
        "--folds",
        "3",
        "--fs",
        "--no-fs",
        "--out",
        s(&out),
    ]);
    let rows = csv_rows(&out.join("results.csv"));
    assert_eq!(rows.len(), 12);
    for fs in ["fs", "nofs"] {
        for flag_col in [5, 9] {
            let best = rows.iter().filter(|r| &r[1] == fs && &r[flag_col] == "best").count();
            assert!(best >= 1, "{fs} column {flag_col}");
        }
    }
    assert!(out.join("roc/logistic_fs.csv").exists());
    assert!(out.join("confusion/svm-rbf_nofs.csv").exists());
    let text = fs::read_to_string(out.join("results.txt")).unwrap();
    assert!(text.contains("svm-poly"));
}

#[test]
fn train_then_predict() {
    let tmp = TempDir::new().unwrap();
    let syn = tmp.path().join("syn");
    corpus(&syn, "separable", 80, 4);
    let out = tmp.path().join("model");
    ok(&[
        "train",
        "--charts",
        s(&syn.join("charts.csv")),
        "--analyses",
        s(&syn.join("analyses")),
        "--model",
        "logistic",
        "--out",
        s(&out),
    ]);
    let model = out.join("model.json");
    let analysis = syn.join("analyses/song_0000.json");
    let printed = ok(&["predict", "--model", s(&model), "--analysis", s(&analysis)]);
    let line = printed.lines().nth(1).expect("score line");
    let mut parts = line.split('\t');
    let score: f64 = parts.next().unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&score));
    assert!(matches!(parts.next(), Some("Hit" | "NonHit")));

    // A model expecting a feature the analysis cannot provide is rejected.
    let mut json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    json["input_features"][0] = serde_json::Value::String("bogus".into());
    let broken = tmp.path().join("broken.json");
    fs::write(&broken, json.to_string()).unwrap();
    let res = hp(&["predict", "--model", s(&broken), "--analysis", s(&analysis)]);
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("bogus"), "{err}");
    assert!(err.contains("duration"), "{err}");
}

#[test]
fn trend_recovers_planted_slope() {
    let tmp = TempDir::new().unwrap();
    let syn = tmp.path().join("syn");
    corpus(&syn, "trend", 300, 5);
    let out = tmp.path().join("out");
    ok(&[
        "trends",
        "--charts",
        s(&syn.join("charts.csv")),
        "--analyses",
        s(&syn.join("analyses")),
        "--features",
        "loudness,tempo",
        "--out",
        s(&out),
    ]);
    let rows = csv_rows(&out.join("trends.csv"));
    let loud = rows.iter().find(|r| &r[0] == "loudness").unwrap();
    let slope: f64 = loud[1].parse().unwrap();
    assert!((slope - 0.5).abs() < 1e-9, "slope {slope}");
    assert!(out.join("trend_tempo.csv").exists());
}

#[test]
fn trends_reject_unknown_feature() {
    let tmp = TempDir::new().unwrap();
    let syn = tmp.path().join("syn");
    corpus(&syn, "trend", 30, 6);
    let res = hp(&[
        "trends",
        "--charts",
        s(&syn.join("charts.csv")),
        "--analyses",
        s(&syn.join("analyses")),
        "--features",
        "loudness,T13mean",
        "--out",
        s(&tmp.path().join("out")),
    ]);
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("T13mean") && err.contains("T12mean"), "{err}");
}

#[test]
fn out_of_time_half_split() {
    let tmp = TempDir::new().unwrap();
    let syn = tmp.path().join("syn");
    corpus(&syn, "separable", 100, 7);
    let out = tmp.path().join("out");
    ok(&[
        "oot",
        "--charts",
        s(&syn.join("charts.csv")),
        "--analyses",
        s(&syn.join("analyses")),
        "--fraction",
        "0.5",
        "--runs",
        "1",
        "--folds",
        "3",
        "--fs",
        "--models",
        "nb,c45",
        "--out",
        s(&out),
    ]);
    let rows = csv_rows(&out.join("oot.csv"));
    assert_eq!(rows.len(), 2);
    let (train, test): (usize, usize) = (rows[0][6].parse().unwrap(), rows[0][7].parse().unwrap());
    assert!(train.abs_diff(test) <= 1, "{train}/{test}");
    for r in &rows {
        assert!(!r[2].is_empty() && !r[4].is_empty(), "split and CV columns");
    }
}

#[test]
fn config_file_env_and_flags_layer() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("tiny.csv");
    tiny_dataset(&data, false);
    let config = tmp.path().join("hp.toml");
    fs::write(&config, "folds = 5\nruns = 2\nmodels = [\"nb\"]\nfs = \"off\"\n").unwrap();
    let count = |out: &Path| csv_rows(&out.join("cv_folds.csv")).len();
    let base = ["evaluate", "--dataset", s(&data), "--config", s(&config)];

    let out = tmp.path().join("file");
    let mut args = base.to_vec();
    args.extend(["--out", s(&out)]);
    assert!(hp(&args).status.success());
    assert_eq!(count(&out), 10, "file: 2 runs x 5 folds");

    let out = tmp.path().join("env");
    let mut args = base.to_vec();
    args.extend(["--out", s(&out)]);
    assert!(hp_env(&args, &[("HITPREDICT_FOLDS", "2")]).status.success());
    assert_eq!(count(&out), 4, "env beats file");

    let out = tmp.path().join("flag");
    let mut args = base.to_vec();
    args.extend(["--out", s(&out), "--folds", "3"]);
    assert!(hp_env(&args, &[("HITPREDICT_FOLDS", "2")]).status.success());
    assert_eq!(count(&out), 6, "flag beats env");
}

#[test]
fn config_rejects_unknown_keys() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("bad.toml");
    fs::write(&config, "fold = 3\n").unwrap();
    let res = hp(&["build-dataset", "--config", s(&config)]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("fold"));
}

#[test]
fn same_seed_same_bytes() {
    let tmp = TempDir::new().unwrap();
    let run = |name: &str| {
        let syn = tmp.path().join(name);
        corpus(&syn, "noise", 60, 9);
        let out = tmp.path().join(format!("{name}-out"));
        ok(&[
            "evaluate",
            "--charts",
            s(&syn.join("charts.csv")),
            "--analyses",
            s(&syn.join("analyses")),
            "--runs",
            "2",
            "--folds",
            "3",
            "--models",
            "ripper,svm-rbf",
            "--out",
            s(&out),
        ]);
        (
            fs::read(syn.join("charts.csv")).unwrap(),
            fs::read(out.join("results.csv")).unwrap(),
            fs::read(out.join("cv_folds.csv")).unwrap(),
        )
    };
    assert_eq!(run("a"), run("b"));
}
