use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn popgraph(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_popgraph"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn demo_cohort() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/demo_cohort.csv")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = popgraph(&["generate", "--seed", "7", "--subjects", "50", "--out", name], dir.path());
        assert!(out.status.success(), "{}", text(&out.stderr));
        assert!(text(&out.stdout).contains("seed: 7"));
    }
    let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.schema"), read("b.schema"));
    let other = popgraph(&["generate", "--seed", "8", "--subjects", "50", "--out", "c.csv"], dir.path());
    assert!(other.status.success());
    assert_ne!(read("a.csv"), read("c.csv"));
}

#[test]
fn missing_cohort_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = popgraph(&["build-graph", "--out", "g.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("--cohort"));
}

#[test]
fn unknown_subcommand_and_flag_print_usage() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["frobnicate"][..], &["generate", "--out", "x.csv", "--colour", "red"][..]] {
        let out = popgraph(args, dir.path());
        assert_eq!(out.status.code(), Some(1));
        assert!(text(&out.stderr).contains("Usage"));
    }
    assert_eq!(popgraph(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[model]\nhidden = 0\n").unwrap();
    let out = popgraph(&["--config", "c.toml", "generate", "--out", "x.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("model.hidden"));

    let out = popgraph(&["generate", "--out", "x.csv", "--set", "builder.kk=3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("kk"));
}

#[test]
fn bad_cohort_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = popgraph(&["build-graph", "--cohort", "missing.csv", "--out", "g.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_finite_training_is_a_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = demo_cohort();
    let out = popgraph(
        &[
            "train",
            "--cohort",
            cohort.to_str().unwrap(),
            "--out-dir",
            "run",
            "--set",
            "train.epochs=2",
            "--set",
            "train.label_stats={ mean = 0.0, std = 1e-320 }",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", text(&out.stderr));
}

#[test]
fn pipeline_on_demo_cohort() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = demo_cohort();
    let cohort = cohort.to_str().unwrap();
    let run = |args: &[&str]| {
        let out = popgraph(args, dir.path());
        assert!(out.status.success(), "{args:?}: {}", text(&out.stderr));
        text(&out.stdout)
    };
    let built = run(&["build-graph", "--cohort", cohort, "--method", "knn-all", "--out", "g.csv"]);
    assert!(built.contains("# resolved config") && built.contains("homophily"));
    let trained = run(&[
        "train", "--cohort", cohort, "--graph", "g.csv", "--method", "knn-all", "--model", "sage", "--out-dir", "run",
        "--set", "train.epochs=10",
    ]);
    assert!(trained.contains("sage on knn-all"));
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["history"]["val_mae"].as_array().unwrap().len(), 10);
    assert!(std::fs::read_to_string(dir.path().join("run/checkpoint.txt")).unwrap().starts_with("popgraph-checkpoint 1"));

    run(&["export", "--cohort", cohort, "--graph", "g.csv", "--format", "graphml", "--out", "g.graphml"]);
    assert!(std::fs::read_to_string(dir.path().join("g.graphml")).unwrap().contains("<graphml"));
    run(&["layout", "--cohort", cohort, "--graph", "g.csv", "--out", "xy.csv"]);
    let xy = std::fs::read_to_string(dir.path().join("xy.csv")).unwrap();
    assert_eq!(xy.lines().count(), 201);
}

#[test]
fn benchmark_with_default_config_on_demo_cohort() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = demo_cohort();
    let out = popgraph(&["benchmark", "--cohort", cohort.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("report/report.txt")).unwrap();
    assert_eq!(table.lines().filter(|l| l.ends_with("  ok")).count(), 25);
    assert!(dir.path().join("report/report.json").exists());
}
