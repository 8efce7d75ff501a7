//! Command-level behavior: pipeline wiring, determinism of artifacts,
//! config-file defaults, the data-directory environment variable, and
//! exit codes.

use std::path::Path;
use std::process::Command;

fn jobcast() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jobcast"))
}

fn run_ok(args: &[&str]) {
    let code = jobcast_cli::run_from(std::iter::once("jobcast").chain(args.iter().copied()));
    assert_eq!(code, 0, "command failed: {args:?}");
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn full_pipeline_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    run_ok(&[
        "generate", "--out", &p(""), "--n-jobs", "5000", "--seed", "3",
        "--signal-strength", "0.8",
    ]);
    run_ok(&[
        "featurize",
        "--jobs", &p("jobs.jsonl"),
        "--obs", &p("observations.jsonl"),
        "--splits", &p("splits.csv"),
        "--skills", &p("skills.tsv"),
        "--out-features", &p("features.csv"),
        "--out-config", &p("fusion.json"),
        "--joint", "--d-company", "8", "--d-title", "16", "--d-desc", "16",
    ]);
    run_ok(&[
        "train",
        "--features", &p("features.csv"),
        "--splits", &p("splits.csv"),
        "--model", &p("model.json"),
        "--fusion-config", &p("fusion.json"),
        "--hidden", "32,16",
        "--max-epochs", "2",
        "--history", &p("history.csv"),
    ]);
    run_ok(&[
        "predict",
        "--features", &p("features.csv"),
        "--model", &p("model.json"),
        "--out", &p("predictions.csv"),
    ]);
    run_ok(&[
        "evaluate",
        "--pred", &p("predictions.csv"),
        "--jobs", &p("jobs.jsonl"),
        "--obs", &p("observations.jsonl"),
        "--group-by", "day",
        "--out", &p("report.csv"),
    ]);
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report.lines().count() > 1, "report should be non-empty:\n{report}");
    assert!(report.contains("overall"));
    let history = std::fs::read_to_string(dir.path().join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 3); // header + 2 epochs
}

#[test]
fn generate_is_byte_identical_across_reruns() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        run_ok(&[
            "generate", "--out", dir.path().to_str().unwrap(),
            "--n-jobs", "1000", "--seed", "7",
        ]);
    }
    for name in ["jobs.jsonl", "observations.jsonl", "splits.csv", "skills.tsv"] {
        assert_eq!(
            read(&a.path().join(name)),
            read(&b.path().join(name)),
            "{name} differs between reruns"
        );
    }
}

#[test]
fn separate_mode_trains_and_predicts_per_day() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    run_ok(&["generate", "--out", &p(""), "--n-jobs", "900", "--seed", "21"]);
    run_ok(&[
        "featurize",
        "--jobs", &p("jobs.jsonl"), "--obs", &p("observations.jsonl"),
        "--splits", &p("splits.csv"),
        "--out-features", &p("features.csv"), "--out-config", &p("fusion.json"),
        "--d-company", "8", "--d-title", "8", "--d-desc", "8", "--skill-dim", "4",
    ]);
    run_ok(&[
        "train", "--mode", "separate",
        "--features", &p("features.csv"), "--splits", &p("splits.csv"),
        "--model", &p("model.json"), "--hidden", "16", "--max-epochs", "2",
    ]);
    for day in [1, 3, 7, 14, 30] {
        assert!(dir.path().join(format!("model.day{day}.json")).exists());
    }
    run_ok(&[
        "predict",
        "--features", &p("features.csv"),
        "--model", &p("model.day1.json"),
        "--model", &p("model.day3.json"),
        "--model", &p("model.day7.json"),
        "--model", &p("model.day14.json"),
        "--model", &p("model.day30.json"),
        "--out", &p("predictions.csv"),
    ]);
    run_ok(&[
        "evaluate",
        "--pred", &p("predictions.csv"),
        "--jobs", &p("jobs.jsonl"), "--obs", &p("observations.jsonl"),
        "--group-by", "jac", "--out", &p("report.csv"),
    ]);
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report.contains("jac,"));
}

#[test]
fn serialize_writes_per_split_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    run_ok(&["generate", "--out", &p(""), "--n-jobs", "300", "--seed", "2"]);
    run_ok(&[
        "serialize",
        "--jobs", &p("jobs.jsonl"), "--obs", &p("observations.jsonl"),
        "--splits", &p("splits.csv"), "--out-dir", &p(""), "--joint",
    ]);
    let mut total = 0usize;
    for split in ["train", "test", "val"] {
        let text =
            std::fs::read_to_string(dir.path().join(format!("lm_dataset.{split}.jsonl"))).unwrap();
        total += text.lines().count();
    }
    let obs = std::fs::read_to_string(dir.path().join("observations.jsonl")).unwrap();
    assert_eq!(total, obs.lines().count());
}

#[test]
fn forecast_ts_writes_predictions_and_skips() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let horizons: Vec<String> = (1..=14).map(|d| d.to_string()).collect();
    let horizons = format!("{},30", horizons.join(","));
    run_ok(&[
        "generate", "--out", &p(""), "--n-jobs", "400", "--seed", "31",
        "--horizons", &horizons,
    ]);
    run_ok(&[
        "forecast-ts",
        "--jobs", &p("jobs.jsonl"), "--obs", &p("observations.jsonl"),
        "--target-day", "30", "--out", &p("ts.csv"),
        "window-average", "--window", "3",
    ]);
    let preds = std::fs::read_to_string(dir.path().join("ts.csv")).unwrap();
    assert!(preds.lines().count() > 1);
    let skips = std::fs::read_to_string(dir.path().join("ts.skips.csv")).unwrap();
    assert!(skips.starts_with("job_id,reason"));
    assert!(skips.lines().count() > 1, "window model should skip some jobs");
}

#[test]
fn trains_and_predicts_from_imported_embeddings() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    run_ok(&["generate", "--out", &p(""), "--n-jobs", "300", "--seed", "9"]);

    // stand-in for an external encoder: one small vector per (job_id, t)
    let obs_text = std::fs::read_to_string(dir.path().join("observations.jsonl")).unwrap();
    let mut embeddings = String::new();
    for line in obs_text.lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        let job_id = record["job_id"].as_str().unwrap();
        let t = record["t"].as_u64().unwrap();
        let h = job_id.bytes().map(u64::from).sum::<u64>() % 97;
        embeddings.push_str(&format!(
            "{job_id}\t{t}\t{}\t{}\t{}\n",
            t as f64 / 30.0,
            h as f64 / 97.0,
            (h % 7) as f64,
        ));
    }
    std::fs::write(dir.path().join("embeddings.tsv"), embeddings).unwrap();

    run_ok(&[
        "train",
        "--embeddings", &p("embeddings.tsv"),
        "--jobs", &p("jobs.jsonl"), "--obs", &p("observations.jsonl"),
        "--splits", &p("splits.csv"),
        "--model", &p("model.json"), "--hidden", "8", "--max-epochs", "2",
    ]);
    run_ok(&[
        "predict",
        "--embeddings", &p("embeddings.tsv"),
        "--jobs", &p("jobs.jsonl"), "--obs", &p("observations.jsonl"),
        "--model", &p("model.json"), "--out", &p("predictions.csv"),
    ]);
    run_ok(&[
        "evaluate",
        "--pred", &p("predictions.csv"),
        "--jobs", &p("jobs.jsonl"), "--obs", &p("observations.jsonl"),
        "--group-by", "overall", "--out", &p("report.csv"),
    ]);
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report.contains("overall,overall,mae"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("defaults.conf");
    std::fs::write(&config_path, "n-jobs=12\nseed=5\n").unwrap();
    let out = jobcast()
        .args([
            "generate",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("stdout should be one JSON line");
    assert_eq!(summary["jobs"], 12);
    assert_eq!(summary["seed"], 5);

    // explicit flag beats the config file
    let out = jobcast()
        .args([
            "generate",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--n-jobs",
            "15",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["jobs"], 15);
}

#[test]
fn data_dir_env_var_supplies_default_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = jobcast()
        .env("JOBCAST_DATA_DIR", dir.path())
        .args(["generate", "--n-jobs", "10", "--seed", "1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("jobs.jsonl").exists());
    assert!(dir.path().join("observations.jsonl").exists());
}

#[test]
fn exit_codes_match_contract() {
    // usage error: unknown subcommand
    let out = jobcast().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // runtime error: missing input file
    let dir = tempfile::tempdir().unwrap();
    let out = jobcast()
        .args([
            "evaluate",
            "--pred", dir.path().join("nope.csv").to_str().unwrap(),
            "--jobs", dir.path().join("nope.jsonl").to_str().unwrap(),
            "--obs", dir.path().join("nope.jsonl").to_str().unwrap(),
            "--out", dir.path().join("report.csv").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    // success
    let out = jobcast()
        .args([
            "generate",
            "--out", dir.path().to_str().unwrap(),
            "--n-jobs", "5",
            "--seed", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["command"], "generate");
}

#[test]
fn commands_do_not_mutate_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    run_ok(&["generate", "--out", &p(""), "--n-jobs", "200", "--seed", "17"]);
    let before = read(&dir.path().join("jobs.jsonl"));
    run_ok(&[
        "featurize",
        "--jobs", &p("jobs.jsonl"), "--obs", &p("observations.jsonl"),
        "--splits", &p("splits.csv"),
        "--out-features", &p("features.csv"), "--out-config", &p("fusion.json"),
        "--d-company", "4", "--d-title", "4", "--d-desc", "4", "--skill-dim", "4",
    ]);
    assert_eq!(before, read(&dir.path().join("jobs.jsonl")));
}
