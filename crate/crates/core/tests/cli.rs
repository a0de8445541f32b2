use std::process::{Command, Output};

use serde_json::Value;

fn lonely(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lonely")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn ml_reports_value_and_class() {
    let out = lonely(&["ml", "8", "3", "11", "19"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["speeds"], serde_json::json!([3, 8, 11, 19]));
    assert_eq!(v["ml"], "7/30");
    assert_eq!(v["class"]["s"], 7);
    assert_eq!(v["class"]["k_min"], 2);
}

#[test]
fn ml_normalizes_common_factor() {
    let v = json(&lonely(&["ml", "10", "40"]));
    assert_eq!(v["speeds"], serde_json::json!([1, 4]));
    assert_eq!(v["scale"], 10);
    assert_eq!(v["ml"], "2/5");
}

#[test]
fn ml_rejects_bad_speeds() {
    assert_eq!(lonely(&["ml", "0", "3"]).status.code(), Some(2));
    assert_eq!(lonely(&["ml", "-4", "3"]).status.code(), Some(2));
    assert_eq!(lonely(&["ml", "x"]).status.code(), Some(2));
    assert_eq!(lonely(&["ml", "1", "2000000000"]).status.code(), Some(3));
}

#[test]
fn ml_drops_duplicates_with_warning() {
    let out = lonely(&["ml", "3", "3", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate"));
    assert_eq!(json(&out)["speeds"], serde_json::json!([3, 5]));
}

#[test]
fn classify_command() {
    let out = lonely(&["classify", "-n", "4", "7/30"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["all_k"], serde_json::json!([2, 4]));
    let v = json(&lonely(&["classify", "--n", "4", "1/6"]));
    assert_eq!(v["kind"], "amended-violation");
    assert_eq!(v["lrc_violation"], true);
}

#[test]
fn lemma_commands() {
    assert_eq!(json(&lonely(&["lemma3", "--l", "1/3", "--eps", "1/12", "--v-prev", "5"]))["min_speed"], 15);
    let args = ["lemma4", "--l", "2/5", "--n", "4", "--v-nm2", "20", "--v-nm1"];
    assert_eq!(json(&lonely(&[&args[..], &["100"]].concat()))["holds"], true);
    assert_eq!(json(&lonely(&[&args[..], &["99"]].concat()))["holds"], false);
}

#[test]
fn theorem_and_family_commands() {
    let out = lonely(&["verify-theorem", "4", "--v-max", "24"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["exceptions_found"].as_array().unwrap().len(), 2);
    assert_eq!(lonely(&["verify-theorem", "9"]).status.code(), Some(2));
    assert_eq!(json(&lonely(&["verify-family", "--s-hi", "20"]))["all_pass"], true);
}

#[test]
fn shifted_and_oracle_commands() {
    let v = json(&lonely(&["shifted-ml", "--speeds", "1", "2", "3", "--offsets", "1/2", "0", "1/2"]));
    assert_eq!(v["ml"], "1/4");
    let out = lonely(&["oracle-check", "-n", "3", "--v-max", "12"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["mismatches"], serde_json::json!([]));
}

#[test]
fn scan_and_merge_commands() {
    let dir = tempfile::TempDir::new().unwrap();
    let mut summaries = Vec::new();
    for i in 0..2 {
        let out_path = dir.path().join(format!("s{i}.jsonl"));
        let shard = format!("{i}/2");
        let out = lonely(&[
            "scan", "-n", "4", "--v-max", "12", "--shard", &shard, "--out", out_path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        summaries.push(out_path.with_extension("summary.json"));
    }
    let merged = json(&lonely(&[
        "merge-census",
        summaries[0].to_str().unwrap(),
        summaries[1].to_str().unwrap(),
    ]));
    let whole_path = dir.path().join("whole.jsonl");
    let whole = json(&lonely(&["scan", "-n", "4", "--v-max", "12", "--out", whole_path.to_str().unwrap()]));
    assert_eq!(merged, whole);
}

#[test]
fn scan_resume_with_changed_config_fails() {
    let dir = tempfile::TempDir::new().unwrap();
    let out_path = dir.path().join("s.jsonl");
    let p = out_path.to_str().unwrap();
    assert_eq!(lonely(&["scan", "-n", "3", "--v-max", "10", "--out", p]).status.code(), Some(0));
    let out = lonely(&["scan", "-n", "3", "--v-max", "11", "--out", p, "--resume"]);
    assert_eq!(out.status.code(), Some(2));
}
