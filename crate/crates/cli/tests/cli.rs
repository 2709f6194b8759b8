use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const UNIFORM: &str = r#"{"model":{"family":"uniform01","G":{"form":"identity"}},"schedule":{"rule":"fixed_fraction","alpha":0.5},"n_grid":[1024,4096],"replications":50,"seed":7}"#;

fn bkquant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bkquant")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn help_exits_zero_and_lists_flags() {
    let out = bkquant(&["--help"]);
    assert_eq!(code(&out), 0);
    let sim = bkquant(&["simulate", "--help"]);
    assert_eq!(code(&sim), 0);
    let text = String::from_utf8_lossy(&sim.stdout);
    for flag in ["--config", "--out", "--seed", "--threads", "--log-mode"] {
        assert!(text.contains(flag), "missing {flag}");
    }
}

#[test]
fn simulate_writes_report_and_samples() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "u.json", UNIFORM);
    let out_dir = dir.path().join("out");
    let out = bkquant(&["simulate", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["records"].as_array().unwrap().len(), 2);
    let csv = fs::read_to_string(out_dir.join("samples.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,k_n,p_n,r_n,xi,xi_hat,R1,R2,lhs2,delta1,delta1_hat,delta2,delta2_hat,psi_value,seed_path"
    );
    assert_eq!(lines.count(), 100);
}

#[test]
fn malformed_json_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.json", "{not json");
    let out = bkquant(&["simulate", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn rank_at_or_beyond_n_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"model":{"family":"uniform01","G":{"form":"identity"}},"schedule":{"rule":"explicit","table":[[100,100]]},"n_grid":[100],"replications":10,"seed":1}"#;
    let config = write_config(dir.path(), "k.json", text);
    let out = bkquant(&["simulate", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("schedule"));
}

#[test]
fn overflowing_sample_exits_three_naming_the_replication() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"model":{"family":"super_heavy_log","c":1.0,"G":{"form":"identity"}},"schedule":{"rule":"explicit","table":[[200000,199710]]},"n_grid":[200000],"replications":5,"seed":1}"#;
    let config = write_config(dir.path(), "e.json", text);
    let out = bkquant(&["simulate", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("n = 200000") && stderr.contains("replication = "), "{stderr}");
}

#[test]
fn examples_json_carries_limits_and_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = bkquant(&["examples", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("examples.json")).unwrap()).unwrap();
    let examples = report["examples"].as_array().unwrap();
    let entry = |id: &str| examples.iter().find(|e| e["id"] == id).unwrap();

    let ex3 = entry("example_3");
    let case = ex3["cases"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["params"]["rho"] == 1.0 && c["params"]["gamma"] == 1.0)
        .unwrap();
    let limit = case["limits"].as_array().unwrap().iter().find(|l| l["label"] == "total").unwrap();
    assert_eq!(limit["side"], "u->1");
    assert!((limit["observed"].as_f64().unwrap() - 3.0).abs() <= 0.05);

    let ex5 = entry("example_5");
    let verdict = &ex5["cases"][0]["verdicts"][0];
    assert_eq!(verdict["condition_id"], "sup1_u_to_1");
    assert_eq!(verdict["verdict"], "Fails");

    let ex1 = entry("example_1");
    let k0 = ex1["cases"].as_array().unwrap().iter().find(|c| c["params"]["k"] == 0.0).unwrap();
    let second = k0["limits"]
        .as_array()
        .unwrap()
        .iter()
        .find(|l| l["label"] == "second_term" && l["u"] == 1e-12)
        .unwrap();
    assert!((second["observed"].as_f64().unwrap() + 1.0).abs() <= 0.05);
}

#[test]
fn lemma_a_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bkquant(&["lemma-a", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("lemma_a.json").exists());
    assert_eq!(code(&bkquant(&["lemma-a", "--k", "21", "--out", dir.path().to_str().unwrap()])), 2);
    assert_eq!(code(&bkquant(&["lemma-a", "--draws", "999", "--out", dir.path().to_str().unwrap()])), 2);
}

#[test]
fn lemma_a_retry_budget_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = bkquant(&["lemma-a", "--max-tries", "1", "--draws", "1000", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 4);
}

#[test]
fn outputs_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "u.json", UNIFORM);
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.path().join(format!("t{threads}"));
        let out_str = out_dir.to_str().unwrap();
        for sub in ["simulate", "rate"] {
            let out = bkquant(&[sub, "--config", &config, "--out", out_str, "--threads", threads, "--seed", "11"]);
            assert_eq!(code(&out), 0);
        }
        let names = ["report.json", "samples.csv", "rate.json"];
        files.push(names.map(|n| fs::read(out_dir.join(n)).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn seed_and_log_mode_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "u.json", UNIFORM);
    let out_str = dir.path().to_str().unwrap();
    let out = bkquant(&["simulate", "--config", &config, "--out", out_str, "--seed", "99", "--log-mode", "n"]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 99);
    assert_eq!(report["config"]["log_mode"], "n");
}

#[test]
fn conditions_and_calibrate_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"model":{"family":"super_heavy_log","c":2.0,"G":{"form":"identity"}},"schedule":{"rule":"power","beta":0.8,"side":"right"},"n_grid":[10000,100000,1000000,10000000],"replications":10,"seed":1}"#;
    let config = write_config(dir.path(), "s.json", text);
    let out_str = dir.path().to_str().unwrap();
    assert_eq!(code(&bkquant(&["conditions", "--config", &config, "--out", out_str])), 0);
    let reports: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("conditions.json")).unwrap()).unwrap();
    let ids: Vec<&str> = reports.as_array().unwrap().iter().map(|r| r["condition_id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["A2", "psi_absorption_log_r", "heavy_tail_criterion"]);

    let uniform = write_config(dir.path(), "u.json", UNIFORM);
    assert_eq!(code(&bkquant(&["calibrate", "--config", &uniform, "--out", out_str, "--pilot-n", "1024"])), 0);
    let cal: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("calibration.json")).unwrap()).unwrap();
    assert!(cal["params"]["A"].as_f64().unwrap() > 0.0);
    assert_eq!(code(&bkquant(&["calibrate", "--config", &uniform, "--out", out_str, "--level", "0.5"])), 2);
}
