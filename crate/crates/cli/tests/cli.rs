use std::collections::HashMap;
use std::process::{Command, Output};

fn adcp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adcp")).args(args).output().expect("run adcp")
}

fn pairs(out: &Output) -> HashMap<String, String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[test]
fn complete_reports_exact_recovery_and_audit() {
    let out = adcp(&["complete", "--n1", "80", "--n2", "60", "--rank", "3", "--m", "25", "--seed", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let kv = pairs(&out);
    assert_eq!(kv["success"], "true");
    assert_eq!(kv["entries_observed"], kv["oracle_count"]);
    assert_eq!(kv["fully_observed_columns"], "3");
}

#[test]
fn complete_is_deterministic() {
    let args = ["complete", "--n1", "50", "--n2", "50", "--rank", "2", "--m", "10", "--seed", "9", "--family", "coherent:1"];
    let mut a = pairs(&adcp(&args));
    let mut b = pairs(&adcp(&args));
    a.remove("wall_time");
    b.remove("wall_time");
    assert_eq!(a, b);
}

#[test]
fn tensor_defaults_to_capped_schedule() {
    let out = adcp(&["tensor", "--dims", "8,8,8", "--rank", "2", "--seed", "1"]);
    assert!(out.status.success());
    let kv = pairs(&out);
    assert_eq!(kv["budgets"], "1,8,64");
    assert_eq!(kv["success"], "true");
    assert_eq!(kv["entries_observed"], kv["oracle_count"]);
}

#[test]
fn css_noiseless_is_exact() {
    let out = adcp(&[
        "css", "--n1", "60", "--n2", "60", "--rank", "3", "--rounds", "2", "--per-round", "10", "--m", "20", "--seed", "2",
    ]);
    assert!(out.status.success());
    let kv = pairs(&out);
    assert!(kv["rel_error"].parse::<f64>().unwrap() < 1e-8);
    assert_eq!(kv["entries_observed"], kv["oracle_count"]);
}

#[test]
fn bounds_print_named_values() {
    let kv = pairs(&adcp(&["bounds", "matrix-budget", "--r", "1", "--mu0", "1", "--delta", "0.1"]));
    let expected = 36.0 * 20f64.ln();
    assert!((kv["matrix_budget"].parse::<f64>().unwrap() - expected).abs() < 1e-9);

    let kv = pairs(&adcp(&["bounds", "tensor-schedule", "--r", "2", "--mu0", "1", "--delta", "0.1", "--order", "3"]));
    let ratio = kv["m_3"].parse::<f64>().unwrap() / kv["m_2"].parse::<f64>().unwrap();
    assert!((ratio - 2.0).abs() < 1e-12);

    let kv = pairs(&adcp(&["bounds", "adaptive-lower", "--r", "3", "--dims", "10,10,10"]));
    assert_eq!(kv["adaptive_lower_bound"], "90");

    let kv = pairs(&adcp(&["bounds", "detection", "--m", "80", "--n", "200", "--d", "5"]));
    assert_eq!(kv["in_regime"], "true");
}

#[test]
fn exit_codes() {
    let bad = adcp(&["bounds", "matrix-budget", "--r", "2", "--delta", "0.9"]);
    assert_eq!(bad.status.code(), Some(2));
    let unknown = adcp(&["complete", "--n1", "10"]);
    assert_eq!(unknown.status.code(), Some(2));
    let budget = adcp(&["tensor", "--dims", "5,5,5", "--rank", "1", "--budgets", "1,9,5"]);
    assert_eq!(budget.status.code(), Some(2));

    // Three draws over three row blocks: some seed exhausts resampling.
    let codes: Vec<Option<i32>> = (0..20)
        .map(|s| {
            let seed = s.to_string();
            let args =
                ["complete", "--n1", "30", "--n2", "30", "--rank", "3", "--m", "3", "--family", "blockdiag:1", "--seed", &seed];
            adcp(&args).status.code()
        })
        .collect();
    assert!(codes.contains(&Some(1)), "{codes:?}");
    assert!(codes.iter().all(|c| *c == Some(0) || *c == Some(1)));
}

#[test]
fn sweep_writes_csv_summary_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    let csv = dir.path().join("out.csv");
    std::fs::write(
        &config,
        format!(
            r#"{{"kind": "success-vs-p", "n": [40], "r": [2], "p": [0.05, 0.25, 1.0], "trials": 4, "seed": 3, "output": {:?}}}"#,
            csv
        ),
    )
    .unwrap();
    let out = adcp(&["sweep", "--config", config.to_str().unwrap(), "--deterministic"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read_to_string(&csv).unwrap();
    assert!(first.starts_with("n,r,m,p,"));
    assert_eq!(first.lines().count(), 4);
    assert!(dir.path().join("out.summary.csv").exists());
    assert!(std::fs::read_to_string(dir.path().join("out.gp")).unwrap().contains("'out.csv'"));

    adcp(&["sweep", "--config", config.to_str().unwrap(), "--deterministic"]);
    assert_eq!(first, std::fs::read_to_string(&csv).unwrap());
}

#[test]
fn sweep_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(&config, r#"{"kind": "success-vs-p", "n": [40], "trials": 0}"#).unwrap();
    assert_eq!(adcp(&["sweep", "--config", config.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&config, r#"{"kind": "timing", "colour": 1}"#).unwrap();
    assert_eq!(adcp(&["sweep", "--config", config.to_str().unwrap()]).status.code(), Some(2));
}
