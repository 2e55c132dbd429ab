use std::path::Path;
use std::process::{Command, Output};

fn mixnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixnorm"))
        .args(args)
        .env_remove("MIXNORM_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_diag4(dir: &Path) -> String {
    let path = dir.join("diag4.json");
    let mut entries = vec![0.0; 16];
    for j in 0..4 {
        entries[5 * j] = 1.0;
    }
    let body = serde_json::json!({ "dims": [4, 4], "field": "real", "entries": entries });
    std::fs::write(&path, body.to_string()).unwrap();
    path.display().to_string()
}

#[test]
fn exponents_examples() {
    let cases = [
        ("2", "inf,inf", vec!["2/1"], "1/1"),
        ("2", "4,4", vec!["4/1"], "4/3"),
        ("3", "inf,inf,inf", vec!["2/1", "2/1"], "1/1"),
    ];
    for (m, p, thresholds, inner) in cases {
        let out = mixnorm(&["exponents", "--m", m, "--p", p]);
        assert!(out.status.success());
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["thresholds"], serde_json::json!(thresholds), "p = {p}");
        assert_eq!(v["inner"], inner, "p = {p}");
    }
}

#[test]
fn malformed_exponents_are_usage_errors() {
    for p in ["1.5,inf", "0,inf", "abc", "1/0,2"] {
        let out = mixnorm(&["exponents", "--m", "2", "--p", p]);
        assert_eq!(out.status.code(), Some(2), "p = {p}");
        assert!(!out.stderr.is_empty());
    }
    let out = mixnorm(&["exponents", "--m", "3", "--p", "inf,inf"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_constant_at_two() {
    let out = mixnorm(&["search-constant", "--n", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "max_ratio=1.414213562373, classes=2");
}

#[test]
fn verify_hadamard_reaches_sqrt2() {
    let out = mixnorm(&["verify", "--family", "hadamard", "--k", "1", "--q", "2,1", "--p", "inf,inf"]);
    assert!(out.status.success());
    let line = stdout(&out);
    assert!(line.starts_with("ratio=1.414213562373"), "{line}");
    assert!(line.trim_end().ends_with("PASS"), "{line}");
}

#[test]
fn verify_rejects_wrong_inner_exponent() {
    let out = mixnorm(&["verify", "--family", "hadamard", "--k", "1", "--q", "2,2", "--p", "inf,inf"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn opnorm_ascent_on_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_diag4(dir.path());
    let out = mixnorm(&["opnorm", "--tensor", &t, "--p", "4,4", "--method", "ascent", "--starts", "32", "--seed", "7"]);
    assert!(out.status.success());
    let line = stdout(&out);
    assert!(line.starts_with("opnorm=2.000000"), "{line}");
    assert!(line.contains("lower bound"), "{line}");

    let out = mixnorm(&["opnorm", "--tensor", &t, "--p", "4,4", "--method", "closed", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["exact"], true);
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn mixed_norm_of_identity() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_diag4(dir.path());
    let out = mixnorm(&["mixed-norm", "--tensor", &t, "--q", "2,1"]);
    assert_eq!(stdout(&out).trim(), "mixed_norm=2.000000000000");
    let out = mixnorm(&["mixed-norm", "--tensor", &t, "--q", "1.5,inf", "--order", "2,1"]);
    assert!(stdout(&out).starts_with("mixed_norm=2.519842"));
}

#[test]
fn distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_diag4(dir.path());
    let missing = mixnorm(&["opnorm", "--tensor", "/nonexistent/t.json", "--p", "2,2"]);
    let rank = mixnorm(&["opnorm", "--tensor", &t, "--p", "2,2,2"]);
    let budget = mixnorm(&["search-constant", "--n", "5", "--budget", "1000"]);
    let usage = mixnorm(&["opnorm", "--tensor", &t]);
    let codes: Vec<_> = [&missing, &rank, &budget, &usage].iter().map(|o| o.status.code().unwrap()).collect();
    assert_eq!(codes, [3, 5, 4, 2]);

    let env_budget = Command::new(env!("CARGO_BIN_EXE_mixnorm"))
        .args(["search-constant", "--n", "4"])
        .env("MIXNORM_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(env_budget.status.code(), Some(4));
}

#[test]
fn probe_config_echo_reproduces_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.csv");
    let run = mixnorm(&[
        "probe", "--p", "inf,inf", "--q", "1.2", "--family", "random-sign", "--n-range", "4,6,8,10",
        "--seeds", "3,4", "--id", "rs", "--output", out1.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout(&run).contains("verdict="));
    let echo = dir.path().join("a.csv.config.json");
    assert!(echo.exists());

    let out2 = dir.path().join("b.csv");
    let rerun = mixnorm(&["--jobs", "1", "probe", "--config", echo.to_str().unwrap(), "--output", out2.to_str().unwrap()]);
    assert!(rerun.status.success());
    let a = std::fs::read(&out1).unwrap();
    let b = std::fs::read(&out2).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("experiment_id,n,seed,mixed_norm,opnorm,opnorm_exact,ratio,slope,verdict\n"));
    assert_eq!(text.lines().count(), 1 + 8);
}

#[test]
fn probe_json_is_jobs_invariant() {
    let args = |jobs: &'static str| {
        mixnorm(&[
            "--jobs", jobs, "probe", "--p", "3,inf", "--q", "2", "--family", "random-sign", "--n-range", "3,4,5,6",
            "--seeds", "1,2", "--starts", "6", "--format", "json",
        ])
    };
    let one = args("1");
    let four = args("4");
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let v: serde_json::Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(v["config"]["q"], serde_json::json!(["2/1"]));
    assert_eq!(v["report"]["rows"].as_array().unwrap().len(), 8);
}
