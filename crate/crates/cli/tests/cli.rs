//! End-to-end CLI tests against the built binary.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slspec"))
}

fn write_temp(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("slspec-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const FREE_OPERATOR: &str = r#"{"a": 0.0, "b": "inf", "segments": [{"lo": 0.0, "hi": "inf", "p": 1.0, "q": 0.0, "r": 1.0}]}"#;

#[test]
fn tree_bands_csv_shape() {
    let out = bin()
        .args(["tree-bands", "--b", "2", "--c", "1", "--lmax", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.trim().lines().collect();
    assert_eq!(lines.len(), 4); // header + 3 bands
    assert_eq!(
        lines[0],
        "schema_version,l,lower_edge,upper_edge,gap_to_next,point_eigenvalue,theta"
    );
    // θ column ≈ 0.339837 on every row
    for row in &lines[1..] {
        let theta: f64 = row.split(',').next_back().unwrap().parse().unwrap();
        assert!((theta - 0.339837).abs() < 1e-6);
    }
}

#[test]
fn scan_single_lambda_free_line() {
    let op = write_temp("free.json", FREE_OPERATOR);
    let out = bin()
        .args([
            "scan",
            "--operator",
            op.to_str().unwrap(),
            "--lambda",
            "1",
            "--xmax",
            "128",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.trim().lines().nth(1).unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells[2], "InN");
}

#[test]
fn run_with_missing_config_exits_2() {
    let out = bin()
        .args(["run", "--config", "/definitely/missing.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn negative_lambda_values_parse() {
    let op = write_temp("free-neg.json", FREE_OPERATOR);
    let out = bin()
        .args([
            "scan",
            "--operator",
            op.to_str().unwrap(),
            "--lambda-lo",
            "-1",
            "--lambda-hi",
            "1",
            "--lambda-count",
            "2",
            "--xmax",
            "64",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("1,-1.0"), "{text}");
}

#[test]
fn validate_reports_diagnostics_with_paths() {
    // grid with lo ≥ hi and an irregular tree
    let cfg = write_temp(
        "bad.json",
        r#"{
            "command": "tree-scan",
            "tree": {"t": [0.0, 1.0, 2.0], "b": [1, 1, 2]},
            "grid": {"lo": 5.0, "hi": 1.0, "count": 4, "spacing": "linear"}
        }"#,
    );
    let out = bin()
        .args(["validate", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("/grid"), "{text}");
    assert!(text.contains("/tree/b/1"), "{text}");
    assert!(
        text.contains("b_k ≥ 2") || text.contains("regularity"),
        "{text}"
    );

    let good = write_temp(
        "good.json",
        r#"{
            "command": "tree-bands",
            "tree": {"homogeneous": {"b": 2, "c": 1.0}},
            "lmax": 2
        }"#,
    );
    let out = bin()
        .args(["validate", "--config", good.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn identical_configs_give_byte_identical_csv() {
    let op = write_temp("free2.json", FREE_OPERATOR);
    let run = |threads: &str| {
        let out = bin()
            .args([
                "scan",
                "--operator",
                op.to_str().unwrap(),
                "--lambda-lo",
                "0.5",
                "--lambda-hi",
                "3.0",
                "--lambda-count",
                "6",
                "--xmax",
                "64",
                "--threads",
                threads,
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let a = run("1");
    let b = run("1");
    let c = run("4");
    assert_eq!(a, b, "same config must give identical bytes");
    assert_eq!(a, c, "thread count must not change the bytes");
}

#[test]
fn json_reports_reparse() {
    let op = write_temp("free3.json", FREE_OPERATOR);
    let out = bin()
        .args([
            "mfun",
            "--operator",
            op.to_str().unwrap(),
            "--lambda",
            "1",
            "--imz",
            "1",
            "--xmax",
            "40",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["command"], "mfun");
    let m = &doc["report"][0]["m"];
    assert!(m["re"].is_f64() && m["im"].is_f64(), "{doc}");
    // the free-line value at z = 1 + i
    let (re, im) = (m["re"].as_f64().unwrap(), m["im"].as_f64().unwrap());
    assert!((re + 0.45508986).abs() < 1e-6);
    assert!((im - 1.09868411).abs() < 1e-6);
}

#[test]
fn tree_scan_gap_and_band() {
    let out = bin()
        .args([
            "tree-scan",
            "--b",
            "2",
            "--c",
            "1",
            "--levels",
            "700",
            "--lambda-lo",
            "4",
            "--lambda-hi",
            "9",
            "--lambda-count",
            "2",
            "--xmax",
            "128",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.trim().lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains("InN"), "λ=4 row: {}", rows[0]);
    assert!(!rows[1].contains("InN"), "λ=9 row: {}", rows[1]);
}

#[test]
fn tree_decompose_multiplicities() {
    let out = bin()
        .args([
            "tree-decompose",
            "--b",
            "2",
            "--c",
            "1",
            "--levels",
            "8",
            "--kmax",
            "3",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mults: Vec<&str> = text
        .trim()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next_back().unwrap())
        .collect();
    assert_eq!(mults, vec!["1", "1", "2", "4"]);
}

#[test]
fn numerical_failure_flushes_partial_results_and_exits_3() {
    // a pole of q inside a callable segment defeats the adaptive stepper
    // once the truncation forces propagation across it; the report is
    // still flushed with the failed row marked
    let op = write_temp(
        "pole.json",
        r#"{"a": 0.0, "b": 10.0,
            "segments": [{"lo": 0.0, "hi": 10.0, "expr_p": "1", "expr_q": "1/(x - 5.5)", "expr_r": "1"}]}"#,
    );
    let out = bin()
        .args([
            "mfun",
            "--operator",
            op.to_str().unwrap(),
            "--lambda",
            "1",
            "--imz",
            "1",
            "--xmax",
            "8",
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.trim().lines().count(),
        2,
        "partial row still flushed: {text}"
    );
    assert!(text.lines().nth(1).unwrap().contains("nan"));
}

#[test]
fn run_config_with_inline_operator_writes_output_file() {
    let dir = std::env::temp_dir().join("slspec-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("scan-out.csv");
    let cfg = write_temp(
        "inline.json",
        &format!(
            r#"{{
                "command": "scan",
                "operator": {FREE_OPERATOR},
                "grid": {{"lo": 1.0, "hi": 2.0, "count": 2, "spacing": "linear"}},
                "policy": {{"tol": 1e-10, "xmax": 64.0, "delta": 1e-3, "delta_sub": 1e-3, "imz": 1.0}},
                "output": {{"path": {:?}, "format": "csv"}},
                "threads": 2
            }}"#,
            out_path.to_str().unwrap()
        ),
    );
    let out = bin()
        .args(["run", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().contains("InN"));
}

#[test]
fn tree_file_input() {
    let tree = write_temp(
        "tree.json",
        r#"{"t": [0.0, 1.0, 2.0, 3.0], "b": [1, 3, 2, 2]}"#,
    );
    let out = bin()
        .args([
            "tree-decompose",
            "--tree",
            tree.to_str().unwrap(),
            "--kmax",
            "2",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mults: Vec<&str> = text
        .trim()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next_back().unwrap())
        .collect();
    assert_eq!(mults, vec!["1", "2", "3"]);
}

#[test]
fn weidmann_subcommand_reports_inn() {
    let op = write_temp(
        "decay.json",
        r#"{"a": 0.0, "b": "inf",
            "segments": [{"lo": 0.0, "hi": "inf", "expr_p": "1", "expr_q": "exp(-x)", "expr_r": "1"}]}"#,
    );
    let out = bin()
        .args([
            "weidmann",
            "--operator",
            op.to_str().unwrap(),
            "--lambda-lo",
            "0.5",
            "--lambda-hi",
            "2.0",
            "--lambda-count",
            "2",
            "--xmax",
            "128",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    for row in text.trim().lines().skip(1) {
        assert!(row.contains("InN"), "{row}");
    }
}
