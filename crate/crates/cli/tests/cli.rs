use std::process::{Command, Output};

use ncx2diff::export::read_numeric_csv;
use serde_json::Value;

fn ncx2diff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncx2diff"))
        .args(args)
        .env_remove("NCX2DIFF_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn assert_error_line(out: &Output, code: i32, kind: &str) {
    assert_eq!(out.status.code(), Some(code), "{}", stderr(out));
    let err = stderr(out);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with(&format!("ncx2diff: error kind={kind}: ")), "{err}");
}

#[test]
fn negativity_example() {
    let out = ncx2diff(&["prob-neg", "--product", "--mu-x", "1", "--mu-y", "1", "--rho", "0.5", "--n", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    let p = v["probability"].as_f64().unwrap();
    assert!((p - 0.1923).abs() <= 5e-5, "{p}");
    assert!(v["terms_used"].as_u64().unwrap() > 0);
    assert!(v["tail_bound"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn singular_point_is_flagged() {
    let out = ncx2diff(&["pdf", "--diff", "--r", "1", "--lambda1", "0", "--lambda2", "0", "--grid", "-0.001:0.001:3"]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("kind=singular"));
    let (header, rows) = read_numeric_csv(&stdout(&out)).unwrap();
    assert_eq!(header, ["x", "pdf"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1], vec![Some(0.0), None]);
    assert!(rows[0][1].unwrap() > 1.0 && rows[0][1] == rows[2][1]);

    let out = ncx2diff(&["pdf", "--diff", "--r", "1", "--grid", "-0.001:0.001:3", "--format", "json"]);
    let v = json(&out);
    assert!(v[1]["pdf"].is_null());
    assert_eq!(v[1]["singular"], true);
}

#[test]
fn second_order_moments() {
    let out = ncx2diff(&["moments", "--diff", "--r", "2", "--lambda1", "1", "--lambda2", "0", "--order", "2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["raw"][0].as_f64().unwrap() - 1.0).abs() <= 1e-14);
    assert!((v["variance"].as_f64().unwrap() - 12.0).abs() <= 1e-12);

    let out = ncx2diff(&["moments", "--diff", "--r", "2", "--lambda1", "1", "--order", "4", "--format", "csv"]);
    let (header, rows) = read_numeric_csv(&stdout(&out)).unwrap();
    assert_eq!(header, ["order", "raw", "central", "cumulant"]);
    assert_eq!(rows.len(), 4);
    assert!((rows[1][3].unwrap() - 12.0).abs() <= 1e-12);
}

#[test]
fn cumulants_and_cf() {
    let out = ncx2diff(&["cumulants", "--product", "--rho", "0.5", "--order", "3"]);
    let v = json(&out);
    let k = v["cumulants"].as_array().unwrap();
    assert_eq!(k.len(), 3);
    // Central product: κ2 = 1 + ρ².
    assert!((k[1].as_f64().unwrap() - 1.25).abs() <= 1e-14);

    let out = ncx2diff(&["cf", "--diff", "--r", "2", "--grid", "0:1:3"]);
    let (header, rows) = read_numeric_csv(&stdout(&out)).unwrap();
    assert_eq!(header, ["t", "re", "im"]);
    assert_eq!(rows[0], vec![Some(0.0), Some(1.0), Some(0.0)]);
    // Central r = 2 difference: φ(t) = 1/(1 + 4t²).
    assert!((rows[2][1].unwrap() - 0.2).abs() <= 1e-15);
}

#[test]
fn flag_errors_exit_2() {
    assert_error_line(&ncx2diff(&["pdf", "--product", "--diff", "--r", "1", "--grid", "0:1:2"]), 2, "usage");
    assert_error_line(&ncx2diff(&["pdf", "--diff", "--r", "1", "--grid", "0:1"]), 2, "usage");
    assert_error_line(&ncx2diff(&["pdf", "--diff", "--r", "1", "--grid", "1:0:3"]), 2, "usage");
    assert_error_line(&ncx2diff(&["pdf", "--diff", "--grid", "0:1:2"]), 2, "usage");
    assert_error_line(&ncx2diff(&["pdf", "--diff", "--r", "1", "--rho", "0.2", "--grid", "0:1:2"]), 2, "usage");
    assert_error_line(&ncx2diff(&["prob-neg", "--product", "--rho", "1.5"]), 2, "invalid_params");
    assert_error_line(&ncx2diff(&["moments", "--diff", "--r", "2", "--order", "21"]), 2, "domain");
    assert_error_line(&ncx2diff(&["sample", "--diff", "--r", "2", "--count", "5"]), 2, "usage");
    assert_error_line(&ncx2diff(&["stein-check", "--diff", "--r", "2"]), 2, "usage");
    assert_error_line(&ncx2diff(&["cf", "--diff", "--r", "2", "--grid", "0:1:2", "--format", "text"]), 2, "usage");
    assert!(ncx2diff(&["--help"]).status.success());
}

#[test]
fn non_convergence_exits_3() {
    let out = ncx2diff(&["prob-neg", "--product", "--mu-x", "2", "--mu-y", "2", "--n", "4", "--max-terms", "1"]);
    assert_error_line(&out, 3, "nonconvergence");
}

#[test]
fn tolerance_from_environment() {
    let base = ["prob-neg", "--product", "--mu-x", "2", "--mu-y", "2", "--n", "4"];
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_ncx2diff"))
            .args(base)
            .env("NCX2DIFF_TOL", tol)
            .output()
            .unwrap()
    };
    let loose = json(&run("1e-4"));
    let tight = json(&ncx2diff(&base));
    assert!(loose["terms_used"].as_u64() < tight["terms_used"].as_u64());
    assert_error_line(&run("-1"), 2, "invalid_params");
}

#[test]
fn table1_csv_is_stable() {
    let a = ncx2diff(&["table1", "--format", "csv"]);
    let b = ncx2diff(&["table1", "--format", "csv"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let (header, rows) = read_numeric_csv(&stdout(&a)).unwrap();
    assert_eq!(header, ["mu_x", "mu_y", "rho", "probability", "published", "abs_diff"]);
    assert_eq!(rows.len(), 56);

    let text = stdout(&ncx2diff(&["table1"]));
    assert!(text.contains("0.7699*"));
    let v = json(&ncx2diff(&["table1", "--format", "json"]));
    assert_eq!(v["entries"].as_array().unwrap().len(), 56);
}

#[test]
fn samples_reproduce_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("draws.csv");
    let p = path.to_str().unwrap();
    let args = [
        "sample", "--product", "--mu-x", "1", "--mu-y", "-1", "--rho", "0.25", "--n", "2",
        "--count", "70000", "--seed", "5", "--route", "representation", "--output", p,
    ];
    assert!(ncx2diff(&args).status.success());
    let first = std::fs::read(&path).unwrap();
    let mut parallel = vec!["--jobs", "3"];
    parallel.extend_from_slice(&args);
    assert!(ncx2diff(&parallel).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), first);

    let (header, rows) = read_numeric_csv(std::str::from_utf8(&first).unwrap()).unwrap();
    assert_eq!(header, ["value"]);
    assert_eq!(rows.len(), 70000);
    let meta: Value = serde_json::from_slice(&std::fs::read(dir.path().join("draws.csv.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 5);
    assert_eq!(meta["count"], 70000);
    assert_eq!(meta["route"], "representation");
}

#[test]
fn stein_check_reports_rows() {
    let out = ncx2diff(&["stein-check", "--diff", "--r", "2", "--lambda1", "1", "--lambda2", "0.5", "--method", "quadrature"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r["pass"] == true));

    let out = ncx2diff(&[
        "stein-check", "--diff", "--r", "2", "--count", "20000", "--seed", "3", "--format", "csv",
    ]);
    let text = stdout(&out);
    assert!(text.starts_with("operator,test_function,"));
    assert_eq!(text.lines().count(), 1 + 27);
}

#[test]
fn quick_selftest_is_deterministic() {
    let args = ["selftest", "--seed", "7", "--quick", "--criterion", "4", "--criterion", "9"];
    let a = ncx2diff(&args);
    let b = ncx2diff(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["mode"], "quick");
    assert_eq!(v["passed"], 2);
    let err = stderr(&a);
    assert!(err.lines().any(|l| l.starts_with("criterion 4 normalisation: PASS")), "{err}");

    let failing = ncx2diff(&["selftest", "--seed", "7", "--quick", "--criterion", "8"]);
    assert_eq!(failing.status.code(), Some(1));
    assert!(stderr(&failing).lines().last().unwrap().starts_with("ncx2diff: error kind=selftest_failed: "));
}
