use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn zml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zml")).args(args).env_remove("ZML_CACHE").output().expect("zml runs")
}

fn rows(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("bad JSON line {l:?}: {e}")))
        .collect()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn scratch(name: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_file(&p);
    p
}

/// `(zeta_evaluations, cache_hits)` from the stderr footer.
fn footer(out: &Output) -> (u64, u64) {
    let err = String::from_utf8_lossy(&out.stderr);
    let line = err.lines().find(|l| l.starts_with("# zeta_evaluations=")).expect("stats footer");
    let field = |key: &str| -> u64 {
        line.split_whitespace()
            .find_map(|w| w.strip_prefix(key))
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(|| panic!("{key} in {line:?}"))
    };
    (field("zeta_evaluations="), field("cache_hits="))
}

#[test]
fn zeta_grid_has_inclusive_rows_and_dips_at_first_zero() {
    let out = zml(&["zeta", "--t-lo", "0", "--t-hi", "30", "--step", "0.1"]);
    assert_eq!(code(&out), 0);
    let rows = rows(&out);
    assert_eq!(rows.len(), 301);
    let near: Vec<&Value> = rows.iter().filter(|r| (r["t"].as_f64().unwrap() - 14.1347).abs() < 0.1).collect();
    assert!(!near.is_empty());
    let min = near.iter().map(|r| r["value"].as_f64().unwrap()).fold(f64::INFINITY, f64::min);
    assert!(min < 1e-3, "min near first zero {min}");
    for r in &rows {
        assert!(r["err"].as_f64().unwrap() > 0.0);
        assert_eq!(r["provenance"], "quadrature");
    }
}

#[test]
fn empty_range_gives_no_rows() {
    let out = zml(&["zeta", "--t-lo", "5", "--t-hi", "1"]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
}

#[test]
fn cached_rerun_is_identical_and_evaluates_less() {
    let path = scratch("cli_rerun.csv");
    let p = path.to_str().unwrap();
    let first = zml(&["--cache", p, "zeta", "--t-hi", "30"]);
    assert_eq!(code(&first), 0);
    let header: Vec<String> = std::fs::read_to_string(&path).unwrap().lines().take(4).map(String::from).collect();
    let keys: Vec<&str> = header.iter().map(|l| l.trim_start_matches("# ").split('=').next().unwrap()).collect();
    assert_eq!(keys, ["k", "grid_step", "tol", "generator_version"]);
    let second = Command::new(env!("CARGO_BIN_EXE_zml"))
        .args(["zeta", "--t-hi", "30"])
        .env("ZML_CACHE", &path)
        .output()
        .unwrap();
    assert_eq!(code(&second), 0);
    assert_eq!(first.stdout, second.stdout);
    let (e1, _) = footer(&first);
    let (e2, hits) = footer(&second);
    assert_eq!(e1, 301);
    assert!(e2 < e1, "{e2} >= {e1}");
    assert_eq!(hits, 301);
}

#[test]
fn pole_structure_verifies() {
    let out = zml(&["verify", "pole-structure"]);
    assert_eq!(code(&out), 0);
    let rows = rows(&out);
    assert!(rows.iter().any(|r| r["holds"] == true));
    assert!(rows.iter().all(|r| r["provenance"] == "closed_form"));
}

#[test]
fn c2_from_euler_product() {
    let out = zml(&["constants", "--k", "2", "--cutoff", "100000"]);
    assert_eq!(code(&out), 0);
    let rows = rows(&out);
    let c = rows.iter().find(|r| r["quantity"] == "c_k" && r["provenance"] == "quadrature").expect("c_k row");
    assert!((c["value"].as_f64().unwrap() - 0.0506606).abs() < 1e-7);
    assert!(c["err"].as_f64().unwrap() < 1e-7);
}

#[test]
fn mellin_methods_agree_within_errors() {
    let out = zml(&["mellin", "--k", "1", "--s", "2", "--method", "both"]);
    assert_eq!(code(&out), 0);
    let rows = rows(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["method"], "direct");
    assert_eq!(rows[1]["method"], "continued");
    let v = |r: &Value| r["value_re"].as_f64().unwrap();
    let e = |r: &Value| r["err"].as_f64().unwrap();
    assert!((v(&rows[0]) - v(&rows[1])).abs() <= e(&rows[0]) + e(&rows[1]));
}

#[test]
fn csv_output_carries_err_and_provenance() {
    let out = zml(&["--format", "csv", "moment", "--k", "1", "--t", "50"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("quantity,k,at,value,err,provenance"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("I_k,1,50.0,") && row.ends_with(",quadrature"), "{row}");
}

#[test]
fn desk_ceilings_exit_3() {
    assert_eq!(code(&zml(&["moment", "--k", "2", "--t", "3000"])), 3);
    assert_eq!(code(&zml(&["tauberian", "--k", "1", "--hi", "20000"])), 3);
    assert_eq!(code(&zml(&["laplace", "--sigma", "1e-5"])), 3);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&zml(&["zeta", "--t-hi", "1", "--step", "0"])), 2);
    assert_eq!(code(&zml(&["mellin", "--s", "1", "--method", "continued"])), 2);
    assert_eq!(code(&zml(&["mellin", "--s", "not-a-number"])), 2);
    assert_eq!(code(&zml(&["frobnicate"])), 2);
    assert_eq!(code(&zml(&["--format", "xml", "zeta", "--t-hi", "1"])), 2);
}

#[test]
fn unreadable_cache_exits_4() {
    let path = scratch("cli_corrupt.csv");
    std::fs::write(&path, "not a cache\n").unwrap();
    assert_eq!(code(&zml(&["--cache", path.to_str().unwrap(), "zeta", "--t-hi", "1"])), 4);
}

#[test]
fn unmet_tolerance_exits_1() {
    let out = zml(&["moment", "--t", "100", "--tol", "1e-9"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerance"));
}

#[test]
fn convolution_family_is_seeded() {
    let a = zml(&["--seed", "5", "verify", "convolution", "--cases", "4"]);
    let b = zml(&["--seed", "5", "verify", "convolution", "--cases", "4"]);
    let c = zml(&["--seed", "6", "verify", "convolution", "--cases", "4"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let verdicts: Vec<bool> = rows(&a).iter().filter_map(|r| r["holds"].as_bool()).collect();
    assert_eq!(verdicts, vec![true; 5]);
}

#[test]
fn gamma_contour_closes() {
    let out = zml(&["verify", "gamma-contour", "--t", "20", "--spans", "20,40,60"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(rows(&out).iter().filter_map(|r| r["holds"].as_bool()).all(|h| h));
}

#[test]
fn laurent_coefficients_match_closed_forms() {
    let out = zml(&["verify", "laurent"]);
    assert_eq!(code(&out), 0);
    let rows = rows(&out);
    let c2 = rows.iter().find(|r| r["quantity"] == "c_-2").unwrap();
    assert!((c2["value_re"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}
