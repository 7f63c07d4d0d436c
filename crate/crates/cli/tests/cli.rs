use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orlicz-dyn"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("ORLICZ_DYN_THREADS")
        .output()
        .expect("spawn orlicz-dyn")
}

fn check(config: &Path) -> (Output, TempDir) {
    let dir = TempDir::new().unwrap();
    let out = bin(&["check", "--config", config.to_str().unwrap()], dir.path());
    (out, dir)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn trace(dir: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(dir.join("trace.csv"))
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

/// Writes `line_step.json` with `edit` applied to the parsed document.
fn variant(dir: &Path, name: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(configs().join("line_step.json")).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn heisenberg_example_is_verified() {
    let (out, dir) = check(&configs().join("heisenberg.json"));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(dir.path());
    assert_eq!(r["verdict"], "verified");
    assert_eq!(r["n_star"], 14);
    assert_eq!(r["aperiodicity"]["bound"], 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("verified at n = 14"));
}

#[test]
fn contraction_is_refused() {
    let (out, dir) = check(&configs().join("contraction.json"));
    assert_eq!(out.status.code(), Some(3));
    let r = report(dir.path());
    assert_eq!(r["verdict"], "refused");
    assert!(r["reason"].as_str().unwrap().contains("‖w_1‖_∞ ≤ 1"), "{}", r["reason"]);
}

#[test]
fn periodic_translation_is_refused() {
    let tmp = TempDir::new().unwrap();
    let cfg = variant(tmp.path(), "periodic.json", |v| v["scenario"]["a"] = serde_json::json!([0]));
    let (out, dir) = check(&cfg);
    assert_eq!(out.status.code(), Some(3));
    assert!(report(dir.path())["reason"].as_str().unwrap().contains("not aperiodic"));
}

#[test]
fn override_runs_the_search_anyway() {
    let tmp = TempDir::new().unwrap();
    let out = bin(
        &["check", "--config", configs().join("contraction.json").to_str().unwrap(), "--override-diagnostics"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let r = report(tmp.path());
    assert_eq!(r["verdict"], "not_verified_within_bound");
    assert_eq!(r["trace"].as_array().unwrap().len(), 64);
}

#[test]
fn trace_header_counts_quantities() {
    let tmp = TempDir::new().unwrap();
    for (mode, l, chaos) in [("disjoint_transitive", 3usize, false), ("disjoint_chaotic", 3, true)] {
        let cfg = variant(tmp.path(), &format!("{mode}.json"), |v| {
            v["mode"] = Value::from(mode);
            let w = v["scenario"]["weights"][0].clone();
            v["scenario"]["weights"] = Value::Array(vec![w; l]);
            v["scenario"]["powers"] = serde_json::json!([1, 2, 3]);
        });
        let out_dir = tmp.path().join(mode);
        let out = bin(&["trace", "--config", cfg.to_str().unwrap()], &out_dir);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert!(!out_dir.join("report.json").exists());
        let rows = trace(&out_dir);
        let quantities = 2 * l + l * (l - 1) + if chaos { l } else { 0 };
        assert_eq!(rows[0].len(), 1 + quantities + 2, "{:?}", rows[0]);
        assert_eq!(rows[0][0], "n");
        assert_eq!(rows.len(), 65);
    }
}

#[test]
fn single_row_when_n_max_is_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = variant(tmp.path(), "short.json", |v| {
        v["mode"] = Value::from("disjoint_transitive");
        v["scenario"]["n_max"] = Value::from(1);
    });
    let (out, dir) = check(&cfg);
    // a probe reach of 2 cannot certify aperiodicity on K = {-3..3}
    assert_eq!(out.status.code(), Some(3));
    assert!(report(dir.path())["reason"].as_str().unwrap().contains("not aperiodic"));
    let rows = trace(dir.path());
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], "1");
}

#[test]
fn single_point_trace_values() {
    let tmp = TempDir::new().unwrap();
    let cfg = variant(tmp.path(), "k0.json", |v| {
        v["mode"] = Value::from("disjoint_transitive");
        v["scenario"]["K"] = serde_json::json!({ "points": [[0]] });
    });
    let out_dir = tmp.path().join("out");
    let out = bin(&["trace", "--config", cfg.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(0));
    let rows = trace(&out_dir);
    let col = rows[0].iter().position(|c| c == "phi_tilde_1").unwrap();
    assert_eq!(rows[3][0], "3");
    assert_eq!(rows[3][col], "0.25");
}

#[test]
fn output_is_deterministic() {
    for name in ["heisenberg.json", "line_chaos.json", "witness_line.json"] {
        let (_, a) = check(&configs().join(name));
        let (_, b) = check(&configs().join(name));
        for file in ["report.json", "trace.csv"] {
            let x = std::fs::read(a.path().join(file)).unwrap();
            let y = std::fs::read(b.path().join(file)).unwrap();
            assert!(x == y, "{name}/{file} differs between runs");
        }
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let cfg = configs().join("line_chaos.json");
    let one = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_orlicz-dyn"))
        .args(["check", "--config", cfg.to_str().unwrap(), "--out"])
        .arg(one.path())
        .env("ORLICZ_DYN_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let (_, many) = check(&cfg);
    assert_eq!(std::fs::read(one.path().join("trace.csv")).unwrap(), std::fs::read(many.path().join("trace.csv")).unwrap());
}

#[test]
fn malformed_config_names_the_field() {
    let tmp = TempDir::new().unwrap();
    let cfg = variant(tmp.path(), "bad.json", |v| v["scenario"]["epsilon"] = Value::from("small"));
    let (out, _) = check(&cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("scenario.epsilon"), "{}", stderr(&out));

    let cfg = variant(tmp.path(), "bad_powers.json", |v| v["scenario"]["powers"] = serde_json::json!([2, 1]));
    let (out, _) = check(&cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("scenario"), "{}", stderr(&out));

    let cfg = variant(tmp.path(), "one_op.json", |v| {
        let w = v["scenario"]["weights"][0].clone();
        v["scenario"]["weights"] = Value::Array(vec![w]);
        v["scenario"]["powers"] = serde_json::json!([1]);
    });
    let (out, _) = check(&cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("scenario.weights"), "{}", stderr(&out));
}

#[test]
fn witness_mode_reports_residuals() {
    let (out, dir) = check(&configs().join("witness_line.json"));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(dir.path());
    assert_eq!(r["mode"], "witness");
    let w = &r["witness"];
    assert_eq!(w["n"], 16);
    assert_eq!(w["rho"].as_array().unwrap().len(), 2);
    assert!(w["max_residual"].as_f64().unwrap() < 1e-2);
}

#[test]
fn witness_with_explicit_vectors() {
    let tmp = TempDir::new().unwrap();
    let cfg = variant(tmp.path(), "delta.json", |v| {
        v["mode"] = Value::from("witness");
        v["scenario"]["K"] = serde_json::json!({ "points": [[0]] });
        let delta = serde_json::json!({ "entries": [{ "at": [0], "value": 1.0 }] });
        v["witness"] = serde_json::json!({ "n": 4, "f": delta, "targets": [delta, delta] });
    });
    let (out, dir) = check(&cfg);
    assert_eq!(out.status.code(), Some(2));
    let rho0 = report(dir.path())["witness"]["rho0"].as_f64().unwrap();
    assert!((rho0 - 0.1328125).abs() < 1e-12, "{rho0}");
}

#[test]
fn chaotic_mode_selects_operator() {
    let tmp = TempDir::new().unwrap();
    let cfg = variant(tmp.path(), "chaotic.json", |v| {
        v["mode"] = Value::from("chaotic");
        v["operator"] = Value::from(2);
    });
    let (out, dir) = check(&cfg);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(dir.path());
    assert_eq!(r["columns"], serde_json::json!(["phi_2", "phi_tilde_2", "chaos_2"]));

    let cfg = variant(tmp.path(), "chaotic_bad.json", |v| {
        v["mode"] = Value::from("chaotic");
        v["operator"] = Value::from(3);
    });
    let (out, _) = check(&cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("operator"));
}

#[test]
fn format_flag_limits_outputs() {
    let tmp = TempDir::new().unwrap();
    let out = bin(
        &["check", "--config", configs().join("line_step.json").to_str().unwrap(), "--format", "json"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("report.json").exists());
    assert!(!tmp.path().join("trace.csv").exists());
}

#[test]
fn nonconvex_young_function_warns() {
    let tmp = TempDir::new().unwrap();
    let cfg = variant(tmp.path(), "plog.json", |v| {
        v["scenario"]["young"] = serde_json::json!({ "family": "powerlog", "alpha": 1.5 });
    });
    let (out, dir) = check(&cfg);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("not convex"));
    let notes = report(dir.path())["notes"].to_string();
    assert!(notes.contains("not convex"));
}
