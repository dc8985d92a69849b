use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spin-ent"))
        .args(args)
        .current_dir(dir)
        .env("SPIN_ENT_THREADS", "2")
        .output()
        .unwrap()
}

fn with_config(body: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), body).unwrap();
    dir
}

fn report(dir: &Path, out: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(out).join("report.json")).unwrap()).unwrap()
}

const SWEEP: &str = r#"
[lattice]
kind = "chain"
length = 12

[model]
delta_y = 0.25

[grid]
start = 1.0
stop = 2.2
step = 0.1
"#;

#[test]
fn sweep_writes_rows() {
    let dir = with_config(SWEEP);
    let out = run(&["sweep", "--config", "run.toml", "--out", "a"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("a/rows.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 14);
    assert!(lines[0].starts_with("h,energy,gap,mz,mx_lr,tau1_sym,tau1_broken,tau2,ratio,ckw,xi,C1_r1,C2_r1,C_r1"));
    assert!(lines[0].ends_with("C1_r6,C2_r6,C_r6"));
    // with the long-range M^x estimator, monogamy fails only just above h_f
    let bad: Vec<&str> = lines[1..]
        .iter()
        .filter(|l| l.split(',').nth(9) != Some("true"))
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(bad, ["1.6000000000000001e0", "1.7000000000000002e0"]);
    assert!(!dir.path().join("a/sweep.svg").exists());
    let r = report(dir.path(), "a");
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config"]["lattice"]["length"], 12);
    assert_eq!(r["rows"], 13);
}

#[test]
fn sweep_plot_and_overrides() {
    let dir = with_config(SWEEP);
    let out = run(
        &["sweep", "--config", "run.toml", "--out", "b", "--emit-plots", "--seed", "5", "--tol", "1e-10"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let svg = fs::read_to_string(dir.path().join("b/sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("h_f"));
    let r = report(dir.path(), "b");
    assert_eq!(r["config"]["solver"]["seed"], 5);
    assert_eq!(r["config"]["solver"]["tol"], 1e-10);
    let echoed = fs::read_to_string(dir.path().join("b/config.toml")).unwrap();
    assert!(echoed.contains("seed = 5"));
}

#[test]
fn sweep_is_reproducible_across_thread_counts() {
    let dir = with_config(&SWEEP.replace("length = 12", "length = 8"));
    run(&["sweep", "--config", "run.toml", "--out", "x"], dir.path());
    let single = Command::new(env!("CARGO_BIN_EXE_spin-ent"))
        .args(["sweep", "--config", "run.toml", "--out", "y"])
        .current_dir(dir.path())
        .env("SPIN_ENT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(single.status.code(), Some(0));
    let a = fs::read(dir.path().join("x/rows.csv")).unwrap();
    let b = fs::read(dir.path().join("y/rows.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_errors_exit_2() {
    let dir = with_config(&SWEEP.replace("step = 0.1", "step = 0.0"));
    let out = run(&["sweep", "--config", "run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step"));

    let out = run(&["sweep", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let bad_threads = Command::new(env!("CARGO_BIN_EXE_spin-ent"))
        .args(["sweep", "--config", "run.toml"])
        .current_dir(dir.path())
        .env("SPIN_ENT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn factorize_chain_is_certified() {
    let dir = with_config(
        "[lattice]\nkind = \"chain\"\nlength = 10\n[model]\ndelta_y = 0.25\n[bracket]\nlo = 1.0\nhi = 2.5\n",
    );
    let out = run(&["factorize", "--config", "run.toml", "--out", "f"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "f");
    assert_eq!(r["certified"], true);
    assert!((r["h_f_estimate"].as_f64().unwrap() - 1.58114).abs() < 1e-5);
    assert!(r["overlap_with_ansatz"].as_f64().unwrap() >= 1.0 - 1e-9);
}

#[test]
fn factorize_ladder_has_no_overlap() {
    let dir = with_config("[lattice]\nkind = \"ladder\"\nlength = 4\n[bracket]\nlo = 1.5\nhi = 3.0\n");
    let out = run(&["factorize", "--config", "run.toml", "--out", "f"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "f");
    assert_eq!(r["certified"], true);
    assert!(r.get("overlap_with_ansatz").is_none());
    assert!(r["tau1_at_min"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn factorize_outside_bracket_is_not_certified() {
    let dir = with_config(
        "[lattice]\nkind = \"chain\"\nlength = 8\n[model]\ndelta_y = 0.25\n[bracket]\nlo = 2.0\nhi = 3.0\n",
    );
    let out = run(&["factorize", "--config", "run.toml", "--out", "f"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    let r = report(dir.path(), "f");
    assert_eq!(r["certified"], false);
    assert!(r["reason"].is_string());
}

#[test]
fn critical_reports_dip() {
    let dir = with_config(
        "[lattice]\nkind = \"chain\"\nlength = 12\n[model]\ndelta_y = 0.25\n[grid]\nstart = 1.62\nstop = 2.2\nstep = 0.02\n",
    );
    let out = run(&["critical", "--config", "run.toml", "--out", "c"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "c");
    assert_eq!(r["inconclusive"], false);
    let h_c = r["h_c_estimate"].as_f64().unwrap();
    assert!(h_c > 1.62 && h_c < 2.2);
    assert!(r["R_min"].as_f64().unwrap() > 0.0);
    assert!(r["magnetization_inflection"].is_number());
}

#[test]
fn critical_monotone_ratio_is_inconclusive() {
    // on L = 10 the ratio keeps falling up to the end of the window
    let dir = with_config(
        "[lattice]\nkind = \"chain\"\nlength = 10\n[model]\ndelta_y = 0.25\n[grid]\nstart = 1.62\nstop = 2.2\nstep = 0.02\n",
    );
    let out = run(&["critical", "--config", "run.toml", "--out", "c"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(report(dir.path(), "c")["inconclusive"], true);
}

#[test]
fn oracle_check_passes() {
    for (l, dy) in [(12, 0.0), (10, 0.5)] {
        let dir = with_config(&format!(
            "[lattice]\nkind = \"chain\"\nlength = {l}\n[model]\ndelta_y = {dy}\ndelta_z = 0.0\n[grid]\nvalues = [0.2, 0.6, 1.0, 1.4]\n"
        ));
        let out = run(&["oracle-check", "--config", "run.toml", "--out", "o"], dir.path());
        assert_eq!(out.status.code(), Some(0));
        let r = report(dir.path(), "o");
        assert_eq!(r["pass"], true);
        assert_eq!(r["rows"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn oracle_check_needs_xy_model() {
    let dir = with_config("[lattice]\nkind = \"chain\"\nlength = 8\n[model]\ndelta_z = 1.0\n[grid]\nvalues = [0.5]\n");
    let out = run(&["oracle-check", "--config", "run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("oracle requires Δ_z = 0"));
}
