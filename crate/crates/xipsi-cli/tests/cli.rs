//! End-to-end tests of the binary: exit codes, JSON summaries and file
//! outputs.

use std::path::Path;
use std::process::{Command, Output};

fn xipsi(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xipsi"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn measures_frechet_descriptor() {
    let dir = tempfile::tempdir().unwrap();
    let out = xipsi(
        &["measures", r#"{"family":"frechet","w_pi":0.5,"w_m":0.5}"#],
        dir.path(),
    );
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["xi"], 0.25);
    assert_eq!(v["psi"], 0.5);
    assert_eq!(v["method"], "exact");
}

#[test]
fn measures_checkerboard_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = xipsi(
        &["measures", r#"{"family":"checkerboard","delta":[[0,0.5],[0.5,0]]}"#],
        dir.path(),
    );
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["xi"], 0.5);
    assert_eq!(v["psi"], -0.5);
}

#[test]
fn measures_grid_csv_of_independence() {
    let dir = tempfile::tempdir().unwrap();
    let g = xipsi::gridcop::GridCopula::from_partial(|_, v| v, 100, None).unwrap();
    let path = dir.path().join("pi.csv");
    g.write_csv_path(&path).unwrap();
    let out = xipsi(&["measures", path.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!(v["xi"].as_f64().unwrap().abs() <= 1e-3);
    assert!(v["psi"].as_f64().unwrap().abs() <= 0.02);
    assert_eq!(v["method"], "grid");
}

#[test]
fn measures_malformed_descriptor_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = xipsi(&["measures", r#"{"family":"martian"}"#], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn measures_infeasible_grid_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    // constant columns cannot satisfy the column-mean constraint
    let mut text = String::from("# gridcop n=4\n");
    for _ in 0..4 {
        text.push_str("0.9,0.9,0.9,0.9\n");
    }
    std::fs::write(&path, text).unwrap();
    let out = xipsi(&["measures", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn boundary_writes_curve_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = xipsi(
        &["boundary", "--curve", "upper", "--samples", "3", "--out", "upper.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("upper.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "param,xi,psi");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0.00000000000000e0"));
    assert!(lines[3].starts_with("1.00000000000000e0,1.00000000000000e0"));
}

#[test]
fn boundary_rejects_unknown_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = xipsi(
        &["boundary", "--curve", "bogus", "--samples", "3", "--out", "x.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn region_check_boundary_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = xipsi(&["region-check", "--xi", "0.25", "--psi", "0.5"], dir.path());
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["in_upper"], true);
    assert!(v["margin_upper"].as_f64().unwrap().abs() <= 1e-12);
    let out = xipsi(&["region-check", "--xi", "0.1", "--psi", "0.5"], dir.path());
    let v = stdout_json(&out);
    assert_eq!(v["in_upper"], false);
}

#[test]
fn optimize_writes_files_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = xipsi(
        &["optimize", "--mu", "0", "--n", "32", "--out", "run"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!(v["xi"].as_f64().unwrap().abs() <= 1e-3);
    assert!(v["psi"].as_f64().unwrap().abs() <= 1e-3);
    assert_eq!(v["converged"], true);
    for suffix in ["run.h.csv", "run.density.pgm", "run.density.csv", "run.log.csv", "run.summary.json"] {
        assert!(dir.path().join(suffix).exists(), "{suffix} missing");
    }
    // the written field is a loadable, feasible grid
    let g = xipsi::gridcop::GridCopula::read_csv_path(&dir.path().join("run.h.csv")).unwrap();
    assert_eq!(g.n(), 32);
    // PGM header sanity
    let pgm = std::fs::read_to_string(dir.path().join("run.density.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n32 32\n255\n"));
    let log = std::fs::read_to_string(dir.path().join("run.log.csv")).unwrap();
    assert!(log.starts_with("iter,objective,feas_residual"));
}

#[test]
fn optimize_nonconvergence_exits_4_with_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = xipsi(
        &["optimize", "--mu", "1", "--n", "16", "--max-iters", "0", "--out", "stall"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(dir.path().join("stall.h.csv").exists());
    assert!(dir.path().join("stall.summary.json").exists());
}

#[test]
fn twoparam_reports_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let out = xipsi(
        &[
            "twoparam", "--alpha", "0.2", "--beta", "0.3", "--tol", "1e-5", "--out", "strip",
            "--density-n", "32",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!(v["xi"].as_f64().is_some());
    assert!(dir.path().join("strip.density.pgm").exists());
    assert!(dir.path().join("strip.density.csv").exists());
    assert!(dir.path().join("strip.density.pgm.json").exists());
}

#[test]
fn twoparam_requires_exactly_one_parameterization() {
    let dir = tempfile::tempdir().unwrap();
    let out = xipsi(&["twoparam", "--alpha", "0.2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_sets_grid_size() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"grid_n": 20}"#).unwrap();
    // gumbel theta=1 is exactly independence; a tiny grid suffices and the
    // config must be honored (a 20-cell grid reports n=20)
    let out = xipsi(
        &[
            "measures",
            r#"{"family":"gumbel","theta":1.0}"#,
            "--config",
            cfg.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["n"], 20.0);
    // flags take precedence over the config file
    let out = xipsi(
        &[
            "measures",
            r#"{"family":"gumbel","theta":1.0}"#,
            "--config",
            cfg.to_str().unwrap(),
            "--n",
            "24",
        ],
        dir.path(),
    );
    let v = stdout_json(&out);
    assert_eq!(v["n"], 24.0);
}

#[test]
fn table2_writes_csv_with_exact_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = xipsi(&["table2", "--n", "64", "--out", "t2.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("t2.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "family,parameter,xi,psi,value");
    assert_eq!(text.lines().count(), 9); // header + 8 families
    assert!(text.contains("lower_frechet,0.250000,0.062500,-0.125000,-0.062500"));
    assert!(text.contains("c_down,1.000000"));
    // the positively dependent families bottom out at independence
    assert!(text.contains("gumbel-hougaard,1.000000"));
    assert!(text.contains("joe,1.000000"));
}

#[test]
fn env_var_sets_threads() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_xipsi"))
        .args(["measures", r#"{"family":"frechet","w_pi":0.5,"w_m":0.5}"#])
        .env("XIPSI_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["xi"], 0.25);
}

#[test]
fn measures_csv_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = xipsi(
        &[
            "measures",
            r#"{"family":"frechet","w_pi":0.5,"w_m":0.5}"#,
            "--format",
            "csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "xi,psi,tau,method,n");
    assert!(lines.next().unwrap().starts_with("0.25,0.5,"));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"grid_n": 4}"#).unwrap();
    let out = xipsi(
        &["measures", r#"{"family":"gumbel","theta":1.0}"#, "--config", cfg.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}
