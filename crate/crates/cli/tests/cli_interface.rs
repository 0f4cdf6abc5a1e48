//! End-to-end checks of the binary: exit codes, manifests, determinism of
//! seeded reports, and the bundled example configurations.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lognls"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lognls-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn breather_command_writes_trajectory_and_manifest() {
    let dir = tmp_dir("breather");
    let cfg = write_cfg(&dir, "b.toml", "lambda = 1.0\nalpha_r = 1.0\nt_end = 5.0\n");
    let out = bin().args(["breather", "--config"]).arg(&cfg).arg("--out-dir").arg(&dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // manifest lists outputs that exist; the CSV has the mandated header and
    // a first integral that stays constant
    let run_dir = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .find(|e| e.file_name().to_string_lossy().starts_with("breather-"))
        .unwrap()
        .path();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("manifest.json")).unwrap()).unwrap();
    for out_name in manifest["outputs"].as_array().unwrap() {
        assert!(run_dir.join(out_name.as_str().unwrap()).exists());
    }
    let csv = std::fs::read_to_string(run_dir.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,r,rdot,phi,first_integral");
    let h: Vec<f64> = lines
        .map(|l| l.split(',').nth(4).unwrap().parse::<f64>().unwrap())
        .collect();
    let h0 = h[0];
    assert!(h.iter().all(|&v| (v - h0).abs() < 1e-8), "first integral drifts");
}

#[test]
fn malformed_config_exits_2_naming_the_field() {
    let dir = tmp_dir("badcfg");
    let cfg = write_cfg(&dir, "bad.toml", "alpha_r = 1.0\nt_end = 5.0\n");
    let out = bin().args(["breather", "--config"]).arg(&cfg).arg("--out-dir").arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lambda"), "stderr does not name the field: {err}");
}

#[test]
fn overlapping_members_exit_3() {
    let dir = tmp_dir("overlap");
    let cfg = write_cfg(
        &dir,
        "overlap.toml",
        r#"
lambda = 1.0
t_n_list = [1.0]
t_obs = 0.0
sample_spacing = 0.25

[[members]]
x0 = [-0.5]
v = [0.1]

[[members]]
x0 = [0.5]
v = [-0.1]

[grid]
extent = 40.0
points_per_dim = 512

[solver]
dt = 1e-2
"#,
    );
    let out = bin()
        .args(["build-multisoliton", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn matrix_ode_fixed_point_trajectory() {
    let dir = tmp_dir("mode");
    let cfg = write_cfg(
        &dir,
        "m.toml",
        "lambda = 1.0\na_re = [[2.0]]\nt_end = 3.0\nsamples = 30\n",
    );
    let out = bin().args(["matrix-ode", "--config"]).arg(&cfg).arg("--out-dir").arg(&dir).output().unwrap();
    assert!(out.status.success());
    let run_dir = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .find(|e| e.file_name().to_string_lossy().starts_with("matrix-ode-"))
        .unwrap()
        .path();
    let csv = std::fs::read_to_string(run_dir.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,re_a_00,im_a_00,phi,det_ratio"));
    for line in csv.lines().skip(1) {
        let re_a: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((re_a - 2.0).abs() < 1e-12, "fixed point drifted: {re_a}");
    }
}

#[test]
fn seeded_reports_are_byte_identical() {
    let dir = tmp_dir("determinism");
    let run = || {
        let out = bin()
            .args(["verify-inequalities", "--samples", "2000", "--seed", "7"])
            .arg("--out-dir")
            .arg(&dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let run_dir = std::fs::read_dir(&dir)
            .unwrap()
            .filter_map(|e| e.ok())
            .find(|e| e.file_name().to_string_lossy().starts_with("verify-inequalities-"))
            .unwrap()
            .path();
        std::fs::read(run_dir.join("log_pair.json")).unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first, second, "reports differ between identical seeded runs");
}

#[test]
fn acceptance_only_flag_runs_single_criterion() {
    let dir = tmp_dir("only");
    let out = bin()
        .args(["acceptance", "--only", "1"])
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("criterion  1 [PASS]"), "{stdout}");
    assert_eq!(stdout.matches("criterion").count(), 1);

    let bad = bin().args(["acceptance", "--only", "99"]).arg("--out-dir").arg(&dir).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn bundled_two_gausson_config_produces_fit() {
    let dir = tmp_dir("bundled");
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/two_gaussons_1d.toml");
    let out = bin()
        .args(["build-multisoliton", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run_dir = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .find(|e| e.file_name().to_string_lossy().starts_with("build-multisoliton-"))
        .unwrap()
        .path();
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("fit.json")).unwrap()).unwrap();
    let c = fit["fit"]["c"].as_f64().expect("fit JSON has the quadratic coefficient");
    assert!(c < -0.5 && c > -1.5, "c = {c}");
    assert!(fit["floor"].as_f64().unwrap() > 0.0);
}

#[test]
fn localized_below_separation_window_exits_3() {
    let dir = tmp_dir("localized-gate");
    // t_ref too early: the bubbles of the crossing pair overlap
    let cfg = write_cfg(
        &dir,
        "loc.toml",
        r#"
t_ref = 9.0
window_start = 9.2
window_spacing = 0.1

[multisoliton]
lambda = 1.0
t_n_list = [10.0]
t_obs = 4.0
sample_spacing = 0.1
control_run = false

[[multisoliton.members]]
x0 = [-8.0]
v = [1.0]

[[multisoliton.members]]
x0 = [8.0]
v = [-1.0]

[multisoliton.grid]
extent = 40.0
points_per_dim = 256

[multisoliton.solver]
dt = 1e-3
"#,
    );
    let out = bin().args(["localized", "--config"]).arg(&cfg).arg("--out-dir").arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("overlap"));
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tmp_dir("envvar");
    let cfg = write_cfg(&dir, "b.toml", "lambda = 1.0\nalpha_r = 1.0\nt_end = 1.0\n");
    let out = bin()
        .args(["breather", "--config"])
        .arg(&cfg)
        .env("LOGNLS_OUT_DIR", &dir)
        .current_dir(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(
        std::fs::read_dir(&dir)
            .unwrap()
            .filter_map(|e| e.ok())
            .any(|e| e.file_name().to_string_lossy().starts_with("breather-")),
        "run directory not created under LOGNLS_OUT_DIR"
    );
}

#[test]
fn single_member_config_reports_floor_only() {
    let dir = tmp_dir("control");
    let cfg = write_cfg(
        &dir,
        "n1.toml",
        r#"
lambda = 1.0
t_n_list = [1.0]
t_obs = 0.0
sample_spacing = 0.1

[[members]]
x0 = [0.0]
v = [0.0]

[grid]
extent = 40.0
points_per_dim = 256

[solver]
dt = 1e-3
"#,
    );
    let out = bin().args(["build-multisoliton", "--config"]).arg(&cfg).arg("--out-dir").arg(&dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run_dir = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .find(|e| e.file_name().to_string_lossy().starts_with("build-multisoliton-"))
        .unwrap()
        .path();
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("fit.json")).unwrap()).unwrap();
    // a control run measures the floor; no meaningful decay fit exists
    assert!(fit["floor"].as_f64().unwrap() > 0.0);
    assert!(fit["fit"].is_null(), "unexpected fit on a pure control run: {}", fit["fit"]);
}
