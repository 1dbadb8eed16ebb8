//! End-to-end behavior of the `springhop` binary: exit codes, output files,
//! and byte-level determinism of repeated runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use springhop::config::{parse_config_file, write_config};

fn repo_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/paper_biped.toml")
}

fn springhop(args: &[&str], out_dir: &Path) -> Output {
    let config = repo_config();
    Command::new(env!("CARGO_BIN_EXE_springhop"))
        .args(["--config", config.to_str().unwrap()])
        .args(["--out", out_dir.to_str().unwrap()])
        .args(args)
        .output()
        .expect("binary should launch")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process should exit, not signal")
}

fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn sim_writes_trajectory_events_and_chart() {
    let dir = tempfile::tempdir().unwrap();
    let out = springhop(&["sim"], dir.path());
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let trajectory = fs::read_to_string(dir.path().join("reference_trajectory.csv")).unwrap();
    assert!(trajectory.starts_with(
        "t_s,x_b_m,z_b_m,vz_b_m_s,alpha1_deg,alpha2_deg,tau1_Nm,tau2_Nm,spring_N,contact_N,phase\n"
    ));
    assert!(trajectory.lines().count() > 100, "trajectory should be sampled densely");
    let events = fs::read_to_string(dir.path().join("reference_events.csv")).unwrap();
    assert!(events.starts_with("event,t_s,z_b_m\n"));
    assert!(events.contains("liftoff"));
    assert!(events.contains("apex"));
    let chart = fs::read_to_string(dir.path().join("reference_height.svg")).unwrap();
    assert!(chart.starts_with("<svg"));
}

#[test]
fn csv_only_suppresses_chart_rendering() {
    let dir = tempfile::tempdir().unwrap();
    let out = springhop(&["--csv-only", "sim"], dir.path());
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    assert!(dir.path().join("reference_trajectory.csv").exists());
    assert!(!dir.path().join("reference_height.svg").exists());
}

#[test]
fn builtin_config_fallback_works_from_any_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_springhop"))
        .current_dir(dir.path())
        .args(["--out", dir.path().join("o").to_str().unwrap()])
        .args(["--csv-only", "sim"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    assert!(dir.path().join("o/reference_trajectory.csv").exists());
}

#[test]
fn missing_config_file_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_springhop"))
        .args(["--config", "/nonexistent/config.toml"])
        .args(["--out", dir.path().to_str().unwrap()])
        .arg("sim")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_text(&out).contains("config parse"));
}

#[test]
fn malformed_toml_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "geometry = [unclosed\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_springhop"))
        .args(["--config", bad.to_str().unwrap()])
        .args(["--out", dir.path().to_str().unwrap()])
        .arg("sim")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_text(&out).contains("config parse"));
}

#[test]
fn asymmetric_links_exit_with_invariant_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(repo_config())
        .unwrap()
        .replace("l2_m = 0.18", "l2_m = 0.19");
    let bad = dir.path().join("asym.toml");
    fs::write(&bad, text).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_springhop"))
        .args(["--config", bad.to_str().unwrap()])
        .args(["--out", dir.path().to_str().unwrap()])
        .arg("sim")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    let err = stderr_text(&out);
    assert!(err.contains("config invariant"), "stderr: {err}");
    assert!(err.contains("symmetry"), "stderr: {err}");
}

#[test]
fn unknown_gravity_spelling_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = springhop(&["--gravity", "venus", "sim"], dir.path());
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn unknown_scenario_name_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = springhop(&["sim", "--scenario", "nope"], dir.path());
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_text(&out).contains("nope"));
}

#[test]
fn infeasible_design_search_exits_with_code_four() {
    let dir = tempfile::tempdir().unwrap();
    let mut file = parse_config_file(&fs::read_to_string(repo_config()).unwrap()).unwrap();
    file.motor.max_torque_Nm = 0.5; // far too weak to hold any squat
    file.scenario.clear(); // scenarios would fail saturation validation
    let weak = dir.path().join("weak.toml");
    fs::write(&weak, write_config(&file)).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_springhop"))
        .args(["--config", weak.to_str().unwrap()])
        .args(["--out", dir.path().join("o").to_str().unwrap()])
        .args(["optimize", "--coarse"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 4, "stderr: {}", stderr_text(&out));
    assert!(stderr_text(&out).contains("no feasible design"));
}

#[test]
fn repeated_suite_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out_dir in [&a, &b] {
        let out = springhop(&["suite", "fig8_experiments"], out_dir);
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    }
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.contains(&"fig8_experiments_summary.csv".to_string()));
    assert!(names.len() >= 9, "4 scenarios x 2 files + summary, got {names:?}");
    for name in &names {
        let first = fs::read(a.join(name)).unwrap();
        let second = fs::read(b.join(name)).unwrap();
        assert_eq!(first, second, "{name} differs between identical runs");
    }
}

#[test]
fn statics_sweep_writes_the_torque_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = springhop(&["statics"], dir.path());
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let csv = fs::read_to_string(dir.path().join("statics.csv")).unwrap();
    assert!(csv.starts_with("alpha_deg,tau1_Nm,tau2_Nm,spring_N\n"));
    assert_eq!(csv.lines().count(), 242, "0..120 deg at 0.5 deg steps plus header");
}

#[test]
fn workspace_sweep_writes_the_point_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let out = springhop(&["workspace", "--increment-deg", "10"], dir.path());
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let csv = fs::read_to_string(dir.path().join("workspace.csv")).unwrap();
    assert!(csv.starts_with("hip_deg,x_m,y_m,z_m\n"));
    assert!(csv.lines().count() > 100);
}

#[test]
fn calibrate_writes_a_roundtrippable_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = springhop(&["calibrate", "--target", "1.141"], dir.path());
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let text = fs::read_to_string(dir.path().join("calibrated.toml")).unwrap();
    let file = parse_config_file(&text).expect("calibrated config should parse");
    file.validate().expect("calibrated config should validate");
    let damping = file.motor.viscous_damping_Nms;
    assert!((0.2..0.5).contains(&damping), "implausible damping {damping}");
}
