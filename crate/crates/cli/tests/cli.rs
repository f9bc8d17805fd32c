//! End-to-end checks of the command-line surface: exit codes, artifact
//! formats, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_swheg")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .env("SWHEG_OUT_DIR", dir)
        .args(args)
        .output()
        .expect("spawn swheg")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("swheg-cli-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn unknown_subcommand_exits_2_with_usage() {
    let out = Command::new(bin()).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage"), "stderr was: {err}");
}

#[test]
fn runtime_errors_emit_json_on_stderr() {
    let dir = temp_dir("err");
    let out = run_in(&dir, &["sim-stairs", "--robot", "no_such_bot", "--height", "0.01", "--depth", "0.2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    let parsed: serde_json::Value = serde_json::from_str(err.trim()).expect("stderr is JSON");
    assert!(parsed["error"].as_str().unwrap().contains("no_such_bot"));
}

#[test]
fn transform_map_is_monotone_and_deterministic() {
    let dir = temp_dir("tmap");
    let out = run_in(&dir, &["transform-map", "--samples", "60"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read_to_string(dir.join("transform_map.csv")).unwrap();

    let header = first.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "angle_rad,dist_bc_m,dist_od_m,singular_flag");
    assert!(first.starts_with("# tool=swheg-cli"));

    let mut last = f64::MIN;
    for line in first.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let dist: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(dist > last, "dist_bc must grow monotonically");
        last = dist;
    }

    // Byte-identical on a second run.
    let out = run_in(&dir, &["transform-map", "--samples", "60"]);
    assert!(out.status.success());
    let second = std::fs::read_to_string(dir.join("transform_map.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn scenario_round_trips_through_sim_and_metrics() {
    let dir = temp_dir("scenario");
    let scenario = dir.join("scenario.toml");
    std::fs::write(
        &scenario,
        r#"
robot = "quad_swheg"
duration = 2.0
dt = "2 ms"
seed = 3

[terrain]
kind = "flat"
surface = "flat"
friction_mu = 0.8
rolling_resistance = 0.01

[mode]
kind = "wheeled"
v = 0.4
"#,
    )
    .unwrap();
    let out = run_in(&dir, &["sim-step", "--scenario", scenario.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace_path = dir.join("trace.csv");
    let text = std::fs::read_to_string(&trace_path).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    for unit in ["t_s", "x_m", "pitch_rad", "cum_work_j"] {
        assert!(header.contains(unit));
    }

    let out = run_in(&dir, &["metrics", "--trace", trace_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("metrics.json")).unwrap()).unwrap();
    let v = report["average_speed_m_per_s"].as_f64().unwrap();
    assert!((v - 0.4).abs() < 0.01, "speed {v}");
    assert!(report["specific_resistance"].as_f64().unwrap() > 0.0);
}

#[test]
fn invalid_scenario_reports_every_violation() {
    let dir = temp_dir("badscn");
    let scenario = dir.join("bad.toml");
    std::fs::write(
        &scenario,
        r#"
robot = "quad_swheg"
duration = -1.0
dt = 0.5
seed = 3

[terrain]
kind = "step"
height = -0.02
surface = "flat"
friction_mu = 0.8
rolling_resistance = 0.01

[mode]
kind = "wheeled"
v = 0.4
"#,
    )
    .unwrap();
    let out = run_in(&dir, &["sim-step", "--scenario", scenario.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    for needle in ["dt", "duration", "height"] {
        assert!(err.contains(needle), "missing '{needle}' in {err}");
    }
}

#[test]
fn small_design_search_writes_ranked_candidates() {
    let dir = temp_dir("design");
    let out = run_in(&dir, &["design-search", "--budget", "400", "--seed", "42", "--top", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("design_candidates.json")).unwrap())
            .unwrap();
    assert!(json["feasible"].as_u64().unwrap() >= 1);
    let canonical = std::fs::read_to_string(dir.join("canonical_linkage.toml")).unwrap();
    assert!(canonical.contains("l_ab"));
}

#[test]
fn gait_plot_emits_csv_and_svg() {
    let dir = temp_dir("gait");
    let out = run_in(&dir, &["gait-plot", "--gait", "trot", "--legs", "4", "--period", "2.5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("gait_trajectories.csv")).unwrap();
    assert!(csv.lines().any(|l| l.contains(",RF,")));
    assert!(csv.lines().any(|l| l.contains("stance") || l.contains("flight")));
    let svg = std::fs::read_to_string(dir.join("gait_diagram.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn tiny_soz_sweep_has_grid_and_heatmap() {
    let dir = temp_dir("soz");
    let out = run_in(
        &dir,
        &["sweep-soz", "--grid", "2x2", "--modes", "wheeled", "--max-height", "0.02", "--max-depth", "0.4"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("soz_map.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.starts_with("wheeled")).count(), 4);
    assert!(dir.join("soz_map.svg").exists());
}
