use std::path::Path;
use std::process::{Command, Output};

fn axiform(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_axiform")).args(args).current_dir(cwd).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn axis_run_writes_its_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"scene": "builtin:two-site", "points": [[0.75, 0.5]], "seed": 3}"#;
    std::fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    let o = axiform(&["axis", "--config", "cfg.json", "--out", "res"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let res = dir.path().join("res");
    for f in ["report.json", "axis_l0.75_a0.5.json", "axis_l0.75_a0.5.svg"] {
        assert!(res.join(f).exists(), "{f} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(res.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["seed"], 3);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"scene": "builtin:two-site", "points": [[0.75, 0.5]], "seed": 3}"#;
    std::fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    let o = axiform(&["axis", "--config", "cfg.json", "--seed", "11", "--out", "res"], dir.path());
    assert_eq!(code(&o), 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("res/report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 11);
}

#[test]
fn failed_assertion_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // near a site almost every point flows away from it, so chi is close to 1 there
    let cfg = r#"{
        "scene": "builtin:two-site",
        "samples_per_level": 400,
        "t_grid": [0.5, 1.0, 2.0],
        "chi_expect": [{"t": 0.5, "lo": 0.0, "hi": 0.01}]
    }"#;
    std::fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    let o = axiform(&["critfn", "--config", "cfg.json", "--out", "res"], dir.path());
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL chi(0.5) <= 0.01"));
    assert!(dir.path().join("res/chi.csv").exists());
}

#[test]
fn input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("unknown.json"), r#"{"scene": "builtin:two-site", "lamdas": [0.1]}"#).unwrap();
    std::fs::write(p.join("grid.json"), r#"{"scene": "builtin:two-site", "lambdas": [0.2, 0.1], "alphas": [0.5]}"#)
        .unwrap();
    std::fs::write(p.join("missing.json"), r#"{"scene": "nowhere.json", "points": [[0.5, 0.5]]}"#).unwrap();
    assert_eq!(code(&axiform(&["axis", "--config", "unknown.json"], p)), 3);
    assert_eq!(code(&axiform(&["sweep-lambda", "--config", "grid.json"], p)), 3);
    assert_eq!(code(&axiform(&["axis", "--config", "missing.json"], p)), 3);
    assert_eq!(code(&axiform(&["axis", "--config", "absent.json"], p)), 3);
    assert_eq!(code(&axiform(&["axis"], p)), 3);
    assert_eq!(code(&axiform(&["bogus", "--config", "x.json"], p)), 3);
}

#[test]
fn flow_from_a_scene_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("s.json"), r#"{"sites": [[1.0, 0.0], [-1.0, 0.0]], "bounding_radius": 10.0}"#).unwrap();
    let o = axiform(
        &["flow", "--scene", "s.json", "--start", "0.3,0.2", "--alpha", "0.5", "--horizon", "4", "--out", "f"],
        p,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(p.join("f/trajectory.csv")).unwrap();
    assert!(csv.lines().count() > 2);
    assert!(p.join("f/trajectory.svg").exists());
    assert_eq!(code(&axiform(&["flow", "--scene", "s.json", "--alpha", "0.5", "--horizon", "4"], p)), 3);
}

#[test]
fn bundled_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = axiform::experiments::ExperimentConfig::load(&path).unwrap();
        cfg.scene.resolve(Some(&dir)).unwrap();
        n += 1;
    }
    assert!(n >= 7);
}
