use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::{dmatrix, dvector};
use paramstate::behavior::Trajectory;
use paramstate::numerics::Matrix;
use paramstate::plant::{generate_excitation, StateSpace};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_paramstate"))
}

fn plant_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn assert_ok(out: &Output) {
    assert!(out.status.success(), "failed: {}{}", stdout(out), stderr(out));
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

fn write_traj(path: &Path, traj: &Trajectory) {
    fs::write(path, traj.to_csv_string()).unwrap();
}

fn autonomous_scalar(a: f64) -> Trajectory {
    let y = Matrix::from_fn(1, 12, |_, k| a.powi(k as i32));
    Trajectory::from_io(&Matrix::zeros(0, 12), &y, 0).unwrap()
}

#[test]
fn full_pipeline_stabilizes_benchmark() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    for cmd in ["collect", "analyze", "synthesize", "simulate"] {
        assert_ok(&run(p, &[cmd]));
    }
    assert_eq!(data_rows(&p.join("data.csv")), 401);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(p.join("closed_loop.json")).unwrap()).unwrap();
    let ratio = summary["summary"]["ratio"].as_f64().expect("ratio field");
    assert!(ratio < 1e-6, "ratio {ratio}");
    assert!(fs::read_to_string(p.join("closed_loop.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        for cmd in ["collect", "synthesize", "simulate"] {
            assert_ok(&run(p, &[cmd]));
        }
        let files: Vec<Vec<u8>> = ["data.csv", "controller.json", "closed_loop.csv", "closed_loop.svg"]
            .iter()
            .map(|f| fs::read(p.join(f)).unwrap())
            .collect();
        snapshots.push(files);
    }
    assert_eq!(snapshots[0], snapshots[1]);
}

#[test]
fn explicit_plant_file_matches_builtin() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    assert_ok(&run(p, &["collect", "--out", "a"]));
    let plant = plant_file("plant_2x2.json");
    assert_ok(&run(p, &["collect", "--out", "b", "--plant", plant.to_str().unwrap()]));
    assert_eq!(fs::read(p.join("a/data.csv")).unwrap(), fs::read(p.join("b/data.csv")).unwrap());
}

#[test]
fn short_horizon_gives_lag_plus_two_rows() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    assert_ok(&run(p, &["collect"]));
    assert_ok(&run(p, &["synthesize"]));
    assert_ok(&run(p, &["simulate", "--horizon", "1"]));
    assert_eq!(data_rows(&p.join("closed_loop.csv")), 8 + 2);
}

#[test]
fn zero_amplitude_gives_flat_traces_and_warns() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let out = run(p, &["collect", "--amplitude", "0"]);
    assert_ok(&out);
    assert!(stderr(&out).contains("amplitude is 0"));
    // controller from informative data, then a zero initial window
    assert_ok(&run(p, &["collect", "--out", "rich"]));
    assert_ok(&run(p, &["synthesize", "--data", "rich/data.csv"]));
    assert_ok(&run(p, &["simulate", "--amplitude", "0"]));
    let csv = fs::read_to_string(p.join("closed_loop.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert!(line.split(',').skip(1).all(|x| x.parse::<f64>().unwrap() == 0.0), "{line}");
    }
}

#[test]
fn invalid_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["collect", "-L", "8", "-T", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error:"));
    assert!(!dir.path().join("data.csv").exists());

    fs::write(dir.path().join("cfg.json"), r#"{"lag": 4, "unknown": 1}"#).unwrap();
    let out = run(dir.path(), &["collect", "--config", "cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_data_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["analyze"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("data.csv"));
}

#[test]
fn malformed_csv_names_row() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    assert_ok(&run(p, &["collect"]));
    let text = fs::read_to_string(p.join("data.csv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[5] = "4,0.1,oops,0.2,0.3".into();
    fs::write(p.join("data.csv"), lines.join("\n")).unwrap();
    let out = run(p, &["analyze"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("row 6") && err.contains("u2"), "{err}");
    assert!(!p.join("analysis.json").exists());
}

#[test]
fn autonomous_scalar_stability_from_csv() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    for (a, stable) in [(0.5, true), (1.5, false)] {
        write_traj(&p.join("auto.csv"), &autonomous_scalar(a));
        let out = run(p, &["analyze", "--data", "auto.csv", "-L", "2"]);
        assert_ok(&out);
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(p.join("analysis.json")).unwrap()).unwrap();
        assert_eq!(report["autonomous"], true);
        assert_eq!(report["stable"], stable, "a = {a}");
        assert!((report["spectral_radius"].as_f64().unwrap() - a).abs() < 1e-8);
        assert_eq!(report["certificate_m"].is_null(), !stable);
    }
    // nothing to control
    let out = run(p, &["synthesize", "--data", "auto.csv", "-L", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unstabilizable_data_exits_3() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let plant = StateSpace::new(
        dmatrix![0.5, 0.0; 0.0, 2.0],
        dmatrix![1.0; 0.0],
        Matrix::identity(2, 2),
        Matrix::zeros(2, 1),
    )
    .unwrap();
    let traj = plant
        .simulate(&generate_excitation(1, 16, 5, 1.0), &dvector![0.0, 1.0])
        .unwrap()
        .trajectory;
    write_traj(&p.join("bad.csv"), &traj);
    let analyze = run(p, &["analyze", "--data", "bad.csv", "-L", "2"]);
    assert_ok(&analyze);
    let out = run(p, &["synthesize", "--data", "bad.csv", "-L", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("2.000000"), "{}", stderr(&out));
    assert!(!p.join("controller.json").exists());
}

#[test]
fn controller_plant_mismatch_names_both_shapes() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    assert_ok(&run(p, &["collect"]));
    assert_ok(&run(p, &["synthesize"]));
    let scalar = plant_file("plant_scalar.json");
    let out = run(p, &["simulate", "--plant", scalar.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("2 inputs x 2 outputs") && err.contains("1 inputs x 1 outputs"), "{err}");
    assert!(!p.join("closed_loop.csv").exists());
}

#[test]
fn scalar_plant_pipeline() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let scalar = plant_file("plant_scalar.json");
    let s = scalar.to_str().unwrap();
    for cmd in ["collect", "synthesize", "simulate"] {
        assert_ok(&run(p, &[cmd, "--plant", s, "-L", "2", "-T", "40"]));
    }
    assert!(stdout(&run(p, &["analyze", "--plant", s, "-L", "2", "-T", "40"])).contains("rank"));
}
