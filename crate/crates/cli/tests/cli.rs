use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use leeway::forcefield::SyntheticField;
use leeway::geo::{Frame, GeoPoint, Vec2};
use leeway::io::mission::{write_missions, Coordinates, MissionSet};
use leeway::io::sensor_log::{write_sensor_log, SensorLog};
use leeway::vessel::{run_mission, Environment, Mission, PidGains, RunSetup, SensorModel, VesselParams, Waypoint};
use tempfile::TempDir;

fn leeway(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leeway"))
        .args(args)
        .current_dir(dir)
        .env("LEEWAY_LOG_LEVEL", "error")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = leeway(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn origin() -> GeoPoint {
    GeoPoint::new(34.0, -81.0).unwrap()
}

fn write_leg(dir: &Path, name: &str, to: Vec2) -> PathBuf {
    let mut set = MissionSet::single(Mission::new(Vec2::ZERO, vec![Waypoint::new(to, 3.0)]));
    set.origin = Some(origin());
    let path = dir.join(name);
    write_missions(&path, &set, Coordinates::Local).unwrap();
    path
}

/// Sensor log of a hull flying a square through a uniform current.
fn write_survey(dir: &Path) -> PathBuf {
    let mission = Mission::new(
        Vec2::ZERO,
        vec![
            Waypoint::new(Vec2::new(120.0, 0.0), 2.5),
            Waypoint::new(Vec2::new(120.0, 120.0), 2.5),
            Waypoint::new(Vec2::new(0.0, 120.0), 2.5),
            Waypoint::new(Vec2::ZERO, 2.5),
        ],
    );
    let wind = SyntheticField::uniform(Vec2::new(3.0, 1.0));
    let current = SyntheticField::uniform(Vec2::new(0.0, 0.5));
    let setup = RunSetup {
        gains: PidGains::default(),
        params: VesselParams::default(),
        env: Environment::new(&wind, &current),
        dt: 0.1,
        sensors: SensorModel::ideal(),
    };
    let log = run_mission(&mission, setup, None).unwrap();
    let sensors = SensorLog::from_trajectory(&log, Frame::new(origin()).unwrap(), 20).unwrap();
    let path = dir.join("survey.csv");
    write_sensor_log(&path, &sensors).unwrap();
    path
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn zero_field_simulate_then_metrics() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write_leg(d, "leg.json", Vec2::new(150.0, 80.0));
    fs::write(d.join("zero.toml"), "dt = 0.1\n").unwrap();
    ok(d, &["simulate", "--mission", "leg.json", "--config", "zero.toml", "--out", "run.csv", "--geojson", "run.geojson"]);
    let text = ok(d, &["metrics", "--log", "run.csv", "--mission", "leg.json"]);
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["completion"], true);
    assert!(m["max_cross_track"].as_f64().unwrap() < 0.5, "{m}");
    let geo: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("run.geojson")).unwrap()).unwrap();
    assert_eq!(geo["features"].as_array().unwrap().len(), 2);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let out = leeway(tmp.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[usage]:"));
}

#[test]
fn missing_spacing_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(
        d.join("river.json"),
        r#"{"region":{"kind":"river","centerline":[{"x":0,"y":0},{"x":500,"y":0}],"width_m":30}}"#,
    )
    .unwrap();
    let out = leeway(d, &["plan", "--pattern", "l", "--region", "river.json", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--spacing"));
}

#[test]
fn domain_errors_exit_one_with_code() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let out = leeway(d, &["metrics", "--log", "absent.csv", "--mission", "absent.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[io]:"));

    fs::write(d.join("bad.csv"), "t_s,y_m\n0,0\n").unwrap();
    write_leg(d, "leg.json", Vec2::new(100.0, 0.0));
    let out = leeway(d, &["metrics", "--log", "bad.csv", "--mission", "leg.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[parse]:"), "{}", stderr(&out));
}

#[test]
fn compare_rejects_logs_of_another_mission() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write_leg(d, "a.json", Vec2::new(100.0, 0.0));
    write_leg(d, "b.json", Vec2::new(0.0, 100.0));
    fs::write(d.join("zero.toml"), "").unwrap();
    ok(d, &["simulate", "--mission", "a.json", "--config", "zero.toml", "--out", "a.csv"]);
    let out = leeway(d, &["compare", "--baseline", "a.csv", "--augmented", "a.csv", "--mission", "b.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[metrics]:"), "{}", stderr(&out));
}

#[test]
fn plan_patterns_write_mission_files() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(
        d.join("lake.json"),
        r#"{"origin":{"lat":34.0,"lon":-81.0},"region":{"kind":"lake","boundary":[{"x":0,"y":0},{"x":100,"y":0},{"x":100,"y":100},{"x":0,"y":100}],"starts":[{"x":0,"y":0},{"x":100,"y":100}]}}"#,
    )
    .unwrap();
    fs::write(
        d.join("river.json"),
        r#"{"region":{"kind":"river","centerline":[{"x":0,"y":0},{"x":500,"y":0}],"width_m":30}}"#,
    )
    .unwrap();
    fs::write(d.join("star.json"), r#"{"region":{"kind":"star","center":{"x":0,"y":0},"radius_m":200}}"#).unwrap();
    let count = |name: &str| -> usize {
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join(name)).unwrap()).unwrap();
        v["missions"].as_array().unwrap().len()
    };
    ok(d, &["plan", "--pattern", "boustrophedon", "--region", "lake.json", "--spacing", "10", "--robots", "2", "--coords", "geo", "--out", "b.json"]);
    assert_eq!(count("b.json"), 2);
    // the zigzag is one continuous lane, so it cannot be shared
    for (p, robots) in [("l", 3), ("t", 3), ("z", 1)] {
        ok(d, &["plan", "--pattern", p, "--region", "river.json", "--spacing", "10", "--robots", "3", "--out", "r.json"]);
        assert_eq!(count("r.json"), robots, "{p}");
    }
    ok(d, &["plan", "--pattern", "star", "--region", "star.json", "--speed", "3", "--out", "s.json"]);
    assert_eq!(count("s.json"), 8);
    let out = leeway(d, &["plan", "--pattern", "star", "--region", "lake.json", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(1));
}

/// fit-field, train-model and an augmented simulate, each run twice.
#[test]
fn pipeline_outputs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write_survey(d);
    for v in ["2", "3"] {
        fs::write(
            d.join(format!("train{v}.json")),
            format!(
                r#"{{"schema":"leeway-mission/1","coordinates":"local","missions":[{{"robot":0,"acceptance_radius_m":3.0,"start":{{"x":0,"y":0}},"waypoints":[{{"x":150,"y":0,"speed_mps":{v}}},{{"x":150,"y":150,"speed_mps":{v}}}]}}]}}"#
            ),
        )
        .unwrap();
    }
    fs::write(
        d.join("truth.toml"),
        "seed = 3\n[current]\nkind = \"uniform\"\nv = { x = 0.0, y = 0.8 }\n[sensors]\ncurrent_std_mps = 0.05\n",
    )
    .unwrap();
    fs::write(
        d.join("aug.toml"),
        "seed = 3\nmodel = \"model.json\"\n[current]\nkind = \"uniform\"\nv = { x = 0.0, y = 0.8 }\n[sensors]\ncurrent_std_mps = 0.05\n",
    )
    .unwrap();
    write_leg(d, "leg.json", Vec2::new(200.0, 0.0));

    let mut runs = Vec::new();
    for round in 0..2 {
        ok(d, &["fit-field", "--log", "survey.csv", "--source", "current", "--out", "map.json"]);
        for v in ["2", "3"] {
            let (m, t) = (format!("train{v}.json"), format!("train{v}.csv"));
            ok(d, &["simulate", "--mission", &m, "--config", "truth.toml", "--out", &t]);
        }
        let summary = ok(
            d,
            &["train-model", "--trajectory", "train2.csv", "--trajectory", "train3.csv", "--mission", "train2.json", "--mission", "train3.json", "--out", "model.json"],
        );
        assert!(summary.contains("rms residual"), "{summary}");
        ok(d, &["simulate", "--mission", "leg.json", "--config", "aug.toml", "--augment", "--out", "aug.csv"]);
        let files: Vec<Vec<u8>> = ["map.json", "map.grid.csv", "train2.csv", "train3.csv", "model.json", "aug.csv"]
            .iter()
            .map(|f| fs::read(d.join(f)).unwrap())
            .collect();
        runs.push(files);
        if round == 0 {
            let grid = fs::read_to_string(d.join("map.grid.csv")).unwrap();
            assert!(grid.lines().count() > 10);
        }
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn star_scenario_reports_reduction_and_compares() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let text = ok(d, &["scenario", "star", "--out", "star"]);
    let line = text.lines().find(|l| l.starts_with("mean max cross-track reduction")).unwrap();
    let pct: f64 = line.split_whitespace().nth(4).unwrap().trim_end_matches('%').parse().unwrap();
    assert!(pct >= 40.0, "{line}");

    let report = ok(
        d,
        &["compare", "--baseline", "star/baseline_0.csv", "--augmented", "star/augmented_0.csv", "--mission", "star/missions.json", "--robot", "0", "--json"],
    );
    let r: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(r["max_cross_track"]["reduction"].as_f64().unwrap() > 0.4, "{r}");
}
