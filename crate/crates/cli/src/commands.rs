use std::fs;
use std::path::{Path, PathBuf};

use leeway::config::{LoadedRun, RunConfig};
use leeway::coverage::{
    boustrophedon, l_cover, partition_area, split_path, star_pattern, t_cover, z_cover, CoveragePlan,
};
use leeway::displacement::{build_training_set, fit_linear, Coupling, FeatureSchema, TrainingOptions};
use leeway::forcefield::{fit_gp, fit_hyperparams, rasterize, ForceSource, GpHyperparams};
use leeway::geo::{Frame, GeoPoint, Vec2};
use leeway::io::geojson::write_geojson;
use leeway::io::map::{write_grid, write_map};
use leeway::io::mission::{read_missions, read_region, write_missions, Coordinates, MissionSet, PlanMetadata, RegionSpec};
use leeway::io::model::{write_model, write_training};
use leeway::io::sensor_log::read_sensor_log;
use leeway::io::trajectory::{read_trajectory, write_trajectory};
use leeway::metrics::{compare_runs, compute_metrics, ImprovementReport, PathMetrics};
use leeway::scenario::{OvershootScenario, StarScenario};
use leeway::vessel::{run_mission, Mission};

use crate::error::CliError;
use crate::{
    CompareArgs, CoordsArg, FitFieldArgs, MetricsArgs, PatternArg, PlanArgs, ScenarioArgs, ScenarioKind, SchemaArg,
    SimulateArgs, SourceArg, TrainModelArgs,
};

fn parse_origin(text: &str) -> Result<GeoPoint, CliError> {
    let bad = || CliError::usage(format!("origin must be `lat,lon`, got `{text}`"));
    let (lat, lon) = text.split_once(',').ok_or_else(bad)?;
    let lat: f64 = lat.trim().parse().map_err(|_| bad())?;
    let lon: f64 = lon.trim().parse().map_err(|_| bad())?;
    Ok(GeoPoint::new(lat, lon)?)
}

fn load_mission(path: &Path, robot: usize) -> Result<(MissionSet, Mission), CliError> {
    let set = read_missions(path)?;
    let mission = set.missions.get(robot).cloned().ok_or_else(|| {
        CliError::invalid(format!(
            "{}: no mission for robot {robot} ({} in file)",
            path.display(),
            set.missions.len()
        ))
    })?;
    Ok((set, mission))
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::usage(format!("--{name} must be positive, got {v}")))
    }
}

/// Signal scale, length scale and noise around the data-driven defaults,
/// chosen by marginal likelihood.
fn select_hyperparams(samples: &[leeway::forcefield::ForceSample]) -> Result<GpHyperparams, CliError> {
    let base = GpHyperparams::from_samples(samples)?;
    let mut grid = Vec::new();
    for l in [0.25, 0.5, 1.0, 2.0, 4.0] {
        for s in [0.5, 1.0, 2.0] {
            for n in [0.25, 1.0, 4.0] {
                grid.push(GpHyperparams::new(
                    base.signal_std * s,
                    base.length_scale * l,
                    base.noise_std * n,
                )?);
            }
        }
    }
    Ok(fit_hyperparams(samples, &grid)?)
}

pub fn fit_field(a: FitFieldArgs) -> Result<(), CliError> {
    let step = positive("grid-step", a.grid_step)?;
    if a.stride == 0 {
        return Err(CliError::usage("--stride must be at least 1"));
    }
    let origin = a.origin.as_deref().map(parse_origin).transpose()?;
    let log = read_sensor_log(&a.log, origin)?;
    let source = match a.source {
        SourceArg::Wind => ForceSource::Wind,
        SourceArg::Current => ForceSource::Current,
    };
    let samples: Vec<_> = log.force_samples(source).into_iter().step_by(a.stride).collect();
    log::info!("{} {source} samples, {} rows skipped", samples.len(), log.skipped);
    let hyper = select_hyperparams(&samples)?;
    let map = fit_gp(&samples, hyper)?;
    write_map(&a.out, &map)?;

    let (mut lo, mut hi) = (samples[0].position, samples[0].position);
    for s in &samples {
        lo = Vec2::new(lo.x.min(s.position.x), lo.y.min(s.position.y));
        hi = Vec2::new(hi.x.max(s.position.x), hi.y.max(s.position.y));
    }
    let grid_path = a.grid.unwrap_or_else(|| a.out.with_extension("grid.csv"));
    write_grid(&grid_path, &rasterize(&map, lo, hi, step))?;
    println!(
        "{source} map from {} samples ({} rows skipped): signal_std {:.4}, length_scale {:.2} m, noise_std {:.4}, log-likelihood {:.3}",
        samples.len(),
        log.skipped,
        hyper.signal_std,
        hyper.length_scale,
        hyper.noise_std,
        map.log_marginal_likelihood()
    );
    println!("wrote {} and {}", a.out.display(), grid_path.display());
    Ok(())
}

pub fn train_model(a: TrainModelArgs) -> Result<(), CliError> {
    let window = positive("window", a.window)?;
    let missions: Vec<PathBuf> = match a.mission.len() {
        1 => vec![a.mission[0].clone(); a.trajectory.len()],
        n if n == a.trajectory.len() => a.mission.clone(),
        n => {
            return Err(CliError::usage(format!(
                "{} trajectories need one shared mission or one mission each, got {n}",
                a.trajectory.len()
            )))
        }
    };
    let opts = TrainingOptions {
        window_s: window,
        ..TrainingOptions::default()
    };
    let mut samples = Vec::new();
    for (traj, mission_path) in a.trajectory.iter().zip(&missions) {
        let (_, mission) = load_mission(mission_path, a.robot)?;
        let log = read_trajectory(traj)?;
        let got = build_training_set(&log, &mission, &opts);
        log::info!("{}: {} windows", traj.display(), got.len());
        samples.extend(got);
    }
    let schema = match a.schema {
        SchemaArg::Combined => FeatureSchema::Combined,
        SchemaArg::Separate => FeatureSchema::Separate,
    };
    let coupling = Coupling::default();
    let model = fit_linear(&samples, schema, coupling, window)?;
    write_model(&a.out, &model)?;
    if let Some(path) = &a.samples_out {
        write_training(path, &samples, &coupling)?;
    }
    println!("fitted on {} windows: rms residual {:.4} m", samples.len(), model.fit_residual);
    for (name, row) in ["along", "cross"].iter().zip(&model.weights) {
        let terms: Vec<String> = schema.columns().iter().zip(row).map(|(c, w)| format!("{c} {w:+.4}")).collect();
        println!("  {name}: {}", terms.join(", "));
    }
    println!("wrote {}", a.out.display());
    Ok(())
}

pub fn plan(a: PlanArgs) -> Result<(), CliError> {
    let speed = positive("speed", a.speed)?;
    if a.robots == 0 {
        return Err(CliError::usage("--robots must be at least 1"));
    }
    let region = read_region(&a.region)?;
    let spacing = || -> Result<f64, CliError> {
        let s = a.spacing.ok_or_else(|| CliError::usage("--spacing is required for this pattern"))?;
        positive("spacing", s)
    };
    let wrong_region = |want: &str| CliError::invalid(format!("{}: pattern needs a {want} region", a.region.display()));
    let split = |plan: CoveragePlan| -> Result<CoveragePlan, CliError> {
        if a.robots > 1 {
            Ok(split_path(&plan, a.robots)?)
        } else {
            Ok(plan)
        }
    };
    let set = match a.pattern {
        PatternArg::Star => {
            let RegionSpec::Star { center, radius_m } = region.region else {
                return Err(wrong_region("star"));
            };
            if a.robots > 1 {
                return Err(CliError::usage("the star pattern is flown by a single robot"));
            }
            MissionSet {
                origin: region.origin,
                metadata: PlanMetadata {
                    pattern: Some("star".into()),
                    ..PlanMetadata::default()
                },
                missions: star_pattern(center, radius_m, speed)?,
            }
        }
        PatternArg::Boustrophedon => {
            let RegionSpec::Lake {
                orientation_deg,
                ref starts,
                ..
            } = region.region
            else {
                return Err(wrong_region("lake"));
            };
            let lake = region.lake().expect("lake region").map_err(CliError::invalid)?;
            let spacing = spacing()?;
            let orientation = orientation_deg.to_radians();
            let plan = if a.robots > 1 && starts.len() >= a.robots {
                partition_area(&lake, &starts[..a.robots], spacing, orientation, speed)?
            } else {
                split(boustrophedon(&lake, spacing, orientation, speed)?)?
            };
            MissionSet::from_plan(&plan, region.origin)
        }
        PatternArg::L | PatternArg::T | PatternArg::Z => {
            let river = region.river().ok_or_else(|| wrong_region("river"))?.map_err(CliError::invalid)?;
            let spacing = spacing()?;
            let plan = match a.pattern {
                PatternArg::L => l_cover(&river, spacing, speed)?,
                PatternArg::T => t_cover(&river, spacing, speed)?,
                _ => z_cover(&river, spacing, speed)?,
            };
            MissionSet::from_plan(&split(plan)?, region.origin)
        }
    };
    let coords = match a.coords {
        CoordsArg::Local => Coordinates::Local,
        CoordsArg::Geo => Coordinates::Geo,
    };
    write_missions(&a.out, &set, coords)?;
    for w in &set.metadata.warnings {
        log::warn!("{w}");
    }
    let waypoints: usize = set.missions.iter().map(|m| m.waypoints.len()).sum();
    let length: f64 = set.missions.iter().map(Mission::path_length).sum();
    println!(
        "{} missions, {waypoints} waypoints, {length:.1} m of path; wrote {}",
        set.missions.len(),
        a.out.display()
    );
    Ok(())
}

pub fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let (set, mission) = load_mission(&a.mission, a.robot)?;
    let config = RunConfig::load(&a.config)?;
    let out = a
        .out
        .or_else(|| config.output.trajectory.clone())
        .ok_or_else(|| CliError::usage("no trajectory output: pass --out or set output.trajectory"))?;
    let geojson = a.geojson.or_else(|| config.output.geojson.clone());
    let loaded = LoadedRun::new(config)?;
    let log = if a.augment {
        let mut aug = loaded.augmenter().map_err(|e| CliError::new("config", e))?;
        run_mission(&mission, loaded.setup(), Some(&mut aug))?
    } else {
        run_mission(&mission, loaded.setup(), None)?
    };
    write_trajectory(&out, &log)?;
    if let Some(path) = geojson {
        let origin = set
            .origin
            .ok_or_else(|| CliError::invalid("GeoJSON output needs a frame origin in the mission file"))?;
        write_geojson(&path, &Frame::new(origin)?, &mission, Some(&log))?;
    }
    if log.timed_out {
        log::warn!("mission timed out before the last waypoint");
    }
    let m = compute_metrics(&log, &mission, leeway::metrics::DEFAULT_THRESHOLD_M)?;
    println!(
        "{} samples over {:.1} s, completed {}, max cross-track {:.3} m; wrote {}",
        log.len(),
        log.samples.last().map_or(0.0, |s| s.time()),
        m.completion,
        m.max_cross_track,
        out.display()
    );
    Ok(())
}

fn metrics_of(log: &Path, mission: &Mission, threshold: f64) -> Result<PathMetrics, CliError> {
    Ok(compute_metrics(&read_trajectory(log)?, mission, threshold)?)
}

pub fn metrics(a: MetricsArgs) -> Result<(), CliError> {
    let (_, mission) = load_mission(&a.mission, a.robot)?;
    let m = metrics_of(&a.log, &mission, a.threshold)?;
    println!("{}", serde_json::to_string_pretty(&m).expect("metrics serialize"));
    Ok(())
}

fn print_report(r: &ImprovementReport) {
    println!("{:<22} {:>12} {:>12} {:>10}", "metric", "baseline", "augmented", "reduction");
    for (name, row) in r.rows() {
        println!("{name:<22} {:>12.4} {:>12.4} {:>10}", row.baseline, row.candidate, row.display());
    }
    println!("completed: baseline {}, augmented {}", r.baseline_completed, r.candidate_completed);
}

pub fn compare(a: CompareArgs) -> Result<(), CliError> {
    let (_, mission) = load_mission(&a.mission, a.robot)?;
    let base = metrics_of(&a.baseline, &mission, a.threshold)?;
    let aug = metrics_of(&a.augmented, &mission, a.threshold)?;
    let report = compare_runs(&base, &aug)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print_report(&report);
    }
    Ok(())
}

fn out_dir(dir: &Option<PathBuf>) -> Result<Option<&Path>, CliError> {
    if let Some(d) = dir {
        fs::create_dir_all(d).map_err(|e| CliError::new("io", format!("{}: {e}", d.display())))?;
    }
    Ok(dir.as_deref())
}

pub fn scenario(a: ScenarioArgs) -> Result<(), CliError> {
    let dir = out_dir(&a.out)?;
    match a.kind {
        ScenarioKind::Star => {
            let sc = StarScenario::default();
            let out = sc.run()?;
            println!("{:>7} {:>9} {:>9} {:>9} {:>10} {:>10}", "heading", "base max", "aug max", "reduction", "base >1m", "aug >1m");
            for h in &out.headings {
                let (b, g) = (&h.run.baseline_metrics, &h.run.augmented_metrics);
                println!(
                    "{:>7.0} {:>9.3} {:>9.3} {:>8.1}% {:>10.3} {:>10.3}",
                    h.heading_deg,
                    b.max_cross_track,
                    g.max_cross_track,
                    100.0 * h.max_reduction(),
                    b.pct_over_threshold,
                    g.pct_over_threshold
                );
            }
            println!(
                "mean max cross-track reduction {:.1}% (reduction of the mean max {:.1}%)",
                100.0 * out.mean_max_reduction(),
                100.0 * out.reduction_of_mean_max()
            );
            if let Some(dir) = dir {
                let (wind_map, current_map) = sc.fit_maps()?;
                write_map(&dir.join("wind_map.json"), &wind_map)?;
                write_map(&dir.join("current_map.json"), &current_map)?;
                write_model(&dir.join("model.json"), &out.model)?;
                let set = MissionSet {
                    metadata: PlanMetadata {
                        pattern: Some("star".into()),
                        ..PlanMetadata::default()
                    },
                    missions: out.headings.iter().map(|h| h.mission.clone()).collect(),
                    ..MissionSet::default()
                };
                write_missions(&dir.join("missions.json"), &set, Coordinates::Local)?;
                for (i, h) in out.headings.iter().enumerate() {
                    write_trajectory(&dir.join(format!("baseline_{i}.csv")), &h.run.baseline)?;
                    write_trajectory(&dir.join(format!("augmented_{i}.csv")), &h.run.augmented)?;
                }
                println!("wrote missions, model, maps and logs to {} (robot i = heading row i)", dir.display());
            }
        }
        ScenarioKind::Overshoot => {
            let out = OvershootScenario::default().run()?;
            let (b, g) = (&out.run.baseline_metrics, &out.run.augmented_metrics);
            println!(
                "sign changes {} -> {}, max cross-track {:.3} -> {:.3} m",
                out.baseline_sign_changes, out.augmented_sign_changes, b.max_cross_track, g.max_cross_track
            );
            print_report(&compare_runs(b, g)?);
            if let Some(dir) = dir {
                write_missions(&dir.join("mission.json"), &MissionSet::single(out.mission.clone()), Coordinates::Local)?;
                write_trajectory(&dir.join("baseline.csv"), &out.run.baseline)?;
                write_trajectory(&dir.join("augmented.csv"), &out.run.augmented)?;
                println!("wrote mission and logs to {}", dir.display());
            }
        }
    }
    Ok(())
}
