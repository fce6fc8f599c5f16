//! Shipped desk scenarios: the star A/B comparison and the perpendicular-current
//! overshoot case.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::augment::{AugmentConfig, Augmenter, Horizon};
use crate::coverage::{star_pattern, CoverageError};
use crate::displacement::{
    build_training_set, fit_linear, Coupling, DisplacementModel, FeatureSchema, FitError, TrainingOptions,
};
use crate::forcefield::{fit_gp, fit_hyperparams, FieldError, ForceField, ForceSample, ForceSource, GpForceMap, GpHyperparams, SyntheticField};
use crate::geo::{heading_to_compass_deg, LocalPoint, Vec2};
use crate::metrics::{compute_metrics, cross_track_series, sign_changes, MetricsError, PathMetrics, DEFAULT_THRESHOLD_M};
use crate::vessel::{
    run_mission, Environment, Mission, PidGains, RunSetup, SensorModel, SimError, TrajectoryLog, VesselParams,
    Waypoint,
};

/// Cross-track band inside which the error is not counted as changing side.
pub const SIGN_DEADBAND_M: f64 = 1.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
}

/// Vessel, controller and integrator settings shared by every run of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub params: VesselParams,
    pub gains: PidGains,
    pub dt: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            params: VesselParams::default(),
            gains: PidGains::default(),
            dt: 0.1,
        }
    }
}

impl SimSettings {
    pub fn setup<'a>(&self, wind: &'a dyn ForceField, current: &'a dyn ForceField) -> RunSetup<'a> {
        RunSetup {
            gains: self.gains,
            params: self.params,
            env: Environment::new(wind, current),
            dt: self.dt,
            sensors: SensorModel::ideal(),
        }
    }
}

/// Augmentation settings of the shipped scenarios: predictions scaled to the
/// time left on the leg, a wide offset clamp and a gentle speed law.
pub fn scenario_augment_config() -> AugmentConfig {
    AugmentConfig {
        gain: 1.0,
        max_offset: 80.0,
        speed_beta: 0.1,
        horizon: Horizon::TimeToGo,
        ..AugmentConfig::default()
    }
}

/// Fits a displacement model on PID-only flights of `missions` through the
/// given fields.
pub fn train_on_missions(
    missions: &[Mission],
    wind: &dyn ForceField,
    current: &dyn ForceField,
    sim: &SimSettings,
) -> Result<DisplacementModel, ScenarioError> {
    let opts = TrainingOptions::default();
    let mut samples = Vec::new();
    for m in missions {
        let log = run_mission(m, sim.setup(wind, current), None)?;
        samples.extend(build_training_set(&log, m, &opts));
    }
    let coupling = Coupling {
        k_wind: sim.params.k_wind,
        k_current: sim.params.k_current,
    };
    Ok(fit_linear(&samples, FeatureSchema::Combined, coupling, opts.window_s)?)
}

/// `n` noisy point samples of `field`, uniform over the square `[min, max]`.
pub fn noisy_samples(
    field: &dyn ForceField,
    source: ForceSource,
    min: LocalPoint,
    max: LocalPoint,
    n: usize,
    noise_std: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<ForceSample> {
    let noise = Normal::new(0.0, noise_std).expect("noise std is finite and non-negative");
    (0..n)
        .map(|i| {
            let p = Vec2::new(rng.random_range(min.x..=max.x), rng.random_range(min.y..=max.y));
            let e = Vec2::new(noise.sample(rng), noise.sample(rng));
            ForceSample {
                position: p,
                vector: field.query(p) + e,
                source,
                time: i as f64,
            }
        })
        .collect()
}

/// GP map of `field` fitted from noisy samples at the known noise level, with
/// signal scale and length scale chosen by marginal likelihood over a grid
/// around the data-driven defaults.
pub fn fit_noisy_map(
    field: &dyn ForceField,
    source: ForceSource,
    min: LocalPoint,
    max: LocalPoint,
    n: usize,
    noise_std: f64,
    rng: &mut ChaCha8Rng,
) -> Result<GpForceMap, FieldError> {
    let samples = noisy_samples(field, source, min, max, n, noise_std, rng);
    let base = GpHyperparams::from_samples(&samples)?;
    let noise = noise_std.max(1e-3);
    let mut grid = Vec::new();
    for l in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        for s in [0.5, 1.0, 2.0] {
            grid.push(GpHyperparams::new(base.signal_std * s, base.length_scale * l, noise)?);
        }
    }
    fit_gp(&samples, fit_hyperparams(&samples, &grid)?)
}

/// One mission flown without and with augmentation.
#[derive(Debug, Clone)]
pub struct AbRun {
    pub baseline: TrajectoryLog,
    pub augmented: TrajectoryLog,
    pub baseline_metrics: PathMetrics,
    pub augmented_metrics: PathMetrics,
}

pub fn run_ab(
    mission: &Mission,
    wind: &dyn ForceField,
    current: &dyn ForceField,
    sim: &SimSettings,
    augmenter: &mut Augmenter,
) -> Result<AbRun, ScenarioError> {
    let baseline = run_mission(mission, sim.setup(wind, current), None)?;
    let augmented = run_mission(mission, sim.setup(wind, current), Some(augmenter))?;
    let baseline_metrics = compute_metrics(&baseline, mission, DEFAULT_THRESHOLD_M)?;
    let augmented_metrics = compute_metrics(&augmented, mission, DEFAULT_THRESHOLD_M)?;
    Ok(AbRun {
        baseline,
        augmented,
        baseline_metrics,
        augmented_metrics,
    })
}

/// Star A/B experiment: out-and-back legs at 45° increments through a uniform
/// current, PID-only against map-based augmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct StarScenario {
    pub radius: f64,
    pub speed: f64,
    pub current: Vec2,
    pub training_speeds: Vec<f64>,
    pub map_samples: usize,
    pub map_noise_std: f64,
    pub seed: u64,
    pub sim: SimSettings,
    pub augment: AugmentConfig,
}

impl Default for StarScenario {
    fn default() -> Self {
        Self {
            radius: 200.0,
            speed: 3.0,
            current: Vec2::new(0.0, 1.0),
            training_speeds: vec![2.0, 2.5, 3.0],
            map_samples: 200,
            map_noise_std: 0.1,
            seed: 7,
            sim: SimSettings::default(),
            augment: scenario_augment_config(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeadingResult {
    /// Compass bearing of the outbound leg, degrees clockwise from north.
    pub heading_deg: f64,
    pub mission: Mission,
    pub run: AbRun,
}

impl HeadingResult {
    /// Relative reduction of max cross-track error, PID-only to augmented.
    pub fn max_reduction(&self) -> f64 {
        let a = self.run.baseline_metrics.max_cross_track;
        let b = self.run.augmented_metrics.max_cross_track;
        (a - b) / a
    }
}

#[derive(Debug, Clone)]
pub struct StarOutcome {
    pub model: DisplacementModel,
    pub headings: Vec<HeadingResult>,
}

impl StarOutcome {
    /// Mean over headings of the per-heading max-error reduction.
    pub fn mean_max_reduction(&self) -> f64 {
        self.headings.iter().map(HeadingResult::max_reduction).sum::<f64>() / self.headings.len() as f64
    }

    /// Reduction of the heading-averaged max error.
    pub fn reduction_of_mean_max(&self) -> f64 {
        let n = self.headings.len() as f64;
        let a: f64 = self.headings.iter().map(|h| h.run.baseline_metrics.max_cross_track).sum::<f64>() / n;
        let b: f64 = self.headings.iter().map(|h| h.run.augmented_metrics.max_cross_track).sum::<f64>() / n;
        (a - b) / a
    }

    /// Headings whose share of samples beyond the threshold grew.
    pub fn pct_increases(&self) -> Vec<f64> {
        self.headings
            .iter()
            .filter(|h| h.run.augmented_metrics.pct_over_threshold > h.run.baseline_metrics.pct_over_threshold)
            .map(|h| h.heading_deg)
            .collect()
    }
}

impl StarScenario {
    pub fn wind_field(&self) -> SyntheticField {
        SyntheticField::zero()
    }

    pub fn current_field(&self) -> SyntheticField {
        SyntheticField::uniform(self.current)
    }

    fn bounds(&self) -> (LocalPoint, LocalPoint) {
        let r = self.radius * 1.1;
        (Vec2::new(-r, -r), Vec2::new(r, r))
    }

    /// Fitted (wind, current) maps from noisy samples of the true fields.
    pub fn fit_maps(&self) -> Result<(GpForceMap, GpForceMap), FieldError> {
        let (min, max) = self.bounds();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = self.map_samples;
        let s = self.map_noise_std;
        let wind = fit_noisy_map(&self.wind_field(), ForceSource::Wind, min, max, n, s, &mut rng)?;
        let current = fit_noisy_map(&self.current_field(), ForceSource::Current, min, max, n, s, &mut rng)?;
        Ok((wind, current))
    }

    pub fn train(&self) -> Result<DisplacementModel, ScenarioError> {
        let mut missions = Vec::new();
        for &v in &self.training_speeds {
            missions.extend(star_pattern(Vec2::ZERO, self.radius, v)?);
        }
        train_on_missions(&missions, &self.wind_field(), &self.current_field(), &self.sim)
    }

    pub fn run(&self) -> Result<StarOutcome, ScenarioError> {
        let wind = self.wind_field();
        let current = self.current_field();
        let model = self.train()?;
        let (wind_map, current_map) = self.fit_maps()?;
        let wind_map: Arc<dyn ForceField> = Arc::new(wind_map);
        let current_map: Arc<dyn ForceField> = Arc::new(current_map);
        let missions = star_pattern(Vec2::ZERO, self.radius, self.speed)?;
        let headings = std::thread::scope(|scope| {
            let handles: Vec<_> = missions
                .into_iter()
                .enumerate()
                .map(|(i, mission)| {
                    let (model, wind, current) = (&model, &wind, &current);
                    let (wm, cm) = (wind_map.clone(), current_map.clone());
                    scope.spawn(move || -> Result<HeadingResult, ScenarioError> {
                        let mut aug = Augmenter::with_maps(model.clone(), self.augment, wm, cm);
                        let run = run_ab(&mission, wind, current, &self.sim, &mut aug)?;
                        Ok(HeadingResult {
                            heading_deg: heading_to_compass_deg((i as f64 * 45.0).to_radians()),
                            mission,
                            run,
                        })
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("scenario worker panicked"))
                .collect::<Result<Vec<_>, _>>()
        })?;
        Ok(StarOutcome { model, headings })
    }
}

/// Back-and-forth legs across a strong perpendicular current, where the
/// PID-only track swings from side to side of each leg.
#[derive(Debug, Clone, PartialEq)]
pub struct OvershootScenario {
    pub leg_length: f64,
    pub speed: f64,
    pub current: Vec2,
    pub sim: SimSettings,
    pub augment: AugmentConfig,
    pub training: StarScenario,
}

impl Default for OvershootScenario {
    fn default() -> Self {
        let current = Vec2::new(0.0, 1.2);
        Self {
            leg_length: 150.0,
            speed: 3.0,
            current,
            sim: SimSettings::default(),
            augment: scenario_augment_config(),
            training: StarScenario {
                current,
                ..StarScenario::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct OvershootOutcome {
    pub mission: Mission,
    pub run: AbRun,
    pub baseline_sign_changes: usize,
    pub augmented_sign_changes: usize,
}

impl OvershootScenario {
    pub fn mission(&self) -> Mission {
        let far = Vec2::new(self.leg_length, 0.0);
        let wps = [far, Vec2::ZERO, far, Vec2::ZERO]
            .into_iter()
            .map(|p| Waypoint::new(p, self.speed))
            .collect();
        Mission::new(Vec2::ZERO, wps)
    }

    pub fn run(&self) -> Result<OvershootOutcome, ScenarioError> {
        let wind = SyntheticField::zero();
        let current = SyntheticField::uniform(self.current);
        let model = self.training.train()?;
        let mission = self.mission();
        let mut aug = Augmenter::with_maps(model, self.augment, Arc::new(wind), Arc::new(current));
        let run = run_ab(&mission, &wind, &current, &self.sim, &mut aug)?;
        let count = |log: &TrajectoryLog| -> Result<usize, ScenarioError> {
            Ok(sign_changes(&cross_track_series(log, &mission)?, SIGN_DEADBAND_M))
        };
        let baseline_sign_changes = count(&run.baseline)?;
        let augmented_sign_changes = count(&run.augmented)?;
        Ok(OvershootOutcome {
            mission,
            run,
            baseline_sign_changes,
            augmented_sign_changes,
        })
    }
}
