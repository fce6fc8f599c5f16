//! Simulation run configuration (TOML).
//!
//! ```toml
//! dt = 0.1
//! seed = 7
//! model = "model.json"          # needed for augmented runs
//!
//! [wind]
//! kind = "uniform"
//! v = { x = 0.0, y = 0.0 }
//!
//! [current]
//! kind = "map"
//! path = "current_map.json"
//!
//! [maps]                        # needed when augment.source = "map"
//! wind = "wind_map.json"
//! current = "current_map.json"
//!
//! [augment]
//! gain = 1.0
//! source = "map"
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::augment::{AugmentConfig, Augmenter, EstimateSource};
use crate::displacement::DisplacementModel;
use crate::forcefield::{Axis, ForceField, SyntheticField};
use crate::geo::{LocalPoint, Vec2};
use crate::io::map::read_map;
use crate::io::model::read_model;
use crate::io::{read_text, IoError};
use crate::vessel::{Environment, PidGains, RunSetup, SensorModel, VesselParams};

pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_SEED: u64 = 0;

/// Where a field's values come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldSpec {
    Uniform { v: Vec2 },
    Shear { axis: Axis, rate: f64, base: Vec2 },
    Vortex { center: LocalPoint, strength: f64 },
    Map { path: PathBuf },
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::Uniform { v: Vec2::ZERO }
    }
}

impl FieldSpec {
    fn synthetic(&self) -> Option<SyntheticField> {
        match *self {
            FieldSpec::Uniform { v } => Some(SyntheticField::Uniform { v }),
            FieldSpec::Shear { axis, rate, base } => Some(SyntheticField::Shear { axis, rate, base }),
            FieldSpec::Vortex { center, strength } => Some(SyntheticField::Vortex { center, strength }),
            FieldSpec::Map { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SensorNoise {
    pub wind_std_mps: f64,
    pub current_std_mps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct MapPaths {
    pub wind: Option<PathBuf>,
    pub current: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub trajectory: Option<PathBuf>,
    pub geojson: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dt: f64,
    pub seed: u64,
    pub vessel: VesselParams,
    pub gains: PidGains,
    pub wind: FieldSpec,
    pub current: FieldSpec,
    pub sensors: SensorNoise,
    pub augment: AugmentConfig,
    pub model: Option<PathBuf>,
    pub maps: MapPaths,
    pub output: OutputPaths,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            seed: DEFAULT_SEED,
            vessel: VesselParams::default(),
            gains: PidGains::default(),
            wind: FieldSpec::default(),
            current: FieldSpec::default(),
            sensors: SensorNoise::default(),
            augment: AugmentConfig::default(),
            model: None,
            maps: MapPaths::default(),
            output: OutputPaths::default(),
        }
    }
}

impl RunConfig {
    /// Parses TOML text; relative paths are resolved against `base_dir` and
    /// every referenced input file must exist.
    pub fn parse(path: &Path, text: &str, base_dir: &Path) -> Result<Self, IoError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() as u64 + 1);
            IoError::parse(path, line, e.message().to_string())
        })?;
        cfg.resolve(base_dir);
        cfg.validate().map_err(|m| IoError::invalid(path, m))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = read_text(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(path, &text, base)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for spec in [&mut self.wind, &mut self.current] {
            if let FieldSpec::Map { path } = spec {
                fix(path);
            }
        }
        for p in [
            &mut self.model,
            &mut self.maps.wind,
            &mut self.maps.current,
            &mut self.output.trajectory,
            &mut self.output.geojson,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    fn inputs(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = Vec::new();
        for spec in [&self.wind, &self.current] {
            if let FieldSpec::Map { path } = spec {
                v.push(path);
            }
        }
        v.extend(
            [&self.model, &self.maps.wind, &self.maps.current]
                .into_iter()
                .flatten()
                .map(PathBuf::as_path),
        );
        v
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.dt > 0.0 && self.dt <= 1.0) {
            return Err(format!("dt must lie in (0, 1], got {}", self.dt));
        }
        self.vessel.validate().map_err(|e| e.to_string())?;
        self.gains.validate().map_err(|e| e.to_string())?;
        self.augment
            .validate(self.vessel.max_speed)
            .map_err(|e| e.to_string())?;
        for (name, v) in [
            ("sensors.wind_std_mps", self.sensors.wind_std_mps),
            ("sensors.current_std_mps", self.sensors.current_std_mps),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be non-negative, got {v}"));
            }
        }
        for p in self.inputs() {
            if !p.is_file() {
                return Err(format!("referenced file `{}` does not exist", p.display()));
            }
        }
        Ok(())
    }

    pub fn sensor_model(&self) -> SensorModel {
        if self.sensors.wind_std_mps == 0.0 && self.sensors.current_std_mps == 0.0 {
            SensorModel::ideal()
        } else {
            SensorModel::noisy(self.sensors.wind_std_mps, self.sensors.current_std_mps, self.seed)
        }
    }
}

fn load_field(spec: &FieldSpec) -> Result<Arc<dyn ForceField>, IoError> {
    match spec {
        FieldSpec::Map { path } => Ok(Arc::new(read_map(path)?)),
        other => Ok(Arc::new(other.synthetic().expect("non-map spec"))),
    }
}

/// A configuration with every referenced file loaded.
pub struct LoadedRun {
    pub config: RunConfig,
    pub wind: Arc<dyn ForceField>,
    pub current: Arc<dyn ForceField>,
    pub model: Option<DisplacementModel>,
    pub wind_map: Option<Arc<dyn ForceField>>,
    pub current_map: Option<Arc<dyn ForceField>>,
}

impl LoadedRun {
    pub fn new(config: RunConfig) -> Result<Self, IoError> {
        let wind = load_field(&config.wind)?;
        let current = load_field(&config.current)?;
        let model = config.model.as_deref().map(read_model).transpose()?;
        let load_map = |p: &Option<PathBuf>| -> Result<Option<Arc<dyn ForceField>>, IoError> {
            match p {
                Some(p) => Ok(Some(Arc::new(read_map(p)?))),
                None => Ok(None),
            }
        };
        let wind_map = load_map(&config.maps.wind)?;
        let current_map = load_map(&config.maps.current)?;
        Ok(Self {
            config,
            wind,
            current,
            model,
            wind_map,
            current_map,
        })
    }

    pub fn setup(&self) -> RunSetup<'_> {
        RunSetup {
            gains: self.config.gains,
            params: self.config.vessel,
            env: Environment::new(self.wind.as_ref(), self.current.as_ref()),
            dt: self.config.dt,
            sensors: self.config.sensor_model(),
        }
    }

    /// Augmenter for this configuration; fails when the model or the maps
    /// the estimate source needs were not configured.
    pub fn augmenter(&self) -> Result<Augmenter, String> {
        let model = self
            .model
            .clone()
            .ok_or("augmented runs need a `model` path in the config")?;
        match self.config.augment.source {
            EstimateSource::Live => Ok(Augmenter::live(model, self.config.augment)),
            EstimateSource::Map => {
                let (Some(w), Some(c)) = (&self.wind_map, &self.current_map) else {
                    return Err("augment.source = \"map\" needs both [maps] wind and current paths".into());
                };
                Ok(Augmenter::with_maps(model, self.config.augment, w.clone(), c.clone()))
            }
        }
    }
}
