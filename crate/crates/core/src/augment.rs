//! Feed-forward waypoint augmentation.
//!
//! Rather than reacting to accumulated tracking error, the augmenter predicts
//! how far wind and current will push the vehicle and hands the navigator a
//! target shifted the opposite way. Speed is nudged as well when the vehicle is
//! predicted to lag or run ahead.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::displacement::{
    predict_displacement, relative_to_absolute, DisplacementModel, ForceInputs, PathVec,
    RelativeReading,
};
use crate::forcefield::{ForceField, ForceSource};
use crate::geo::{LocalPoint, Vec2};
use crate::vessel::{Leg, SensorFrame, VesselState, Waypoint, WaypointAugmenter, TIME_EPS};

/// Reference length for the speed-adjustment law, meters.
pub const SPEED_REF_LENGTH_M: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AugmentError {
    #[error("no {0} data available for force estimation")]
    MissingSource(ForceSource),
    #[error("invalid augment config: {0}")]
    InvalidConfig(String),
}

/// Where force estimates come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EstimateSource {
    /// Latest hull sensor readings.
    #[default]
    Live,
    /// Posterior means of fitted force maps at the vessel position.
    Map,
}

/// Time span the predicted displacement is scaled to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// One training window: the model output is used as is.
    #[default]
    Window,
    /// Remaining time to the waypoint at the leg speed, so the offset covers
    /// all the drift still to come on this leg.
    TimeToGo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub gain: f64,
    #[serde(rename = "replan_period_s")]
    pub replan_period: f64,
    pub speed_beta: f64,
    #[serde(rename = "speed_min_mps")]
    pub speed_min: f64,
    #[serde(rename = "speed_max_mps")]
    pub speed_max: f64,
    #[serde(rename = "max_offset_m")]
    pub max_offset: f64,
    pub source: EstimateSource,
    /// Component-wise median over the last three live estimates.
    pub median_filter: bool,
    pub horizon: Horizon,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            gain: 1.0,
            replan_period: 1.0,
            speed_beta: 0.2,
            speed_min: 0.5,
            speed_max: 4.0,
            max_offset: 15.0,
            source: EstimateSource::Live,
            median_filter: false,
            horizon: Horizon::Window,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self, vessel_max_speed: f64) -> Result<(), AugmentError> {
        let bad = |m: String| Err(AugmentError::InvalidConfig(m));
        if !(self.gain >= 0.0 && self.gain.is_finite()) {
            return bad(format!("gain must be non-negative, got {}", self.gain));
        }
        if !(self.replan_period > 0.0 && self.replan_period.is_finite()) {
            return bad(format!("replan_period_s must be positive, got {}", self.replan_period));
        }
        if !self.speed_beta.is_finite() {
            return bad("speed_beta must be finite".into());
        }
        if !(self.speed_min >= 0.0 && self.speed_min <= self.speed_max) {
            return bad(format!(
                "speed bounds must satisfy 0 <= min <= max, got [{}, {}]",
                self.speed_min, self.speed_max
            ));
        }
        if self.speed_max > vessel_max_speed + 1e-12 {
            return bad(format!(
                "speed_max_mps {} exceeds vessel max speed {vessel_max_speed}",
                self.speed_max
            ));
        }
        if !(self.max_offset > 0.0 && self.max_offset.is_finite()) {
            return bad(format!("max_offset_m must be positive, got {}", self.max_offset));
        }
        Ok(())
    }
}

/// Input for [`force_estimate`].
pub enum ForceData<'a> {
    Live {
        wind: Option<&'a RelativeReading>,
        current: Option<&'a RelativeReading>,
    },
    Map {
        wind: Option<&'a dyn ForceField>,
        current: Option<&'a dyn ForceField>,
    },
}

/// World-frame (wind, current) estimate at the vessel.
pub fn force_estimate(state: &VesselState, data: &ForceData<'_>) -> Result<(Vec2, Vec2), AugmentError> {
    match data {
        ForceData::Live { wind, current } => {
            let w = wind.ok_or(AugmentError::MissingSource(ForceSource::Wind))?;
            let c = current.ok_or(AugmentError::MissingSource(ForceSource::Current))?;
            Ok((
                relative_to_absolute(w, &state.pose, state.ground_vel),
                relative_to_absolute(c, &state.pose, state.ground_vel),
            ))
        }
        ForceData::Map { wind, current } => {
            let w = wind.ok_or(AugmentError::MissingSource(ForceSource::Wind))?;
            let c = current.ok_or(AugmentError::MissingSource(ForceSource::Current))?;
            Ok((w.query(state.position()), c.query(state.position())))
        }
    }
}

/// Result of one augmentation: the shifted target and the prediction behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Augmentation {
    pub waypoint: Waypoint,
    /// Path-frame displacement the offset compensates, after gain and horizon scaling.
    pub predicted: PathVec,
    /// Gain-scaled displacement over one model window; drives the speed law.
    pub window_predicted: PathVec,
}

/// Target shifted against the predicted displacement.
///
/// The displacement is predicted in the frame of the leg from `leg_from` to
/// `true_wp`, scaled by the configured gain and horizon, negated, rotated to
/// the world frame and clamped to `max_offset`. The returned speed is the
/// true waypoint's; see [`adjust_speed`].
pub fn intermediate_waypoint(
    true_wp: &Waypoint,
    leg_from: LocalPoint,
    state: &VesselState,
    forces: (Vec2, Vec2),
    model: &DisplacementModel,
    config: &AugmentConfig,
) -> Augmentation {
    let unchanged = Augmentation {
        waypoint: *true_wp,
        predicted: PathVec::default(),
        window_predicted: PathVec::default(),
    };
    let Some(dir) = (true_wp.position - leg_from).normalized() else {
        return unchanged;
    };
    let inputs = ForceInputs::from_world(forces.0, forces.1, true_wp.speed, dir);
    let raw = predict_displacement(model, &inputs);
    let window_predicted = PathVec::new(raw.along * config.gain, raw.cross * config.gain);
    let scale = config.gain * horizon_scale(true_wp, state, model, config);
    let predicted = PathVec::new(raw.along * config.gain, raw.cross * scale);
    let mut offset = -predicted.to_world(dir);
    let len = offset.norm();
    if len > config.max_offset {
        offset = offset * (config.max_offset / len);
    }
    if offset == Vec2::ZERO {
        return Augmentation {
            predicted,
            window_predicted,
            ..unchanged
        };
    }
    Augmentation {
        waypoint: Waypoint::new(true_wp.position + offset, true_wp.speed),
        predicted,
        window_predicted,
    }
}

fn horizon_scale(
    true_wp: &Waypoint,
    state: &VesselState,
    model: &DisplacementModel,
    config: &AugmentConfig,
) -> f64 {
    match config.horizon {
        Horizon::Window => 1.0,
        Horizon::TimeToGo => {
            let t_go = state.position().distance(true_wp.position) / true_wp.speed;
            t_go / model.window_s
        }
    }
}

/// Leg speed corrected for the predicted along-track error.
///
/// A predicted lag (negative `e_along`) raises speed, a predicted overshoot
/// lowers it, linearly with slope `speed_beta` per reference length, then
/// clamped to the configured bounds. A zero prediction returns `leg_speed`.
pub fn adjust_speed(leg_speed: f64, predicted: PathVec, config: &AugmentConfig) -> f64 {
    if predicted.along == 0.0 {
        return leg_speed;
    }
    let v = leg_speed * (1.0 + config.speed_beta * (-predicted.along) / SPEED_REF_LENGTH_M);
    v.clamp(config.speed_min, config.speed_max)
}

/// Stateful augmenter owned by a single mission run.
pub struct Augmenter {
    model: DisplacementModel,
    config: AugmentConfig,
    maps: Option<(Arc<dyn ForceField>, Arc<dyn ForceField>)>,
    last_replan: Option<f64>,
    cached: Option<(usize, LocalPoint, Waypoint)>,
    history: VecDeque<(Vec2, Vec2)>,
}

impl Augmenter {
    /// Augmenter estimating forces from live sensor readings.
    pub fn live(model: DisplacementModel, mut config: AugmentConfig) -> Self {
        config.source = EstimateSource::Live;
        Self::build(model, config, None)
    }

    /// Augmenter estimating forces from fitted (wind, current) maps.
    pub fn with_maps(
        model: DisplacementModel,
        mut config: AugmentConfig,
        wind: Arc<dyn ForceField>,
        current: Arc<dyn ForceField>,
    ) -> Self {
        config.source = EstimateSource::Map;
        Self::build(model, config, Some((wind, current)))
    }

    fn build(
        model: DisplacementModel,
        config: AugmentConfig,
        maps: Option<(Arc<dyn ForceField>, Arc<dyn ForceField>)>,
    ) -> Self {
        Self {
            model,
            config,
            maps,
            last_replan: None,
            cached: None,
            history: VecDeque::with_capacity(3),
        }
    }

    pub fn config(&self) -> &AugmentConfig {
        &self.config
    }

    pub fn model(&self) -> &DisplacementModel {
        &self.model
    }

    /// Time of the last replan, if any.
    pub fn last_replan_time(&self) -> Option<f64> {
        self.last_replan
    }

    /// Intermediate currently handed to the navigator.
    pub fn current_intermediate(&self) -> Option<Waypoint> {
        self.cached.map(|c| c.2)
    }

    fn estimate(&mut self, state: &VesselState, sensors: &SensorFrame) -> Result<(Vec2, Vec2), AugmentError> {
        let data = match (&self.config.source, &self.maps) {
            (EstimateSource::Live, _) => ForceData::Live {
                wind: Some(&sensors.wind),
                current: Some(&sensors.current),
            },
            (EstimateSource::Map, Some((w, c))) => ForceData::Map {
                wind: Some(w.as_ref()),
                current: Some(c.as_ref()),
            },
            (EstimateSource::Map, None) => ForceData::Map {
                wind: None,
                current: None,
            },
        };
        let est = force_estimate(state, &data)?;
        if self.config.source == EstimateSource::Live && self.config.median_filter {
            if self.history.len() == 3 {
                self.history.pop_front();
            }
            self.history.push_back(est);
            return Ok(median(&self.history));
        }
        Ok(est)
    }

    /// One navigator tick: the cached intermediate, or a fresh one when the
    /// replan period has elapsed or the true target changed.
    pub fn tick(
        &mut self,
        state: &VesselState,
        leg: &Leg,
        leg_index: usize,
        now: f64,
        sensors: &SensorFrame,
    ) -> Result<Waypoint, AugmentError> {
        // the filter sees every tick, not just replans
        let forces = self.estimate(state, sensors)?;
        let target_changed = match self.cached {
            Some((i, p, _)) => i != leg_index || p != leg.to.position,
            None => true,
        };
        let due = self
            .last_replan
            .is_none_or(|t| now - t + TIME_EPS >= self.config.replan_period);
        if let (false, false, Some((_, _, wp))) = (target_changed, due, self.cached) {
            return Ok(wp);
        }
        let aug = intermediate_waypoint(&leg.to, leg.from, state, forces, &self.model, &self.config);
        let speed = adjust_speed(leg.to.speed, aug.window_predicted, &self.config);
        let wp = Waypoint::new(aug.waypoint.position, speed);
        self.last_replan = Some(now);
        self.cached = Some((leg_index, leg.to.position, wp));
        Ok(wp)
    }
}

fn median(history: &VecDeque<(Vec2, Vec2)>) -> (Vec2, Vec2) {
    let med = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    };
    let pick = |f: fn(&(Vec2, Vec2)) -> f64| med(history.iter().map(f).collect());
    (
        Vec2::new(pick(|h| h.0.x), pick(|h| h.0.y)),
        Vec2::new(pick(|h| h.1.x), pick(|h| h.1.y)),
    )
}

impl WaypointAugmenter for Augmenter {
    fn intermediate(
        &mut self,
        state: &VesselState,
        leg: &Leg,
        leg_index: usize,
        now: f64,
        sensors: &SensorFrame,
    ) -> Result<Waypoint, String> {
        self.tick(state, leg, leg_index, now, sensors)
            .map_err(|e| e.to_string())
    }
}
