//! Predicting how far wind and current push the vehicle off its plan.
//!
//! Sensor readings arrive relative to the hull and are first turned into
//! world-frame velocities. Training data is cut from executed trajectories in
//! fixed time windows; each window pairs the average environmental force,
//! expressed in the leg's path frame, with the displacement the vehicle
//! suffered relative to where its commands should have taken it. A linear
//! least-squares model maps the former to the latter.
//!
//! Path frame: `along` points down the leg, `cross` points to its left.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forcefield::ForceSource;
use crate::geo::{normalize_angle, Pose, Vec2};
use crate::vessel::{Mission, TrajectoryLog, TIME_EPS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {needed} samples to fit {needed} features, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("feature matrix is rank deficient; degenerate columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<&'static str> },
    #[error("non-finite value in sample {0}")]
    NonFinite(usize),
}

/// A hull-relative measurement from the anemometer or the paddle wheel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeReading {
    /// m/s, relative to the hull.
    pub speed: f64,
    /// Direction relative to the bow, radians, CCW positive.
    pub bearing_rel: f64,
    pub source: ForceSource,
    pub time: f64,
}

/// World-frame wind or current velocity from a hull-relative reading.
///
/// Wind readings are apparent wind (air velocity relative to the moving hull),
/// so true wind adds the hull's ground velocity back. Current readings are the
/// hull's velocity through the water, so the current is whatever part of the
/// ground velocity the water accounts for.
pub fn relative_to_absolute(r: &RelativeReading, pose: &Pose, ground_vel: Vec2) -> Vec2 {
    let rel_world = Vec2::from_angle(pose.heading + r.bearing_rel) * r.speed;
    match r.source {
        ForceSource::Wind => rel_world + ground_vel,
        ForceSource::Current => ground_vel - rel_world,
    }
}

/// Inverse of [`relative_to_absolute`]: the reading a sensor would report.
pub fn absolute_to_relative(
    absolute: Vec2,
    source: ForceSource,
    pose: &Pose,
    ground_vel: Vec2,
    time: f64,
) -> RelativeReading {
    let rel_world = match source {
        ForceSource::Wind => absolute - ground_vel,
        ForceSource::Current => ground_vel - absolute,
    };
    let speed = rel_world.norm();
    let bearing_rel = if speed > 0.0 {
        normalize_angle(rel_world.angle() - pose.heading)
    } else {
        0.0
    };
    RelativeReading {
        speed,
        bearing_rel,
        source,
        time,
    }
}

/// Components of a vector in a leg's path frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PathVec {
    pub along: f64,
    pub cross: f64,
}

impl PathVec {
    pub fn new(along: f64, cross: f64) -> Self {
        Self { along, cross }
    }

    /// Projects a world vector onto the frame with unit `direction`.
    pub fn from_world(v: Vec2, direction: Vec2) -> Self {
        Self {
            along: v.dot(direction),
            cross: direction.cross(v),
        }
    }

    pub fn to_world(self, direction: Vec2) -> Vec2 {
        direction * self.along + direction.perp() * self.cross
    }

    pub fn is_finite(&self) -> bool {
        self.along.is_finite() && self.cross.is_finite()
    }
}

/// How wind and current are folded into regression features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSchema {
    /// `[f_along, f_cross, v_cmd, 1]` with f = k_wind·wind + k_current·current.
    #[default]
    Combined,
    /// `[wind_along, wind_cross, current_along, current_cross, v_cmd, 1]`.
    Separate,
}

impl FeatureSchema {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            FeatureSchema::Combined => &["f_along", "f_cross", "v_cmd", "bias"],
            FeatureSchema::Separate => &[
                "wind_along",
                "wind_cross",
                "current_along",
                "current_cross",
                "v_cmd",
                "bias",
            ],
        }
    }

    pub fn len(self) -> usize {
        self.columns().len()
    }
}

/// Wind/current drift coupling used to combine forces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub k_wind: f64,
    pub k_current: f64,
}

impl Default for Coupling {
    fn default() -> Self {
        Self {
            k_wind: 0.05,
            k_current: 1.0,
        }
    }
}

/// Path-frame environmental inputs for one prediction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ForceInputs {
    pub wind: PathVec,
    pub current: PathVec,
    /// Commanded speed, m/s.
    pub v_cmd: f64,
}

impl ForceInputs {
    pub fn from_world(wind: Vec2, current: Vec2, v_cmd: f64, direction: Vec2) -> Self {
        Self {
            wind: PathVec::from_world(wind, direction),
            current: PathVec::from_world(current, direction),
            v_cmd,
        }
    }

    pub fn combined(&self, c: &Coupling) -> FeatureVector {
        FeatureVector {
            f_along: c.k_wind * self.wind.along + c.k_current * self.current.along,
            f_cross: c.k_wind * self.wind.cross + c.k_current * self.current.cross,
            v_cmd: self.v_cmd,
            bias: 1.0,
        }
    }

    /// Regression row for `schema`.
    pub fn row(&self, schema: FeatureSchema, c: &Coupling) -> Vec<f64> {
        match schema {
            FeatureSchema::Combined => self.combined(c).as_row().to_vec(),
            FeatureSchema::Separate => vec![
                self.wind.along,
                self.wind.cross,
                self.current.along,
                self.current.cross,
                self.v_cmd,
                1.0,
            ],
        }
    }
}

/// Combined-force regression input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub f_along: f64,
    pub f_cross: f64,
    pub v_cmd: f64,
    pub bias: f64,
}

impl FeatureVector {
    pub fn new(f_along: f64, f_cross: f64, v_cmd: f64) -> Self {
        Self {
            f_along,
            f_cross,
            v_cmd,
            bias: 1.0,
        }
    }

    pub fn as_row(&self) -> [f64; 4] {
        [self.f_along, self.f_cross, self.v_cmd, self.bias]
    }
}

/// One training pair: window-averaged inputs and the displacement they caused.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementSample {
    pub inputs: ForceInputs,
    /// Path-frame displacement over the window, meters.
    pub error: PathVec,
}

/// Linear map from features to path-frame displacement per window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementModel {
    #[serde(rename = "features")]
    pub schema: FeatureSchema,
    pub coupling: Coupling,
    /// Row 0 predicts `e_along`, row 1 predicts `e_cross`; one weight per schema column.
    pub weights: [Vec<f64>; 2],
    /// RMS norm of the fit residual, meters.
    pub fit_residual: f64,
    /// Window length the model was trained on, seconds.
    pub window_s: f64,
}

impl DisplacementModel {
    /// The all-zero model; predicts no displacement anywhere.
    pub fn zero(schema: FeatureSchema, coupling: Coupling, window_s: f64) -> Self {
        let n = schema.len();
        Self {
            schema,
            coupling,
            weights: [vec![0.0; n], vec![0.0; n]],
            fit_residual: 0.0,
            window_s,
        }
    }

    /// Builds a combined-schema model from a 2×4 weight matrix.
    pub fn from_matrix(w: [[f64; 4]; 2], coupling: Coupling) -> Self {
        Self {
            schema: FeatureSchema::Combined,
            coupling,
            weights: [w[0].to_vec(), w[1].to_vec()],
            fit_residual: 0.0,
            window_s: DEFAULT_WINDOW_S,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let n = self.schema.len();
        if self.weights.iter().any(|r| r.len() != n) {
            return Err(format!("expected {n} weights per output row"));
        }
        if self.weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err("non-finite weight".into());
        }
        if !(self.fit_residual >= 0.0) {
            return Err("fit residual must be non-negative".into());
        }
        if !(self.window_s > 0.0) {
            return Err("window length must be positive".into());
        }
        Ok(())
    }

    /// W·f for a raw feature row.
    pub fn apply_row(&self, row: &[f64]) -> PathVec {
        let dot = |w: &[f64]| w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
        PathVec::new(dot(&self.weights[0]), dot(&self.weights[1]))
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().flatten().all(|w| *w == 0.0)
    }
}

/// Predicted path-frame displacement for one window.
pub fn predict_displacement(model: &DisplacementModel, inputs: &ForceInputs) -> PathVec {
    model.apply_row(&inputs.row(model.schema, &model.coupling))
}

/// Least-squares fit of W minimizing Σ‖W·f − e‖² via Householder QR.
pub fn fit_linear(
    samples: &[DisplacementSample],
    schema: FeatureSchema,
    coupling: Coupling,
    window_s: f64,
) -> Result<DisplacementModel, FitError> {
    let rows = samples
        .iter()
        .map(|s| (s.inputs.row(schema, &coupling), s.error))
        .collect::<Vec<_>>();
    fit_rows(&rows, schema, coupling, window_s)
}

/// [`fit_linear`] over precomputed combined-schema feature rows, as stored in
/// a training CSV.
pub fn fit_feature_rows(
    rows: &[(FeatureVector, PathVec)],
    coupling: Coupling,
    window_s: f64,
) -> Result<DisplacementModel, FitError> {
    let rows = rows
        .iter()
        .map(|(f, e)| (f.as_row().to_vec(), *e))
        .collect::<Vec<_>>();
    fit_rows(&rows, FeatureSchema::Combined, coupling, window_s)
}

fn fit_rows(
    rows: &[(Vec<f64>, PathVec)],
    schema: FeatureSchema,
    coupling: Coupling,
    window_s: f64,
) -> Result<DisplacementModel, FitError> {
    let p = schema.len();
    let n = rows.len();
    if n < p {
        return Err(FitError::TooFewSamples { needed: p, got: n });
    }
    let mut a = DMatrix::<f64>::zeros(n, p);
    let mut b = DMatrix::<f64>::zeros(n, 2);
    for (i, (row, error)) in rows.iter().enumerate() {
        if row.len() != p || row.iter().any(|v| !v.is_finite()) || !error.is_finite() {
            return Err(FitError::NonFinite(i));
        }
        for (j, v) in row.iter().enumerate() {
            a[(i, j)] = *v;
        }
        b[(i, 0)] = error.along;
        b[(i, 1)] = error.cross;
    }

    let col_norms: Vec<f64> = (0..p).map(|j| a.column(j).norm()).collect();
    let qr = a.clone().qr();
    let r = qr.r();
    let degenerate: Vec<&'static str> = (0..p)
        .filter(|&j| col_norms[j] == 0.0 || r[(j, j)].abs() <= 1e-10 * col_norms[j])
        .map(|j| schema.columns()[j])
        .collect();
    if !degenerate.is_empty() {
        return Err(FitError::RankDeficient {
            columns: degenerate,
        });
    }
    let qtb = qr.q().transpose() * &b;
    let w = r
        .solve_upper_triangular(&qtb)
        .expect("upper-triangular factor has a non-zero diagonal");

    let resid = &a * &w - &b;
    let fit_residual = (resid.norm_squared() / n as f64).sqrt();
    let row = |k: usize| -> Vec<f64> { DVector::from(w.column(k)).iter().copied().collect() };
    Ok(DisplacementModel {
        schema,
        coupling,
        weights: [row(0), row(1)],
        fit_residual,
        window_s,
    })
}

pub const DEFAULT_WINDOW_S: f64 = 5.0;

/// Controls how training windows are cut from a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingOptions {
    pub window_s: f64,
    /// Windows only cover ticks where the bow points within this angle
    /// (radians) of the active waypoint, so turns are not mistaken for drift.
    pub max_heading_error: f64,
}

impl Default for TrainingOptions {
    fn default() -> Self {
        Self {
            window_s: DEFAULT_WINDOW_S,
            max_heading_error: 5f64.to_radians(),
        }
    }
}

/// Cuts a trajectory into per-leg windows of training data.
///
/// Within a window the desired motion is the commanded speed over ground
/// along the bearing to the true waypoint at every tick; the error is the
/// actual minus desired displacement at the window's end, in the leg frame.
/// Wind and current are the sensed values averaged over the window. Legs
/// shorter than one window produce nothing.
pub fn build_training_set(
    log: &TrajectoryLog,
    mission: &Mission,
    opts: &TrainingOptions,
) -> Vec<DisplacementSample> {
    let samples = &log.samples;
    let mut out = Vec::new();
    let mut leg_start = 0usize;
    while leg_start < samples.len() {
        let leg_index = samples[leg_start].wp_index;
        let mut next = leg_start;
        while next < samples.len() && samples[next].wp_index == leg_index {
            next += 1;
        }
        // the first row of the following leg closes the last window of this one
        let leg_end = next.min(samples.len() - 1);
        if leg_index < mission.waypoints.len() {
            cut_leg(samples, leg_start, leg_end, leg_index, mission, opts, &mut out);
        }
        leg_start = next;
    }
    out
}

fn cut_leg(
    samples: &[crate::vessel::LogSample],
    first: usize,
    last: usize,
    leg_index: usize,
    mission: &Mission,
    opts: &TrainingOptions,
    out: &mut Vec<DisplacementSample>,
) {
    let leg = mission.leg(leg_index);
    let Some(dir) = leg.direction() else {
        return;
    };
    let v_cmd = leg.to.speed;

    let on_course = |s: &crate::vessel::LogSample| {
        let to = s.target - s.state.position();
        to.norm() == 0.0 || normalize_angle(to.angle() - s.state.heading()).abs() <= opts.max_heading_error
    };
    let mut i = first;
    while i < last && !on_course(&samples[i]) {
        i += 1;
    }

    while i < last {
        let t0 = samples[i].time();
        let Some(j) = (i + 1..=last).find(|&k| samples[k].time() - t0 >= opts.window_s - TIME_EPS)
        else {
            break;
        };
        if let Some(off) = (i..=j).find(|&k| !on_course(&samples[k])) {
            i = off + 1;
            while i < last && !on_course(&samples[i]) {
                i += 1;
            }
            continue;
        }
        let mut desired = Vec2::ZERO;
        let mut wind = Vec2::ZERO;
        let mut current = Vec2::ZERO;
        for k in i..j {
            let s = &samples[k];
            let dt = samples[k + 1].time() - s.time();
            if let Some(u) = (s.target - s.state.position()).normalized() {
                desired += u * (v_cmd * dt);
            }
            wind += s.wind;
            current += s.current;
        }
        let count = (j - i) as f64;
        let actual = samples[j].state.position() - samples[i].state.position();
        out.push(DisplacementSample {
            inputs: ForceInputs::from_world(wind * (1.0 / count), current * (1.0 / count), v_cmd, dir),
            error: PathVec::from_world(actual - desired, dir),
        });
        i = j;
    }
}
