//! Kinematic surface-vehicle simulation and the baseline waypoint navigator.
//!
//! The hull is a unicycle: heading slews at a bounded turn rate, speed through
//! the water slews at a bounded acceleration, and wind and current add drift
//! velocity on top of propulsion. The navigator is a PID pair: one loop turns
//! the bow toward the active waypoint, the other holds speed over ground.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::displacement::{absolute_to_relative, relative_to_absolute, RelativeReading};
use crate::forcefield::{ForceField, ForceSource};
use crate::geo::{normalize_angle, polyline_length, LocalPoint, Pose, Vec2};

/// Time-step tolerance used when comparing accumulated simulation times.
pub const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("time step {0} s outside (0, 1]")]
    InvalidTimeStep(f64),
    #[error("invalid mission: {0}")]
    InvalidMission(String),
    #[error("invalid vessel parameters: {0}")]
    InvalidParams(String),
    #[error("augmenter failed: {0}")]
    Augmenter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VesselParams {
    /// m/s through the water.
    pub max_speed: f64,
    /// m/s².
    pub max_accel: f64,
    /// rad/s.
    pub max_turn_rate: f64,
    /// Fraction of the wind velocity that becomes hull drift.
    pub k_wind: f64,
    /// Fraction of the current velocity that becomes hull drift.
    pub k_current: f64,
}

impl Default for VesselParams {
    fn default() -> Self {
        Self {
            max_speed: 4.0,
            max_accel: 1.0,
            max_turn_rate: 0.6,
            k_wind: 0.05,
            k_current: 1.0,
        }
    }
}

impl VesselParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("max_speed", self.max_speed),
            ("max_accel", self.max_accel),
            ("max_turn_rate", self.max_turn_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("k_wind", self.k_wind), ("k_current", self.k_current)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SimError::InvalidParams(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    /// Drift velocity added to propulsion for the given field values.
    pub fn drift(&self, wind: Vec2, current: Vec2) -> Vec2 {
        current * self.k_current + wind * self.k_wind
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VesselState {
    pub pose: Pose,
    /// Propulsion speed through the water, m/s.
    pub water_speed: f64,
    /// Velocity over ground, m/s.
    pub ground_vel: Vec2,
    /// Seconds since mission start.
    pub time: f64,
}

impl VesselState {
    pub fn position(&self) -> LocalPoint {
        self.pose.position
    }

    pub fn heading(&self) -> f64 {
        self.pose.heading
    }

    /// State at rest-in-the-water-frame defaults, with ground velocity derived
    /// from the fields at `position`.
    pub fn new(
        position: LocalPoint,
        heading: f64,
        water_speed: f64,
        env: &Environment<'_>,
        params: &VesselParams,
    ) -> Self {
        let pose = Pose::new(position, heading);
        Self {
            pose,
            water_speed,
            ground_vel: ground_velocity(&pose, water_speed, env, params),
            time: 0.0,
        }
    }
}

/// Gains for one PID loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidGains {
    pub heading: LoopGains,
    pub speed: LoopGains,
    /// Absolute clamp applied to both integrators.
    pub integral_limit: f64,
    /// The heading integrator only accumulates while the heading error is
    /// inside this band, radians; large turns do not wind it up.
    pub heading_integral_band: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            heading: LoopGains {
                kp: 1.2,
                ki: 0.05,
                kd: 0.3,
            },
            speed: LoopGains {
                kp: 0.8,
                ki: 0.1,
                kd: 0.0,
            },
            integral_limit: 5.0,
            heading_integral_band: 30f64.to_radians(),
        }
    }
}

impl PidGains {
    pub fn validate(&self) -> Result<(), SimError> {
        for g in [self.heading, self.speed] {
            if g.kp < 0.0 || g.ki < 0.0 || g.kd < 0.0 {
                return Err(SimError::InvalidParams("PID gains must be non-negative".into()));
            }
        }
        if !(self.integral_limit > 0.0) {
            return Err(SimError::InvalidParams("integral_limit must be positive".into()));
        }
        if !(self.heading_integral_band > 0.0) {
            return Err(SimError::InvalidParams("heading_integral_band must be positive".into()));
        }
        Ok(())
    }
}

/// Navigator output for one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    /// rad, CCW from east.
    pub target_heading: f64,
    /// m/s through the water.
    pub target_speed: f64,
    /// Requested turn rate, rad/s. `None` slews straight at the target heading
    /// at the maximum rate without overshooting.
    pub turn_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub position: LocalPoint,
    /// Target speed over ground, m/s.
    pub speed: f64,
}

impl Waypoint {
    pub fn new(position: LocalPoint, speed: f64) -> Self {
        Self { position, speed }
    }
}

pub const DEFAULT_ACCEPTANCE_RADIUS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mission {
    /// Where the vessel starts; the first leg runs from here to `waypoints[0]`.
    pub start: LocalPoint,
    pub waypoints: Vec<Waypoint>,
    pub acceptance_radius: f64,
}

/// A straight leg of a mission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub from: LocalPoint,
    pub to: Waypoint,
}

impl Leg {
    /// Unit direction of travel, or `None` for a zero-length leg.
    pub fn direction(&self) -> Option<Vec2> {
        (self.to.position - self.from).normalized()
    }
}

impl Mission {
    pub fn new(start: LocalPoint, waypoints: Vec<Waypoint>) -> Self {
        Self {
            start,
            waypoints,
            acceptance_radius: DEFAULT_ACCEPTANCE_RADIUS,
        }
    }

    pub fn validate(&self, max_speed: Option<f64>) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidMission(m));
        if self.waypoints.is_empty() {
            return bad("mission has no waypoints".into());
        }
        if !(self.acceptance_radius > 0.0) {
            return bad(format!("acceptance radius must be positive, got {}", self.acceptance_radius));
        }
        if !self.start.is_finite() {
            return bad("start position is not finite".into());
        }
        for (i, wp) in self.waypoints.iter().enumerate() {
            if !wp.position.is_finite() {
                return bad(format!("waypoint {i} position is not finite"));
            }
            if !(wp.speed > 0.0) {
                return bad(format!("waypoint {i} speed must be positive, got {}", wp.speed));
            }
            if let Some(max) = max_speed {
                if wp.speed > max + 1e-12 {
                    return bad(format!("waypoint {i} speed {} exceeds max speed {max}", wp.speed));
                }
            }
        }
        Ok(())
    }

    /// Leg ending at waypoint `index`.
    pub fn leg(&self, index: usize) -> Leg {
        let from = if index == 0 {
            self.start
        } else {
            self.waypoints[index - 1].position
        };
        Leg {
            from,
            to: self.waypoints[index],
        }
    }

    /// Start followed by every waypoint position.
    pub fn path(&self) -> Vec<LocalPoint> {
        std::iter::once(self.start)
            .chain(self.waypoints.iter().map(|w| w.position))
            .collect()
    }

    pub fn path_length(&self) -> f64 {
        polyline_length(&self.path())
    }

    /// Ten times the straight-line duration at the slowest leg speed.
    pub fn timeout(&self) -> f64 {
        let slowest = self
            .waypoints
            .iter()
            .map(|w| w.speed)
            .fold(f64::INFINITY, f64::min);
        10.0 * self.path_length() / slowest
    }
}

/// Wind and current seen by the simulated hull.
#[derive(Clone, Copy)]
pub struct Environment<'a> {
    pub wind: &'a dyn ForceField,
    pub current: &'a dyn ForceField,
}

impl<'a> Environment<'a> {
    pub fn new(wind: &'a dyn ForceField, current: &'a dyn ForceField) -> Self {
        Self { wind, current }
    }

    pub fn sample(&self, p: LocalPoint) -> (Vec2, Vec2) {
        (self.wind.query(p), self.current.query(p))
    }
}

/// Integrator and derivative memory carried between navigator ticks.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidMemory {
    pub heading_integral: f64,
    pub speed_integral: f64,
    pub prev_heading_error: Option<f64>,
    pub prev_speed_error: Option<f64>,
}

/// One navigator tick toward `active_wp`.
///
/// Heading loop: the error between the bearing to the waypoint and the current
/// heading, wrapped to (−π, π], feeds a PID whose output is a turn-rate request.
/// Speed loop: speed over ground is held at the waypoint speed, with the PID
/// correction added on top of the waypoint speed as feed-forward.
pub fn pid_step(
    state: &VesselState,
    active_wp: &Waypoint,
    gains: &PidGains,
    dt: f64,
    memory: PidMemory,
) -> (Command, PidMemory) {
    let mut mem = memory;
    let limit = gains.integral_limit;

    let to_wp = active_wp.position - state.position();
    let target_heading = if to_wp.norm() > 0.0 {
        to_wp.angle()
    } else {
        state.heading()
    };
    let e_h = normalize_angle(target_heading - state.heading());
    if e_h.abs() <= gains.heading_integral_band {
        mem.heading_integral = (mem.heading_integral + e_h * dt).clamp(-limit, limit);
    }
    // wrap the difference so a bearing flip through ±π does not spike the D term
    let d_h = mem
        .prev_heading_error
        .map_or(0.0, |prev| normalize_angle(e_h - prev) / dt);
    mem.prev_heading_error = Some(e_h);
    let g = gains.heading;
    let turn_rate = g.kp * e_h + g.ki * mem.heading_integral + g.kd * d_h;

    let e_v = active_wp.speed - state.ground_vel.norm();
    mem.speed_integral = (mem.speed_integral + e_v * dt).clamp(-limit, limit);
    let d_v = mem.prev_speed_error.map_or(0.0, |prev| (e_v - prev) / dt);
    mem.prev_speed_error = Some(e_v);
    let g = gains.speed;
    let target_speed =
        (active_wp.speed + g.kp * e_v + g.ki * mem.speed_integral + g.kd * d_v).max(0.0);

    (
        Command {
            target_heading,
            target_speed,
            turn_rate: Some(turn_rate),
        },
        mem,
    )
}

/// Velocity over ground for a pose and water speed under the environment.
pub fn ground_velocity(
    pose: &Pose,
    water_speed: f64,
    env: &Environment<'_>,
    params: &VesselParams,
) -> Vec2 {
    let (wind, current) = env.sample(pose.position);
    pose.forward() * water_speed + params.drift(wind, current)
}

/// Advances the hull by `dt` seconds.
///
/// Position integrates the ground velocity of the incoming state (explicit
/// Euler); heading and water speed then slew toward the command within the
/// turn-rate and acceleration limits.
pub fn step(
    state: &VesselState,
    cmd: &Command,
    env: &Environment<'_>,
    params: &VesselParams,
    dt: f64,
) -> VesselState {
    let vel = ground_velocity(&state.pose, state.water_speed, env, params);
    let position = state.position() + vel * dt;

    let max_turn = params.max_turn_rate * dt;
    let turn = match cmd.turn_rate {
        Some(rate) => (rate * dt).clamp(-max_turn, max_turn),
        None => normalize_angle(cmd.target_heading - state.heading()).clamp(-max_turn, max_turn),
    };
    let heading = normalize_angle(state.heading() + turn);

    let target_speed = cmd.target_speed.clamp(0.0, params.max_speed);
    let max_dv = params.max_accel * dt;
    let water_speed =
        (state.water_speed + (target_speed - state.water_speed).clamp(-max_dv, max_dv))
            .clamp(0.0, params.max_speed);

    let pose = Pose::new(position, heading);
    VesselState {
        pose,
        water_speed,
        ground_vel: ground_velocity(&pose, water_speed, env, params),
        time: state.time + dt,
    }
}

/// Hull-relative sensor readings for one tick, one per source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorFrame {
    pub wind: RelativeReading,
    pub current: RelativeReading,
}

/// Simulated anemometer and paddle wheel.
///
/// Readings are generated from the true fields and optionally perturbed by
/// zero-mean Gaussian noise on each world-frame component.
#[derive(Debug, Clone)]
pub struct SensorModel {
    wind_noise_std: f64,
    current_noise_std: f64,
    rng: ChaCha8Rng,
}

impl SensorModel {
    pub fn ideal() -> Self {
        Self::noisy(0.0, 0.0, 0)
    }

    pub fn noisy(wind_noise_std: f64, current_noise_std: f64, seed: u64) -> Self {
        Self {
            wind_noise_std,
            current_noise_std,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn perturb(&mut self, v: Vec2, std: f64) -> Vec2 {
        if std <= 0.0 {
            return v;
        }
        let n = Normal::new(0.0, std).expect("noise std is positive and finite");
        v + Vec2::new(n.sample(&mut self.rng), n.sample(&mut self.rng))
    }

    pub fn sense(&mut self, state: &VesselState, env: &Environment<'_>) -> SensorFrame {
        let (wind, current) = env.sample(state.position());
        let wind = self.perturb(wind, self.wind_noise_std);
        let current = self.perturb(current, self.current_noise_std);
        SensorFrame {
            wind: absolute_to_relative(wind, ForceSource::Wind, &state.pose, state.ground_vel, state.time),
            current: absolute_to_relative(
                current,
                ForceSource::Current,
                &state.pose,
                state.ground_vel,
                state.time,
            ),
        }
    }
}

impl SensorFrame {
    /// World-frame (wind, current) reconstructed from the readings.
    pub fn absolute(&self, state: &VesselState) -> (Vec2, Vec2) {
        (
            relative_to_absolute(&self.wind, &state.pose, state.ground_vel),
            relative_to_absolute(&self.current, &state.pose, state.ground_vel),
        )
    }
}

/// Hook through which a feed-forward stage replaces the navigator's target.
pub trait WaypointAugmenter {
    /// Target to hand the navigator in place of `leg.to`.
    fn intermediate(
        &mut self,
        state: &VesselState,
        leg: &Leg,
        leg_index: usize,
        now: f64,
        sensors: &SensorFrame,
    ) -> Result<Waypoint, String>;
}

/// One logged tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSample {
    pub state: VesselState,
    /// Index of the active true waypoint.
    pub wp_index: usize,
    pub target: LocalPoint,
    /// Target actually handed to the navigator.
    pub intermediate: LocalPoint,
    /// Sensed world-frame wind, m/s.
    pub wind: Vec2,
    /// Sensed world-frame current, m/s.
    pub current: Vec2,
}

impl LogSample {
    pub fn time(&self) -> f64 {
        self.state.time
    }
}

/// Time-ordered record of an executed mission.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub samples: Vec<LogSample>,
    pub timed_out: bool,
}

impl TrajectoryLog {
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn positions(&self) -> impl Iterator<Item = LocalPoint> + '_ {
        self.samples.iter().map(|s| s.state.position())
    }

    /// Checks that sample times strictly increase.
    pub fn validate(&self) -> Result<(), String> {
        if self.samples.is_empty() {
            return Err("trajectory log is empty".into());
        }
        for (i, w) in self.samples.windows(2).enumerate() {
            if !(w[1].time() > w[0].time()) {
                return Err(format!("sample {} time does not increase", i + 1));
            }
        }
        Ok(())
    }
}

/// Everything `run_mission` needs besides the mission itself.
pub struct RunSetup<'a> {
    pub gains: PidGains,
    pub params: VesselParams,
    pub env: Environment<'a>,
    pub dt: f64,
    pub sensors: SensorModel,
}

/// Flies `mission` from its start point until the last waypoint is accepted or
/// the timeout expires.
///
/// The vessel starts at `mission.start`, pointed at the first waypoint and
/// already moving at its speed through the water. With an augmenter the
/// navigator steers toward the augmenter's intermediate waypoint; waypoint
/// acceptance is always judged against the true waypoint.
pub fn run_mission(
    mission: &Mission,
    setup: RunSetup<'_>,
    mut augmenter: Option<&mut dyn WaypointAugmenter>,
) -> Result<TrajectoryLog, SimError> {
    let RunSetup {
        gains,
        params,
        env,
        dt,
        mut sensors,
    } = setup;
    if !(dt > 0.0 && dt <= 1.0) {
        return Err(SimError::InvalidTimeStep(dt));
    }
    params.validate()?;
    gains.validate()?;
    mission.validate(Some(params.max_speed))?;

    let first = mission.waypoints[0];
    let heading = (first.position - mission.start).angle();
    let mut state = VesselState::new(mission.start, heading, first.speed, &env, &params);
    let mut memory = PidMemory::default();
    let mut memory_leg = 0usize;
    let timeout = mission.timeout();
    let last = mission.waypoints.len() - 1;

    let mut log = TrajectoryLog::default();
    let mut index = 0usize;
    let mut tick: u64 = 0;
    loop {
        while index <= last
            && state.position().distance(mission.waypoints[index].position)
                <= mission.acceptance_radius
        {
            index += 1;
        }
        let sensed = sensors.sense(&state, &env);
        let (wind, current) = sensed.absolute(&state);
        if index > last {
            let target = mission.waypoints[last].position;
            log.samples.push(LogSample {
                state,
                wp_index: last,
                target,
                intermediate: target,
                wind,
                current,
            });
            break;
        }
        if state.time > timeout + TIME_EPS {
            log.timed_out = true;
            let target = mission.waypoints[index].position;
            log.samples.push(LogSample {
                state,
                wp_index: index,
                target,
                intermediate: target,
                wind,
                current,
            });
            log::warn!("mission timed out after {:.1} s at waypoint {index}", state.time);
            break;
        }

        if index != memory_leg {
            memory.heading_integral = 0.0;
            memory_leg = index;
        }
        let leg = mission.leg(index);
        let nav_target = match augmenter.as_deref_mut() {
            Some(aug) => aug
                .intermediate(&state, &leg, index, state.time, &sensed)
                .map_err(SimError::Augmenter)?,
            None => leg.to,
        };
        log.samples.push(LogSample {
            state,
            wp_index: index,
            target: leg.to.position,
            intermediate: nav_target.position,
            wind,
            current,
        });

        let (cmd, mem) = pid_step(&state, &nav_target, &gains, dt, memory);
        memory = mem;
        tick += 1;
        state = step(&state, &cmd, &env, &params, dt);
        // recompute from the tick count so long runs do not accumulate rounding
        state.time = tick as f64 * dt;
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcefield::SyntheticField;
    use crate::geo::cross_track;
    use std::f64::consts::PI;

    fn zero() -> SyntheticField {
        SyntheticField::zero()
    }

    fn state_at(heading: f64, water_speed: f64) -> VesselState {
        VesselState {
            pose: Pose::new(Vec2::ZERO, heading),
            water_speed,
            ground_vel: Vec2::from_angle(heading) * water_speed,
            time: 0.0,
        }
    }

    #[test]
    fn bearing_geometry() {
        let s = state_at(0.0, 2.0);
        let g = PidGains::default();
        let east = Waypoint::new(Vec2::new(50.0, 0.0), 2.0);
        let (cmd, _) = pid_step(&s, &east, &g, 0.1, PidMemory::default());
        assert_eq!(cmd.target_heading, 0.0);
        assert_eq!(cmd.turn_rate, Some(0.0));
        let north = Waypoint::new(Vec2::new(0.0, 50.0), 2.0);
        let (cmd, _) = pid_step(&s, &north, &g, 0.1, PidMemory::default());
        assert!((cmd.target_heading - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn proportional_only_turn_request() {
        let mut g = PidGains::default();
        g.heading.ki = 0.0;
        let wp = Waypoint::new(Vec2::new(10.0, 10.0), 2.0);
        let s = state_at(0.0, 2.0);
        let e = PI / 4.0;
        let (cmd, mem) = pid_step(&s, &wp, &g, 0.1, PidMemory::default());
        assert!((cmd.turn_rate.unwrap() - g.heading.kp * e).abs() < 1e-12);
        // constant error: derivative stays zero on later ticks
        let (cmd, _) = pid_step(&s, &wp, &g, 0.1, mem);
        assert!((cmd.turn_rate.unwrap() - g.heading.kp * e).abs() < 1e-12);
    }

    #[test]
    fn integrators_are_clamped() {
        let g = PidGains::default();
        let wp = Waypoint::new(Vec2::new(100.0, 10.0), 3.0);
        let s = state_at(0.0, 0.0);
        let mut mem = PidMemory::default();
        for _ in 0..1000 {
            mem = pid_step(&s, &wp, &g, 0.5, mem).1;
        }
        assert_eq!(mem.heading_integral, g.integral_limit);
        assert_eq!(mem.speed_integral, g.integral_limit);
    }

    #[test]
    fn heading_integrator_holds_outside_band() {
        let g = PidGains::default();
        let behind = Waypoint::new(Vec2::new(-10.0, 1.0), 3.0);
        let s = state_at(0.0, 0.0);
        let mut mem = PidMemory::default();
        for _ in 0..100 {
            mem = pid_step(&s, &behind, &g, 0.5, mem).1;
        }
        assert_eq!(mem.heading_integral, 0.0);
        let wide = PidGains {
            heading_integral_band: PI,
            ..g
        };
        let mem = pid_step(&s, &behind, &wide, 0.5, PidMemory::default()).1;
        assert!(mem.heading_integral > 0.0);
    }

    #[test]
    fn step_straight() {
        let f = zero();
        let env = Environment::new(&f, &f);
        let p = VesselParams::default();
        let s = state_at(0.0, 2.0);
        let cmd = Command {
            target_heading: 0.0,
            target_speed: 2.0,
            turn_rate: None,
        };
        let n = step(&s, &cmd, &env, &p, 1.0);
        assert_eq!(n.position(), Vec2::new(2.0, 0.0));
        assert_eq!(n.time, 1.0);
    }

    #[test]
    fn step_pure_drift() {
        let wind = zero();
        let cur = SyntheticField::uniform(Vec2::new(0.5, 0.0));
        let env = Environment::new(&wind, &cur);
        let p = VesselParams::default();
        let s = VesselState::new(Vec2::ZERO, 1.0, 0.0, &env, &p);
        let cmd = Command {
            target_heading: 1.0,
            target_speed: 0.0,
            turn_rate: None,
        };
        let n = step(&s, &cmd, &env, &p, 1.0);
        let n = step(&n, &cmd, &env, &p, 1.0);
        assert!((n.position() - Vec2::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn step_turn_rate_limit() {
        let f = zero();
        let env = Environment::new(&f, &f);
        let p = VesselParams {
            max_turn_rate: 0.5,
            ..VesselParams::default()
        };
        let s = state_at(0.0, 1.0);
        for cmd in [
            Command {
                target_heading: PI / 2.0,
                target_speed: 1.0,
                turn_rate: None,
            },
            Command {
                target_heading: PI / 2.0,
                target_speed: 1.0,
                turn_rate: Some(10.0),
            },
        ] {
            let n = step(&s, &cmd, &env, &p, 0.1);
            assert!((n.heading() - 0.05).abs() < 1e-12, "{}", n.heading());
        }
    }

    #[test]
    fn step_acceleration_limit() {
        let f = zero();
        let env = Environment::new(&f, &f);
        let p = VesselParams::default();
        let s = state_at(0.0, 0.0);
        let cmd = Command {
            target_heading: 0.0,
            target_speed: 100.0,
            turn_rate: None,
        };
        let n = step(&s, &cmd, &env, &p, 0.5);
        assert!((n.water_speed - p.max_accel * 0.5).abs() < 1e-12);
    }

    fn single_leg(dist: f64, speed: f64) -> Mission {
        Mission::new(Vec2::ZERO, vec![Waypoint::new(Vec2::new(dist, 0.0), speed)])
    }

    fn setup<'a>(env: Environment<'a>) -> RunSetup<'a> {
        RunSetup {
            gains: PidGains::default(),
            params: VesselParams::default(),
            env,
            dt: 0.1,
            sensors: SensorModel::ideal(),
        }
    }

    #[test]
    fn zero_field_run_reaches_target() {
        let f = zero();
        let m = single_leg(100.0, 3.0);
        let log = run_mission(&m, setup(Environment::new(&f, &f)), None).unwrap();
        assert!(!log.timed_out);
        let last = log.samples.last().unwrap();
        assert!(last.state.position().distance(Vec2::new(100.0, 0.0)) <= m.acceptance_radius);
        for s in &log.samples {
            let cte = cross_track(s.state.position(), Vec2::ZERO, Vec2::new(100.0, 0.0)).unwrap();
            assert!(cte.abs() < 0.5);
        }
        log.validate().unwrap();
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = zero();
        let m = single_leg(100.0, 3.0);
        let mut s = setup(Environment::new(&f, &f));
        s.dt = 1.5;
        assert_eq!(run_mission(&m, s, None).unwrap_err(), SimError::InvalidTimeStep(1.5));
        let empty = Mission::new(Vec2::ZERO, vec![]);
        assert!(run_mission(&empty, setup(Environment::new(&f, &f)), None).is_err());
        let fast = single_leg(100.0, 9.0);
        assert!(run_mission(&fast, setup(Environment::new(&f, &f)), None).is_err());
    }

    #[test]
    fn impossible_mission_times_out() {
        let wind = zero();
        let cur = SyntheticField::uniform(Vec2::new(-3.5, 0.0));
        let m = single_leg(50.0, 1.0);
        let log = run_mission(&m, setup(Environment::new(&wind, &cur)), None).unwrap();
        assert!(log.timed_out);
        assert!(log.samples.last().unwrap().time() >= m.timeout());
    }

    #[test]
    fn timeout_uses_slowest_leg() {
        let m = Mission::new(
            Vec2::ZERO,
            vec![
                Waypoint::new(Vec2::new(30.0, 0.0), 3.0),
                Waypoint::new(Vec2::new(30.0, 40.0), 2.0),
            ],
        );
        assert!((m.timeout() - 10.0 * 70.0 / 2.0).abs() < 1e-12);
    }
}
