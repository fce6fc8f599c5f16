//! Trajectory log CSV.

use std::path::Path;

use super::{check_header, field_f64, read_text, write_text, IoError};
use crate::geo::{heading_from_compass_deg, heading_to_compass_deg, Pose, Vec2};
use crate::vessel::{LogSample, TrajectoryLog, VesselState};

pub const TRAJECTORY_HEADER: [&str; 16] = [
    "t_s",
    "x_m",
    "y_m",
    "heading_deg_compass",
    "water_speed_mps",
    "gvx_mps",
    "gvy_mps",
    "wp_index",
    "target_x_m",
    "target_y_m",
    "intermediate_x_m",
    "intermediate_y_m",
    "wind_vx",
    "wind_vy",
    "cur_vx",
    "cur_vy",
];

/// Renders a log as CSV text. Floats use shortest round-trip formatting.
pub fn trajectory_to_csv(log: &TrajectoryLog) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRAJECTORY_HEADER).expect("writing to memory");
    for s in &log.samples {
        let st = &s.state;
        let f = |v: f64| v.to_string();
        w.write_record([
            f(st.time),
            f(st.pose.position.x),
            f(st.pose.position.y),
            f(heading_to_compass_deg(st.pose.heading)),
            f(st.water_speed),
            f(st.ground_vel.x),
            f(st.ground_vel.y),
            s.wp_index.to_string(),
            f(s.target.x),
            f(s.target.y),
            f(s.intermediate.x),
            f(s.intermediate.y),
            f(s.wind.x),
            f(s.wind.y),
            f(s.current.x),
            f(s.current.y),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV output is UTF-8")
}

pub fn write_trajectory(path: &Path, log: &TrajectoryLog) -> Result<(), IoError> {
    write_text(path, &trajectory_to_csv(log))
}

/// Parses trajectory CSV text. The file carries no timeout flag, so the
/// returned log has `timed_out = false`; completion is still judged from the
/// final row by the metrics.
pub fn parse_trajectory(path: &Path, text: &str) -> Result<TrajectoryLog, IoError> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| IoError::csv(path, e))?.clone();
    check_header(path, &header, &TRAJECTORY_HEADER)?;
    let mut samples = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| IoError::csv(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let v = |i: usize| field_f64(path, &rec, i, TRAJECTORY_HEADER[i]);
        let wp_index = rec[7]
            .trim()
            .parse::<usize>()
            .map_err(|_| IoError::parse(path, line, format!("`wp_index` is not an index: `{}`", &rec[7])))?;
        let values = [
            v(0)?, v(1)?, v(2)?, v(3)?, v(4)?, v(5)?, v(6)?, v(8)?, v(9)?, v(10)?, v(11)?, v(12)?,
            v(13)?, v(14)?, v(15)?,
        ];
        if let Some(k) = values.iter().position(|x| !x.is_finite()) {
            return Err(IoError::parse(path, line, format!("non-finite value in field {}", k + 1)));
        }
        let [t, x, y, hdg, ws, gvx, gvy, tx, ty, ix, iy, wx, wy, cx, cy] = values;
        samples.push(LogSample {
            state: VesselState {
                pose: Pose::new(Vec2::new(x, y), heading_from_compass_deg(hdg)),
                water_speed: ws,
                ground_vel: Vec2::new(gvx, gvy),
                time: t,
            },
            wp_index,
            target: Vec2::new(tx, ty),
            intermediate: Vec2::new(ix, iy),
            wind: Vec2::new(wx, wy),
            current: Vec2::new(cx, cy),
        });
    }
    let log = TrajectoryLog {
        samples,
        timed_out: false,
    };
    log.validate().map_err(|m| IoError::invalid(path, m))?;
    Ok(log)
}

pub fn read_trajectory(path: &Path) -> Result<TrajectoryLog, IoError> {
    parse_trajectory(path, &read_text(path)?)
}
