//! Raw field-sensor log CSV: GPS fix, heading, speed over ground, anemometer
//! and paddle-wheel readings.
//!
//! Headings are compass degrees. Relative bearings are degrees clockwise from
//! the bow and give the direction the measured relative flow moves toward:
//! the apparent air flow for the anemometer, the hull's motion through the
//! water for the paddle wheel.

use std::path::Path;

use super::{check_header, field_f64, read_text, write_text, IoError};
use crate::displacement::{absolute_to_relative, relative_to_absolute, RelativeReading};
use crate::forcefield::{ForceSample, ForceSource};
use crate::geo::{heading_from_compass_deg, heading_to_compass_deg, normalize_angle, Frame, GeoPoint, Pose, Vec2};
use crate::vessel::TrajectoryLog;

pub const SENSOR_HEADER: [&str; 9] = [
    "t_s",
    "lat_deg",
    "lon_deg",
    "heading_deg_compass",
    "sog_mps",
    "wind_speed_mps",
    "wind_bearing_rel_deg",
    "water_speed_mps",
    "water_bearing_rel_deg",
];

/// Largest tolerated fraction of skipped rows.
pub const MAX_SKIPPED_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct SensorRow {
    pub time: f64,
    pub geo: GeoPoint,
    pub pose: Pose,
    pub sog: f64,
    /// Ground velocity: direction from neighboring fixes, magnitude from `sog`.
    pub ground_vel: Vec2,
    pub wind: RelativeReading,
    pub current: RelativeReading,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorLog {
    pub frame: Frame,
    pub rows: Vec<SensorRow>,
    /// Rows dropped for non-finite fields.
    pub skipped: usize,
}

impl SensorLog {
    pub fn wind_readings(&self) -> Vec<RelativeReading> {
        self.rows.iter().map(|r| r.wind).collect()
    }

    pub fn current_readings(&self) -> Vec<RelativeReading> {
        self.rows.iter().map(|r| r.current).collect()
    }

    pub fn poses(&self) -> Vec<Pose> {
        self.rows.iter().map(|r| r.pose).collect()
    }

    /// World-frame samples of one source, ready for field fitting.
    pub fn force_samples(&self, source: ForceSource) -> Vec<ForceSample> {
        self.rows
            .iter()
            .map(|r| {
                let reading = match source {
                    ForceSource::Wind => &r.wind,
                    ForceSource::Current => &r.current,
                };
                ForceSample {
                    position: r.pose.position,
                    vector: relative_to_absolute(reading, &r.pose, r.ground_vel),
                    source,
                    time: r.time,
                }
            })
            .collect()
    }

    /// Sensor readings a hull flying `log` would have recorded, one row every
    /// `stride` samples.
    pub fn from_trajectory(log: &TrajectoryLog, frame: Frame, stride: usize) -> Result<Self, String> {
        let stride = stride.max(1);
        let rows = log
            .samples
            .iter()
            .step_by(stride)
            .map(|s| {
                let st = &s.state;
                let geo = frame.from_local(st.pose.position).map_err(|e| e.to_string())?;
                Ok(SensorRow {
                    time: st.time,
                    geo,
                    pose: st.pose,
                    sog: st.ground_vel.norm(),
                    ground_vel: st.ground_vel,
                    wind: absolute_to_relative(s.wind, ForceSource::Wind, &st.pose, st.ground_vel, st.time),
                    current: absolute_to_relative(s.current, ForceSource::Current, &st.pose, st.ground_vel, st.time),
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(Self {
            frame,
            rows,
            skipped: 0,
        })
    }
}

fn cw_deg_to_ccw_rad(deg: f64) -> f64 {
    normalize_angle(-deg.to_radians())
}

fn ccw_rad_to_cw_deg(rad: f64) -> f64 {
    -normalize_angle(rad).to_degrees()
}

pub fn sensor_log_to_csv(log: &SensorLog) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SENSOR_HEADER).expect("writing to memory");
    for r in &log.rows {
        let f = |v: f64| v.to_string();
        w.write_record([
            f(r.time),
            f(r.geo.lat),
            f(r.geo.lon),
            f(heading_to_compass_deg(r.pose.heading)),
            f(r.sog),
            f(r.wind.speed),
            f(ccw_rad_to_cw_deg(r.wind.bearing_rel)),
            f(r.current.speed),
            f(ccw_rad_to_cw_deg(r.current.bearing_rel)),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV output is UTF-8")
}

pub fn write_sensor_log(path: &Path, log: &SensorLog) -> Result<(), IoError> {
    write_text(path, &sensor_log_to_csv(log))
}

struct RawRow {
    line: u64,
    values: [f64; 9],
}

/// Parses sensor CSV text into local coordinates.
///
/// The frame origin is `origin` when given, otherwise the first usable fix.
/// Rows with a non-finite field are skipped and counted; more than
/// [`MAX_SKIPPED_FRACTION`] skipped rows is an error.
pub fn parse_sensor_log(path: &Path, text: &str, origin: Option<GeoPoint>) -> Result<SensorLog, IoError> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| IoError::csv(path, e))?.clone();
    check_header(path, &header, &SENSOR_HEADER)?;

    let mut raw = Vec::new();
    let mut total = 0usize;
    let mut skipped = 0usize;
    for rec in r.records() {
        let rec = rec.map_err(|e| IoError::csv(path, e))?;
        total += 1;
        let line = rec.position().map_or(0, |p| p.line());
        let mut values = [0.0; 9];
        for (i, v) in values.iter_mut().enumerate() {
            *v = field_f64(path, &rec, i, SENSOR_HEADER[i])?;
        }
        if values.iter().any(|v| !v.is_finite()) {
            skipped += 1;
            log::warn!("{}: line {line}: non-finite field, row skipped", path.display());
            continue;
        }
        raw.push(RawRow { line, values });
    }
    if total > 0 && skipped as f64 > MAX_SKIPPED_FRACTION * total as f64 {
        return Err(IoError::invalid(
            path,
            format!("{skipped} of {total} rows have non-finite fields (limit 10%)"),
        ));
    }
    if raw.is_empty() {
        return Err(IoError::invalid(path, "no usable rows"));
    }
    if skipped > 0 {
        log::warn!("{}: skipped {skipped} rows with non-finite fields", path.display());
    }

    let geo_of = |row: &RawRow| {
        GeoPoint::new(row.values[1], row.values[2]).map_err(|e| IoError::parse(path, row.line, e.to_string()))
    };
    let origin = match origin {
        Some(o) => o,
        None => geo_of(&raw[0])?,
    };
    let frame = Frame::new(origin).map_err(|e| IoError::invalid(path, e.to_string()))?;
    let mut positions = Vec::with_capacity(raw.len());
    for row in &raw {
        let local = frame
            .to_local(geo_of(row)?)
            .map_err(|e| IoError::parse(path, row.line, e.to_string()))?;
        positions.push(local);
    }

    let mut rows = Vec::with_capacity(raw.len());
    for (i, row) in raw.iter().enumerate() {
        let [t, _, _, hdg, sog, ws, wb, cs, cb] = row.values;
        for (name, v) in [("sog_mps", sog), ("wind_speed_mps", ws), ("water_speed_mps", cs)] {
            if v < 0.0 {
                return Err(IoError::parse(path, row.line, format!("`{name}` is negative: {v}")));
            }
        }
        let pose = Pose::new(positions[i], heading_from_compass_deg(hdg));
        let prev = positions[i.saturating_sub(1)];
        let next = positions[(i + 1).min(positions.len() - 1)];
        let dir = (next - prev).normalized().unwrap_or_else(|| pose.forward());
        let ground_vel = dir * sog;
        rows.push(SensorRow {
            time: t,
            geo: geo_of(row)?,
            pose,
            sog,
            ground_vel,
            wind: RelativeReading {
                speed: ws,
                bearing_rel: cw_deg_to_ccw_rad(wb),
                source: ForceSource::Wind,
                time: t,
            },
            current: RelativeReading {
                speed: cs,
                bearing_rel: cw_deg_to_ccw_rad(cb),
                source: ForceSource::Current,
                time: t,
            },
        });
    }
    Ok(SensorLog { frame, rows, skipped })
}

pub fn read_sensor_log(path: &Path, origin: Option<GeoPoint>) -> Result<SensorLog, IoError> {
    parse_sensor_log(path, &read_text(path)?, origin)
}
