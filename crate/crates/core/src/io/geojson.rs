//! GeoJSON export of missions and trajectories for plotting.

use std::path::Path;

use serde_json::{json, Value};

use super::{write_text, IoError};
use crate::geo::{Frame, GeoError, LocalPoint};
use crate::vessel::{Mission, TrajectoryLog};

fn line(frame: &Frame, points: impl Iterator<Item = LocalPoint>) -> Result<Value, GeoError> {
    let coords = points
        .map(|p| frame.from_local(p).map(|g| json!([g.lon, g.lat])))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(json!({ "type": "LineString", "coordinates": coords }))
}

/// Feature collection with the planned path and, when given, the flown track.
pub fn to_geojson(frame: &Frame, mission: &Mission, log: Option<&TrajectoryLog>) -> Result<Value, GeoError> {
    let mut features = vec![json!({
        "type": "Feature",
        "properties": { "kind": "plan" },
        "geometry": line(frame, mission.path().into_iter())?,
    })];
    if let Some(log) = log {
        features.push(json!({
            "type": "Feature",
            "properties": { "kind": "track", "timed_out": log.timed_out },
            "geometry": line(frame, log.positions())?,
        }));
    }
    Ok(json!({ "type": "FeatureCollection", "features": features }))
}

pub fn write_geojson(path: &Path, frame: &Frame, mission: &Mission, log: Option<&TrajectoryLog>) -> Result<(), IoError> {
    let v = to_geojson(frame, mission, log).map_err(|e| IoError::invalid(path, e.to_string()))?;
    write_text(path, &(serde_json::to_string_pretty(&v).expect("GeoJSON serializes") + "\n"))
}
