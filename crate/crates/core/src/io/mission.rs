//! Mission files and planning-region files (JSON).
//!
//! A mission file holds one mission per robot. Points are either local
//! `{"x", "y"}` meters or geographic `{"lat", "lon"}` degrees, as declared by
//! the `coordinates` field; one file never mixes the two. Geographic files
//! need a frame `origin`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, write_text, IoError};
use crate::coverage::{CoveragePlan, LakeRegion, RiverCorridor};
use crate::geo::{Frame, GeoPoint, LocalPoint, Vec2};
use crate::vessel::{Mission, Waypoint};

pub const MISSION_SCHEMA: &str = "leeway-mission/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Coordinates {
    #[default]
    Local,
    Geo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct PlanMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lane_spacing_m: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Missions for a team of robots sharing one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MissionSet {
    pub origin: Option<GeoPoint>,
    pub metadata: PlanMetadata,
    pub missions: Vec<Mission>,
}

impl MissionSet {
    pub fn single(mission: Mission) -> Self {
        Self {
            missions: vec![mission],
            ..Self::default()
        }
    }

    pub fn from_plan(plan: &CoveragePlan, origin: Option<GeoPoint>) -> Self {
        Self {
            origin,
            metadata: PlanMetadata {
                pattern: Some(plan.pattern.as_str().into()),
                lane_spacing_m: Some(plan.lane_spacing),
                warnings: plan.warnings.clone(),
            },
            missions: plan.to_missions(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Local { x: f64, y: f64 },
    Geo { lat: f64, lon: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WaypointRepr {
    #[serde(flatten)]
    point: PointRepr,
    speed_mps: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MissionRepr {
    robot: usize,
    acceptance_radius_m: f64,
    start: PointRepr,
    waypoints: Vec<WaypointRepr>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRepr {
    schema: String,
    coordinates: Coordinates,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<GeoPoint>,
    #[serde(default)]
    metadata: PlanMetadata,
    missions: Vec<MissionRepr>,
}

/// Serializes a mission set. Geographic output needs an origin.
pub fn missions_to_json(set: &MissionSet, coords: Coordinates) -> Result<String, String> {
    let frame = match (coords, set.origin) {
        (Coordinates::Geo, None) => return Err("geographic output needs a frame origin".into()),
        (_, Some(o)) => Some(Frame::new(o).map_err(|e| e.to_string())?),
        (Coordinates::Local, None) => None,
    };
    let point = |p: LocalPoint| -> Result<PointRepr, String> {
        match (coords, &frame) {
            (Coordinates::Geo, Some(f)) => {
                let g = f.from_local(p).map_err(|e| e.to_string())?;
                Ok(PointRepr::Geo { lat: g.lat, lon: g.lon })
            }
            _ => Ok(PointRepr::Local { x: p.x, y: p.y }),
        }
    };
    let missions = set
        .missions
        .iter()
        .enumerate()
        .map(|(robot, m)| {
            Ok(MissionRepr {
                robot,
                acceptance_radius_m: m.acceptance_radius,
                start: point(m.start)?,
                waypoints: m
                    .waypoints
                    .iter()
                    .map(|w| {
                        Ok(WaypointRepr {
                            point: point(w.position)?,
                            speed_mps: w.speed,
                        })
                    })
                    .collect::<Result<_, String>>()?,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    let file = FileRepr {
        schema: MISSION_SCHEMA.into(),
        coordinates: coords,
        origin: set.origin,
        metadata: set.metadata.clone(),
        missions,
    };
    Ok(serde_json::to_string_pretty(&file).expect("mission file serializes") + "\n")
}

pub fn write_missions(path: &Path, set: &MissionSet, coords: Coordinates) -> Result<(), IoError> {
    let text = missions_to_json(set, coords).map_err(|m| IoError::invalid(path, m))?;
    write_text(path, &text)
}

pub fn parse_missions(path: &Path, text: &str) -> Result<MissionSet, IoError> {
    let file: FileRepr = serde_json::from_str(text).map_err(|e| IoError::json(path, e))?;
    if file.schema != MISSION_SCHEMA {
        return Err(IoError::invalid(
            path,
            format!("unsupported schema `{}` (expected `{MISSION_SCHEMA}`)", file.schema),
        ));
    }
    let frame = match file.origin {
        Some(o) => Some(Frame::new(o).map_err(|e| IoError::invalid(path, e.to_string()))?),
        None => None,
    };
    if file.coordinates == Coordinates::Geo && frame.is_none() {
        return Err(IoError::invalid(path, "geographic coordinates need an `origin`"));
    }
    let convert = |p: PointRepr, what: &str| -> Result<LocalPoint, IoError> {
        match (file.coordinates, p) {
            (Coordinates::Local, PointRepr::Local { x, y }) => Vec2::new(x, y)
                .validate_local()
                .map_err(|e| IoError::invalid(path, format!("{what}: {e}"))),
            (Coordinates::Geo, PointRepr::Geo { lat, lon }) => {
                let g = GeoPoint::new(lat, lon).map_err(|e| IoError::invalid(path, format!("{what}: {e}")))?;
                frame
                    .expect("checked above")
                    .to_local(g)
                    .map_err(|e| IoError::invalid(path, format!("{what}: {e}")))
            }
            (declared, _) => Err(IoError::invalid(
                path,
                format!("{what} does not use the declared {declared:?} coordinates; files never mix local and geographic points"),
            )),
        }
    };
    let mut missions = Vec::with_capacity(file.missions.len());
    for (i, m) in file.missions.into_iter().enumerate() {
        if m.robot != i {
            return Err(IoError::invalid(
                path,
                format!("mission {i} is labelled robot {}; robots must be listed in order", m.robot),
            ));
        }
        let start = convert(m.start, &format!("mission {i} start"))?;
        let waypoints = m
            .waypoints
            .into_iter()
            .enumerate()
            .map(|(j, w)| Ok(Waypoint::new(convert(w.point, &format!("mission {i} waypoint {j}"))?, w.speed_mps)))
            .collect::<Result<Vec<_>, IoError>>()?;
        let mission = Mission {
            start,
            waypoints,
            acceptance_radius: m.acceptance_radius_m,
        };
        mission
            .validate(None)
            .map_err(|e| IoError::invalid(path, format!("mission {i}: {e}")))?;
        missions.push(mission);
    }
    if missions.is_empty() {
        return Err(IoError::invalid(path, "file holds no missions"));
    }
    Ok(MissionSet {
        origin: file.origin,
        metadata: file.metadata,
        missions,
    })
}

pub fn read_missions(path: &Path) -> Result<MissionSet, IoError> {
    parse_missions(path, &read_text(path)?)
}

/// Area to plan over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionSpec {
    Lake {
        boundary: Vec<LocalPoint>,
        #[serde(default)]
        orientation_deg: f64,
        /// One start point per robot for area partitioning.
        #[serde(default)]
        starts: Vec<LocalPoint>,
    },
    River {
        centerline: Vec<LocalPoint>,
        width_m: f64,
    },
    Star {
        center: LocalPoint,
        radius_m: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<GeoPoint>,
    pub region: RegionSpec,
}

impl RegionFile {
    pub fn lake(&self) -> Option<Result<LakeRegion, String>> {
        match &self.region {
            RegionSpec::Lake { boundary, .. } => Some(LakeRegion::new(boundary.clone()).map_err(|e| e.to_string())),
            _ => None,
        }
    }

    pub fn river(&self) -> Option<Result<RiverCorridor, String>> {
        match &self.region {
            RegionSpec::River { centerline, width_m } => {
                Some(RiverCorridor::new(centerline.clone(), *width_m).map_err(|e| e.to_string()))
            }
            _ => None,
        }
    }
}

pub fn read_region(path: &Path) -> Result<RegionFile, IoError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| IoError::json(path, e))
}
