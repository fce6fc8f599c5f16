//! Force-map files (JSON) and rasterized grid CSV.
//!
//! A map file stores the training samples and hyperparameters; loading refits
//! the Gaussian process, which is deterministic.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, write_text, IoError};
use crate::forcefield::{fit_gp, ForceSample, ForceSource, GpForceMap, GpHyperparams, GridCell};

pub const MAP_SCHEMA: &str = "leeway-forcemap/1";
pub const GRID_HEADER: [&str; 6] = ["x_m", "y_m", "vx_mps", "vy_mps", "varx", "vary"];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    schema: String,
    source: ForceSource,
    hyper: GpHyperparams,
    samples: Vec<ForceSample>,
}

pub fn map_to_json(map: &GpForceMap) -> String {
    let samples = map
        .training_points()
        .iter()
        .zip(map.training_values())
        .map(|(&position, &vector)| ForceSample {
            position,
            vector,
            source: map.source(),
            time: 0.0,
        })
        .collect();
    let file = MapFile {
        schema: MAP_SCHEMA.into(),
        source: map.source(),
        hyper: *map.hyper(),
        samples,
    };
    serde_json::to_string(&file).expect("map serializes") + "\n"
}

pub fn write_map(path: &Path, map: &GpForceMap) -> Result<(), IoError> {
    write_text(path, &map_to_json(map))
}

pub fn parse_map(path: &Path, text: &str) -> Result<GpForceMap, IoError> {
    let file: MapFile = serde_json::from_str(text).map_err(|e| IoError::json(path, e))?;
    if file.schema != MAP_SCHEMA {
        return Err(IoError::invalid(
            path,
            format!("unsupported schema `{}` (expected `{MAP_SCHEMA}`)", file.schema),
        ));
    }
    if let Some(s) = file.samples.iter().find(|s| s.source != file.source) {
        return Err(IoError::invalid(
            path,
            format!("sample source `{}` differs from map source `{}`", s.source, file.source),
        ));
    }
    fit_gp(&file.samples, file.hyper).map_err(|e| IoError::invalid(path, e.to_string()))
}

pub fn read_map(path: &Path) -> Result<GpForceMap, IoError> {
    parse_map(path, &read_text(path)?)
}

pub fn grid_to_csv(cells: &[GridCell]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(GRID_HEADER).expect("writing to memory");
    for c in cells {
        w.write_record(
            [c.position.x, c.position.y, c.mean.x, c.mean.y, c.variance.x, c.variance.y].map(|v| v.to_string()),
        )
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV output is UTF-8")
}

pub fn write_grid(path: &Path, cells: &[GridCell]) -> Result<(), IoError> {
    write_text(path, &grid_to_csv(cells))
}
