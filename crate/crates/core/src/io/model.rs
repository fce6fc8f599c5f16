//! Displacement-model files (JSON) and training-set CSV.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_header, field_f64, read_text, write_text, IoError};
use crate::displacement::{Coupling, DisplacementModel, DisplacementSample, FeatureVector, PathVec};

pub const MODEL_SCHEMA: &str = "leeway-displacement/1";
pub const TRAINING_HEADER: [&str; 5] = ["f_along", "f_cross", "v_cmd", "e_along", "e_cross"];

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema: String,
    #[serde(flatten)]
    model: DisplacementModel,
}

pub fn model_to_json(model: &DisplacementModel) -> String {
    let file = ModelFile {
        schema: MODEL_SCHEMA.into(),
        model: model.clone(),
    };
    serde_json::to_string_pretty(&file).expect("model serializes") + "\n"
}

pub fn write_model(path: &Path, model: &DisplacementModel) -> Result<(), IoError> {
    write_text(path, &model_to_json(model))
}

pub fn parse_model(path: &Path, text: &str) -> Result<DisplacementModel, IoError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| IoError::json(path, e))?;
    if file.schema != MODEL_SCHEMA {
        return Err(IoError::invalid(
            path,
            format!("unsupported schema `{}` (expected `{MODEL_SCHEMA}`)", file.schema),
        ));
    }
    file.model.validate().map_err(|m| IoError::invalid(path, m))?;
    Ok(file.model)
}

pub fn read_model(path: &Path) -> Result<DisplacementModel, IoError> {
    parse_model(path, &read_text(path)?)
}

/// Training rows in combined-feature form.
pub fn training_to_csv(samples: &[DisplacementSample], coupling: &Coupling) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRAINING_HEADER).expect("writing to memory");
    for s in samples {
        let f = s.inputs.combined(coupling);
        w.write_record(
            [f.f_along, f.f_cross, f.v_cmd, s.error.along, s.error.cross].map(|v| v.to_string()),
        )
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV output is UTF-8")
}

pub fn write_training(path: &Path, samples: &[DisplacementSample], coupling: &Coupling) -> Result<(), IoError> {
    write_text(path, &training_to_csv(samples, coupling))
}

pub fn parse_training(path: &Path, text: &str) -> Result<Vec<(FeatureVector, PathVec)>, IoError> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| IoError::csv(path, e))?.clone();
    check_header(path, &header, &TRAINING_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| IoError::csv(path, e))?;
        let mut v = [0.0; 5];
        for (i, x) in v.iter_mut().enumerate() {
            *x = field_f64(path, &rec, i, TRAINING_HEADER[i])?;
        }
        if v.iter().any(|x| !x.is_finite()) {
            let line = rec.position().map_or(0, |p| p.line());
            return Err(IoError::parse(path, line, "non-finite value"));
        }
        out.push((FeatureVector::new(v[0], v[1], v[2]), PathVec::new(v[3], v[4])));
    }
    Ok(out)
}

pub fn read_training(path: &Path) -> Result<Vec<(FeatureVector, PathVec)>, IoError> {
    parse_training(path, &read_text(path)?)
}
