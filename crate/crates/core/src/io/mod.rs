//! File formats: missions, trajectories, sensor logs, models, maps and plots.

pub mod geojson;
pub mod map;
pub mod mission;
pub mod model;
pub mod sensor_log;
pub mod trajectory;

use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl IoError {
    pub fn invalid(path: &Path, message: impl Into<String>) -> Self {
        IoError::Invalid {
            path: path.display().to_string(),
            message: message.into(),
        }
    }

    pub fn parse(path: &Path, line: u64, message: impl Into<String>) -> Self {
        IoError::Parse {
            path: path.display().to_string(),
            line,
            message: message.into(),
        }
    }

    /// Maps a CSV error to a parse error carrying its line number.
    pub(crate) fn csv(path: &Path, e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line());
        match e.into_kind() {
            csv::ErrorKind::Io(source) => IoError::Io {
                path: path.display().to_string(),
                source,
            },
            kind => IoError::parse(path, line, format!("{kind:?}")),
        }
    }

    pub(crate) fn json(path: &Path, e: serde_json::Error) -> Self {
        if e.is_io() {
            return IoError::invalid(path, e.to_string());
        }
        IoError::parse(path, e.line() as u64, e.to_string())
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| IoError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Checks a CSV header against the expected schema, naming the first
/// mismatched column.
pub(crate) fn check_header(path: &Path, found: &csv::StringRecord, expected: &[&str]) -> Result<(), IoError> {
    for (i, want) in expected.iter().enumerate() {
        match found.get(i) {
            Some(got) if got.trim() == *want => {}
            Some(got) => {
                return Err(IoError::parse(
                    path,
                    1,
                    format!("column {} should be `{want}`, found `{}`", i + 1, got.trim()),
                ))
            }
            None => {
                return Err(IoError::parse(path, 1, format!("missing column `{want}`")))
            }
        }
    }
    if found.len() > expected.len() {
        return Err(IoError::parse(
            path,
            1,
            format!("unexpected extra column `{}`", &found[expected.len()]),
        ));
    }
    Ok(())
}

/// Parses one CSV field as a float; non-finite values parse fine and are left
/// to the caller.
pub(crate) fn field_f64(path: &Path, rec: &csv::StringRecord, i: usize, name: &str) -> Result<f64, IoError> {
    let line = rec.position().map_or(0, |p| p.line());
    let raw = rec
        .get(i)
        .ok_or_else(|| IoError::parse(path, line, format!("missing field `{name}`")))?;
    raw.trim()
        .parse::<f64>()
        .map_err(|_| IoError::parse(path, line, format!("`{name}` is not a number: `{raw}`")))
}
