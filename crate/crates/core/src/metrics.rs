//! Path-following statistics and A/B comparison.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geo::{cross_track, polyline_length};
use crate::vessel::{Mission, TrajectoryLog};

pub const DEFAULT_THRESHOLD_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("trajectory log is empty")]
    EmptyLog,
    #[error("log row {row} refers to waypoint {index} but the mission has {count}")]
    IndexMismatch { row: usize, index: usize, count: usize },
    #[error("log row {row} targets ({x}, {y}), which is not waypoint {index} of the mission")]
    TargetMismatch { row: usize, index: usize, x: f64, y: f64 },
    #[error("runs come from different missions ({a} vs {b})")]
    MissionMismatch { a: String, b: String },
    #[error("threshold must be non-negative, got {0}")]
    BadThreshold(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    /// m.
    pub max_cross_track: f64,
    /// m.
    pub mean_abs_cross_track: f64,
    /// Fraction of samples farther than `threshold` from the active leg.
    pub pct_over_threshold: f64,
    /// m.
    pub threshold: f64,
    /// Distance travelled, m.
    pub path_length: f64,
    /// Last waypoint reached before the timeout.
    pub completion: bool,
    pub samples: usize,
    /// SHA-256 of the mission the run flew.
    pub mission_digest: String,
}

/// Stable digest of a mission's geometry, speeds and acceptance radius.
pub fn mission_digest(mission: &Mission) -> String {
    let mut h = Sha256::new();
    let mut put = |v: f64| h.update(v.to_le_bytes());
    put(mission.start.x);
    put(mission.start.y);
    put(mission.acceptance_radius);
    for wp in &mission.waypoints {
        put(wp.position.x);
        put(wp.position.y);
        put(wp.speed);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Signed cross-track of every sample against its active leg, positive left.
///
/// A zero-length leg falls back to the distance from its waypoint.
pub fn cross_track_series(log: &TrajectoryLog, mission: &Mission) -> Result<Vec<f64>, MetricsError> {
    let count = mission.waypoints.len();
    log.samples
        .iter()
        .enumerate()
        .map(|(row, s)| {
            if s.wp_index >= count {
                return Err(MetricsError::IndexMismatch {
                    row,
                    index: s.wp_index,
                    count,
                });
            }
            let leg = mission.leg(s.wp_index);
            if s.target.distance(leg.to.position) > 1e-6 {
                return Err(MetricsError::TargetMismatch {
                    row,
                    index: s.wp_index,
                    x: s.target.x,
                    y: s.target.y,
                });
            }
            let p = s.state.position();
            Ok(cross_track(p, leg.from, leg.to.position).unwrap_or_else(|_| p.distance(leg.to.position)))
        })
        .collect()
}

pub fn compute_metrics(
    log: &TrajectoryLog,
    mission: &Mission,
    threshold: f64,
) -> Result<PathMetrics, MetricsError> {
    if log.is_empty() {
        return Err(MetricsError::EmptyLog);
    }
    if !(threshold >= 0.0) {
        return Err(MetricsError::BadThreshold(threshold));
    }
    let cte = cross_track_series(log, mission)?;
    let n = cte.len() as f64;
    let abs: Vec<f64> = cte.iter().map(|c| c.abs()).collect();
    let max_cross_track = abs.iter().copied().fold(0.0, f64::max);
    let mean_abs_cross_track = abs.iter().sum::<f64>() / n;
    let over = abs.iter().filter(|&&a| a > threshold).count();

    let positions: Vec<_> = log.positions().collect();
    let last = log.samples.last().expect("log is non-empty");
    let final_wp = mission.waypoints.len() - 1;
    let completion = !log.timed_out
        && last.wp_index == final_wp
        && last.state.position().distance(mission.waypoints[final_wp].position)
            <= mission.acceptance_radius;

    Ok(PathMetrics {
        max_cross_track,
        mean_abs_cross_track,
        pct_over_threshold: over as f64 / n,
        threshold,
        path_length: polyline_length(&positions),
        completion,
        samples: cte.len(),
        mission_digest: mission_digest(mission),
    })
}

/// Number of times a series crosses from beyond `+deadband` to beyond
/// `-deadband` or back; excursions inside the band do not count.
pub fn sign_changes(series: &[f64], deadband: f64) -> usize {
    let mut side = 0i8;
    let mut changes = 0;
    for &v in series {
        let s = if v > deadband {
            1
        } else if v < -deadband {
            -1
        } else {
            0
        };
        if s != 0 {
            if side != 0 && s != side {
                changes += 1;
            }
            side = s;
        }
    }
    changes
}

/// Relative reduction `(a − b)/a`; `None` when the baseline is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub baseline: f64,
    pub candidate: f64,
    pub reduction: Option<f64>,
}

impl Reduction {
    pub fn new(baseline: f64, candidate: f64) -> Self {
        let reduction = (baseline != 0.0).then(|| (baseline - candidate) / baseline);
        Self {
            baseline,
            candidate,
            reduction,
        }
    }

    /// Percentage text, or `n/a` for a zero baseline.
    pub fn display(&self) -> String {
        match self.reduction {
            Some(r) => format!("{:.1}%", 100.0 * r),
            None => "n/a".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementReport {
    pub max_cross_track: Reduction,
    pub mean_abs_cross_track: Reduction,
    pub pct_over_threshold: Reduction,
    pub path_length: Reduction,
    pub baseline_completed: bool,
    pub candidate_completed: bool,
}

impl ImprovementReport {
    pub fn rows(&self) -> [(&'static str, &Reduction); 4] {
        [
            ("max_cross_track", &self.max_cross_track),
            ("mean_abs_cross_track", &self.mean_abs_cross_track),
            ("pct_over_threshold", &self.pct_over_threshold),
            ("path_length", &self.path_length),
        ]
    }
}

pub fn compare_runs(a: &PathMetrics, b: &PathMetrics) -> Result<ImprovementReport, MetricsError> {
    if a.mission_digest != b.mission_digest {
        return Err(MetricsError::MissionMismatch {
            a: a.mission_digest.clone(),
            b: b.mission_digest.clone(),
        });
    }
    Ok(ImprovementReport {
        max_cross_track: Reduction::new(a.max_cross_track, b.max_cross_track),
        mean_abs_cross_track: Reduction::new(a.mean_abs_cross_track, b.mean_abs_cross_track),
        pct_over_threshold: Reduction::new(a.pct_over_threshold, b.pct_over_threshold),
        path_length: Reduction::new(a.path_length, b.path_length),
        baseline_completed: a.completion,
        candidate_completed: b.completion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{Pose, Vec2};
    use crate::vessel::{LogSample, VesselState, Waypoint};

    fn mission() -> Mission {
        Mission::new(Vec2::ZERO, vec![Waypoint::new(Vec2::new(100.0, 0.0), 3.0)])
    }

    fn log_with_offsets(offsets: &[f64]) -> TrajectoryLog {
        let n = offsets.len();
        let samples = offsets
            .iter()
            .enumerate()
            .map(|(i, &y)| LogSample {
                state: VesselState {
                    pose: Pose::new(Vec2::new(100.0 * i as f64 / (n - 1) as f64, y), 0.0),
                    water_speed: 3.0,
                    ground_vel: Vec2::new(3.0, 0.0),
                    time: i as f64,
                },
                wp_index: 0,
                target: Vec2::new(100.0, 0.0),
                intermediate: Vec2::new(100.0, 0.0),
                wind: Vec2::ZERO,
                current: Vec2::ZERO,
            })
            .collect();
        TrajectoryLog {
            samples,
            timed_out: false,
        }
    }

    #[test]
    fn on_line() {
        let m = compute_metrics(&log_with_offsets(&[0.0; 11]), &mission(), 1.0).unwrap();
        assert_eq!(m.max_cross_track, 0.0);
        assert_eq!(m.pct_over_threshold, 0.0);
        assert!(m.completion);
        assert!((m.path_length - 100.0).abs() < 1e-9);
    }

    #[test]
    fn constant_offset() {
        let m = compute_metrics(&log_with_offsets(&[2.0; 5]), &mission(), 1.0).unwrap();
        assert_eq!(m.pct_over_threshold, 1.0);
        assert_eq!(m.max_cross_track, 2.0);
        assert!(m.completion);
    }

    #[test]
    fn strict_threshold() {
        let m = compute_metrics(&log_with_offsets(&[0.5, 1.5, 0.5, 1.5]), &mission(), 1.0).unwrap();
        assert_eq!(m.pct_over_threshold, 0.5);
        let m = compute_metrics(&log_with_offsets(&[1.0, 1.0]), &mission(), 1.0).unwrap();
        assert_eq!(m.pct_over_threshold, 0.0);
    }

    #[test]
    fn index_mismatch() {
        let mut log = log_with_offsets(&[0.0, 0.0]);
        log.samples[1].wp_index = 3;
        assert!(matches!(
            compute_metrics(&log, &mission(), 1.0),
            Err(MetricsError::IndexMismatch { row: 1, .. })
        ));
        assert_eq!(
            compute_metrics(&TrajectoryLog::default(), &mission(), 1.0).unwrap_err(),
            MetricsError::EmptyLog
        );
    }

    #[test]
    fn forty_eight_percent() {
        let r = Reduction::new(2.0, 1.04);
        assert!((r.reduction.unwrap() - 0.48).abs() < 1e-12);
        assert_eq!(r.display(), "48.0%");
        assert_eq!(Reduction::new(1.5, 1.5).reduction, Some(0.0));
        assert_eq!(Reduction::new(0.0, 1.0).display(), "n/a");
    }

    #[test]
    fn compare_checks_provenance() {
        let a = compute_metrics(&log_with_offsets(&[2.0; 5]), &mission(), 1.0).unwrap();
        let mut b = a.clone();
        let rep = compare_runs(&a, &b).unwrap();
        assert_eq!(rep.max_cross_track.reduction, Some(0.0));
        b.mission_digest = "other".into();
        assert!(compare_runs(&a, &b).is_err());
    }

    #[test]
    fn digest_tracks_changes() {
        let m = mission();
        let mut m2 = m.clone();
        assert_eq!(mission_digest(&m), mission_digest(&m2));
        m2.waypoints[0].speed = 2.0;
        assert_ne!(mission_digest(&m), mission_digest(&m2));
    }

    #[test]
    fn counting_sign_changes() {
        assert_eq!(sign_changes(&[1.0, -1.0, 1.0, -1.0], 0.0), 3);
        assert_eq!(sign_changes(&[1.0, 0.1, -0.1, 0.2, -2.0], 0.5), 1);
        assert_eq!(sign_changes(&[], 0.0), 0);
    }
}
