//! Offline waypoint generation for survey coverage.
//!
//! Lakes are swept with parallel lanes; rivers are modeled as a constant-width
//! corridor around a centerline and covered with longitudinal lanes (L),
//! transects (T) or a single zig-zag pass (Z). Plans can be split across
//! several robots, and lane visiting order can be optimized.

mod multi;
mod order;
mod river;
mod sweep;

pub use multi::{partition_area, split_path, split_cost};
pub use order::{exact_order, lane_sequence_cost, nearest_neighbor_order, order_lanes, two_opt};
pub use river::{l_cover, t_cover, z_cover};
pub use sweep::{boustrophedon, sweep_lanes};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{distance_to_segment, polyline_length, LocalPoint, Vec2};
use crate::vessel::{Mission, Waypoint, DEFAULT_ACCEPTANCE_RADIUS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverageError {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid corridor: {0}")]
    InvalidCorridor(String),
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("need at least one robot")]
    NoRobots,
    #[error("plan has {0} robots; expected a single-robot plan")]
    NotSingleRobot(usize),
    #[error("region produced no lanes")]
    NoLanes,
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64, CoverageError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CoverageError::NonPositive { name, value })
    }
}

/// A lake outline: simple polygon, stored counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LakeRegion {
    boundary: Vec<LocalPoint>,
}

impl LakeRegion {
    /// Validates the outline and reorients it counter-clockwise.
    pub fn new(mut boundary: Vec<LocalPoint>) -> Result<Self, CoverageError> {
        if boundary.len() >= 2 && boundary.first() == boundary.last() {
            boundary.pop();
        }
        if boundary.len() < 3 {
            return Err(CoverageError::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                boundary.len()
            )));
        }
        if let Some(i) = boundary.iter().position(|p| !p.is_finite()) {
            return Err(CoverageError::InvalidPolygon(format!("vertex {i} is not finite")));
        }
        let area = signed_area(&boundary);
        if area.abs() <= 1e-9 {
            return Err(CoverageError::InvalidPolygon("zero area".into()));
        }
        if let Some((i, j)) = self_intersection(&boundary) {
            return Err(CoverageError::InvalidPolygon(format!(
                "edges {i} and {j} intersect"
            )));
        }
        if area < 0.0 {
            boundary.reverse();
        }
        Ok(Self { boundary })
    }

    /// Axis-aligned rectangle with corners `min` and `max`.
    pub fn rectangle(min: LocalPoint, max: LocalPoint) -> Result<Self, CoverageError> {
        Self::new(vec![
            min,
            Vec2::new(max.x, min.y),
            max,
            Vec2::new(min.x, max.y),
        ])
    }

    pub fn boundary(&self) -> &[LocalPoint] {
        &self.boundary
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.boundary)
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, p: LocalPoint) -> bool {
        let b = &self.boundary;
        let mut inside = false;
        let mut j = b.len() - 1;
        for i in 0..b.len() {
            let (a, c) = (b[i], b[j]);
            if (a.y > p.y) != (c.y > p.y) && p.x < (c.x - a.x) * (p.y - a.y) / (c.y - a.y) + a.x {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    /// Distance from `p` to the outline.
    pub fn boundary_distance(&self, p: LocalPoint) -> f64 {
        let b = &self.boundary;
        (0..b.len())
            .map(|i| distance_to_segment(p, b[i], b[(i + 1) % b.len()]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            boundary: self.boundary.iter().map(|p| p.rotate(angle)).collect(),
        }
    }
}

fn signed_area(b: &[LocalPoint]) -> f64 {
    let n = b.len();
    0.5 * (0..n).map(|i| b[i].cross(b[(i + 1) % n])).sum::<f64>()
}

fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = (p2 - p1).cross(q1 - p1);
    let d2 = (p2 - p1).cross(q2 - p1);
    let d3 = (q2 - q1).cross(p1 - q1);
    let d4 = (q2 - q1).cross(p2 - q1);
    if ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0)) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0 {
        return true;
    }
    let on = |a: Vec2, b: Vec2, p: Vec2, d: f64| d == 0.0 && distance_to_segment(p, a, b) <= 1e-12;
    on(p1, p2, q1, d1) || on(p1, p2, q2, d2) || on(q1, q2, p1, d3) || on(q1, q2, p2, d4)
}

fn self_intersection(b: &[LocalPoint]) -> Option<(usize, usize)> {
    let n = b.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(b[i], b[(i + 1) % n], b[j], b[(j + 1) % n]) {
                return Some((i, j));
            }
        }
    }
    None
}

/// A river reach: centerline plus a constant width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiverCorridor {
    centerline: Vec<LocalPoint>,
    width: f64,
}

impl RiverCorridor {
    pub fn new(centerline: Vec<LocalPoint>, width: f64) -> Result<Self, CoverageError> {
        if centerline.len() < 2 {
            return Err(CoverageError::InvalidCorridor(
                "centerline needs at least 2 vertices".into(),
            ));
        }
        if let Some(i) = centerline.iter().position(|p| !p.is_finite()) {
            return Err(CoverageError::InvalidCorridor(format!("vertex {i} is not finite")));
        }
        for (i, w) in centerline.windows(2).enumerate() {
            if w[0].distance(w[1]) <= 1e-9 {
                return Err(CoverageError::InvalidCorridor(format!(
                    "vertices {i} and {} coincide",
                    i + 1
                )));
            }
        }
        positive("width", width)?;
        Ok(Self { centerline, width })
    }

    pub fn centerline(&self) -> &[LocalPoint] {
        &self.centerline
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn length(&self) -> f64 {
        polyline_length(&self.centerline)
    }

    /// Point and unit tangent at arclength `s`, clamped to the ends.
    ///
    /// A station exactly on an interior vertex takes the tangent of the
    /// segment that starts there.
    pub fn station(&self, s: f64) -> (LocalPoint, Vec2) {
        let c = &self.centerline;
        let mut acc = 0.0;
        for i in 0..c.len() - 1 {
            let len = c[i].distance(c[i + 1]);
            let dir = (c[i + 1] - c[i]) * (1.0 / len);
            if s < acc + len || i == c.len() - 2 {
                let t = (s - acc).clamp(0.0, len);
                return (c[i] + dir * t, dir);
            }
            acc += len;
        }
        unreachable!("centerline has at least one segment")
    }

    /// Centerline shifted sideways by `offset` (positive left), with mitered joins.
    pub fn offset_polyline(&self, offset: f64) -> Vec<LocalPoint> {
        offset_polyline(&self.centerline, offset)
    }
}

pub(crate) fn offset_polyline(c: &[LocalPoint], offset: f64) -> Vec<LocalPoint> {
    let n = c.len();
    let normal = |i: usize| (c[i + 1] - c[i]).normalized().expect("distinct vertices").perp();
    (0..n)
        .map(|i| {
            if i == 0 {
                c[0] + normal(0) * offset
            } else if i == n - 1 {
                c[i] + normal(n - 2) * offset
            } else {
                let (a, b) = (normal(i - 1), normal(i));
                let bisector = (a + b).normalized().unwrap_or(b);
                let cos_half = bisector.dot(b).max(0.1);
                c[i] + bisector * (offset / cos_half)
            }
        })
        .collect()
}

/// A directed polyline the vehicle traverses from first to last point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub points: Vec<LocalPoint>,
}

impl Lane {
    pub fn new(points: Vec<LocalPoint>) -> Self {
        assert!(!points.is_empty(), "a lane needs at least one point");
        Self { points }
    }

    pub fn segment(a: LocalPoint, b: LocalPoint) -> Self {
        Self::new(vec![a, b])
    }

    pub fn start(&self) -> LocalPoint {
        self.points[0]
    }

    pub fn end(&self) -> LocalPoint {
        *self.points.last().expect("lane is non-empty")
    }

    pub fn length(&self) -> f64 {
        polyline_length(&self.points)
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self { points }
    }

    /// Same lane regardless of direction, compared exactly.
    pub fn same_geometry(&self, other: &Lane) -> bool {
        self == other || *self == other.reversed()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Boustrophedon,
    L,
    T,
    Z,
    Star,
}

impl Pattern {
    pub fn as_str(self) -> &'static str {
        match self {
            Pattern::Boustrophedon => "boustrophedon",
            Pattern::L => "l",
            Pattern::T => "t",
            Pattern::Z => "z",
            Pattern::Star => "star",
        }
    }
}

impl std::str::FromStr for Pattern {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "boustrophedon" => Ok(Pattern::Boustrophedon),
            "l" => Ok(Pattern::L),
            "t" => Ok(Pattern::T),
            "z" => Ok(Pattern::Z),
            "star" => Ok(Pattern::Star),
            other => Err(format!(
                "unknown pattern `{other}` (expected boustrophedon|l|t|z|star)"
            )),
        }
    }
}

/// Ordered lanes for one robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotRoute {
    /// Index of the robot (and its start point, when starts were given).
    pub robot: usize,
    pub lanes: Vec<Lane>,
}

impl RobotRoute {
    /// Lane points in visiting order; consecutive lanes are joined directly.
    pub fn waypoints(&self) -> Vec<LocalPoint> {
        let mut out: Vec<LocalPoint> = Vec::new();
        for lane in &self.lanes {
            for &p in &lane.points {
                if out.last() != Some(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Lanes plus the connectors between them.
    pub fn length(&self) -> f64 {
        polyline_length(&self.waypoints())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveragePlan {
    pub pattern: Pattern,
    pub lane_spacing: f64,
    pub speed: f64,
    pub routes: Vec<RobotRoute>,
    pub warnings: Vec<String>,
}

impl CoveragePlan {
    /// Single-robot plan over `lanes` in the given order.
    pub fn single(pattern: Pattern, lane_spacing: f64, speed: f64, lanes: Vec<Lane>) -> Self {
        Self {
            pattern,
            lane_spacing,
            speed,
            routes: vec![RobotRoute { robot: 0, lanes }],
            warnings: Vec::new(),
        }
    }

    /// Every lane of every robot.
    pub fn lanes(&self) -> impl Iterator<Item = &Lane> {
        self.routes.iter().flat_map(|r| r.lanes.iter())
    }

    /// Lane-to-lane transitions summed over robots.
    pub fn turn_count(&self) -> usize {
        self.routes.iter().map(|r| r.lanes.len().saturating_sub(1)).sum()
    }

    /// One mission per robot, starting at its first waypoint.
    pub fn to_missions(&self) -> Vec<Mission> {
        self.routes
            .iter()
            .map(|r| {
                let pts = r.waypoints();
                let wps = pts[1..]
                    .iter()
                    .map(|&p| Waypoint::new(p, self.speed))
                    .collect::<Vec<_>>();
                let wps = if wps.is_empty() {
                    vec![Waypoint::new(pts[0], self.speed)]
                } else {
                    wps
                };
                Mission {
                    start: pts[0],
                    waypoints: wps,
                    acceptance_radius: DEFAULT_ACCEPTANCE_RADIUS,
                }
            })
            .collect()
    }
}

pub const STAR_ARMS: usize = 8;

/// Eight out-and-back missions from `center` at 45° increments, starting east.
pub fn star_pattern(center: LocalPoint, radius: f64, speed: f64) -> Result<Vec<Mission>, CoverageError> {
    positive("radius", radius)?;
    positive("speed", speed)?;
    Ok((0..STAR_ARMS)
        .map(|i| {
            let angle = (i as f64 * 45.0).to_radians();
            let end = center + Vec2::from_angle(angle) * radius;
            Mission::new(center, vec![Waypoint::new(end, speed), Waypoint::new(center, speed)])
        })
        .collect())
}
