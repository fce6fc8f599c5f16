//! Coordinate frames, projections and planar geometry.
//!
//! All internal math happens in a local east/north frame measured in meters,
//! anchored at a geographic origin with an equirectangular projection. That is
//! accurate to well under a meter across the few-kilometer areas a small
//! survey boat covers, and it inverts exactly.
//!
//! Angles are radians counter-clockwise from east. File formats use compass
//! degrees (clockwise from north); see [`heading_from_compass_deg`].

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean earth radius (IUGG), meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Largest local coordinate magnitude accepted before the flat-earth
/// approximation is considered meaningless.
pub const MAX_LOCAL_MAGNITUDE_M: f64 = 1.0e7;

/// Maximum latitude/longitude distance from the frame origin, degrees.
pub const MAX_PROJECTION_SPAN_DEG: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("{field} out of range: {value}")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("{field} is not finite")]
    NonFinite { field: &'static str },
    #[error("degenerate segment: endpoints closer than 1e-9 m")]
    DegenerateSegment,
}

/// Plain 2-D vector. Used for local positions (meters) and for velocities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

/// A position in the local east/north working frame, meters.
pub type LocalPoint = Vec2;

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `angle` radians CCW from +x.
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product; positive when `other` is CCW of `self`.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Angle CCW from +x, in (−π, π].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rotate CCW by `angle` radians.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Left-hand normal (rotated +90°).
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > 1e-12).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Checks the local-frame validity guard: finite and within 10^7 m of the origin.
    pub fn validate_local(self) -> Result<Self, GeoError> {
        if !self.x.is_finite() {
            return Err(GeoError::NonFinite { field: "x" });
        }
        if !self.y.is_finite() {
            return Err(GeoError::NonFinite { field: "y" });
        }
        if self.norm() >= MAX_LOCAL_MAGNITUDE_M {
            return Err(GeoError::OutOfRange {
                field: "local magnitude",
                value: self.norm(),
            });
        }
        Ok(self)
    }

    pub fn lerp(self, other: Vec2, t: f64) -> Self {
        self + (other - self) * t
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.3}, {:.3})", self.x, self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// WGS-84 latitude/longitude in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if !lat.is_finite() {
            return Err(GeoError::NonFinite { field: "lat" });
        }
        if !lon.is_finite() {
            return Err(GeoError::NonFinite { field: "lon" });
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(GeoError::OutOfRange { field: "lat", value: lat });
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(GeoError::OutOfRange { field: "lon", value: lon });
        }
        Ok(Self { lat, lon })
    }

    pub fn validate(self) -> Result<Self, GeoError> {
        Self::new(self.lat, self.lon)
    }
}

/// Local tangent frame anchored at a geographic origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: GeoPoint,
    pub earth_radius: f64,
}

impl Frame {
    pub fn new(origin: GeoPoint) -> Result<Self, GeoError> {
        Ok(Self {
            origin: origin.validate()?,
            earth_radius: EARTH_RADIUS_M,
        })
    }

    fn cos_origin_lat(&self) -> f64 {
        self.origin.lat.to_radians().cos()
    }

    /// Equirectangular projection of `p` about the frame origin.
    pub fn to_local(&self, p: GeoPoint) -> Result<LocalPoint, GeoError> {
        let p = p.validate()?;
        let dlat = p.lat - self.origin.lat;
        let dlon = p.lon - self.origin.lon;
        if dlat.abs() >= MAX_PROJECTION_SPAN_DEG {
            return Err(GeoError::OutOfRange { field: "lat", value: p.lat });
        }
        if dlon.abs() >= MAX_PROJECTION_SPAN_DEG {
            return Err(GeoError::OutOfRange { field: "lon", value: p.lon });
        }
        Ok(Vec2::new(
            self.earth_radius * self.cos_origin_lat() * dlon.to_radians(),
            self.earth_radius * dlat.to_radians(),
        ))
    }

    /// Inverse of [`Frame::to_local`].
    pub fn from_local(&self, p: LocalPoint) -> Result<GeoPoint, GeoError> {
        if !p.x.is_finite() {
            return Err(GeoError::NonFinite { field: "x" });
        }
        if !p.y.is_finite() {
            return Err(GeoError::NonFinite { field: "y" });
        }
        let lat = self.origin.lat + (p.y / self.earth_radius).to_degrees();
        let lon = self.origin.lon + (p.x / (self.earth_radius * self.cos_origin_lat())).to_degrees();
        GeoPoint::new(lat, lon)
    }
}

/// Position plus heading (radians CCW from east, normalized to (−π, π]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: LocalPoint,
    pub heading: f64,
}

impl Pose {
    pub fn new(position: LocalPoint, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
        }
    }

    pub fn forward(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }
}

/// Wraps an angle into (−π, π].
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Compass degrees (clockwise from north) to math radians (CCW from east).
pub fn heading_from_compass_deg(compass_deg: f64) -> f64 {
    normalize_angle(PI / 2.0 - compass_deg.to_radians())
}

/// Math radians to compass degrees in [0, 360).
pub fn heading_to_compass_deg(heading: f64) -> f64 {
    let d = (PI / 2.0 - heading).to_degrees().rem_euclid(360.0);
    // rem_euclid can return exactly 360.0 for tiny negative inputs
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

/// Signed perpendicular distance of `p` from the infinite line through `a` and `b`.
///
/// Positive when `p` lies left of the direction of travel a→b.
pub fn cross_track(p: LocalPoint, a: LocalPoint, b: LocalPoint) -> Result<f64, GeoError> {
    let d = b - a;
    let len = d.norm();
    if len <= 1e-9 {
        return Err(GeoError::DegenerateSegment);
    }
    Ok(d.cross(p - a) / len)
}

/// Distance from `p` to the closed segment a–b.
pub fn distance_to_segment(p: LocalPoint, a: LocalPoint, b: LocalPoint) -> f64 {
    let d = b - a;
    let len_sq = d.norm_sq();
    if len_sq <= 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(d) / len_sq).clamp(0.0, 1.0);
    p.distance(a + d * t)
}

/// Sum of consecutive vertex distances.
pub fn polyline_length(points: &[LocalPoint]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}
