//! Turbine world model, blade-tip kinematics and the spherical inspection zone.
//!
//! World frame is right-handed with `z` up, units are meters. Angles are
//! stored in degrees on every public type and converted at the point of use.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("no blade tips")]
    NoBladeTips,
    #[error("invalid turbine: {0}")]
    InvalidTurbine(String),
}

/// A point (or free vector) in the world frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ZERO: Point3 = Point3::new(0.0, 0.0, 0.0);
    pub const UNIT_X: Point3 = Point3::new(1.0, 0.0, 0.0);
    pub const UNIT_Y: Point3 = Point3::new(0.0, 1.0, 0.0);
    pub const UNIT_Z: Point3 = Point3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Point3) -> Point3 {
        Point3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        (n > 1e-12 && n.is_finite()).then(|| self / n)
    }

    pub fn lerp(self, other: Point3, t: f64) -> Point3 {
        self + (other - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        p.to_array()
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Point3 {
    fn add_assign(&mut self, o: Point3) {
        *self = *self + o;
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Point3 {
    type Output = Point3;
    fn div(self, s: f64) -> Point3 {
        Point3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// Distance from `p` to the closed segment `a..b`.
pub fn point_segment_distance(p: Point3, a: Point3, b: Point3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Parametric wind energy unit.
///
/// The hub sits directly above the tower axis. The rotor plane contains the
/// tower axis and is perpendicular to the nacelle heading; blades are straight
/// hub-to-tip segments. Blade `k` (0-based) points at in-plane azimuth
/// `rotor_phase + k * 360 / blade_count`, measured from the horizontal in-plane
/// axis towards `+z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurbineModel {
    pub hub_position: Point3,
    pub tower_base: Point3,
    pub tower_height: f64,
    /// Heading of the rotor axis (towards the upwind face), degrees in `[0, 360)`.
    pub nacelle_yaw: f64,
    pub blade_length: f64,
    pub blade_count: usize,
    /// Azimuth of blade 0 in the rotor plane, degrees in `[0, 360)`.
    pub rotor_phase: f64,
    /// Image-plane inclination of each blade, in `[0, 180)`, as seen by a
    /// camera on the rotor axis in front of the hub with `z` up in the image.
    pub blade_pitch_truth: Vec<f64>,
}

impl TurbineModel {
    pub fn new(
        tower_base: Point3,
        tower_height: f64,
        nacelle_yaw: f64,
        blade_length: f64,
        blade_count: usize,
        rotor_phase: f64,
    ) -> Result<Self, GeometryError> {
        let invalid = |m: &str| Err(GeometryError::InvalidTurbine(m.to_string()));
        if !tower_base.is_finite() {
            return invalid("tower_base must be finite");
        }
        if !(tower_height > 0.0 && tower_height.is_finite()) {
            return invalid("tower_height must be > 0");
        }
        if !(blade_length > 0.0 && blade_length.is_finite()) {
            return invalid("blade_length must be > 0");
        }
        if blade_count == 0 {
            return invalid("blade_count must be >= 1");
        }
        if !nacelle_yaw.is_finite() || !rotor_phase.is_finite() {
            return invalid("angles must be finite");
        }
        let nacelle_yaw = nacelle_yaw.rem_euclid(360.0);
        let rotor_phase = rotor_phase.rem_euclid(360.0);
        let hub_position = tower_base + Point3::new(0.0, 0.0, tower_height);
        let blade_pitch_truth = (0..blade_count)
            .map(|k| image_inclination(blade_azimuth(rotor_phase, blade_count, k)))
            .collect();
        Ok(Self {
            hub_position,
            tower_base,
            tower_height,
            nacelle_yaw,
            blade_length,
            blade_count,
            rotor_phase,
            blade_pitch_truth,
        })
    }

    /// Checks the structural invariants of a model that did not come from [`TurbineModel::new`].
    pub fn validate(&self) -> Result<(), GeometryError> {
        let invalid = |m: &str| Err(GeometryError::InvalidTurbine(m.to_string()));
        if !(self.blade_length > 0.0) || !(self.tower_height > 0.0) {
            return invalid("blade_length and tower_height must be > 0");
        }
        if self.blade_count == 0 || self.blade_pitch_truth.len() != self.blade_count {
            return invalid("blade_pitch_truth must have one entry per blade");
        }
        if (self.hub_position.z - (self.tower_base.z + self.tower_height)).abs() > 1e-9 {
            return invalid("hub height must equal tower top");
        }
        Ok(())
    }

    /// Unit rotor axis, pointing from the nacelle out through the hub.
    pub fn rotor_normal(&self) -> Point3 {
        let yaw = self.nacelle_yaw.to_radians();
        Point3::new(yaw.cos(), yaw.sin(), 0.0)
    }

    /// Horizontal unit axis of the rotor plane (azimuth 0).
    pub fn rotor_lateral(&self) -> Point3 {
        Point3::UNIT_Z.cross(self.rotor_normal())
    }

    /// Unit in-plane direction at the given rotor azimuth (degrees).
    pub fn in_plane_direction(&self, azimuth_deg: f64) -> Point3 {
        let a = azimuth_deg.to_radians();
        self.rotor_lateral() * a.cos() + Point3::UNIT_Z * a.sin()
    }

    pub fn blade_azimuth(&self, k: usize) -> f64 {
        blade_azimuth(self.rotor_phase, self.blade_count, k)
    }

    pub fn blade_direction(&self, k: usize) -> Point3 {
        self.in_plane_direction(self.blade_azimuth(k))
    }

    pub fn tower_top(&self) -> Point3 {
        self.tower_base + Point3::new(0.0, 0.0, self.tower_height)
    }

    pub fn blade_chord(&self) -> f64 {
        0.08 * self.blade_length
    }

    pub fn hub_radius(&self) -> f64 {
        0.06 * self.blade_length
    }

    pub fn tower_radius(&self) -> f64 {
        (0.025 * self.tower_height).max(0.5)
    }

    pub fn nacelle_length(&self) -> f64 {
        0.25 * self.blade_length
    }

    pub fn nacelle_width(&self) -> f64 {
        0.1 * self.blade_length
    }

    pub fn nacelle_height(&self) -> f64 {
        0.1 * self.blade_length
    }

    /// Nacelle body center: behind the hub along the rotor axis, at hub height.
    pub fn nacelle_center(&self) -> Point3 {
        self.hub_position - self.rotor_normal() * (0.5 * self.nacelle_length())
    }
}

fn blade_azimuth(phase: f64, count: usize, k: usize) -> f64 {
    (phase + k as f64 * 360.0 / count as f64).rem_euclid(360.0)
}

/// Frontal view maps rotor azimuth `a` to pixel direction `(cos a, -sin a)`.
fn image_inclination(azimuth_deg: f64) -> f64 {
    let v = (-azimuth_deg).rem_euclid(180.0);
    if v >= 180.0 - 1e-12 {
        0.0
    } else {
        v
    }
}

/// Sphere bounding the rotor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InspectionZone {
    pub center: Point3,
    pub radius: f64,
}

impl InspectionZone {
    pub fn contains(&self, p: Point3) -> bool {
        (p - self.center).norm_squared() <= self.radius * self.radius + 1e-9
    }
}

/// Tip position of every blade.
pub fn blade_tips(turbine: &TurbineModel) -> Vec<Point3> {
    (0..turbine.blade_count)
        .map(|k| turbine.hub_position + turbine.blade_direction(k) * turbine.blade_length)
        .collect()
}

/// Centroid of the tips and the largest centroid-to-tip distance.
pub fn compute_zone(tips: &[Point3]) -> Result<InspectionZone, GeometryError> {
    if tips.is_empty() {
        return Err(GeometryError::NoBladeTips);
    }
    let n = tips.len() as f64;
    let sum = tips.iter().fold(Point3::ZERO, |acc, &t| acc + t);
    let center = sum / n;
    let radius = tips
        .iter()
        .map(|t| t.distance(center))
        .fold(0.0_f64, f64::max);
    Ok(InspectionZone { center, radius })
}

/// Initial viewpoint on the `+x` side of the zone.
pub fn initial_point(zone: &InspectionZone) -> Point3 {
    initial_point_at(zone, 0.0)
}

/// Initial viewpoint on the zone sphere at the given horizontal approach
/// azimuth (degrees from `+x` towards `+y`). `0` reproduces [`initial_point`].
pub fn initial_point_at(zone: &InspectionZone, approach_azimuth_deg: f64) -> Point3 {
    if approach_azimuth_deg == 0.0 {
        return Point3::new(zone.center.x + zone.radius, zone.center.y, zone.center.z);
    }
    let a = approach_azimuth_deg.to_radians();
    zone.center + Point3::new(a.cos(), a.sin(), 0.0) * zone.radius
}
