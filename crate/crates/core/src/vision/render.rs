//! Synthetic optical sensor: a pinhole camera that renders the turbine as a
//! labeled silhouette.

use crate::geometry::{Point3, TurbineModel};

use super::raster::{Raster, LABEL_BLADE_BASE, LABEL_NACELLE, LABEL_TOWER};
use super::VisionError;

pub const MIN_RESOLUTION: usize = 64;

/// Pinhole camera with square pixels. `fov_deg` is the horizontal field of view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinholeCamera {
    pub position: Point3,
    pub target: Point3,
    pub fov_deg: f64,
}

/// Orthonormal camera frame: `forward` into the scene, `right` and `down`
/// along the pixel axes.
#[derive(Debug, Clone, Copy)]
pub struct CameraFrame {
    pub origin: Point3,
    pub forward: Point3,
    pub right: Point3,
    pub down: Point3,
    /// Pixels per unit of normalized image-plane coordinate.
    focal_px: f64,
    cx: f64,
    cy: f64,
}

impl PinholeCamera {
    pub fn looking_at(position: Point3, target: Point3, fov_deg: f64) -> Self {
        Self {
            position,
            target,
            fov_deg,
        }
    }

    pub fn frame(&self, width: usize, height: usize) -> Result<CameraFrame, VisionError> {
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(VisionError::InvalidCamera(format!("fov {} not in (0, 180)", self.fov_deg)));
        }
        let forward = (self.target - self.position)
            .normalized()
            .ok_or_else(|| VisionError::InvalidCamera("camera position equals target".into()))?;
        let up = if forward.cross(Point3::UNIT_Z).norm() < 1e-9 {
            Point3::UNIT_Y
        } else {
            Point3::UNIT_Z
        };
        let right = forward.cross(up).normalized().expect("forward not parallel to up");
        let down = forward.cross(right);
        let half = (self.fov_deg.to_radians() * 0.5).tan();
        Ok(CameraFrame {
            origin: self.position,
            forward,
            right,
            down,
            focal_px: width as f64 * 0.5 / half,
            cx: width as f64 * 0.5,
            cy: height as f64 * 0.5,
        })
    }
}

impl CameraFrame {
    /// Pixel coordinates of a world point, or `None` when it is behind the camera.
    pub fn project(&self, p: Point3) -> Option<(f64, f64)> {
        let rel = p - self.origin;
        let depth = rel.dot(self.forward);
        if depth <= 1e-9 {
            return None;
        }
        Some((
            self.cx + self.focal_px * rel.dot(self.right) / depth,
            self.cy + self.focal_px * rel.dot(self.down) / depth,
        ))
    }

    /// World-space direction of the ray through pixel coordinates `(u, v)`.
    pub fn ray(&self, u: f64, v: f64) -> Point3 {
        self.forward
            + self.right * ((u - self.cx) / self.focal_px)
            + self.down * ((v - self.cy) / self.focal_px)
    }
}

struct Scene {
    hub: Point3,
    normal: Point3,
    hub_radius: f64,
    blades: Vec<(Point3, Point3)>, // (axis, chord direction)
    blade_length: f64,
    half_chord: f64,
    tower_axis: (f64, f64),
    tower_z: (f64, f64),
    tower_radius: f64,
    nacelle_center: Point3,
    nacelle_axes: [Point3; 3],
    nacelle_half: [f64; 3],
}

impl Scene {
    fn new(t: &TurbineModel) -> Self {
        let normal = t.rotor_normal();
        let blades = (0..t.blade_count)
            .map(|k| {
                let axis = t.blade_direction(k);
                (axis, normal.cross(axis))
            })
            .collect();
        Self {
            hub: t.hub_position,
            normal,
            hub_radius: t.hub_radius(),
            blades,
            blade_length: t.blade_length,
            half_chord: 0.5 * t.blade_chord(),
            tower_axis: (t.tower_base.x, t.tower_base.y),
            tower_z: (t.tower_base.z, t.tower_top().z),
            tower_radius: t.tower_radius(),
            nacelle_center: t.nacelle_center(),
            nacelle_axes: [normal, t.rotor_lateral(), Point3::UNIT_Z],
            nacelle_half: [
                0.5 * t.nacelle_length(),
                0.5 * t.nacelle_width(),
                0.5 * t.nacelle_height(),
            ],
        }
    }

    /// Label hit by the ray. Front-view painter priority: hub, blades, nacelle, tower.
    fn shade(&self, origin: Point3, dir: Point3) -> u8 {
        if let Some(rel) = self.rotor_plane_hit(origin, dir) {
            if rel.norm() <= self.hub_radius {
                return LABEL_NACELLE;
            }
            for (k, (axis, chord)) in self.blades.iter().enumerate() {
                let a = rel.dot(*axis);
                if a >= 0.0 && a <= self.blade_length && rel.dot(*chord).abs() <= self.half_chord {
                    return LABEL_BLADE_BASE + k as u8;
                }
            }
        }
        if self.hits_nacelle(origin, dir) {
            return LABEL_NACELLE;
        }
        if self.hits_tower(origin, dir) {
            return LABEL_TOWER;
        }
        0
    }

    fn rotor_plane_hit(&self, origin: Point3, dir: Point3) -> Option<Point3> {
        let denom = dir.dot(self.normal);
        if denom.abs() < 1e-12 {
            return None;
        }
        let t = (self.hub - origin).dot(self.normal) / denom;
        (t > 0.0).then(|| origin + dir * t - self.hub)
    }

    fn hits_tower(&self, o: Point3, d: Point3) -> bool {
        let (cx, cy) = self.tower_axis;
        let (ox, oy) = (o.x - cx, o.y - cy);
        let a = d.x * d.x + d.y * d.y;
        if a < 1e-15 {
            return false;
        }
        let b = 2.0 * (ox * d.x + oy * d.y);
        let c = ox * ox + oy * oy - self.tower_radius * self.tower_radius;
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return false;
        }
        let s = disc.sqrt();
        [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)]
            .into_iter()
            .filter(|&t| t > 0.0)
            .any(|t| {
                let z = o.z + d.z * t;
                z >= self.tower_z.0 && z <= self.tower_z.1
            })
    }

    fn hits_nacelle(&self, o: Point3, d: Point3) -> bool {
        let rel = o - self.nacelle_center;
        let (mut t_min, mut t_max) = (0.0_f64, f64::INFINITY);
        for (axis, half) in self.nacelle_axes.iter().zip(self.nacelle_half) {
            let p = rel.dot(*axis);
            let v = d.dot(*axis);
            if v.abs() < 1e-15 {
                if p.abs() > half {
                    return false;
                }
                continue;
            }
            let (t0, t1) = ((-half - p) / v, (half - p) / v);
            t_min = t_min.max(t0.min(t1));
            t_max = t_max.min(t0.max(t1));
            if t_min > t_max {
                return false;
            }
        }
        true
    }
}

/// Renders tower, nacelle, hub and blades into a labeled raster.
///
/// Blade `k` is written with label `LABEL_BLADE_BASE + k`; the hub disk is
/// labeled as nacelle so that the blades form separate regions.
pub fn render_silhouette(
    turbine: &TurbineModel,
    camera: &PinholeCamera,
    width: usize,
    height: usize,
) -> Result<Raster, VisionError> {
    if width < MIN_RESOLUTION || height < MIN_RESOLUTION {
        return Err(VisionError::ResolutionTooSmall { width, height });
    }
    if turbine.blade_count > (255 - LABEL_BLADE_BASE as usize) {
        return Err(VisionError::InvalidCamera("too many blades to label".into()));
    }
    let frame = camera.frame(width, height)?;
    match frame.project(turbine.hub_position) {
        Some((u, v)) if u >= 0.0 && v >= 0.0 && u < width as f64 && v < height as f64 => {}
        _ => return Err(VisionError::SubjectNotInView),
    }
    let scene = Scene::new(turbine);
    let mut raster = Raster::new(width, height);
    for y in 0..height {
        for x in 0..width {
            let dir = frame.ray(x as f64 + 0.5, y as f64 + 0.5);
            let label = scene.shade(frame.origin, dir);
            if label != 0 {
                raster.set(x, y, label);
            }
        }
    }
    if raster.count_nonzero() == 0 {
        return Err(VisionError::SubjectNotInView);
    }
    Ok(raster)
}
