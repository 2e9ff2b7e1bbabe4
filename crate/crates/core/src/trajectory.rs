//! Inspection trajectory synthesis.
//!
//! Blades are covered by ladder sweeps: rungs on lines parallel to the blade
//! axis, offset by the standoff distance on either side of the rotor plane.
//! Each sweep is followed by a straight return to the turbine's initial
//! viewpoint. Tower and nacelle get fixed orbits. [`assemble_mission`] stitches
//! everything into per-UAV routes.

use std::f64::consts::TAU;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    blade_tips, compute_zone, initial_point_at, point_segment_distance, Point3, TurbineModel,
};
use crate::vision::{BladeOrientation, TiltClass};

/// Segments shorter than this still get a positive duration.
pub const MIN_SEGMENT_DURATION: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("invalid planner parameter: {0}")]
    InvalidParams(String),
    #[error("degenerate blade: hub and tip coincide")]
    DegenerateBlade,
    #[error("return time must be > 0, got {0}")]
    NonPositiveReturnTime(f64),
    #[error("time {t} outside segment duration [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },
    #[error("turbine {turbine}: expected {expected} blade orientations, found {found}")]
    MisalignedOrientations {
        turbine: usize,
        expected: usize,
        found: usize,
    },
    #[error("uav_count must be >= 1")]
    InvalidUavCount,
    #[error("no turbines to inspect")]
    NoTurbines,
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaypointRole {
    /// Imaging pose of a sweep or orbit.
    Inspect,
    /// Repositioning pose (approach, face change, return).
    Transit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub position: Point3,
    /// Unit direction the camera faces.
    pub gaze: Point3,
    pub speed: f64,
    pub hold: f64,
    pub role: WaypointRole,
}

impl Waypoint {
    fn new(position: Point3, look_at: Point3, fallback_gaze: Point3, speed: f64, role: WaypointRole) -> Self {
        Self {
            position,
            gaze: (look_at - position).normalized().unwrap_or(fallback_gaze),
            speed,
            hold: 0.0,
            role,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentKind {
    BladeSweep,
    Return,
    TowerOrbit,
    NacelleOrbit,
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SegmentKind::BladeSweep => "blade_sweep",
            SegmentKind::Return => "return",
            SegmentKind::TowerOrbit => "tower_orbit",
            SegmentKind::NacelleOrbit => "nacelle_orbit",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySegment {
    pub kind: SegmentKind,
    pub waypoints: Vec<Waypoint>,
    /// Seconds to fly the whole polyline.
    pub duration: f64,
}

impl TrajectorySegment {
    pub fn length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| w[0].position.distance(w[1].position))
            .sum()
    }

    pub fn first(&self) -> &Waypoint {
        &self.waypoints[0]
    }

    pub fn last(&self) -> &Waypoint {
        self.waypoints.last().expect("segment has waypoints")
    }

    fn timed(kind: SegmentKind, waypoints: Vec<Waypoint>, speed: f64) -> Self {
        let mut seg = Self {
            kind,
            waypoints,
            duration: 0.0,
        };
        seg.duration = (seg.length() / speed).max(MIN_SEGMENT_DURATION);
        seg
    }

    /// Inserts a transit waypoint at `from` unless the segment already starts there.
    fn prepend_transit(&mut self, from: Point3, look_at: Point3, speed: f64) {
        if self.first().position != from {
            let wp = Waypoint::new(from, look_at, self.first().gaze, speed, WaypointRole::Transit);
            self.waypoints.insert(0, wp);
            self.duration = (self.length() / speed).max(MIN_SEGMENT_DURATION);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerParams {
    /// Safe distance to every modeled structure axis, meters.
    pub standoff: f64,
    /// Maximum spacing between consecutive ladder rungs and orbit rings, meters.
    pub pass_spacing: f64,
    /// Blade faces to image: 1 (front) or 2 (front and back).
    pub sides: u8,
    pub cruise_speed: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            standoff: 10.0,
            pass_spacing: 5.0,
            sides: 2,
            cruise_speed: 4.0,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |m: &str| Err(PlanError::InvalidParams(m.to_string()));
        if !(self.standoff > 0.0 && self.standoff.is_finite()) {
            return bad("standoff must be > 0");
        }
        if !(self.pass_spacing > 0.0 && self.pass_spacing.is_finite()) {
            return bad("pass_spacing must be > 0");
        }
        if !(self.sides == 1 || self.sides == 2) {
            return bad("sides must be 1 or 2");
        }
        if !(self.cruise_speed > 0.0 && self.cruise_speed.is_finite()) {
            return bad("cruise_speed must be > 0");
        }
        Ok(())
    }
}

/// Whether neighbouring rung footprints overlap for a camera with the given
/// horizontal field of view.
pub fn footprints_overlap(params: &PlannerParams, fov_deg: f64) -> bool {
    params.pass_spacing <= 2.0 * params.standoff * (fov_deg.to_radians() * 0.5).tan()
}

/// Rotor geometry a blade sweep has to steer around: the hub, the rotor
/// axis, and the in-plane directions of everything attached to the hub.
#[derive(Debug, Clone, PartialEq)]
pub struct RotorContext {
    pub hub: Point3,
    /// Unit normal of the rotor plane; the front face is on its positive side.
    pub normal: Point3,
    /// Unit directions of blades and tower leaving the hub.
    pub spokes: Vec<Point3>,
}

impl RotorContext {
    pub fn from_turbine(turbine: &TurbineModel) -> Self {
        let mut spokes: Vec<Point3> = (0..turbine.blade_count).map(|k| turbine.blade_direction(k)).collect();
        spokes.push(-Point3::UNIT_Z);
        Self {
            hub: turbine.hub_position,
            normal: turbine.rotor_normal(),
            spokes,
        }
    }

    /// In-plane point where the rotor plane can be crossed near the hub with
    /// at least `standoff` clearance from every spoke line.
    fn crossing_point(&self, standoff: f64) -> Point3 {
        let lateral = Point3::UNIT_Z
            .cross(self.normal)
            .normalized()
            .unwrap_or(Point3::UNIT_X);
        let up = self.normal.cross(lateral);
        let mut best = (f64::NEG_INFINITY, lateral);
        for step in 0..360 {
            let w = (step as f64).to_radians();
            let dir = lateral * w.cos() + up * w.sin();
            let sep = self
                .spokes
                .iter()
                .map(|s| s.dot(dir).clamp(-1.0, 1.0).acos())
                .fold(f64::INFINITY, f64::min);
            if sep > best.0 {
                best = (sep, dir);
            }
        }
        let sep = best.0.clamp(1e-3, std::f64::consts::FRAC_PI_2);
        self.hub + best.1 * (standoff / sep.sin())
    }
}

/// Ladder sweep over one blade.
///
/// Rungs are spaced at most `pass_spacing` apart (`ceil(len / spacing) + 1`
/// per pass) at `standoff` from the blade axis on the front face, then on
/// the back face when `sides == 2`. The first pass starts at the upper end
/// for vertical blades (descending), at the lower end for horizontal blades
/// and at the tip for acute blades. Face changes go around the tip or through
/// a clear gap next to the hub, and the sweep always finishes on the front face.
pub fn plan_blade_path(
    rotor: &RotorContext,
    tip: Point3,
    orientation: &BladeOrientation,
    params: &PlannerParams,
) -> Result<TrajectorySegment, PlanError> {
    params.validate()?;
    let hub = rotor.hub;
    let axis = tip - hub;
    let length = axis.norm();
    if length <= 1e-9 {
        return Err(PlanError::DegenerateBlade);
    }
    let dir = axis / length;
    let s = params.standoff;
    let v = params.cruise_speed;
    let front = rotor.normal * s;
    let back = -front;

    let rungs = (length / params.pass_spacing - 1e-9).ceil().max(1.0) as usize + 1;
    let pass = |face: Point3, from_tip: bool| -> Vec<Waypoint> {
        (0..rungs)
            .map(|i| {
                let frac = i as f64 / (rungs - 1) as f64;
                let a = if from_tip { 1.0 - frac } else { frac } * length;
                let on_axis = hub + dir * a;
                Waypoint::new(on_axis + face, on_axis, -face / s, v, WaypointRole::Inspect)
            })
            .collect()
    };
    let round_tip = |from: Point3, to: Point3| {
        let beyond = tip + dir * s;
        [from, to].map(|f| Waypoint::new(beyond + f, tip, -dir, v, WaypointRole::Transit))
    };
    let gap = rotor.crossing_point(s);
    let cross_hub = |from: Point3, to: Point3| {
        [from, to].map(|f| Waypoint::new(gap + f, hub, -rotor.normal, v, WaypointRole::Transit))
    };

    let dz = tip.z - hub.z;
    let start_at_tip = match orientation.tilt_class {
        TiltClass::Vertical => dz >= -1e-9,
        TiltClass::Horizontal => dz < -1e-9,
        TiltClass::Acute => true,
    };

    let mut wps = pass(front, start_at_tip);
    if params.sides == 2 {
        if start_at_tip {
            wps.extend(cross_hub(front, back));
            wps.extend(pass(back, false));
            wps.extend(round_tip(back, front));
        } else {
            wps.extend(round_tip(front, back));
            wps.extend(pass(back, true));
            wps.extend(cross_hub(back, front));
        }
    }
    Ok(TrajectorySegment::timed(SegmentKind::BladeSweep, wps, v))
}

/// Straight line from `from` back to `origin` in `return_time` seconds.
pub fn plan_return(from: Point3, origin: Point3, return_time: f64) -> Result<TrajectorySegment, PlanError> {
    if !(return_time > 0.0 && return_time.is_finite()) {
        return Err(PlanError::NonPositiveReturnTime(return_time));
    }
    let travel = origin - from;
    let gaze = travel.normalized().unwrap_or(Point3::UNIT_X);
    let speed = (travel.norm() / return_time).max(1e-6);
    let wp = |p| Waypoint {
        position: p,
        gaze,
        speed,
        hold: 0.0,
        role: WaypointRole::Transit,
    };
    Ok(TrajectorySegment {
        kind: SegmentKind::Return,
        waypoints: vec![wp(from), wp(origin)],
        duration: return_time,
    })
}

/// Minimum distance from `p` to the blade axes and the tower axis.
pub fn structure_clearance(turbine: &TurbineModel, p: Point3) -> f64 {
    let hub = turbine.hub_position;
    blade_tips(turbine)
        .into_iter()
        .map(|tip| point_segment_distance(p, hub, tip))
        .chain(std::iter::once(point_segment_distance(
            p,
            turbine.tower_base,
            turbine.tower_top(),
        )))
        .fold(f64::INFINITY, f64::min)
}

/// Heights of the tower orbit rings, base to tower top inclusive.
pub fn tower_ring_heights(turbine: &TurbineModel, pass_spacing: f64) -> Vec<f64> {
    let h = turbine.tower_height;
    let n = (h / pass_spacing - 1e-9).ceil().max(1.0) as usize + 1;
    (0..n)
        .map(|i| turbine.tower_base.z + h * i as f64 / (n - 1) as f64)
        .collect()
}

fn ring_point_count(radius: f64, spacing: f64, min: usize) -> usize {
    ((TAU * radius / spacing).ceil() as usize).max(min)
}

/// Fixed tower and nacelle orbits.
///
/// Tower rings sit at exactly `standoff` from the tower axis. Ring waypoints
/// that would come closer than `standoff` to a blade are left out. The nacelle
/// orbit is a closed circle at hub height around the nacelle center; its
/// radius starts at `standoff` and grows until every waypoint clears the blades
/// and tower.
pub fn plan_static_structures(
    turbine: &TurbineModel,
    params: &PlannerParams,
) -> Result<Vec<TrajectorySegment>, PlanError> {
    params.validate()?;
    let s = params.standoff;
    let v = params.cruise_speed;
    let clear = |p: Point3| structure_clearance(turbine, p) >= s - 1e-9;
    let yaw = turbine.nacelle_yaw.to_radians();
    let mut out = Vec::with_capacity(2);

    let axis = turbine.tower_base;
    let m = ring_point_count(s, params.pass_spacing, 8);
    let mut tower = Vec::new();
    for z in tower_ring_heights(turbine, params.pass_spacing) {
        let center = Point3::new(axis.x, axis.y, z);
        for j in 0..=m {
            let a = yaw + TAU * j as f64 / m as f64;
            let p = center + Point3::new(a.cos(), a.sin(), 0.0) * s;
            if clear(p) {
                tower.push(Waypoint::new(p, center, -Point3::UNIT_X, v, WaypointRole::Inspect));
            }
        }
    }
    if tower.is_empty() {
        log::warn!("tower orbit fully blocked by the rotor; skipped");
    } else {
        out.push(TrajectorySegment::timed(SegmentKind::TowerOrbit, tower, v));
    }

    let center = turbine.nacelle_center();
    let max_radius = s + turbine.blade_length + turbine.nacelle_length() + params.pass_spacing;
    let mut radius = s;
    let circle = |r: f64| -> Vec<Point3> {
        let m = ring_point_count(r, params.pass_spacing, 12);
        (0..=m)
            .map(|j| {
                let a = yaw + std::f64::consts::PI + TAU * j as f64 / m as f64;
                center + Point3::new(a.cos(), a.sin(), 0.0) * r
            })
            .collect()
    };
    let mut points = circle(radius);
    while !points.iter().all(|&p| clear(p)) && radius < max_radius {
        radius += 0.5;
        points = circle(radius);
    }
    let nacelle = points
        .into_iter()
        .map(|p| Waypoint::new(p, center, -Point3::UNIT_X, v, WaypointRole::Inspect))
        .collect();
    out.push(TrajectorySegment::timed(SegmentKind::NacelleOrbit, nacelle, v));
    Ok(out)
}

fn slerp(a: Point3, b: Point3, t: f64) -> Point3 {
    let cos = a.dot(b).clamp(-1.0, 1.0);
    if cos > 1.0 - 1e-12 {
        return a.lerp(b, t).normalized().unwrap_or(a);
    }
    let omega = cos.acos();
    if (std::f64::consts::PI - omega).abs() < 1e-9 {
        // antipodal: rotate through any perpendicular
        let perp = a
            .cross(Point3::UNIT_Z)
            .normalized()
            .or_else(|| a.cross(Point3::UNIT_X).normalized())
            .expect("some axis is not parallel");
        let ang = omega * t;
        return (a * ang.cos() + perp * ang.sin()).normalized().unwrap_or(a);
    }
    let sin = omega.sin();
    (a * (((1.0 - t) * omega).sin() / sin) + b * ((t * omega).sin() / sin))
        .normalized()
        .unwrap_or(a)
}

/// Reference pose at `t` seconds into the segment: constant speed along the
/// polyline, gaze spherically interpolated between waypoints.
pub fn sample_trajectory(segment: &TrajectorySegment, t: f64) -> Result<Waypoint, PlanError> {
    let duration = segment.duration;
    if !(t >= -1e-9 && t <= duration + 1e-9) {
        return Err(PlanError::TimeOutOfRange { t, duration });
    }
    let wps = &segment.waypoints;
    let total = segment.length();
    if wps.len() == 1 || total <= 0.0 {
        return Ok(wps[0]);
    }
    let target = total * (t / duration).clamp(0.0, 1.0);
    let mut walked = 0.0;
    for w in wps.windows(2) {
        let len = w[0].position.distance(w[1].position);
        if walked + len >= target && len > 0.0 {
            let f = ((target - walked) / len).clamp(0.0, 1.0);
            return Ok(Waypoint {
                position: w[0].position.lerp(w[1].position, f),
                gaze: slerp(w[0].gaze, w[1].gaze, f),
                speed: w[0].speed + (w[1].speed - w[0].speed) * f,
                hold: 0.0,
                role: if f >= 1.0 { w[1].role } else { w[0].role },
            });
        }
        walked += len;
    }
    Ok(*wps.last().unwrap())
}

/// Ordered segments flown by one UAV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavRoute {
    pub uav_id: usize,
    /// Launch and recovery point: the initial viewpoint of the first
    /// assigned turbine (or of a parking turbine when idle).
    pub origin: Point3,
    /// Indices of the turbines assigned to this UAV, in flight order.
    pub turbines: Vec<usize>,
    pub segments: Vec<TrajectorySegment>,
}

impl UavRoute {
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(TrajectorySegment::length).sum()
    }

    /// Reference pose along the whole route; `t` is clamped to the route span.
    pub fn reference(&self, t: f64) -> Waypoint {
        let mut start = 0.0;
        for (i, seg) in self.segments.iter().enumerate() {
            let end = start + seg.duration;
            if t <= end || i + 1 == self.segments.len() {
                let local = (t - start).clamp(0.0, seg.duration);
                return sample_trajectory(seg, local).expect("clamped into range");
            }
            start = end;
        }
        Waypoint {
            position: self.origin,
            gaze: Point3::UNIT_X,
            speed: 0.0,
            hold: 0.0,
            role: WaypointRole::Transit,
        }
    }
}

/// Every planned trajectory across the fleet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionPlan {
    pub uav_count: usize,
    pub routes: Vec<UavRoute>,
}

/// Distributes turbines round-robin over `uav_count` UAVs and plans each
/// route. Per turbine: every blade sweep (ascending index) followed by a
/// return to that turbine's initial viewpoint, then tower orbit, nacelle
/// orbit and a final return. Routes serving several turbines end with a
/// return to their origin.
pub fn assemble_mission(
    turbines: &[TurbineModel],
    orientations: &[Vec<BladeOrientation>],
    uav_count: usize,
    params: &PlannerParams,
) -> Result<MissionPlan, PlanError> {
    params.validate()?;
    if uav_count == 0 {
        return Err(PlanError::InvalidUavCount);
    }
    if turbines.is_empty() {
        return Err(PlanError::NoTurbines);
    }
    if orientations.len() != turbines.len() {
        return Err(PlanError::MisalignedOrientations {
            turbine: orientations.len().min(turbines.len()),
            expected: turbines.len(),
            found: orientations.len(),
        });
    }
    for (i, (t, o)) in turbines.iter().zip(orientations).enumerate() {
        if o.len() != t.blade_count {
            return Err(PlanError::MisalignedOrientations {
                turbine: i,
                expected: t.blade_count,
                found: o.len(),
            });
        }
    }

    let viewpoints = turbines
        .iter()
        .map(|t| Ok(initial_point_at(&compute_zone(&blade_tips(t))?, t.nacelle_yaw)))
        .collect::<Result<Vec<_>, PlanError>>()?;
    let speed = params.cruise_speed;
    let return_to = |from: Point3, to: Point3| {
        plan_return(from, to, (from.distance(to) / speed).max(MIN_SEGMENT_DURATION))
    };

    let mut routes = Vec::with_capacity(uav_count);
    for uav in 0..uav_count {
        let assigned: Vec<usize> = (uav..turbines.len()).step_by(uav_count).collect();
        let origin = viewpoints[assigned.first().copied().unwrap_or(uav % turbines.len())];
        let mut segments = Vec::new();
        let mut here = origin;
        for &ti in &assigned {
            let turbine = &turbines[ti];
            let home = viewpoints[ti];
            let rotor = RotorContext::from_turbine(turbine);
            for (tip, orientation) in blade_tips(turbine).into_iter().zip(&orientations[ti]) {
                let mut sweep = plan_blade_path(&rotor, tip, orientation, params)?;
                sweep.prepend_transit(here, rotor.hub, speed);
                let end = sweep.last().position;
                segments.push(sweep);
                segments.push(return_to(end, home)?);
                here = home;
            }
            for mut orbit in plan_static_structures(turbine, params)? {
                orbit.prepend_transit(here, turbine.hub_position, speed);
                here = orbit.last().position;
                segments.push(orbit);
            }
            segments.push(return_to(here, home)?);
            here = home;
        }
        if here != origin {
            segments.push(return_to(here, origin)?);
        }
        routes.push(UavRoute {
            uav_id: uav,
            origin,
            turbines: assigned,
            segments,
        });
    }
    Ok(MissionPlan { uav_count, routes })
}

pub const MISSION_HEADER: &str =
    "uav_id,segment_index,kind,waypoint_index,x,y,z,gaze_x,gaze_y,gaze_z,speed";

/// One row per waypoint, columns as in [`MISSION_HEADER`].
pub fn mission_rows(plan: &MissionPlan) -> impl Iterator<Item = (usize, usize, SegmentKind, usize, &Waypoint)> {
    plan.routes.iter().flat_map(|r| {
        r.segments.iter().enumerate().flat_map(move |(si, s)| {
            s.waypoints
                .iter()
                .enumerate()
                .map(move |(wi, w)| (r.uav_id, si, s.kind, wi, w))
        })
    })
}

pub fn write_mission_csv<W: Write>(mut out: W, plan: &MissionPlan) -> io::Result<()> {
    writeln!(out, "{MISSION_HEADER}")?;
    for (uav, si, kind, wi, w) in mission_rows(plan) {
        let (p, g) = (w.position, w.gaze);
        writeln!(
            out,
            "{uav},{si},{kind},{wi},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            p.x, p.y, p.z, g.x, g.y, g.z, w.speed
        )?;
    }
    Ok(())
}
