//! Per-axis PID tracking, gusty wind and a kinematic flight simulator.
//!
//! The plant is first order: each step the UAV moves with the reference's
//! own velocity (feedforward) plus the PID correction plus wind. Integral
//! and derivative terms use rectangle integration and a backward difference.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point3;
use crate::trajectory::{MissionPlan, UavRoute};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("time step must be in (0, 0.5] s, got {0}")]
    InvalidDt(f64),
    #[error("invalid gains: {0}")]
    InvalidGains(String),
    #[error("invalid wind model: {0}")]
    InvalidWind(String),
    #[error("mission plan has no routes")]
    EmptyPlan,
}

/// Largest simulation step accepted by [`simulate_flight`].
pub const MAX_DT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Anti-windup clamp on each axis integral, m·s.
    pub integral_limit: f64,
    /// Optional x, y, z gains replacing the shared scalars.
    pub per_axis: Option<[AxisGains; 3]>,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: 1.2,
            ki: 0.2,
            kd: 0.4,
            integral_limit: 50.0,
            per_axis: None,
        }
    }
}

impl PidGains {
    pub fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self {
            kp,
            ki,
            kd,
            ..Default::default()
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn axis(&self, i: usize) -> AxisGains {
        match &self.per_axis {
            Some(a) => a[i],
            None => AxisGains {
                kp: self.kp,
                ki: self.ki,
                kd: self.kd,
            },
        }
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        let mut all = vec![self.kp, self.ki, self.kd];
        if let Some(a) = &self.per_axis {
            all.extend(a.iter().flat_map(|g| [g.kp, g.ki, g.kd]));
        }
        if !all.into_iter().all(ok) {
            return Err(ControlError::InvalidGains(
                "gains must be finite and >= 0".into(),
            ));
        }
        if !(self.integral_limit > 0.0 && self.integral_limit.is_finite()) {
            return Err(ControlError::InvalidGains("integral_limit must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PidState {
    pub integral: Point3,
    /// `None` before the first step.
    pub prev_error: Option<Point3>,
}

/// One controller update. Returns the per-axis command and the next state.
pub fn pid_step(
    gains: &PidGains,
    state: &PidState,
    error: Point3,
    dt: f64,
) -> Result<(Point3, PidState), ControlError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(ControlError::InvalidDt(dt));
    }
    let prev = state.prev_error.unwrap_or(error);
    let lim = gains.integral_limit;
    let e = error.to_array();
    let i0 = state.integral.to_array();
    let p = prev.to_array();
    let mut u = [0.0; 3];
    let mut integral = [0.0; 3];
    for a in 0..3 {
        let g = gains.axis(a);
        integral[a] = (i0[a] + e[a] * dt).clamp(-lim, lim);
        u[a] = g.kp * e[a] + g.ki * integral[a] + g.kd * (e[a] - p[a]) / dt;
    }
    Ok((
        Point3::from(u),
        PidState {
            integral: Point3::from(integral),
            prev_error: Some(error),
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindModel {
    /// Mean wind velocity, m/s.
    pub mean: Point3,
    /// Stationary standard deviation of each gust component, m/s.
    pub gust_amplitude: f64,
    /// Gust correlation time, s.
    pub gust_correlation_time: f64,
    pub seed: u64,
}

impl Default for WindModel {
    fn default() -> Self {
        Self {
            mean: Point3::ZERO,
            gust_amplitude: 0.0,
            gust_correlation_time: 2.0,
            seed: 0,
        }
    }
}

impl WindModel {
    pub fn calm() -> Self {
        Self::default()
    }

    pub fn constant(mean: Point3) -> Self {
        Self {
            mean,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        if !self.mean.is_finite() {
            return Err(ControlError::InvalidWind("mean must be finite".into()));
        }
        if !(self.gust_amplitude >= 0.0 && self.gust_amplitude.is_finite()) {
            return Err(ControlError::InvalidWind("gust_amplitude must be >= 0".into()));
        }
        if !(self.gust_correlation_time > 0.0 && self.gust_correlation_time.is_finite()) {
            return Err(ControlError::InvalidWind(
                "gust_correlation_time must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Seeded gust process for one UAV: mean plus an Ornstein-Uhlenbeck term per
/// axis, started from its stationary distribution and advanced with the
/// exact discretization.
#[derive(Debug, Clone)]
pub struct WindStream {
    model: WindModel,
    rng: ChaCha8Rng,
    gust: [f64; 3],
    last_t: f64,
}

impl WindStream {
    pub fn new(model: WindModel, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
        rng.set_stream(stream);
        let sigma = model.gust_amplitude;
        let gust = if sigma > 0.0 {
            std::array::from_fn(|_| {
                let n: f64 = StandardNormal.sample(&mut rng);
                sigma * n
            })
        } else {
            [0.0; 3]
        };
        Self {
            model,
            rng,
            gust,
            last_t: 0.0,
        }
    }

    /// Wind at time `t`. Times must be non-decreasing across calls; an
    /// earlier `t` returns the current value.
    pub fn sample(&mut self, t: f64) -> Point3 {
        let sigma = self.model.gust_amplitude;
        let dt = t - self.last_t;
        if sigma > 0.0 && dt > 0.0 {
            let a = (-dt / self.model.gust_correlation_time).exp();
            let b = sigma * (1.0 - a * a).sqrt();
            for g in &mut self.gust {
                let n: f64 = StandardNormal.sample(&mut self.rng);
                *g = a * *g + b * n;
            }
        }
        self.last_t = self.last_t.max(t);
        self.model.mean + Point3::from(self.gust)
    }
}

/// Plant state of a simulated UAV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    pub position: Point3,
    pub velocity: Point3,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightSample {
    pub t: f64,
    pub position: Point3,
    pub reference: Point3,
    pub control: Point3,
    pub wind: Point3,
    /// Planned camera direction at `t`.
    pub gaze: Point3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightLog {
    pub uav_id: usize,
    pub dt: f64,
    pub samples: Vec<FlightSample>,
}

/// Simulates one route with the UAV starting on the reference.
pub fn simulate_route(
    route: &UavRoute,
    gains: &PidGains,
    wind: &WindModel,
    dt: f64,
) -> Result<FlightLog, ControlError> {
    let start = route.reference(0.0).position;
    simulate_route_from(route, start, gains, wind, dt)
}

/// Simulates one route from an arbitrary start position.
pub fn simulate_route_from(
    route: &UavRoute,
    start: Point3,
    gains: &PidGains,
    wind: &WindModel,
    dt: f64,
) -> Result<FlightLog, ControlError> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(ControlError::InvalidDt(dt));
    }
    gains.validate()?;
    wind.validate()?;
    let total = route.duration();
    let steps = (total / dt - 1e-9).ceil().max(0.0) as usize;
    let mut gusts = WindStream::new(*wind, route.uav_id as u64);
    let mut pid = PidState::default();
    let mut uav = UavState {
        position: start,
        velocity: Point3::ZERO,
        time: 0.0,
    };
    let mut samples = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let reference = route.reference(t);
        let w = gusts.sample(t);
        let (u, next) = pid_step(gains, &pid, reference.position - uav.position, dt)?;
        pid = next;
        samples.push(FlightSample {
            t,
            position: uav.position,
            reference: reference.position,
            control: u,
            wind: w,
            gaze: reference.gaze,
        });
        if k == steps {
            break;
        }
        let feedforward = (route.reference(t + dt).position - reference.position) / dt;
        uav.velocity = feedforward + u + w;
        uav.position += uav.velocity * dt;
        uav.time = t + dt;
    }
    Ok(FlightLog {
        uav_id: route.uav_id,
        dt,
        samples,
    })
}

/// Flies every route of the plan, one log per UAV in route order. UAVs are
/// independent and run in parallel; each draws gusts from its own stream.
pub fn simulate_flight(
    plan: &MissionPlan,
    gains: &PidGains,
    wind: &WindModel,
    dt: f64,
) -> Result<Vec<FlightLog>, ControlError> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(ControlError::InvalidDt(dt));
    }
    if plan.routes.is_empty() {
        return Err(ControlError::EmptyPlan);
    }
    plan.routes
        .par_iter()
        .map(|r| simulate_route(r, gains, wind, dt))
        .collect()
}

pub const FLIGHT_LOG_HEADER: &str = "t,x,y,z,ref_x,ref_y,ref_z,ux,uy,uz,wx,wy,wz";

pub fn write_flight_log_csv<W: Write>(mut out: W, log: &FlightLog) -> io::Result<()> {
    writeln!(out, "{FLIGHT_LOG_HEADER}")?;
    for s in &log.samples {
        let (p, r, u, w) = (s.position, s.reference, s.control, s.wind);
        writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            s.t, p.x, p.y, p.z, r.x, r.y, r.z, u.x, u.y, u.z, w.x, w.y, w.z
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::plan_return;

    fn leg(length: f64, speed: f64) -> UavRoute {
        let seg = plan_return(Point3::ZERO, Point3::new(length, 0.0, 0.0), length / speed).unwrap();
        UavRoute {
            uav_id: 0,
            origin: Point3::ZERO,
            turbines: vec![],
            segments: vec![seg],
        }
    }

    #[test]
    fn proportional_only() {
        let (u, _) = pid_step(&PidGains::new(2.0, 0.0, 0.0), &PidState::default(), Point3::new(1.5, 0.0, 0.0), 0.1)
            .unwrap();
        assert_eq!(u, Point3::new(3.0, 0.0, 0.0));
    }

    #[test]
    fn zero_error_zero_output() {
        let (u, _) = pid_step(&PidGains::default(), &PidState::default(), Point3::ZERO, 0.05).unwrap();
        assert_eq!(u, Point3::ZERO);
    }

    #[test]
    fn integral_accumulates() {
        let g = PidGains::new(0.0, 1.0, 0.0);
        let mut s = PidState::default();
        let mut u = Point3::ZERO;
        for _ in 0..10 {
            (u, s) = pid_step(&g, &s, Point3::new(1.0, 1.0, 1.0), 0.1).unwrap();
        }
        assert!((u.x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_step_has_no_derivative_kick() {
        let g = PidGains::new(0.0, 0.0, 5.0);
        let (u, s) = pid_step(&g, &PidState::default(), Point3::new(3.0, -2.0, 1.0), 0.05).unwrap();
        assert_eq!(u, Point3::ZERO);
        let (u, _) = pid_step(&g, &s, Point3::new(3.1, -2.0, 1.0), 0.05).unwrap();
        assert!((u.x - 5.0 * 0.1 / 0.05).abs() < 1e-9);
    }

    #[test]
    fn integral_is_clamped() {
        let g = PidGains {
            integral_limit: 1.0,
            ..PidGains::new(0.0, 1.0, 0.0)
        };
        let mut s = PidState::default();
        for _ in 0..100 {
            (_, s) = pid_step(&g, &s, Point3::new(10.0, -10.0, 0.0), 0.1).unwrap();
        }
        assert_eq!(s.integral, Point3::new(1.0, -1.0, 0.0));
    }

    #[test]
    fn bad_dt_rejected() {
        for dt in [0.0, -0.1, f64::NAN] {
            assert!(pid_step(&PidGains::default(), &PidState::default(), Point3::ZERO, dt).is_err());
        }
        let r = leg(10.0, 4.0);
        assert_eq!(
            simulate_route(&r, &PidGains::default(), &WindModel::calm(), 0.6),
            Err(ControlError::InvalidDt(0.6))
        );
    }

    #[test]
    fn per_axis_override() {
        let g = PidGains {
            per_axis: Some([
                AxisGains { kp: 1.0, ki: 0.0, kd: 0.0 },
                AxisGains { kp: 2.0, ki: 0.0, kd: 0.0 },
                AxisGains { kp: 3.0, ki: 0.0, kd: 0.0 },
            ]),
            ..PidGains::default()
        };
        let (u, _) = pid_step(&g, &PidState::default(), Point3::new(1.0, 1.0, 1.0), 0.1).unwrap();
        assert_eq!(u, Point3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn calm_wind_is_exactly_mean() {
        let mean = Point3::new(3.0, -1.0, 0.5);
        let mut w = WindStream::new(WindModel::constant(mean), 0);
        for k in 0..100 {
            assert_eq!(w.sample(k as f64 * 0.1), mean);
        }
    }

    #[test]
    fn wind_is_seeded() {
        let m = WindModel {
            gust_amplitude: 2.0,
            seed: 42,
            ..Default::default()
        };
        let run = |stream| {
            let mut w = WindStream::new(m, stream);
            (0..50).map(|k| w.sample(k as f64 * 0.05)).collect::<Vec<_>>()
        };
        assert_eq!(run(0), run(0));
        assert_ne!(run(0), run(1));
    }

    #[test]
    fn calm_flight_tracks_exactly() {
        let log = simulate_route(&leg(100.0, 4.0), &PidGains::default(), &WindModel::calm(), 0.05).unwrap();
        assert_eq!(log.samples.len(), 501);
        for s in &log.samples {
            assert!(s.position.distance(s.reference) < 1e-9);
        }
        assert!(log.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn idle_route_logs_one_sample() {
        let r = UavRoute {
            uav_id: 3,
            origin: Point3::new(1.0, 2.0, 3.0),
            turbines: vec![],
            segments: vec![],
        };
        let log = simulate_route(&r, &PidGains::default(), &WindModel::calm(), 0.05).unwrap();
        assert_eq!(log.samples.len(), 1);
        assert_eq!(log.samples[0].position, r.origin);
    }

    #[test]
    fn log_csv_layout() {
        let log = simulate_route(&leg(1.0, 4.0), &PidGains::default(), &WindModel::calm(), 0.05).unwrap();
        let mut buf = Vec::new();
        write_flight_log_csv(&mut buf, &log).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), FLIGHT_LOG_HEADER);
        assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 13);
        assert_eq!(text.lines().count(), log.samples.len() + 1);
    }
}
