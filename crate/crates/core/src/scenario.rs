//! Scenario files.
//!
//! A scenario is a TOML document with a few top-level keys, one
//! `[[turbine]]` table per turbine and optional `[wind]`, `[planner]`,
//! `[gains]`, `[camera]` and `[imaging]` tables. Everything except the
//! turbine list has a default. See `scenarios/minimal.toml` for the smallest
//! valid file and `scenarios/three_turbines_weak_wind.toml` for every key.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::control::{PidGains, WindModel};
use crate::geometry::{Point3, TurbineModel};
use crate::metrics::{CameraModel, DEFAULT_SAMPLE_DENSITY};
use crate::trajectory::PlannerParams;
use crate::vision::DEFAULT_AREA_THRESHOLD_FRACTION;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.to_string(),
    }
}

/// Parameters of the segmentation frame captured from the initial viewpoint.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImagingParams {
    /// Horizontal field of view of the imaging camera, degrees.
    pub fov: f64,
    /// Square image side, pixels.
    pub resolution: usize,
    /// Contour area threshold as a fraction of the image area.
    pub area_fraction: f64,
}

impl Default for ImagingParams {
    fn default() -> Self {
        Self {
            fov: 100.0,
            resolution: 512,
            area_fraction: DEFAULT_AREA_THRESHOLD_FRACTION,
        }
    }
}

impl ImagingParams {
    pub fn area_threshold(&self) -> f64 {
        self.area_fraction * (self.resolution * self.resolution) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    /// Free-text site description. Informational only.
    pub terrain: String,
    pub turbine_ids: Vec<String>,
    pub turbines: Vec<TurbineModel>,
    pub uav_count: usize,
    pub wind: WindModel,
    pub planner: PlannerParams,
    pub gains: PidGains,
    pub camera: CameraModel,
    /// Blade surface points per meter and face for the coverage metric.
    pub coverage_density: f64,
    pub imaging: ImagingParams,
    pub dt: f64,
    pub seed: u64,
}

impl Scenario {
    /// Replaces the seed, which also reseeds the wind.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.wind.seed = seed;
        self
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    label: String,
    #[serde(default)]
    terrain: String,
    #[serde(default = "one")]
    uav_count: i64,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "default_density")]
    coverage_density: f64,
    #[serde(default)]
    turbine: Vec<RawTurbine>,
    #[serde(default)]
    wind: RawWind,
    #[serde(default)]
    planner: PlannerParams,
    #[serde(default)]
    gains: PidGains,
    #[serde(default)]
    camera: CameraModel,
    #[serde(default)]
    imaging: ImagingParams,
}

fn one() -> i64 {
    1
}

fn default_dt() -> f64 {
    0.05
}

fn default_density() -> f64 {
    DEFAULT_SAMPLE_DENSITY
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTurbine {
    id: Option<String>,
    #[serde(default)]
    base: [f64; 3],
    tower_height: f64,
    #[serde(default)]
    nacelle_yaw: f64,
    blade_length: f64,
    #[serde(default = "three")]
    blade_count: usize,
    #[serde(default)]
    rotor_phase: f64,
}

fn three() -> usize {
    3
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawWind {
    mean: [f64; 3],
    gust_amplitude: f64,
    gust_correlation_time: f64,
}

impl Default for RawWind {
    fn default() -> Self {
        let w = WindModel::default();
        Self {
            mean: w.mean.to_array(),
            gust_amplitude: w.gust_amplitude,
            gust_correlation_time: w.gust_correlation_time,
        }
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;

    if raw.uav_count < 1 {
        return Err(invalid("uav_count", format!("must be >= 1, got {}", raw.uav_count)));
    }
    if !(raw.dt > 0.0 && raw.dt <= crate::control::MAX_DT) {
        return Err(invalid("dt", format!("must be in (0, 0.5], got {}", raw.dt)));
    }
    if !(raw.coverage_density > 0.0 && raw.coverage_density.is_finite()) {
        return Err(invalid("coverage_density", "must be > 0"));
    }
    if raw.turbine.is_empty() {
        return Err(invalid("turbine", "at least one [[turbine]] table is required"));
    }

    let mut turbine_ids = Vec::with_capacity(raw.turbine.len());
    let mut turbines = Vec::with_capacity(raw.turbine.len());
    for (i, t) in raw.turbine.iter().enumerate() {
        let key = |k: &str| format!("turbine[{i}].{k}");
        let checks: [(&str, bool, &str); 3] = [
            ("tower_height", t.tower_height > 0.0 && t.tower_height.is_finite(), "must be > 0"),
            ("blade_length", t.blade_length > 0.0 && t.blade_length.is_finite(), "must be > 0"),
            ("blade_count", t.blade_count >= 1, "must be >= 1"),
        ];
        for (k, ok, msg) in checks {
            if !ok {
                return Err(invalid(key(k), msg));
            }
        }
        let id = t.id.clone().unwrap_or_else(|| format!("WT{}", i + 1));
        if turbine_ids.contains(&id) {
            return Err(invalid(key("id"), format!("duplicate id {id:?}")));
        }
        let model = TurbineModel::new(
            Point3::from(t.base),
            t.tower_height,
            t.nacelle_yaw,
            t.blade_length,
            t.blade_count,
            t.rotor_phase,
        )
        .map_err(|e| invalid(format!("turbine[{i}]"), e))?;
        turbine_ids.push(id);
        turbines.push(model);
    }

    let wind = WindModel {
        mean: Point3::from(raw.wind.mean),
        gust_amplitude: raw.wind.gust_amplitude,
        gust_correlation_time: raw.wind.gust_correlation_time,
        seed: raw.seed,
    };
    if !wind.mean.is_finite() {
        return Err(invalid("wind.mean", "must be finite"));
    }
    if !(wind.gust_amplitude >= 0.0 && wind.gust_amplitude.is_finite()) {
        return Err(invalid("wind.gust_amplitude", "must be >= 0"));
    }
    if !(wind.gust_correlation_time > 0.0 && wind.gust_correlation_time.is_finite()) {
        return Err(invalid("wind.gust_correlation_time", "must be > 0"));
    }

    let p = &raw.planner;
    for (k, ok) in [
        ("standoff", p.standoff > 0.0 && p.standoff.is_finite()),
        ("pass_spacing", p.pass_spacing > 0.0 && p.pass_spacing.is_finite()),
        ("sides", p.sides == 1 || p.sides == 2),
        ("cruise_speed", p.cruise_speed > 0.0 && p.cruise_speed.is_finite()),
    ] {
        if !ok {
            return Err(invalid(format!("planner.{k}"), "out of range"));
        }
    }

    let g = &raw.gains;
    for (k, v) in [("kp", g.kp), ("ki", g.ki), ("kd", g.kd)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(invalid(format!("gains.{k}"), "must be finite and >= 0"));
        }
    }
    g.validate().map_err(|e| invalid("gains", e))?;

    let c = &raw.camera;
    if !(c.fov > 0.0 && c.fov < 180.0) {
        return Err(invalid("camera.fov", "must be in (0, 180)"));
    }
    if !(c.max_incidence > 0.0 && c.max_incidence <= 90.0) {
        return Err(invalid("camera.max_incidence", "must be in (0, 90]"));
    }
    if !(c.min_range >= 0.0 && c.min_range < c.max_range && c.max_range.is_finite()) {
        return Err(invalid("camera.max_range", "need 0 <= min_range < max_range"));
    }

    let im = &raw.imaging;
    if !(im.fov > 0.0 && im.fov < 180.0) {
        return Err(invalid("imaging.fov", "must be in (0, 180)"));
    }
    if im.resolution < crate::vision::MIN_RESOLUTION {
        return Err(invalid(
            "imaging.resolution",
            format!("must be >= {}", crate::vision::MIN_RESOLUTION),
        ));
    }
    if !(im.area_fraction >= 0.0 && im.area_fraction < 1.0) {
        return Err(invalid("imaging.area_fraction", "must be in [0, 1)"));
    }

    Ok(Scenario {
        label: raw.label,
        terrain: raw.terrain,
        turbine_ids,
        turbines,
        uav_count: raw.uav_count as usize,
        wind,
        planner: raw.planner,
        gains: raw.gains,
        camera: raw.camera,
        coverage_density: raw.coverage_density,
        imaging: raw.imaging,
        dt: raw.dt,
        seed: raw.seed,
    })
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text)
}
