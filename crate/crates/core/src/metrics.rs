//! Mission metrics: fleet time, flown length, blade coverage under a camera
//! model and deviation from the planned reference.

use std::fmt::Write as _;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::FlightLog;
use crate::geometry::{blade_tips, Point3, TurbineModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("sample density must be > 0, got {0}")]
    InvalidDensity(f64),
    #[error("{reports} reports but {labels} labels")]
    LengthMismatch { reports: usize, labels: usize },
    #[error("comparison needs at least 2 reports, got {0}")]
    TooFewReports(usize),
    #[error("malformed metrics table: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraModel {
    /// Full cone angle, degrees.
    pub fov: f64,
    pub min_range: f64,
    pub max_range: f64,
    /// Largest accepted angle between view ray and surface normal, degrees.
    pub max_incidence: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            fov: 60.0,
            min_range: 2.0,
            max_range: 25.0,
            max_incidence: 60.0,
        }
    }
}

/// Default number of blade surface points per meter and face.
pub const DEFAULT_SAMPLE_DENSITY: f64 = 2.0;

impl CameraModel {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let bad = |m: &str| Err(MetricsError::InvalidCamera(m.into()));
        if !(self.fov > 0.0 && self.fov < 180.0) {
            return bad("fov must be in (0, 180)");
        }
        if !(self.min_range >= 0.0 && self.min_range.is_finite()) {
            return bad("min_range must be >= 0");
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return bad("max_range must be > 0");
        }
        if self.min_range >= self.max_range {
            return bad("min_range must be below max_range");
        }
        if !(self.max_incidence > 0.0 && self.max_incidence <= 90.0) {
            return bad("max_incidence must be in (0, 90]");
        }
        Ok(())
    }

    /// Whether a camera at `eye` looking along unit `gaze` sees the surface
    /// point `point` whose outward unit normal is `normal`.
    pub fn sees(&self, eye: Point3, gaze: Point3, point: Point3, normal: Point3) -> bool {
        let ray = point - eye;
        let d = ray.norm();
        if d < self.min_range || d > self.max_range || d == 0.0 {
            return false;
        }
        let in_cone = gaze.dot(ray) / d >= (self.fov.to_radians() * 0.5).cos();
        let facing = -ray.dot(normal) / d >= self.max_incidence.to_radians().cos();
        in_cone && facing
    }
}

/// A sampled blade surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub position: Point3,
    pub normal: Point3,
}

/// `ceil(length · density)` axis points per face, centred in equal bins,
/// front face first.
pub fn blade_surface_points(hub: Point3, tip: Point3, rotor_normal: Point3, density: f64) -> Vec<SurfacePoint> {
    let n = ((hub.distance(tip) * density).ceil() as usize).max(1);
    [rotor_normal, -rotor_normal]
        .into_iter()
        .flat_map(|normal| {
            (0..n).map(move |i| SurfacePoint {
                position: hub.lerp(tip, (i as f64 + 0.5) / n as f64),
                normal,
            })
        })
        .collect()
}

pub fn path_length(log: &FlightLog) -> f64 {
    log.samples
        .windows(2)
        .map(|w| w[0].position.distance(w[1].position))
        .sum()
}

/// Fleet wall-clock time in minutes: UAVs fly concurrently, so the longest
/// log decides.
pub fn inspection_time(logs: &[FlightLog]) -> f64 {
    logs.iter()
        .filter_map(|l| Some(l.samples.last()?.t - l.samples.first()?.t))
        .fold(0.0, f64::max)
        / 60.0
}

pub fn mean_deviation(log: &FlightLog) -> f64 {
    pooled_mean_deviation(std::slice::from_ref(log))
}

/// Mean deviation over every sample of every log.
pub fn pooled_mean_deviation(logs: &[FlightLog]) -> f64 {
    let (sum, n) = logs
        .iter()
        .flat_map(|l| &l.samples)
        .fold((0.0, 0usize), |(s, n), x| (s + x.position.distance(x.reference), n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Percentage of blade surface points seen by at least one logged pose,
/// averaged over all blades of all turbines.
pub fn surface_coverage(
    logs: &[FlightLog],
    turbines: &[TurbineModel],
    camera: &CameraModel,
    sample_density: f64,
) -> Result<f64, MetricsError> {
    camera.validate()?;
    if !(sample_density > 0.0 && sample_density.is_finite()) {
        return Err(MetricsError::InvalidDensity(sample_density));
    }
    let blades: Vec<Vec<SurfacePoint>> = turbines
        .iter()
        .flat_map(|t| {
            blade_tips(t)
                .into_iter()
                .map(|tip| blade_surface_points(t.hub_position, tip, t.rotor_normal(), sample_density))
        })
        .collect();
    if blades.is_empty() {
        return Ok(0.0);
    }
    let poses: Vec<(Point3, Point3)> = logs
        .iter()
        .flat_map(|l| l.samples.iter().map(|s| (s.position, s.gaze)))
        .collect();
    let per_blade: Vec<f64> = blades
        .par_iter()
        .map(|points| {
            let seen = points
                .iter()
                .filter(|p| poses.iter().any(|&(e, g)| camera.sees(e, g, p.position, p.normal)))
                .count();
            seen as f64 / points.len() as f64
        })
        .collect();
    Ok(100.0 * per_blade.iter().sum::<f64>() / per_blade.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total_time_min: f64,
    pub total_length_m: f64,
    pub blade_coverage_pct: f64,
    pub mean_deviation_m: f64,
    pub uav_count: usize,
    pub operator_count: usize,
}

impl MetricsReport {
    /// Autonomous-run report from flight logs.
    pub fn from_logs(
        logs: &[FlightLog],
        turbines: &[TurbineModel],
        camera: &CameraModel,
        sample_density: f64,
    ) -> Result<Self, MetricsError> {
        Ok(Self {
            total_time_min: inspection_time(logs),
            total_length_m: logs.iter().map(path_length).sum(),
            blade_coverage_pct: surface_coverage(logs, turbines, camera, sample_density)?,
            mean_deviation_m: pooled_mean_deviation(logs),
            uav_count: logs.len(),
            operator_count: 0,
        })
    }

    fn values(&self) -> [f64; 4] {
        [
            self.total_time_min,
            self.total_length_m,
            self.blade_coverage_pct,
            self.mean_deviation_m,
        ]
    }
}

pub const METRICS_HEADER: &str =
    "total_time_min,total_length_m,blade_coverage_pct,mean_deviation_m,uav_count,operator_count";

fn report_fields(r: &MetricsReport) -> String {
    format!(
        "{:.6},{:.6},{:.6},{:.6},{},{}",
        r.total_time_min, r.total_length_m, r.blade_coverage_pct, r.mean_deviation_m, r.uav_count, r.operator_count
    )
}

pub fn write_metrics_csv<W: Write>(mut out: W, report: &MetricsReport) -> io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    writeln!(out, "{}", report_fields(report))
}

/// Parses every data row of a metrics table written by [`write_metrics_csv`].
pub fn parse_metrics_csv(text: &str) -> Result<Vec<MetricsReport>, MetricsError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == METRICS_HEADER => {}
        Some(h) => return Err(MetricsError::Parse(format!("unexpected header {h:?}"))),
        None => return Err(MetricsError::Parse("empty table".into())),
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 6 {
                return Err(MetricsError::Parse(format!("expected 6 fields in {line:?}")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| MetricsError::Parse(format!("{s:?}: {e}")));
            let int = |s: &str| s.parse::<usize>().map_err(|e| MetricsError::Parse(format!("{s:?}: {e}")));
            Ok(MetricsReport {
                total_time_min: num(f[0])?,
                total_length_m: num(f[1])?,
                blade_coverage_pct: num(f[2])?,
                mean_deviation_m: num(f[3])?,
                uav_count: int(f[4])?,
                operator_count: int(f[5])?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub report: MetricsReport,
    /// Percent change against the baseline for time, length, coverage and
    /// deviation; `None` when the baseline value is zero.
    pub change_pct: [Option<f64>; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

pub const COMPARISON_HEADER: &str = "label,total_time_min,total_length_m,blade_coverage_pct,mean_deviation_m,uav_count,operator_count,time_change_pct,length_change_pct,coverage_change_pct,deviation_change_pct";

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{COMPARISON_HEADER}").unwrap();
        for row in &self.rows {
            write!(s, "{},{}", row.label, report_fields(&row.report)).unwrap();
            for c in row.change_pct {
                match c {
                    Some(v) => write!(s, ",{v:.3}").unwrap(),
                    None => s.push(','),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Percent change of each entry relative to the first one.
pub fn compare_report(reports: &[MetricsReport], labels: &[String]) -> Result<Comparison, MetricsError> {
    if reports.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            reports: reports.len(),
            labels: labels.len(),
        });
    }
    if reports.len() < 2 {
        return Err(MetricsError::TooFewReports(reports.len()));
    }
    let base = reports[0].values();
    let rows = reports
        .iter()
        .zip(labels)
        .map(|(r, l)| {
            let v = r.values();
            ComparisonRow {
                label: l.clone(),
                report: *r,
                change_pct: std::array::from_fn(|i| (base[i] != 0.0).then(|| (v[i] - base[i]) / base[i] * 100.0)),
            }
        })
        .collect();
    Ok(Comparison { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::FlightSample;

    fn log_of(points: &[(f64, Point3, Point3)]) -> FlightLog {
        FlightLog {
            uav_id: 0,
            dt: 1.0,
            samples: points
                .iter()
                .map(|&(t, p, r)| FlightSample {
                    t,
                    position: p,
                    reference: r,
                    control: Point3::ZERO,
                    wind: Point3::ZERO,
                    gaze: Point3::UNIT_X,
                })
                .collect(),
        }
    }

    fn at(t: f64, p: Point3) -> (f64, Point3, Point3) {
        (t, p, p)
    }

    #[test]
    fn path_lengths() {
        let l = log_of(&[at(0.0, Point3::ZERO), at(1.0, Point3::new(3.0, 4.0, 0.0))]);
        assert_eq!(path_length(&l), 5.0);
        assert_eq!(path_length(&log_of(&[at(0.0, Point3::ZERO)])), 0.0);
        let square = [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0), (0.0, 0.0)];
        let l = log_of(
            &square
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| at(i as f64, Point3::new(x, y, 0.0)))
                .collect::<Vec<_>>(),
        );
        assert_eq!(path_length(&l), 40.0);
    }

    #[test]
    fn fleet_time_is_max() {
        let span = |s: f64| log_of(&[at(0.0, Point3::ZERO), at(s, Point3::ZERO)]);
        assert_eq!(inspection_time(&[span(480.0)]), 8.0);
        assert_eq!(inspection_time(&[span(300.0), span(400.0), span(480.0)]), 8.0);
        assert_eq!(inspection_time(&[span(480.0), span(480.0)]), 8.0);
    }

    #[test]
    fn deviations() {
        let p = Point3::new(2.0, 0.0, 0.0);
        assert_eq!(mean_deviation(&log_of(&[at(0.0, p), at(1.0, p)])), 0.0);
        let shifted = log_of(&[(0.0, p + Point3::UNIT_X, p), (1.0, Point3::UNIT_X, Point3::ZERO)]);
        assert_eq!(mean_deviation(&shifted), 1.0);
    }

    #[test]
    fn empty_logs_cover_nothing() {
        let t = TurbineModel::new(Point3::ZERO, 80.0, 0.0, 40.0, 3, 0.0).unwrap();
        let c = surface_coverage(&[], &[t], &CameraModel::default(), 2.0).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn surface_points_per_blade() {
        let pts = blade_surface_points(Point3::ZERO, Point3::new(0.0, 0.0, 40.0), Point3::UNIT_X, 2.0);
        assert_eq!(pts.len(), 160);
        let pts = blade_surface_points(Point3::ZERO, Point3::new(0.0, 0.0, 40.3), Point3::UNIT_X, 2.0);
        assert_eq!(pts.len(), 162);
    }

    #[test]
    fn camera_predicates() {
        let cam = CameraModel::default();
        let q = Point3::ZERO;
        let n = Point3::UNIT_X;
        assert!(cam.sees(Point3::new(10.0, 0.0, 0.0), -Point3::UNIT_X, q, n));
        // too close, too far
        assert!(!cam.sees(Point3::new(1.0, 0.0, 0.0), -Point3::UNIT_X, q, n));
        assert!(!cam.sees(Point3::new(30.0, 0.0, 0.0), -Point3::UNIT_X, q, n));
        // looking away
        assert!(!cam.sees(Point3::new(10.0, 0.0, 0.0), Point3::UNIT_X, q, n));
        // back face
        assert!(!cam.sees(Point3::new(-10.0, 0.0, 0.0), Point3::UNIT_X, q, n));
        // grazing view beyond max incidence
        let eye = Point3::new(2.0, 10.0, 0.0);
        assert!(!cam.sees(eye, (q - eye).normalized().unwrap(), q, n));
    }

    #[test]
    fn camera_validation() {
        assert!(CameraModel::default().validate().is_ok());
        let bad = [
            CameraModel { fov: 180.0, ..Default::default() },
            CameraModel { min_range: 30.0, ..Default::default() },
            CameraModel { max_incidence: 0.0, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err());
        }
    }

    fn report(time: f64, length: f64) -> MetricsReport {
        MetricsReport {
            total_time_min: time,
            total_length_m: length,
            blade_coverage_pct: 90.0,
            mean_deviation_m: 0.5,
            uav_count: 1,
            operator_count: 0,
        }
    }

    #[test]
    fn comparison_changes() {
        let labels = vec!["manual".to_string(), "auto".to_string()];
        let c = compare_report(&[report(90.0, 1400.0), report(8.0, 1100.0)], &labels).unwrap();
        let ch = c.rows[1].change_pct;
        assert!((ch[0].unwrap() - (8.0 - 90.0) / 90.0 * 100.0).abs() < 1e-12);
        assert!((ch[1].unwrap() + 21.428571428571427).abs() < 1e-9);
        assert_eq!(c.rows[0].change_pct, [Some(0.0); 4]);
        assert!(compare_report(&[report(1.0, 1.0)], &labels[..1]).is_err());
        assert!(compare_report(&[report(1.0, 1.0), report(1.0, 1.0)], &labels[..1]).is_err());
    }

    #[test]
    fn zero_baseline_leaves_change_empty() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let c = compare_report(&[report(0.0, 10.0), report(5.0, 10.0)], &labels).unwrap();
        assert_eq!(c.rows[1].change_pct[0], None);
        let csv = c.to_csv();
        assert!(csv.lines().nth(2).unwrap().contains(",,0.000,"));
    }

    #[test]
    fn metrics_csv_round_trip() {
        let r = report(12.5, 3000.25);
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), METRICS_HEADER);
        assert_eq!(parse_metrics_csv(&text).unwrap(), vec![r]);
        assert!(parse_metrics_csv("a,b\n1,2\n").is_err());
    }
}
