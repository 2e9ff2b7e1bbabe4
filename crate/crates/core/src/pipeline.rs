//! End-to-end run: per turbine, zone → viewpoint → frame → blade
//! orientations; then mission planning, simulated flight and metrics.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

use crate::control::{simulate_flight, write_flight_log_csv, FlightLog};
use crate::geometry::{blade_tips, compute_zone, initial_point_at, TurbineModel};
use crate::metrics::{write_metrics_csv, MetricsReport};
use crate::scenario::{ImagingParams, Scenario};
use crate::trajectory::{assemble_mission, mission_rows, write_mission_csv, MissionPlan};
use crate::vision::{
    analyze_frame, classify_tilt, render_silhouette, write_orientations_csv, BladeOrientation,
    LabelSegmenter, PinholeCamera, TiltClass,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Zone,
    Imaging,
    Orientation,
    Planning,
    Simulation,
    Metrics,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Zone => "zone",
            Stage::Imaging => "imaging",
            Stage::Orientation => "orientation",
            Stage::Planning => "planning",
            Stage::Simulation => "simulation",
            Stage::Metrics => "metrics",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{stage} stage failed{}: {message}", turbine.as_ref().map(|t| format!(" for {t}")).unwrap_or_default())]
pub struct PipelineError {
    pub stage: Stage,
    pub turbine: Option<String>,
    pub message: String,
}

impl PipelineError {
    fn new(stage: Stage, turbine: Option<&str>, e: impl ToString) -> Self {
        Self {
            stage,
            turbine: turbine.map(str::to_string),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    /// One entry per turbine, indexed by blade.
    pub orientations: Vec<Vec<BladeOrientation>>,
    pub plan: MissionPlan,
    pub logs: Vec<FlightLog>,
    pub report: MetricsReport,
}

/// Estimates every blade's image inclination from one synthetic frame taken
/// at the turbine's initial viewpoint. Each modeled blade is paired with the
/// detected rectangle nearest to the projection of its midpoint.
pub fn estimate_orientations(
    turbine: &TurbineModel,
    imaging: &ImagingParams,
) -> Result<Vec<BladeOrientation>, PipelineError> {
    let tips = blade_tips(turbine);
    let zone = compute_zone(&tips).map_err(|e| PipelineError::new(Stage::Zone, None, e))?;
    let viewpoint = initial_point_at(&zone, turbine.nacelle_yaw);
    let camera = PinholeCamera::looking_at(viewpoint, zone.center, imaging.fov);
    let n = imaging.resolution;
    let frame = render_silhouette(turbine, &camera, n, n).map_err(|e| PipelineError::new(Stage::Imaging, None, e))?;
    let analysis = analyze_frame(&frame, &LabelSegmenter, imaging.area_threshold())
        .map_err(|e| PipelineError::new(Stage::Orientation, None, e))?;
    if analysis.blades.len() < turbine.blade_count {
        return Err(PipelineError::new(
            Stage::Orientation,
            None,
            format!(
                "found {} blade contours, expected {}",
                analysis.blades.len(),
                turbine.blade_count
            ),
        ));
    }

    let proj = camera.frame(n, n).map_err(|e| PipelineError::new(Stage::Imaging, None, e))?;
    let mut taken = vec![false; analysis.blades.len()];
    tips.iter()
        .map(|&tip| {
            let mid = turbine.hub_position.lerp(tip, 0.5);
            let (u, v) = proj.project(mid).ok_or_else(|| {
                PipelineError::new(Stage::Orientation, None, "blade midpoint behind camera")
            })?;
            let best = analysis
                .blades
                .iter()
                .enumerate()
                .filter(|(i, _)| !taken[*i])
                .min_by(|(_, a), (_, b)| {
                    let d = |o: &crate::vision::BladeObservation| {
                        (o.rect.center.0 - u).powi(2) + (o.rect.center.1 - v).powi(2)
                    };
                    d(a).total_cmp(&d(b))
                })
                .map(|(i, _)| i)
                .expect("at least as many observations as blades");
            taken[best] = true;
            Ok(analysis.blades[best].orientation)
        })
        .collect()
}

pub fn run_pipeline(scenario: &Scenario) -> Result<PipelineOutput, PipelineError> {
    let mut orientations = Vec::with_capacity(scenario.turbines.len());
    for (id, turbine) in scenario.turbine_ids.iter().zip(&scenario.turbines) {
        let o = estimate_orientations(turbine, &scenario.imaging).map_err(|mut e| {
            e.turbine = Some(id.clone());
            e
        })?;
        log::info!(
            "{id}: blade angles {:?}",
            o.iter().map(|b| (b.theta * 100.0).round() / 100.0).collect::<Vec<_>>()
        );
        orientations.push(o);
    }
    let plan = assemble_mission(&scenario.turbines, &orientations, scenario.uav_count, &scenario.planner)
        .map_err(|e| PipelineError::new(Stage::Planning, None, e))?;
    log::info!(
        "planned {} routes, {} segments",
        plan.routes.len(),
        plan.routes.iter().map(|r| r.segments.len()).sum::<usize>()
    );
    let logs = simulate_flight(&plan, &scenario.gains, &scenario.wind, scenario.dt)
        .map_err(|e| PipelineError::new(Stage::Simulation, None, e))?;
    let report = MetricsReport::from_logs(&logs, &scenario.turbines, &scenario.camera, scenario.coverage_density)
        .map_err(|e| PipelineError::new(Stage::Metrics, None, e))?;
    Ok(PipelineOutput {
        orientations,
        plan,
        logs,
        report,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    JsonLines,
}

impl OutputFormat {
    fn ext(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::JsonLines => "jsonl",
        }
    }
}

fn create(dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> io::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path)?;
    written.push(path);
    Ok(BufWriter::new(f))
}

fn jsonl<W: Write>(mut out: W, rows: impl Iterator<Item = serde_json::Value>) -> io::Result<()> {
    for r in rows {
        writeln!(out, "{r}")?;
    }
    out.flush()
}

/// Writes mission, per-UAV flight logs, metrics, blade orientations and a
/// text report into `dir` (created if needed). Returns the written paths.
pub fn write_outputs(
    dir: &Path,
    scenario: &Scenario,
    output: &PipelineOutput,
    format: OutputFormat,
) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let ext = format.ext();
    let mut written = Vec::new();
    let orientation_rows: Vec<(String, usize, BladeOrientation)> = scenario
        .turbine_ids
        .iter()
        .zip(&output.orientations)
        .flat_map(|(id, os)| os.iter().enumerate().map(move |(k, o)| (id.clone(), k, *o)))
        .collect();

    let mut mission = create(dir, &format!("mission.{ext}"), &mut written)?;
    match format {
        OutputFormat::Csv => {
            write_mission_csv(&mut mission, &output.plan)?;
            mission.flush()?
        }
        OutputFormat::JsonLines => jsonl(
            mission,
            mission_rows(&output.plan).map(|(uav, si, kind, wi, w)| {
                json!({
                    "uav_id": uav, "segment_index": si, "kind": kind.to_string(), "waypoint_index": wi,
                    "x": w.position.x, "y": w.position.y, "z": w.position.z,
                    "gaze_x": w.gaze.x, "gaze_y": w.gaze.y, "gaze_z": w.gaze.z, "speed": w.speed,
                })
            }),
        )?,
    }

    for log in &output.logs {
        let mut out = create(dir, &format!("flight_uav{}.{ext}", log.uav_id), &mut written)?;
        match format {
            OutputFormat::Csv => {
            write_flight_log_csv(&mut out, log)?;
            out.flush()?
        }
            OutputFormat::JsonLines => jsonl(
                out,
                log.samples.iter().map(|s| {
                    json!({
                        "t": s.t,
                        "x": s.position.x, "y": s.position.y, "z": s.position.z,
                        "ref_x": s.reference.x, "ref_y": s.reference.y, "ref_z": s.reference.z,
                        "ux": s.control.x, "uy": s.control.y, "uz": s.control.z,
                        "wx": s.wind.x, "wy": s.wind.y, "wz": s.wind.z,
                    })
                }),
            )?,
        }
    }

    let mut metrics = create(dir, &format!("metrics.{ext}"), &mut written)?;
    let r = &output.report;
    match format {
        OutputFormat::Csv => {
            write_metrics_csv(&mut metrics, r)?;
            metrics.flush()?
        }
        OutputFormat::JsonLines => jsonl(
            metrics,
            std::iter::once(json!({
                "total_time_min": r.total_time_min, "total_length_m": r.total_length_m,
                "blade_coverage_pct": r.blade_coverage_pct, "mean_deviation_m": r.mean_deviation_m,
                "uav_count": r.uav_count, "operator_count": r.operator_count,
            })),
        )?,
    }

    let mut orient = create(dir, &format!("orientations.{ext}"), &mut written)?;
    match format {
        OutputFormat::Csv => {
            write_orientations_csv(&mut orient, &orientation_rows)?;
            orient.flush()?
        }
        OutputFormat::JsonLines => jsonl(
            orient,
            orientation_rows.iter().map(|(id, k, o)| {
                json!({"turbine_id": id, "blade_index": k, "theta_deg": o.theta, "tilt_class": o.tilt_class.to_string()})
            }),
        )?,
    }

    let mut report = create(dir, "report.txt", &mut written)?;
    report.write_all(render_report(scenario, output).as_bytes())?;
    report.flush()?;
    Ok(written)
}

/// Human-readable run summary.
pub fn render_report(scenario: &Scenario, output: &PipelineOutput) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let r = &output.report;
    let label = if scenario.label.is_empty() { "(unnamed)" } else { &scenario.label };
    writeln!(s, "scenario: {label}").unwrap();
    if !scenario.terrain.is_empty() {
        writeln!(s, "terrain: {}", scenario.terrain).unwrap();
    }
    writeln!(s, "seed: {}", scenario.seed).unwrap();
    writeln!(s, "turbines: {}  uavs: {}", scenario.turbines.len(), scenario.uav_count).unwrap();
    writeln!(s).unwrap();
    writeln!(s, "blade orientations").unwrap();
    for (id, os) in scenario.turbine_ids.iter().zip(&output.orientations) {
        for (k, o) in os.iter().enumerate() {
            writeln!(s, "  {id} blade {k}: {:7.2} deg  {}", o.theta, o.tilt_class).unwrap();
        }
    }
    writeln!(s).unwrap();
    writeln!(s, "routes").unwrap();
    for route in &output.plan.routes {
        let ids: Vec<&str> = route.turbines.iter().map(|&i| scenario.turbine_ids[i].as_str()).collect();
        writeln!(
            s,
            "  uav {}: turbines [{}], {} segments, {:.1} m planned, {:.1} s",
            route.uav_id,
            ids.join(", "),
            route.segments.len(),
            route.length(),
            route.duration()
        )
        .unwrap();
    }
    writeln!(s).unwrap();
    writeln!(s, "metrics").unwrap();
    writeln!(s, "  total inspection time   {:10.3} min", r.total_time_min).unwrap();
    writeln!(s, "  total trajectory length {:10.3} m", r.total_length_m).unwrap();
    writeln!(s, "  blade surface coverage  {:10.3} %", r.blade_coverage_pct).unwrap();
    writeln!(s, "  mean deviation          {:10.3} m", r.mean_deviation_m).unwrap();
    writeln!(s, "  uavs {}  operators {}", r.uav_count, r.operator_count).unwrap();
    s
}

/// One step of the angle-recovery sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepStep {
    pub truth: f64,
    pub estimate: f64,
    /// Circular difference modulo 180°, in `[0, 90]`.
    pub error: f64,
    pub truth_class: TiltClass,
    pub estimated_class: TiltClass,
}

/// Angular distance between two inclinations, which wrap at 180°.
pub fn inclination_error(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

/// Renders a reference turbine with blade 0 at `steps` evenly spaced
/// inclinations in `[0, 180)` and estimates each from its frame.
pub fn angle_sweep(steps: usize, imaging: &ImagingParams) -> Result<Vec<SweepStep>, PipelineError> {
    (0..steps)
        .map(|i| {
            let truth = 180.0 * i as f64 / steps as f64;
            let turbine = TurbineModel::new(Default::default(), 90.0, 0.0, 45.0, 3, (360.0 - truth).rem_euclid(360.0))
                .map_err(|e| PipelineError::new(Stage::Zone, None, e))?;
            let est = estimate_orientations(&turbine, imaging)?[0];
            Ok(SweepStep {
                truth,
                estimate: est.theta,
                error: inclination_error(est.theta, truth),
                truth_class: classify_tilt(truth).expect("truth in range"),
                estimated_class: est.tilt_class,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn orientations_match_truth() {
        let t = TurbineModel::new(Default::default(), 80.0, 30.0, 40.0, 3, 10.0).unwrap();
        let o = estimate_orientations(&t, &ImagingParams::default()).unwrap();
        for (est, truth) in o.iter().zip(&t.blade_pitch_truth) {
            assert!(inclination_error(est.theta, *truth) < 2.0, "{} vs {truth}", est.theta);
        }
    }

    #[test]
    fn wrapped_error() {
        assert_eq!(inclination_error(179.0, 1.0), 2.0);
        assert_eq!(inclination_error(10.0, 10.0), 0.0);
        assert_eq!(inclination_error(0.0, 90.0), 90.0);
    }

    #[test]
    fn tiny_image_is_an_imaging_error() {
        let s = parse_scenario("[imaging]\nresolution = 64\n[[turbine]]\ntower_height = 80\nblade_length = 40\n").unwrap();
        assert!(run_pipeline(&s).is_ok());
        let mut s = s;
        s.imaging.resolution = 8;
        let e = run_pipeline(&s).unwrap_err();
        assert_eq!(e.stage, Stage::Imaging);
        assert_eq!(e.turbine.as_deref(), Some("WT1"));
        assert!(e.to_string().starts_with("imaging stage failed for WT1"));
    }
}
