//! How pass spacing and camera reach change blade coverage.
//!
//! cargo run --release --example coverage_report

use turbine_inspect::control::{simulate_flight, PidGains, WindModel};
use turbine_inspect::geometry::{Point3, TurbineModel};
use turbine_inspect::metrics::{surface_coverage, CameraModel, DEFAULT_SAMPLE_DENSITY};
use turbine_inspect::trajectory::{assemble_mission, footprints_overlap, PlannerParams};
use turbine_inspect::vision::BladeOrientation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let turbine = TurbineModel::new(Point3::ZERO, 80.0, 0.0, 40.0, 3, 90.0)?;
    let orientations = vec![turbine
        .blade_pitch_truth
        .iter()
        .map(|&a| BladeOrientation::from_theta(a))
        .collect::<Result<Vec<_>, _>>()?];

    let cameras = [
        ("default", CameraModel::default()),
        ("narrow", CameraModel { fov: 20.0, ..Default::default() }),
        ("short", CameraModel { max_range: 11.0, ..Default::default() }),
    ];
    for spacing in [2.5, 5.0, 10.0, 20.0] {
        for sides in [1, 2] {
            let params = PlannerParams {
                pass_spacing: spacing,
                sides,
                ..Default::default()
            };
            let plan = assemble_mission(std::slice::from_ref(&turbine), &orientations, 1, &params)?;
            let logs = simulate_flight(&plan, &PidGains::default(), &WindModel::calm(), 0.05)?;
            let row: Vec<String> = cameras
                .iter()
                .map(|(name, cam)| {
                    let c = surface_coverage(&logs, std::slice::from_ref(&turbine), cam, DEFAULT_SAMPLE_DENSITY).unwrap();
                    format!("{name} {c:5.1}%")
                })
                .collect();
            let overlap = footprints_overlap(&params, CameraModel::default().fov);
            println!("spacing {spacing:4.1} m, {sides} side(s), overlap {overlap:5}: {}", row.join("  "));
        }
    }
    Ok(())
}
