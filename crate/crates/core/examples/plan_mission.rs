//! Tilt-adaptive mission for several turbines shared by two UAVs.
//!
//! cargo run --example plan_mission [-- mission.csv]

use std::fs::File;

use turbine_inspect::geometry::{Point3, TurbineModel};
use turbine_inspect::trajectory::{assemble_mission, write_mission_csv, PlannerParams, SegmentKind};
use turbine_inspect::vision::BladeOrientation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let turbines = vec![
        TurbineModel::new(Point3::ZERO, 80.0, 0.0, 40.0, 3, 90.0)?,
        TurbineModel::new(Point3::new(300.0, 0.0, 0.0), 80.0, 0.0, 40.0, 3, 0.0)?,
        TurbineModel::new(Point3::new(600.0, 50.0, 0.0), 95.0, 20.0, 48.0, 3, 40.0)?,
    ];
    // normally measured from a frame; here the renderer's ground truth stands in
    let orientations: Vec<Vec<BladeOrientation>> = turbines
        .iter()
        .map(|t| t.blade_pitch_truth.iter().map(|&a| BladeOrientation::from_theta(a)).collect())
        .collect::<Result<_, _>>()?;

    let params = PlannerParams {
        pass_spacing: 4.0,
        ..Default::default()
    };
    let plan = assemble_mission(&turbines, &orientations, 2, &params)?;

    for route in &plan.routes {
        println!(
            "uav {}: turbines {:?}, {:.0} m, {:.1} min",
            route.uav_id,
            route.turbines,
            route.length(),
            route.duration() / 60.0
        );
        for seg in route.segments.iter().filter(|s| s.kind == SegmentKind::BladeSweep) {
            let start = seg.waypoints[1].position;
            println!("  sweep: {} waypoints, starts at z = {:.1}, {:.0} s", seg.waypoints.len(), start.z, seg.duration);
        }
    }

    if let Some(path) = std::env::args().nth(1) {
        write_mission_csv(File::create(&path)?, &plan)?;
        println!("wrote {path}");
    }
    Ok(())
}
