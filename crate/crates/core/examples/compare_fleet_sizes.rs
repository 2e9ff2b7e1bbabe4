//! Same turbines, one to three UAVs, compared against the single-UAV run.
//!
//! cargo run --release --example compare_fleet_sizes

use turbine_inspect::metrics::compare_report;
use turbine_inspect::pipeline::run_pipeline;
use turbine_inspect::scenario::load_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/three_turbines_weak_wind.toml");
    let base = load_scenario(path)?;
    let mut reports = Vec::new();
    let mut labels = Vec::new();
    for uavs in 1..=3 {
        let mut s = base.clone();
        s.uav_count = uavs;
        reports.push(run_pipeline(&s)?.report);
        labels.push(format!("{uavs}_uav"));
    }
    print!("{}", compare_report(&reports, &labels)?.to_csv());
    Ok(())
}
