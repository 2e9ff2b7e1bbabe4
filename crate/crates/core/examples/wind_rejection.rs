//! Crosswind on a straight leg: P-only versus PID versus open loop.
//!
//! cargo run --example wind_rejection

use turbine_inspect::control::{simulate_route, PidGains, WindModel};
use turbine_inspect::geometry::Point3;
use turbine_inspect::metrics::mean_deviation;
use turbine_inspect::trajectory::{plan_return, UavRoute};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let leg = UavRoute {
        uav_id: 0,
        origin: Point3::ZERO,
        turbines: vec![],
        segments: vec![plan_return(Point3::ZERO, Point3::new(200.0, 0.0, 0.0), 50.0)?],
    };
    let steady = WindModel::constant(Point3::new(0.0, 5.0, 0.0));
    let gusty = WindModel {
        gust_amplitude: 1.5,
        seed: 42,
        ..steady
    };

    let cases = [
        ("open loop", PidGains::zero()),
        ("P + D", PidGains::new(1.2, 0.0, 0.4)),
        ("PID", PidGains::default()),
    ];
    println!("{:>10} {:>12} {:>12} {:>12}", "gains", "mean (m)", "final (m)", "gusty (m)");
    for (name, gains) in cases {
        let log = simulate_route(&leg, &gains, &steady, 0.05)?;
        let last = log.samples.last().unwrap();
        let gust_log = simulate_route(&leg, &gains, &gusty, 0.05)?;
        println!(
            "{name:>10} {:12.3} {:12.3} {:12.3}",
            mean_deviation(&log),
            last.position.distance(last.reference),
            mean_deviation(&gust_log)
        );
    }
    Ok(())
}
