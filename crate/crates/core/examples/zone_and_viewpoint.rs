//! Inspection zone and initial viewpoint of a turbine.
//!
//! cargo run --example zone_and_viewpoint

use turbine_inspect::geometry::{blade_tips, compute_zone, initial_point_at, Point3, TurbineModel};

fn main() {
    let turbine = TurbineModel::new(Point3::new(120.0, -40.0, 0.0), 85.0, 30.0, 42.0, 3, 15.0)
        .expect("valid turbine");

    let tips = blade_tips(&turbine);
    for (k, tip) in tips.iter().enumerate() {
        println!("blade {k} tip: ({:.2}, {:.2}, {:.2})", tip.x, tip.y, tip.z);
    }

    let zone = compute_zone(&tips).expect("at least one tip");
    println!(
        "zone center ({:.2}, {:.2}, {:.2}), radius {:.2} m",
        zone.center.x, zone.center.y, zone.center.z, zone.radius
    );

    // approach along the rotor axis so the first frame shows the rotor face on
    let sp = initial_point_at(&zone, turbine.nacelle_yaw);
    println!("initial viewpoint ({:.2}, {:.2}, {:.2})", sp.x, sp.y, sp.z);
    println!("distance to hub {:.2} m", sp.distance(turbine.hub_position));
}
