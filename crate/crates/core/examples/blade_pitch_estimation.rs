//! Render a turbine from its initial viewpoint and recover the blade angles.
//!
//! cargo run --example blade_pitch_estimation [-- frame.pgm]
//!
//! With a path argument the label image is written as a PGM for inspection.

use std::fs::File;
use std::io::BufWriter;

use turbine_inspect::geometry::{blade_tips, compute_zone, initial_point_at, Point3, TurbineModel};
use turbine_inspect::vision::{
    analyze_frame, render_silhouette, LabelSegmenter, PinholeCamera, DEFAULT_AREA_THRESHOLD_FRACTION,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let turbine = TurbineModel::new(Point3::ZERO, 90.0, 0.0, 45.0, 3, 72.0)?;
    let zone = compute_zone(&blade_tips(&turbine))?;
    let camera = PinholeCamera::looking_at(initial_point_at(&zone, turbine.nacelle_yaw), zone.center, 100.0);

    let size = 512;
    let frame = render_silhouette(&turbine, &camera, size, size)?;
    if let Some(path) = std::env::args().nth(1) {
        // labels are small integers; stretch them so the PGM is visible
        let mut shown = frame.clone();
        for y in 0..size {
            for x in 0..size {
                shown.set(x, y, frame.get(x, y).saturating_mul(20));
            }
        }
        shown.write_pgm(BufWriter::new(File::create(&path)?))?;
        println!("wrote {path}");
    }

    let threshold = DEFAULT_AREA_THRESHOLD_FRACTION * (size * size) as f64;
    let analysis = analyze_frame(&frame, &LabelSegmenter, threshold)?;
    println!("{} segments, {} contours above {threshold} px", analysis.segments.len(), analysis.contours_kept);

    let mut truth = turbine.blade_pitch_truth.clone();
    truth.sort_by(f64::total_cmp);
    println!("ground truth: {truth:.2?}");
    for b in &analysis.blades {
        println!(
            "blade at ({:6.1}, {:6.1}): theta {:6.2} deg, {} ({:.0} x {:.0} px)",
            b.rect.center.0, b.rect.center.1, b.orientation.theta, b.orientation.tilt_class, b.rect.width, b.rect.height
        );
    }
    Ok(())
}
