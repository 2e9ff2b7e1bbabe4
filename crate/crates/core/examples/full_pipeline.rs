//! Run a scenario file end to end and write all outputs.
//!
//! cargo run --release --example full_pipeline [-- scenario.toml out_dir]

use std::path::PathBuf;

use turbine_inspect::pipeline::{render_report, run_pipeline, write_outputs, OutputFormat};
use turbine_inspect::scenario::load_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let scenario_path = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/three_turbines_weak_wind.toml")
    });
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("turbine-inspect-example"));

    let scenario = load_scenario(&scenario_path)?;
    let output = run_pipeline(&scenario)?;
    print!("{}", render_report(&scenario, &output));
    for f in write_outputs(&out, &scenario, &output, OutputFormat::Csv)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
