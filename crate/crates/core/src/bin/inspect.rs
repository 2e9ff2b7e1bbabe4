//! Command-line driver.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 pipeline error.
//! Log verbosity comes from `INSPECT_LOG` (e.g. `INSPECT_LOG=info`).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use turbine_inspect::metrics::{compare_report, parse_metrics_csv};
use turbine_inspect::pipeline::{angle_sweep, run_pipeline, write_outputs, OutputFormat};
use turbine_inspect::scenario::{load_scenario, ImagingParams};

const CONFIG_ERROR: u8 = 1;
const PIPELINE_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "inspect", version, about = "Plan, fly and score wind turbine inspection missions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    JsonLines,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline on a scenario file and write all outputs.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Render blades at evenly spaced inclinations and report estimation error.
    SweepAngle {
        #[arg(long, default_value_t = 180)]
        steps: usize,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
    },
    /// Percent change of each metrics table against the first one.
    Compare {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("INSPECT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(CONFIG_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            format,
        } => run(scenario, out, seed, format),
        Command::SweepAngle { steps, resolution } => sweep(steps, resolution),
        Command::Compare { files } => compare(files),
    }
}

fn run(path: PathBuf, out: PathBuf, seed: Option<u64>, format: Format) -> ExitCode {
    let mut scenario = match load_scenario(&path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    if let Some(seed) = seed {
        scenario = scenario.with_seed(seed);
    }
    let output = match run_pipeline(&scenario) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(PIPELINE_ERROR);
        }
    };
    let format = match format {
        Format::Csv => OutputFormat::Csv,
        Format::JsonLines => OutputFormat::JsonLines,
    };
    match write_outputs(&out, &scenario, &output, format) {
        Ok(files) => {
            for f in files {
                log::info!("wrote {}", f.display());
            }
            let r = &output.report;
            println!(
                "time {:.2} min, length {:.1} m, coverage {:.2} %, deviation {:.3} m -> {}",
                r.total_time_min,
                r.total_length_m,
                r.blade_coverage_pct,
                r.mean_deviation_m,
                out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: writing {}: {e}", out.display());
            ExitCode::from(PIPELINE_ERROR)
        }
    }
}

fn sweep(steps: usize, resolution: usize) -> ExitCode {
    if steps == 0 {
        eprintln!("error: --steps must be >= 1");
        return ExitCode::from(CONFIG_ERROR);
    }
    let imaging = ImagingParams {
        resolution,
        ..Default::default()
    };
    let results = match angle_sweep(steps, &imaging) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(PIPELINE_ERROR);
        }
    };
    println!("truth_deg,estimate_deg,error_deg,truth_class,estimated_class");
    for s in &results {
        println!(
            "{:.3},{:.3},{:.3},{},{}",
            s.truth, s.estimate, s.error, s.truth_class, s.estimated_class
        );
    }
    let within = results.iter().filter(|s| s.error <= 2.0).count();
    let worst = results.iter().map(|s| s.error).fold(0.0, f64::max);
    eprintln!(
        "{within}/{} within 2 deg, max error {worst:.3} deg",
        results.len()
    );
    ExitCode::SUCCESS
}

fn compare(files: Vec<PathBuf>) -> ExitCode {
    let mut reports = Vec::new();
    let mut labels = Vec::new();
    for f in &files {
        let parsed = std::fs::read_to_string(f)
            .map_err(|e| e.to_string())
            .and_then(|t| parse_metrics_csv(&t).map_err(|e| e.to_string()));
        match parsed {
            Ok(rows) => {
                let n = rows.len();
                for (i, r) in rows.into_iter().enumerate() {
                    let base = f.display().to_string();
                    labels.push(if n == 1 { base } else { format!("{base}#{i}") });
                    reports.push(r);
                }
            }
            Err(e) => {
                eprintln!("error: {}: {e}", f.display());
                return ExitCode::from(CONFIG_ERROR);
            }
        }
    }
    match compare_report(&reports, &labels) {
        Ok(table) => {
            print!("{}", table.to_csv());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}
