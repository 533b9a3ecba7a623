//! Command-line front end for the cine3d library.
//!
//! Exit codes: 0 on success, 2 for usage errors (clap), 1 for anything
//! the library rejects at runtime, reported as a single `error:` line on
//! stderr.

mod commands;

use clap::{Parser, Subcommand, ValueEnum};
use std::process::ExitCode;

/// Report format for results printed to stdout.
#[derive(Clone, Copy, Debug, Eq, PartialEq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "cine3d",
    version,
    about = "Cine cardiac volume toolkit: degradation synthesis, training losses, \
             segmentation-derived measurements, and agreement statistics"
)]
struct Cli {
    /// Worker threads for parallel sections; default uses every core.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Container utilities: import/export raw payloads, inspect, resample.
    Convert(commands::convert::ConvertArgs),
    /// Degrade a clean cine volume into a synthetic free-breathing stack.
    Simulate(commands::simulate::SimulateArgs),
    /// Evaluate one training loss on volumes, label maps, or a deformation field.
    Loss(commands::loss::LossArgs),
    /// Segmentation-derived measurements: chamber volumes, vessel diameters.
    Measure(commands::measure::MeasureArgs),
    /// Image-quality metrics: edge sharpness, contrast, MSE, PSNR, SSIM.
    Qa(commands::qa::QaArgs),
    /// Paired agreement statistics from two-column CSV files.
    Stats(commands::stats::StatsArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        // Fails only if a global pool already exists; that pool is fine too.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let result = match cli.command {
        Command::Convert(args) => commands::convert::run(args, cli.format),
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Loss(args) => commands::loss::run(args, cli.format),
        Command::Measure(args) => commands::measure::run(args, cli.format),
        Command::Qa(args) => commands::qa::run(args, cli.format),
        Command::Stats(args) => commands::stats::run(args, cli.format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
