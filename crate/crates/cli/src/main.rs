//! `sigleak`: signal-leak experiments from the command line.
//!
//! Subcommands: `schedule-info`, `estimate`, `sample-init`, `simulate`,
//! `analyze`. Exit codes: 0 success, 2 usage, 3 I/O, 4 numerical failure.
//! Every run is deterministic under fixed flags and seed.

use clap::Parser;

mod commands;
mod error;
mod schedule_args;

#[derive(Parser)]
#[command(name = "sigleak", version, about = "Signal-leak analysis for diffusion models")]
enum Cli {
    /// Print final-step marginal coefficients and the global SNR of a schedule
    ScheduleInfo(commands::schedule_info::Args),
    /// Estimate leak statistics from a directory of .slt/.ppm/.pgm tensors
    Estimate(commands::estimate::Args),
    /// Sample leak-injected initial latents into .slt files
    SampleInit(commands::sample_init::Args),
    /// Run the simulator bias experiment against a known mixture
    Simulate(commands::simulate::Args),
    /// Brightness/contrast diagnostics and low-frequency recovery
    Analyze(commands::analyze::Args),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli {
        Cli::ScheduleInfo(args) => commands::schedule_info::run(args),
        Cli::Estimate(args) => commands::estimate::run(args),
        Cli::SampleInit(args) => commands::sample_init::run(args),
        Cli::Simulate(args) => commands::simulate::run(args),
        Cli::Analyze(args) => commands::analyze::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
