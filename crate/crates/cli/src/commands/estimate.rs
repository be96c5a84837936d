use std::path::PathBuf;

use sigleak_core::io::{write_stats, SavedStats, SavedStatsKind};
use sigleak_core::stats::{estimate_hybrid_stats, estimate_pixel_stats};

use crate::commands::load_input_dir;
use crate::error::CliError;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Directory of .slt/.ppm/.pgm inputs with identical shapes
    #[arg(long)]
    pub input: PathBuf,

    /// Statistics model: pixel | hybrid
    #[arg(long, default_value = "pixel")]
    pub mode: String,

    /// Number of lowest frequencies for hybrid mode
    #[arg(long, default_value_t = 3)]
    pub n_lowest: usize,

    /// Ridge added to the low-frequency covariance diagonal
    #[arg(long, default_value_t = 1e-4)]
    pub ridge: f64,

    /// Output stats file (JSON)
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let (_, tensors) = load_input_dir(&args.input)?;
    let kind = match args.mode.as_str() {
        "pixel" => SavedStatsKind::Pixel(
            estimate_pixel_stats(&tensors).map_err(|e| CliError::usage(e.to_string()))?,
        ),
        "hybrid" => SavedStatsKind::Hybrid(
            estimate_hybrid_stats(&tensors, args.n_lowest, args.ridge)
                .map_err(|e| CliError::usage(e.to_string()))?,
        ),
        other => {
            return Err(CliError::usage(format!(
                "unknown mode `{other}` (expected pixel or hybrid)"
            )))
        }
    };
    let saved = SavedStats {
        n_images: tensors.len(),
        kind,
    };
    write_stats(&args.out, &saved)?;
    println!(
        "estimated {} stats from {} tensors -> {}",
        args.mode,
        tensors.len(),
        args.out.display()
    );
    Ok(())
}
