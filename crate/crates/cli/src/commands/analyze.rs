use std::fs;
use std::path::PathBuf;

use sigleak_core::analysis::{brightness_summary, lowfreq_recovery};
use sigleak_core::io::write_tensor;

use crate::commands::{load_input_dir, parse_dtype};
use crate::error::CliError;
use crate::schedule_args::ScheduleArgs;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Directory of .slt tensors to analyze
    #[arg(long)]
    pub input: PathBuf,

    /// Output CSV: per-sample brightness rows plus a summary row
    #[arg(long)]
    pub out: PathBuf,

    #[command(flatten)]
    pub schedule: ScheduleArgs,

    /// Write low-frequency recovery tensors to this directory
    /// (needs --t and --n-lowest)
    #[arg(long)]
    pub recovery_out: Option<PathBuf>,

    /// Timestep the input latents live at (for recovery)
    #[arg(long)]
    pub t: Option<usize>,

    /// Number of lowest frequencies kept by the recovery mask
    #[arg(long, default_value_t = 1)]
    pub n_lowest: usize,

    /// Payload precision of recovery outputs: f32 | f64
    #[arg(long, default_value = "f32")]
    pub dtype: String,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let (paths, tensors) = load_input_dir(&args.input)?;

    let summary = brightness_summary(&tensors).map_err(|e| CliError::usage(e.to_string()))?;
    let mut csv = String::from("id,spatial_mean,spatial_std,mean_of_means,std_of_means,mean_contrast\n");
    for (i, tensor) in tensors.iter().enumerate() {
        csv.push_str(&format!(
            "{i},{},{},,,\n",
            tensor.mean(),
            tensor.population_std()
        ));
    }
    csv.push_str(&format!(
        "summary,,,{},{},{}\n",
        summary.mean_of_means, summary.std_of_means, summary.mean_contrast
    ));
    fs::write(&args.out, csv)?;

    if let Some(recovery_dir) = &args.recovery_out {
        let schedule = args.schedule.build()?;
        let t = args.t.unwrap_or_else(|| schedule.t_max());
        let dtype = parse_dtype(&args.dtype)?;
        fs::create_dir_all(recovery_dir)?;
        for (path, tensor) in paths.iter().zip(&tensors) {
            let recovered = lowfreq_recovery(tensor, &schedule, t, args.n_lowest)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("sample");
            write_tensor(recovery_dir.join(format!("{name}_recovered.slt")), &recovered, dtype)?;
        }
        println!(
            "analyzed {} tensors -> {} (recovery in {})",
            tensors.len(),
            args.out.display(),
            recovery_dir.display()
        );
    } else {
        println!("analyzed {} tensors -> {}", tensors.len(), args.out.display());
    }
    Ok(())
}
