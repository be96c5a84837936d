use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use sigleak_core::io::{read_stats, write_tensor, SavedStatsKind};
use sigleak_core::sampler::sample_initial_latent;
use sigleak_core::{LeakModel, RngStream, ScheduleKind};

use crate::commands::parse_dtype;
use crate::error::CliError;
use crate::schedule_args::ScheduleArgs;

#[derive(clap::Args, Debug)]
pub struct Args {
    #[command(flatten)]
    pub schedule: ScheduleArgs,

    /// Use a pure white-noise leak model
    #[arg(long, conflicts_with = "manual_lf")]
    pub white: bool,

    /// Stats file from `estimate` (pixel or hybrid)
    #[arg(long)]
    pub stats: Option<PathBuf>,

    /// Fix the per-channel DC of the leak to these comma-separated values
    /// (requires hybrid stats with --n-lowest 1 for the HF part)
    #[arg(long, value_delimiter = ',')]
    pub manual_lf: Option<Vec<f64>>,

    /// Latent shape C,H,W (inferred from --stats when omitted)
    #[arg(long, value_delimiter = ',')]
    pub shape: Option<Vec<usize>>,

    /// Number of latents to sample
    #[arg(long, default_value_t = 1)]
    pub count: usize,

    /// RNG seed; sample i consumes the derived stream i
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Payload precision of the written .slt files: f32 | f64
    #[arg(long, default_value = "f32")]
    pub dtype: String,

    /// Output directory (created if missing)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    kind: ScheduleKind,
    t_max: usize,
    t_eff: Option<usize>,
    model: ModelDescriptor,
    shape: [usize; 3],
    count: usize,
    seed: u64,
    dtype: String,
    files: Vec<String>,
}

#[derive(Serialize)]
struct ModelDescriptor {
    name: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    manual_lf: Option<Vec<f64>>,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let schedule = args.schedule.build()?;
    let dtype = parse_dtype(&args.dtype)?;

    let loaded = match &args.stats {
        Some(path) => Some(read_stats(path)?),
        None => None,
    };

    let (model, descriptor, stats_shape) = if args.white {
        if args.stats.is_some() {
            return Err(CliError::usage("--white conflicts with --stats"));
        }
        (
            LeakModel::WhiteNoise,
            ModelDescriptor {
                name: "white",
                stats: None,
                manual_lf: None,
            },
            None,
        )
    } else if let Some(values) = &args.manual_lf {
        let Some(stats) = &loaded else {
            return Err(CliError::usage("--manual-lf needs --stats with hybrid statistics"));
        };
        let SavedStatsKind::Hybrid(hybrid) = &stats.kind else {
            return Err(CliError::usage("--manual-lf needs hybrid stats, got pixel"));
        };
        if hybrid.lf.mask.n_lowest() != 1 {
            return Err(CliError::usage(
                "--manual-lf controls the DC bin only; re-estimate with --n-lowest 1",
            ));
        }
        let shape = hybrid.shape();
        let model = LeakModel::manual_dc(values, hybrid.hf.clone())
            .map_err(|e| CliError::usage(e.to_string()))?;
        (
            model,
            ModelDescriptor {
                name: "manual-lf",
                stats: Some(args.stats.as_ref().unwrap().display().to_string()),
                manual_lf: Some(values.clone()),
            },
            Some(shape),
        )
    } else if let Some(stats) = &loaded {
        let (model, name) = match &stats.kind {
            SavedStatsKind::Pixel(pixel) => (
                LeakModel::PixelGaussian {
                    stats: pixel.clone(),
                },
                "pixel",
            ),
            SavedStatsKind::Hybrid(hybrid) => (
                LeakModel::Hybrid {
                    stats: hybrid.clone(),
                },
                "hybrid",
            ),
        };
        let shape = stats.shape();
        (
            model,
            ModelDescriptor {
                name,
                stats: Some(args.stats.as_ref().unwrap().display().to_string()),
                manual_lf: None,
            },
            Some(shape),
        )
    } else {
        return Err(CliError::usage("choose one of --white, --stats, or --manual-lf"));
    };

    let shape = match (&args.shape, stats_shape) {
        (Some(flag), stated) => {
            if flag.len() != 3 || flag.contains(&0) {
                return Err(CliError::usage("--shape must be three positive integers C,H,W"));
            }
            let shape = (flag[0], flag[1], flag[2]);
            if let Some(stated) = stated {
                if stated != shape {
                    return Err(CliError::usage(format!(
                        "--shape {shape:?} disagrees with stats shape {stated:?}"
                    )));
                }
            }
            shape
        }
        (None, Some(stated)) => stated,
        (None, None) => return Err(CliError::usage("--shape is required with --white")),
    };

    if args.count == 0 {
        return Err(CliError::usage("--count must be at least 1"));
    }
    fs::create_dir_all(&args.out)?;

    let base = RngStream::new(args.seed);
    let mut files = Vec::with_capacity(args.count);
    for i in 0..args.count {
        let mut stream = base.substream(i as u64);
        let latent = sample_initial_latent(&schedule, &model, shape, &mut stream)?;
        let name = format!("sample_{i:05}.slt");
        write_tensor(args.out.join(&name), &latent, dtype)?;
        files.push(name);
    }

    let manifest = Manifest {
        command: "sample-init",
        kind: schedule.kind(),
        t_max: args.schedule.t_max,
        t_eff: args.schedule.t_eff,
        model: descriptor,
        shape: [shape.0, shape.1, shape.2],
        count: args.count,
        seed: args.seed,
        dtype: args.dtype.clone(),
        files,
    };
    fs::write(
        args.out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    println!("wrote {} latents to {}", args.count, args.out.display());
    Ok(())
}
