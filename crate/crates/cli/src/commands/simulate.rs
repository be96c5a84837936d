use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use sigleak_core::io::{read_gmm_spec, read_stats, SavedStatsKind};
use sigleak_core::sim::run_bias_experiment_full;
use sigleak_core::{BiasReport, InitMode, LeakModel, RngStream, ScheduleKind};

use crate::error::CliError;
use crate::schedule_args::ScheduleArgs;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Mixture spec JSON: {"shape": [C,H,W], "components": [{weight, mean, var}, ...]}
    #[arg(long)]
    pub gmm: PathBuf,

    #[command(flatten)]
    pub schedule: ScheduleArgs,

    /// Init mode, repeatable: white | oracle | stats:PATH
    /// (an oracle mode is appended automatically if absent)
    #[arg(long = "init", required = true)]
    pub inits: Vec<String>,

    /// Samples generated per init mode
    #[arg(long, default_value_t = 1000)]
    pub n_samples: usize,

    /// RNG seed for the whole experiment
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Bias report (JSON, includes run parameters)
    #[arg(long)]
    pub out_json: PathBuf,

    /// Optional per-sample CSV (mode, sample, spatial mean/std)
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct ReportFile {
    command: &'static str,
    gmm: String,
    kind: ScheduleKind,
    t_max: usize,
    t_eff: Option<usize>,
    inits: Vec<String>,
    n_samples: usize,
    seed: u64,
    report: BiasReport,
}

fn parse_init(text: &str) -> Result<(String, InitMode), CliError> {
    if text == "white" {
        return Ok(("white".into(), InitMode::Leak(LeakModel::WhiteNoise)));
    }
    if text == "oracle" {
        return Ok(("oracle".into(), InitMode::Oracle));
    }
    if let Some(path) = text.strip_prefix("stats:") {
        let stats = read_stats(path)?;
        let (model, name) = match stats.kind {
            SavedStatsKind::Pixel(pixel) => (LeakModel::PixelGaussian { stats: pixel }, "pixel"),
            SavedStatsKind::Hybrid(hybrid) => (LeakModel::Hybrid { stats: hybrid }, "hybrid"),
        };
        return Ok((format!("{name}:{path}"), InitMode::Leak(model)));
    }
    Err(CliError::usage(format!(
        "unknown init `{text}` (expected white, oracle, or stats:PATH)"
    )))
}

pub fn run(args: Args) -> Result<(), CliError> {
    let q = read_gmm_spec(&args.gmm).map_err(|e| match e {
        sigleak_core::Error::Io(io) => CliError::Io(io.to_string()),
        other => CliError::usage(other.to_string()),
    })?;
    let schedule = args.schedule.build()?;
    let inits = args
        .inits
        .iter()
        .map(|text| parse_init(text))
        .collect::<Result<Vec<_>, _>>()?;

    let output = run_bias_experiment_full(&schedule, &q, &inits, args.n_samples, &RngStream::new(args.seed))?;

    let file = ReportFile {
        command: "simulate",
        gmm: args.gmm.display().to_string(),
        kind: schedule.kind(),
        t_max: args.schedule.t_max,
        t_eff: args.schedule.t_eff,
        inits: args.inits.clone(),
        n_samples: args.n_samples,
        seed: args.seed,
        report: output.report.clone(),
    };
    fs::write(
        &args.out_json,
        serde_json::to_string_pretty(&file).expect("report serializes"),
    )?;

    if let Some(csv_path) = &args.out_csv {
        let mut csv = String::from("mode,sample,spatial_mean,spatial_std\n");
        for (mode, samples) in output
            .samples
            .iter()
            .map(|(m, s)| (m.as_str(), s))
            .chain(std::iter::once(("reference", &output.reference)))
        {
            for (i, tensor) in samples.iter().enumerate() {
                csv.push_str(&format!(
                    "{mode},{i},{},{}\n",
                    tensor.mean(),
                    tensor.population_std()
                ));
            }
        }
        fs::write(csv_path, csv)?;
    }

    for mode in &output.report.modes {
        println!("{}: W1 = {}", mode.mode, mode.wasserstein1);
    }
    Ok(())
}
