use serde::Serialize;

use crate::error::CliError;
use crate::schedule_args::ScheduleArgs;

#[derive(clap::Args, Debug)]
pub struct Args {
    #[command(flatten)]
    pub schedule: ScheduleArgs,

    /// Also print the marginal coefficients at this timestep
    #[arg(long)]
    pub t: Option<usize>,
}

#[derive(Serialize)]
struct Info {
    #[serde(rename = "T")]
    t_max: usize,
    kind: String,
    #[serde(rename = "sqrt_alpha_bar_T")]
    sqrt_alpha_bar_last: f64,
    #[serde(rename = "sqrt_one_minus_alpha_bar_T")]
    sqrt_one_minus_alpha_bar_last: f64,
    snr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sqrt_alpha_bar_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sqrt_one_minus_alpha_bar_t: Option<f64>,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let schedule = args.schedule.build()?;
    let (sq_ab, sq_1mab) = schedule
        .marginal_coeffs(schedule.t_max())
        .map_err(|e| CliError::usage(e.to_string()))?;

    let mut info = Info {
        t_max: schedule.t_max(),
        kind: args.schedule.kind.clone(),
        sqrt_alpha_bar_last: sq_ab,
        sqrt_one_minus_alpha_bar_last: sq_1mab,
        snr: schedule.global_snr(),
        t: None,
        sqrt_alpha_bar_t: None,
        sqrt_one_minus_alpha_bar_t: None,
    };
    if let Some(t) = args.t {
        let (a, b) = schedule
            .marginal_coeffs(t)
            .map_err(|e| CliError::usage(e.to_string()))?;
        info.t = Some(t);
        info.sqrt_alpha_bar_t = Some(a);
        info.sqrt_one_minus_alpha_bar_t = Some(b);
    }
    println!("{}", serde_json::to_string_pretty(&info).expect("info serializes"));
    Ok(())
}
