//! Schedule flags shared by several subcommands.

use clap::Args;
use sigleak_core::{NoiseSchedule, ScheduleKind};

use crate::error::CliError;

#[derive(Args, Debug, Clone)]
pub struct ScheduleArgs {
    /// Schedule kind: linear | scaled-linear | squared-cosine | sigmoid
    #[arg(long, default_value = "scaled-linear")]
    pub kind: String,

    /// Number of diffusion timesteps T
    #[arg(long, default_value_t = 1000)]
    pub t_max: usize,

    /// First beta (defaults: linear/sigmoid 1e-4, scaled-linear 0.00085)
    #[arg(long)]
    pub beta_start: Option<f64>,

    /// Last beta (defaults: linear/sigmoid 0.02, scaled-linear 0.012)
    #[arg(long)]
    pub beta_end: Option<f64>,

    /// Squared-cosine offset s (default 0.008)
    #[arg(long)]
    pub s_offset: Option<f64>,

    /// Squared-cosine beta cap (default 0.999)
    #[arg(long)]
    pub beta_clip: Option<f64>,

    /// Sigmoid grid half-width in logit space (default 6)
    #[arg(long)]
    pub logit_span: Option<f64>,

    /// Truncate to the first T_eff steps after construction
    #[arg(long)]
    pub t_eff: Option<usize>,
}

impl ScheduleArgs {
    pub fn resolve_kind(&self) -> Result<ScheduleKind, CliError> {
        let kind = match self.kind.as_str() {
            "linear" => ScheduleKind::LinearBeta {
                beta_start: self.beta_start.unwrap_or(1e-4),
                beta_end: self.beta_end.unwrap_or(0.02),
            },
            "scaled-linear" => ScheduleKind::ScaledLinear {
                beta_start: self.beta_start.unwrap_or(0.00085),
                beta_end: self.beta_end.unwrap_or(0.012),
            },
            "squared-cosine" => ScheduleKind::SquaredCosine {
                s_offset: self.s_offset.unwrap_or(0.008),
                beta_clip: self.beta_clip.unwrap_or(0.999),
            },
            "sigmoid" => ScheduleKind::SigmoidBeta {
                beta_start: self.beta_start.unwrap_or(1e-4),
                beta_end: self.beta_end.unwrap_or(0.02),
                logit_span: self.logit_span.unwrap_or(6.0),
            },
            other => {
                return Err(CliError::usage(format!(
                    "unknown schedule kind `{other}` (expected linear, scaled-linear, squared-cosine, or sigmoid)"
                )))
            }
        };
        Ok(kind)
    }

    pub fn build(&self) -> Result<NoiseSchedule, CliError> {
        let schedule = NoiseSchedule::new(self.resolve_kind()?, self.t_max)
            .map_err(|e| CliError::usage(e.to_string()))?;
        match self.t_eff {
            Some(t_eff) => schedule
                .truncate(t_eff)
                .map_err(|e| CliError::usage(e.to_string())),
            None => Ok(schedule),
        }
    }
}
