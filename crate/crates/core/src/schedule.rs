//! Diffusion noise schedules: β_t, α_t = 1−β_t, and ᾱ_t = ∏ α_s.
//!
//! Timesteps are 1-indexed in the API (`t ∈ [1, T]`) and 0-indexed in the
//! stored arrays. All arithmetic is in f64; the cumulative product is an
//! iterative product, which stays below 1e-12 relative error for T ≤ 10⁴.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How β ranges over the diffusion process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// β linear from `beta_start` to `beta_end`.
    #[serde(rename = "linear")]
    LinearBeta { beta_start: f64, beta_end: f64 },
    /// √β linear from `√beta_start` to `√beta_end`, then squared. This is
    /// the schedule used by latent diffusion models.
    ScaledLinear { beta_start: f64, beta_end: f64 },
    /// ᾱ(t) = cos²(((t/T + s)/(1 + s))·π/2), normalized at t = 0, with each
    /// β_t = 1 − ᾱ(t)/ᾱ(t−1) capped at `beta_clip`.
    SquaredCosine { s_offset: f64, beta_clip: f64 },
    /// β follows a logistic ramp: a uniform grid over
    /// [−logit_span, +logit_span] through the sigmoid, scaled to
    /// [beta_start, beta_end].
    #[serde(rename = "sigmoid")]
    SigmoidBeta {
        beta_start: f64,
        beta_end: f64,
        logit_span: f64,
    },
}

impl ScheduleKind {
    /// Conventional DDPM endpoints.
    pub fn linear_default() -> Self {
        ScheduleKind::LinearBeta {
            beta_start: 1e-4,
            beta_end: 0.02,
        }
    }

    /// LDM endpoints; these reproduce the published final-step marginal
    /// coefficients 0.068265 / 0.997667 at T = 1000.
    pub fn scaled_linear_default() -> Self {
        ScheduleKind::ScaledLinear {
            beta_start: 0.00085,
            beta_end: 0.012,
        }
    }

    pub fn squared_cosine_default() -> Self {
        ScheduleKind::SquaredCosine {
            s_offset: 0.008,
            beta_clip: 0.999,
        }
    }

    pub fn sigmoid_default() -> Self {
        ScheduleKind::SigmoidBeta {
            beta_start: 1e-4,
            beta_end: 0.02,
            logit_span: 6.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let check_beta = |field: &'static str, v: f64| -> Result<()> {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid(field, format!("must be in (0, 1), got {v}")));
            }
            Ok(())
        };
        match *self {
            ScheduleKind::LinearBeta {
                beta_start,
                beta_end,
            }
            | ScheduleKind::ScaledLinear {
                beta_start,
                beta_end,
            } => {
                check_beta("beta_start", beta_start)?;
                check_beta("beta_end", beta_end)?;
                if beta_start > beta_end {
                    return Err(Error::invalid(
                        "beta_start",
                        format!("must not exceed beta_end ({beta_start} > {beta_end})"),
                    ));
                }
            }
            ScheduleKind::SquaredCosine {
                s_offset,
                beta_clip,
            } => {
                if !(s_offset.is_finite() && s_offset >= 0.0) {
                    return Err(Error::invalid("s_offset", "must be finite and non-negative"));
                }
                check_beta("beta_clip", beta_clip)?;
            }
            ScheduleKind::SigmoidBeta {
                beta_start,
                beta_end,
                logit_span,
            } => {
                check_beta("beta_start", beta_start)?;
                check_beta("beta_end", beta_end)?;
                if beta_start > beta_end {
                    return Err(Error::invalid(
                        "beta_start",
                        format!("must not exceed beta_end ({beta_start} > {beta_end})"),
                    ));
                }
                if !(logit_span.is_finite() && logit_span > 0.0) {
                    return Err(Error::invalid("logit_span", "must be finite and positive"));
                }
            }
        }
        Ok(())
    }

    fn betas(&self, t_max: usize) -> Vec<f64> {
        match *self {
            ScheduleKind::LinearBeta {
                beta_start,
                beta_end,
            } => linspace(beta_start, beta_end, t_max),
            ScheduleKind::ScaledLinear {
                beta_start,
                beta_end,
            } => linspace(beta_start.sqrt(), beta_end.sqrt(), t_max)
                .into_iter()
                .map(|s| s * s)
                .collect(),
            ScheduleKind::SquaredCosine {
                s_offset,
                beta_clip,
            } => {
                let f = |t: f64| {
                    let angle = (t / t_max as f64 + s_offset) / (1.0 + s_offset)
                        * std::f64::consts::FRAC_PI_2;
                    angle.cos().powi(2)
                };
                // The f(0) normalization cancels in the ratio of consecutive
                // alpha-bars.
                (1..=t_max)
                    .map(|t| (1.0 - f(t as f64) / f((t - 1) as f64)).min(beta_clip))
                    .collect()
            }
            ScheduleKind::SigmoidBeta {
                beta_start,
                beta_end,
                logit_span,
            } => linspace(-logit_span, logit_span, t_max)
                .into_iter()
                .map(|x| beta_start + (beta_end - beta_start) / (1.0 + (-x).exp()))
                .collect(),
        }
    }
}

fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    (0..n)
        .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
        .collect()
}

/// A fully materialized noise schedule over `T = t_max()` timesteps.
/// Immutable after construction; safe for concurrent reads.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    kind: ScheduleKind,
    betas: Vec<f64>,
    alphas: Vec<f64>,
    alpha_bars: Vec<f64>,
}

impl NoiseSchedule {
    pub fn new(kind: ScheduleKind, t_max: usize) -> Result<Self> {
        kind.validate()?;
        if t_max == 0 {
            return Err(Error::invalid("t_max", "must be at least 1"));
        }
        let betas = kind.betas(t_max);
        Self::from_betas(kind, betas)
    }

    fn from_betas(kind: ScheduleKind, betas: Vec<f64>) -> Result<Self> {
        if betas.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return Err(Error::invalid("betas", "every beta must lie in (0, 1)"));
        }
        let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
        let mut alpha_bars = Vec::with_capacity(alphas.len());
        let mut product = 1.0;
        for &alpha in &alphas {
            product *= alpha;
            alpha_bars.push(product);
        }
        if alpha_bars[alpha_bars.len() - 1] <= 0.0 {
            return Err(Error::invalid("t_max", "final alpha-bar underflowed to zero"));
        }
        Ok(Self {
            kind,
            betas,
            alphas,
            alpha_bars,
        })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn t_max(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bars
    }

    pub fn final_alpha_bar(&self) -> f64 {
        self.alpha_bars[self.alpha_bars.len() - 1]
    }

    fn check_t(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.t_max() {
            return Err(Error::TimestepOutOfRange {
                t,
                t_max: self.t_max(),
            });
        }
        Ok(())
    }

    /// ᾱ_t for a 1-indexed timestep, with the convention ᾱ_0 = 1.
    pub fn alpha_bar_at(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alpha_bars[t - 1]
        }
    }

    /// Global leak strength ᾱ_T / (1 − ᾱ_T).
    pub fn global_snr(&self) -> f64 {
        let ab = self.final_alpha_bar();
        ab / (1.0 - ab)
    }

    /// Cuts the schedule to its first `t_eff` steps; the retained prefix of
    /// ᾱ is unchanged. Models whose samplers start below the nominal last
    /// timestep behave as if trained with this shorter horizon.
    pub fn truncate(&self, t_eff: usize) -> Result<NoiseSchedule> {
        self.check_t(t_eff)?;
        Ok(NoiseSchedule {
            kind: self.kind,
            betas: self.betas[..t_eff].to_vec(),
            alphas: self.alphas[..t_eff].to_vec(),
            alpha_bars: self.alpha_bars[..t_eff].to_vec(),
        })
    }

    /// `(√ᾱ_t, √(1 − ᾱ_t))`, the signal and noise coefficients of the
    /// forward marginal at timestep `t`.
    pub fn marginal_coeffs(&self, t: usize) -> Result<(f64, f64)> {
        self.check_t(t)?;
        let ab = self.alpha_bars[t - 1];
        Ok((ab.sqrt(), (1.0 - ab).sqrt()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScheduleFile {
            kind: self.kind,
            t_max: self.t_max(),
            betas: self.betas.clone(),
        })
        .expect("schedule serialization cannot fail")
    }

    /// Loads a schedule; α and ᾱ are recomputed from the stored betas and
    /// re-validated rather than trusted from the file.
    pub fn from_json(json: &str) -> Result<Self> {
        let file: ScheduleFile =
            serde_json::from_str(json).map_err(|e| Error::Format(format!("schedule JSON: {e}")))?;
        if file.t_max != file.betas.len() {
            return Err(Error::Format(format!(
                "schedule JSON: T = {} but {} betas",
                file.t_max,
                file.betas.len()
            )));
        }
        file.kind.validate()?;
        Self::from_betas(file.kind, file.betas)
    }
}

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    #[serde(flatten)]
    kind: ScheduleKind,
    #[serde(rename = "T")]
    t_max: usize,
    betas: Vec<f64>,
}
