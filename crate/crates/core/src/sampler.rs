//! Leak models and latent sampling.
//!
//! The initial latent mirrors the training-time noising: a scaled leak draw
//! plus scaled white noise, `√ᾱ_T·x̃ + √(1−ᾱ_T)·ε`. Variate order is fixed
//! (leak variates first, then ε, each row-major), so outputs are a pure
//! function of `(seed, stream)`.

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::RngStream;
use crate::schedule::NoiseSchedule;
use crate::stats::{HybridStats, PixelStats};
use crate::tensor::{FreqMask, Tensor};

/// The approximate signal-leak distribution to draw x̃ from.
#[derive(Debug, Clone)]
pub enum LeakModel {
    /// x̃ ~ N(0, I): reproduces the conventional noise-only initialization.
    WhiteNoise,
    /// Diagonal pixel-domain Gaussian, x̃ = μ + σ ⊙ ε.
    PixelGaussian { stats: PixelStats },
    /// Full-covariance Gaussian on the masked low frequencies plus a
    /// pixel-domain Gaussian on the high-frequency residual.
    Hybrid { stats: HybridStats },
    /// Like `Hybrid`, but the low-frequency coefficients are fixed by the
    /// caller instead of sampled.
    ManualLf {
        /// Raw orthonormal-DCT coefficients, one per (channel, mask coord),
        /// channel-major.
        coeffs: Vec<f64>,
        mask: FreqMask,
        hf: PixelStats,
    },
}

impl LeakModel {
    /// Manual control of the per-channel DC coefficient. A `channel_means`
    /// entry of `m` shifts that channel's spatial mean of the leak by
    /// exactly `m`: the stored DC coefficient is `m·√(H·W)`.
    pub fn manual_dc(channel_means: &[f64], hf: PixelStats) -> Result<LeakModel> {
        let (c, h, w) = hf.shape();
        if channel_means.len() != c {
            return Err(Error::ShapeMismatch(format!(
                "{} manual values for {c} channels",
                channel_means.len()
            )));
        }
        let scale = ((h * w) as f64).sqrt();
        Ok(LeakModel::ManualLf {
            coeffs: channel_means.iter().map(|&m| m * scale).collect(),
            mask: FreqMask::lowest(1, h, w)?,
            hf,
        })
    }

    fn check_shape(&self, shape: (usize, usize, usize)) -> Result<()> {
        let stated = match self {
            LeakModel::WhiteNoise => return Ok(()),
            LeakModel::PixelGaussian { stats } => stats.shape(),
            LeakModel::Hybrid { stats } => stats.shape(),
            LeakModel::ManualLf { coeffs, mask, hf } => {
                if coeffs.len() != hf.shape().0 * mask.n_lowest() {
                    return Err(Error::ShapeMismatch(format!(
                        "{} manual coefficients for C·N = {}",
                        coeffs.len(),
                        hf.shape().0 * mask.n_lowest()
                    )));
                }
                if !(mask.height() == hf.shape().1 && mask.width() == hf.shape().2) {
                    return Err(Error::ShapeMismatch(
                        "manual mask dimensions disagree with HF stats".into(),
                    ));
                }
                hf.shape()
            }
        };
        if stated != shape {
            return Err(Error::ShapeMismatch(format!(
                "leak model is shaped {stated:?}, requested {shape:?}"
            )));
        }
        Ok(())
    }
}

/// Draws x̃ ~ q̃₀ under the given model.
pub fn sample_leak(
    model: &LeakModel,
    shape: (usize, usize, usize),
    rng: &mut RngStream,
) -> Result<Tensor> {
    model.check_shape(shape)?;
    let (c, h, w) = shape;
    match model {
        LeakModel::WhiteNoise => Ok(rng.normal_tensor(c, h, w)),
        LeakModel::PixelGaussian { stats } => {
            let eps = rng.normal_tensor(c, h, w);
            let scaled = stats.sigma.zip_map(&eps, |s, e| s * e)?;
            stats.mu.add(&scaled)
        }
        LeakModel::Hybrid { stats } => {
            let lf = sample_lf_coeffs(stats, rng)?;
            assemble_lf_plus_hf(&lf, &stats.lf.mask, &stats.hf, rng)
        }
        LeakModel::ManualLf { coeffs, mask, hf } => assemble_lf_plus_hf(coeffs, mask, hf, rng),
    }
}

/// X̃_LF ~ N(μ_LF, Σ_LF) via Cholesky. `cov_lf` already carries the
/// estimation ridge; if factorization still fails, the ridge is escalated
/// tenfold up to three times before giving up.
fn sample_lf_coeffs(stats: &HybridStats, rng: &mut RngStream) -> Result<Vec<f64>> {
    let d = stats.lf.dim();
    let mut extra = stats.lf.ridge.max(1e-12);
    let mut matrix = stats.lf.cov_lf.clone();
    let mut lower = linalg::cholesky(&matrix, d);
    for _ in 0..3 {
        if lower.is_some() {
            break;
        }
        extra *= 10.0;
        matrix = stats.lf.cov_lf.clone();
        for i in 0..d {
            matrix[i * d + i] += extra;
        }
        lower = linalg::cholesky(&matrix, d);
    }
    let lower = lower.ok_or(Error::CholeskyFailure { ridge: extra })?;

    let mut z = vec![0.0; d];
    rng.fill_normal(&mut z);
    let correlated = linalg::lower_tri_matvec(&lower, d, &z);
    Ok(stats
        .lf
        .mu_lf
        .iter()
        .zip(correlated)
        .map(|(&m, x)| m + x)
        .collect())
}

/// IDCT of the placed low-frequency coefficients plus a pixel-domain draw of
/// the high-frequency part.
fn assemble_lf_plus_hf(
    lf_coeffs: &[f64],
    mask: &FreqMask,
    hf: &PixelStats,
    rng: &mut RngStream,
) -> Result<Tensor> {
    let (c, h, w) = hf.shape();
    let mut plane = Tensor::zeros(c, h, w);
    let n = mask.n_lowest();
    for ch in 0..c {
        for (j, &(u, v)) in mask.coords().iter().enumerate() {
            plane.set(ch, u, v, lf_coeffs[ch * n + j]);
        }
    }
    let low = plane.idct2();
    let eps = rng.normal_tensor(c, h, w);
    let high = hf.mu.add(&hf.sigma.zip_map(&eps, |s, e| s * e)?)?;
    low.add(&high)
}

/// Initial latent x̂_T = √ᾱ_T·x̃ + √(1−ᾱ_T)·ε with x̃ from the leak model and
/// fresh white noise ε, matching the training-time marginal at the final
/// timestep.
pub fn sample_initial_latent(
    schedule: &NoiseSchedule,
    model: &LeakModel,
    shape: (usize, usize, usize),
    rng: &mut RngStream,
) -> Result<Tensor> {
    let leak = sample_leak(model, shape, rng)?;
    let (sq_ab, sq_1mab) = schedule.marginal_coeffs(schedule.t_max())?;
    let eps = rng.normal_tensor(shape.0, shape.1, shape.2);
    leak.scale(sq_ab).add(&eps.scale(sq_1mab))
}

/// Training-style latent x_t = √ᾱ_t·x₀ + √(1−ᾱ_t)·ε for a 1-indexed t.
pub fn sample_training_latent(
    schedule: &NoiseSchedule,
    x0: &Tensor,
    t: usize,
    rng: &mut RngStream,
) -> Result<Tensor> {
    let (sq_ab, sq_1mab) = schedule.marginal_coeffs(t)?;
    let (c, h, w) = x0.shape();
    let eps = rng.normal_tensor(c, h, w);
    x0.scale(sq_ab).add(&eps.scale(sq_1mab))
}
