//! Estimating the approximate signal-leak distribution from target tensors.
//!
//! Three models: a diagonal Gaussian in the pixel domain, a hybrid model
//! (full-covariance Gaussian over the N lowest DCT frequencies plus a
//! pixel-domain Gaussian over the high-frequency residual), and per-frequency
//! second moments for the frequency-resolved SNR.
//!
//! Conventions: population (divide-by-n) statistics throughout, and
//! accumulation runs sequentially in input order with compensated summation,
//! so results are bit-reproducible.

use crate::error::{Error, Result};
use crate::linalg;
use crate::schedule::NoiseSchedule;
use crate::tensor::{FreqMask, Tensor};

/// Kahan compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// Per-element mean and population standard deviation of a tensor set.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelStats {
    pub mu: Tensor,
    pub sigma: Tensor,
}

impl PixelStats {
    pub fn new(mu: Tensor, sigma: Tensor) -> Result<Self> {
        mu.check_same_shape(&sigma)?;
        if sigma.data().iter().any(|&v| v < 0.0) {
            return Err(Error::invalid("sigma", "must be elementwise non-negative"));
        }
        Ok(Self { mu, sigma })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.mu.shape()
    }
}

/// Gaussian over the masked low-frequency DCT coefficients, gathered as a
/// C·N vector (channel-major, mask order within each channel). `cov_lf`
/// already carries the ridge on its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LfStats {
    pub mask: FreqMask,
    pub mu_lf: Vec<f64>,
    /// Row-major (C·N)×(C·N) covariance, ridge included.
    pub cov_lf: Vec<f64>,
    pub ridge: f64,
}

impl LfStats {
    pub fn dim(&self) -> usize {
        self.mu_lf.len()
    }

    /// Checks symmetry and that the (ridged) covariance factorizes.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.cov_lf.len() != d * d {
            return Err(Error::ShapeMismatch(format!(
                "cov_lf has {} entries for dimension {d}",
                self.cov_lf.len()
            )));
        }
        for i in 0..d {
            for j in 0..i {
                if (self.cov_lf[i * d + j] - self.cov_lf[j * d + i]).abs() > 1e-12 {
                    return Err(Error::invalid("cov_lf", "matrix is not symmetric"));
                }
            }
        }
        let mut ridged = self.cov_lf.clone();
        for i in 0..d {
            ridged[i * d + i] += self.ridge;
        }
        linalg::cholesky(&ridged, d)
            .map(|_| ())
            .ok_or(Error::CholeskyFailure { ridge: self.ridge })
    }
}

/// Low-frequency Gaussian plus pixel-domain stats of the residual.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridStats {
    pub lf: LfStats,
    pub hf: PixelStats,
}

impl HybridStats {
    pub fn shape(&self) -> (usize, usize, usize) {
        self.hf.shape()
    }
}

/// Per-frequency second moments E[(X₀^{u,v})²] of a tensor set's DCT.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqEnergy {
    pub second_moment: Tensor,
}

fn check_dataset(dataset: &[Tensor]) -> Result<(usize, usize, usize)> {
    let first = dataset.first().ok_or(Error::EmptyDataset)?;
    let shape = first.shape();
    for t in dataset {
        if t.shape() != shape {
            return Err(Error::ShapeMismatch(format!(
                "dataset mixes shapes {:?} and {shape:?}",
                t.shape()
            )));
        }
    }
    Ok(shape)
}

/// Two-pass elementwise mean and population std of the dataset.
pub fn estimate_pixel_stats(dataset: &[Tensor]) -> Result<PixelStats> {
    let (c, h, w) = check_dataset(dataset)?;
    let len = c * h * w;
    let n = dataset.len() as f64;

    let mut mean_acc = vec![KahanSum::default(); len];
    for t in dataset {
        for (acc, &v) in mean_acc.iter_mut().zip(t.data()) {
            acc.add(v);
        }
    }
    let mu: Vec<f64> = mean_acc.iter().map(|acc| acc.value() / n).collect();

    let mut var_acc = vec![KahanSum::default(); len];
    for t in dataset {
        for ((acc, &v), &m) in var_acc.iter_mut().zip(t.data()).zip(&mu) {
            acc.add((v - m) * (v - m));
        }
    }
    let sigma: Vec<f64> = var_acc.iter().map(|acc| (acc.value() / n).sqrt()).collect();

    Ok(PixelStats {
        mu: Tensor::new(c, h, w, mu)?,
        sigma: Tensor::new(c, h, w, sigma)?,
    })
}

/// Gathers the masked DCT coefficients of one tensor as a C·N vector.
pub(crate) fn gather_lf_vector(coeffs: &Tensor, mask: &FreqMask) -> Vec<f64> {
    let mut v = Vec::with_capacity(coeffs.channels() * mask.n_lowest());
    for c in 0..coeffs.channels() {
        for &(u, q) in mask.coords() {
            v.push(coeffs.get(c, u, q));
        }
    }
    v
}

/// Estimates the hybrid model: full joint covariance over the C·N masked
/// coefficients (ridge added to the diagonal) and pixel stats of the
/// inverse-transformed high-frequency residual.
pub fn estimate_hybrid_stats(dataset: &[Tensor], n_lowest: usize, ridge: f64) -> Result<HybridStats> {
    let (c, h, w) = check_dataset(dataset)?;
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::invalid("ridge", "must be finite and non-negative"));
    }
    let mask = FreqMask::lowest(n_lowest, h, w)?;
    let dim = c * n_lowest;
    let n = dataset.len() as f64;

    let mut lf_vectors = Vec::with_capacity(dataset.len());
    let mut residuals = Vec::with_capacity(dataset.len());
    for t in dataset {
        let coeffs = t.dct2();
        let (_, high) = mask.split(&coeffs)?;
        lf_vectors.push(gather_lf_vector(&coeffs, &mask));
        residuals.push(high.idct2());
    }

    let mut mean_acc = vec![KahanSum::default(); dim];
    for v in &lf_vectors {
        for (acc, &x) in mean_acc.iter_mut().zip(v) {
            acc.add(x);
        }
    }
    let mu_lf: Vec<f64> = mean_acc.iter().map(|acc| acc.value() / n).collect();

    let mut cov_acc = vec![KahanSum::default(); dim * dim];
    for v in &lf_vectors {
        for i in 0..dim {
            let di = v[i] - mu_lf[i];
            for j in 0..=i {
                cov_acc[i * dim + j].add(di * (v[j] - mu_lf[j]));
            }
        }
    }
    let mut cov_lf = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let value = cov_acc[i * dim + j].value() / n;
            cov_lf[i * dim + j] = value;
            cov_lf[j * dim + i] = value;
        }
        cov_lf[i * dim + i] += ridge;
    }

    Ok(HybridStats {
        lf: LfStats {
            mask,
            mu_lf,
            cov_lf,
            ridge,
        },
        hf: estimate_pixel_stats(&residuals)?,
    })
}

/// Elementwise mean of squared DCT coefficients across the dataset.
pub fn estimate_freq_energy(dataset: &[Tensor]) -> Result<FreqEnergy> {
    let (c, h, w) = check_dataset(dataset)?;
    let len = c * h * w;
    let n = dataset.len() as f64;
    let mut acc = vec![KahanSum::default(); len];
    for t in dataset {
        let coeffs = t.dct2();
        for (a, &v) in acc.iter_mut().zip(coeffs.data()) {
            a.add(v * v);
        }
    }
    let data: Vec<f64> = acc.iter().map(|a| a.value() / n).collect();
    Ok(FreqEnergy {
        second_moment: Tensor::new(c, h, w, data)?,
    })
}

/// Frequency-resolved SNR: the global ᾱ_T/(1−ᾱ_T) weighted by the data's
/// per-frequency energy. White noise is flat across frequencies, so only the
/// data term varies with (u, v).
pub fn snr_per_frequency(schedule: &NoiseSchedule, energy: &FreqEnergy) -> Tensor {
    energy.second_moment.scale(schedule.global_snr())
}
