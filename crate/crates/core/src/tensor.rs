//! C×H×W tensors, the orthonormal 2D DCT, and low-frequency masks.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A C×H×W grid of finite reals, stored row-major (channel, then row, then
/// column). This is the universal value carrier: clean images, noised
/// latents, DCT coefficient planes, and statistics all use it.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Tensor {
    /// Builds a tensor from row-major data, validating length and finiteness.
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::invalid("shape", "dimensions must be positive"));
        }
        let expected = channels * height * width;
        if data.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "data length {} does not match {channels}x{height}x{width} = {expected}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("data", "all values must be finite"));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    /// Internal constructor for values produced by arithmetic we already
    /// trust; skips the finiteness scan.
    pub(crate) fn from_raw(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), channels * height * width);
        Self {
            channels,
            height,
            width,
            data,
        }
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::from_raw(channels, height, width, vec![0.0; channels * height * width])
    }

    pub fn constant(channels: usize, height: usize, width: usize, value: f64) -> Self {
        Self::from_raw(channels, height, width, vec![value; channels * height * width])
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for h in 0..height {
                for w in 0..width {
                    data.push(f(c, h, w));
                }
            }
        }
        Self::from_raw(channels, height, width, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, c: usize, h: usize, w: usize) -> f64 {
        self.data[(c * self.height + h) * self.width + w]
    }

    pub fn set(&mut self, c: usize, h: usize, w: usize, value: f64) {
        self.data[(c * self.height + h) * self.width + w] = value;
    }

    /// Mean over every element.
    pub fn mean(&self) -> f64 {
        let mut acc = crate::stats::KahanSum::default();
        for &v in &self.data {
            acc.add(v);
        }
        acc.value() / self.data.len() as f64
    }

    /// Population standard deviation over every element.
    pub fn population_std(&self) -> f64 {
        let m = self.mean();
        let mut acc = crate::stats::KahanSum::default();
        for &v in &self.data {
            acc.add((v - m) * (v - m));
        }
        (acc.value() / self.data.len() as f64).sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor::from_raw(
            self.channels,
            self.height,
            self.width,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Elementwise combination of two same-shape tensors.
    pub fn zip_map(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        self.check_same_shape(other)?;
        Ok(Tensor::from_raw(
            self.channels,
            self.height,
            self.width,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn scale(&self, factor: f64) -> Tensor {
        self.map(|v| v * factor)
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, |a, b| a - b)
    }

    pub(crate) fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    /// Per-channel orthonormal 2D DCT-II. The transform is unitary, so
    /// Parseval holds and the DCT of white noise stays white.
    pub fn dct2(&self) -> Tensor {
        self.separable_transform(false)
    }

    /// Exact inverse of [`Tensor::dct2`] (the orthonormal DCT-III).
    pub fn idct2(&self) -> Tensor {
        self.separable_transform(true)
    }

    fn separable_transform(&self, inverse: bool) -> Tensor {
        let (c, h, w) = self.shape();
        let basis_h = dct_basis(h);
        let basis_w = if w == h { None } else { Some(dct_basis(w)) };
        let bw = basis_w.as_deref().unwrap_or(&basis_h);

        let mut out = vec![0.0; self.data.len()];
        let mut tmp = vec![0.0; h * w];
        for ch in 0..c {
            let plane = &self.data[ch * h * w..(ch + 1) * h * w];
            // columns: tmp[k][j] = sum_i B_h[k][i] * plane[i][j]
            for k in 0..h {
                for j in 0..w {
                    let mut acc = 0.0;
                    for i in 0..h {
                        let b = if inverse {
                            basis_h[i * h + k]
                        } else {
                            basis_h[k * h + i]
                        };
                        acc += b * plane[i * w + j];
                    }
                    tmp[k * w + j] = acc;
                }
            }
            // rows: out[k][l] = sum_j tmp[k][j] * B_w[l][j]
            let out_plane = &mut out[ch * h * w..(ch + 1) * h * w];
            for k in 0..h {
                for l in 0..w {
                    let mut acc = 0.0;
                    for j in 0..w {
                        let b = if inverse { bw[j * w + l] } else { bw[l * w + j] };
                        acc += b * tmp[k * w + j];
                    }
                    out_plane[k * w + l] = acc;
                }
            }
        }
        Tensor::from_raw(c, h, w, out)
    }
}

/// Row-major orthonormal DCT-II basis matrix: `B[k][i] = s_k cos(pi (2i+1) k / 2n)`
/// with `s_0 = sqrt(1/n)` and `s_k = sqrt(2/n)` otherwise.
fn dct_basis(n: usize) -> Vec<f64> {
    let mut basis = vec![0.0; n * n];
    let s0 = (1.0 / n as f64).sqrt();
    let sk = (2.0 / n as f64).sqrt();
    for k in 0..n {
        let scale = if k == 0 { s0 } else { sk };
        for i in 0..n {
            basis[k * n + i] = scale * (PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos();
        }
    }
    basis
}

/// The N lowest DCT frequencies of an H×W plane, in the canonical order:
/// ascending `u+v`, ties broken by ascending `max(u,v)`, then ascending `u`.
/// The same spatial mask applies to every channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreqMask {
    n_lowest: usize,
    coords: Vec<(usize, usize)>,
    height: usize,
    width: usize,
}

impl FreqMask {
    /// Mask of the `n_lowest` lowest frequencies of an `height`×`width` plane.
    pub fn lowest(n_lowest: usize, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("shape", "mask dimensions must be positive"));
        }
        if n_lowest == 0 || n_lowest > height * width {
            return Err(Error::invalid(
                "n_lowest",
                format!("must be in [1, {}], got {n_lowest}", height * width),
            ));
        }
        let mut all: Vec<(usize, usize)> = (0..height)
            .flat_map(|u| (0..width).map(move |v| (u, v)))
            .collect();
        all.sort_by_key(|&(u, v)| (u + v, u.max(v), u));
        all.truncate(n_lowest);
        Ok(Self {
            n_lowest,
            coords: all,
            height,
            width,
        })
    }

    pub fn n_lowest(&self) -> usize {
        self.n_lowest
    }

    pub fn coords(&self) -> &[(usize, usize)] {
        &self.coords
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn matches(&self, tensor: &Tensor) -> bool {
        tensor.height() == self.height && tensor.width() == self.width
    }

    /// Splits DCT coefficients into the masked low-frequency part and the
    /// complementary high-frequency part. The two parts sum back to the
    /// input bit-exactly.
    pub fn split(&self, coeffs: &Tensor) -> Result<(Tensor, Tensor)> {
        if !self.matches(coeffs) {
            return Err(Error::ShapeMismatch(format!(
                "mask is {}x{}, tensor is {:?}",
                self.height,
                self.width,
                coeffs.shape()
            )));
        }
        let mut low = Tensor::zeros(coeffs.channels(), self.height, self.width);
        let mut high = coeffs.clone();
        for c in 0..coeffs.channels() {
            for &(u, v) in &self.coords {
                low.set(c, u, v, coeffs.get(c, u, v));
                high.set(c, u, v, 0.0);
            }
        }
        Ok((low, high))
    }
}
