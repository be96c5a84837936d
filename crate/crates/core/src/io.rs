//! File formats: the `.slt` binary array format, PPM/PGM ingestion, stats
//! files, and GMM specs.
//!
//! `.slt` layout (little-endian): magic `SLT1`, one dtype byte (0 = f32,
//! 1 = f64), one ndim byte, `ndim` u32 dims, then the row-major payload.
//! Round trips are bit-exact for both dtypes.

use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{GmmComponent, GmmDistribution};
use crate::stats::{HybridStats, LfStats, PixelStats};
use crate::tensor::{FreqMask, Tensor};

pub const SLT_MAGIC: &[u8; 4] = b"SLT1";

/// Payload precision of an `.slt` array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    fn code(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::F64),
            other => Err(Error::Format(format!("unknown dtype code {other}"))),
        }
    }

    fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

/// A decoded `.slt` array; payloads widen to f64 in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SltArray {
    pub dims: Vec<u32>,
    pub data: Vec<f64>,
    pub dtype: Dtype,
}

pub fn encode_slt(dims: &[u32], data: &[f64], dtype: Dtype) -> Result<Vec<u8>> {
    if dims.is_empty() || dims.len() > u8::MAX as usize {
        return Err(Error::Format(format!("unsupported ndim {}", dims.len())));
    }
    let count: usize = dims.iter().map(|&d| d as usize).product();
    if count != data.len() {
        return Err(Error::ShapeMismatch(format!(
            "dims {dims:?} imply {count} values, got {}",
            data.len()
        )));
    }
    let mut out = Vec::with_capacity(6 + 4 * dims.len() + data.len() * dtype.size());
    out.extend_from_slice(SLT_MAGIC);
    out.push(dtype.code());
    out.push(dims.len() as u8);
    for &d in dims {
        out.extend_from_slice(&d.to_le_bytes());
    }
    match dtype {
        Dtype::F32 => {
            for &v in data {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        Dtype::F64 => {
            for &v in data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

pub fn decode_slt(bytes: &[u8]) -> Result<SltArray> {
    if bytes.len() < 6 {
        return Err(Error::Format("slt data shorter than header".into()));
    }
    if &bytes[..4] != SLT_MAGIC {
        return Err(Error::Format("bad magic, expected SLT1".into()));
    }
    let dtype = Dtype::from_code(bytes[4])?;
    let ndim = bytes[5] as usize;
    if ndim == 0 {
        return Err(Error::Format("ndim must be positive".into()));
    }
    let header_len = 6 + 4 * ndim;
    if bytes.len() < header_len {
        return Err(Error::Format("slt data truncated in dims".into()));
    }
    let dims: Vec<u32> = (0..ndim)
        .map(|i| {
            let off = 6 + 4 * i;
            u32::from_le_bytes([bytes[off], bytes[off + 1], bytes[off + 2], bytes[off + 3]])
        })
        .collect();
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
        .ok_or_else(|| Error::Format("dimension product overflows".into()))?;
    let expected = count
        .checked_mul(dtype.size())
        .and_then(|payload| payload.checked_add(header_len))
        .ok_or_else(|| Error::Format("dimension product overflows".into()))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "payload length {} does not match header ({expected} expected)",
            bytes.len()
        )));
    }
    let payload = &bytes[header_len..];
    let data: Vec<f64> = match dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes([c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]]))
            .collect(),
    };
    Ok(SltArray { dims, data, dtype })
}

pub fn write_tensor(path: impl AsRef<Path>, tensor: &Tensor, dtype: Dtype) -> Result<()> {
    let (c, h, w) = tensor.shape();
    let bytes = encode_slt(&[c as u32, h as u32, w as u32], tensor.data(), dtype)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let bytes = fs::read(&path)?;
    let arr = decode_slt(&bytes)?;
    if arr.dims.len() != 3 {
        return Err(Error::Format(format!(
            "expected a 3-dimensional tensor, got {} dims",
            arr.dims.len()
        )));
    }
    Tensor::new(
        arr.dims[0] as usize,
        arr.dims[1] as usize,
        arr.dims[2] as usize,
        arr.data,
    )
}

/// Loads a binary P5 (PGM) or P6 (PPM) image with maxval 255, mapping each
/// byte to `v / 127.5 - 1` so pixel values land in [-1, 1].
pub fn read_pnm(path: impl AsRef<Path>) -> Result<Tensor> {
    let bytes = fs::read(&path)?;
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(Error::Format("not a binary PGM (P5) or PPM (P6) file".into())),
    };

    // Header tokens: width, height, maxval; '#' starts a comment.
    let mut pos = 2;
    let mut fields = Vec::with_capacity(3);
    while fields.len() < 3 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("malformed PNM header".into()));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("digits are utf8");
        fields.push(
            text.parse::<usize>()
                .map_err(|_| Error::Format("PNM header field overflow".into()))?,
        );
    }
    let (width, height, maxval) = (fields[0], fields[1], fields[2]);
    if maxval != 255 {
        return Err(Error::Format(format!("only maxval 255 is supported, got {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::Format("PNM dimensions must be positive".into()));
    }
    // Exactly one whitespace byte separates header and payload.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Format("missing separator before PNM payload".into()));
    }
    pos += 1;
    let expected = width * height * channels;
    let payload = bytes
        .get(pos..pos + expected)
        .ok_or_else(|| Error::Format("PNM payload truncated".into()))?;

    // Interleaved RGB becomes channel-major planes.
    let mut data = vec![0.0; expected];
    for (i, &byte) in payload.iter().enumerate() {
        let pixel = i / channels;
        let channel = i % channels;
        data[channel * width * height + pixel] = byte as f64 / 127.5 - 1.0;
    }
    Tensor::new(channels, height, width, data)
}

/// Estimated leak statistics plus provenance, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedStats {
    pub n_images: usize,
    pub kind: SavedStatsKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SavedStatsKind {
    Pixel(PixelStats),
    Hybrid(HybridStats),
}

impl SavedStats {
    pub fn shape(&self) -> (usize, usize, usize) {
        match &self.kind {
            SavedStatsKind::Pixel(p) => p.shape(),
            SavedStatsKind::Hybrid(h) => h.shape(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StatsFileJson {
    format: String,
    version: u32,
    mode: String,
    n_images: usize,
    shape: [usize; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pixel: Option<PixelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hybrid: Option<HybridSection>,
}

#[derive(Serialize, Deserialize)]
struct PixelSection {
    mu: String,
    sigma: String,
}

#[derive(Serialize, Deserialize)]
struct HybridSection {
    n_lowest: usize,
    ridge: f64,
    mu_lf: String,
    cov_lf: String,
    hf_mu: String,
    hf_sigma: String,
}

fn tensor_to_b64(tensor: &Tensor) -> Result<String> {
    let (c, h, w) = tensor.shape();
    Ok(BASE64.encode(encode_slt(
        &[c as u32, h as u32, w as u32],
        tensor.data(),
        Dtype::F64,
    )?))
}

fn vec_to_b64(dims: &[u32], data: &[f64]) -> Result<String> {
    Ok(BASE64.encode(encode_slt(dims, data, Dtype::F64)?))
}

fn tensor_from_b64(text: &str) -> Result<Tensor> {
    let bytes = BASE64
        .decode(text)
        .map_err(|e| Error::Format(format!("base64: {e}")))?;
    let arr = decode_slt(&bytes)?;
    if arr.dims.len() != 3 {
        return Err(Error::Format("embedded tensor must be 3-dimensional".into()));
    }
    Tensor::new(
        arr.dims[0] as usize,
        arr.dims[1] as usize,
        arr.dims[2] as usize,
        arr.data,
    )
}

fn array_from_b64(text: &str, ndim: usize) -> Result<SltArray> {
    let bytes = BASE64
        .decode(text)
        .map_err(|e| Error::Format(format!("base64: {e}")))?;
    let arr = decode_slt(&bytes)?;
    if arr.dims.len() != ndim {
        return Err(Error::Format(format!(
            "embedded array must have {ndim} dims, got {}",
            arr.dims.len()
        )));
    }
    Ok(arr)
}

pub fn stats_to_json(stats: &SavedStats) -> Result<String> {
    let (c, h, w) = stats.shape();
    let file = match &stats.kind {
        SavedStatsKind::Pixel(pixel) => StatsFileJson {
            format: "sigleak-stats".into(),
            version: 1,
            mode: "pixel".into(),
            n_images: stats.n_images,
            shape: [c, h, w],
            pixel: Some(PixelSection {
                mu: tensor_to_b64(&pixel.mu)?,
                sigma: tensor_to_b64(&pixel.sigma)?,
            }),
            hybrid: None,
        },
        SavedStatsKind::Hybrid(hybrid) => {
            let d = hybrid.lf.dim() as u32;
            StatsFileJson {
                format: "sigleak-stats".into(),
                version: 1,
                mode: "hybrid".into(),
                n_images: stats.n_images,
                shape: [c, h, w],
                pixel: None,
                hybrid: Some(HybridSection {
                    n_lowest: hybrid.lf.mask.n_lowest(),
                    ridge: hybrid.lf.ridge,
                    mu_lf: vec_to_b64(&[d], &hybrid.lf.mu_lf)?,
                    cov_lf: vec_to_b64(&[d, d], &hybrid.lf.cov_lf)?,
                    hf_mu: tensor_to_b64(&hybrid.hf.mu)?,
                    hf_sigma: tensor_to_b64(&hybrid.hf.sigma)?,
                }),
            }
        }
    };
    Ok(serde_json::to_string_pretty(&file).expect("stats serialization cannot fail"))
}

/// Parses and re-validates stats: shapes must agree with the header and the
/// hybrid covariance must still factorize under its ridge.
pub fn stats_from_json(json: &str) -> Result<SavedStats> {
    let file: StatsFileJson =
        serde_json::from_str(json).map_err(|e| Error::Format(format!("stats JSON: {e}")))?;
    if file.format != "sigleak-stats" {
        return Err(Error::Format(format!("unexpected format tag `{}`", file.format)));
    }
    let [c, h, w] = file.shape;
    let kind = match (file.mode.as_str(), file.pixel, file.hybrid) {
        ("pixel", Some(section), _) => {
            let stats = PixelStats::new(tensor_from_b64(&section.mu)?, tensor_from_b64(&section.sigma)?)?;
            if stats.shape() != (c, h, w) {
                return Err(Error::Format("pixel stats shape disagrees with header".into()));
            }
            SavedStatsKind::Pixel(stats)
        }
        ("hybrid", _, Some(section)) => {
            let mask = FreqMask::lowest(section.n_lowest, h, w)?;
            let mu_lf = array_from_b64(&section.mu_lf, 1)?;
            let cov_lf = array_from_b64(&section.cov_lf, 2)?;
            let d = c * section.n_lowest;
            if mu_lf.data.len() != d || cov_lf.dims != vec![d as u32, d as u32] {
                return Err(Error::Format("hybrid stats dimensions disagree with header".into()));
            }
            let lf = LfStats {
                mask,
                mu_lf: mu_lf.data,
                cov_lf: cov_lf.data,
                ridge: section.ridge,
            };
            lf.validate()?;
            let hf = PixelStats::new(tensor_from_b64(&section.hf_mu)?, tensor_from_b64(&section.hf_sigma)?)?;
            if hf.shape() != (c, h, w) {
                return Err(Error::Format("hybrid HF shape disagrees with header".into()));
            }
            SavedStatsKind::Hybrid(HybridStats { lf, hf })
        }
        (mode, _, _) => {
            return Err(Error::Format(format!("mode `{mode}` missing its stats section")))
        }
    };
    Ok(SavedStats {
        n_images: file.n_images,
        kind,
    })
}

pub fn write_stats(path: impl AsRef<Path>, stats: &SavedStats) -> Result<()> {
    fs::write(path, stats_to_json(stats)?)?;
    Ok(())
}

pub fn read_stats(path: impl AsRef<Path>) -> Result<SavedStats> {
    stats_from_json(&fs::read_to_string(path)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrVec {
    Num(f64),
    Vec(Vec<f64>),
}

impl NumOrVec {
    fn into_tensor(self, c: usize, h: usize, w: usize, field: &'static str) -> Result<Tensor> {
        match self {
            NumOrVec::Num(v) => Ok(Tensor::constant(c, h, w, v)),
            NumOrVec::Vec(data) => {
                if data.len() != c * h * w {
                    return Err(Error::invalid(
                        field,
                        format!("expected {} values, got {}", c * h * w, data.len()),
                    ));
                }
                Tensor::new(c, h, w, data)
            }
        }
    }
}

#[derive(Deserialize)]
struct GmmSpecJson {
    shape: [usize; 3],
    components: Vec<GmmComponentJson>,
}

#[derive(Deserialize)]
struct GmmComponentJson {
    weight: f64,
    mean: NumOrVec,
    var: NumOrVec,
}

/// Parses a mixture spec: `{"shape": [C,H,W], "components": [{"weight": w,
/// "mean": scalar-or-array, "var": scalar-or-array}, ...]}`. Scalars
/// broadcast over the shape.
pub fn gmm_from_json(json: &str) -> Result<GmmDistribution> {
    let spec: GmmSpecJson =
        serde_json::from_str(json).map_err(|e| Error::Format(format!("gmm spec JSON: {e}")))?;
    let [c, h, w] = spec.shape;
    let components = spec
        .components
        .into_iter()
        .map(|comp| {
            Ok(GmmComponent {
                weight: comp.weight,
                mean: comp.mean.into_tensor(c, h, w, "mean")?,
                var: comp.var.into_tensor(c, h, w, "var")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    GmmDistribution::new(components)
}

pub fn read_gmm_spec(path: impl AsRef<Path>) -> Result<GmmDistribution> {
    gmm_from_json(&fs::read_to_string(path)?)
}
