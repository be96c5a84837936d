//! Python bindings: the main types and operations of `sigleak-core` as an
//! extension module. Tensors cross the boundary as flat row-major lists
//! plus a `(channels, height, width)` shape.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use sigleak_core::analysis;
use sigleak_core::sampler;
use sigleak_core::sim;
use sigleak_core::stats;
use sigleak_core::{
    Error as CoreError, GmmDistribution, LeakModel, NoiseSchedule, RngStream, ScheduleKind,
};

fn to_py_err(err: CoreError) -> PyErr {
    match err {
        CoreError::Io(_) | CoreError::Format(_) => PyIOError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

/// A diffusion noise schedule.
#[pyclass(name = "Schedule", from_py_object)]
#[derive(Clone)]
struct PySchedule {
    inner: NoiseSchedule,
}

#[pymethods]
impl PySchedule {
    #[staticmethod]
    #[pyo3(signature = (t_max, beta_start=1e-4, beta_end=0.02))]
    fn linear(t_max: usize, beta_start: f64, beta_end: f64) -> PyResult<Self> {
        NoiseSchedule::new(ScheduleKind::LinearBeta { beta_start, beta_end }, t_max)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (t_max, beta_start=0.00085, beta_end=0.012))]
    fn scaled_linear(t_max: usize, beta_start: f64, beta_end: f64) -> PyResult<Self> {
        NoiseSchedule::new(ScheduleKind::ScaledLinear { beta_start, beta_end }, t_max)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (t_max, s_offset=0.008, beta_clip=0.999))]
    fn squared_cosine(t_max: usize, s_offset: f64, beta_clip: f64) -> PyResult<Self> {
        NoiseSchedule::new(ScheduleKind::SquaredCosine { s_offset, beta_clip }, t_max)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (t_max, beta_start=1e-4, beta_end=0.02, logit_span=6.0))]
    fn sigmoid(t_max: usize, beta_start: f64, beta_end: f64, logit_span: f64) -> PyResult<Self> {
        NoiseSchedule::new(
            ScheduleKind::SigmoidBeta {
                beta_start,
                beta_end,
                logit_span,
            },
            t_max,
        )
        .map(|inner| Self { inner })
        .map_err(to_py_err)
    }

    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        NoiseSchedule::from_json(json)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    fn t_max(&self) -> usize {
        self.inner.t_max()
    }

    fn betas(&self) -> Vec<f64> {
        self.inner.betas().to_vec()
    }

    fn alpha_bars(&self) -> Vec<f64> {
        self.inner.alpha_bars().to_vec()
    }

    fn global_snr(&self) -> f64 {
        self.inner.global_snr()
    }

    fn marginal_coeffs(&self, t: usize) -> PyResult<(f64, f64)> {
        self.inner.marginal_coeffs(t).map_err(to_py_err)
    }

    fn truncate(&self, t_eff: usize) -> PyResult<Self> {
        self.inner
            .truncate(t_eff)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!("Schedule(T={}, snr={:.6e})", self.inner.t_max(), self.inner.global_snr())
    }
}

/// A C×H×W tensor of f64 values.
#[pyclass(name = "Tensor", from_py_object)]
#[derive(Clone)]
struct PyTensor {
    inner: sigleak_core::Tensor,
}

#[pymethods]
impl PyTensor {
    #[new]
    fn new(shape: (usize, usize, usize), data: Vec<f64>) -> PyResult<Self> {
        sigleak_core::Tensor::new(shape.0, shape.1, shape.2, data)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn zeros(shape: (usize, usize, usize)) -> Self {
        Self {
            inner: sigleak_core::Tensor::zeros(shape.0, shape.1, shape.2),
        }
    }

    #[staticmethod]
    fn constant(shape: (usize, usize, usize), value: f64) -> Self {
        Self {
            inner: sigleak_core::Tensor::constant(shape.0, shape.1, shape.2, value),
        }
    }

    #[getter]
    fn shape(&self) -> (usize, usize, usize) {
        self.inner.shape()
    }

    fn data(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    fn get(&self, c: usize, h: usize, w: usize) -> f64 {
        self.inner.get(c, h, w)
    }

    fn dct2(&self) -> Self {
        Self {
            inner: self.inner.dct2(),
        }
    }

    fn idct2(&self) -> Self {
        Self {
            inner: self.inner.idct2(),
        }
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn std(&self) -> f64 {
        self.inner.population_std()
    }

    fn __repr__(&self) -> String {
        let (c, h, w) = self.inner.shape();
        format!("Tensor(shape=({c}, {h}, {w}))")
    }
}

/// Deterministic random stream; identical seeds give identical variates.
#[pyclass(name = "Rng")]
struct PyRng {
    inner: RngStream,
}

#[pymethods]
impl PyRng {
    #[new]
    #[pyo3(signature = (seed, stream=0))]
    fn new(seed: u64, stream: u64) -> Self {
        Self {
            inner: RngStream::with_stream(seed, stream),
        }
    }

    fn substream(&self, child: u64) -> Self {
        Self {
            inner: self.inner.substream(child),
        }
    }

    fn normal(&mut self) -> f64 {
        self.inner.next_normal()
    }

    fn uniform(&mut self) -> f64 {
        self.inner.next_uniform()
    }

    fn normal_tensor(&mut self, shape: (usize, usize, usize)) -> PyTensor {
        PyTensor {
            inner: self.inner.normal_tensor(shape.0, shape.1, shape.2),
        }
    }
}

/// Per-element mean and std of a tensor set.
#[pyclass(name = "PixelStats", from_py_object)]
#[derive(Clone)]
struct PyPixelStats {
    inner: stats::PixelStats,
}

#[pymethods]
impl PyPixelStats {
    fn mu(&self) -> PyTensor {
        PyTensor {
            inner: self.inner.mu.clone(),
        }
    }

    fn sigma(&self) -> PyTensor {
        PyTensor {
            inner: self.inner.sigma.clone(),
        }
    }
}

/// Low-frequency Gaussian plus high-frequency pixel stats.
#[pyclass(name = "HybridStats", from_py_object)]
#[derive(Clone)]
struct PyHybridStats {
    inner: stats::HybridStats,
}

#[pymethods]
impl PyHybridStats {
    fn n_lowest(&self) -> usize {
        self.inner.lf.mask.n_lowest()
    }

    fn mu_lf(&self) -> Vec<f64> {
        self.inner.lf.mu_lf.clone()
    }

    fn cov_lf(&self) -> Vec<f64> {
        self.inner.lf.cov_lf.clone()
    }

    fn hf(&self) -> PyPixelStats {
        PyPixelStats {
            inner: self.inner.hf.clone(),
        }
    }
}

#[pyfunction]
fn estimate_pixel_stats(tensors: Vec<PyTensor>) -> PyResult<PyPixelStats> {
    let dataset: Vec<_> = tensors.into_iter().map(|t| t.inner).collect();
    stats::estimate_pixel_stats(&dataset)
        .map(|inner| PyPixelStats { inner })
        .map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (tensors, n_lowest=3, ridge=1e-4))]
fn estimate_hybrid_stats(
    tensors: Vec<PyTensor>,
    n_lowest: usize,
    ridge: f64,
) -> PyResult<PyHybridStats> {
    let dataset: Vec<_> = tensors.into_iter().map(|t| t.inner).collect();
    stats::estimate_hybrid_stats(&dataset, n_lowest, ridge)
        .map(|inner| PyHybridStats { inner })
        .map_err(to_py_err)
}

/// Signal-leak model for initial-latent sampling.
#[pyclass(name = "LeakModel", from_py_object)]
#[derive(Clone)]
struct PyLeakModel {
    inner: LeakModel,
}

#[pymethods]
impl PyLeakModel {
    #[staticmethod]
    fn white() -> Self {
        Self {
            inner: LeakModel::WhiteNoise,
        }
    }

    #[staticmethod]
    fn pixel(stats: PyPixelStats) -> Self {
        Self {
            inner: LeakModel::PixelGaussian { stats: stats.inner },
        }
    }

    #[staticmethod]
    fn hybrid(stats: PyHybridStats) -> Self {
        Self {
            inner: LeakModel::Hybrid { stats: stats.inner },
        }
    }

    /// Manual per-channel DC control; `hf` supplies the high-frequency model.
    #[staticmethod]
    fn manual_dc(channel_means: Vec<f64>, hf: PyPixelStats) -> PyResult<Self> {
        LeakModel::manual_dc(&channel_means, hf.inner)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }
}

#[pyfunction]
fn sample_leak(
    model: PyLeakModel,
    shape: (usize, usize, usize),
    rng: &mut PyRng,
) -> PyResult<PyTensor> {
    sampler::sample_leak(&model.inner, shape, &mut rng.inner)
        .map(|inner| PyTensor { inner })
        .map_err(to_py_err)
}

#[pyfunction]
fn sample_initial_latent(
    schedule: &PySchedule,
    model: PyLeakModel,
    shape: (usize, usize, usize),
    rng: &mut PyRng,
) -> PyResult<PyTensor> {
    sampler::sample_initial_latent(&schedule.inner, &model.inner, shape, &mut rng.inner)
        .map(|inner| PyTensor { inner })
        .map_err(to_py_err)
}

#[pyfunction]
fn sample_training_latent(
    schedule: &PySchedule,
    x0: &PyTensor,
    t: usize,
    rng: &mut PyRng,
) -> PyResult<PyTensor> {
    sampler::sample_training_latent(&schedule.inner, &x0.inner, t, &mut rng.inner)
        .map(|inner| PyTensor { inner })
        .map_err(to_py_err)
}

/// Known Gaussian-mixture data distribution for the simulator.
#[pyclass(name = "Gmm", from_py_object)]
#[derive(Clone)]
struct PyGmm {
    inner: GmmDistribution,
}

#[pymethods]
impl PyGmm {
    /// Scalar mixture from (weight, mean, var) triples.
    #[staticmethod]
    fn scalar(components: Vec<(f64, f64, f64)>) -> PyResult<Self> {
        GmmDistribution::scalar(&components)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        sigleak_core::io::gmm_from_json(json)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    fn sample(&self, rng: &mut PyRng) -> PyTensor {
        PyTensor {
            inner: self.inner.sample(&mut rng.inner),
        }
    }

    #[getter]
    fn shape(&self) -> (usize, usize, usize) {
        self.inner.shape()
    }
}

#[pyfunction]
fn gmm_posterior_x0(
    q: &PyGmm,
    x_t: &PyTensor,
    alpha_bar: f64,
) -> PyResult<(PyTensor, Vec<f64>)> {
    sim::gmm_posterior_x0(&q.inner, &x_t.inner, alpha_bar)
        .map(|(x0, resp)| (PyTensor { inner: x0 }, resp))
        .map_err(to_py_err)
}

#[pyfunction]
fn generate(
    schedule: &PySchedule,
    q: &PyGmm,
    model: PyLeakModel,
    n_samples: usize,
    rng: &PyRng,
) -> PyResult<Vec<PyTensor>> {
    sim::generate(&schedule.inner, &q.inner, &model.inner, n_samples, &rng.inner)
        .map(|samples| samples.into_iter().map(|inner| PyTensor { inner }).collect())
        .map_err(to_py_err)
}

/// Runs the bias experiment and returns the report as a JSON string.
/// `inits` maps mode names to a LeakModel or None for the oracle mode.
#[pyfunction]
fn run_bias_experiment(
    schedule: &PySchedule,
    q: &PyGmm,
    inits: Vec<(String, Option<PyLeakModel>)>,
    n_samples: usize,
    rng: &PyRng,
) -> PyResult<String> {
    let inits: Vec<(String, sim::InitMode)> = inits
        .into_iter()
        .map(|(name, model)| {
            let mode = match model {
                Some(m) => sim::InitMode::Leak(m.inner),
                None => sim::InitMode::Oracle,
            };
            (name, mode)
        })
        .collect();
    sim::run_bias_experiment(&schedule.inner, &q.inner, &inits, n_samples, &rng.inner)
        .map(|report| report.to_json())
        .map_err(to_py_err)
}

#[pyfunction]
fn lowfreq_recovery(
    x_t: &PyTensor,
    schedule: &PySchedule,
    t: usize,
    n_lowest: usize,
) -> PyResult<PyTensor> {
    analysis::lowfreq_recovery(&x_t.inner, &schedule.inner, t, n_lowest)
        .map(|inner| PyTensor { inner })
        .map_err(to_py_err)
}

/// Returns (mean_of_means, std_of_means, mean_contrast).
#[pyfunction]
fn brightness_summary(samples: Vec<PyTensor>) -> PyResult<(f64, f64, f64)> {
    let tensors: Vec<_> = samples.into_iter().map(|t| t.inner).collect();
    analysis::brightness_summary(&tensors)
        .map(|s| (s.mean_of_means, s.std_of_means, s.mean_contrast))
        .map_err(to_py_err)
}

#[pyfunction]
fn wasserstein1(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    analysis::wasserstein1(&a, &b).map_err(to_py_err)
}

#[pymodule]
fn sigleak(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySchedule>()?;
    m.add_class::<PyTensor>()?;
    m.add_class::<PyRng>()?;
    m.add_class::<PyPixelStats>()?;
    m.add_class::<PyHybridStats>()?;
    m.add_class::<PyLeakModel>()?;
    m.add_class::<PyGmm>()?;
    m.add_function(wrap_pyfunction!(estimate_pixel_stats, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_hybrid_stats, m)?)?;
    m.add_function(wrap_pyfunction!(sample_leak, m)?)?;
    m.add_function(wrap_pyfunction!(sample_initial_latent, m)?)?;
    m.add_function(wrap_pyfunction!(sample_training_latent, m)?)?;
    m.add_function(wrap_pyfunction!(gmm_posterior_x0, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(run_bias_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(lowfreq_recovery, m)?)?;
    m.add_function(wrap_pyfunction!(brightness_summary, m)?)?;
    m.add_function(wrap_pyfunction!(wasserstein1, m)?)?;
    Ok(())
}
