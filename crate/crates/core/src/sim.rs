//! Desk-scale ancestral diffusion simulator.
//!
//! The denoiser is not a network: with a known Gaussian-mixture data
//! distribution the posterior mean E[x₀|x_t] is available in closed form, so
//! the simulator isolates what the *initialization* distribution does to the
//! generated samples. The bias experiment generates under several init modes
//! and scores each against fresh data draws with a marginal Wasserstein-1
//! distance.

use serde::{Deserialize, Serialize};

use crate::analysis::wasserstein1;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sampler::{sample_initial_latent, sample_training_latent, LeakModel};
use crate::schedule::NoiseSchedule;
use crate::tensor::Tensor;

/// One mixture component with diagonal (per-element) covariance.
#[derive(Debug, Clone)]
pub struct GmmComponent {
    pub weight: f64,
    pub mean: Tensor,
    pub var: Tensor,
}

/// Known synthetic data distribution q(x₀) powering the analytic denoiser.
#[derive(Debug, Clone)]
pub struct GmmDistribution {
    components: Vec<GmmComponent>,
}

impl GmmDistribution {
    /// Weights must sum to 1 within 1e-12; variances are elementwise
    /// non-negative (zero is allowed and yields a point mass).
    pub fn new(components: Vec<GmmComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("components", "need at least one"));
        }
        let shape = components[0].mean.shape();
        let mut weight_sum = 0.0;
        for comp in &components {
            if !(comp.weight > 0.0 && comp.weight <= 1.0) {
                return Err(Error::invalid("weight", format!("{} not in (0, 1]", comp.weight)));
            }
            if comp.mean.shape() != shape || comp.var.shape() != shape {
                return Err(Error::ShapeMismatch("mixture components disagree on shape".into()));
            }
            if comp.var.data().iter().any(|&v| v < 0.0) {
                return Err(Error::invalid("var", "must be elementwise non-negative"));
            }
            weight_sum += comp.weight;
        }
        if (weight_sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "weights",
                format!("must sum to 1, got {weight_sum}"),
            ));
        }
        Ok(Self { components })
    }

    /// Scalar mixture from `(weight, mean, var)` triples.
    pub fn scalar(components: &[(f64, f64, f64)]) -> Result<Self> {
        Self::new(
            components
                .iter()
                .map(|&(w, m, v)| GmmComponent {
                    weight: w,
                    mean: Tensor::constant(1, 1, 1, m),
                    var: Tensor::constant(1, 1, 1, v),
                })
                .collect(),
        )
    }

    pub fn components(&self) -> &[GmmComponent] {
        &self.components
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.components[0].mean.shape()
    }

    /// Fresh draw: one uniform picks the component, then row-major normals.
    pub fn sample(&self, rng: &mut RngStream) -> Tensor {
        let u = rng.next_uniform();
        let mut cumulative = 0.0;
        let mut chosen = &self.components[self.components.len() - 1];
        for comp in &self.components {
            cumulative += comp.weight;
            if u <= cumulative {
                chosen = comp;
                break;
            }
        }
        let (c, h, w) = self.shape();
        let z = rng.normal_tensor(c, h, w);
        Tensor::from_raw(
            c,
            h,
            w,
            chosen
                .mean
                .data()
                .iter()
                .zip(chosen.var.data())
                .zip(z.data())
                .map(|((&m, &v), &e)| m + v.sqrt() * e)
                .collect(),
        )
    }
}

/// Denoiser output parameterizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionType {
    Epsilon,
    Sample,
    Velocity,
}

/// Exact posterior mean E[x₀|x_t] under the mixture, with the per-component
/// responsibilities. Densities are evaluated elementwise-diagonally in
/// log-space and combined with log-sum-exp.
pub fn gmm_posterior_x0(
    q: &GmmDistribution,
    x_t: &Tensor,
    alpha_bar: f64,
) -> Result<(Tensor, Vec<f64>)> {
    if !(alpha_bar > 0.0 && alpha_bar <= 1.0) {
        return Err(Error::invalid("alpha_bar", format!("{alpha_bar} not in (0, 1]")));
    }
    if x_t.shape() != q.shape() {
        return Err(Error::ShapeMismatch(format!(
            "x_t {:?} vs mixture {:?}",
            x_t.shape(),
            q.shape()
        )));
    }
    let sqrt_ab = alpha_bar.sqrt();

    let mut log_terms = Vec::with_capacity(q.components.len());
    for comp in &q.components {
        let mut ll = comp.weight.ln();
        for ((&x, &m), &v) in x_t.data().iter().zip(comp.mean.data()).zip(comp.var.data()) {
            let var_t = alpha_bar * v + (1.0 - alpha_bar);
            let d = x - sqrt_ab * m;
            ll += -0.5 * (2.0 * std::f64::consts::PI * var_t).ln() - 0.5 * d * d / var_t;
        }
        log_terms.push(ll);
    }
    let max_ll = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let norm: f64 = log_terms.iter().map(|&l| (l - max_ll).exp()).sum();
    let responsibilities: Vec<f64> = log_terms
        .iter()
        .map(|&l| {
            let r = (l - max_ll).exp() / norm;
            if r < 1e-300 {
                0.0
            } else {
                r
            }
        })
        .collect();

    let mut x0_hat = vec![0.0; x_t.len()];
    for (comp, &r) in q.components.iter().zip(&responsibilities) {
        if r == 0.0 {
            continue;
        }
        for (i, ((&x, &m), &v)) in x_t
            .data()
            .iter()
            .zip(comp.mean.data())
            .zip(comp.var.data())
            .enumerate()
        {
            let var_t = alpha_bar * v + (1.0 - alpha_bar);
            let gain = sqrt_ab * v / var_t;
            x0_hat[i] += r * (m + gain * (x - sqrt_ab * m));
        }
    }
    let (c, h, w) = x_t.shape();
    Ok((Tensor::from_raw(c, h, w, x0_hat), responsibilities))
}

/// Converts between the epsilon / sample / velocity parameterizations; the
/// returned pair always reconstructs `x_t = √ᾱ·x0_hat + √(1−ᾱ)·eps_hat`.
pub fn convert_prediction(
    pred: &Tensor,
    kind: PredictionType,
    x_t: &Tensor,
    alpha_bar: f64,
) -> Result<(Tensor, Tensor)> {
    if !(alpha_bar > 0.0 && alpha_bar < 1.0) {
        return Err(Error::invalid("alpha_bar", format!("{alpha_bar} not in (0, 1)")));
    }
    pred.check_same_shape(x_t)?;
    let sq_ab = alpha_bar.sqrt();
    let sq_1mab = (1.0 - alpha_bar).sqrt();
    match kind {
        PredictionType::Sample => {
            let x0_hat = pred.clone();
            let eps_hat = x_t.zip_map(&x0_hat, |x, x0| (x - sq_ab * x0) / sq_1mab)?;
            Ok((x0_hat, eps_hat))
        }
        PredictionType::Epsilon => {
            let eps_hat = pred.clone();
            let x0_hat = x_t.zip_map(&eps_hat, |x, e| (x - sq_1mab * e) / sq_ab)?;
            Ok((x0_hat, eps_hat))
        }
        PredictionType::Velocity => {
            let x0_hat = x_t.zip_map(pred, |x, v| sq_ab * x - sq_1mab * v)?;
            let eps_hat = x_t.zip_map(pred, |x, v| sq_1mab * x + sq_ab * v)?;
            Ok((x0_hat, eps_hat))
        }
    }
}

/// One reverse step: a sample of q(x_{t−1} | x_t, x̂₀) with the convention
/// ᾱ₀ = 1. At t = 1 the posterior mean is returned without noise.
pub fn ancestral_step(
    x_t: &Tensor,
    t: usize,
    schedule: &NoiseSchedule,
    x0_hat: &Tensor,
    rng: &mut RngStream,
) -> Result<Tensor> {
    if t == 0 || t > schedule.t_max() {
        return Err(Error::TimestepOutOfRange {
            t,
            t_max: schedule.t_max(),
        });
    }
    x_t.check_same_shape(x0_hat)?;
    let beta = schedule.betas()[t - 1];
    let alpha = schedule.alphas()[t - 1];
    let ab_t = schedule.alpha_bars()[t - 1];
    let ab_prev = schedule.alpha_bar_at(t - 1);

    let coef_x0 = ab_prev.sqrt() * beta / (1.0 - ab_t);
    let coef_xt = alpha.sqrt() * (1.0 - ab_prev) / (1.0 - ab_t);
    let mean = x0_hat.scale(coef_x0).add(&x_t.scale(coef_xt))?;
    if t == 1 {
        return Ok(mean);
    }
    let var = (1.0 - ab_prev) / (1.0 - ab_t) * beta;
    let (c, h, w) = x_t.shape();
    let noise = rng.normal_tensor(c, h, w);
    mean.add(&noise.scale(var.sqrt()))
}

/// How the chain is initialized in the bias experiment.
#[derive(Debug, Clone)]
pub enum InitMode {
    /// Leak-injected initial latent, `√ᾱ_T·x̃ + √(1−ᾱ_T)·ε`.
    Leak(LeakModel),
    /// Gold standard: forward-noise a fresh data draw to timestep T.
    Oracle,
}

impl From<LeakModel> for InitMode {
    fn from(model: LeakModel) -> Self {
        InitMode::Leak(model)
    }
}

fn draw_initial(
    schedule: &NoiseSchedule,
    q: &GmmDistribution,
    init: &InitMode,
    rng: &mut RngStream,
) -> Result<Tensor> {
    match init {
        InitMode::Leak(model) => sample_initial_latent(schedule, model, q.shape(), rng),
        InitMode::Oracle => {
            let x0 = q.sample(rng);
            sample_training_latent(schedule, &x0, schedule.t_max(), rng)
        }
    }
}

/// Runs the full reverse chain for `n_samples` independent samples. Sample
/// `i` consumes the derived stream `rng.substream(i)`, so results are
/// independent of evaluation order.
pub fn generate_with_init(
    schedule: &NoiseSchedule,
    q: &GmmDistribution,
    init: &InitMode,
    n_samples: usize,
    rng: &RngStream,
) -> Result<Vec<Tensor>> {
    let mut out = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let mut stream = rng.substream(i as u64);
        let mut x = draw_initial(schedule, q, init, &mut stream)?;
        for t in (1..=schedule.t_max()).rev() {
            let (x0_hat, _) = gmm_posterior_x0(q, &x, schedule.alpha_bars()[t - 1])?;
            x = ancestral_step(&x, t, schedule, &x0_hat, &mut stream)?;
        }
        out.push(x);
    }
    Ok(out)
}

/// Convenience wrapper for leak-model initialization.
pub fn generate(
    schedule: &NoiseSchedule,
    q: &GmmDistribution,
    init: &LeakModel,
    n_samples: usize,
    rng: &RngStream,
) -> Result<Vec<Tensor>> {
    generate_with_init(schedule, q, &InitMode::Leak(init.clone()), n_samples, rng)
}

/// Per-init-mode outcome of the bias experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub mode: String,
    /// Marginal Wasserstein-1 against fresh data draws, averaged over
    /// elements.
    pub wasserstein1: f64,
    /// Per-element mean of the generated samples.
    pub sample_mean: Vec<f64>,
    /// Per-element population std of the generated samples.
    pub sample_std: Vec<f64>,
    pub n_samples: usize,
}

/// Quantifies how far each initialization drifts from the data distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub modes: Vec<ModeReport>,
}

impl BiasReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Format(format!("bias report JSON: {e}")))
    }

    /// One CSV row per mode; mean/std columns are flattened per element.
    pub fn to_csv(&self) -> String {
        let d = self.modes.first().map_or(0, |m| m.sample_mean.len());
        let mut out = String::from("mode,wasserstein1,n_samples");
        for i in 0..d {
            out.push_str(&format!(",mean_{i}"));
        }
        for i in 0..d {
            out.push_str(&format!(",std_{i}"));
        }
        out.push('\n');
        for mode in &self.modes {
            out.push_str(&format!(
                "{},{},{}",
                mode.mode, mode.wasserstein1, mode.n_samples
            ));
            for v in &mode.sample_mean {
                out.push_str(&format!(",{v}"));
            }
            for v in &mode.sample_std {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Bias experiment with the raw generated samples retained.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: BiasReport,
    /// Generated samples per mode, in report order.
    pub samples: Vec<(String, Vec<Tensor>)>,
    /// The fresh data draws every mode was scored against.
    pub reference: Vec<Tensor>,
}

/// Generates `n_samples` per init mode plus an oracle mode (appended when the
/// caller did not request one) and scores every mode against a shared set of
/// fresh data draws. Stream layout: reference draws use `rng.substream(0)`,
/// mode `m` uses `rng.substream(1 + m)` as its generation base.
pub fn run_bias_experiment(
    schedule: &NoiseSchedule,
    q: &GmmDistribution,
    inits: &[(String, InitMode)],
    n_samples: usize,
    rng: &RngStream,
) -> Result<BiasReport> {
    run_bias_experiment_full(schedule, q, inits, n_samples, rng).map(|out| out.report)
}

/// As [`run_bias_experiment`], also returning the per-mode samples and the
/// reference draws.
pub fn run_bias_experiment_full(
    schedule: &NoiseSchedule,
    q: &GmmDistribution,
    inits: &[(String, InitMode)],
    n_samples: usize,
    rng: &RngStream,
) -> Result<ExperimentOutput> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    let oracle = InitMode::Oracle;
    let mut modes: Vec<(&str, &InitMode)> = inits
        .iter()
        .map(|(name, mode)| (name.as_str(), mode))
        .collect();
    if !modes.iter().any(|(_, m)| matches!(m, InitMode::Oracle)) {
        modes.push(("oracle", &oracle));
    }

    let mut reference_rng = rng.substream(0);
    let reference: Vec<Tensor> = (0..n_samples).map(|_| q.sample(&mut reference_rng)).collect();
    let d = q.shape().0 * q.shape().1 * q.shape().2;
    let ref_marginals = marginals(&reference, d);

    let mut reports = Vec::with_capacity(modes.len());
    let mut all_samples = Vec::with_capacity(modes.len());
    for (m, (name, init)) in modes.iter().enumerate() {
        let base = rng.substream(1 + m as u64);
        let samples = generate_with_init(schedule, q, init, n_samples, &base)?;
        let gen_marginals = marginals(&samples, d);

        let mut w1_sum = 0.0;
        let mut sample_mean = Vec::with_capacity(d);
        let mut sample_std = Vec::with_capacity(d);
        for j in 0..d {
            w1_sum += wasserstein1(&gen_marginals[j], &ref_marginals[j])?;
            let n = n_samples as f64;
            let mean = gen_marginals[j].iter().sum::<f64>() / n;
            let var = gen_marginals[j]
                .iter()
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / n;
            sample_mean.push(mean);
            sample_std.push(var.sqrt());
        }
        reports.push(ModeReport {
            mode: name.to_string(),
            wasserstein1: w1_sum / d as f64,
            sample_mean,
            sample_std,
            n_samples,
        });
        all_samples.push((name.to_string(), samples));
    }
    Ok(ExperimentOutput {
        report: BiasReport { modes: reports },
        samples: all_samples,
        reference,
    })
}

fn marginals(samples: &[Tensor], d: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(samples.len()); d];
    for s in samples {
        for (j, &v) in s.data().iter().enumerate() {
            out[j].push(v);
        }
    }
    out
}
