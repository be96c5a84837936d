//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its runtime (run with `--nocapture` to see them).
//!
//! Statistical criteria run under fixed seeds, so every run is reproducible.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use sigleak_core::analysis::brightness_summary;
use sigleak_core::sampler::sample_initial_latent;
use sigleak_core::sim::{generate, run_bias_experiment, GmmComponent, InitMode};
use sigleak_core::stats::{
    estimate_freq_energy, estimate_hybrid_stats, estimate_pixel_stats, snr_per_frequency,
    PixelStats,
};
use sigleak_core::{GmmDistribution, LeakModel, NoiseSchedule, RngStream, ScheduleKind, Tensor};

struct Criterion {
    name: &'static str,
    limit: Duration,
    start: Instant,
}

impl Criterion {
    fn new(name: &'static str, limit_secs: u64) -> Self {
        Self {
            name,
            limit: Duration::from_secs(limit_secs),
            start: Instant::now(),
        }
    }

    fn pass(self) {
        let elapsed = self.start.elapsed();
        assert!(
            elapsed < self.limit,
            "{} exceeded its runtime budget: {elapsed:?} > {:?}",
            self.name,
            self.limit
        );
        println!("acceptance {}: PASS ({elapsed:.2?})", self.name);
    }
}

/// 100-step schedule with a final alpha-bar of exactly 0.25; a constant beta
/// of 1 - 0.25^(1/100) accentuates the leak.
fn accentuated_schedule() -> NoiseSchedule {
    let beta = 1.0 - 0.25f64.powf(1.0 / 100.0);
    NoiseSchedule::new(
        ScheduleKind::LinearBeta {
            beta_start: beta,
            beta_end: beta,
        },
        100,
    )
    .unwrap()
}

fn bimodal_scalar() -> GmmDistribution {
    GmmDistribution::scalar(&[(0.5, 4.0, 0.25), (0.5, 8.0, 0.25)]).unwrap()
}

#[test]
fn criterion_1_schedule_anchor() {
    let c = Criterion::new("1 (schedule anchor)", 1);
    let schedule = NoiseSchedule::new(ScheduleKind::scaled_linear_default(), 1000).unwrap();
    let (sq_ab, sq_1mab) = schedule.marginal_coeffs(1000).unwrap();
    assert!((sq_ab - 0.068265).abs() <= 1e-4, "sqrt(alpha_bar_T) = {sq_ab}");
    assert!(
        (sq_1mab - 0.997667).abs() <= 1e-4,
        "sqrt(1 - alpha_bar_T) = {sq_1mab}"
    );
    c.pass();
}

#[test]
fn criterion_2_dct_correctness() {
    let c = Criterion::new("2 (DCT correctness)", 30);

    let mut rng = RngStream::new(2024);
    for _ in 0..100 {
        let x = rng.normal_tensor(4, 64, 64);
        let coeffs = x.dct2();
        let back = coeffs.idct2();
        let max_err = x
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_err <= 1e-9, "round-trip error {max_err}");
        let ex: f64 = x.data().iter().map(|v| v * v).sum();
        let ec: f64 = coeffs.data().iter().map(|v| v * v).sum();
        assert!(((ex - ec) / ex).abs() <= 1e-9, "Parseval: {ex} vs {ec}");
    }

    // Whiteness: per-coefficient variance of transformed noise in [0.9, 1.1].
    let n = 10_000;
    let mut sums = [0.0; 64];
    let mut sq = [0.0; 64];
    for _ in 0..n {
        let coeffs = rng.normal_tensor(1, 8, 8).dct2();
        for (i, &v) in coeffs.data().iter().enumerate() {
            sums[i] += v;
            sq[i] += v * v;
        }
    }
    for i in 0..64 {
        let mean = sums[i] / n as f64;
        let var = sq[i] / n as f64 - mean * mean;
        assert!((0.9..=1.1).contains(&var), "coefficient {i} variance {var}");
    }
    c.pass();
}

#[test]
fn criterion_3_sampler_moment_oracle() {
    let c = Criterion::new("3 (sampler moment oracle)", 60);
    let schedule = NoiseSchedule::new(ScheduleKind::scaled_linear_default(), 1000).unwrap();
    let ab = schedule.final_alpha_bar();
    let (cdim, h, w) = (1, 4, 4);
    let mu = Tensor::from_fn(cdim, h, w, |_, i, j| -1.0 + 0.3 * (i * w + j) as f64);
    let sigma = Tensor::from_fn(cdim, h, w, |_, i, j| 0.2 + 0.1 * (i * w + j) as f64);
    let stats = PixelStats::new(mu.clone(), sigma.clone()).unwrap();
    let model = LeakModel::PixelGaussian { stats };

    let n = 100_000;
    let d = cdim * h * w;
    let mut sums = vec![0.0; d];
    let mut sq = vec![0.0; d];
    let mut rng = RngStream::new(3);
    for _ in 0..n {
        let latent = sample_initial_latent(&schedule, &model, (cdim, h, w), &mut rng).unwrap();
        for (i, &v) in latent.data().iter().enumerate() {
            sums[i] += v;
            sq[i] += v * v;
        }
    }
    for i in 0..d {
        let want_mean = ab.sqrt() * mu.data()[i];
        let want_var = ab * sigma.data()[i] * sigma.data()[i] + (1.0 - ab);
        let mean = sums[i] / n as f64;
        let var = sq[i] / n as f64 - mean * mean;
        let mean_tol = 3.0 * (want_var / n as f64).sqrt();
        let var_tol = 3.0 * want_var * (2.0 / n as f64).sqrt();
        assert!(
            (mean - want_mean).abs() <= mean_tol,
            "cell {i}: mean {mean} vs {want_mean} (tol {mean_tol})"
        );
        assert!(
            (var - want_var).abs() <= var_tol,
            "cell {i}: var {var} vs {want_var} (tol {var_tol})"
        );
    }
    c.pass();
}

#[test]
fn criterion_4_bias_experiment() {
    let c = Criterion::new("4 (bias experiment separations)", 300);
    let schedule = accentuated_schedule();
    assert!((schedule.final_alpha_bar() - 0.25).abs() < 1e-12);
    let q = bimodal_scalar();

    let base = RngStream::new(15);
    let mut fit_rng = base.substream(1_000_000);
    let fit: Vec<Tensor> = (0..500).map(|_| q.sample(&mut fit_rng)).collect();
    let stats = estimate_pixel_stats(&fit).unwrap();

    let inits = vec![
        ("white".to_string(), InitMode::Leak(LeakModel::WhiteNoise)),
        (
            "pixel".to_string(),
            InitMode::Leak(LeakModel::PixelGaussian { stats }),
        ),
    ];
    let report = run_bias_experiment(&schedule, &q, &inits, 10_000, &base).unwrap();
    let w1 = |name: &str| {
        report
            .modes
            .iter()
            .find(|m| m.mode == name)
            .unwrap()
            .wasserstein1
    };
    let (white, pixel, oracle) = (w1("white"), w1("pixel"), w1("oracle"));
    assert!(
        white >= 2.0 * oracle,
        "white-noise init too close to oracle: {white} vs {oracle}"
    );
    assert!(
        pixel <= 1.5 * oracle,
        "estimated leak init too far from oracle: {pixel} vs {oracle}"
    );
    c.pass();
}

#[test]
fn criterion_5_matched_distribution_null_case() {
    let c = Criterion::new("5 (matched-distribution null case)", 120);
    let schedule = accentuated_schedule();
    let q = GmmDistribution::scalar(&[(1.0, 0.0, 1.0)]).unwrap();

    let base = RngStream::new(6);
    let mut fit_rng = base.substream(1_000_000);
    let fit: Vec<Tensor> = (0..500).map(|_| q.sample(&mut fit_rng)).collect();
    let stats = estimate_pixel_stats(&fit).unwrap();

    let inits = vec![
        ("white".to_string(), InitMode::Leak(LeakModel::WhiteNoise)),
        (
            "pixel".to_string(),
            InitMode::Leak(LeakModel::PixelGaussian { stats }),
        ),
    ];
    let report = run_bias_experiment(&schedule, &q, &inits, 10_000, &base).unwrap();
    let values: Vec<f64> = report.modes.iter().map(|m| m.wasserstein1).collect();
    let max = values.iter().cloned().fold(0.0, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(
        max <= 2.0 * min,
        "null-case W1 spread too wide: {values:?}"
    );
    c.pass();
}

#[test]
fn criterion_6_per_frequency_snr() {
    let c = Criterion::new("6 (per-frequency SNR concentration)", 10);
    let schedule = NoiseSchedule::new(ScheduleKind::scaled_linear_default(), 1000).unwrap();
    let mut rng = RngStream::new(41);
    let dataset: Vec<Tensor> = (0..200)
        .map(|_| Tensor::constant(1, 8, 8, 2.0 * rng.next_uniform() - 1.0))
        .collect();
    let energy = estimate_freq_energy(&dataset).unwrap();
    let snr = snr_per_frequency(&schedule, &energy);
    let dc = snr.get(0, 0, 0);
    let max_rest = snr
        .data()
        .iter()
        .skip(1)
        .fold(0.0f64, |acc, &v| acc.max(v))
        .max(f64::MIN_POSITIVE);
    assert!(dc / max_rest >= 100.0, "SNR ratio {}", dc / max_rest);
    c.pass();
}

fn spearman_rank_correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |values: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let mut ranks = vec![0.0; values.len()];
        for (r, &i) in idx.iter().enumerate() {
            ranks[i] = r as f64;
        }
        ranks
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mean = (n - 1.0) / 2.0;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        num += (a - mean) * (b - mean);
        dx += (a - mean) * (a - mean);
        dy += (b - mean) * (b - mean);
    }
    num / (dx * dy).sqrt()
}

#[test]
fn criterion_7_explicit_lf_control() {
    let c = Criterion::new("7 (explicit low-frequency control)", 120);
    let schedule = accentuated_schedule();
    let q = GmmDistribution::scalar(&[(1.0, 0.0, 4.0)]).unwrap();
    let hf = PixelStats::new(Tensor::zeros(1, 1, 1), Tensor::zeros(1, 1, 1)).unwrap();

    let controls = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut means = Vec::new();
    for (k, control) in controls.into_iter().enumerate() {
        let model = LeakModel::manual_dc(&[control], hf.clone()).unwrap();
        let base = RngStream::new(0).substream(k as u64);
        let samples = generate(&schedule, &q, &model, 1000, &base).unwrap();
        means.push(samples.iter().map(|s| s.mean()).sum::<f64>() / samples.len() as f64);
    }
    let rho = spearman_rank_correlation(&controls, &means);
    assert_eq!(rho, 1.0, "sweep means not monotone: {means:?}");
    assert!(
        means.windows(2).all(|w| w[0] < w[1]),
        "sweep means not strictly increasing: {means:?}"
    );
    c.pass();
}

#[test]
fn criterion_8_varied_brightness() {
    let c = Criterion::new("8 (varied brightness under hybrid leak)", 120);
    let schedule = accentuated_schedule();
    let plane = |v: f64| Tensor::constant(1, 2, 2, v);
    let q = GmmDistribution::new(vec![
        GmmComponent {
            weight: 0.5,
            mean: plane(4.0),
            var: plane(0.25),
        },
        GmmComponent {
            weight: 0.5,
            mean: plane(8.0),
            var: plane(0.25),
        },
    ])
    .unwrap();

    let base = RngStream::new(0);
    let mut fit_rng = base.substream(1_000_000);
    let fit: Vec<Tensor> = (0..500).map(|_| q.sample(&mut fit_rng)).collect();
    let stats = estimate_hybrid_stats(&fit, 1, 1e-4).unwrap();

    // Same base stream for both modes: paired seeds.
    let white = generate(&schedule, &q, &LeakModel::WhiteNoise, 1000, &base).unwrap();
    let hybrid = generate(&schedule, &q, &LeakModel::Hybrid { stats }, 1000, &base).unwrap();
    let spread_white = brightness_summary(&white).unwrap().std_of_means;
    let spread_hybrid = brightness_summary(&hybrid).unwrap().std_of_means;
    assert!(
        spread_hybrid >= 1.5 * spread_white,
        "hybrid {spread_hybrid} vs white {spread_white}"
    );
    c.pass();
}

fn run_cli(args: &[&str], dir: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_sigleak"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "sigleak {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn criterion_9_cli_determinism() {
    let c = Criterion::new("9 (CLI byte-level determinism)", 120);
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // Deterministic input corpus, built via sample-init itself.
    run_cli(
        &[
            "sample-init", "--white", "--shape", "1,8,8", "--count", "6", "--seed", "99",
            "--kind", "scaled-linear", "--t-max", "1000", "--out", "corpus",
        ],
        root,
    );
    fs::write(
        root.join("gmm.json"),
        r#"{"shape": [1,1,1], "components": [
            {"weight": 0.5, "mean": 4.0, "var": 0.25},
            {"weight": 0.5, "mean": 8.0, "var": 0.25}]}"#,
    )
    .unwrap();

    // Every command twice with byte-identical invocations; files are
    // overwritten in place between passes.
    let commands: Vec<Vec<&str>> = vec![
        vec!["schedule-info", "--kind", "scaled-linear", "--t-max", "1000", "--t", "981"],
        vec!["estimate", "--input", "corpus", "--mode", "hybrid", "--n-lowest", "1", "--out", "stats.json"],
        vec![
            "sample-init", "--stats", "stats.json", "--count", "3", "--seed", "5",
            "--kind", "scaled-linear", "--t-max", "1000", "--out", "latents",
        ],
        vec![
            "sample-init", "--manual-lf", "0", "--stats", "stats.json", "--count", "2",
            "--seed", "5", "--kind", "scaled-linear", "--t-max", "1000", "--out", "manual",
        ],
        vec![
            "simulate", "--gmm", "gmm.json", "--kind", "linear",
            "--beta-start", "0.0138", "--beta-end", "0.0138", "--t-max", "100",
            "--init", "white", "--init", "oracle", "--n-samples", "300", "--seed", "21",
            "--out-json", "report.json", "--out-csv", "samples.csv",
        ],
        vec![
            "analyze", "--input", "latents", "--out", "analysis.csv",
            "--kind", "scaled-linear", "--t-max", "1000", "--t", "1000", "--n-lowest", "1",
            "--recovery-out", "recovered",
        ],
    ];
    let files = ["stats.json", "report.json", "samples.csv", "analysis.csv"];
    let dirs = ["latents", "manual", "recovered"];

    let mut snapshots: Vec<(Vec<Vec<u8>>, Vec<Vec<u8>>, Vec<Vec<(String, Vec<u8>)>>)> = Vec::new();
    for _pass in 0..2 {
        let stdouts: Vec<Vec<u8>> = commands.iter().map(|cmd| run_cli(cmd, root).stdout).collect();
        let file_bytes: Vec<Vec<u8>> = files
            .iter()
            .map(|name| fs::read(root.join(name)).unwrap())
            .collect();
        let dir_contents: Vec<Vec<(String, Vec<u8>)>> =
            dirs.iter().map(|sub| dir_bytes(&root.join(sub))).collect();
        snapshots.push((stdouts, file_bytes, dir_contents));
    }

    assert_eq!(snapshots[0].0, snapshots[1].0, "stdout differs between identical runs");
    for (i, name) in files.iter().enumerate() {
        assert_eq!(
            snapshots[0].1[i], snapshots[1].1[i],
            "{name} differs between identical runs"
        );
    }
    for (i, sub) in dirs.iter().enumerate() {
        assert_eq!(
            snapshots[0].2[i], snapshots[1].2[i],
            "{sub}/ differs between identical runs"
        );
    }
    c.pass();
}
