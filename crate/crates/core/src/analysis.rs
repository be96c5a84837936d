//! Diagnostics: low-frequency recovery, brightness summaries, and empirical
//! Wasserstein-1 distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::NoiseSchedule;
use crate::tensor::{FreqMask, Tensor};

/// Recovers the low-frequency content of the clean signal from a noised
/// latent: IDCT of the `n_lowest`-masked DCT divided by √ᾱ_t. Noise barely
/// touches the lowest frequencies, so this is an unbiased low-pass view of
/// x₀ even at large t.
pub fn lowfreq_recovery(
    x_t: &Tensor,
    schedule: &NoiseSchedule,
    t: usize,
    n_lowest: usize,
) -> Result<Tensor> {
    let (sq_ab, _) = schedule.marginal_coeffs(t)?;
    let mask = FreqMask::lowest(n_lowest, x_t.height(), x_t.width())?;
    let (low, _) = mask.split(&x_t.dct2())?;
    Ok(low.scale(1.0 / sq_ab).idct2())
}

/// Spread of per-sample brightness across a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrightnessSummary {
    /// Mean over samples of the per-sample spatial mean.
    pub mean_of_means: f64,
    /// Population std over samples of the per-sample spatial mean.
    pub std_of_means: f64,
    /// Mean over samples of the per-sample spatial std (contrast proxy).
    pub mean_contrast: f64,
}

pub fn brightness_summary(samples: &[Tensor]) -> Result<BrightnessSummary> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = samples.len() as f64;
    let means: Vec<f64> = samples.iter().map(|s| s.mean()).collect();
    let mean_of_means = means.iter().sum::<f64>() / n;
    let std_of_means = (means
        .iter()
        .map(|m| (m - mean_of_means) * (m - mean_of_means))
        .sum::<f64>()
        / n)
        .sqrt();
    let mean_contrast = samples.iter().map(|s| s.population_std()).sum::<f64>() / n;
    Ok(BrightnessSummary {
        mean_of_means,
        std_of_means,
        mean_contrast,
    })
}

/// Wasserstein-1 distance between two empirical distributions. Equal-size
/// inputs reduce to the mean absolute difference of sorted samples; unequal
/// sizes integrate |F_a − F_b| over the merged support, which is the same
/// inverse-CDF integral.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).expect("finite values"));
    sb.sort_by(|x, y| x.partial_cmp(y).expect("finite values"));

    if sa.len() == sb.len() {
        let n = sa.len() as f64;
        return Ok(sa
            .iter()
            .zip(&sb)
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
            / n);
    }

    // Merge-walk: between consecutive breakpoints the two empirical CDFs are
    // constant, contributing |F_a - F_b| * segment length.
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = sa[0].min(sb[0]);
    let mut total = 0.0;
    while i < sa.len() || j < sb.len() {
        let next = match (sa.get(i), sb.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        total += (i as f64 / na - j as f64 / nb).abs() * (next - prev);
        while i < sa.len() && sa[i] == next {
            i += 1;
        }
        while j < sb.len() && sb[j] == next {
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::sampler::sample_training_latent;
    use crate::schedule::ScheduleKind;

    #[test]
    fn recovery_passes_constant_through_dc() {
        let schedule = NoiseSchedule::new(ScheduleKind::scaled_linear_default(), 1000).unwrap();
        let c = 0.7;
        let x0 = Tensor::constant(1, 8, 8, c);
        let t = 1000;
        let (sq_ab, _) = schedule.marginal_coeffs(t).unwrap();
        // Noise-free latent: x_t = sqrt(ab) * x0.
        let x_t = x0.scale(sq_ab);
        let recovered = lowfreq_recovery(&x_t, &schedule, t, 1).unwrap();
        for &v in recovered.data() {
            assert!((v - c).abs() < 1e-9);
        }
    }

    #[test]
    fn recovery_is_unbiased_under_noise() {
        let schedule = NoiseSchedule::new(ScheduleKind::scaled_linear_default(), 1000).unwrap();
        let c = 0.5;
        let x0 = Tensor::constant(1, 8, 8, c);
        let t = 1000;
        let n = 10_000;
        let mut rng = RngStream::new(23);
        let mut acc = 0.0;
        for _ in 0..n {
            let x_t = sample_training_latent(&schedule, &x0, t, &mut rng).unwrap();
            acc += lowfreq_recovery(&x_t, &schedule, t, 1).unwrap().mean();
        }
        let mean = acc / n as f64;
        // Recovered DC has variance (1-ab)/ab / (H*W) per draw.
        let ab = schedule.final_alpha_bar();
        let sd = ((1.0 - ab) / ab / 64.0 / n as f64).sqrt();
        assert!((mean - c).abs() < 3.0 * sd, "mean {mean} vs {c} (3sd {})", 3.0 * sd);
    }

    #[test]
    fn recovery_full_band_inverts_noiseless_latent() {
        let schedule = NoiseSchedule::new(ScheduleKind::linear_default(), 100).unwrap();
        let mut rng = RngStream::new(3);
        let x0 = rng.normal_tensor(2, 8, 8);
        let t = 60;
        let (sq_ab, _) = schedule.marginal_coeffs(t).unwrap();
        let x_t = x0.scale(sq_ab);
        let recovered = lowfreq_recovery(&x_t, &schedule, t, 64).unwrap();
        let max_err = x0
            .data()
            .iter()
            .zip(recovered.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_err <= 1e-9);
    }

    #[test]
    fn recovery_is_linear() {
        let schedule = NoiseSchedule::new(ScheduleKind::linear_default(), 100).unwrap();
        let mut rng = RngStream::new(7);
        let x = rng.normal_tensor(1, 8, 8);
        let y = rng.normal_tensor(1, 8, 8);
        let (a, b) = (1.7, -0.4);
        let combo = x.scale(a).add(&y.scale(b)).unwrap();
        let lhs = lowfreq_recovery(&combo, &schedule, 50, 3).unwrap();
        let rhs = lowfreq_recovery(&x, &schedule, 50, 3)
            .unwrap()
            .scale(a)
            .add(&lowfreq_recovery(&y, &schedule, 50, 3).unwrap().scale(b))
            .unwrap();
        for (u, v) in lhs.data().iter().zip(rhs.data()) {
            assert!((u - v).abs() <= 1e-9);
        }
    }

    #[test]
    fn brightness_of_identical_constants() {
        let samples = vec![Tensor::constant(1, 4, 4, 2.5); 7];
        let s = brightness_summary(&samples).unwrap();
        assert_eq!(s.mean_of_means, 2.5);
        assert_eq!(s.std_of_means, 0.0);
        assert_eq!(s.mean_contrast, 0.0);
        assert!(brightness_summary(&[]).is_err());
    }

    #[test]
    fn brightness_std_of_means_matches_clt() {
        // 64-element white samples: spatial means have std 1/8.
        let mut rng = RngStream::new(44);
        let samples: Vec<Tensor> = (0..1000).map(|_| rng.normal_tensor(1, 8, 8)).collect();
        let s = brightness_summary(&samples).unwrap();
        let sd_of_estimate = 0.125 / (2.0 * 1000.0f64).sqrt();
        assert!((s.std_of_means - 0.125).abs() < 3.0 * sd_of_estimate + 0.005, "{}", s.std_of_means);
    }

    #[test]
    fn brightness_order_invariant() {
        let mut rng = RngStream::new(4);
        let samples: Vec<Tensor> = (0..10).map(|_| rng.normal_tensor(1, 3, 3)).collect();
        let forward = brightness_summary(&samples).unwrap();
        let mut reversed = samples;
        reversed.reverse();
        let back = brightness_summary(&reversed).unwrap();
        assert!((forward.mean_of_means - back.mean_of_means).abs() <= 1e-12);
        assert!((forward.std_of_means - back.std_of_means).abs() <= 1e-12);
        assert!((forward.mean_contrast - back.mean_contrast).abs() <= 1e-12);
    }

    #[test]
    fn w1_identity_and_point_masses() {
        let a = vec![0.3, -1.0, 2.0];
        assert_eq!(wasserstein1(&a, &a).unwrap(), 0.0);
        assert_eq!(wasserstein1(&[0.0], &[3.0]).unwrap(), 3.0);
        assert!(wasserstein1(&[], &[1.0]).is_err());
    }

    #[test]
    fn w1_shifted_gaussians() {
        let mut rng = RngStream::new(15);
        let n = 100_000;
        let a: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.next_normal() + 1.0).collect();
        let w = wasserstein1(&a, &b).unwrap();
        assert!((w - 1.0).abs() < 0.02, "w1 {w}");
    }

    #[test]
    fn w1_unequal_sizes_agree_with_subsampled_equal_case() {
        // Same distribution split unevenly: distance should be small, and
        // the unequal-size path must agree with the equal-size value on a
        // case computable both ways.
        let a = vec![0.0, 1.0, 2.0, 3.0];
        let b = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        // Hand value: segments [0,1),[1,2),[2,3),[3,4) contribute
        // |1/4-1/5| + |2/4-2/5| + |3/4-3/5| + |1-4/5| = 0.5.
        let w = wasserstein1(&a, &b).unwrap();
        assert!((w - 0.5).abs() < 1e-12, "w1 {w}");
        let sym = wasserstein1(&b, &a).unwrap();
        assert_eq!(w, sym);
    }

    #[test]
    fn w1_triangle_inequality() {
        let mut rng = RngStream::new(62);
        for _ in 0..20 {
            let a: Vec<f64> = (0..50).map(|_| rng.next_normal()).collect();
            let b: Vec<f64> = (0..50).map(|_| rng.next_normal() * 2.0).collect();
            let c: Vec<f64> = (0..50).map(|_| rng.next_normal() + 0.5).collect();
            let ab = wasserstein1(&a, &b).unwrap();
            let bc = wasserstein1(&b, &c).unwrap();
            let ac = wasserstein1(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-12);
        }
    }
}
