//! Distances between an empirical law and the standard normal, plus the
//! two-sample Kolmogorov–Smirnov test.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::normal;

/// How samples are scaled before comparison with `N(0, 1)`. Samples are
/// divided by the scale only; they are not re-centred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Normalization {
    SampleSd,
    Theoretical { sd: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceReport {
    pub d_kol: f64,
    pub d_w1: f64,
    pub normalization: Normalization,
    pub scale: f64,
    pub n: usize,
}

fn standardized_sorted(samples: &[f64], norm: Normalization) -> Result<(Vec<f64>, f64)> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("distance needs at least two samples".into()));
    }
    let scale = match norm {
        Normalization::SampleSd => {
            let n = samples.len() as f64;
            let m = samples.iter().sum::<f64>() / n;
            let var = samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
            if !(var > 0.0) {
                return Err(Error::DegenerateSample);
            }
            var.sqrt()
        }
        Normalization::Theoretical { sd } => {
            if !(sd > 0.0 && sd.is_finite()) {
                return Err(Error::InvalidArgument(format!("theoretical sd must be positive, got {sd}")));
            }
            sd
        }
    };
    let mut z: Vec<f64> = samples.iter().map(|x| x / scale).collect();
    z.sort_by(|a, b| a.total_cmp(b));
    Ok((z, scale))
}

/// `sup_x |F_n(x) - Φ(x)|`, evaluated on both sides of every jump of `F_n`.
pub fn ks_distance(samples: &[f64], norm: Normalization) -> Result<f64> {
    let (z, _) = standardized_sorted(samples, norm)?;
    Ok(ks_sorted(&z))
}

fn ks_sorted(z: &[f64]) -> f64 {
    let n = z.len() as f64;
    z.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let p = normal::cdf(x);
        let above = (i as f64 + 1.0) / n - p;
        let below = p - i as f64 / n;
        acc.max(above).max(below)
    })
}

/// `∫ |F_n(x) - Φ(x)| dx`, the 1-Wasserstein distance to `N(0, 1)`.
///
/// Uses the quantile form `Σ_i ∫_{(i-1)/n}^{i/n} |z_(i) - Φ^{-1}(u)| du` with
/// the antiderivative `∫ Φ^{-1}(u) du = -φ(Φ^{-1}(u))`.
pub fn w1_distance(samples: &[f64], norm: Normalization) -> Result<f64> {
    let (z, _) = standardized_sorted(samples, norm)?;
    Ok(w1_sorted(&z))
}

fn w1_sorted(z: &[f64]) -> f64 {
    let n = z.len();
    let nf = n as f64;
    // anti[k] = -φ(Φ^{-1}(k / n)), zero at both ends.
    let anti: Vec<f64> = (0..=n)
        .map(|k| {
            if k == 0 || k == n {
                0.0
            } else {
                -normal::pdf(normal::quantile(k as f64 / nf))
            }
        })
        .collect();
    let mut total = 0.0;
    for (i, &x) in z.iter().enumerate() {
        let (p0, p1) = (i as f64 / nf, (i + 1) as f64 / nf);
        let px = normal::cdf(x);
        let (split, anti_split) = if px <= p0 {
            (p0, anti[i])
        } else if px >= p1 {
            (p1, anti[i + 1])
        } else {
            (px, -normal::pdf(x))
        };
        // Below the split the quantile is under x, above it is over x.
        let lower = x * (split - p0) - (anti_split - anti[i]);
        let upper = (anti[i + 1] - anti_split) - x * (p1 - split);
        total += lower + upper;
    }
    total
}

pub fn distance_report(samples: &[f64], norm: Normalization) -> Result<DistanceReport> {
    let (z, scale) = standardized_sorted(samples, norm)?;
    Ok(DistanceReport {
        d_kol: ks_sorted(&z),
        d_w1: w1_sorted(&z),
        normalization: norm,
        scale,
        n: samples.len(),
    })
}

/// Conservative standard error of an empirical Kolmogorov distance: the
/// empirical CDF at a fixed point has variance `p (1 - p) / n <= 1 / (4 n)`.
pub fn ks_standard_error(n: usize) -> f64 {
    0.5 / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoSampleReport {
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
}

impl TwoSampleReport {
    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{k>=1} (-1)^(k-1) exp(-2 k² λ²)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov statistic with its asymptotic p-value.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<TwoSampleReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("two-sample test needs non-empty samples".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.total_cmp(q));
    ys.sort_by(|p, q| p.total_cmp(q));
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    let p_value = kolmogorov_survival((en + 0.12 + 0.11 / en) * d);
    Ok(TwoSampleReport { statistic: d, p_value, n_a: n, n_b: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{self, QuadConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn quantile_sample(n: usize, shift: f64) -> Vec<f64> {
        (1..=n)
            .map(|i| normal::quantile((i as f64 - 0.5) / n as f64) + shift)
            .collect()
    }

    /// Brute-force sup over both one-sided limits at every sample, with F_n
    /// recomputed by counting.
    fn ks_oracle(z: &[f64]) -> f64 {
        let n = z.len() as f64;
        let mut sup: f64 = 0.0;
        for &x in z {
            let right = z.iter().filter(|&&v| v <= x).count() as f64 / n;
            let left = z.iter().filter(|&&v| v < x).count() as f64 / n;
            let p = normal::cdf(x);
            sup = sup.max((right - p).abs()).max((left - p).abs());
        }
        sup
    }

    /// Direct integration of |F_n - Φ| with breakpoints at the samples and at
    /// the crossings of Φ with each step level (found by bisection).
    fn w1_oracle(z: &[f64]) -> f64 {
        let mut sorted = z.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let n = sorted.len();
        let ecdf = |x: f64| sorted.iter().filter(|&&v| v <= x).count() as f64 / n as f64;
        let mut bps = sorted.clone();
        for k in 1..n {
            let level = k as f64 / n as f64;
            let (mut lo, mut hi) = (-40.0, 40.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if normal::cdf(mid) < level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            bps.push(0.5 * (lo + hi));
        }
        let cfg = QuadConfig { abs_tol: 1e-12, max_depth: 50 };
        let lo = sorted[0].min(-12.0);
        let hi = sorted[n - 1].max(12.0);
        quad::integrate(|x| (ecdf(x) - normal::cdf(x)).abs(), lo, hi, &bps, &cfg).unwrap()
    }

    #[test]
    fn ks_all_zero_samples() {
        let d = ks_distance(&[0.0; 10], Normalization::Theoretical { sd: 1.0 }).unwrap();
        assert_eq!(d, 0.5);
        assert_eq!(ks_distance(&[0.0; 10], Normalization::SampleSd), Err(Error::DegenerateSample));
        assert!(ks_distance(&[1.0], Normalization::SampleSd).is_err());
    }

    #[test]
    fn ks_of_quantile_sample_is_half_step() {
        for n in [10, 100, 1000] {
            let d = ks_distance(&quantile_sample(n, 0.0), Normalization::Theoretical { sd: 1.0 }).unwrap();
            assert!((d - 0.5 / n as f64).abs() < 1e-14, "n={n} d={d}");
        }
    }

    #[test]
    fn w1_point_mass_at_zero() {
        let d = w1_distance(&[0.0; 7], Normalization::Theoretical { sd: 1.0 }).unwrap();
        assert!((d - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn w1_of_quantile_samples() {
        for n in [100, 400, 1000] {
            let d = w1_distance(&quantile_sample(n, 0.0), Normalization::Theoretical { sd: 1.0 }).unwrap();
            assert!(d <= 2.0 / n as f64, "n={n} d={d}");
            let mu = 0.7;
            let shifted = w1_distance(&quantile_sample(n, mu), Normalization::Theoretical { sd: 1.0 }).unwrap();
            assert!((shifted - mu).abs() <= 2.0 / n as f64, "n={n} shifted={shifted}");
        }
    }

    #[test]
    fn distances_agree_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for &n in &[5usize, 50, 300, 1000] {
            let xs: Vec<f64> = (0..n)
                .map(|_| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    1.3 * g + 0.2 * g * g
                })
                .collect();
            for norm in [Normalization::SampleSd, Normalization::Theoretical { sd: 1.5 }] {
                let rep = distance_report(&xs, norm).unwrap();
                let z: Vec<f64> = xs.iter().map(|x| x / rep.scale).collect();
                assert!((rep.d_kol - ks_oracle(&z)).abs() < 1e-9);
                let w = w1_oracle(&z);
                assert!((rep.d_w1 - w).abs() < 1e-9, "n={n} fast={} oracle={w}", rep.d_w1);
            }
        }
    }

    #[test]
    fn ks_of_gaussian_sample_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let xs: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let d = ks_distance(&xs, Normalization::Theoretical { sd: 1.0 }).unwrap();
        assert!(d < 0.01, "d={d}");
    }

    #[test]
    fn two_sample_identical_and_shifted() {
        let xs = quantile_sample(500, 0.0);
        let same = two_sample_ks(&xs, &xs).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.p_value, 1.0);
        let shifted = two_sample_ks(&xs, &quantile_sample(500, 1.0)).unwrap();
        assert!(shifted.rejects_at(1e-3));
    }

    #[test]
    fn two_sample_handles_ties() {
        let a = [0.0, 0.0, 1.0, 1.0];
        let b = [0.0, 1.0, 1.0, 1.0];
        let rep = two_sample_ks(&a, &b).unwrap();
        assert_eq!(rep.statistic, 0.25);
    }

    #[test]
    fn kolmogorov_survival_reference() {
        // Q(1.36) ≈ 0.0494 (classic 5% critical value), Q(1.95) ≈ 0.001.
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 5e-4);
        assert!((kolmogorov_survival(1.949) - 0.001).abs() < 1e-4);
    }
}
