//! Point estimates with standard errors.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Signed distance to `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.se
    }

    pub fn within(&self, target: f64, n_se: f64) -> bool {
        (self.value - target).abs() <= n_se * self.se
    }

    pub fn scaled(&self, factor: f64) -> Estimate {
        Estimate { value: self.value * factor, se: self.se * factor.abs() }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample mean with the usual CLT standard error.
pub fn mean_with_se(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    Estimate { value: m, se: (var / n).sqrt() }
}

/// Leave-one-out jackknife standard error given the delete-one estimates.
pub fn jackknife_se<I: IntoIterator<Item = f64>>(leave_one_out: I) -> f64 {
    let values: Vec<f64> = leave_one_out.into_iter().collect();
    let n = values.len() as f64;
    let m = mean(&values);
    ((n - 1.0) / n * values.iter().map(|v| (v - m) * (v - m)).sum::<f64>()).sqrt()
}

/// Unbiased sample variance with a jackknife standard error. The delete-one
/// variances are obtained in O(1) each from the centred sums.
pub fn variance_jackknife(xs: &[f64]) -> Estimate {
    covariance_jackknife(xs, xs)
}

/// Unbiased sample covariance with a jackknife standard error.
pub fn covariance_jackknife(xs: &[f64], ys: &[f64]) -> Estimate {
    assert_eq!(xs.len(), ys.len(), "covariance needs paired samples");
    let n = xs.len();
    assert!(n >= 3, "jackknife covariance needs at least three samples");
    let nf = n as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let cross: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let value = cross / (nf - 1.0);
    // Removing point i shifts the mean by -d_i / (n - 1).
    let loo = xs.iter().zip(ys).map(|(x, y)| {
        let (dx, dy) = (x - mx, y - my);
        (cross - dx * dy - dx * dy / (nf - 1.0)) / (nf - 2.0)
    });
    Estimate { value, se: jackknife_se(loo) }
}

fn leave_one_out_variances(xs: &[f64]) -> (f64, Vec<f64>) {
    let nf = xs.len() as f64;
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    let loo = xs.iter().map(|x| (ss - (x - m) * (x - m) * nf / (nf - 1.0)) / (nf - 2.0)).collect();
    (ss / (nf - 1.0), loo)
}

/// `Var(xs) / Var(ys)` on paired samples with a jackknife standard error, so
/// the correlation between the columns is accounted for.
pub fn variance_ratio_jackknife(xs: &[f64], ys: &[f64]) -> Estimate {
    assert_eq!(xs.len(), ys.len(), "variance ratio needs paired samples");
    assert!(xs.len() >= 3, "jackknife ratio needs at least three samples");
    let (vx, loo_x) = leave_one_out_variances(xs);
    let (vy, loo_y) = leave_one_out_variances(ys);
    let se = jackknife_se(loo_x.iter().zip(&loo_y).map(|(a, b)| a / b));
    Estimate { value: vx / vy, se }
}

/// Sample skewness and excess kurtosis (moment estimators).
pub fn shape_moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jackknife_variance_matches_brute_force() {
        let xs = [0.3, -1.2, 2.5, 0.7, 0.0, -0.4, 1.1];
        let est = variance_jackknife(&xs);
        let var = |v: &[f64]| {
            let m = mean(v);
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        };
        assert!((est.value - var(&xs)).abs() < 1e-15);
        let loo = (0..xs.len()).map(|i| {
            let rest: Vec<f64> = xs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| *x).collect();
            var(&rest)
        });
        assert!((est.se - jackknife_se(loo)).abs() < 1e-14);
    }

    #[test]
    fn jackknife_of_mean_equals_plain_se() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let loo = (0..xs.len()).map(|i| (xs.iter().sum::<f64>() - xs[i]) / 4.0);
        assert!((jackknife_se(loo) - mean_with_se(&xs).se).abs() < 1e-14);
    }

    #[test]
    fn covariance_of_identical_columns_is_variance() {
        let xs = [1.0, 3.0, -2.0, 0.5];
        assert_eq!(covariance_jackknife(&xs, &xs), variance_jackknife(&xs));
        let ys = [2.0, 6.0, -4.0, 1.0];
        let c = covariance_jackknife(&xs, &ys);
        assert!((c.value - 2.0 * variance_jackknife(&xs).value).abs() < 1e-14);
    }

    #[test]
    fn variance_ratio_matches_brute_force_jackknife() {
        let xs = [0.3, -1.2, 2.5, 0.7, 0.0, -0.4, 1.1, 3.0];
        let ys = [1.0, -0.5, 0.2, 0.9, -2.0, 0.4, 0.3, 1.5];
        let var = |v: &[f64]| {
            let m = mean(v);
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        };
        let drop = |v: &[f64], i: usize| -> Vec<f64> {
            v.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| *x).collect()
        };
        let est = variance_ratio_jackknife(&xs, &ys);
        assert!((est.value - var(&xs) / var(&ys)).abs() < 1e-14);
        let se = jackknife_se((0..xs.len()).map(|i| var(&drop(&xs, i)) / var(&drop(&ys, i))));
        assert!((est.se - se).abs() < 1e-13, "{} vs {se}", est.se);
    }

    #[test]
    fn shape_of_symmetric_sample() {
        let (skew, _) = shape_moments(&[-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(skew.abs() < 1e-15);
    }
}
