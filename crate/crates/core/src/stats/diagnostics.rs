//! Variance, Hölder and stationarity diagnostics on a [`SampleSet`].

use serde::Serialize;

use super::distance::{two_sample_ks, TwoSampleReport};
use super::estimate::{covariance_jackknife, mean_with_se, variance_jackknife, Estimate};
use super::SampleSet;
use crate::error::{Error, Result};
use crate::theory::CovarianceModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceRow {
    pub t: f64,
    pub radius: f64,
    /// `Var(F_R(t)) / R`.
    pub var_over_r: Estimate,
    /// `Σ_{t,t}`.
    pub sigma_limit: f64,
    pub z_score: f64,
    /// `Var(F_R(t) / R)`, which decays like `1/R`.
    pub lln_var: Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceRow {
    pub t: f64,
    pub s: f64,
    pub radius: f64,
    /// `Cov(F_R(t), F_R(s)) / R`.
    pub cov_over_r: Estimate,
    pub sigma_limit: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceTable {
    pub variances: Vec<VarianceRow>,
    pub covariances: Vec<CovarianceRow>,
}

impl VarianceTable {
    pub fn variance(&self, t: f64, radius: f64) -> Option<&VarianceRow> {
        self.variances.iter().find(|r| r.t == t && r.radius == radius)
    }

    pub fn covariance(&self, t: f64, s: f64, radius: f64) -> Option<&CovarianceRow> {
        self.covariances
            .iter()
            .find(|r| r.t == t && r.s == s && r.radius == radius)
    }
}

/// Jackknife variance and covariance ratios against the limiting covariance.
/// Rows at `t = 0` are skipped since `F_R(0) ≡ 0`.
pub fn variance_diagnostic(set: &SampleSet, model: &CovarianceModel) -> Result<VarianceTable> {
    let times: Vec<f64> = set.times().into_iter().filter(|t| *t > 0.0).collect();
    let radii = set.radii();
    let mut variances = Vec::new();
    let mut covariances = Vec::new();
    for &radius in &radii {
        for (a, &t) in times.iter().enumerate() {
            let xs = set.average(t, radius).expect("recorded key");
            let var = variance_jackknife(xs);
            let sigma = model.sigma_limit(t, t)?;
            let var_over_r = var.scaled(1.0 / radius);
            variances.push(VarianceRow {
                t,
                radius,
                var_over_r,
                sigma_limit: sigma,
                z_score: var_over_r.z_score(sigma),
                lln_var: var.scaled(1.0 / (radius * radius)),
            });
            for &s in &times[a + 1..] {
                let ys = set.average(s, radius).expect("recorded key");
                let cov_over_r = covariance_jackknife(xs, ys).scaled(1.0 / radius);
                let sigma = model.sigma_limit(t, s)?;
                covariances.push(CovarianceRow {
                    t,
                    s,
                    radius,
                    cov_over_r,
                    sigma_limit: sigma,
                    z_score: cov_over_r.z_score(sigma),
                });
            }
        }
    }
    Ok(VarianceTable { variances, covariances })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderPoint {
    pub gap: f64,
    /// `E|F_R(t) - F_R(s)|^2`.
    pub mean_sq: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderFit {
    pub radius: f64,
    pub anchor: f64,
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub points: Vec<HolderPoint>,
}

/// Regresses `log E|F_R(T) - F_R(s)|^2` on `log(T - s)`, where `T` is the
/// largest recorded time and `s` runs over the other recorded times.
///
/// The slope standard error propagates the per-point standard errors of the
/// log means through the least-squares weights, treating points as independent.
pub fn holder_diagnostic(set: &SampleSet, radius: f64) -> Result<HolderFit> {
    let mut times = set.times();
    times.sort_by(|a, b| a.total_cmp(b));
    if times.len() < 4 {
        return Err(Error::InvalidArgument("Hölder fit needs at least four grid times".into()));
    }
    let anchor = *times.last().expect("non-empty");
    let top = set
        .average(anchor, radius)
        .ok_or_else(|| Error::InvalidArgument(format!("radius {radius} not recorded")))?;
    let mut points = Vec::new();
    for &s in &times[..times.len() - 1] {
        let other = set.average(s, radius).expect("recorded key");
        let sq: Vec<f64> = top.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).collect();
        points.push(HolderPoint { gap: anchor - s, mean_sq: mean_with_se(&sq) });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.gap.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_sq.value.ln()).collect();
    let rel: Vec<f64> = points.iter().map(|p| p.mean_sq.se / p.mean_sq.value).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
    let slope_se = xs
        .iter()
        .zip(&rel)
        .map(|(x, r)| ((x - mx) / sxx * r).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(HolderFit {
        radius,
        anchor,
        slope,
        slope_se,
        intercept: my - slope * mx,
        points,
    })
}

/// Two-sample KS test between two probe columns (drawn from independent paths).
pub fn stationarity_check(a: &[f64], b: &[f64]) -> Result<TwoSampleReport> {
    two_sample_ks(a, b)
}
