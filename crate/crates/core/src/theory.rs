//! Deterministic targets: limiting covariance, second moments, chaos norms and
//! the R-scaling integrals behind the normal-approximation bounds.
//!
//! The covariance of `u` coincides with that of the Gaussian-noise wave
//! equation with noise intensity `m2`, so the closed forms below come from the
//! Gaussian side:
//!
//! * `E[u(t, x)^2] = cosh(t sqrt(m2 / 2))`
//! * `Σ_{t,s} = 2 m2 ∫_0^{t∧s} (t - r)(s - r) cosh(r sqrt(m2 / 2)) dr`
//!
//! The chaos expansion gives the independent check `E[u^2] = 1 + Σ_n m2^n ‖f_n‖²`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{phi, phi_breakpoints};
use crate::levy::JumpLaw;
use crate::quad::{self, QuadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceModel {
    m2: f64,
    quad: QuadConfig,
}

impl CovarianceModel {
    pub fn new(m2: f64) -> Result<Self> {
        Self::with_quadrature(m2, QuadConfig::default())
    }

    pub fn with_quadrature(m2: f64, quad: QuadConfig) -> Result<Self> {
        if !(m2 > 0.0 && m2.is_finite()) {
            return Err(Error::InvalidArgument(format!("m2 must lie in (0, inf), got {m2}")));
        }
        Ok(Self { m2, quad })
    }

    pub fn from_law(law: &JumpLaw) -> Result<Self> {
        Self::new(law.moment_m(2.0))
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    fn rate(&self) -> f64 {
        (0.5 * self.m2).sqrt()
    }

    /// Limiting covariance `Σ_{t,s}` of `F_R(t) / sqrt(R)`.
    pub fn sigma_limit(&self, t: f64, s: f64) -> Result<f64> {
        if !(t >= 0.0 && s >= 0.0) {
            return Err(Error::InvalidArgument(format!("times must be non-negative: t={t} s={s}")));
        }
        let upper = t.min(s);
        if upper == 0.0 {
            return Ok(0.0);
        }
        let k = self.rate();
        let integral = quad::integrate(|r| (t - r) * (s - r) * (r * k).cosh(), 0.0, upper, &[], &self.quad)?;
        Ok(2.0 * self.m2 * integral)
    }

    /// Exact `Cov(F_R(t), F_R(s)) / R` at finite `R`:
    /// `(m2 / R) ∫_0^{t∧s} cosh(r sqrt(m2/2)) ∫ φ_{t,R}(r, y) φ_{s,R}(r, y) dy dr`.
    /// Tends to [`sigma_limit`](Self::sigma_limit) as `R → ∞`, with an `O(1/R)` gap.
    pub fn finite_radius_covariance(&self, t: f64, s: f64, radius: f64) -> Result<f64> {
        if !(t >= 0.0 && s >= 0.0 && radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need t, s >= 0 and R > 0: t={t} s={s} R={radius}"
            )));
        }
        let upper = t.min(s);
        if upper == 0.0 {
            return Ok(0.0);
        }
        let k = self.rate();
        let cfg = self.quad;
        let inner = |r: f64| -> Result<f64> {
            let mut br = phi_breakpoints(t, radius, r).to_vec();
            br.extend(phi_breakpoints(s, radius, r));
            let reach = radius + t.max(s) - r;
            quad::integrate(|y| phi(t, radius, r, y) * phi(s, radius, r, y), -reach, reach, &br, &cfg)
        };
        // A failed inner integral surfaces as a non-finite value, which the
        // outer integration rejects.
        let outer = quad::integrate(
            |r| inner(r).unwrap_or(f64::NAN) * (r * k).cosh(),
            0.0,
            upper,
            &[],
            &cfg,
        )?;
        Ok(self.m2 * outer / radius)
    }

    /// `E[u(t, x)^2] = cosh(t sqrt(m2 / 2))`.
    pub fn second_moment(&self, t: f64) -> f64 {
        (t * self.rate()).cosh()
    }

    /// Order-`n` term of the chaos series for `E[u(t, 0)^2]`, i.e.
    /// `n! m2^n ‖sym f_{t,0,n}‖²`.
    ///
    /// The spatial integrals are done in closed form (`∫ G_τ² = τ / 2`), which
    /// leaves `(m2 / 2)^n` times the integral of the product of consecutive time
    /// gaps over the ordered simplex `0 < t_1 < … < t_n < t`. Order 1 is
    /// returned exactly; higher orders are estimated from `samples` sorted
    /// uniform draws.
    pub fn chaos_term<R: Rng + ?Sized>(&self, n: u32, t: f64, samples: usize, rng: &mut R) -> Result<ChaosTermEstimate> {
        if n == 0 {
            return Err(Error::InvalidArgument("chaos order must be at least 1".into()));
        }
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")));
        }
        if n == 1 {
            return Ok(ChaosTermEstimate {
                n,
                t,
                estimate: self.m2 * t * t / 4.0,
                std_error: 0.0,
                n_samples: 0,
            });
        }
        if samples < 2 {
            return Err(Error::InvalidArgument("need at least two Monte Carlo samples".into()));
        }
        let order = n as usize;
        let mut times = vec![0.0; order];
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..samples {
            for slot in times.iter_mut() {
                *slot = t * rng.random::<f64>();
            }
            times.sort_by(|a, b| a.total_cmp(b));
            let mut prod = t - times[order - 1];
            for k in 1..order {
                prod *= times[k] - times[k - 1];
            }
            sum += prod;
            sum_sq += prod * prod;
        }
        let m = samples as f64;
        let mean = sum / m;
        let var = (sum_sq / m - mean * mean).max(0.0) * m / (m - 1.0);
        // Volume of the ordered simplex and the spatial factor (m2/2)^n.
        let scale = t.powi(n as i32) / factorial(n) * (0.5 * self.m2).powi(n as i32);
        Ok(ChaosTermEstimate {
            n,
            t,
            estimate: scale * mean,
            std_error: scale * (var / m).sqrt(),
            n_samples: samples,
        })
    }

    /// `m2^n t^(2n) / (2^n (2n)!)`, the order-`n` Taylor term of the cosh moment.
    pub fn cosh_taylor_term(&self, n: u32, t: f64) -> f64 {
        (0.5 * self.m2 * t * t).powi(n as i32) / factorial(2 * n)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChaosTermEstimate {
    pub n: u32,
    pub t: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Spatial kernels of the normal-approximation bounds for `F_R(t)`, with
/// `phi(y) = ∫_{-R}^{R} G_t(x - y) dx` and `J(y1) = ∫ phi(y2)^2 G_t(y1 - y2) dy2`:
///
/// * `i1 = ∫ J(y1)^(1+α) dy1`, at most `2 t^(3+3α) R`;
/// * `i2 = ∫ J(y1) dy1`, at most `2 t^3 R`;
/// * `i3 = t ∫ phi(y)^(q+1) dy` with `q = 1 + 2α` for `α <= 1/2` and `q = 2`
///   otherwise, at most `2 t^(q+2) R`.
///
/// The remaining kernels of the Kolmogorov bound reduce to these up to constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingIntegrals {
    pub radius: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i1_bound: f64,
    pub i2_bound: f64,
    pub i3_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingReport {
    pub t: f64,
    pub alpha: f64,
    pub q: f64,
    pub at_radius: ScalingIntegrals,
    pub at_double_radius: ScalingIntegrals,
    /// `value(2R) / value(R)` for i1, i2, i3.
    pub ratios: [f64; 3],
}

fn gamma3_exponent(alpha: f64) -> f64 {
    if alpha <= 0.5 {
        1.0 + 2.0 * alpha
    } else {
        2.0
    }
}

fn scaling_integrals(t: f64, radius: f64, alpha: f64, cfg: &QuadConfig) -> Result<ScalingIntegrals> {
    let q = gamma3_exponent(alpha);
    let phi0 = |y: f64| phi(t, radius, 0.0, y);
    let bps = phi_breakpoints(t, radius, 0.0);
    let reach = radius + t;

    let inner_cfg = QuadConfig { abs_tol: cfg.abs_tol / (2.0 * (reach + t)), ..*cfg };
    let j = |y1: f64| -> f64 {
        quad::integrate(|y2| phi0(y2) * phi0(y2), y1 - t, y1 + t, &bps, &inner_cfg)
            .map(|v| 0.5 * v)
            .unwrap_or(f64::NAN)
    };
    // J is piecewise cubic with kinks where the window (y1 - t, y1 + t) meets
    // a breakpoint of phi.
    let outer_bps: Vec<f64> = bps.iter().flat_map(|b| [b - t, b + t]).collect();
    let span = reach + t;
    let i1 = quad::integrate(|y1| j(y1).powf(1.0 + alpha), -span, span, &outer_bps, cfg)?;
    let i2 = quad::integrate(j, -span, span, &outer_bps, cfg)?;
    let i3 = t * quad::integrate(|y| phi0(y).powf(q + 1.0), -reach, reach, &bps, cfg)?;

    Ok(ScalingIntegrals {
        radius,
        i1,
        i2,
        i3,
        i1_bound: 2.0 * t.powf(3.0 + 3.0 * alpha) * radius,
        i2_bound: 2.0 * t.powi(3) * radius,
        i3_bound: 2.0 * t.powf(q + 2.0) * radius,
    })
}

/// Evaluates the scaling integrals at `R` and `2R`.
pub fn poincare_scaling_integrals(t: f64, radius: f64, alpha: f64, cfg: &QuadConfig) -> Result<ScalingReport> {
    if !(t > 0.0 && radius > 0.0) {
        return Err(Error::InvalidArgument(format!("need t, R > 0, got t={t} R={radius}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let at_radius = scaling_integrals(t, radius, alpha, cfg)?;
    let at_double_radius = scaling_integrals(t, 2.0 * radius, alpha, cfg)?;
    Ok(ScalingReport {
        t,
        alpha,
        q: gamma3_exponent(alpha),
        at_radius,
        at_double_radius,
        ratios: [
            at_double_radius.i1 / at_radius.i1,
            at_double_radius.i2 / at_radius.i2,
            at_double_radius.i3 / at_radius.i3,
        ],
    })
}

/// Predicted decay exponent `α / (1 + α)` of the normal-approximation distance.
pub fn clt_rate_exponent(alpha: f64) -> f64 {
    alpha / (1.0 + alpha)
}
