//! Finite-activity jump intensity measures.
//!
//! A [`JumpLaw`] is a Lévy measure `nu` on the punctured line together with the
//! moment functionals
//!
//! * `m_p = ∫ |z|^p nu(dz)` (all jumps), and
//! * `M_p = ∫_{|z|>1} |z|^p nu(dz)` (large jumps only).
//!
//! `M_p < ∞` is equivalent to the noise having finite `p`-th moments, which is
//! why the tail functional is exposed separately from `m_p`. All moments are
//! extended reals: divergent integrals come back as `f64::INFINITY`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when deciding whether a law is centered.
const CENTERING_TOL: f64 = 1e-12;

/// Parametric families of jump intensity measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum JumpFamily {
    /// Jumps of size `±magnitude`, each sign at rate `rate / 2`.
    SymmetricTwoPoint { magnitude: f64, rate: f64 },
    /// Jump `+up` with probability `p_up`, else `-down`, at total rate `rate`.
    /// Requires `p_up * up == (1 - p_up) * down`.
    CenteredTwoPoint { up: f64, down: f64, p_up: f64, rate: f64 },
    /// Finitely many atoms `(z_k, rate_k)`.
    Discrete { atoms: Vec<(f64, f64)> },
    /// Symmetric density `c1 |z|^(-a-1)` on `eps <= |z| <= 1` and
    /// `c2 |z|^(-b-1)` on `|z| > 1`.
    PowerDensity { c1: f64, exp_a: f64, c2: f64, exp_b: f64, eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssumptionReport {
    pub m2_finite: bool,
    pub clt_ok: bool,
    pub centered: bool,
}

/// A validated jump intensity measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpLaw {
    family: JumpFamily,
    total_rate: f64,
}

impl JumpLaw {
    pub fn new(family: JumpFamily) -> Result<Self> {
        validate(&family)?;
        let mut law = JumpLaw {
            family,
            total_rate: 0.0,
        };
        law.total_rate = law.raw_moment(0.0, false);
        let m2 = law.moment_m(2.0);
        if !(m2 > 0.0 && m2.is_finite()) {
            return Err(Error::InvalidLaw(format!("m2 must lie in (0, inf), got {m2}")));
        }
        if !(law.total_rate > 0.0) {
            return Err(Error::InvalidLaw("total rate must be positive".into()));
        }
        Ok(law)
    }

    pub fn symmetric_two_point(magnitude: f64, rate: f64) -> Result<Self> {
        Self::new(JumpFamily::SymmetricTwoPoint { magnitude, rate })
    }

    /// The same jump distribution with every intensity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!("intensity factor must be positive, got {factor}")));
        }
        let family = match self.family.clone() {
            JumpFamily::SymmetricTwoPoint { magnitude, rate } => {
                JumpFamily::SymmetricTwoPoint { magnitude, rate: rate * factor }
            }
            JumpFamily::CenteredTwoPoint { up, down, p_up, rate } => {
                JumpFamily::CenteredTwoPoint { up, down, p_up, rate: rate * factor }
            }
            JumpFamily::Discrete { atoms } => JumpFamily::Discrete {
                atoms: atoms.into_iter().map(|(z, l)| (z, l * factor)).collect(),
            },
            JumpFamily::PowerDensity { c1, exp_a, c2, exp_b, eps } => JumpFamily::PowerDensity {
                c1: c1 * factor,
                exp_a,
                c2: c2 * factor,
                exp_b,
                eps,
            },
        };
        Self::new(family)
    }

    pub fn family(&self) -> &JumpFamily {
        &self.family
    }

    /// `Λ = nu(R_0)` after any cutoff. May be `+inf` for an uncut power density,
    /// in which case the law cannot be simulated.
    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    /// `m_p = ∫ |z|^p nu(dz)`.
    pub fn moment_m(&self, p: f64) -> f64 {
        self.raw_moment(p, false)
    }

    /// `M_p = ∫_{|z|>1} |z|^p nu(dz)`.
    pub fn tail_moment(&self, p: f64) -> f64 {
        self.raw_moment(p, true)
    }

    /// `∫ z nu(dz)`.
    pub fn mean_jump(&self) -> Result<f64> {
        if !self.moment_m(1.0).is_finite() {
            return Err(Error::DivergentFirstMoment);
        }
        Ok(match &self.family {
            JumpFamily::SymmetricTwoPoint { .. } | JumpFamily::PowerDensity { .. } => 0.0,
            JumpFamily::CenteredTwoPoint { up, down, p_up, rate } => {
                rate * (p_up * up - (1.0 - p_up) * down)
            }
            JumpFamily::Discrete { atoms } => atoms.iter().map(|(z, l)| z * l).sum(),
        })
    }

    /// True when the mean jump vanishes up to rounding of the defining rates.
    pub fn is_centered(&self) -> bool {
        match self.mean_jump() {
            Ok(mean) => mean.abs() <= CENTERING_TOL * self.moment_m(1.0),
            Err(_) => false,
        }
    }

    /// Errors unless the law can drive the exact solver.
    pub fn ensure_centered(&self) -> Result<()> {
        let mean = self.mean_jump()?;
        if self.is_centered() {
            Ok(())
        } else {
            Err(Error::NonCenteredLaw(mean))
        }
    }

    /// `∫_{|z|<eps} z^2 nu(dz)`: the noise variance discarded by the small-jump
    /// cutoff. Zero for every family except a cut power density.
    pub fn truncated_variance(&self) -> f64 {
        match self.family {
            JumpFamily::PowerDensity { c1, exp_a, eps, .. } if eps > 0.0 && c1 > 0.0 => {
                2.0 * c1 * eps.powf(2.0 - exp_a) / (2.0 - exp_a)
            }
            _ => 0.0,
        }
    }

    pub fn check_assumptions(&self, alpha: f64) -> AssumptionReport {
        let m2 = self.moment_m(2.0);
        AssumptionReport {
            m2_finite: m2.is_finite() && m2 > 0.0,
            clt_ok: self.moment_m(2.0 + 2.0 * alpha).is_finite()
                && self.moment_m(1.0 + alpha).is_finite(),
            centered: self.is_centered(),
        }
    }

    /// Draws one jump from `nu / Λ`.
    ///
    /// # Panics
    ///
    /// If the law has infinite activity.
    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        assert!(self.total_rate.is_finite(), "cannot sample an infinite-activity law");
        match &self.family {
            JumpFamily::SymmetricTwoPoint { magnitude, .. } => {
                if rng.random::<bool>() {
                    *magnitude
                } else {
                    -magnitude
                }
            }
            JumpFamily::CenteredTwoPoint { up, down, p_up, .. } => {
                if rng.random::<f64>() < *p_up {
                    *up
                } else {
                    -down
                }
            }
            JumpFamily::Discrete { atoms } => {
                let target = rng.random::<f64>() * self.total_rate;
                let mut acc = 0.0;
                for (z, rate) in atoms {
                    acc += rate;
                    if target < acc {
                        return *z;
                    }
                }
                atoms.last().map(|(z, _)| *z).expect("validated non-empty")
            }
            JumpFamily::PowerDensity { c1, exp_a, exp_b, eps, .. } => {
                let small_rate = small_piece_moment(*c1, *exp_a, *eps, 0.0);
                let magnitude = if rng.random::<f64>() * self.total_rate < small_rate {
                    sample_small_magnitude(*exp_a, *eps, rng)
                } else {
                    // Pareto tail on (1, inf); 1 - u lies in (0, 1].
                    let u: f64 = rng.random();
                    (1.0 - u).powf(-1.0 / exp_b)
                };
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
        }
    }

    fn raw_moment(&self, p: f64, tail_only: bool) -> f64 {
        match &self.family {
            JumpFamily::SymmetricTwoPoint { magnitude, rate } => {
                if tail_only && *magnitude <= 1.0 {
                    0.0
                } else {
                    rate * magnitude.powf(p)
                }
            }
            JumpFamily::CenteredTwoPoint { up, down, p_up, rate } => {
                let keep = |x: f64| !tail_only || x > 1.0;
                let mut m = 0.0;
                if keep(*up) {
                    m += rate * p_up * up.powf(p);
                }
                if keep(*down) {
                    m += rate * (1.0 - p_up) * down.powf(p);
                }
                m
            }
            JumpFamily::Discrete { atoms } => atoms
                .iter()
                .filter(|(z, _)| !tail_only || z.abs() > 1.0)
                .map(|(z, rate)| rate * z.abs().powf(p))
                .sum(),
            JumpFamily::PowerDensity { c1, exp_a, c2, exp_b, eps } => {
                let tail = tail_piece_moment(*c2, *exp_b, p);
                if tail_only {
                    tail
                } else {
                    small_piece_moment(*c1, *exp_a, *eps, p) + tail
                }
            }
        }
    }
}

/// `2 c1 ∫_eps^1 z^(p-a-1) dz`.
fn small_piece_moment(c1: f64, a: f64, eps: f64, p: f64) -> f64 {
    if c1 == 0.0 {
        return 0.0;
    }
    let k = p - a;
    if eps == 0.0 {
        return if k > 0.0 { 2.0 * c1 / k } else { f64::INFINITY };
    }
    if k == 0.0 {
        -2.0 * c1 * eps.ln()
    } else {
        2.0 * c1 * (1.0 - eps.powf(k)) / k
    }
}

/// `2 c2 ∫_1^inf z^(p-b-1) dz`.
fn tail_piece_moment(c2: f64, b: f64, p: f64) -> f64 {
    if c2 == 0.0 {
        return 0.0;
    }
    if p < b {
        2.0 * c2 / (b - p)
    } else {
        f64::INFINITY
    }
}

/// Inverse-CDF draw from the density proportional to `z^(-a-1)` on `[eps, 1]`.
fn sample_small_magnitude<R: Rng + ?Sized>(a: f64, eps: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let z = if a == 0.0 {
        (eps.ln() * (1.0 - u)).exp()
    } else {
        let lo = eps.powf(-a);
        (lo - u * (lo - 1.0)).powf(-1.0 / a)
    };
    // eps^(-a) overflow or u landing exactly on the excluded end.
    if z > 0.0 {
        z
    } else {
        eps.max(f64::MIN_POSITIVE)
    }
}

fn validate(family: &JumpFamily) -> Result<()> {
    let bad = |msg: &str| Err(Error::InvalidLaw(msg.to_string()));
    let pos = |x: f64| x > 0.0 && x.is_finite();
    match family {
        JumpFamily::SymmetricTwoPoint { magnitude, rate } => {
            if !pos(*magnitude) || !pos(*rate) {
                return bad("symmetric two-point law needs a > 0 and lambda > 0");
            }
        }
        JumpFamily::CenteredTwoPoint { up, down, p_up, rate } => {
            if !pos(*up) || !pos(*down) || !pos(*rate) || !(*p_up > 0.0 && *p_up < 1.0) {
                return bad("centered two-point law needs a+, a-, lambda > 0 and p in (0,1)");
            }
            let drift = p_up * up - (1.0 - p_up) * down;
            if drift.abs() > CENTERING_TOL * (p_up * up + (1.0 - p_up) * down) {
                return bad("centered two-point law must satisfy p*a+ = (1-p)*a-");
            }
        }
        JumpFamily::Discrete { atoms } => {
            if atoms.is_empty() {
                return bad("discrete law needs at least one atom");
            }
            for (z, rate) in atoms {
                if *z == 0.0 || !z.is_finite() || !pos(*rate) {
                    return bad("discrete atoms need z != 0 and rate > 0");
                }
            }
        }
        JumpFamily::PowerDensity { c1, exp_a, c2, exp_b, eps } => {
            if !(*c1 >= 0.0 && *c2 >= 0.0 && c1.is_finite() && c2.is_finite()) {
                return bad("power density needs c1, c2 >= 0");
            }
            if *c1 == 0.0 && *c2 == 0.0 {
                return bad("power density needs c1 + c2 > 0");
            }
            if !(*exp_a < 2.0) || !(*exp_b > 0.0) {
                return bad("power density needs a < 2 and b > 0");
            }
            if !(*eps >= 0.0 && *eps < 1.0) {
                return bad("power density cutoff must satisfy 0 <= eps < 1");
            }
        }
    }
    Ok(())
}
