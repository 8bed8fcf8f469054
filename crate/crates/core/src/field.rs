//! Wave propagator geometry and Poisson atom clouds.
//!
//! The one-dimensional wave propagator is `G_t(x) = 1/2` on the open light
//! cone `|x| < t` and zero elsewhere (in particular for `t <= 0`). Simulation
//! domains are symmetric trapezoids in `(s, y)` that are closed under taking
//! backward light cones, so every atom that can influence a target point is
//! inside the window.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::JumpLaw;
use crate::quad::{self, QuadConfig};

/// Slack when checking that a cone fits inside a window built for it.
const COVER_SLACK: f64 = 1e-12;

/// Fundamental solution of the 1D wave equation.
#[inline]
pub fn green(t: f64, x: f64) -> f64 {
    if t > 0.0 && x.abs() < t {
        0.5
    } else {
        0.0
    }
}

/// `∫_{-R}^{R} G_{t-r}(x - y) dx`: half the length of `[-R, R] ∩ (y-(t-r), y+(t-r))`.
#[inline]
pub fn phi(t: f64, radius: f64, r: f64, y: f64) -> f64 {
    if t <= r {
        return 0.0;
    }
    let h = t - r;
    let lo = (-radius).max(y - h);
    let hi = radius.min(y + h);
    if hi > lo {
        0.5 * (hi - lo)
    } else {
        0.0
    }
}

/// Breakpoints in `y` of `phi(t, R, r, ·)`.
pub fn phi_breakpoints(t: f64, radius: f64, r: f64) -> [f64; 4] {
    let h = (t - r).max(0.0);
    [-radius - h, -radius + h, radius - h, radius + h]
}

/// Symmetric trapezoid `{(s, y) : 0 <= s <= t_max, |y| <= base + (t_max - s)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeWindow {
    t_max: f64,
    base_half_width: f64,
}

impl SpaceTimeWindow {
    pub fn new(t_max: f64, base_half_width: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidWindow(format!("t_max must be positive, got {t_max}")));
        }
        if !(base_half_width >= 0.0 && base_half_width.is_finite()) {
            return Err(Error::InvalidWindow(format!(
                "base half-width must be non-negative, got {base_half_width}"
            )));
        }
        Ok(Self { t_max, base_half_width })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn base_half_width(&self) -> f64 {
        self.base_half_width
    }

    /// Spatial half-width at time `s`.
    pub fn half_width_at(&self, s: f64) -> f64 {
        self.base_half_width + (self.t_max - s)
    }

    pub fn area(&self) -> f64 {
        2.0 * self.base_half_width * self.t_max + self.t_max * self.t_max
    }

    pub fn contains(&self, s: f64, y: f64) -> bool {
        s >= 0.0 && s <= self.t_max && y.abs() <= self.half_width_at(s)
    }

    /// Whether the backward light cone of `(t, x)` lies inside the window.
    pub fn covers_point(&self, t: f64, x: f64) -> bool {
        let scale = 1.0 + self.t_max + self.base_half_width;
        t >= 0.0
            && t <= self.t_max * (1.0 + COVER_SLACK)
            && x.abs() + t <= self.base_half_width + self.t_max + COVER_SLACK * scale
    }

    /// Whether the support of `phi(t, R, ·, ·)` lies inside the window.
    pub fn covers_average(&self, t: f64, radius: f64) -> bool {
        self.covers_point(t, radius)
    }
}

/// Evaluation targets used to size a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Target {
    /// Point evaluation of `u(t, x)`.
    Point { t: f64, x: f64 },
    /// Spatial average over `[-R, R]` at time `t`.
    Average { t: f64, radius: f64 },
}

impl Target {
    fn time_and_reach(&self) -> (f64, f64) {
        match *self {
            Target::Point { t, x } => (t, x.abs()),
            Target::Average { t, radius } => (t, radius),
        }
    }
}

/// Smallest symmetric trapezoid containing the backward cone of every point
/// target and the support of `phi` for every average target.
pub fn window_for_targets(targets: &[Target]) -> Result<SpaceTimeWindow> {
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    let mut t_max: f64 = 0.0;
    for target in targets {
        let (t, reach) = target.time_and_reach();
        if !(t >= 0.0 && t.is_finite() && reach.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid target {target:?}")));
        }
        if let Target::Average { radius, .. } = target {
            if !(*radius > 0.0) {
                return Err(Error::InvalidArgument(format!("radius must be positive in {target:?}")));
            }
        }
        t_max = t_max.max(t);
    }
    if t_max == 0.0 {
        return Err(Error::InvalidArgument("at least one target time must be positive".into()));
    }
    // |y| < reach + (t - s) must hold inside base + (t_max - s).
    let base = targets
        .iter()
        .map(|target| {
            let (t, reach) = target.time_and_reach();
            reach + t - t_max
        })
        .fold(0.0, f64::max);
    SpaceTimeWindow::new(t_max, base)
}

/// A point `(s, y, z)` of the Poisson random measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub s: f64,
    pub y: f64,
    pub z: f64,
}

/// Realisation of the Poisson random measure inside a window, sorted by time.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomCloud {
    window: SpaceTimeWindow,
    atoms: Vec<Atom>,
}

impl AtomCloud {
    pub fn empty(window: SpaceTimeWindow) -> Self {
        Self { window, atoms: Vec::new() }
    }

    /// Builds a cloud from arbitrary atoms; sorts them and rejects ties.
    pub fn from_atoms(window: SpaceTimeWindow, mut atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if !window.contains(a.s, a.y) {
                return Err(Error::OutsideWindow { t: a.s, x: a.y });
            }
            if a.z == 0.0 || !a.z.is_finite() {
                return Err(Error::InvalidArgument(format!("atom jump must be finite and non-zero: {a:?}")));
            }
        }
        atoms.sort_by(|a, b| a.s.total_cmp(&b.s));
        if let Some(w) = atoms.windows(2).find(|w| w[0].s == w[1].s) {
            return Err(Error::TiedTimes(w[0].s));
        }
        Ok(Self { window, atoms })
    }

    pub fn window(&self) -> &SpaceTimeWindow {
        &self.window
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// A copy of this cloud with one extra atom.
    pub fn with_atom(&self, atom: Atom) -> Result<Self> {
        let mut atoms = self.atoms.clone();
        atoms.push(atom);
        Self::from_atoms(self.window, atoms)
    }
}

/// Draws a uniform point `(s, y)` from the trapezoid.
fn sample_position<R: Rng + ?Sized>(window: &SpaceTimeWindow, rng: &mut R) -> (f64, f64) {
    let t_max = window.t_max;
    let base = window.base_half_width;
    // w = t_max - s has density proportional to base + w on [0, t_max].
    let u: f64 = rng.random();
    let mass = base * t_max + 0.5 * t_max * t_max;
    let w = (2.0 * u * mass) / (base + (base * base + 2.0 * u * mass).sqrt());
    let s = (t_max - w).clamp(0.0, t_max);
    let half = window.half_width_at(s);
    let y = (2.0 * rng.random::<f64>() - 1.0) * half;
    (s, y)
}

/// Samples the Poisson random measure with intensity `ds dy nu(dz)` on `window`.
pub fn sample_cloud<R: Rng + ?Sized>(window: &SpaceTimeWindow, law: &JumpLaw, rng: &mut R) -> Result<AtomCloud> {
    let rate = law.total_rate();
    if !rate.is_finite() {
        return Err(Error::InfiniteActivity);
    }
    let mean = rate * window.area();
    let count = if mean > 0.0 {
        let poisson = Poisson::new(mean).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        poisson.sample(rng) as usize
    } else {
        0
    };

    let mut atoms: Vec<Atom> = (0..count)
        .map(|_| {
            let (s, y) = sample_position(window, rng);
            Atom { s, y, z: law.sample_jump(rng) }
        })
        .collect();

    // Re-draw the later-sampled member of any time tie until the order is strict.
    loop {
        let mut order: Vec<usize> = (0..atoms.len()).collect();
        order.sort_by(|&i, &j| atoms[i].s.total_cmp(&atoms[j].s).then(i.cmp(&j)));
        let tie = order
            .windows(2)
            .find(|w| atoms[w[0]].s == atoms[w[1]].s)
            .map(|w| w[0].max(w[1]));
        match tie {
            Some(k) => {
                let (s, y) = sample_position(window, rng);
                atoms[k].s = s;
                atoms[k].y = y;
            }
            None => {
                let sorted = order.into_iter().map(|i| atoms[i]).collect();
                return Ok(AtomCloud { window: *window, atoms: sorted });
            }
        }
    }
}

/// One quadrature value next to the closed-form value or bound it is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelCheck {
    pub value: f64,
    pub reference: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelIdentityReport {
    pub t: f64,
    pub s: f64,
    pub radius: f64,
    pub r: f64,
    /// `∫ (phi_t - phi_s)(r, y) dy` against `2 (t - s) R`.
    pub difference_integral: KernelCheck,
    /// `∫_s^t ∫ phi_t^2` against `4/3 R (t - s)^3`.
    pub phi_sq_integral: KernelCheck,
    /// `∫_s^t ∫ phi_t^4` against `2 R^2 (t - s)^4`.
    pub phi_fourth_integral: KernelCheck,
}

/// Quadrature checks of the `phi` kernel identities for `0 <= s <= t`, `R > 0`
/// and `r` in `(0, s]` (ignored when `s == 0`).
pub fn kernel_identity_report(t: f64, s: f64, radius: f64, r: f64, cfg: &QuadConfig) -> Result<KernelIdentityReport> {
    if !(s >= 0.0 && t >= s && radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= s <= t and R > 0, got t={t} s={s} R={radius}"
        )));
    }
    if s > 0.0 && !(r > 0.0 && r <= s) {
        return Err(Error::InvalidArgument(format!("need r in (0, s], got r={r}")));
    }

    let difference = if t == s {
        0.0
    } else {
        let mut bps = phi_breakpoints(t, radius, r).to_vec();
        bps.extend(phi_breakpoints(s, radius, r));
        let reach = radius + (t - r);
        quad::integrate(|y| phi(t, radius, r, y) - phi(s, radius, r, y), -reach, reach, &bps, cfg)?
    };
    let phi_sq = phi_power_integral(t, s, radius, 2, cfg)?;
    let phi_fourth = phi_power_integral(t, s, radius, 4, cfg)?;

    let expected = 2.0 * (t - s) * radius;
    let sq_bound = 4.0 / 3.0 * radius * (t - s).powi(3);
    let fourth_bound = 2.0 * radius * radius * (t - s).powi(4);
    let bound_slack = |b: f64| cfg.abs_tol + 1e-12 * b;
    Ok(KernelIdentityReport {
        t,
        s,
        radius,
        r,
        difference_integral: KernelCheck {
            value: difference,
            reference: expected,
            holds: (difference - expected).abs() <= cfg.abs_tol.max(1e-14 * expected),
        },
        phi_sq_integral: KernelCheck {
            value: phi_sq,
            reference: sq_bound,
            holds: phi_sq <= sq_bound + bound_slack(sq_bound),
        },
        phi_fourth_integral: KernelCheck {
            value: phi_fourth,
            reference: fourth_bound,
            holds: phi_fourth <= fourth_bound + bound_slack(fourth_bound),
        },
    })
}

/// `∫_s^t ∫_R phi_{t,R}(r, y)^k dy dr` by nested breakpoint quadrature.
pub fn phi_power_integral(t: f64, s: f64, radius: f64, k: i32, cfg: &QuadConfig) -> Result<f64> {
    if t <= s {
        return Ok(0.0);
    }
    let inner_cfg = QuadConfig { abs_tol: cfg.abs_tol / (t - s), ..*cfg };
    let inner = |r: f64| -> f64 {
        let reach = radius + (t - r);
        quad::integrate(
            |y| phi(t, radius, r, y).powi(k),
            -reach,
            reach,
            &phi_breakpoints(t, radius, r),
            &inner_cfg,
        )
        .unwrap_or(f64::NAN)
    };
    // The breakpoint pattern in y changes order when t - r crosses R.
    quad::integrate(inner, s, t, &[t - radius], cfg)
}
