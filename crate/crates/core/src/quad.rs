//! Adaptive composite Simpson quadrature with user-supplied breakpoints.
//!
//! Most integrands in this crate are built from indicator propagators and are
//! piecewise polynomial in each variable. Splitting at the breakpoints makes
//! Simpson's rule exact on every piece (up to cubics), so the adaptive loop
//! terminates at the first level there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Absolute tolerance for the whole integral.
    pub abs_tol: f64,
    /// Maximum bisection depth per breakpoint interval.
    pub max_depth: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_depth: 40,
        }
    }
}

const ENDPOINT_NUDGE: f64 = 1e-13;

/// Integrates `f` over `[a, b]`, splitting first at every breakpoint that
/// falls strictly inside the interval.
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite integration range [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, breakpoints, cfg).map(|v| -v);
    }

    let mut nodes: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p > a && *p < b)
        .collect();
    nodes.push(a);
    nodes.push(b);
    nodes.sort_by(|x, y| x.total_cmp(y));
    nodes.dedup();

    let width = b - a;
    let mut total = 0.0;
    for w in nodes.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let tol = cfg.abs_tol * (hi - lo) / width;
        total += simpson_interval(&f, lo, hi, tol, cfg.max_depth)?;
    }
    Ok(total)
}

fn simpson_interval<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    // Integrands may jump at breakpoints; sample the one-sided limits from
    // inside the piece, far enough in to survive rounding of the breakpoint.
    let nudge = ENDPOINT_NUDGE * a.abs().max(b.abs()).max(b - a);
    let fa = f(a + nudge);
    let fb = f(b - nudge);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let refined = left + right;
    let diff = refined - whole;
    if !diff.is_finite() {
        return Err(Error::QuadratureNotConverged { a, b });
    }
    // Below this floor successive refinements only differ by rounding.
    let floor = 64.0 * f64::EPSILON * refined.abs();
    if diff.abs() <= 15.0 * tol.max(floor) {
        return Ok(refined + diff / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureNotConverged { a, b });
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}
