//! Exact path-wise solver.
//!
//! On a finite, time-ordered atom cloud with a centered jump law the mild
//! equation reduces to
//!
//! ```text
//! u_i = 1 + Σ_{j < i, |y_i - y_j| < s_i - s_j} (1/2) z_j u_j
//! ```
//!
//! and `u(t, x)` is the same sum over atoms in the open backward cone of
//! `(t, x)`. The delta-initial-velocity solution `v^{(r,y,z)}` obeys the same
//! recursion started from `G_{t-r}(x-y) z` instead of `1`.
//!
//! Two summation paths are provided: a naive time-ordered scan, and a scan over
//! a y-sorted index that only visits atoms inside the widest possible cone.
//! The indexed path re-sorts its candidates by time before summing so both
//! paths produce bitwise identical results.

use crate::error::{Error, Result};
use crate::field::{green, phi, Atom, AtomCloud};
use crate::levy::JumpLaw;

/// Cloud size at which [`solve`] switches to the y-indexed scan.
pub const DEFAULT_INDEX_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    pub index_threshold: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { index_threshold: DEFAULT_INDEX_THRESHOLD }
    }
}

/// `u` at every atom of a cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution<'a> {
    cloud: &'a AtomCloud,
    u_at_atoms: Vec<f64>,
}

/// `v^{(r,y,z)}` at every atom after the source time `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSolution<'a> {
    source: Atom,
    cloud: &'a AtomCloud,
    /// Index of the first atom with `s > r`.
    start: usize,
    v_at_atoms: Vec<f64>,
}

/// Atoms sorted by spatial coordinate, for the indexed scan.
struct SpatialIndex {
    order: Vec<usize>,
    ys: Vec<f64>,
}

impl SpatialIndex {
    fn new(atoms: &[Atom]) -> Self {
        let mut order: Vec<usize> = (0..atoms.len()).collect();
        order.sort_by(|&a, &b| atoms[a].y.total_cmp(&atoms[b].y).then(a.cmp(&b)));
        let ys = order.iter().map(|&k| atoms[k].y).collect();
        Self { order, ys }
    }

    /// Atom indices with `lo < y < hi`, in time order.
    fn candidates(&self, lo: f64, hi: f64, buf: &mut Vec<usize>) {
        buf.clear();
        let first = self.ys.partition_point(|&y| y <= lo);
        let last = self.ys.partition_point(|&y| y < hi);
        if first < last {
            buf.extend_from_slice(&self.order[first..last]);
            buf.sort_unstable();
        }
    }
}

/// Sum of `(1/2) z_j w_j` over atoms `j` in `from..to` inside the open backward
/// cone of `(t, x)`. `w` is indexed like `atoms[from..]`.
#[inline]
fn cone_sum(atoms: &[Atom], w: &[f64], from: usize, to: usize, t: f64, x: f64) -> f64 {
    let mut acc = 0.0;
    for j in from..to {
        let a = &atoms[j];
        if (x - a.y).abs() < t - a.s {
            acc += 0.5 * a.z * w[j - from];
        }
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn cone_sum_indexed(
    atoms: &[Atom],
    w: &[f64],
    from: usize,
    to: usize,
    t: f64,
    x: f64,
    index: &SpatialIndex,
    buf: &mut Vec<usize>,
) -> f64 {
    let reach = t - atoms.get(from).map_or(t, |a| a.s).min(t);
    index.candidates(x - reach, x + reach, buf);
    let mut acc = 0.0;
    for &j in buf.iter() {
        if j < from || j >= to {
            continue;
        }
        let a = &atoms[j];
        if (x - a.y).abs() < t - a.s {
            acc += 0.5 * a.z * w[j - from];
        }
    }
    acc
}

/// Solves the atom recursion with default options.
pub fn solve<'a>(cloud: &'a AtomCloud, law: &JumpLaw) -> Result<FieldSolution<'a>> {
    solve_with(cloud, law, &SolverOptions::default())
}

pub fn solve_with<'a>(cloud: &'a AtomCloud, law: &JumpLaw, opts: &SolverOptions) -> Result<FieldSolution<'a>> {
    law.ensure_centered()?;
    let atoms = cloud.atoms();
    let mut u = Vec::with_capacity(atoms.len());
    if atoms.len() >= opts.index_threshold.max(1) {
        let index = SpatialIndex::new(atoms);
        let mut buf = Vec::new();
        for (i, a) in atoms.iter().enumerate() {
            let v = 1.0 + cone_sum_indexed(atoms, &u, 0, i, a.s, a.y, &index, &mut buf);
            u.push(v);
        }
    } else {
        for (i, a) in atoms.iter().enumerate() {
            let v = 1.0 + cone_sum(atoms, &u, 0, i, a.s, a.y);
            u.push(v);
        }
    }
    Ok(FieldSolution { cloud, u_at_atoms: u })
}

impl<'a> FieldSolution<'a> {
    pub fn cloud(&self) -> &'a AtomCloud {
        self.cloud
    }

    pub fn u_at_atoms(&self) -> &[f64] {
        &self.u_at_atoms
    }

    /// `u(t, x) = 1 + Σ_{s_i < t, |x - y_i| < t - s_i} (1/2) z_i u_i`.
    pub fn eval_u(&self, t: f64, x: f64) -> Result<f64> {
        if !self.cloud.window().covers_point(t, x) {
            return Err(Error::OutsideWindow { t, x });
        }
        let atoms = self.cloud.atoms();
        let end = atoms.partition_point(|a| a.s < t);
        Ok(1.0 + cone_sum(atoms, &self.u_at_atoms, 0, end, t, x))
    }

    /// `F_R(t) = ∫_{-R}^{R} (u(t, x) - 1) dx = Σ_i phi(t, R, s_i, y_i) z_i u_i`.
    pub fn spatial_average(&self, t: f64, radius: f64) -> Result<f64> {
        if !self.cloud.window().covers_average(t, radius) {
            return Err(Error::OutsideWindow { t, x: radius });
        }
        let atoms = self.cloud.atoms();
        let end = atoms.partition_point(|a| a.s < t);
        Ok(atoms[..end]
            .iter()
            .zip(&self.u_at_atoms)
            .map(|(a, u)| phi(t, radius, a.s, a.y) * a.z * u)
            .sum())
    }

    /// Same quantity as [`Self::spatial_average`], integrating `u(t, ·) - 1`
    /// piece by piece. `u(t, ·)` is constant between the cone edges
    /// `y_i ± (t - s_i)`, so evaluating at piece midpoints is exact.
    pub fn spatial_average_by_quadrature(&self, t: f64, radius: f64) -> Result<f64> {
        if !self.cloud.window().covers_average(t, radius) {
            return Err(Error::OutsideWindow { t, x: radius });
        }
        let mut nodes = vec![-radius, radius];
        for a in self.cloud.atoms().iter().take_while(|a| a.s < t) {
            let h = t - a.s;
            for edge in [a.y - h, a.y + h] {
                if edge > -radius && edge < radius {
                    nodes.push(edge);
                }
            }
        }
        nodes.sort_by(|a, b| a.total_cmp(b));
        nodes.dedup();
        let mut total = 0.0;
        for w in nodes.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            total += (self.eval_u(t, mid)? - 1.0) * (w[1] - w[0]);
        }
        Ok(total)
    }
}

/// Solves the delta-initial-velocity equation with source `(r, y, z)`.
pub fn solve_delta<'a>(cloud: &'a AtomCloud, law: &JumpLaw, r: f64, y: f64, z: f64) -> Result<DeltaSolution<'a>> {
    law.ensure_centered()?;
    if !(r >= 0.0 && r.is_finite() && y.is_finite() && z.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid delta source ({r}, {y}, {z})")));
    }
    let atoms = cloud.atoms();
    let start = atoms.partition_point(|a| a.s <= r);
    let mut v: Vec<f64> = Vec::with_capacity(atoms.len() - start);
    for i in start..atoms.len() {
        let a = &atoms[i];
        // Outside the forward cone of the source v vanishes identically.
        let value = if (a.y - y).abs() < a.s - r {
            green(a.s - r, a.y - y) * z + cone_sum(atoms, &v, start, i, a.s, a.y)
        } else {
            0.0
        };
        v.push(value);
    }
    Ok(DeltaSolution {
        source: Atom { s: r, y, z },
        cloud,
        start,
        v_at_atoms: v,
    })
}

impl<'a> DeltaSolution<'a> {
    pub fn source(&self) -> Atom {
        self.source
    }

    /// Values for atoms after the source time, aligned with
    /// `cloud.atoms()[self.first_atom()..]`.
    pub fn v_at_atoms(&self) -> &[f64] {
        &self.v_at_atoms
    }

    pub fn first_atom(&self) -> usize {
        self.start
    }

    /// `v(t, x) = G_{t-r}(x-y) z + Σ_{r < s_j < t, cone} (1/2) z_j v_j`.
    pub fn eval_v(&self, t: f64, x: f64) -> Result<f64> {
        if !self.cloud.window().covers_point(t, x) {
            return Err(Error::OutsideWindow { t, x });
        }
        let Atom { s: r, y, z } = self.source;
        if !((x - y).abs() < t - r) {
            return Ok(0.0);
        }
        let atoms = self.cloud.atoms();
        let end = atoms.partition_point(|a| a.s < t);
        Ok(green(t - r, x - y) * z + cone_sum(atoms, &self.v_at_atoms, self.start, end.max(self.start), t, x))
    }

    /// `G_{t-r}(x-y) v(t, x) - v(t, x) / 2`, which vanishes because `v` is
    /// supported where the propagator equals one half.
    pub fn half_identity_residual(&self, t: f64, x: f64) -> Result<f64> {
        let v = self.eval_v(t, x)?;
        Ok(green(t - self.source.s, x - self.source.y) * v - 0.5 * v)
    }
}

fn check_perturbation(cloud: &AtomCloud, xi: &Atom) -> Result<()> {
    if !cloud.window().contains(xi.s, xi.y) {
        return Err(Error::OutsideWindow { t: xi.s, x: xi.y });
    }
    if xi.z == 0.0 || !xi.z.is_finite() {
        return Err(Error::InvalidArgument(format!("perturbation jump must be non-zero: {xi:?}")));
    }
    Ok(())
}

/// `u^{N + δ_ξ}(t, x) - u^N(t, x)`, computed by re-solving the augmented cloud.
pub fn add_one_cost(cloud: &AtomCloud, law: &JumpLaw, xi: Atom, t: f64, x: f64) -> Result<f64> {
    law.ensure_centered()?;
    check_perturbation(cloud, &xi)?;
    let augmented = cloud.with_atom(xi)?;
    let base = solve(cloud, law)?.eval_u(t, x)?;
    let bumped = solve(&augmented, law)?.eval_u(t, x)?;
    Ok(bumped - base)
}

/// `u(r, y) v^{(r,y,z)}(t, x)` on the unperturbed cloud; equals
/// [`add_one_cost`] in exact arithmetic.
pub fn add_one_cost_factorized(cloud: &AtomCloud, law: &JumpLaw, xi: Atom, t: f64, x: f64) -> Result<f64> {
    check_perturbation(cloud, &xi)?;
    let sol = solve(cloud, law)?;
    let delta = solve_delta(cloud, law, xi.s, xi.y, xi.z)?;
    Ok(sol.eval_u(xi.s, xi.y)? * delta.eval_v(t, x)?)
}

fn time_ordered(xi1: Atom, xi2: Atom) -> Result<(Atom, Atom)> {
    if xi1.s == xi2.s {
        return Err(Error::TiedTimes(xi1.s));
    }
    Ok(if xi1.s < xi2.s { (xi1, xi2) } else { (xi2, xi1) })
}

/// Iterated difference `u^{N+δ1+δ2} - u^{N+δ1} - u^{N+δ2} + u^N` at `(t, x)`.
/// Arguments are put in time order first, so the result is symmetric bitwise.
pub fn add_two_cost(cloud: &AtomCloud, law: &JumpLaw, xi1: Atom, xi2: Atom, t: f64, x: f64) -> Result<f64> {
    law.ensure_centered()?;
    let (first, second) = time_ordered(xi1, xi2)?;
    check_perturbation(cloud, &first)?;
    check_perturbation(cloud, &second)?;
    let with_first = cloud.with_atom(first)?;
    let with_second = cloud.with_atom(second)?;
    let with_both = with_first.with_atom(second)?;
    let eval = |c: &AtomCloud| solve(c, law).and_then(|s| s.eval_u(t, x));
    Ok(eval(&with_both)? - eval(&with_first)? - eval(&with_second)? + eval(cloud)?)
}

/// `u(r1, y1) v^{ξ1}(r2, y2) v^{ξ2}(t, x)` with `r1 < r2`.
pub fn add_two_cost_factorized(cloud: &AtomCloud, law: &JumpLaw, xi1: Atom, xi2: Atom, t: f64, x: f64) -> Result<f64> {
    let (first, second) = time_ordered(xi1, xi2)?;
    check_perturbation(cloud, &first)?;
    check_perturbation(cloud, &second)?;
    let sol = solve(cloud, law)?;
    let v1 = solve_delta(cloud, law, first.s, first.y, first.z)?;
    let v2 = solve_delta(cloud, law, second.s, second.y, second.z)?;
    Ok(sol.eval_u(first.s, first.y)? * v1.eval_v(second.s, second.y)? * v2.eval_v(t, x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample_cloud, SpaceTimeWindow};
    use crate::levy::JumpFamily;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn law() -> JumpLaw {
        JumpLaw::symmetric_two_point(1.0, 1.0).unwrap()
    }

    fn window() -> SpaceTimeWindow {
        SpaceTimeWindow::new(2.0, 1.0).unwrap()
    }

    #[test]
    fn empty_cloud_gives_one() {
        let cloud = AtomCloud::empty(window());
        let sol = solve(&cloud, &law()).unwrap();
        for (t, x) in [(0.0, 0.0), (1.0, 0.3), (2.0, -1.0)] {
            assert_eq!(sol.eval_u(t, x).unwrap(), 1.0);
        }
        assert_eq!(sol.spatial_average(1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn single_atom() {
        let a = Atom { s: 0.5, y: 0.2, z: 0.8 };
        let cloud = AtomCloud::from_atoms(window(), vec![a]).unwrap();
        let sol = solve(&cloud, &law()).unwrap();
        assert_eq!(sol.u_at_atoms(), &[1.0]);
        assert_eq!(sol.eval_u(1.0, 0.3).unwrap(), 1.0 + 0.5 * 0.8);
        assert_eq!(sol.eval_u(1.0, 0.75).unwrap(), 1.0);
        assert_eq!(sol.eval_u(0.4, 0.2).unwrap(), 1.0);
        assert_eq!(sol.spatial_average(1.5, 1.0).unwrap(), phi(1.5, 1.0, 0.5, 0.2) * 0.8);
    }

    #[test]
    fn two_atoms_in_sequence() {
        let (z1, z2) = (0.8, -0.6);
        let cloud = AtomCloud::from_atoms(
            window(),
            vec![Atom { s: 0.2, y: 0.0, z: z1 }, Atom { s: 0.6, y: 0.1, z: z2 }],
        )
        .unwrap();
        let sol = solve(&cloud, &law()).unwrap();
        let u2 = 1.0 + 0.5 * z1;
        assert_eq!(sol.u_at_atoms()[1], u2);
        let expected = 1.0 + 0.5 * z1 + 0.5 * z2 * u2;
        assert!((sol.eval_u(1.0, 0.05).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn eval_matches_atom_value_just_after_it() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cloud = sample_cloud(&window(), &law(), &mut rng).unwrap();
        let sol = solve(&cloud, &law()).unwrap();
        for (i, a) in cloud.atoms().iter().enumerate() {
            let t = a.s + 1e-13;
            let v = sol.eval_u(t, a.y).unwrap();
            // The atom itself now sits inside the cone; remove its own term.
            let own = 0.5 * a.z * sol.u_at_atoms()[i];
            assert!((v - own - sol.u_at_atoms()[i]).abs() < 1e-12, "atom {i}");
        }
    }

    #[test]
    fn outside_window_is_rejected() {
        let cloud = AtomCloud::empty(window());
        let sol = solve(&cloud, &law()).unwrap();
        assert!(matches!(sol.eval_u(2.0, 1.5), Err(Error::OutsideWindow { .. })));
        assert!(matches!(sol.eval_u(2.5, 0.0), Err(Error::OutsideWindow { .. })));
        assert!(matches!(sol.spatial_average(1.0, 2.5), Err(Error::OutsideWindow { .. })));
    }

    #[test]
    fn non_centered_law_is_rejected() {
        let drift = JumpLaw::new(JumpFamily::Discrete { atoms: vec![(2.0, 1.0), (-1.0, 1.0)] }).unwrap();
        let cloud = AtomCloud::empty(window());
        assert!(matches!(solve(&cloud, &drift), Err(Error::NonCenteredLaw(_))));
        assert!(matches!(solve_delta(&cloud, &drift, 0.1, 0.0, 1.0), Err(Error::NonCenteredLaw(_))));
        let xi = Atom { s: 0.5, y: 0.0, z: 1.0 };
        assert!(matches!(add_one_cost(&cloud, &drift, xi, 1.0, 0.0), Err(Error::NonCenteredLaw(_))));
    }

    #[test]
    fn indexed_scan_matches_naive_bitwise() {
        let w = SpaceTimeWindow::new(3.0, 6.0).unwrap();
        let law = JumpLaw::symmetric_two_point(1.0, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let cloud = sample_cloud(&w, &law, &mut rng).unwrap();
            let naive = solve_with(&cloud, &law, &SolverOptions { index_threshold: usize::MAX }).unwrap();
            let indexed = solve_with(&cloud, &law, &SolverOptions { index_threshold: 0 }).unwrap();
            assert!(cloud.len() > 50);
            let a: Vec<u64> = naive.u_at_atoms().iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = indexed.u_at_atoms().iter().map(|v| v.to_bits()).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn delta_solution_basics() {
        let cloud = AtomCloud::empty(window());
        let d = solve_delta(&cloud, &law(), 0.5, 0.0, 2.0).unwrap();
        assert_eq!(d.eval_v(1.0, 0.2).unwrap(), 1.0);
        assert_eq!(d.eval_v(1.0, 0.5).unwrap(), 0.0);
        assert_eq!(d.eval_v(0.4, 0.0).unwrap(), 0.0);

        // One atom inside the forward cone of the source.
        let (z, z1) = (2.0, 0.6);
        let cloud = AtomCloud::from_atoms(window(), vec![Atom { s: 0.8, y: 0.1, z: z1 }]).unwrap();
        let d = solve_delta(&cloud, &law(), 0.5, 0.0, z).unwrap();
        assert_eq!(d.v_at_atoms(), &[0.5 * z]);
        let v = d.eval_v(1.2, 0.15).unwrap();
        assert!((v - (0.5 * z + 0.5 * z1 * 0.5 * z)).abs() < 1e-15);
    }

    #[test]
    fn delta_solution_is_linear_in_z() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cloud = sample_cloud(&window(), &law(), &mut rng).unwrap();
        let a = solve_delta(&cloud, &law(), 0.3, 0.1, 0.7).unwrap();
        let b = solve_delta(&cloud, &law(), 0.3, 0.1, 1.4).unwrap();
        for (x, y) in a.v_at_atoms().iter().zip(b.v_at_atoms()) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn delta_support_and_half_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cloud = sample_cloud(&window(), &law(), &mut rng).unwrap();
        let d = solve_delta(&cloud, &law(), 0.4, -0.2, 1.3).unwrap();
        for (a, v) in cloud.atoms()[d.first_atom()..].iter().zip(d.v_at_atoms()) {
            if (a.y + 0.2).abs() >= a.s - 0.4 {
                assert_eq!(*v, 0.0);
            }
        }
        for _ in 0..1000 {
            let t = rng.random_range(0.41..2.0);
            let x = rng.random_range(-1.0..1.0);
            assert_eq!(d.half_identity_residual(t, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn add_one_cost_cases() {
        let cloud = AtomCloud::empty(window());
        let xi = Atom { s: 0.5, y: 0.0, z: 1.5 };
        assert_eq!(add_one_cost(&cloud, &law(), xi, 1.0, 0.2).unwrap(), 0.5 * 1.5);
        assert_eq!(add_one_cost(&cloud, &law(), xi, 1.0, 0.6).unwrap(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let cloud = sample_cloud(&window(), &law(), &mut rng).unwrap();
        let xi = Atom { s: 0.7, y: 0.1, z: -1.0 };
        let direct = add_one_cost(&cloud, &law(), xi, 1.8, 0.2).unwrap();
        let fact = add_one_cost_factorized(&cloud, &law(), xi, 1.8, 0.2).unwrap();
        assert!((direct - fact).abs() <= 1e-12 * (1.0 + direct.abs()));
    }

    #[test]
    fn add_two_cost_symmetry_and_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let cloud = sample_cloud(&window(), &law(), &mut rng).unwrap();
        let a = Atom { s: 0.3, y: 0.0, z: 1.0 };
        let b = Atom { s: 0.9, y: 0.2, z: -1.0 };
        let ab = add_two_cost(&cloud, &law(), a, b, 1.9, 0.1).unwrap();
        let ba = add_two_cost(&cloud, &law(), b, a, 1.9, 0.1).unwrap();
        assert_eq!(ab.to_bits(), ba.to_bits());
        let fact = add_two_cost_factorized(&cloud, &law(), a, b, 1.9, 0.1).unwrap();
        assert!((ab - fact).abs() <= 1e-12 * (1.0 + ab.abs()));

        let tied = Atom { s: 0.3, y: 0.5, z: 1.0 };
        assert_eq!(add_two_cost(&cloud, &law(), a, tied, 1.9, 0.1), Err(Error::TiedTimes(0.3)));

        // Second source outside the forward cone of the first.
        let far = Atom { s: 0.5, y: 0.9, z: 1.0 };
        assert_eq!(add_two_cost(&cloud, &law(), a, far, 1.9, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn causality_of_later_atoms() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let cloud = sample_cloud(&window(), &law(), &mut rng).unwrap();
        let sol = solve(&cloud, &law()).unwrap();
        let xi = Atom { s: 1.1, y: 0.0, z: 1.0 };
        let aug = cloud.with_atom(xi).unwrap();
        let sol2 = solve(&aug, &law()).unwrap();
        let before = cloud.atoms().iter().take_while(|a| a.s <= xi.s).count();
        assert_eq!(&sol.u_at_atoms()[..before], &sol2.u_at_atoms()[..before]);
        for x in [-0.5, 0.0, 0.4] {
            assert_eq!(sol.eval_u(1.1, x).unwrap(), sol2.eval_u(1.1, x).unwrap());
        }
    }

    #[test]
    fn spatial_average_matches_quadrature() {
        let w = SpaceTimeWindow::new(1.0, 3.0).unwrap();
        let law = JumpLaw::symmetric_two_point(1.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let cloud = sample_cloud(&w, &law, &mut rng).unwrap();
            let sol = solve(&cloud, &law).unwrap();
            let fast = sol.spatial_average(1.0, 3.0).unwrap();
            let slow = sol.spatial_average_by_quadrature(1.0, 3.0).unwrap();
            assert!((fast - slow).abs() < 1e-9, "fast={fast} slow={slow}");
        }
    }
}
