//! Pullback attractor approximation and non-autonomous equilibria inside the
//! order interval spanned by the barrier equilibria.
//!
//! The scheme is constructive: push a finite seed net forward from
//! `t − d` for doubling depths `d` and stop once successive images agree in
//! Hausdorff semidistance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{Process, ProcessKind};
use crate::model::{BarrierSide, ModelSpec};
use crate::order::{in_cone, leq, OrderInterval, DEFAULT_ORDER_TOL, INTERVAL_TOL};
use crate::random::FieldSampler;
use crate::spectral::{DiscreteOperator, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetNorm {
    L2,
    #[serde(rename = "xhalf")]
    XHalf,
}

fn distance(op: &DiscreteOperator, a: &SpectralField, b: &SpectralField, norm: SetNorm) -> Result<f64> {
    let d = a - b;
    match norm {
        SetNorm::L2 => Ok(d.l2_norm()),
        SetNorm::XHalf => op.energy_norm(&d),
    }
}

/// `max_{a∈A} min_{b∈B} ‖a − b‖`; zero iff `A ⊆ B`, and not symmetric.
pub fn hausdorff_semidistance(op: &DiscreteOperator, a: &[SpectralField], b: &[SpectralField], norm: SetNorm) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut worst: f64 = 0.0;
    for x in a {
        let mut best = f64::INFINITY;
        for y in b {
            best = best.min(distance(op, x, y, norm)?);
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierSearch {
    pub h: f64,
    /// Stop once `‖T(h)z − z‖_{X^{1/2}} < tol`.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for BarrierSearch {
    fn default() -> Self {
        Self { h: 0.05, tol: 1e-10, max_steps: 200_000 }
    }
}

/// Fixed point of a barrier semigroup reached by forward iteration from `seed`.
pub fn barrier_fixed_point(
    op: &DiscreteOperator,
    model: &ModelSpec,
    side: BarrierSide,
    seed: &SpectralField,
    search: &BarrierSearch,
) -> Result<SpectralField> {
    let process = Process::barrier(side, op, model, search.h)?;
    let mut z = seed.clone();
    for _ in 0..search.max_steps {
        let next = process.apply(search.h, 0.0, &z)?;
        let change = op.energy_norm(&(&next - &z))?;
        z = next;
        if change < search.tol {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence(format!("{side:?} barrier did not settle within {} steps of {}", search.max_steps, search.h)))
}

/// The stationary barrier states `(φ_low, φ_high)` from a common positive seed,
/// verified to be ordered.
pub fn barrier_equilibria(op: &DiscreteOperator, model: &ModelSpec, seed: &SpectralField, search: &BarrierSearch) -> Result<OrderInterval> {
    let lo = barrier_fixed_point(op, model, BarrierSide::Lower, seed, search)?;
    let hi = barrier_fixed_point(op, model, BarrierSide::Upper, seed, search)?;
    OrderInterval::new(op.grid(), lo, hi)
}

/// `{S(t, t − depth)u₀ : u₀ ∈ seeds}`, one worker per seed.
pub fn pullback_orbit(process: &Process<'_>, t_eval: f64, depth: f64, seeds: &[SpectralField]) -> Result<Vec<SpectralField>> {
    if seeds.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(depth >= 0.0) {
        return Err(Error::InvalidSpan(format!("pullback depth {depth} must be nonnegative")));
    }
    seeds.par_iter().map(|u| process.apply(t_eval, t_eval - depth, u)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct AttractorApproximation {
    pub t_eval: f64,
    pub depths: Vec<f64>,
    pub sets: Vec<Vec<SpectralField>>,
    /// `dist(sets[j+1], sets[j])` in the configured norm.
    pub semidistances: Vec<f64>,
    pub norm: SetNorm,
    pub converged: bool,
    /// First index after which the semidistances never increase.
    pub burn_in: usize,
}

impl AttractorApproximation {
    pub fn final_set(&self) -> &[SpectralField] {
        self.sets.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_semidistance(&self) -> Option<f64> {
        self.semidistances.last().copied()
    }

    /// Largest pairwise distance inside the final set.
    pub fn diameter(&self, op: &DiscreteOperator) -> Result<f64> {
        let set = self.final_set();
        let mut d: f64 = 0.0;
        for (i, a) in set.iter().enumerate() {
            for b in &set[i + 1..] {
                d = d.max(distance(op, a, b, self.norm)?);
            }
        }
        Ok(d)
    }
}

/// Doubles the pullback depth from 1 up to `max_depth` until successive
/// images are within `tol`. Non-convergence is reported, not raised.
pub fn approximate_attractor(
    process: &Process<'_>,
    t_eval: f64,
    seeds: &[SpectralField],
    tol: f64,
    max_depth: f64,
    norm: SetNorm,
) -> Result<AttractorApproximation> {
    if !(max_depth >= 1.0) {
        return Err(Error::InvalidSpan(format!("max depth {max_depth} must be at least 1")));
    }
    let op = process.op();
    let mut depths = Vec::new();
    let mut d = 1.0;
    while d <= max_depth {
        depths.push(d);
        d *= 2.0;
    }
    let mut sets: Vec<Vec<SpectralField>> = Vec::with_capacity(depths.len());
    let mut semidistances = Vec::new();
    let mut converged = false;
    for &d in &depths {
        let set = pullback_orbit(process, t_eval, d, seeds)?;
        if let Some(prev) = sets.last() {
            let dist = hausdorff_semidistance(op, &set, prev, norm)?;
            semidistances.push(dist);
            converged = dist < tol;
        }
        sets.push(set);
        if converged {
            break;
        }
    }
    depths.truncate(sets.len());
    let burn_in = (0..semidistances.len()).rev().find(|&i| i > 0 && semidistances[i] > semidistances[i - 1]).unwrap_or(0);
    Ok(AttractorApproximation { t_eval, depths, sets, semidistances, norm, converged, burn_in })
}

/// Seed net spanning the interval: both corners, seven convex blends with
/// seeded weights, and `±‖hi‖·e₁`-scale probes of the first two modes.
/// The first nine members lie in the interval.
pub fn seed_net(interval: &OrderInterval, seed: u64) -> Vec<SpectralField> {
    let modes = interval.hi.modes();
    let mut rng = FieldSampler::new(seed);
    let mut out = vec![interval.lo.clone(), interval.hi.clone()];
    out.extend((0..7).map(|_| interval.blend(rng.scalar(0.0, 1.0))));
    let scale = interval.hi.l2_norm().max(1.0);
    out.push(SpectralField::mode(modes, 1, scale));
    if modes >= 2 {
        out.push(SpectralField::mode(modes, 2, scale));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub holds: bool,
    pub worst_margin: f64,
    pub worst_seed: usize,
    pub worst_time: f64,
    pub samples: usize,
}

/// Checks `S(σ, s)u ∈ interval` on every step time `σ ∈ [s, t]` for each seed.
pub fn interval_invariance(
    process: &Process<'_>,
    interval: &OrderInterval,
    seeds: &[SpectralField],
    s: f64,
    t: f64,
    tol: f64,
) -> Result<InvarianceReport> {
    let grid = process.op().grid();
    let per_seed: Vec<(f64, f64, usize)> = seeds
        .par_iter()
        .map(|u| {
            let traj = process.trajectory(t, s, u)?;
            let mut worst = (f64::INFINITY, s);
            for (time, state) in traj.times().iter().zip(traj.states()) {
                let m = interval.contains(grid, state, tol)?.margin;
                if m < worst.0 {
                    worst = (m, *time);
                }
            }
            Ok((worst.0, worst.1, traj.len()))
        })
        .collect::<Result<_>>()?;
    let (worst_seed, &(worst_margin, worst_time, _)) =
        per_seed.iter().enumerate().min_by(|a, b| a.1 .0.total_cmp(&b.1 .0)).ok_or(Error::EmptySamples)?;
    Ok(InvarianceReport { holds: worst_margin >= -tol, worst_margin, worst_seed, worst_time, samples: per_seed.iter().map(|p| p.2).sum() })
}

#[derive(Clone, Debug, Serialize)]
pub struct NonAutEquilibrium {
    pub t_grid: Vec<f64>,
    pub xi: Vec<SpectralField>,
    /// `max_i ‖S(t_{i+1}, t_i)ξ(t_i) − ξ(t_{i+1})‖_{X^{1/2}}`.
    pub process_residual: f64,
    pub residuals: Vec<f64>,
    pub in_cone: bool,
    /// Worst margin of `ξ(t)` against the interval ends.
    pub interval_margin: f64,
    pub depth: f64,
}

/// `ξ(t) = S(t, t − depth)·midpoint` at each grid time, checked for the
/// process property between consecutive grid times.
pub fn nonautonomous_equilibrium(
    process: &Process<'_>,
    interval: &OrderInterval,
    t_grid: &[f64],
    depth: f64,
    tol: f64,
) -> Result<NonAutEquilibrium> {
    if process.kind != ProcessKind::Full {
        return Err(Error::Incompatible("non-autonomous equilibria are built from the full process".into()));
    }
    if t_grid.is_empty() {
        return Err(Error::EmptySamples);
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSpan("evaluation times must increase".into()));
    }
    let op = process.op();
    let mid = interval.midpoint();
    let xi: Vec<SpectralField> = t_grid.par_iter().map(|&t| process.apply(t, t - depth, &mid)).collect::<Result<_>>()?;
    let residuals: Vec<f64> = (0..t_grid.len().saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let pushed = process.apply(t_grid[i + 1], t_grid[i], &xi[i])?;
            op.energy_norm(&(&pushed - &xi[i + 1]))
        })
        .collect::<Result<_>>()?;
    if let Some((i, r)) = residuals.iter().enumerate().find(|(_, &r)| !(r <= tol)) {
        return Err(Error::NoConvergence(format!(
            "process residual {r:.3e} exceeds {tol:.1e} between t = {} and t = {}",
            t_grid[i],
            t_grid[i + 1]
        )));
    }
    let grid = op.grid();
    let mut cone = true;
    let mut margin = f64::INFINITY;
    for x in &xi {
        cone &= in_cone(grid, x, DEFAULT_ORDER_TOL)?;
        margin = margin.min(interval.contains(grid, x, INTERVAL_TOL)?.margin);
    }
    Ok(NonAutEquilibrium {
        t_grid: t_grid.to_vec(),
        xi,
        process_residual: residuals.iter().copied().fold(0.0, f64::max),
        residuals,
        in_cone: cone,
        interval_margin: margin,
        depth,
    })
}

/// Two-sided check that iterating a barrier from above and from below lands
/// on the same fixed point; returns their distance.
pub fn barrier_uniqueness_gap(
    op: &DiscreteOperator,
    model: &ModelSpec,
    side: BarrierSide,
    below: &SpectralField,
    above: &SpectralField,
    search: &BarrierSearch,
) -> Result<f64> {
    let a = barrier_fixed_point(op, model, side, below, search)?;
    let b = barrier_fixed_point(op, model, side, above, search)?;
    debug_assert!(leq(op.grid(), below, above, 1e-9)?.holds);
    op.energy_norm(&(&a - &b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{solve_original, IntegratorConfig};
    use crate::model::{model_by_name, KirchhoffCoefficient, ReactionSpec, PERIODIC_MODEL_PERIOD};
    use crate::spectral::OperatorSpec;
    use std::f64::consts::PI;

    fn op(k: usize) -> DiscreteOperator {
        DiscreteOperator::new(OperatorSpec::new(1, 0.0, k, PI)).unwrap()
    }

    #[test]
    fn semidistance_examples() {
        let o = op(4);
        let e1 = o.ground_mode();
        assert_eq!(hausdorff_semidistance(&o, std::slice::from_ref(&e1), std::slice::from_ref(&e1), SetNorm::L2).unwrap(), 0.0);
        assert!((hausdorff_semidistance(&o, &[o.zero()], std::slice::from_ref(&e1), SetNorm::L2).unwrap() - 1.0).abs() < 1e-15);
        let big = [o.zero(), e1.clone()];
        assert_eq!(hausdorff_semidistance(&o, &[o.zero()], &big, SetNorm::XHalf).unwrap(), 0.0);
        assert!(hausdorff_semidistance(&o, &big, &[o.zero()], SetNorm::XHalf).unwrap() > 0.0);
        assert!(matches!(hausdorff_semidistance(&o, &[], &big, SetNorm::L2), Err(Error::EmptySamples)));
    }

    #[test]
    fn affine_barrier_equilibria_are_ordered_and_unique() {
        let o = op(12);
        let m = model_by_name("affine").unwrap();
        let search = BarrierSearch::default();
        let interval = barrier_equilibria(&o, &m, &o.ground_mode(), &search).unwrap();
        assert!(leq(o.grid(), &interval.lo, &interval.hi, 0.0).unwrap().holds);
        assert!(in_cone(o.grid(), &interval.lo, 0.0).unwrap());
        let gap = barrier_uniqueness_gap(&o, &m, BarrierSide::Upper, &o.zero(), &o.ground_mode().scaled(5.0), &search).unwrap();
        assert!(gap < 1e-7, "{gap}");
    }

    #[test]
    fn zero_barrier_fixed_point() {
        let o = op(6);
        let m = ModelSpec::new(
            "decay",
            KirchhoffCoefficient::constant(1.0),
            ReactionSpec::new(|_, _, u| -u, |u| -u, |u| -u, 1.0, 1.0).autonomous(true),
        );
        let z = barrier_fixed_point(&o, &m, BarrierSide::Lower, &o.ground_mode(), &BarrierSearch::default()).unwrap();
        assert!(o.energy_norm(&z).unwrap() < 1e-7);
    }

    #[test]
    fn zero_depth_returns_seeds() {
        let o = op(4);
        let m = model_by_name("affine").unwrap();
        let p = Process::full(&o, &m, 0.01).unwrap();
        let seeds = vec![o.ground_mode(), o.zero()];
        assert_eq!(pullback_orbit(&p, 3.0, 0.0, &seeds).unwrap(), seeds);
        assert!(pullback_orbit(&p, 3.0, -1.0, &seeds).is_err());
        assert!(matches!(pullback_orbit(&p, 3.0, 1.0, &[]), Err(Error::EmptySamples)));
    }

    #[test]
    fn linear_decay_shrinks_set() {
        let o = op(6);
        let m = ModelSpec::new("heat", KirchhoffCoefficient::constant(1.0), ReactionSpec::zero());
        let p = Process::full(&o, &m, 0.01).unwrap();
        let mut rng = FieldSampler::new(3);
        let seeds: Vec<_> = (0..5).map(|_| rng.uniform(6, 1.0)).collect();
        let depth = 2.0;
        let out = pullback_orbit(&p, 0.0, depth, &seeds).unwrap();
        for (a, b) in out.iter().zip(&seeds) {
            assert!(a.l2_norm() <= (-o.mu1() * depth).exp() * b.l2_norm() * (1.0 + 1e-12));
        }
        let approx = approximate_attractor(&p, 0.0, &seeds, 1e-6, 64.0, SetNorm::XHalf).unwrap();
        assert!(approx.converged);
        assert!(approx.final_set().iter().all(|u| o.energy_norm(u).unwrap() < 1e-6));
    }

    #[test]
    fn affine_attractor_is_the_stationary_state() {
        let o = op(8);
        let m = model_by_name("affine").unwrap();
        let p = Process::full(&o, &m, 0.01).unwrap();
        let interval = barrier_equilibria(&o, &m, &o.ground_mode(), &BarrierSearch::default()).unwrap();
        let seeds = seed_net(&interval, 7);
        assert_eq!(seeds.len(), 11);
        let approx = approximate_attractor(&p, 0.0, &seeds, 1e-6, 64.0, SetNorm::XHalf).unwrap();
        assert!(approx.converged);
        assert!(approx.diameter(&o).unwrap() < 1e-6);
        let direct = solve_original(&o, &m, &o.zero(), &IntegratorConfig::new(0.01, (0.0, 40.0))).unwrap();
        let stationary = direct.final_state().unwrap();
        for u in approx.final_set() {
            assert!(o.energy_norm(&(u - stationary)).unwrap() < 1e-6);
        }
    }

    #[test]
    fn periodic_equilibrium_repeats() {
        let o = op(8);
        let m = model_by_name("affine-periodic").unwrap();
        let p = Process::full(&o, &m, 0.01).unwrap();
        let interval = barrier_equilibria(&o, &m, &o.ground_mode(), &BarrierSearch::default()).unwrap();
        let period = PERIODIC_MODEL_PERIOD;
        let grid: Vec<f64> = (0..=8).map(|i| i as f64 * 0.5 * period / 2.0).collect();
        let eq = nonautonomous_equilibrium(&p, &interval, &grid, 24.0, 1e-6).unwrap();
        assert!(eq.in_cone && eq.interval_margin >= 0.0);
        // ξ(t + P) = ξ(t)
        let gap = o.energy_norm(&(&eq.xi[0] - &eq.xi[4])).unwrap();
        assert!(gap < 2e-6, "{gap}");
        // ξ depends on t
        assert!(o.energy_norm(&(&eq.xi[0] - &eq.xi[2])).unwrap() > 1e-3);
    }

    #[test]
    fn shallow_pullback_fails_residual() {
        let o = op(8);
        let m = model_by_name("affine-periodic").unwrap();
        let p = Process::full(&o, &m, 0.01).unwrap();
        let interval = OrderInterval::new(o.grid(), o.zero(), o.ground_mode().scaled(3.0)).unwrap();
        let err = nonautonomous_equilibrium(&p, &interval, &[0.0, 0.5], 0.05, 1e-9).unwrap_err();
        assert!(matches!(err, Error::NoConvergence(ref msg) if msg.contains("t = 0 and t = 0.5")), "{err}");
    }
}
