//! Pointwise order on collocation nodes, the positive cone, order intervals
//! and the comparison verdicts.
//!
//! Barriers are named by role: the lower barrier runs the lower envelope
//! `b₀f₀`, the upper barrier the upper envelope `b₁f₁`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{Process, Trajectory};
use crate::spectral::{CollocationGrid, SpectralField};

/// Absolute tolerance of order checks on unit-scale states.
pub const DEFAULT_ORDER_TOL: f64 = 1e-7;
/// Tolerance of the order-interval invariant `lo ≤ hi`.
pub const INTERVAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    /// `min_q (v − u)(x_q)`.
    pub margin: f64,
    /// Zero-based node index attaining the margin.
    pub worst_node: usize,
}

/// `u ≤ v + tol` at every node of the grid.
pub fn leq(grid: &CollocationGrid, u: &SpectralField, v: &SpectralField, tol: f64) -> Result<Verdict> {
    let (gu, gv) = (grid.to_grid(u)?, grid.to_grid(v)?);
    Ok(verdict(gu.iter().zip(&gv).map(|(a, b)| b - a), tol))
}

fn verdict(margins: impl Iterator<Item = f64>, tol: f64) -> Verdict {
    let (worst_node, margin) =
        margins.enumerate().fold((0, f64::INFINITY), |acc, (i, m)| if m < acc.1 || m.is_nan() { (i, m) } else { acc });
    Verdict { holds: margin >= -tol, margin, worst_node }
}

/// `0 ≤ u` at every node.
pub fn in_cone(grid: &CollocationGrid, u: &SpectralField, tol: f64) -> Result<bool> {
    Ok(leq(grid, &SpectralField::zeros(u.modes()), u, tol)?.holds)
}

/// Tolerance for states of sup-norm scale `scale`: `1e-7·max(1, scale)`.
pub fn scaled_tol(grid: &CollocationGrid, fields: &[&SpectralField]) -> Result<f64> {
    let mut scale: f64 = 1.0;
    for f in fields {
        scale = grid.to_grid(f)?.iter().fold(scale, |m, v| m.max(v.abs()));
    }
    Ok(DEFAULT_ORDER_TOL * scale)
}

/// `{u : lo ≤ u ≤ hi}` on the nodes.
#[derive(Clone, Debug, Serialize)]
pub struct OrderInterval {
    pub lo: SpectralField,
    pub hi: SpectralField,
}

impl OrderInterval {
    pub fn new(grid: &CollocationGrid, lo: SpectralField, hi: SpectralField) -> Result<Self> {
        let v = leq(grid, &lo, &hi, INTERVAL_TOL)?;
        if !v.holds {
            return Err(Error::OrderViolation(format!("interval ends cross at node {} by {:.3e}", v.worst_node, -v.margin)));
        }
        Ok(Self { lo, hi })
    }

    /// Worst of `u − lo` and `hi − u` over the nodes.
    pub fn contains(&self, grid: &CollocationGrid, u: &SpectralField, tol: f64) -> Result<Verdict> {
        let (below, above) = (leq(grid, &self.lo, u, tol)?, leq(grid, u, &self.hi, tol)?);
        Ok(if below.margin <= above.margin { below } else { above })
    }

    pub fn midpoint(&self) -> SpectralField {
        self.lo.lerp(&self.hi, 0.5)
    }

    /// `(1 − θ)·lo + θ·hi`, inside the interval for `θ ∈ [0, 1]`.
    pub fn blend(&self, theta: f64) -> SpectralField {
        self.lo.lerp(&self.hi, theta)
    }
}

/// Per-time comparison of two trajectories sampled on a common grid.
#[derive(Clone, Debug, Serialize)]
pub struct OrderReport {
    pub verdict: bool,
    pub worst_time: f64,
    pub worst_node: usize,
    pub slack: f64,
    pub first_failure_time: Option<f64>,
    pub times: Vec<f64>,
    pub slacks: Vec<f64>,
}

impl OrderReport {
    fn from_series(times: Vec<f64>, verdicts: Vec<Verdict>, tol: f64) -> Self {
        let mut worst = (0usize, f64::INFINITY);
        for (i, v) in verdicts.iter().enumerate() {
            if v.margin < worst.1 || v.margin.is_nan() {
                worst = (i, v.margin);
            }
        }
        let first_failure_time = verdicts.iter().position(|v| !(v.margin >= -tol)).map(|i| times[i]);
        let slacks = verdicts.iter().map(|v| v.margin).collect();
        match verdicts.get(worst.0) {
            Some(v) => Self {
                verdict: first_failure_time.is_none(),
                worst_time: times[worst.0],
                worst_node: v.worst_node,
                slack: v.margin,
                first_failure_time,
                times,
                slacks,
            },
            None => {
                Self { verdict: true, worst_time: f64::NAN, worst_node: 0, slack: f64::INFINITY, first_failure_time: None, times, slacks }
            }
        }
    }
}

fn resample(traj: &Trajectory, times: &[f64], role: &str) -> Result<Vec<SpectralField>> {
    let identical = traj.times().len() == times.len() && traj.times().iter().zip(times).all(|(a, b)| a == b);
    if identical {
        return Ok(traj.states().to_vec());
    }
    times.iter().map(|&t| traj.state_at(t).map_err(|_| Error::Incompatible(format!("{role} trajectory does not cover t = {t}")))).collect()
}

/// `lower ≤ middle ≤ upper` at every sample time of `middle`; the outer
/// trajectories are interpolated onto those times. All three must share a clock.
pub fn sandwich_check(
    grid: &CollocationGrid,
    lower: &Trajectory,
    middle: &Trajectory,
    upper: &Trajectory,
    tol: f64,
) -> Result<OrderReport> {
    if lower.clock != middle.clock || upper.clock != middle.clock {
        return Err(Error::Incompatible("sandwich members are on different clocks".into()));
    }
    let times = middle.times().to_vec();
    let lo = resample(lower, &times, "lower")?;
    let hi = resample(upper, &times, "upper")?;
    let mut verdicts = Vec::with_capacity(times.len());
    for ((l, m), h) in lo.iter().zip(middle.states()).zip(&hi) {
        let (a, b) = (leq(grid, l, m, tol)?, leq(grid, m, h, tol)?);
        verdicts.push(if a.margin <= b.margin { a } else { b });
    }
    Ok(OrderReport::from_series(times, verdicts, tol))
}

/// `below ≤ above` at every sample time of `below`.
pub fn ordered_trajectories(grid: &CollocationGrid, below: &Trajectory, above: &Trajectory, tol: f64) -> Result<OrderReport> {
    if below.clock != above.clock {
        return Err(Error::Incompatible("trajectories are on different clocks".into()));
    }
    let times = below.times().to_vec();
    let hi = resample(above, &times, "upper")?;
    let verdicts = below.states().iter().zip(&hi).map(|(l, h)| leq(grid, l, h, tol)).collect::<Result<Vec<_>>>()?;
    Ok(OrderReport::from_series(times, verdicts, tol))
}

/// Order preservation `u₁ ≤ u₀ ⇒ S(σ, s)u₁ ≤ S(σ, s)u₀` for every step time `σ ∈ [s, t]`.
pub fn monotonicity_check(process: &Process<'_>, u0: &SpectralField, u1: &SpectralField, t: f64, s: f64, tol: f64) -> Result<OrderReport> {
    let grid = process.op().grid();
    let pre = leq(grid, u1, u0, tol)?;
    if !pre.holds {
        return Err(Error::Precondition(format!("initial data are not ordered (node {}, margin {:.3e})", pre.worst_node, pre.margin)));
    }
    let above = process.trajectory(t, s, u0)?;
    let below = process.trajectory(t, s, u1)?;
    ordered_trajectories(grid, &below, &above, tol)
}

/// Comparison of two processes from the same datum: with reaction
/// `g ≥ ℓ`, `S_ℓ(σ, s)u₀ ≤ S_g(σ, s)u₀` along `[s, t]`.
pub fn comparison_check(greater: &Process<'_>, lesser: &Process<'_>, u0: &SpectralField, t: f64, s: f64, tol: f64) -> Result<OrderReport> {
    let above = greater.trajectory(t, s, u0)?;
    let below = lesser.trajectory(t, s, u0)?;
    ordered_trajectories(greater.op().grid(), &below, &above, tol)
}
