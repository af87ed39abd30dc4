//! Time integration: frozen-coefficient exponential Euler on the original
//! clock, the rescaled clock `τ = φ(t)`, the two autonomous barrier
//! semigroups, and the two-parameter process `S(t, s)`.
//!
//! Original-clock steps land on absolute multiples of `h` (plus the span
//! end-points), so `S(t, τ)S(τ, s) = S(t, s)` holds exactly whenever `τ` is
//! on the grid. Barrier semigroups step on `s + nh`, which makes them
//! exactly translation invariant.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{eval_barrier_field, eval_reaction_field, BarrierSide, ModelSpec};
use crate::spectral::{DiscreteOperator, SpectralField};

pub const DEFAULT_STATE_GUARD: f64 = 1e6;

fn default_guard() -> f64 {
    DEFAULT_STATE_GUARD
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub h: f64,
    #[serde(default)]
    pub richardson_check: bool,
    /// Blow-up guard on the X^{1/2} norm.
    #[serde(default = "default_guard")]
    pub max_state_norm: f64,
    pub t_span: (f64, f64),
}

impl IntegratorConfig {
    pub fn new(h: f64, t_span: (f64, f64)) -> Self {
        Self { h, richardson_check: false, max_state_norm: DEFAULT_STATE_GUARD, t_span }
    }

    pub fn with_richardson(mut self, flag: bool) -> Self {
        self.richardson_check = flag;
        self
    }

    pub fn with_guard(mut self, limit: f64) -> Self {
        self.max_state_norm = limit;
        self
    }

    pub fn with_span(mut self, s: f64, t: f64) -> Self {
        self.t_span = (s, t);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (s, t) = self.t_span;
        if !(s.is_finite() && t.is_finite() && t > s) {
            return Err(Error::InvalidSpan(format!("need s < T, got ({s}, {t})")));
        }
        if !(self.h > 0.0) || self.h > t - s {
            return Err(Error::InvalidSpan(format!("step {} must lie in (0, {}]", self.h, t - s)));
        }
        if !(self.max_state_norm > 0.0) {
            return Err(Error::InvalidSpan(format!("state guard {} must be positive", self.max_state_norm)));
        }
        Ok(())
    }
}

/// Step end-points from `s` to `t` with interior points on multiples of `h`.
fn aligned_steps(s: f64, t: f64, h: f64) -> Vec<f64> {
    let mut out = vec![s];
    let mut k = (s / h).floor() as i64 + 1;
    loop {
        let x = k as f64 * h;
        if x >= t - 1e-9 * h {
            break;
        }
        if x > s + 1e-9 * h {
            out.push(x);
        }
        k += 1;
    }
    if t > s {
        out.push(t);
    }
    out
}

/// Step end-points `s, s+h, s+2h, …, t`.
fn relative_steps(s: f64, t: f64, h: f64) -> Vec<f64> {
    let n = ((t - s) / h - 1e-9).ceil().max(0.0) as usize;
    let mut out: Vec<f64> = (0..n).map(|i| s + i as f64 * h).collect();
    out.push(t);
    if n == 0 {
        out.insert(0, s);
        out.dedup();
    }
    out
}

/// One mode-wise exponential Euler step of `c' = −aΛc + g` with `a`, `g` frozen.
pub fn frozen_step(op: &DiscreteOperator, a: f64, u: &SpectralField, g: &SpectralField, h: f64) -> SpectralField {
    let coeffs = op
        .eigenvalues()
        .iter()
        .zip(u.coeffs().iter().zip(g.coeffs()))
        .map(|(&mu, (&c, &gk))| {
            let rate = a * mu;
            let z = rate * h;
            (-z).exp() * c - (-z).exp_m1() / rate * gk
        })
        .collect();
    SpectralField::new(coeffs)
}

fn coefficient(op: &DiscreteOperator, model: &ModelSpec, t: f64, u: &SpectralField) -> Result<f64> {
    let q = op.quadratic_form(u)?;
    let a = model.a(q, t);
    if !q.is_finite() || !a.is_finite() {
        return Err(Error::NonFinite { context: "nonlocal argument", time: t });
    }
    Ok(a)
}

fn guard(op: &DiscreteOperator, u: &SpectralField, time: f64, limit: f64) -> Result<()> {
    let norm = op.energy_norm(u)?;
    if !norm.is_finite() {
        return Err(Error::NonFinite { context: "state", time });
    }
    if norm > limit {
        return Err(Error::BlowUp { time, norm, limit });
    }
    Ok(())
}

/// `c_{k,n+1} = e^{−a_nμ_kh}c_k + (1 − e^{−a_nμ_kh})/(a_nμ_k)·f̂_k(t_n, u_n)` with
/// `a_n = a(q(u_n), t_n)`; exact for `f = 0` and constant `a`.
pub fn step_exponential_euler(op: &DiscreteOperator, model: &ModelSpec, t: f64, u: &SpectralField, h: f64) -> Result<SpectralField> {
    if !(h > 0.0) {
        return Err(Error::InvalidSpan(format!("step {h} must be positive")));
    }
    if !u.is_finite() {
        return Err(Error::NonFinite { context: "state", time: t });
    }
    let a = coefficient(op, model, t, u)?;
    let f = eval_reaction_field(op, model, t, u)?;
    Ok(frozen_step(op, a, u, &f, h))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clock {
    Original,
    Rescaled,
}

/// Time-stamped states. On the original clock the ledger holds `φ(t_n)`; on
/// the rescaled clock it holds the original time `φ⁻¹(τ_n)` when known.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub clock: Clock,
    times: Vec<f64>,
    states: Vec<SpectralField>,
    ledger: Option<Vec<f64>>,
    /// X^{1/2} distance between the final states at `h` and `h/2`.
    pub richardson_estimate: Option<f64>,
}

impl Trajectory {
    pub fn new(clock: Clock, times: Vec<f64>, states: Vec<SpectralField>, ledger: Option<Vec<f64>>) -> Result<Self> {
        if times.len() != states.len() || ledger.as_ref().is_some_and(|l| l.len() != times.len()) {
            return Err(Error::Incompatible("times, states and ledger differ in length".into()));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSpan(format!("times not increasing at sample {}", i + 1)));
        }
        Ok(Self { clock, times, states, ledger, richardson_estimate: None })
    }

    pub fn empty(clock: Clock) -> Self {
        Self { clock, times: Vec::new(), states: Vec::new(), ledger: None, richardson_estimate: None }
    }

    fn push(&mut self, t: f64, u: SpectralField, ledger: Option<f64>) {
        self.times.push(t);
        self.states.push(u);
        if let (Some(l), Some(v)) = (self.ledger.as_mut(), ledger) {
            l.push(v);
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[SpectralField] {
        &self.states
    }

    pub fn ledger(&self) -> Option<&[f64]> {
        self.ledger.as_deref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((*self.times.first()?, *self.times.last()?))
    }

    pub fn final_state(&self) -> Option<&SpectralField> {
        self.states.last()
    }

    /// Piecewise-linear interpolation of the state at time `t`.
    pub fn state_at(&self, t: f64) -> Result<SpectralField> {
        let (lo, hi) = self.span().ok_or(Error::EmptySamples)?;
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if t < lo - slack || t > hi + slack {
            return Err(Error::InvalidSpan(format!("t = {t} outside [{lo}, {hi}]")));
        }
        let i = self.times.partition_point(|&x| x <= t);
        if i == 0 {
            return Ok(self.states[0].clone());
        }
        if i == self.times.len() {
            return Ok(self.states[i - 1].clone());
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        Ok(self.states[i - 1].lerp(&self.states[i], (t - t0) / (t1 - t0)))
    }

    fn checked_ledger(&self) -> Result<&[f64]> {
        let ledger = self.ledger.as_deref().ok_or_else(|| Error::Incompatible("trajectory carries no clock ledger".into()))?;
        if let Some(i) = ledger.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotoneLedger(i + 1));
        }
        Ok(ledger)
    }

    /// Counterpart-clock time at own-clock time `t` by linear interpolation
    /// of the ledger (`φ(t)` on the original clock).
    pub fn ledger_at(&self, t: f64) -> Result<f64> {
        let ledger = self.checked_ledger()?;
        interpolate(&self.times, ledger, t)
    }

    /// Own-clock time whose ledger value is `v` (`φ⁻¹(v)` on the original clock).
    pub fn ledger_inverse(&self, v: f64) -> Result<f64> {
        let ledger = self.checked_ledger()?;
        interpolate(ledger, &self.times, v)
    }

    /// Slopes of the ledger between consecutive samples must lie in `[lo, hi]`.
    pub fn ledger_slope_bounds(&self) -> Result<(f64, f64)> {
        let ledger = self.checked_ledger()?;
        let mut out = (f64::INFINITY, f64::NEG_INFINITY);
        for (t, l) in self.times.windows(2).zip(ledger.windows(2)) {
            let slope = (l[1] - l[0]) / (t[1] - t[0]);
            out = (out.0.min(slope), out.1.max(slope));
        }
        Ok(out)
    }

    /// The same states indexed by the counterpart clock.
    pub fn to_rescaled_clock(&self) -> Result<Trajectory> {
        if self.clock != Clock::Original {
            return Err(Error::Incompatible("trajectory is already on the rescaled clock".into()));
        }
        let ledger = self.checked_ledger()?.to_vec();
        Trajectory::new(Clock::Rescaled, ledger, self.states.clone(), Some(self.times.clone()))
    }

    /// Rows `time, phi, c_1..c_K, l2, xhalf`; `phi` holds the ledger value and
    /// is empty when there is none. Floats carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, op: &DiscreteOperator, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let mut header = vec!["time".to_string(), "phi".to_string()];
        header.extend((1..=op.modes()).map(|k| format!("c_{k}")));
        header.extend(["l2".to_string(), "xhalf".to_string()]);
        w.write_record(&header).map_err(csv_err)?;
        for (i, (t, u)) in self.times.iter().zip(&self.states).enumerate() {
            let mut row = vec![fmt_float(*t)];
            row.push(self.ledger.as_ref().map(|l| fmt_float(l[i])).unwrap_or_default());
            row.extend(u.coeffs().iter().map(|c| fmt_float(*c)));
            row.push(fmt_float(u.l2_norm()));
            row.push(fmt_float(op.energy_norm(u)?));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Incompatible(format!("csv write failed: {e}")))?;
        Ok(())
    }
}

/// Round-trippable float formatting with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Incompatible(format!("csv write failed: {e}"))
}

/// Linear interpolation of `ys` over increasing `xs`.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let (lo, hi) = match (xs.first(), xs.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::EmptySamples),
    };
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    if x < lo - slack || x > hi + slack {
        return Err(Error::InvalidSpan(format!("{x} outside ledger range [{lo}, {hi}]")));
    }
    let i = xs.partition_point(|&v| v <= x);
    if i == 0 {
        return Ok(ys[0]);
    }
    if i == xs.len() {
        return Ok(ys[i - 1]);
    }
    let th = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    Ok(ys[i - 1] + th * (ys[i] - ys[i - 1]))
}

fn check_initial(u: &SpectralField, op: &DiscreteOperator, t: f64) -> Result<()> {
    if u.modes() != op.modes() {
        return Err(Error::DimensionMismatch { expected: op.modes(), got: u.modes() });
    }
    if !u.is_finite() {
        return Err(Error::NonFinite { context: "initial state", time: t });
    }
    Ok(())
}

/// Full nonlocal equation on the original clock, accumulating
/// `φ(t) = ∫_s^t a(q(u), σ) dσ` by the trapezoid rule with `φ(s) = 0`.
pub fn solve_original(op: &DiscreteOperator, model: &ModelSpec, u_s: &SpectralField, config: &IntegratorConfig) -> Result<Trajectory> {
    config.validate()?;
    let (s, t_end) = config.t_span;
    check_initial(u_s, op, s)?;
    guard(op, u_s, s, config.max_state_norm)?;
    let grid = aligned_steps(s, t_end, config.h);
    let mut traj = Trajectory::empty(Clock::Original);
    traj.ledger = Some(Vec::with_capacity(grid.len()));
    let mut u = u_s.clone();
    let mut a = coefficient(op, model, s, &u)?;
    let mut phi = 0.0;
    traj.push(s, u.clone(), Some(phi));
    for w in grid.windows(2) {
        let (t, tn) = (w[0], w[1]);
        let f = eval_reaction_field(op, model, t, &u)?;
        u = frozen_step(op, a, &u, &f, tn - t);
        guard(op, &u, tn, config.max_state_norm)?;
        let a_next = coefficient(op, model, tn, &u)?;
        phi += 0.5 * (tn - t) * (a + a_next);
        a = a_next;
        traj.push(tn, u.clone(), Some(phi));
    }
    if config.richardson_check {
        let fine = IntegratorConfig { h: 0.5 * config.h, richardson_check: false, ..*config };
        let half = solve_original(op, model, u_s, &fine)?;
        let diff = traj.final_state().unwrap() - half.final_state().unwrap();
        traj.richardson_estimate = Some(op.energy_norm(&diff)?);
    }
    Ok(traj)
}

/// Source of the original time `t = φ⁻¹(τ)` for the rescaled equation.
#[derive(Clone, Copy, Debug)]
pub enum ClockSource<'a> {
    /// Interpolate the ledger of an original-clock trajectory.
    Ledger(&'a Trajectory),
    /// Integrate `dt/dτ = 1/a(q(w), t)` alongside the state, from `t_start`.
    SelfConsistent { t_start: f64 },
}

/// `w_τ + Λw = f(x, φ⁻¹(τ), w) / a(q(w), φ⁻¹(τ))` over the rescaled span
/// `config.t_span`. The ledger of the result holds the original times.
pub fn solve_rescaled(
    op: &DiscreteOperator,
    model: &ModelSpec,
    w_s: &SpectralField,
    config: &IntegratorConfig,
    source: ClockSource<'_>,
) -> Result<Trajectory> {
    config.validate()?;
    let (tau0, tau1) = config.t_span;
    check_initial(w_s, op, tau0)?;
    guard(op, w_s, tau0, config.max_state_norm)?;
    let grid = aligned_steps(tau0, tau1, config.h);

    let mut clock_t = match source {
        ClockSource::Ledger(traj) => {
            if traj.clock != Clock::Original {
                return Err(Error::Incompatible("clock ledger must come from an original-clock solve".into()));
            }
            let ledger = traj.checked_ledger()?;
            let (lo, hi) = (ledger[0], ledger[ledger.len() - 1]);
            if tau0 < lo - 1e-12 || tau1 > hi + 1e-9 * (1.0 + hi.abs()) {
                return Err(Error::InvalidSpan(format!("rescaled span ({tau0}, {tau1}) exceeds ledger range [{lo}, {hi}]")));
            }
            traj.ledger_inverse(tau0)?
        }
        ClockSource::SelfConsistent { t_start } => t_start,
    };

    let mut traj = Trajectory::empty(Clock::Rescaled);
    traj.ledger = Some(Vec::with_capacity(grid.len()));
    let mut w = w_s.clone();
    traj.push(tau0, w.clone(), Some(clock_t));
    for win in grid.windows(2) {
        let (tau, tau_n) = (win[0], win[1]);
        let dt = tau_n - tau;
        let a = coefficient(op, model, clock_t, &w)?;
        let f = eval_reaction_field(op, model, clock_t, &w)?;
        let next = frozen_step(op, 1.0, &w, &f.scaled(1.0 / a), dt);
        guard(op, &next, tau_n, config.max_state_norm)?;
        clock_t = match source {
            ClockSource::Ledger(orig) => orig.ledger_inverse(tau_n)?,
            ClockSource::SelfConsistent { .. } => {
                // Heun step for dt/dτ = 1/a.
                let predicted = clock_t + dt / a;
                let a_next = coefficient(op, model, predicted, &next)?;
                clock_t + 0.5 * dt * (1.0 / a + 1.0 / a_next)
            }
        };
        w = next;
        traj.push(tau_n, w.clone(), Some(clock_t));
    }
    if let Some(i) = traj.ledger.as_ref().unwrap().windows(2).position(|p| !(p[1] > p[0])) {
        return Err(Error::NonMonotoneLedger(i + 1));
    }
    Ok(traj)
}

/// Autonomous barrier semigroup `z_τ + Λz = g_side(z)` on the rescaled clock.
pub fn solve_barrier(
    op: &DiscreteOperator,
    model: &ModelSpec,
    side: BarrierSide,
    z0: &SpectralField,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    let (s, t_end) = config.t_span;
    check_initial(z0, op, s)?;
    guard(op, z0, s, config.max_state_norm)?;
    let mut traj = Trajectory::empty(Clock::Rescaled);
    let mut z = z0.clone();
    traj.push(s, z.clone(), None);
    for w in relative_steps(s, t_end, config.h).windows(2) {
        z = barrier_step(op, model, side, &z, w[1] - w[0], w[0])?;
        guard(op, &z, w[1], config.max_state_norm)?;
        traj.push(w[1], z.clone(), None);
    }
    Ok(traj)
}

fn barrier_step(op: &DiscreteOperator, model: &ModelSpec, side: BarrierSide, z: &SpectralField, h: f64, t: f64) -> Result<SpectralField> {
    let g = eval_barrier_field(op, model, side, z).map_err(|e| match e {
        Error::NonFinite { context, .. } => Error::NonFinite { context, time: t },
        other => other,
    })?;
    Ok(frozen_step(op, 1.0, z, &g, h))
}

/// Which member of the process family a [`Process`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    /// The full nonlocal process `S(t, s)` on the original clock.
    Full,
    /// The lower barrier semigroup `T_low(t − s)`.
    Lower,
    /// The upper barrier semigroup `T_high(t − s)`.
    Upper,
}

/// A solution operator `(t, s, u) ↦ S(t, s)u` at fixed step `h`.
#[derive(Clone, Copy, Debug)]
pub struct Process<'a> {
    pub kind: ProcessKind,
    op: &'a DiscreteOperator,
    model: &'a ModelSpec,
    h: f64,
    max_state_norm: f64,
}

impl<'a> Process<'a> {
    pub fn new(kind: ProcessKind, op: &'a DiscreteOperator, model: &'a ModelSpec, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidSpan(format!("step {h} must be positive")));
        }
        Ok(Self { kind, op, model, h, max_state_norm: DEFAULT_STATE_GUARD })
    }

    pub fn full(op: &'a DiscreteOperator, model: &'a ModelSpec, h: f64) -> Result<Self> {
        Self::new(ProcessKind::Full, op, model, h)
    }

    pub fn barrier(side: BarrierSide, op: &'a DiscreteOperator, model: &'a ModelSpec, h: f64) -> Result<Self> {
        let kind = match side {
            BarrierSide::Lower => ProcessKind::Lower,
            BarrierSide::Upper => ProcessKind::Upper,
        };
        Self::new(kind, op, model, h)
    }

    pub fn with_guard(mut self, limit: f64) -> Self {
        self.max_state_norm = limit;
        self
    }

    pub fn op(&self) -> &'a DiscreteOperator {
        self.op
    }

    pub fn model(&self) -> &'a ModelSpec {
        self.model
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    /// Barrier semigroups are autonomous by construction.
    pub fn is_autonomous(&self) -> bool {
        self.kind != ProcessKind::Full || self.model.is_autonomous()
    }

    fn side(&self) -> Option<BarrierSide> {
        match self.kind {
            ProcessKind::Full => None,
            ProcessKind::Lower => Some(BarrierSide::Lower),
            ProcessKind::Upper => Some(BarrierSide::Upper),
        }
    }

    /// `S(t, s)u`; `S(s, s)` is the identity.
    pub fn apply(&self, t: f64, s: f64, u: &SpectralField) -> Result<SpectralField> {
        if t < s {
            return Err(Error::InvalidSpan(format!("process needs t ≥ s, got t = {t}, s = {s}")));
        }
        check_initial(u, self.op, s)?;
        let mut u = u.clone();
        if t == s {
            return Ok(u);
        }
        match self.side() {
            None => {
                for w in aligned_steps(s, t, self.h).windows(2) {
                    u = step_exponential_euler(self.op, self.model, w[0], &u, w[1] - w[0])?;
                    guard(self.op, &u, w[1], self.max_state_norm)?;
                }
            }
            Some(side) => {
                for w in relative_steps(s, t, self.h).windows(2) {
                    u = barrier_step(self.op, self.model, side, &u, w[1] - w[0], w[0])?;
                    guard(self.op, &u, w[1], self.max_state_norm)?;
                }
            }
        }
        Ok(u)
    }

    /// The full trajectory `σ ↦ S(σ, s)u` on `[s, t]`.
    pub fn trajectory(&self, t: f64, s: f64, u: &SpectralField) -> Result<Trajectory> {
        let config = IntegratorConfig::new(self.h.min(t - s), (s, t)).with_guard(self.max_state_norm);
        match self.side() {
            None => solve_original(self.op, self.model, u, &config),
            Some(side) => solve_barrier(self.op, self.model, side, u, &config),
        }
    }
}

/// Absorbing-ball radius `C₁|Ω|^{1/2} / (a₀μ₁ + C₀)` for the L² norm; `None`
/// when the denominator is not positive.
pub fn absorption_bound(op: &DiscreteOperator, model: &ModelSpec) -> Option<f64> {
    let rate = model.kirchhoff.a_lo * op.mu1() + model.reaction.c0;
    (rate > 0.0).then(|| model.reaction.c1 * op.length().sqrt() / rate)
}
