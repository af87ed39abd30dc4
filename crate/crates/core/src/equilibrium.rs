//! Stationary problem of the autonomous equation: the energy
//!
//! ```text
//! E(u) = ½∫₀^{q(u)} a(s) ds − ∫_Ω F(x, u) dx,   q(u) = ⟨Λu, u⟩,
//! ```
//!
//! its first variation, projected-gradient minimisation over the box
//! `0 ≤ u ≤ ū`, and the checks around it (supersolution, negative-energy
//! nontriviality, Lyapunov decay, coercivity).
//!
//! Energy integrals use the operator's collocation rule. The box is imposed
//! on a square `K × K` nodal grid, so nodal values and coefficients are in
//! bijection and the projection is exact.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{solve_original, IntegratorConfig, Trajectory};
use crate::model::{eval_reaction_field, ModelSpec};
use crate::quadrature::adaptive_simpson;
use crate::random::FieldSampler;
use crate::spectral::{CollocationGrid, DiscreteOperator, SpectralField};

/// Upper obstacle `ū` of the admissible box.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Supersolution {
    /// `ū ≡ c`; not band-limited, so pairings with it are taken exactly.
    Constant(f64),
    Field(SpectralField),
}

impl Supersolution {
    pub fn nodal(&self, grid: &CollocationGrid) -> Result<Vec<f64>> {
        match self {
            Supersolution::Constant(c) => Ok(vec![*c; grid.len()]),
            Supersolution::Field(u) => grid.to_grid(u),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnergyConfig {
    pub op: DiscreteOperator,
    pub model: ModelSpec,
    pub ubar: Supersolution,
    /// Amplitudes δ of the probe `δφ₁` in the nontriviality scan.
    pub delta_scan: Vec<f64>,
    /// Quadratic lower-bound constant of `F`; fitted when absent.
    pub c0: Option<f64>,
    /// Constant lower-bound remainder ζ; fitted when absent.
    pub zeta: Option<f64>,
    box_grid: CollocationGrid,
}

pub fn default_delta_scan() -> Vec<f64> {
    vec![0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5]
}

impl EnergyConfig {
    pub fn new(op: DiscreteOperator, model: ModelSpec, ubar: Supersolution) -> Result<Self> {
        if !model.is_autonomous() {
            return Err(Error::NotAutonomous(model.name.clone()));
        }
        let box_grid = CollocationGrid::new(op.length(), op.modes(), op.modes())?;
        match &ubar {
            Supersolution::Constant(c) if !(c.is_finite() && *c >= 0.0) => {
                return Err(Error::Precondition(format!("constant obstacle {c} must be finite and nonnegative")));
            }
            Supersolution::Field(u) => {
                let vals = op.to_grid(u)?;
                if vals.iter().any(|v| !v.is_finite() || *v < -1e-12) {
                    return Err(Error::Precondition("obstacle field must be finite and nonnegative".into()));
                }
            }
            _ => {}
        }
        Ok(Self { op, model, ubar, delta_scan: default_delta_scan(), c0: None, zeta: None, box_grid })
    }

    pub fn with_delta_scan(mut self, deltas: Vec<f64>) -> Self {
        self.delta_scan = deltas;
        self
    }

    pub fn with_lower_bound(mut self, c0: f64, zeta: f64) -> Self {
        self.c0 = Some(c0);
        self.zeta = Some(zeta);
        self
    }

    /// The square nodal grid carrying the box constraint.
    pub fn box_grid(&self) -> &CollocationGrid {
        &self.box_grid
    }
}

/// `E(u)`; the Kirchhoff integral is closed form when available.
pub fn energy(cfg: &EnergyConfig, u: &SpectralField) -> Result<f64> {
    let q = cfg.op.quadratic_form(u)?;
    let diffusion = 0.5 * cfg.model.kirchhoff.integral(q)?;
    let values = cfg.op.to_grid(u)?;
    let grid = cfg.op.grid();
    let mut potential = 0.0;
    for (&x, &v) in grid.nodes().iter().zip(&values) {
        potential += cfg.model.primitive(x, v)?;
    }
    let e = diffusion - grid.weight() * potential;
    if !e.is_finite() {
        return Err(Error::NonFinite { context: "energy", time: f64::NAN });
    }
    Ok(e)
}

/// L² representer of `E'(u)`: `g_k = a(q(u))μ_k c_k − f̂_k(u)`.
pub fn energy_gradient(cfg: &EnergyConfig, u: &SpectralField) -> Result<SpectralField> {
    let q = cfg.op.quadratic_form(u)?;
    let a = cfg.model.a(q, 0.0);
    let f = eval_reaction_field(&cfg.op, &cfg.model, 0.0, u)?;
    let g = SpectralField::new(
        cfg.op.eigenvalues().iter().zip(u.coeffs().iter().zip(f.coeffs())).map(|(mu, (c, fk))| a * mu * c - fk).collect(),
    );
    if !g.is_finite() {
        return Err(Error::NonFinite { context: "energy gradient", time: f64::NAN });
    }
    Ok(g)
}

/// `max_k |a(q(u))μ_k c_k − f̂_k(u)|`, the weak residual against the modes.
pub fn weak_residual(cfg: &EnergyConfig, u: &SpectralField) -> Result<f64> {
    Ok(energy_gradient(cfg, u)?.coeffs().iter().fold(0.0, |m: f64, g| m.max(g.abs())))
}

#[derive(Clone, Debug)]
pub enum Start {
    /// The obstacle itself, projected onto the box.
    Obstacle,
    Field(SpectralField),
}

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Bound on `max_q |y_q − P(y_q − G_q)|`.
    pub pg_tol: f64,
    /// Bound on the last accepted energy decrease.
    pub energy_tol: f64,
    pub start: Start,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iter: 50_000, pg_tol: 1e-8, energy_tol: 1e-10, start: Start::Obstacle }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizationResult {
    pub u_star: SpectralField,
    pub energy: f64,
    /// Modal weak residual `max_k |g_k|`.
    pub weak_residual: f64,
    /// `max |E'(u*)|` over box nodes strictly inside the box.
    pub interior_residual: f64,
    pub projected_gradient: f64,
    pub iterations: usize,
    pub active_fraction: f64,
    pub converged: bool,
    pub energy_history: Vec<f64>,
}

const ARMIJO: f64 = 1e-4;
/// Relative size of energy changes treated as roundoff in the line search.
const ENERGY_ROUNDOFF: f64 = 1e-14;

/// Projected gradient with Barzilai–Borwein trial steps and monotone Armijo
/// backtracking on the nodal values of the box grid; the recorded energies
/// are non-increasing up to relative roundoff `1e-14`. Budget exhaustion
/// returns the last iterate with `converged = false`.
pub fn minimize_constrained(cfg: &EnergyConfig, opts: &MinimizeOptions) -> Result<MinimizationResult> {
    let grid = &cfg.box_grid;
    let upper = cfg.ubar.nodal(grid)?;
    let clip = |v: f64, q: usize| v.clamp(0.0, upper[q]);
    let project = |y: &[f64]| -> Vec<f64> { y.iter().enumerate().map(|(q, &v)| clip(v, q)).collect() };
    let w = grid.weight();

    let start = match &opts.start {
        Start::Obstacle => upper.clone(),
        Start::Field(u) => grid.to_grid(u)?,
    };
    let mut y = project(&start);
    let mut u = grid.to_spectral(&y)?;
    let mut e = energy(cfg, &u)?;
    let mut big_g = grid.to_grid(&energy_gradient(cfg, &u)?)?;
    let mu_max = *cfg.op.eigenvalues().last().unwrap();
    let mut eta = 1.0 / (cfg.model.kirchhoff.a_hi.max(cfg.model.kirchhoff.a_lo) * mu_max);
    let mut history = vec![e];
    let mut last_decrease = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    let pg_norm = |y: &[f64], g: &[f64]| -> f64 {
        y.iter().zip(g).enumerate().fold(0.0, |m: f64, (q, (&v, &gq))| m.max((v - clip(v - gq, q)).abs()))
    };

    while iterations < opts.max_iter {
        let pg = pg_norm(&y, &big_g);
        if pg < opts.pg_tol && last_decrease < opts.energy_tol {
            converged = true;
            break;
        }
        if pg == 0.0 {
            converged = true;
            break;
        }
        iterations += 1;
        let mut step = eta;
        let accepted = loop {
            let trial: Vec<f64> = y.iter().zip(&big_g).enumerate().map(|(q, (&v, &g))| clip(v - step * g, q)).collect();
            let u_trial = grid.to_spectral(&trial)?;
            let e_trial = energy(cfg, &u_trial)?;
            let slope: f64 = w * trial.iter().zip(&y).zip(&big_g).map(|((a, b), g)| g * (a - b)).sum::<f64>();
            if e_trial <= e + ARMIJO * slope {
                break Some((trial, u_trial, e_trial, None));
            }
            // Below the roundoff of E the decrease test is blind; a step that
            // leaves E unchanged to roundoff but shrinks the projected
            // gradient is still progress.
            if (e_trial - e).abs() <= ENERGY_ROUNDOFF * (1.0 + e.abs()) {
                let g_trial = grid.to_grid(&energy_gradient(cfg, &u_trial)?)?;
                if pg_norm(&trial, &g_trial) < pg {
                    break Some((trial, u_trial, e_trial, Some(g_trial)));
                }
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((y_new, u_new, e_new, g_known)) = accepted else {
            // No descent is representable any more.
            converged = pg < opts.pg_tol;
            break;
        };
        let g_new = match g_known {
            Some(g) => g,
            None => grid.to_grid(&energy_gradient(cfg, &u_new)?)?,
        };
        let (mut ss, mut sr) = (0.0, 0.0);
        for q in 0..y.len() {
            let s = y_new[q] - y[q];
            ss += s * s;
            sr += s * (g_new[q] - big_g[q]);
        }
        eta = if sr > 0.0 { (ss / sr).clamp(1e-12, 1e6) } else { (2.0 * step).min(1e6) };
        last_decrease = e - e_new;
        y = y_new;
        u = u_new;
        e = e_new;
        big_g = g_new;
        history.push(e);
    }

    // Active-set identification: nodes within the tolerance of a bound whose
    // gradient points out of the box are moved onto it, kept if E does not rise.
    if converged {
        let snapped: Vec<f64> = y
            .iter()
            .zip(&big_g)
            .enumerate()
            .map(|(q, (&v, &g))| match () {
                _ if v <= opts.pg_tol && g > 0.0 => 0.0,
                _ if v >= upper[q] - opts.pg_tol && g < 0.0 => upper[q],
                _ => v,
            })
            .collect();
        if snapped != y {
            let u_snap = grid.to_spectral(&snapped)?;
            let e_snap = energy(cfg, &u_snap)?;
            if e_snap <= e {
                big_g = grid.to_grid(&energy_gradient(cfg, &u_snap)?)?;
                y = snapped;
                u = u_snap;
                e = e_snap;
                history.push(e);
            }
        }
    }

    let eps = 1e-12;
    let mut active = 0usize;
    let mut interior: f64 = 0.0;
    for (q, (&v, &g)) in y.iter().zip(&big_g).enumerate() {
        if v <= eps || v >= upper[q] - eps {
            active += 1;
        } else {
            interior = interior.max(g.abs());
        }
    }
    Ok(MinimizationResult {
        weak_residual: weak_residual(cfg, &u)?,
        interior_residual: interior,
        projected_gradient: pg_norm(&y, &big_g),
        active_fraction: active as f64 / y.len() as f64,
        u_star: u,
        energy: e,
        iterations,
        converged,
        energy_history: history,
    })
}

/// `⟨1, e_k⟩ = √(2/L)·L(1 − cos kπ)/(kπ)`.
fn constant_pairing(length: f64, k: usize) -> f64 {
    let kf = k as f64;
    (2.0 / length).sqrt() * length * (1.0 - (kf * PI).cos()) / (kf * PI)
}

/// Nonnegative band-limited bump centred at `center`:
/// `sin(πx/L)·[F_N(π(x−c)/L) + F_N(π(x+c)/L)]` with the Fejér kernel `F_N`,
/// `N = K − 1`, normalised to unit L² norm.
pub fn fejer_bump(modes: usize, length: f64, center: f64) -> SpectralField {
    let n_max = modes - 1;
    let yc = PI * center / length;
    // Coefficients on sin(ky); the bracket is 2 + 4Σ w_n cos(n·yc) cos(ny).
    let mut s = vec![0.0; modes];
    s[0] += 2.0;
    for n in 1..=n_max {
        let wn = 1.0 - n as f64 / (n_max + 1) as f64;
        let amp = 2.0 * wn * (n as f64 * yc).cos();
        s[n] += amp;
        if n >= 2 {
            s[n - 2] -= amp;
        }
    }
    let field = SpectralField::new(s).scaled((length / 2.0).sqrt());
    let norm = field.l2_norm();
    field.scaled(1.0 / norm)
}

#[derive(Clone, Debug, Serialize)]
pub struct SupersolutionReport {
    pub passed: bool,
    pub worst_margin: f64,
    /// Centre of the worst bump; `None` when the ground mode is worst.
    pub witness_center: Option<f64>,
    pub tests: usize,
}

/// Checks `a(q(ū))⟨Λū, φ⟩ − ⟨f(·, ū), φ⟩ ≥ −tol` on `test_budget` Fejér bumps
/// centred on a uniform interior mesh plus the first eigenfunction. For a
/// constant `ū` the coefficient is the worst end of `[a_lo, a_hi]`.
pub fn supersolution_check(cfg: &EnergyConfig, ubar: &Supersolution, test_budget: usize, tol: f64) -> Result<SupersolutionReport> {
    let op = &cfg.op;
    let model = &cfg.model;
    let (k, len) = (op.modes(), op.length());
    let (lambda_ubar, coefficient, f_pair): (SpectralField, Option<f64>, SpectralField) = match ubar {
        Supersolution::Constant(c) => {
            let lam = SpectralField::new((1..=k).map(|j| c * op.eigenvalues()[j - 1] * constant_pairing(len, j)).collect());
            let norm = (2.0 / len).sqrt();
            let mut fk = Vec::with_capacity(k);
            for j in 1..=k {
                let kf = j as f64 * PI / len;
                fk.push(adaptive_simpson(|x| model.f(x, 0.0, *c) * norm * (kf * x).sin(), 0.0, len, 1e-12)?);
            }
            (lam, None, SpectralField::new(fk))
        }
        Supersolution::Field(u) => {
            let q = op.quadratic_form(u)?;
            (op.apply(u)?, Some(model.a(q, 0.0)), eval_reaction_field(op, model, 0.0, u)?)
        }
    };
    let margin = |phi: &SpectralField| {
        let pairing = lambda_ubar.dot(phi);
        let a = coefficient.unwrap_or(if pairing >= 0.0 { model.kirchhoff.a_lo } else { model.kirchhoff.a_hi });
        a * pairing - f_pair.dot(phi)
    };
    let mut worst = (margin(&op.ground_mode()), None);
    for j in 1..=test_budget {
        let center = j as f64 * len / (test_budget + 1) as f64;
        let m = margin(&fejer_bump(k, len, center));
        if m < worst.0 || m.is_nan() {
            worst = (m, Some(center));
        }
    }
    Ok(SupersolutionReport { passed: worst.0 >= -tol, worst_margin: worst.0, witness_center: worst.1, tests: test_budget + 1 })
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaProbe {
    pub delta: f64,
    pub energy: f64,
    /// Whether `δφ₁` lies in the admissible box.
    pub admissible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NontrivialityReport {
    /// Lower-bound data `F(x,u) ≥ (c₀/2)u² + ζ` on the sampled range.
    pub c0: f64,
    pub zeta: f64,
    pub lower_bound_holds: bool,
    pub a0_mu1: f64,
    /// `a(0)μ₁ < c₀`.
    pub condition_holds: bool,
    pub scan: Vec<DeltaProbe>,
    pub min_energy: f64,
    pub negative_found: bool,
    pub message: String,
}

impl NontrivialityReport {
    /// Smallest scanned energy among admissible probes.
    pub fn admissible_min(&self) -> Option<f64> {
        self.scan.iter().filter(|p| p.admissible).map(|p| p.energy).reduce(f64::min)
    }
}

/// Scans `E(δφ₁)` over the configured amplitudes and checks the small-data
/// condition `a(0)μ₁ < c₀`, where `c₀` is the small-amplitude limit of
/// `2F(x,u)/u²` unless configured.
pub fn nontriviality_check(cfg: &EnergyConfig) -> Result<NontrivialityReport> {
    let op = &cfg.op;
    let model = &cfg.model;
    let x_mid = 0.5 * op.length();
    let c0 = match cfg.c0 {
        Some(c) => c,
        None => {
            let u = 1e-4;
            model.primitive(x_mid, u)? / u / u + model.primitive(x_mid, -u)? / u / u
        }
    };
    let upper = cfg.ubar.nodal(cfg.box_grid())?;
    let range = upper.iter().fold(0.0f64, |m, v| m.max(*v)).max(1e-3);
    let samples: Vec<f64> = (0..=400).map(|i| range * i as f64 / 400.0).collect();
    let mut fitted_zeta = 0.0f64;
    for &u in &samples {
        fitted_zeta = fitted_zeta.min(model.primitive(x_mid, u)? - 0.5 * c0 * u * u);
    }
    let zeta = cfg.zeta.unwrap_or(fitted_zeta);
    let mut lower_bound_holds = true;
    for &u in &samples {
        let rhs = 0.5 * c0 * u * u + zeta;
        if model.primitive(x_mid, u)? < rhs - 1e-12 * (1.0 + rhs.abs()) {
            lower_bound_holds = false;
        }
    }
    let a0_mu1 = model.a(0.0, 0.0) * op.mu1();
    let phi = op.ground_mode();
    let box_phi = cfg.box_grid().to_grid(&phi)?;
    let mut scan = Vec::with_capacity(cfg.delta_scan.len());
    for &delta in &cfg.delta_scan {
        let admissible = box_phi.iter().zip(&upper).all(|(p, ub)| delta * p <= ub + 1e-12 && delta * p >= -1e-12);
        scan.push(DeltaProbe { delta, energy: energy(cfg, &phi.scaled(delta))?, admissible });
    }
    let min_energy = scan.iter().map(|p| p.energy).fold(f64::INFINITY, f64::min);
    let negative_found = min_energy < 0.0;
    let condition_holds = a0_mu1 < c0;
    let message = if negative_found {
        "negative energy reached; nontrivial minimiser expected".to_string()
    } else {
        "condition fails, trivial minimiser expected".to_string()
    };
    Ok(NontrivialityReport { c0, zeta, lower_bound_holds, a0_mu1, condition_holds, scan, min_energy, negative_found, message })
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovReport {
    pub holds: bool,
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    /// Largest step increase `E_{n+1} − E_n` (negative when strictly decreasing).
    pub worst_increase: f64,
    /// First step whose increase exceeds `1e-8·(1 + |E_n|)`.
    pub offending_step: Option<usize>,
    pub h: f64,
}

/// Energy along a trajectory must not increase by more than `1e-8·(1+|E|)` per step.
pub fn lyapunov_check(cfg: &EnergyConfig, traj: &Trajectory) -> Result<LyapunovReport> {
    let energies = traj.states().iter().map(|u| energy(cfg, u)).collect::<Result<Vec<_>>>()?;
    let mut worst = f64::NEG_INFINITY;
    let mut offending = None;
    for (n, w) in energies.windows(2).enumerate() {
        let inc = w[1] - w[0];
        worst = worst.max(inc);
        if offending.is_none() && inc > 1e-8 * (1.0 + w[0].abs()) {
            offending = Some(n);
        }
    }
    let h = traj.times().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(LyapunovReport {
        holds: offending.is_none(),
        times: traj.times().to_vec(),
        energies,
        worst_increase: worst,
        offending_step: offending,
        h,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinedLyapunov {
    pub coarse: LyapunovReport,
    pub refined: Option<LyapunovReport>,
    pub holds: bool,
}

/// Runs the check at step `h`; on failure re-runs at `h/4`, and only a
/// violation that survives refinement counts.
pub fn lyapunov_with_refinement(cfg: &EnergyConfig, u0: &SpectralField, integrator: &IntegratorConfig) -> Result<RefinedLyapunov> {
    let coarse = lyapunov_check(cfg, &solve_original(&cfg.op, &cfg.model, u0, integrator)?)?;
    if coarse.holds {
        return Ok(RefinedLyapunov { coarse, refined: None, holds: true });
    }
    let fine = IntegratorConfig { h: integrator.h / 4.0, ..*integrator };
    let refined = lyapunov_check(cfg, &solve_original(&cfg.op, &cfg.model, u0, &fine)?)?;
    let holds = refined.holds;
    Ok(RefinedLyapunov { coarse, refined: Some(refined), holds })
}

#[derive(Clone, Debug, Serialize)]
pub struct CoercivityReport {
    /// `dissipativity` or `fitted`.
    pub method: String,
    pub sigma: f64,
    pub c0: f64,
    pub c1: f64,
    pub mu1: f64,
    /// `E(u) ≥ c_mu·‖u‖²_{X^{1/2}} − c_const`.
    pub c_mu: f64,
    pub c_const: f64,
    pub samples: usize,
    pub min_margin: f64,
    pub holds: bool,
}

/// Lower bound `E(u) ≥ C_μ‖u‖²_{X^{1/2}} − C` checked on rays `c·e₁` and random
/// directions with `‖u‖_{X^{1/2}}` up to 10³.
///
/// With `κ = σ/2 + min(C₀,0)/(2μ₁) > 0` the dissipativity bound gives
/// `C_μ = κ/2`, `C = C₁²|Ω|/(2κμ₁)`. Otherwise `F(u) ≤ εu² + M_ε` with
/// `ε = σμ₁/4` and `M_ε` the sampled supremum gives `C_μ = σ/4`, `C = M_ε|Ω|`.
pub fn coercivity_report(cfg: &EnergyConfig, seed: u64) -> Result<CoercivityReport> {
    let op = &cfg.op;
    let model = &cfg.model;
    let (sigma, c0, c1, mu1) = (model.kirchhoff.a_lo, model.reaction.c0, model.reaction.c1, op.mu1());
    let omega = op.length();
    let kappa = 0.5 * sigma + c0.min(0.0) / (2.0 * mu1);
    let (method, c_mu, c_const) = if kappa > 0.0 {
        ("dissipativity", 0.5 * kappa, c1 * c1 * omega / (2.0 * kappa * mu1))
    } else {
        let eps = 0.25 * sigma * mu1;
        let x_mid = 0.5 * omega;
        let range = 10.0 * model.state_range;
        let mut m_eps = 0.0f64;
        for i in 0..=20_000 {
            let u = -range + 2.0 * range * i as f64 / 20_000.0;
            m_eps = m_eps.max(model.primitive(x_mid, u)? - eps * u * u);
        }
        ("fitted", 0.25 * sigma, m_eps * omega)
    };
    let mut probes: Vec<SpectralField> = (-3..=3).map(|e| op.ground_mode().scaled(10f64.powi(e) / mu1.sqrt())).collect();
    let mut rng = FieldSampler::new(seed);
    for i in 0..40 {
        let u = rng.uniform(op.modes(), 1.0);
        let target = 10f64.powf(-2.0 + 5.0 * i as f64 / 39.0);
        probes.push(u.scaled(target / op.energy_norm(&u)?.max(1e-300)));
    }
    let mut min_margin = f64::INFINITY;
    for u in &probes {
        let m = energy(cfg, u)? - (c_mu * op.quadratic_form(u)? - c_const);
        min_margin = min_margin.min(m);
    }
    Ok(CoercivityReport {
        method: method.into(),
        sigma,
        c0,
        c1,
        mu1,
        c_mu,
        c_const,
        samples: probes.len(),
        min_margin,
        holds: min_margin >= -1e-9 && c_mu > 0.0,
    })
}
