//! Task bodies. Each writes its artifacts and returns whether every checked
//! property held; errors mean the task could not run.

use anyhow::{bail, Context, Result};
use kp_core::equilibrium::{
    coercivity_report, lyapunov_with_refinement, minimize_constrained, nontriviality_check, supersolution_check, EnergyConfig,
    MinimizationResult, MinimizeOptions, Start, Supersolution,
};
use kp_core::evolution::{absorption_bound, solve_barrier, solve_original, solve_rescaled, ClockSource};
use kp_core::model::{ar_condition_check, validate_hypotheses};
use kp_core::order::{monotonicity_check, sandwich_check, OrderReport};
use kp_core::pullback::{
    approximate_attractor, barrier_equilibria, interval_invariance, nonautonomous_equilibrium, seed_net, BarrierSearch,
};
use kp_core::{BarrierSide, Clock, DiscreteOperator, Error, FieldSampler, ModelSpec, Process, SpectralField, Trajectory};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::artifacts::Artifacts;
use crate::config::{InitialConfig, ObstacleConfig, ScenarioConfig, Task};

pub struct Outcome {
    pub passed: bool,
    pub summary: String,
}

pub struct TaskContext<'a> {
    pub cfg: &'a ScenarioConfig,
    pub op: DiscreteOperator,
    pub model: ModelSpec,
    pub rng: FieldSampler,
}

pub fn run_task(cfg: &ScenarioConfig, out: &mut Artifacts) -> Result<Outcome> {
    let op = cfg.operator.build()?;
    let model = cfg.model.build()?;
    let mut ctx = TaskContext { cfg, op, model, rng: FieldSampler::new(cfg.seed) };
    match cfg.task {
        Task::Evolve => evolve(&mut ctx, out),
        Task::Compare => compare(&mut ctx, out),
        Task::Attract => attract(&mut ctx, out),
        Task::Equilibrate => equilibrate(&mut ctx, out),
        Task::Validate => validate(&mut ctx, out),
    }
}

fn initial_state(ctx: &mut TaskContext<'_>) -> Result<SpectralField> {
    let k = ctx.op.modes();
    Ok(match &ctx.cfg.initial {
        InitialConfig::Zero => ctx.op.zero(),
        InitialConfig::Mode { mode, scale } => {
            if *mode == 0 || *mode > k {
                bail!("initial mode {mode} outside 1..={k}");
            }
            SpectralField::mode(k, *mode, *scale)
        }
        InitialConfig::Random { scale } => ctx.rng.uniform(k, *scale),
        InitialConfig::Nonnegative { scale } => ctx.rng.nonnegative(k, *scale),
        InitialConfig::Coeffs { coeffs } => {
            if coeffs.len() != k {
                bail!("initial coefficient list has {} entries, operator has {k} modes", coeffs.len());
            }
            SpectralField::new(coeffs.clone())
        }
    })
}

fn evolve(ctx: &mut TaskContext<'_>, out: &mut Artifacts) -> Result<Outcome> {
    let u0 = initial_state(ctx)?;
    let (op, model, integ) = (&ctx.op, &ctx.model, &ctx.cfg.integrator);
    let traj = solve_original(op, model, &u0, integ)?;
    out.trajectory("trajectory.csv", op, &traj)?;
    let norms = traj.states().iter().map(|u| op.energy_norm(u)).collect::<kp_core::Result<Vec<_>>>()?;
    let final_state = traj.final_state().expect("solver returns at least the initial state");

    let mut clock_gap = None;
    if ctx.cfg.evolve.rescaled {
        let (s, t) = integ.t_span;
        let tau_end = traj.ledger_at(t)? - traj.ledger_at(s)?;
        let rescaled_cfg = integ.with_span(0.0, tau_end).with_richardson(false);
        let resc = solve_rescaled(op, model, &u0, &rescaled_cfg, ClockSource::SelfConsistent { t_start: s })?;
        out.trajectory("trajectory_rescaled.csv", op, &resc)?;
        let mut gap: f64 = 0.0;
        for j in 1..=20 {
            let time = s + (t - s) * j as f64 / 20.0;
            let tau = (traj.ledger_at(time)? - traj.ledger_at(s)?).min(tau_end);
            gap = gap.max(op.energy_norm(&(&traj.state_at(time)? - &resc.state_at(tau)?))?);
        }
        clock_gap = Some(gap);
    }
    let report = json!({
        "model": model.name,
        "samples": traj.len(),
        "t_span": integ.t_span,
        "final_l2": final_state.l2_norm(),
        "final_xhalf": op.energy_norm(final_state)?,
        "max_xhalf": norms.iter().copied().fold(0.0, f64::max),
        "richardson_estimate": traj.richardson_estimate,
        "absorption_bound": absorption_bound(op, model),
        "clock_gap_xhalf": clock_gap,
    });
    out.json("evolve.json", &report)?;
    Ok(Outcome { passed: true, summary: format!("{} samples, final X^1/2 norm {:.6e}", traj.len(), op.energy_norm(final_state)?) })
}

#[derive(Serialize)]
struct OrderSummary {
    verdict: bool,
    slack: f64,
    worst_time: f64,
    worst_node: usize,
    first_failure_time: Option<f64>,
}

impl From<&OrderReport> for OrderSummary {
    fn from(r: &OrderReport) -> Self {
        Self {
            verdict: r.verdict,
            slack: r.slack,
            worst_time: r.worst_time,
            worst_node: r.worst_node,
            first_failure_time: r.first_failure_time,
        }
    }
}

fn compare(ctx: &mut TaskContext<'_>, out: &mut Artifacts) -> Result<Outcome> {
    let u1 = initial_state(ctx)?;
    let cc = ctx.cfg.compare.clone();
    let pairs: Vec<(SpectralField, SpectralField)> = (0..cc.pairs)
        .map(|_| {
            let lo = ctx.rng.uniform(ctx.op.modes(), 1.0);
            let hi = &lo + &ctx.rng.nonnegative(ctx.op.modes(), 0.5);
            (hi, lo)
        })
        .collect();
    let (op, model, integ) = (&ctx.op, &ctx.model, &ctx.cfg.integrator);
    let delta = op.ground_mode().scaled(cc.delta);
    let (u0, u2) = (&u1 - &delta, &u1 + &delta);
    let lower = solve_barrier(op, model, BarrierSide::Lower, &u0, integ)?;
    let upper = solve_barrier(op, model, BarrierSide::Upper, &u2, integ)?;
    let middle = solve_rescaled(op, model, &u1, integ, ClockSource::SelfConsistent { t_start: integ.t_span.0 })?;
    let sandwich = if cc.swap_barriers {
        sandwich_check(op.grid(), &upper, &middle, &lower, cc.tol)?
    } else {
        sandwich_check(op.grid(), &lower, &middle, &upper, cc.tol)?
    };
    out.trajectory("lower.csv", op, &lower)?;
    out.trajectory("middle.csv", op, &middle)?;
    out.trajectory("upper.csv", op, &upper)?;

    let process = Process::full(op, model, integ.h)?.with_guard(integ.max_state_norm);
    let (s, t) = integ.t_span;
    let monotone: Vec<OrderSummary> = pairs
        .par_iter()
        .map(|(hi, lo)| monotonicity_check(&process, hi, lo, t, s, cc.tol).map(|r| OrderSummary::from(&r)))
        .collect::<kp_core::Result<_>>()?;
    let monotone_ok = monotone.iter().all(|r| r.verdict);
    out.json(
        "compare.json",
        &json!({
            "swap_barriers": cc.swap_barriers,
            "delta": cc.delta,
            "tol": cc.tol,
            "sandwich": OrderSummary::from(&sandwich),
            "monotonicity": monotone,
        }),
    )?;
    out.table("sandwich_slack.csv", &["time", "slack"], sandwich.times.iter().zip(&sandwich.slacks).map(|(t, s)| vec![*t, *s]))?;
    Ok(Outcome {
        passed: sandwich.verdict && monotone_ok,
        summary: format!(
            "sandwich {} (slack {:.3e}), monotonicity {}/{} pairs ordered",
            if sandwich.verdict { "holds" } else { "fails" },
            sandwich.slack,
            monotone.iter().filter(|r| r.verdict).count(),
            monotone.len()
        ),
    })
}

fn attract(ctx: &mut TaskContext<'_>, out: &mut Artifacts) -> Result<Outcome> {
    let ac = ctx.cfg.attract.clone();
    let (op, model, integ) = (&ctx.op, &ctx.model, &ctx.cfg.integrator);
    let interval = barrier_equilibria(op, model, &op.zero(), &BarrierSearch::default())?;
    let process = Process::full(op, model, integ.h)?.with_guard(integ.max_state_norm);
    let seeds = seed_net(&interval, ctx.cfg.seed);
    let approx = approximate_attractor(&process, ac.t_eval, &seeds, ac.tol, ac.max_depth, ac.norm)?;
    let invariance = interval_invariance(&process, &interval, &seeds[..9], ac.t_eval, ac.t_eval + ac.invariance_horizon, 1e-7)?;
    let equilibrium = match nonautonomous_equilibrium(&process, &interval, &ac.equilibrium_grid, ac.equilibrium_depth, ac.tol) {
        Ok(eq) => Some(eq),
        Err(Error::NoConvergence(msg)) => {
            out.json("equilibrium_failure.json", &json!({ "error": msg }))?;
            None
        }
        Err(e) => return Err(e.into()),
    };

    out.field("barrier_lower.csv", op, &interval.lo)?;
    out.field("barrier_upper.csv", op, &interval.hi)?;
    let mut members = Vec::new();
    for (i, u) in approx.final_set().iter().enumerate() {
        let name = format!("attractor/member_{i:02}.csv");
        out.field(&name, op, u)?;
        members.push(name);
    }
    out.json(
        "attractor/manifest.json",
        &json!({
            "t_eval": ac.t_eval,
            "depth": approx.depths.last(),
            "norm": ac.norm,
            "members": members,
        }),
    )?;
    if let Some(eq) = &equilibrium {
        let traj = Trajectory::new(Clock::Original, eq.t_grid.clone(), eq.xi.clone(), None)?;
        out.trajectory("equilibrium.csv", op, &traj)?;
    }
    let eq_summary = equilibrium.as_ref().map(|eq| {
        json!({
            "t_grid": eq.t_grid,
            "depth": eq.depth,
            "process_residual": eq.process_residual,
            "residuals": eq.residuals,
            "in_cone": eq.in_cone,
            "interval_margin": eq.interval_margin,
        })
    });
    out.json(
        "attract.json",
        &json!({
            "t_eval": ac.t_eval,
            "tol": ac.tol,
            "norm": ac.norm,
            "depths": approx.depths,
            "semidistances": approx.semidistances,
            "converged": approx.converged,
            "burn_in": approx.burn_in,
            "final_semidistance": approx.final_semidistance(),
            "diameter": approx.diameter(op)?,
            "invariance": invariance,
            "equilibrium": eq_summary,
        }),
    )?;
    let eq_ok = equilibrium.as_ref().is_some_and(|eq| eq.in_cone);
    Ok(Outcome {
        passed: approx.converged && invariance.holds && eq_ok,
        summary: format!(
            "pullback {} at depth {} (semidistance {:.3e}); interval invariance {}; equilibrium {}",
            if approx.converged { "converged" } else { "not converged" },
            approx.depths.last().copied().unwrap_or(0.0),
            approx.final_semidistance().unwrap_or(f64::NAN),
            invariance.holds,
            match &equilibrium {
                Some(eq) => format!("residual {:.3e}", eq.process_residual),
                None => "not converged".into(),
            }
        ),
    })
}

fn distance_sup(op: &DiscreteOperator, a: &SpectralField, b: &SpectralField) -> Result<f64> {
    Ok(op.to_grid(&(a - b))?.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

fn equilibrate(ctx: &mut TaskContext<'_>, out: &mut Artifacts) -> Result<Outcome> {
    let ec = ctx.cfg.equilibrate.clone();
    let u0 = initial_state(ctx)?;
    let k = ctx.op.modes();
    let ubar = match ec.ubar {
        ObstacleConfig::Constant { value } => Supersolution::Constant(value),
        ObstacleConfig::Ground { scale } => Supersolution::Field(ctx.op.ground_mode().scaled(scale)),
    };
    let mut ecfg = EnergyConfig::new(ctx.op.clone(), ctx.model.clone(), ubar.clone())
        .context("equilibrate needs an autonomous model and a nonnegative obstacle")?
        .with_delta_scan(ec.delta_scan.clone());
    ecfg.c0 = ec.c0;
    ecfg.zeta = ec.zeta;

    let supersolution = if ec.waive_supersolution { None } else { Some(supersolution_check(&ecfg, &ubar, ec.test_functions, 1e-9)?) };
    let nontriviality = nontriviality_check(&ecfg)?;

    let mut starts = vec![Start::Obstacle, Start::Field(ctx.op.ground_mode().scaled(0.01))];
    let top = ubar.nodal(ecfg.box_grid())?.into_iter().fold(0.0f64, f64::max);
    starts.extend((0..ec.restarts).map(|_| Start::Field(ctx.rng.nonnegative(k, top))));
    let runs: Vec<MinimizationResult> = starts
        .into_par_iter()
        .map(|start| minimize_constrained(&ecfg, &MinimizeOptions { start, ..Default::default() }))
        .collect::<kp_core::Result<_>>()?;
    let best = runs.iter().min_by(|a, b| a.energy.total_cmp(&b.energy)).expect("at least two starts");
    let mut spread: f64 = 0.0;
    for r in &runs {
        spread = spread.max(distance_sup(&ctx.op, &r.u_star, &best.u_star)?);
    }
    let all_converged = runs.iter().all(|r| r.converged);

    let lyapunov = lyapunov_with_refinement(&ecfg, &u0, &ctx.cfg.integrator)?;
    let used = lyapunov.refined.as_ref().unwrap_or(&lyapunov.coarse);
    out.json(
        "lyapunov.json",
        &json!({
            "holds": lyapunov.holds,
            "refined": lyapunov.refined.is_some(),
            "h": used.h,
            "worst_increase": used.worst_increase,
            "offending_step": used.offending_step,
            "times": used.times,
            "energies": used.energies,
        }),
    )?;
    let coercivity = coercivity_report(&ecfg, ctx.cfg.seed)?;

    out.field("u_star.csv", &ctx.op, &best.u_star)?;
    out.json(
        "equilibrium.json",
        &json!({
            "energy": best.energy,
            "residual": best.weak_residual,
            "interior_residual": best.interior_residual,
            "iterations": best.iterations,
            "active_fraction": best.active_fraction,
            "converged": all_converged,
            "delta_scan": nontriviality.scan,
            "nontriviality": nontriviality,
            "supersolution": supersolution,
            "supersolution_waived": ec.waive_supersolution,
            "multistart": {
                "energies": runs.iter().map(|r| r.energy).collect::<Vec<_>>(),
                "spread": spread,
                "tol": ec.agreement_tol,
            },
            "coercivity": coercivity,
        }),
    )?;
    let sup_ok = supersolution.as_ref().is_none_or(|s| s.passed);
    let passed = sup_ok && all_converged && spread <= ec.agreement_tol && lyapunov.holds && coercivity.holds;
    Ok(Outcome {
        passed,
        summary: format!(
            "E(u*) = {:.8e}, residual {:.2e}, multistart spread {:.2e}, supersolution {}, lyapunov {}, {}",
            best.energy,
            best.weak_residual,
            spread,
            match &supersolution {
                Some(s) if s.passed => "verified",
                Some(_) => "FAILED",
                None => "waived",
            },
            if lyapunov.holds { "holds" } else { "fails" },
            nontriviality.message
        ),
    })
}

fn validate(ctx: &mut TaskContext<'_>, out: &mut Artifacts) -> Result<Outcome> {
    let report = validate_hypotheses(&ctx.op, &ctx.model, ctx.cfg.validate.budget, ctx.cfg.seed);
    let ar = match ctx.model.reaction.ar {
        Some(_) => {
            let range = ctx.model.state_range;
            let us: Vec<f64> = (-200..=200).map(|i| range * i as f64 / 200.0).collect();
            Some(ar_condition_check(&ctx.model, 0.5 * ctx.op.length(), &us)?)
        }
        None => None,
    };
    out.json("validate.json", &json!({ "hypotheses": report, "ar_condition": ar }))?;
    let ar_ok = ar.as_ref().is_none_or(|r| r.holds());
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    Ok(Outcome {
        passed: report.all_passed() && ar_ok,
        summary: if failed.is_empty() && ar_ok {
            format!("all {} hypothesis checks pass", report.checks.len())
        } else {
            format!("failing checks: {}{}", failed.join(", "), if ar_ok { "" } else { " (+ AR condition)" })
        },
    })
}
