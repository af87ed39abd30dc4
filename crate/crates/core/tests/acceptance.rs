//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! quantities and the wall-clock budget. Exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kp_core::equilibrium::{
    energy, energy_gradient, lyapunov_with_refinement, minimize_constrained, supersolution_check, EnergyConfig, MinimizeOptions, Start,
    Supersolution,
};
use kp_core::evolution::{solve_barrier, solve_original, solve_rescaled, ClockSource};
use kp_core::model::{builtin_models, model_by_name, validate_hypotheses, PERIODIC_MODEL_PERIOD};
use kp_core::order::{comparison_check, in_cone, monotonicity_check, sandwich_check, DEFAULT_ORDER_TOL};
use kp_core::pullback::{approximate_attractor, barrier_equilibria, nonautonomous_equilibrium, seed_net, BarrierSearch, SetNorm};
use kp_core::*;

type Outcome = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn op(modes: usize) -> DiscreteOperator {
    DiscreteOperator::new(OperatorSpec::new(1, 0.0, modes, PI)).unwrap()
}

fn linear_exactness() -> Outcome {
    let o = op(16);
    let a = 1.7;
    let model = ModelSpec::new("heat", KirchhoffCoefficient::constant(a), ReactionSpec::zero());
    let u0 = FieldSampler::new(11).uniform(16, 1.0);
    let mut worst: f64 = 0.0;
    for steps in [1usize, 3, 10, 137, 1000] {
        let traj = solve_original(&o, &model, &u0, &IntegratorConfig::new(5.0 / steps as f64, (0.0, 5.0)))?;
        for (t, u) in traj.times().iter().zip(traj.states()) {
            let exact = SpectralField::new(u0.coeffs().iter().zip(o.eigenvalues()).map(|(c, mu)| c * (-a * mu * t).exp()).collect());
            let err = (u - &exact).l2_norm() / exact.l2_norm().max(f64::MIN_POSITIVE);
            worst = worst.max(err);
        }
    }
    Ok((worst < 1e-12, format!("max relative error {worst:.2e} (< 1e-12)")))
}

fn clock_equivalence() -> Outcome {
    let o = op(16);
    let model = model_by_name("affine").unwrap();
    let u0 = FieldSampler::new(21).uniform(16, 1.0);
    let t_end = 5.0;
    let mut errors = Vec::new();
    for h in [1e-3, 5e-4, 2.5e-4] {
        let orig = solve_original(&o, &model, &u0, &IntegratorConfig::new(h, (0.0, t_end)))?;
        let tau_end = orig.ledger_at(t_end)?;
        let resc =
            solve_rescaled(&o, &model, &u0, &IntegratorConfig::new(h, (0.0, tau_end)), ClockSource::SelfConsistent { t_start: 0.0 })?;
        let mut err: f64 = 0.0;
        for j in 1..=20 {
            let t = t_end * j as f64 / 20.0;
            let tau = orig.ledger_at(t)?.min(tau_end);
            err = err.max(o.energy_norm(&(&orig.state_at(t)? - &resc.state_at(tau)?))?);
        }
        errors.push(err);
    }
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let first_order = ratios.iter().all(|r| (1.6..=2.5).contains(r));
    let fine = *errors.last().unwrap();
    Ok((fine < 1e-4 && first_order, format!("X^1/2 error {fine:.2e} (< 1e-4), halving ratios {ratios:.2?}")))
}

fn sandwich() -> Outcome {
    let o = DiscreteOperator::with_nodes(OperatorSpec::new(1, 0.0, 16, PI), 48)?;
    let model = model_by_name("affine").unwrap();
    let u1 = FieldSampler::new(31).uniform(16, 1.0);
    let delta = o.ground_mode().scaled(0.1);
    let (u0, u2) = (&u1 - &delta, &u1 + &delta);
    let cfg = IntegratorConfig::new(0.01, (0.0, 10.0));
    let lower = solve_barrier(&o, &model, BarrierSide::Lower, &u0, &cfg)?;
    let upper = solve_barrier(&o, &model, BarrierSide::Upper, &u2, &cfg)?;
    let middle = solve_rescaled(&o, &model, &u1, &cfg, ClockSource::SelfConsistent { t_start: 0.0 })?;
    let report = sandwich_check(o.grid(), &lower, &middle, &upper, 1e-7)?;
    let swapped = sandwich_check(o.grid(), &upper, &middle, &lower, 1e-7)?;
    Ok((
        report.verdict && !swapped.verdict,
        format!("slack {:.2e} (≥ −1e-7); swapped control fails at τ = {:?}", report.slack, swapped.first_failure_time),
    ))
}

fn monotonicity() -> Outcome {
    let o = op(16);
    let mut rng = FieldSampler::new(41);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for i in 0..20 {
        let model = model_by_name(["affine", "cubic", "affine-periodic", "linear"][i % 4]).unwrap();
        let process = Process::full(&o, &model, 0.01)?;
        let u1 = rng.uniform(16, 1.0);
        let u0 = &u1 + &rng.nonnegative(16, 0.5);
        let r = monotonicity_check(&process, &u0, &u1, 10.0, 0.0, DEFAULT_ORDER_TOL)?;
        violations += usize::from(!r.verdict);
        worst = worst.min(r.slack);
    }
    for i in 0..10 {
        let base = model_by_name(["affine", "cubic"][i % 2]).unwrap();
        let bump = 0.05 * (i + 1) as f64;
        let f = base.reaction.clone();
        let mut raised = base.clone();
        raised.reaction = ReactionSpec::new(move |x, t, u| f.f(x, t, u) + bump, |u| u, |u| u, 1.0, 1.0).autonomous(true);
        let lesser = Process::full(&o, &base, 0.01)?;
        let greater = Process::full(&o, &raised, 0.01)?;
        let u0 = rng.uniform(16, 1.0);
        let r = comparison_check(&greater, &lesser, &u0, 10.0, 0.0, DEFAULT_ORDER_TOL)?;
        violations += usize::from(!r.verdict);
        worst = worst.min(r.slack);
    }
    Ok((violations == 0, format!("{violations} violations in 30 runs, worst slack {worst:.2e}")))
}

fn pullback() -> Outcome {
    let o = op(12);
    let model = model_by_name("affine-periodic").unwrap();
    let interval = barrier_equilibria(&o, &model, &o.zero(), &BarrierSearch::default())?;
    let process = Process::full(&o, &model, 0.01)?;
    let mut rng = FieldSampler::new(51);
    let mut cone_ok = true;
    for _ in 0..10 {
        let traj = process.trajectory(20.0, 0.0, &rng.nonnegative(12, 1.0))?;
        for u in traj.states() {
            cone_ok &= in_cone(o.grid(), u, DEFAULT_ORDER_TOL)?;
        }
    }
    let attractor = approximate_attractor(&process, 0.0, &seed_net(&interval, 52), 1e-5, 64.0, SetNorm::XHalf)?;
    let t_grid: Vec<f64> = (0..=8).map(|i| 0.5 * i as f64).collect();
    let eq = nonautonomous_equilibrium(&process, &interval, &t_grid, 16.0 * PERIODIC_MODEL_PERIOD, 1e-5)?;
    let final_d = attractor.final_semidistance().unwrap_or(f64::INFINITY);
    let depth = attractor.depths.last().copied().unwrap_or(f64::NAN);
    Ok((
        cone_ok && attractor.converged && final_d < 1e-5 && eq.in_cone && eq.process_residual < 1e-5,
        format!(
            "barriers ordered; cone invariance {cone_ok}; attractor semidistance {final_d:.2e} at depth {depth}; \
             equilibrium residual {:.2e}, in cone {}",
            eq.process_residual, eq.in_cone
        ),
    ))
}

fn gradient_check() -> Outcome {
    let o = op(16);
    let cfg = EnergyConfig::new(o, model_by_name("cubic").unwrap(), Supersolution::Constant(1.0))?;
    let mut rng = FieldSampler::new(61);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..20 {
        let u = rng.uniform(16, 1.5);
        let v = rng.uniform(16, 1.0);
        let exact = energy_gradient(&cfg, &u)?.dot(&v);
        let err = |h: f64| -> Result<f64> {
            let fd = (energy(&cfg, &u.axpy(h, &v))? - energy(&cfg, &u.axpy(-h, &v))?) / (2.0 * h);
            Ok((fd - exact).abs())
        };
        let ratio = err(1e-2)? / err(1e-3)?;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok(((80.0..=120.0).contains(&lo) && (80.0..=120.0).contains(&hi), format!("error ratios in [{lo:.1}, {hi:.1}]")))
}

fn lyapunov() -> Outcome {
    let o = op(16);
    let mut rng = FieldSampler::new(71);
    let mut failures = 0;
    let mut refined = 0;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..10 {
        let model = model_by_name(["affine", "cubic", "linear"][i % 3]).unwrap();
        let cfg = EnergyConfig::new(o.clone(), model, Supersolution::Constant(1.0))?;
        let u0 = rng.uniform(16, 2.0);
        let r = lyapunov_with_refinement(&cfg, &u0, &IntegratorConfig::new(0.01, (0.0, 5.0)))?;
        failures += usize::from(!r.holds);
        refined += usize::from(r.refined.is_some());
        worst = worst.max(r.refined.as_ref().unwrap_or(&r.coarse).worst_increase);
    }
    Ok((failures == 0, format!("{failures} failing trajectories, {refined} refined, worst step change {worst:.2e}")))
}

fn cubic_equilibrium() -> Outcome {
    let o = op(16);
    let model = model_by_name("cubic").unwrap();
    let gamma: f64 = 0.8;
    let precondition = gamma > model.a(0.0, 0.0) * o.mu1();
    let ubar = Supersolution::Constant(gamma.sqrt());
    let cfg = EnergyConfig::new(o.clone(), model, ubar.clone())?;
    let sup = supersolution_check(&cfg, &ubar, 64, 1e-9)?;
    let a = minimize_constrained(&cfg, &MinimizeOptions::default())?;
    let b = minimize_constrained(&cfg, &MinimizeOptions { start: Start::Field(o.ground_mode().scaled(0.01)), ..Default::default() })?;
    let fine = o.grid().to_grid(&a.u_star)?;
    let boxed = fine.iter().all(|&v| v >= -1e-9 && v <= gamma.sqrt() + 1e-9);
    let spread = o.grid().to_grid(&(&a.u_star - &b.u_star))?.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let lin = EnergyConfig::new(o.clone(), model_by_name("linear").unwrap(), Supersolution::Constant(1.0))?;
    let z = minimize_constrained(&lin, &MinimizeOptions::default())?;
    let trivial = z.u_star.l2_norm() < 1e-10 && z.energy.abs() < 1e-12;

    let ok = precondition
        && sup.passed
        && a.converged
        && boxed
        && a.interior_residual < 1e-5
        && a.energy < 0.0
        && a.u_star.l2_norm() > 1e-3
        && trivial
        && spread < 1e-5;
    Ok((
        ok,
        format!(
            "γ > a(0)μ₁ {precondition}, ū = √γ supersolution {} (margin {:.1e}), converged {}; E = {:.6}, ‖u*‖ = {:.4}, residual {:.1e}, multistart spread {spread:.1e}, box {boxed}, f = −u gives ‖u*‖ = {:.1e}, E = {:.1e}",
            sup.passed,
            sup.worst_margin,
            a.converged,
            a.energy,
            a.u_star.l2_norm(),
            a.interior_residual,
            z.u_star.l2_norm(),
            z.energy
        ),
    ))
}

fn validator() -> Outcome {
    let o = op(16);
    let catalog_ok = builtin_models().iter().all(|m| validate_hypotheses(&o, m, 4000, 1).all_passed());

    let mut quadratic = model_by_name("affine").unwrap();
    quadratic.reaction = ReactionSpec::new(|_, _, u| u * u, |u| u * u - 1.0, |u| u * u + 1.0, 1.0, 1.0 + 1e-9)
        .autonomous(true)
        .constants(2.0, 1.0, 1.0, 1.0, 0.0);
    let mut unbounded = model_by_name("affine").unwrap();
    unbounded.kirchhoff = KirchhoffCoefficient::autonomous(2.0, 3.0, |s| s);
    let mut inverted = model_by_name("affine").unwrap();
    inverted.reaction = inverted.reaction.clone().with_envelopes(|u| 1.0 - u, |u| 0.5 - 2.0 * u, 1.0, 0.5);

    let mut caught = Vec::new();
    for m in [&quadratic, &unbounded, &inverted] {
        let report = validate_hypotheses(&o, m, 4000, 2);
        let witnessed = report.failures().any(|c| c.witness.is_some()) || report.failures().any(|c| c.name == "envelope_constants");
        caught.push(!report.all_passed() && witnessed);
    }
    Ok((catalog_ok && caught.iter().all(|&c| c), format!("catalog passes {catalog_ok}; broken models caught {caught:?}")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("linear exactness", linear_exactness, Duration::from_secs(1)),
        ("clock equivalence", clock_equivalence, Duration::from_secs(30)),
        ("sandwich", sandwich, Duration::from_secs(60)),
        ("monotonicity and comparison", monotonicity, Duration::from_secs(120)),
        ("pullback attractor", pullback, Duration::from_secs(300)),
        ("energy gradient", gradient_check, Duration::from_secs(10)),
        ("lyapunov decay", lyapunov, Duration::from_secs(60)),
        ("cubic equilibrium", cubic_equilibrium, Duration::from_secs(60)),
        ("hypothesis validator", validator, Duration::from_secs(10)),
    ];
    let mut all = true;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && elapsed <= *budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= ok;
        println!(
            "{} criterion {}: {name}: {detail} [{:.2}s / {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
