//! Sampled checks of the structural hypotheses on `a` and `f`.
//!
//! Every check records the worst margin `rhs − lhs` over its samples and, on
//! failure, the sample point that produced it. Failures are report entries;
//! validation itself never errors.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::ModelSpec;
use crate::error::{Error, Result};
use crate::random::FieldSampler;
use crate::spectral::DiscreteOperator;

/// Upper end of the sampled range for the nonlocal argument `s`.
const S_MAX: f64 = 1e3;
const MIN_BUDGET: usize = 1000;

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    pub worst_margin: f64,
    pub witness: Option<BTreeMap<String, f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub model: String,
    /// First eigenvalue `(π/L)^{2m} + C₀` of `A + C₀I`.
    pub lambda1: f64,
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Tracker {
    name: &'static str,
    samples: usize,
    worst: f64,
    violated: bool,
    witness: Option<BTreeMap<String, f64>>,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self { name, samples: 0, worst: f64::INFINITY, violated: false, witness: None }
    }

    /// Records `rhs − lhs`; the sample fails when it is below `−tol` or NaN.
    fn record(&mut self, lhs: f64, rhs: f64, point: &[(&str, f64)]) {
        self.samples += 1;
        let margin = rhs - lhs;
        let tol = 1e-9 * (1.0 + lhs.abs() + rhs.abs());
        let bad = margin.is_nan() || margin < -tol;
        if bad && (!self.violated || margin < self.worst || margin.is_nan()) {
            self.violated = true;
            self.witness = Some(point.iter().map(|(k, v)| (k.to_string(), *v)).collect());
        }
        if margin.is_nan() || margin < self.worst {
            self.worst = margin;
        }
    }

    fn finish(self) -> HypothesisCheck {
        HypothesisCheck {
            name: self.name.to_string(),
            passed: !self.violated && self.samples > 0,
            samples: self.samples,
            worst_margin: self.worst,
            witness: self.witness,
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64)
}

/// Checks every structural hypothesis of the model on deterministic and
/// seeded random samples. Budgets below 10³ are raised to 10³.
pub fn validate_hypotheses(op: &DiscreteOperator, model: &ModelSpec, budget: usize, seed: u64) -> HypothesisReport {
    let n = budget.max(MIN_BUDGET);
    let mut rng = FieldSampler::new(seed);
    let r = &model.reaction;
    let k = &model.kirchhoff;
    let (t0, t1) = model.time_window;
    let ur = model.state_range;
    let len = op.length();

    let s_samples: Vec<f64> =
        std::iter::once(0.0).chain((-6..=6).map(|e| 10f64.powi(e))).chain((0..n / 4).map(|_| rng.scalar(0.0, S_MAX))).collect();
    let t_samples: Vec<f64> = linspace(t0, t1, 9).chain((0..n / 8).map(|_| rng.scalar(t0, t1))).collect();
    let u_samples: Vec<f64> = linspace(-ur, ur, 81).chain((0..n / 2).map(|_| rng.scalar(-ur, ur))).collect();
    let x_mid = 0.5 * len;
    let draw_x = |rng: &mut FieldSampler| rng.scalar(0.0, len);

    let mut checks = Vec::new();

    // a₀ ≤ a(s, t) ≤ a₁
    let mut lower = Tracker::new("kirchhoff_lower_bound");
    let mut upper = Tracker::new("kirchhoff_upper_bound");
    lower.record(0.0, k.a_lo, &[("a_lo", k.a_lo)]);
    upper.record(k.a_lo, k.a_hi, &[("a_lo", k.a_lo), ("a_hi", k.a_hi)]);
    for (i, &s) in s_samples.iter().enumerate() {
        let t = t_samples[i % t_samples.len()];
        let a = model.a(s, t);
        lower.record(k.a_lo, a, &[("s", s), ("t", t), ("a", a)]);
        upper.record(a, k.a_hi, &[("s", s), ("t", t), ("a", a)]);
    }
    checks.push(lower.finish());
    checks.push(upper.finish());

    // Local Lipschitz continuity in s: difference quotients must not grow
    // when the increment shrinks.
    let mut lip = Tracker::new("kirchhoff_lipschitz");
    for (i, &s) in s_samples.iter().enumerate().filter(|(_, &s)| s <= 100.0) {
        let t = t_samples[i % t_samples.len()];
        let q = |h: f64| (model.a(s + h, t) - model.a(s, t)).abs() / h;
        let (coarse, fine) = (q(1e-4), q(1e-8));
        lip.record(fine, 10.0 * coarse + 1.0, &[("s", s), ("t", t), ("quotient", fine)]);
    }
    checks.push(lip.finish());

    if k.monotone {
        let mut mono = Tracker::new("kirchhoff_monotone");
        for (i, &s) in s_samples.iter().enumerate() {
            let t = t_samples[i % t_samples.len()];
            let s2 = s + rng.scalar(0.0, 10.0);
            mono.record(model.a(s, t), model.a(s2, t), &[("s1", s), ("s2", s2), ("t", t)]);
        }
        checks.push(mono.finish());
    }

    // b₀f₀ ≤ f ≤ b₁f₁ with b₀ < b₁
    let mut env_lo = Tracker::new("envelope_lower");
    let mut env_hi = Tracker::new("envelope_upper");
    let mut order = Tracker::new("envelope_constants");
    order.record(r.b0, r.b1 - 1e-12 * (1.0 + r.b1.abs()), &[("b0", r.b0), ("b1", r.b1)]);
    checks.push(order.finish());
    for (i, &u) in u_samples.iter().enumerate() {
        let t = t_samples[i % t_samples.len()];
        let x = if i % 2 == 0 { x_mid } else { draw_x(&mut rng) };
        let f = model.f(x, t, u);
        env_lo.record(model.lower_envelope(u), f, &[("x", x), ("t", t), ("u", u)]);
        env_hi.record(f, model.upper_envelope(u), &[("x", x), ("t", t), ("u", u)]);
    }
    checks.push(env_lo.finish());
    checks.push(env_hi.finish());

    // |f(u) − f(v)| ≤ c|u − v|(|u|^{ρ−1} + |v|^{ρ−1} + 1), for f and both envelopes
    let growth = |u: f64, v: f64| r.lip_u * (u - v).abs() * (u.abs().powf(r.rho - 1.0) + v.abs().powf(r.rho - 1.0) + 1.0);
    let mut g_state = Tracker::new("growth_state");
    let mut g_env = Tracker::new("growth_state_envelopes");
    for i in 0..n {
        let (u, v) = (rng.scalar(-ur, ur), rng.scalar(-ur, ur));
        let t = t_samples[i % t_samples.len()];
        let x = draw_x(&mut rng);
        let point = [("x", x), ("t", t), ("u", u), ("v", v)];
        g_state.record((model.f(x, t, u) - model.f(x, t, v)).abs(), growth(u, v), &point);
        g_env.record((r.f0(u) - r.f0(v)).abs(), growth(u, v), &point);
        g_env.record((r.f1(u) - r.f1(v)).abs(), growth(u, v), &point);
    }
    checks.push(g_state.finish());
    checks.push(g_env.finish());

    // |f(t, u) − f(s, u)| ≤ c_t|t − s|(|u|^{ρ−1} + 1)
    let mut g_time = Tracker::new("growth_time");
    for (i, &u) in u_samples.iter().enumerate() {
        let t = t_samples[i % t_samples.len()];
        let s = rng.scalar(t0, t1);
        let x = draw_x(&mut rng);
        let lhs = (model.f(x, t, u) - model.f(x, s, u)).abs();
        let rhs = r.lip_t * (t - s).abs() * (u.abs().powf(r.rho - 1.0) + 1.0);
        g_time.record(lhs, rhs, &[("x", x), ("t", t), ("s", s), ("u", u)]);
    }
    checks.push(g_time.finish());

    // u·f ≤ −C₀u² + C₁|u|, for f and both envelopes with shared constants
    let bound = |u: f64| -r.c0 * u * u + r.c1 * u.abs();
    let mut diss = Tracker::new("dissipativity");
    let mut diss_env = Tracker::new("dissipativity_envelopes");
    let far = linspace(-100.0 * ur, 100.0 * ur, 41);
    for (i, u) in u_samples.iter().copied().chain(far).enumerate() {
        let t = t_samples[i % t_samples.len()];
        let x = if i % 2 == 0 { x_mid } else { draw_x(&mut rng) };
        diss.record(u * model.f(x, t, u), bound(u), &[("x", x), ("t", t), ("u", u)]);
        diss_env.record(u * r.f0(u), bound(u), &[("u", u), ("envelope", 0.0)]);
        diss_env.record(u * r.f1(u), bound(u), &[("u", u), ("envelope", 1.0)]);
    }
    checks.push(diss.finish());
    checks.push(diss_env.finish());

    let spec = op.spec();
    let lambda1 = (PI / spec.length).powi(2 * spec.m as i32) + r.c0;
    let mut eig = Tracker::new("first_eigenvalue");
    eig.samples = 1;
    if !(lambda1 > 0.0) {
        eig.violated = true;
        eig.witness = Some([("lambda1".to_string(), lambda1), ("c0".to_string(), r.c0)].into_iter().collect());
    }
    eig.worst = lambda1;
    checks.push(eig.finish());

    let mut consts = Tracker::new("constants");
    consts.record(1.0, r.rho, &[("rho", r.rho)]);
    consts.record(0.0, r.c1, &[("c1", r.c1)]);
    consts.record(0.0, r.lip_u, &[("lip_u", r.lip_u)]);
    consts.record(0.0, r.lip_t, &[("lip_t", r.lip_t)]);
    checks.push(consts.finish());

    HypothesisReport { model: model.name.clone(), lambda1, checks }
}

#[derive(Clone, Debug, Serialize)]
pub struct ArReport {
    pub mu: f64,
    pub r: f64,
    pub samples: usize,
    /// Sampled `(u, μF(u), f(u)u)` with `|u| ≥ R` where `0 < μF ≤ fu` fails.
    pub violations: Vec<[f64; 3]>,
    /// Samples with `|u| < R` where the inequality fails; informational only.
    pub below_threshold_failures: usize,
}

impl ArReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `0 < μF(x,u) ≤ f(x,u)u` for `|u| ≥ R` at position `x`.
pub fn ar_condition_check(model: &ModelSpec, x: f64, us: &[f64]) -> Result<ArReport> {
    let ar = model.reaction.ar.ok_or_else(|| Error::Precondition(format!("model `{}` has no superlinearity data", model.name)))?;
    let mut violations = Vec::new();
    let mut below = 0;
    let mut samples = 0;
    for &u in us {
        let mu_f = ar.mu * model.primitive(x, u)?;
        let fu = model.f(x, 0.0, u) * u;
        let ok = mu_f > 0.0 && mu_f <= fu + 1e-12 * (1.0 + fu.abs());
        if u.abs() >= ar.r {
            samples += 1;
            if !ok {
                violations.push([u, mu_f, fu]);
            }
        } else if !ok {
            below += 1;
        }
    }
    Ok(ArReport { mu: ar.mu, r: ar.r, samples, violations, below_threshold_failures: below })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_models, model_by_name, KirchhoffCoefficient, ReactionSpec};
    use crate::spectral::OperatorSpec;

    fn op() -> DiscreteOperator {
        DiscreteOperator::new(OperatorSpec::new(1, 0.0, 8, PI)).unwrap()
    }

    #[test]
    fn catalog_passes() {
        for m in builtin_models() {
            let report = validate_hypotheses(&op(), &m, 4000, 1);
            let failed: Vec<_> = report.failures().map(|c| (&c.name, &c.witness)).collect();
            assert!(report.all_passed(), "{}: {failed:?}", m.name);
        }
    }

    #[test]
    fn affine_lambda1() {
        let report = validate_hypotheses(&op(), &model_by_name("affine").unwrap(), 1000, 2);
        assert!((report.lambda1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_reaction_is_not_dissipative() {
        let mut m = model_by_name("affine").unwrap();
        m.reaction = ReactionSpec::new(|_, _, u| u * u, |u| u * u - 1.0, |u| u * u + 1.0, 1.0, 1.0 + 1e-9)
            .autonomous(true)
            .constants(2.0, 1.0, 1.0, 1.0, 0.0);
        let report = validate_hypotheses(&op(), &m, 2000, 3);
        let diss = report.check("dissipativity").unwrap();
        assert!(!diss.passed);
        let u = diss.witness.as_ref().unwrap()["u"];
        assert!(u > 1.0, "witness u = {u}");
    }

    #[test]
    fn unbounded_coefficient_fails_upper_bound() {
        let mut m = model_by_name("affine").unwrap();
        m.kirchhoff = KirchhoffCoefficient::autonomous(2.0, 3.0, |s| s);
        let report = validate_hypotheses(&op(), &m, 1000, 4);
        let upper = report.check("kirchhoff_upper_bound").unwrap();
        assert!(!upper.passed);
        assert!(upper.witness.as_ref().unwrap()["s"] > 3.0);
    }

    #[test]
    fn inverted_envelopes_fail() {
        let mut m = model_by_name("affine").unwrap();
        m.reaction = m.reaction.clone().with_envelopes(|u| 1.0 - u, |u| 0.5 - 2.0 * u, 1.0, 0.5);
        let report = validate_hypotheses(&op(), &m, 1000, 5);
        assert!(!report.check("envelope_constants").unwrap().passed);
        assert!(!report.check("envelope_upper").unwrap().passed || !report.check("envelope_lower").unwrap().passed);
    }

    #[test]
    fn square_root_coefficient_is_not_lipschitz_at_zero() {
        let mut m = model_by_name("affine").unwrap();
        m.kirchhoff = KirchhoffCoefficient::autonomous(2.0, 3.0, |s| 2.0 + s.sqrt().min(1.0));
        let report = validate_hypotheses(&op(), &m, 1000, 6);
        let lip = report.check("kirchhoff_lipschitz").unwrap();
        assert!(!lip.passed);
        assert_eq!(lip.witness.as_ref().unwrap()["s"], 0.0);
    }

    #[test]
    fn first_eigenvalue_check_is_exact() {
        let mut m = model_by_name("cubic").unwrap();
        m.reaction.c0 = -1.0;
        let report = validate_hypotheses(&op(), &m, 1000, 7);
        assert!(!report.check("first_eigenvalue").unwrap().passed);
        assert_eq!(report.lambda1, 0.0);
    }

    #[test]
    fn ar_condition() {
        // f = u³ with μ = 3: 3u⁴/4 ≤ u⁴ and positive away from zero.
        let superlinear = ModelSpec::new(
            "superlinear",
            KirchhoffCoefficient::constant(1.0),
            ReactionSpec::new(|_, _, u| u * u * u, |u| u * u * u, |u| u * u * u, 1.0, 1.0).autonomous(true).with_ar(3.0, 1.0),
        );
        let us: Vec<f64> = (-40..=40).map(|i| 0.1 * i as f64).collect();
        let report = ar_condition_check(&superlinear, 0.0, &us).unwrap();
        assert!(report.holds(), "{:?}", report.violations);
        assert!(report.samples > 0);

        // The dissipative cubic γu − u³ has F < 0 for large |u|: 4F = 2u² − u⁴
        // never dominates fu = u² − u⁴, so every sample beyond R = 2 fails.
        let mut cubic = ModelSpec::new(
            "cubic1",
            KirchhoffCoefficient::constant(1.0),
            ReactionSpec::new(|_, _, u| u - u * u * u, |u| u, |u| u, 1.0, 1.0).autonomous(true).with_ar(4.0, 2.0),
        );
        let report = ar_condition_check(&cubic, 0.0, &us).unwrap();
        assert_eq!(report.violations.len(), report.samples);
        for [u, mu_f, fu] in &report.violations {
            assert!((mu_f - (2.0 * u * u - u.powi(4))).abs() < 1e-8);
            assert!((fu - (u * u - u.powi(4))).abs() < 1e-12);
        }
        cubic.reaction.ar = None;
        assert!(matches!(ar_condition_check(&cubic, 0.0, &us), Err(Error::Precondition(_))));
    }
}
