//! Shipped models and config-defined polynomial reactions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ArCondition, KirchhoffCoefficient, ModelSpec, ReactionSpec};

/// Period of the time modulation in `affine-periodic`.
pub const PERIODIC_MODEL_PERIOD: f64 = 4.0;

/// The shipped catalog:
///
/// * `affine`: `f = 1 − u`, `a(s) = 2 + s/(1+s)`.
/// * `affine-periodic`: `f = κ(t) − u` with `κ(t) = 1 + ½ sin(2πt/4)` and a
///   time-modulated saturating coefficient in `[2, 3)`.
/// * `cubic`: `f = 0.8u − u³`, `a(s) = ½ + ½·s/(1+s)`, non-decreasing.
/// * `linear`: `f = −u`, `a ≡ 1`.
pub fn builtin_models() -> Vec<ModelSpec> {
    vec![affine(1.0, 1.0), affine_periodic(), cubic(0.8, 0.1), linear_decay()]
}

pub fn model_by_name(name: &str) -> Option<ModelSpec> {
    builtin_models().into_iter().find(|m| m.name == name)
}

/// `f = κ − βu`; the lower envelope halves the source, so the barriers are
/// strictly separated from the model whenever `κ > 0`.
fn affine(kappa: f64, beta: f64) -> ModelSpec {
    let reaction = ReactionSpec::new(move |_, _, u| kappa - beta * u, move |u| kappa - 2.0 * beta * u, move |u| kappa - beta * u, 0.5, 1.0)
        .autonomous(true)
        .constants(1.0, beta, kappa, beta, 0.0)
        .with_primitive(move |_, u| kappa * u - 0.5 * beta * u * u);
    ModelSpec::new("affine", KirchhoffCoefficient::saturating(2.0, 3.0), reaction).with_time_window(0.0, 10.0)
}

fn affine_periodic() -> ModelSpec {
    let (kbar, eps, beta) = (1.0, 0.5, 1.0);
    let omega = 2.0 * PI / PERIODIC_MODEL_PERIOD;
    let (k_min, k_max) = (kbar * (1.0 - eps), kbar * (1.0 + eps));
    let reaction = ReactionSpec::new(
        move |_, t: f64, u| kbar * (1.0 + eps * (omega * t).sin()) - beta * u,
        move |u| k_min - 2.0 * beta * u,
        move |u| k_max - beta * u,
        0.5,
        1.0,
    )
    .constants(1.0, beta, k_max, beta, 0.5 * kbar * eps * omega);
    let (a_lo, a_hi, eta) = (2.0, 3.0, 0.5);
    let kirchhoff = KirchhoffCoefficient::new(a_lo, a_hi, move |s, t| {
        a_lo + (a_hi - a_lo) * (s / (1.0 + s)) * (1.0 + eta * (omega * t).sin()) / (1.0 + eta)
    })
    .monotone(true);
    ModelSpec::new("affine-periodic", kirchhoff, reaction).with_time_window(0.0, 2.0 * PERIODIC_MODEL_PERIOD)
}

/// `f = γu − u³` with envelopes `f ∓ εu²`.
fn cubic(gamma: f64, eps: f64) -> ModelSpec {
    let f = move |u: f64| gamma * u - u * u * u;
    let reaction = ReactionSpec::new(move |_, _, u| f(u), move |u| f(u) - eps * u * u, move |u| 0.5 * (f(u) + eps * u * u), 1.0, 2.0)
        .autonomous(true)
        .constants(3.0, -(gamma + 0.25 * eps * eps), 0.0, 2.0, 0.0)
        .with_primitive(move |_, u| 0.5 * gamma * u * u - 0.25 * u.powi(4));
    ModelSpec::new("cubic", KirchhoffCoefficient::saturating(0.5, 1.0), reaction).with_state_range(5.0)
}

fn linear_decay() -> ModelSpec {
    let reaction = ReactionSpec::new(|_, _, u| -u, |u| -2.0 * u - 0.2, |u| 0.1 - u, 0.5, 1.0)
        .autonomous(true)
        .constants(1.0, 1.0, 0.2, 1.0, 0.0)
        .with_primitive(|_, u| -0.5 * u * u);
    ModelSpec::new("linear", KirchhoffCoefficient::constant(1.0), reaction)
}

/// Polynomial `Σ p_i u^i` given by its coefficient list.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn eval(&self, u: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    /// `∫₀^u p`.
    pub fn antiderivative(&self, u: f64) -> f64 {
        self.0.iter().enumerate().rev().fold(0.0, |acc, (i, c)| acc * u + c / (i + 1) as f64) * u
    }
}

/// An autonomous reaction assembled from coefficient lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialReaction {
    pub f: Polynomial,
    pub f0: Polynomial,
    pub f1: Polynomial,
    pub b0: f64,
    pub b1: f64,
    #[serde(default = "one")]
    pub rho: f64,
    pub c0: f64,
    pub c1: f64,
    #[serde(default = "one")]
    pub lip_u: f64,
    #[serde(default)]
    pub lip_t: f64,
    #[serde(default)]
    pub ar: Option<ArCondition>,
}

fn one() -> f64 {
    1.0
}

impl PolynomialReaction {
    pub fn build(&self) -> ReactionSpec {
        let (f, f0, f1, prim) = (self.f.clone(), self.f0.clone(), self.f1.clone(), self.f.clone());
        let mut spec = ReactionSpec::new(move |_, _, u| f.eval(u), move |u| f0.eval(u), move |u| f1.eval(u), self.b0, self.b1)
            .autonomous(true)
            .constants(self.rho, self.c0, self.c1, self.lip_u, self.lip_t)
            .with_primitive(move |_, u| prim.antiderivative(u));
        spec.ar = self.ar;
        spec
    }
}
