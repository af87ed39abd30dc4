//! Kirchhoff coefficient `a(s, t)`, reaction `f(x, t, u)` with its bounding
//! pair `b₀f₀ ≤ f ≤ b₁f₁`, primitives, and sampled hypothesis validators.

mod catalog;
mod validate;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::spectral::{DiscreteOperator, SpectralField};

pub use catalog::{builtin_models, model_by_name, Polynomial, PolynomialReaction, PERIODIC_MODEL_PERIOD};
pub use validate::{ar_condition_check, validate_hypotheses, ArReport, HypothesisCheck, HypothesisReport};

pub type CoefficientFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type ReactionFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type PrimitiveFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// The nonlocal diffusion multiplier `a(s, t) ∈ [a_lo, a_hi]`.
#[derive(Clone)]
pub struct KirchhoffCoefficient {
    pub a_lo: f64,
    pub a_hi: f64,
    eval: CoefficientFn,
    integral: Option<ScalarFn>,
    /// Whether `s ↦ a(s, t)` is declared non-decreasing.
    pub monotone: bool,
    pub autonomous: bool,
}

impl KirchhoffCoefficient {
    pub fn new<F>(a_lo: f64, a_hi: f64, eval: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self { a_lo, a_hi, eval: Arc::new(eval), integral: None, monotone: false, autonomous: false }
    }

    /// A coefficient that ignores time.
    pub fn autonomous<F>(a_lo: f64, a_hi: f64, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { a_lo, a_hi, eval: Arc::new(move |s, _| eval(s)), integral: None, monotone: false, autonomous: true }
    }

    pub fn constant(a: f64) -> Self {
        Self::autonomous(a, a, move |_| a).with_integral(move |q| a * q).monotone(true)
    }

    /// `a(s) = a_lo + (a_hi − a_lo)·s/(1+s)`.
    pub fn saturating(a_lo: f64, a_hi: f64) -> Self {
        let span = a_hi - a_lo;
        Self::autonomous(a_lo, a_hi, move |s| a_lo + span * s / (1.0 + s))
            .with_integral(move |q| a_lo * q + span * (q - q.ln_1p()))
            .monotone(true)
    }

    /// Closed-form `q ↦ ∫₀^q a(s) ds` for time-independent coefficients.
    pub fn with_integral<F>(mut self, integral: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.integral = Some(Arc::new(integral));
        self
    }

    pub fn monotone(mut self, flag: bool) -> Self {
        self.monotone = flag;
        self
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        (self.eval)(s, t)
    }

    /// `∫₀^q a(s, 0) ds`, closed form when available, else adaptive Simpson.
    pub fn integral(&self, q: f64) -> Result<f64> {
        match &self.integral {
            Some(f) => Ok(f(q)),
            None => adaptive_simpson(|s| self.eval(s, 0.0), 0.0, q, 1e-14 * (1.0 + q.abs())),
        }
    }
}

impl fmt::Debug for KirchhoffCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KirchhoffCoefficient")
            .field("a_lo", &self.a_lo)
            .field("a_hi", &self.a_hi)
            .field("monotone", &self.monotone)
            .field("autonomous", &self.autonomous)
            .finish_non_exhaustive()
    }
}

/// Data of the superlinearity condition `0 < μF(x,u) ≤ f(x,u)u` for `|u| ≥ R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArCondition {
    pub mu: f64,
    pub r: f64,
}

#[derive(Clone)]
pub struct ReactionSpec {
    f: ReactionFn,
    f0: ScalarFn,
    f1: ScalarFn,
    pub b0: f64,
    pub b1: f64,
    /// Growth exponent ρ of the local Lipschitz bounds.
    pub rho: f64,
    /// Dissipativity constants in `u·f ≤ −C₀u² + C₁|u|`.
    pub c0: f64,
    pub c1: f64,
    /// Lipschitz scale in the state variable.
    pub lip_u: f64,
    /// Lipschitz scale in time.
    pub lip_t: f64,
    pub autonomous: bool,
    primitive: Option<PrimitiveFn>,
    pub ar: Option<ArCondition>,
}

impl ReactionSpec {
    /// Reaction with its envelope pair; constants default to zero and are set
    /// with the builder methods.
    pub fn new<F, F0, F1>(f: F, f0: F0, f1: F1, b0: f64, b1: f64) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        F0: Fn(f64) -> f64 + Send + Sync + 'static,
        F1: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            f0: Arc::new(f0),
            f1: Arc::new(f1),
            b0,
            b1,
            rho: 1.0,
            c0: 0.0,
            c1: 0.0,
            lip_u: 1.0,
            lip_t: 0.0,
            autonomous: false,
            primitive: None,
            ar: None,
        }
    }

    /// `f ≡ 0` with the constant envelope pair `b₀f₀ = −1`, `b₁f₁ = 1`.
    pub fn zero() -> Self {
        Self::new(|_, _, _| 0.0, |_| -2.0, |_| 1.0, 0.5, 1.0).autonomous(true).constants(1.0, 0.0, 2.0, 1.0, 0.0).with_primitive(|_, _| 0.0)
    }

    pub fn autonomous(mut self, flag: bool) -> Self {
        self.autonomous = flag;
        self
    }

    /// Sets `(ρ, C₀, C₁, c_u, c_t)`.
    pub fn constants(mut self, rho: f64, c0: f64, c1: f64, lip_u: f64, lip_t: f64) -> Self {
        self.rho = rho;
        self.c0 = c0;
        self.c1 = c1;
        self.lip_u = lip_u;
        self.lip_t = lip_t;
        self
    }

    pub fn with_primitive<F>(mut self, primitive: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.primitive = Some(Arc::new(primitive));
        self
    }

    pub fn with_ar(mut self, mu: f64, r: f64) -> Self {
        self.ar = Some(ArCondition { mu, r });
        self
    }

    /// Replaces the envelope pair.
    pub fn with_envelopes<F0, F1>(mut self, f0: F0, f1: F1, b0: f64, b1: f64) -> Self
    where
        F0: Fn(f64) -> f64 + Send + Sync + 'static,
        F1: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.f0 = Arc::new(f0);
        self.f1 = Arc::new(f1);
        self.b0 = b0;
        self.b1 = b1;
        self
    }

    pub fn f(&self, x: f64, t: f64, u: f64) -> f64 {
        (self.f)(x, t, u)
    }

    pub fn f0(&self, u: f64) -> f64 {
        (self.f0)(u)
    }

    pub fn f1(&self, u: f64) -> f64 {
        (self.f1)(u)
    }

    pub fn has_closed_primitive(&self) -> bool {
        self.primitive.is_some()
    }
}

impl fmt::Debug for ReactionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReactionSpec")
            .field("b0", &self.b0)
            .field("b1", &self.b1)
            .field("rho", &self.rho)
            .field("c0", &self.c0)
            .field("c1", &self.c1)
            .field("autonomous", &self.autonomous)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BarrierSide {
    Lower,
    Upper,
}

impl BarrierSide {
    pub fn other(self) -> Self {
        match self {
            BarrierSide::Lower => BarrierSide::Upper,
            BarrierSide::Upper => BarrierSide::Lower,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: String,
    pub kirchhoff: KirchhoffCoefficient,
    pub reaction: ReactionSpec,
    /// Time window sampled by the validators.
    pub time_window: (f64, f64),
    /// Half-width of the state range sampled by the validators.
    pub state_range: f64,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, kirchhoff: KirchhoffCoefficient, reaction: ReactionSpec) -> Self {
        Self { name: name.into(), kirchhoff, reaction, time_window: (0.0, 10.0), state_range: 10.0 }
    }

    pub fn with_time_window(mut self, lo: f64, hi: f64) -> Self {
        self.time_window = (lo, hi);
        self
    }

    pub fn with_state_range(mut self, range: f64) -> Self {
        self.state_range = range;
        self
    }

    pub fn is_autonomous(&self) -> bool {
        self.kirchhoff.autonomous && self.reaction.autonomous
    }

    pub fn a(&self, s: f64, t: f64) -> f64 {
        self.kirchhoff.eval(s, t)
    }

    pub fn f(&self, x: f64, t: f64, u: f64) -> f64 {
        self.reaction.f(x, t, u)
    }

    pub fn lower_envelope(&self, u: f64) -> f64 {
        self.reaction.b0 * self.reaction.f0(u)
    }

    pub fn upper_envelope(&self, u: f64) -> f64 {
        self.reaction.b1 * self.reaction.f1(u)
    }

    /// Autonomous barrier reaction for the rescaled clock.
    ///
    /// The rescaled right-hand side is `f/a` with `a ∈ [a_lo, a_hi]`; dividing
    /// each envelope by the end of the coefficient range that makes it
    /// smallest (lower) or largest (upper) keeps `f/a` sandwiched pointwise.
    pub fn barrier_reaction(&self, side: BarrierSide, u: f64) -> f64 {
        let (lo, hi) = (self.kirchhoff.a_lo, self.kirchhoff.a_hi);
        match side {
            BarrierSide::Lower => {
                let v = self.lower_envelope(u);
                if v >= 0.0 {
                    v / hi
                } else {
                    v / lo
                }
            }
            BarrierSide::Upper => {
                let v = self.upper_envelope(u);
                if v >= 0.0 {
                    v / lo
                } else {
                    v / hi
                }
            }
        }
    }

    fn require_autonomous(&self) -> Result<()> {
        if self.reaction.autonomous {
            Ok(())
        } else {
            Err(Error::NotAutonomous(self.name.clone()))
        }
    }

    /// `F(x, u) = ∫₀^u f(x, θ) dθ` for autonomous reactions.
    pub fn primitive(&self, x: f64, u: f64) -> Result<f64> {
        self.require_autonomous()?;
        match &self.reaction.primitive {
            Some(p) => Ok(p(x, u)),
            None => adaptive_simpson(|th| self.f(x, 0.0, th), 0.0, u, 1e-13 * (1.0 + u.abs())),
        }
    }
}

/// Nodal evaluation of `f(x_q, t, u(x_q))` projected back onto the modes.
pub fn eval_reaction_field(op: &DiscreteOperator, model: &ModelSpec, t: f64, u: &SpectralField) -> Result<SpectralField> {
    let out = op.grid().project_nodal(u, |x, v| model.f(x, t, v))?;
    if !out.is_finite() {
        return Err(Error::NonFinite { context: "reaction", time: t });
    }
    Ok(out)
}

/// Projection of the barrier reaction of the given side.
pub fn eval_barrier_field(op: &DiscreteOperator, model: &ModelSpec, side: BarrierSide, z: &SpectralField) -> Result<SpectralField> {
    let out = op.grid().project_nodal(z, |_, v| model.barrier_reaction(side, v))?;
    if !out.is_finite() {
        return Err(Error::NonFinite { context: "barrier reaction", time: f64::NAN });
    }
    Ok(out)
}
