//! Spectral Galerkin simulation and verification for the nonlocal
//! quasilinear parabolic problem
//!
//! ```text
//! ∂ₜu + a(⟨(A+λ₀I)u, u⟩, t)·(A+λ₀I)u = f(x, t, u)   on Ω = (0, L)
//! ```
//!
//! with `A = (−1)^m d^{2m}/dx^{2m}` under Navier conditions.
//!
//! * [`spectral`]: diagonal operator, fields, norms and collocation transforms.
//! * [`model`]: Kirchhoff coefficient, reaction with envelope pair, validators.
//! * [`evolution`]: exponential Euler on the original and rescaled clocks,
//!   barrier semigroups and the solution process.
//! * [`order`]: pointwise order, cone, order intervals and comparison checks.
//! * [`pullback`]: barrier equilibria, pullback orbits and attractor sets.
//! * [`equilibrium`]: energy functional, constrained minimisation and the
//!   Lyapunov and nontriviality checks for the autonomous problem.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod error;
pub mod evolution;
pub mod model;
pub mod order;
pub mod pullback;
pub mod quadrature;
pub mod random;
pub mod spectral;

pub use error::{Error, Result};
pub use evolution::{Clock, IntegratorConfig, Process, ProcessKind, Trajectory};
pub use model::{BarrierSide, KirchhoffCoefficient, ModelSpec, ReactionSpec};
pub use order::OrderInterval;
pub use random::FieldSampler;
pub use spectral::{CollocationGrid, DiscreteOperator, OperatorSpec, SpectralField};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
