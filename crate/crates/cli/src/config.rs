//! Scenario configuration: TOML (or JSON) on disk, filled with defaults,
//! and hashed in its effective form.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use kp_core::model::{model_by_name, PolynomialReaction};
use kp_core::pullback::SetNorm;
use kp_core::{DiscreteOperator, IntegratorConfig, KirchhoffCoefficient, ModelSpec, OperatorSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Evolve,
    Compare,
    Attract,
    Equilibrate,
    Validate,
}

impl std::str::FromStr for Task {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "evolve" => Ok(Task::Evolve),
            "compare" => Ok(Task::Compare),
            "attract" => Ok(Task::Attract),
            "equilibrate" => Ok(Task::Equilibrate),
            "validate" => Ok(Task::Validate),
            other => bail!("unknown task `{other}` (expected evolve, compare, attract, equilibrate or validate)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    #[serde(default = "default_m")]
    pub m: u32,
    #[serde(default)]
    pub lambda0: f64,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_length")]
    pub length: f64,
    /// Collocation nodes; `2·modes + 1` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

fn default_m() -> u32 {
    1
}
fn default_modes() -> usize {
    16
}
fn default_length() -> f64 {
    std::f64::consts::PI
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self { m: default_m(), lambda0: 0.0, modes: default_modes(), length: default_length(), nodes: None }
    }
}

impl OperatorConfig {
    pub fn build(&self) -> Result<DiscreteOperator> {
        let spec = OperatorSpec::new(self.m, self.lambda0, self.modes, self.length);
        let op = match self.nodes {
            Some(n) => DiscreteOperator::with_nodes(spec, n),
            None => DiscreteOperator::new(spec),
        };
        op.context("operator section")
    }
}

/// Kirchhoff coefficient of an inline model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CoefficientConfig {
    Constant {
        value: f64,
    },
    /// `a_lo + (a_hi − a_lo)·s/(1 + s)`.
    Saturating {
        a_lo: f64,
        a_hi: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineModel {
    pub name: String,
    pub coefficient: CoefficientConfig,
    pub reaction: PolynomialReaction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_range: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelConfig {
    Named(String),
    Inline(InlineModel),
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec> {
        match self {
            ModelConfig::Named(name) => model_by_name(name).ok_or_else(|| {
                let known: Vec<String> = kp_core::model::builtin_models().into_iter().map(|m| m.name).collect();
                anyhow!("unknown model `{name}` (catalog: {})", known.join(", "))
            }),
            ModelConfig::Inline(m) => {
                let kirchhoff = match m.coefficient {
                    CoefficientConfig::Constant { value } => KirchhoffCoefficient::constant(value),
                    CoefficientConfig::Saturating { a_lo, a_hi } => KirchhoffCoefficient::saturating(a_lo, a_hi),
                };
                let mut spec = ModelSpec::new(m.name.clone(), kirchhoff, m.reaction.build());
                if let Some(r) = m.state_range {
                    spec = spec.with_state_range(r);
                }
                Ok(spec)
            }
        }
    }
}

/// Initial datum; random draws come from the scenario seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialConfig {
    Zero,
    /// `scale·e_k`.
    Mode {
        mode: usize,
        scale: f64,
    },
    /// `c_k = scale·U(−1, 1)/k`.
    Random {
        scale: f64,
    },
    /// Band-limited field that is nonnegative on the interval.
    Nonnegative {
        scale: f64,
    },
    Coeffs {
        coeffs: Vec<f64>,
    },
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig::Random { scale: 1.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    /// Also integrate on the rescaled clock.
    #[serde(default)]
    pub rescaled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// Barrier data are `u ∓ delta·e₁`.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Negative control: feed the barriers in the wrong roles.
    #[serde(default)]
    pub swap_barriers: bool,
    /// Random ordered pairs for the monotonicity check.
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_order_tol")]
    pub tol: f64,
}

fn default_delta() -> f64 {
    0.1
}
fn default_pairs() -> usize {
    5
}
fn default_order_tol() -> f64 {
    1e-7
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { delta: default_delta(), swap_barriers: false, pairs: default_pairs(), tol: default_order_tol() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttractConfig {
    #[serde(default)]
    pub t_eval: f64,
    #[serde(default = "default_attract_tol")]
    pub tol: f64,
    #[serde(default = "default_max_depth")]
    pub max_depth: f64,
    #[serde(default = "default_norm")]
    pub norm: SetNorm,
    /// Pullback depth for the non-autonomous equilibrium.
    #[serde(default = "default_eq_depth")]
    pub equilibrium_depth: f64,
    /// Times at which the equilibrium is evaluated.
    #[serde(default = "default_eq_grid")]
    pub equilibrium_grid: Vec<f64>,
    /// Horizon of the interval-invariance check.
    #[serde(default = "default_horizon")]
    pub invariance_horizon: f64,
}

fn default_attract_tol() -> f64 {
    1e-5
}
fn default_max_depth() -> f64 {
    64.0
}
fn default_norm() -> SetNorm {
    SetNorm::XHalf
}
fn default_eq_depth() -> f64 {
    64.0
}
fn default_eq_grid() -> Vec<f64> {
    (0..=8).map(|i| 0.5 * i as f64).collect()
}
fn default_horizon() -> f64 {
    20.0
}

impl Default for AttractConfig {
    fn default() -> Self {
        Self {
            t_eval: 0.0,
            tol: default_attract_tol(),
            max_depth: default_max_depth(),
            norm: default_norm(),
            equilibrium_depth: default_eq_depth(),
            equilibrium_grid: default_eq_grid(),
            invariance_horizon: default_horizon(),
        }
    }
}

/// Upper obstacle of the admissible box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObstacleConfig {
    Constant {
        value: f64,
    },
    /// `scale·φ₁`.
    Ground {
        scale: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibrateConfig {
    #[serde(default = "default_obstacle")]
    pub ubar: ObstacleConfig,
    /// Skip the supersolution check (the result is then unverified).
    #[serde(default)]
    pub waive_supersolution: bool,
    #[serde(default = "kp_core::equilibrium::default_delta_scan")]
    pub delta_scan: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    /// Random starts in addition to `ū` and a small multiple of `φ₁`.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_agreement")]
    pub agreement_tol: f64,
    #[serde(default = "default_tests")]
    pub test_functions: usize,
}

fn default_obstacle() -> ObstacleConfig {
    ObstacleConfig::Constant { value: 1.0 }
}
fn default_restarts() -> usize {
    2
}
fn default_agreement() -> f64 {
    1e-5
}
fn default_tests() -> usize {
    64
}

impl Default for EquilibrateConfig {
    fn default() -> Self {
        Self {
            ubar: default_obstacle(),
            waive_supersolution: false,
            delta_scan: kp_core::equilibrium::default_delta_scan(),
            c0: None,
            zeta: None,
            restarts: default_restarts(),
            agreement_tol: default_agreement(),
            test_functions: default_tests(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_budget() -> usize {
    4000
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self { budget: default_budget() }
    }
}

fn default_integrator() -> IntegratorConfig {
    IntegratorConfig::new(0.01, (0.0, 10.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub task: Task,
    pub model: ModelConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub operator: OperatorConfig,
    #[serde(default = "default_integrator")]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub compare: CompareConfig,
    #[serde(default)]
    pub attract: AttractConfig,
    #[serde(default)]
    pub equilibrate: EquilibrateConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
}

impl ScenarioConfig {
    /// Parses TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&text, is_json).with_context(|| format!("malformed config {}", path.display()))
    }

    pub fn parse(text: &str, json: bool) -> Result<Self> {
        if json {
            serde_json::from_str(text).map_err(|e| anyhow!("line {}, column {}: {e}", e.line(), e.column()))
        } else {
            toml::from_str(text).map_err(|e| anyhow!("{e}"))
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// SHA-256 of the canonical JSON form with `output_dir` removed.
    pub fn hash(&self) -> Result<String> {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        let bytes = serde_json::to_vec(&canonical)?;
        Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
    }
}
