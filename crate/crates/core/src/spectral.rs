//! Diagonal spectral representation of `(A + λ₀I)` on `Ω = (0, L)`.
//!
//! `A = (-1)^m d^{2m}/dx^{2m}` with Navier conditions is diagonalised by the
//! unit-L² sine modes `e_k(x) = √(2/L) sin(kπx/L)`, with shifted eigenvalues
//! `μ_k = (kπ/L)^{2m} + λ₀`. States are carried as mode coefficients and
//! moved to collocation values on the interior nodes `x_q = qL/(Q+1)`.
//!
//! The nodal rule with weight `L/(Q+1)` is exact for products of modes
//! `j, k ≤ Q`, so the discrete transform pair is orthonormal and every
//! nonlinear integral in the crate is taken with that same rule.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    /// Half order; the operator has order `2m`.
    pub m: u32,
    /// Spectral shift λ₀.
    pub lambda0: f64,
    /// Number of retained modes K.
    pub modes: usize,
    /// Interval length L.
    pub length: f64,
}

impl OperatorSpec {
    pub fn new(m: u32, lambda0: f64, modes: usize, length: f64) -> Self {
        Self { m, lambda0, modes, length }
    }

    /// Unshifted eigenvalue `(kπ/L)^{2m}` of `A` for mode `k ≥ 1`.
    pub fn base_eigenvalue(&self, k: usize) -> f64 {
        (k as f64 * PI / self.length).powi(2 * self.m as i32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::InvalidOperator("at least one mode is required".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidOperator("half order m must be at least 1".into()));
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::InvalidOperator(format!("interval length {} must be positive", self.length)));
        }
        if !self.lambda0.is_finite() {
            return Err(Error::InvalidOperator("spectral shift must be finite".into()));
        }
        let mu1 = self.base_eigenvalue(1) + self.lambda0;
        if !(mu1 > 0.0) {
            return Err(Error::InvalidOperator(format!("first shifted eigenvalue {mu1} is not positive")));
        }
        Ok(())
    }
}

/// A state in eigen-coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(modes: usize) -> Self {
        Self { coeffs: vec![0.0; modes] }
    }

    /// `scale · e_k` for 1-based mode index `k`.
    pub fn mode(modes: usize, k: usize, scale: f64) -> Self {
        assert!(k >= 1 && k <= modes, "mode index {k} outside 1..={modes}");
        let mut coeffs = vec![0.0; modes];
        coeffs[k - 1] = scale;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| s * c).collect() }
    }

    /// `self + s · other`
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        debug_assert_eq!(self.modes(), other.modes());
        Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + s * b).collect() }
    }

    /// Pointwise convex combination `(1-θ)·self + θ·other` in coefficient space.
    pub fn lerp(&self, other: &Self, theta: f64) -> Self {
        Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (1.0 - theta) * a + theta * b).collect() }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scaled(rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

/// Interior collocation nodes with a precomputed sine table.
#[derive(Clone, Debug)]
pub struct CollocationGrid {
    length: f64,
    modes: usize,
    nodes: Vec<f64>,
    /// Row-major `Q × K` table of `e_k(x_q)`.
    table: Vec<f64>,
    weight: f64,
}

impl CollocationGrid {
    pub fn new(length: f64, modes: usize, nodes: usize) -> Result<Self> {
        if nodes < modes {
            return Err(Error::GridTooCoarse { nodes, modes });
        }
        if !(length > 0.0) {
            return Err(Error::InvalidOperator(format!("interval length {length} must be positive")));
        }
        let norm = (2.0 / length).sqrt();
        let xs: Vec<f64> = (1..=nodes).map(|q| q as f64 * length / (nodes + 1) as f64).collect();
        let mut table = Vec::with_capacity(nodes * modes);
        for q in 1..=nodes {
            for k in 1..=modes {
                // Reduce the angle exactly before taking the sine.
                let idx = (q * k) % (2 * (nodes + 1));
                let angle = PI * idx as f64 / (nodes + 1) as f64;
                table.push(norm * angle.sin());
            }
        }
        Ok(Self { length, modes, nodes: xs, table, weight: length / (nodes + 1) as f64 })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weight of each node.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// `e_k(x_q)`, 1-based `k`.
    pub fn basis(&self, q: usize, k: usize) -> f64 {
        self.table[q * self.modes + (k - 1)]
    }

    fn check(&self, modes: usize) -> Result<()> {
        if modes != self.modes {
            return Err(Error::DimensionMismatch { expected: self.modes, got: modes });
        }
        Ok(())
    }

    pub fn to_grid(&self, u: &SpectralField) -> Result<Vec<f64>> {
        self.check(u.modes())?;
        Ok(self.table.chunks_exact(self.modes).map(|row| row.iter().zip(u.coeffs()).map(|(e, c)| e * c).sum()).collect())
    }

    /// Discrete L² projection of nodal values onto the retained modes.
    pub fn to_spectral(&self, values: &[f64]) -> Result<SpectralField> {
        if values.len() != self.nodes.len() {
            return Err(Error::Incompatible(format!("{} nodal values for a grid of {} nodes", values.len(), self.nodes.len())));
        }
        let mut coeffs = vec![0.0; self.modes];
        for (row, v) in self.table.chunks_exact(self.modes).zip(values) {
            for (c, e) in coeffs.iter_mut().zip(row) {
                *c += e * v;
            }
        }
        coeffs.iter_mut().for_each(|c| *c *= self.weight);
        Ok(SpectralField::new(coeffs))
    }

    /// Nodal quadrature `Σ w·u(x_q)·v(x_q)`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weight * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Nodal quadrature of a function of position and nodal value.
    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, values: &[f64], f: F) -> f64 {
        self.weight * self.nodes.iter().zip(values).map(|(&x, &v)| f(x, v)).sum::<f64>()
    }

    /// Project `x ↦ g(x, u(x))` sampled at the nodes back onto the modes.
    pub fn project_nodal<F: Fn(f64, f64) -> f64>(&self, u: &SpectralField, g: F) -> Result<SpectralField> {
        let values = self.to_grid(u)?;
        let mapped: Vec<f64> = self.nodes.iter().zip(&values).map(|(&x, &v)| g(x, v)).collect();
        self.to_spectral(&mapped)
    }
}

/// The discretised `(A + λ₀I)` together with its collocation grid.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    spec: OperatorSpec,
    eigenvalues: Vec<f64>,
    grid: CollocationGrid,
}

impl DiscreteOperator {
    /// Builds the operator with the default `Q = 2K + 1` interior nodes.
    pub fn new(spec: OperatorSpec) -> Result<Self> {
        Self::with_nodes(spec, 2 * spec.modes + 1)
    }

    pub fn with_nodes(spec: OperatorSpec, nodes: usize) -> Result<Self> {
        spec.validate()?;
        let eigenvalues: Vec<f64> = (1..=spec.modes).map(|k| spec.base_eigenvalue(k) + spec.lambda0).collect();
        if let Some(bad) = eigenvalues.iter().position(|&mu| !(mu > 0.0)) {
            return Err(Error::InvalidOperator(format!("shifted eigenvalue μ_{} = {} is not positive", bad + 1, eigenvalues[bad])));
        }
        let grid = CollocationGrid::new(spec.length, spec.modes, nodes)?;
        Ok(Self { spec, eigenvalues, grid })
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn modes(&self) -> usize {
        self.spec.modes
    }

    pub fn length(&self) -> f64 {
        self.spec.length
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn mu1(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn grid(&self) -> &CollocationGrid {
        &self.grid
    }

    fn check(&self, u: &SpectralField) -> Result<()> {
        if u.modes() != self.modes() {
            return Err(Error::DimensionMismatch { expected: self.modes(), got: u.modes() });
        }
        Ok(())
    }

    /// `⟨(A+λ₀I)u, u⟩ = Σ μ_k c_k²`, the argument of the Kirchhoff coefficient.
    pub fn quadratic_form(&self, u: &SpectralField) -> Result<f64> {
        self.check(u)?;
        Ok(self.eigenvalues.iter().zip(u.coeffs()).map(|(mu, c)| mu * c * c).sum())
    }

    /// `(Σ μ_k^{2α} c_k²)^{1/2}`; α = ½ is the energy norm.
    pub fn fractional_norm(&self, u: &SpectralField, alpha: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidExponent(alpha));
        }
        self.check(u)?;
        let sum: f64 = if alpha == 0.0 {
            u.coeffs().iter().map(|c| c * c).sum()
        } else {
            self.eigenvalues.iter().zip(u.coeffs()).map(|(mu, c)| mu.powf(2.0 * alpha) * c * c).sum()
        };
        Ok(sum.sqrt())
    }

    /// Energy norm `‖u‖_{X^{1/2}}`.
    pub fn energy_norm(&self, u: &SpectralField) -> Result<f64> {
        Ok(self.quadratic_form(u)?.sqrt())
    }

    /// `(A + λ₀I)u` in eigen-coordinates.
    pub fn apply(&self, u: &SpectralField) -> Result<SpectralField> {
        self.check(u)?;
        Ok(SpectralField::new(self.eigenvalues.iter().zip(u.coeffs()).map(|(mu, c)| mu * c).collect()))
    }

    pub fn to_grid(&self, u: &SpectralField) -> Result<Vec<f64>> {
        self.grid.to_grid(u)
    }

    pub fn to_spectral(&self, values: &[f64]) -> Result<SpectralField> {
        self.grid.to_spectral(values)
    }

    /// Unit-L² first eigenfunction, positive on the interior.
    pub fn ground_mode(&self) -> SpectralField {
        SpectralField::mode(self.modes(), 1, 1.0)
    }

    pub fn zero(&self) -> SpectralField {
        SpectralField::zeros(self.modes())
    }

    /// Sampled coerciveness inequality `q(u) + C₂‖u‖² ≥ C₁‖u‖²_{X^{1/2}}`.
    ///
    /// In the diagonal model the energy norm is the quadratic form itself,
    /// so the constants are `C₁ = 1`, `C₂ = 0`.
    pub fn verify_coerciveness(&self, samples: &[SpectralField]) -> Result<CoercivenessReport> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        let (c1, c2) = (1.0, 0.0);
        let mut violations = Vec::new();
        let mut min_margin = f64::INFINITY;
        let mut min_rayleigh = f64::INFINITY;
        for (i, u) in samples.iter().enumerate() {
            let q = self.quadratic_form(u)?;
            let l2 = u.dot(u);
            let energy = self.fractional_norm(u, 0.5)?.powi(2);
            let margin = q + c2 * l2 - c1 * energy;
            if margin < -1e-12 * (1.0 + energy) {
                violations.push(i);
            }
            min_margin = min_margin.min(margin);
            if l2 > 0.0 {
                min_rayleigh = min_rayleigh.min(q / l2);
            }
        }
        Ok(CoercivenessReport {
            samples: samples.len(),
            c1,
            c2,
            min_margin,
            min_rayleigh_quotient: min_rayleigh,
            mu1: self.mu1(),
            violations,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoercivenessReport {
    pub samples: usize,
    pub c1: f64,
    pub c2: f64,
    pub min_margin: f64,
    /// `min q(u)/‖u‖²` over nonzero samples; bounded below by μ₁.
    pub min_rayleigh_quotient: f64,
    pub mu1: f64,
    pub violations: Vec<usize>,
}

impl CoercivenessReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::FieldSampler;

    fn op(m: u32, lambda0: f64, k: usize) -> DiscreteOperator {
        DiscreteOperator::new(OperatorSpec::new(m, lambda0, k, PI)).unwrap()
    }

    #[test]
    fn eigenvalues_closed_form() {
        assert_eq!(op(1, 0.5, 4).eigenvalues().len(), 4);
        for (got, want) in op(1, 0.5, 4).eigenvalues().iter().zip([1.5, 4.5, 9.5, 16.5]) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in op(2, 0.0, 3).eigenvalues().iter().zip([1.0, 16.0, 81.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(DiscreteOperator::new(OperatorSpec::new(1, -2.0, 2, PI)).is_err());
        assert!(DiscreteOperator::new(OperatorSpec::new(1, 0.0, 0, PI)).is_err());
        assert!(DiscreteOperator::new(OperatorSpec::new(1, 0.0, 2, 0.0)).is_err());
        assert!(DiscreteOperator::new(OperatorSpec::new(1, 0.0, 2, -1.0)).is_err());
    }

    #[test]
    fn quadratic_form_examples() {
        let o = op(1, 0.0, 3);
        assert!((o.quadratic_form(&o.ground_mode()).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(o.quadratic_form(&o.zero()).unwrap(), 0.0);
        let o = op(1, 0.5, 2);
        let u = SpectralField::new(vec![1.0, 2.0]);
        assert!((o.quadratic_form(&u).unwrap() - 19.5).abs() < 1e-12);
        assert!(matches!(o.quadratic_form(&SpectralField::zeros(3)), Err(Error::DimensionMismatch { expected: 2, got: 3 })));
    }

    #[test]
    fn fractional_norm_examples() {
        let o = op(1, 0.5, 2);
        assert!((o.fractional_norm(&SpectralField::new(vec![3.0, 4.0]), 0.0).unwrap() - 5.0).abs() < 1e-14);
        assert!((o.fractional_norm(&o.ground_mode(), 0.5).unwrap() - 1.5f64.sqrt()).abs() < 1e-14);
        assert!((o.fractional_norm(&SpectralField::new(vec![1.0, 0.0]), 1.0).unwrap() - 1.5).abs() < 1e-14);
        assert!(matches!(o.fractional_norm(&o.ground_mode(), 1.5), Err(Error::InvalidExponent(_))));
        assert!(o.fractional_norm(&o.ground_mode(), -0.1).is_err());
    }

    #[test]
    fn ground_mode_on_three_nodes() {
        let grid = CollocationGrid::new(PI, 1, 3).unwrap();
        let values = grid.to_grid(&SpectralField::mode(1, 1, 1.0)).unwrap();
        let norm = (2.0 / PI).sqrt();
        let want = [norm * (PI / 4.0).sin(), norm, norm * (3.0 * PI / 4.0).sin()];
        for (v, w) in values.iter().zip(want) {
            assert!((v - w).abs() < 1e-15);
        }
        assert!(grid.to_grid(&SpectralField::zeros(1)).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_must_resolve_modes() {
        assert!(matches!(CollocationGrid::new(PI, 8, 7), Err(Error::GridTooCoarse { nodes: 7, modes: 8 })));
        assert!(DiscreteOperator::with_nodes(OperatorSpec::new(1, 0.0, 8, PI), 5).is_err());
    }

    #[test]
    fn round_trip_random_eight_modes() {
        let grid = CollocationGrid::new(PI, 8, 17).unwrap();
        let mut sampler = FieldSampler::new(11);
        for _ in 0..20 {
            let u = sampler.uniform(8, 1.0);
            let back = grid.to_spectral(&grid.to_grid(&u).unwrap()).unwrap();
            let scale = u.l2_norm();
            for (a, b) in u.coeffs().iter().zip(back.coeffs()) {
                assert!((a - b).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn coerciveness_report() {
        let o = op(1, 0.5, 12);
        let mut sampler = FieldSampler::new(3);
        let samples: Vec<_> = (0..100).map(|_| sampler.uniform(12, 2.0)).collect();
        let report = o.verify_coerciveness(&samples).unwrap();
        assert!(report.holds());
        assert!(report.min_rayleigh_quotient >= o.mu1() - 1e-12);

        let zero = o.verify_coerciveness(&[o.zero()]).unwrap();
        assert!(zero.holds());
        assert_eq!(zero.min_margin, 0.0);

        let ground = o.verify_coerciveness(&[o.ground_mode()]).unwrap();
        assert!(ground.holds() && ground.min_margin.abs() < 1e-14);
        assert!((o.quadratic_form(&o.ground_mode()).unwrap() - 1.5).abs() < 1e-14);

        assert!(matches!(o.verify_coerciveness(&[]), Err(Error::EmptySamples)));
    }
}
