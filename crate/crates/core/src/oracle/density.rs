//! Entropy by reconstructing `ρ(q, q′)` on a grid and diagonalizing it.
//!
//! The position kernel comes straight from the characteristic function:
//! `ρ(q, q′) = (1/2πħ)∫dη e^{−(i/ħ)η(q+q′)/2} χ(q − q′, η)`. On a uniform
//! grid `q − q′` takes only `2N − 1` values, so the η integrand is tabulated
//! once per difference.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{require, BgcError, Result};
use crate::exact_channel::{aux_functions, chi_from_params, evolve_params, ChannelSpec};
use crate::phase_space::{GaussianTerm, StateSum};

const CLIP: f64 = 1e-12;
const NEGATIVE_MASS_LIMIT: f64 = 1e-6;

/// Sampling of the position and η axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityGridParams {
    pub q_min: f64,
    pub q_max: f64,
    pub n_q: usize,
    /// The η integral runs over `[−eta_max, eta_max]`.
    pub eta_max: f64,
    pub n_eta: usize,
}

impl Default for DensityGridParams {
    /// Sized for `ħ = 1` and order-one widths: `q ∈ [−16, 16]` with 321
    /// nodes and 401 η nodes over `[−16, 16]`. Dephasing fattens the q tails
    /// (the spread grows with p²), hence the generous window.
    fn default() -> Self {
        Self { q_min: -16.0, q_max: 16.0, n_q: 321, eta_max: 16.0, n_eta: 401 }
    }
}

impl DensityGridParams {
    fn validate(&self) -> Result<()> {
        require(self.n_q >= 2, "n_q", "≥ 2", self.n_q as f64)?;
        require(self.n_eta >= 2, "n_eta", "≥ 2", self.n_eta as f64)?;
        require(self.q_max > self.q_min, "q_max", "> q_min", self.q_max)?;
        require(self.eta_max > 0.0, "eta_max", "> 0", self.eta_max)
    }

    fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n_q - 1) as f64
    }
}

/// Samples of `ρ(q, q′)` on a square position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixGrid {
    pub q_nodes: Vec<f64>,
    pub rho: DMatrix<Complex64>,
    pub weight: f64,
}

impl DensityMatrixGrid {
    pub fn trace(&self) -> Complex64 {
        self.rho.diagonal().iter().sum::<Complex64>() * self.weight
    }

    /// Largest `|ρ − ρ†|` entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.q_nodes.len();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in 0..=j {
                worst = worst.max((self.rho[(j, k)] - self.rho[(k, j)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the operator, i.e. of `ρ·Δq` after Hermitian
    /// symmetrization, sorted descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5 * self.weight, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// `−Σλ ln λ` over eigenvalues above the clip threshold.
    pub fn entropy(&self) -> Result<f64> {
        let ev = self.eigenvalues();
        let negative: f64 = ev.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
        if negative > NEGATIVE_MASS_LIMIT {
            return Err(BgcError::NegativeEigenvalues { mass: negative });
        }
        Ok(ev.iter().filter(|&&l| l > CLIP).map(|&l| -l * l.ln()).sum())
    }
}

/// Tabulates `ρ(q, q′)` for an evolved state.
pub fn density_matrix(spec: &ChannelSpec, state: &StateSum, t: f64, grid: &DensityGridParams) -> Result<DensityMatrixGrid> {
    grid.validate()?;
    if t < 0.0 {
        return Err(BgcError::NegativeTime(t));
    }
    let hbar = state.hbar;
    let s = spec.with_hbar(hbar);
    let n = grid.n_q;
    let dq = grid.dq();
    let deta = 2.0 * grid.eta_max / (grid.n_eta - 1) as f64;
    let etas: Vec<f64> = (0..grid.n_eta).map(|k| -grid.eta_max + deta * k as f64).collect();
    let q_nodes: Vec<f64> = (0..n).map(|j| grid.q_min + dq * j as f64).collect();

    // table[d][k] = trapezoid weight · χ((d − n + 1)Δq, η_k)
    let n_diff = 2 * n - 1;
    let mut table = vec![Complex64::new(0.0, 0.0); n_diff * etas.len()];
    for term in &state.terms {
        for (k, &eta) in etas.iter().enumerate() {
            let ep = evolve_params(&s, term, eta, t)?;
            let u = aux_functions(&s, term.g, eta, t)?.u;
            let wt = if k == 0 || k + 1 == etas.len() { 0.5 } else { 1.0 } * deta;
            for d in 0..n_diff {
                let xi = (d as f64 - (n - 1) as f64) * dq;
                table[d * etas.len() + k] += term.weight * chi_from_params(hbar, term, &ep, u, xi, eta) * wt;
            }
        }
    }

    // The phase depends on j + k only.
    let n_sum = 2 * n - 1;
    let mut phase = vec![Complex64::new(0.0, 0.0); n_sum * etas.len()];
    for m in 0..n_sum {
        let mid = grid.q_min + 0.5 * dq * m as f64;
        for (k, &eta) in etas.iter().enumerate() {
            phase[m * etas.len() + k] = Complex64::from_polar(1.0 / (2.0 * PI * hbar), -eta * mid / hbar);
        }
    }

    let mut rho = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let d = j + n - 1 - k;
            let row = &table[d * etas.len()..(d + 1) * etas.len()];
            let ph = &phase[(j + k) * etas.len()..(j + k + 1) * etas.len()];
            rho[(j, k)] = row.iter().zip(ph).map(|(a, b)| a * b).sum();
        }
    }
    Ok(DensityMatrixGrid { q_nodes, rho, weight: dq })
}

/// Von Neumann entropy of a single evolved Gaussian term.
pub fn entropy_numerical(spec: &ChannelSpec, term: &GaussianTerm, t: f64, grid: &DensityGridParams) -> Result<f64> {
    term.require_state()?;
    let state = StateSum::single(*term, spec.hbar)?;
    entropy_numerical_state(spec, &state, t, grid)
}

/// Von Neumann entropy of an evolved state given as a full sum of terms.
pub fn entropy_numerical_state(spec: &ChannelSpec, state: &StateSum, t: f64, grid: &DensityGridParams) -> Result<f64> {
    density_matrix(spec, state, t, grid)?.entropy()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::entropy_cov;
    use nalgebra::Vector2;

    fn coherent() -> GaussianTerm {
        GaussianTerm::coherent(Vector2::new(0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn pure_state_has_zero_entropy() {
        let spec = ChannelSpec::new(1.0, 0.5, 1.0).unwrap();
        let dm = density_matrix(&spec, &StateSum::single(coherent(), 1.0).unwrap(), 0.0, &DensityGridParams::default()).unwrap();
        assert!((dm.trace() - 1.0).norm() < 1e-8);
        assert!(dm.hermiticity_defect() < 1e-12);
        assert!(dm.entropy().unwrap().abs() < 1e-4);
    }

    #[test]
    fn gaussian_limit_matches_closed_form() {
        let spec = ChannelSpec::new(1.0, 0.0, 1.0).unwrap();
        let s = entropy_numerical(&spec, &coherent(), 1.0, &DensityGridParams::default()).unwrap();
        let c = entropy_cov(&spec, &coherent(), 1.0).unwrap();
        assert!((s - c).abs() < 1e-3, "{s} vs {c}");
    }

    #[test]
    fn purity_agrees_with_closed_form() {
        let spec = ChannelSpec::new(1.0, 1.0, 1.0).unwrap();
        let state = StateSum::single(coherent(), 1.0).unwrap();
        let dm = density_matrix(&spec, &state, 1.0, &DensityGridParams::default()).unwrap();
        let p2: f64 = dm.eigenvalues().iter().map(|l| l * l).sum();
        let closed = crate::observables::purity(&spec, &state, 1.0).unwrap();
        assert!((p2 - closed).abs() < 1e-7, "{p2} vs {closed}");
        // A few 1e−7 of the position density sits beyond |q| = 16 here.
        assert!((dm.trace().re - 1.0).abs() < 1e-6, "{}", dm.trace());
    }

    #[test]
    fn reflection_invariance() {
        let spec = ChannelSpec::new(1.0, 1.0, 1.0).unwrap();
        let a = DensityGridParams { q_min: -15.0, q_max: 17.0, ..Default::default() };
        let b = DensityGridParams { q_min: -17.0, q_max: 15.0, ..Default::default() };
        let sa = entropy_numerical(&spec, &coherent(), 0.7, &a).unwrap();
        let sb = entropy_numerical(&spec, &coherent(), 0.7, &b).unwrap();
        assert!((sa - sb).abs() < 1e-6, "{sa} vs {sb}");
    }

    #[test]
    fn dephasing_raises_entropy() {
        let g0 = ChannelSpec::new(1.0, 0.0, 1.0).unwrap();
        let g5 = g0.with_gamma(0.5);
        for &t in &[0.3, 0.6, 1.0] {
            let a = entropy_numerical(&g0, &coherent(), t, &DensityGridParams::default()).unwrap();
            let b = entropy_numerical(&g5, &coherent(), t, &DensityGridParams::default()).unwrap();
            assert!(b > a, "t {t}: {b} ≤ {a}");
        }
    }
}
