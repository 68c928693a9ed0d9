//! States on the one-mode phase space `x = (p, q)`.
//!
//! A state is a finite sum of (possibly oscillatory) Gaussian Wigner terms.
//! The Wigner function is normalised so that it integrates to the trace and
//! the characteristic function is `χ(ξ) = ∫ e^{(i/ħ)ξ·x} W(x) dx`, so
//! `χ(0)` is the trace.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{require, BgcError, Result};

/// The standard symplectic form in (p, q) ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticForm {
    pub omega: Matrix2<f64>,
}

impl SymplecticForm {
    pub fn standard() -> Self {
        Self { omega: Matrix2::new(0.0, -1.0, 1.0, 0.0) }
    }

    /// `a·Ωb`.
    pub fn pairing(&self, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
        a.dot(&(self.omega * b))
    }
}

impl Default for SymplecticForm {
    fn default() -> Self {
        Self::standard()
    }
}

/// Dimensionless covariance `G`; the physical covariance is `Γ = (ħ/2)G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    pub g: Matrix2<f64>,
    pub hbar: f64,
}

const SYMMETRY_TOL: f64 = 1e-12;

fn asymmetry(m: &Matrix2<f64>) -> f64 {
    (m[(0, 1)] - m[(1, 0)]).abs() / (1.0 + m.abs().max())
}

impl CovarianceMatrix {
    pub fn new(g: Matrix2<f64>, hbar: f64) -> Result<Self> {
        require(hbar > 0.0, "hbar", "> 0", hbar)?;
        let a = asymmetry(&g);
        if a > SYMMETRY_TOL {
            return Err(BgcError::NotSymmetric { asymmetry: a });
        }
        Ok(Self { g, hbar })
    }

    /// Builds `G = (2/ħ)Γ` from a physical covariance.
    pub fn from_physical(gamma: Matrix2<f64>, hbar: f64) -> Result<Self> {
        Self::new(gamma * (2.0 / hbar), hbar)
    }

    pub fn physical(&self) -> Matrix2<f64> {
        self.g * (0.5 * self.hbar)
    }

    pub fn det(&self) -> f64 {
        self.g.determinant()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g[(0, 0)] > 0.0 && self.det() > 0.0
    }
}

/// One Gaussian Wigner component
/// `weight·(1/πħ)·e^{(i/ħ)(qδp − pδq)}·e^{−(1/ħ)[g(q−q₀)² + (p−p₀)²/g]}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTerm {
    pub z0: Vector2<f64>,
    pub dz: Vector2<f64>,
    pub g: f64,
    pub weight: Complex64,
}

impl GaussianTerm {
    pub fn new(z0: Vector2<f64>, dz: Vector2<f64>, g: f64, weight: Complex64) -> Result<Self> {
        require(g > 0.0 && g.is_finite(), "g", "> 0", g)?;
        Ok(Self { z0, dz, g, weight })
    }

    /// A coherent (squeezed) state centred at `z0` with unit weight.
    pub fn coherent(z0: Vector2<f64>, g: f64) -> Result<Self> {
        Self::new(z0, Vector2::zeros(), g, Complex64::new(1.0, 0.0))
    }

    pub fn p0(&self) -> f64 {
        self.z0[0]
    }
    pub fn q0(&self) -> f64 {
        self.z0[1]
    }
    pub fn dp(&self) -> f64 {
        self.dz[0]
    }
    pub fn dq(&self) -> f64 {
        self.dz[1]
    }

    pub fn is_oscillatory(&self) -> bool {
        self.dz != Vector2::zeros()
    }

    /// Fails unless the term is a (sub-normalised) state on its own.
    pub fn require_state(&self) -> Result<()> {
        if self.is_oscillatory() {
            Err(BgcError::NotAState { dp: self.dp(), dq: self.dq() })
        } else {
            Ok(())
        }
    }

    /// `G₀ = diag(g, 1/g)`, the width matrix of the characteristic function.
    pub fn g_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.g, 0.0, 0.0, 1.0 / self.g)
    }

    /// The shift `s = Ωᵀδz = (δq, −δp)` of the characteristic function.
    pub fn chi_shift(&self) -> Vector2<f64> {
        Vector2::new(self.dq(), -self.dp())
    }

    pub fn wigner(&self, x: &Vector2<f64>, hbar: f64) -> Complex64 {
        let (p, q) = (x[0], x[1]);
        let gauss = self.g * (q - self.q0()).powi(2) + (p - self.p0()).powi(2) / self.g;
        let phase = (q * self.dp() - p * self.dq()) / hbar;
        self.weight * Complex64::new(-gauss / hbar, phase).exp() / (PI * hbar)
    }

    /// Characteristic function without the weight.
    pub fn chi_unweighted(&self, xi: &Vector2<f64>, hbar: f64) -> Complex64 {
        let d = xi - self.chi_shift();
        let quad = d.dot(&(self.g_matrix() * d));
        let phase = self.z0.dot(xi) + self.q0() * self.dp() - self.p0() * self.dq();
        Complex64::new(-quad / (4.0 * hbar), phase / hbar).exp()
    }

    pub fn chi(&self, xi: &Vector2<f64>, hbar: f64) -> Complex64 {
        self.weight * self.chi_unweighted(xi, hbar)
    }

    pub fn trace(&self, hbar: f64) -> Complex64 {
        self.chi(&Vector2::zeros(), hbar)
    }
}

/// A finite sum of Gaussian terms.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSum {
    pub terms: Vec<GaussianTerm>,
    pub hbar: f64,
}

impl StateSum {
    pub fn new(terms: Vec<GaussianTerm>, hbar: f64) -> Result<Self> {
        require(hbar > 0.0 && hbar.is_finite(), "hbar", "> 0", hbar)?;
        for t in &terms {
            require(t.g > 0.0, "g", "> 0", t.g)?;
        }
        Ok(Self { terms, hbar })
    }

    pub fn single(term: GaussianTerm, hbar: f64) -> Result<Self> {
        Self::new(vec![term], hbar)
    }

    pub fn trace(&self) -> Complex64 {
        char_eval(self, &Vector2::zeros())
    }
}

pub fn wigner_eval(state: &StateSum, x: &Vector2<f64>) -> Complex64 {
    state.terms.iter().map(|t| t.wigner(x, state.hbar)).sum()
}

pub fn char_eval(state: &StateSum, xi: &Vector2<f64>) -> Complex64 {
    state.terms.iter().map(|t| t.chi(xi, state.hbar)).sum()
}

/// Normalised superposition of the coherent states at `z1` and `z2`.
///
/// The two cross terms sit at the midpoint with offsets `±(z2 − z1)`; their
/// weights carry the overlap phase `e^{∓(i/2ħ) z₁·Ωz₂}` so that each cross
/// term integrates to the corresponding coherent-state overlap.
pub fn cat_state(z1: Vector2<f64>, z2: Vector2<f64>, g: f64, hbar: f64) -> Result<StateSum> {
    require(g > 0.0, "g", "> 0", g)?;
    require(hbar > 0.0, "hbar", "> 0", hbar)?;
    let omega = SymplecticForm::standard();
    let mid = 0.5 * (z1 + z2);
    let delta = z2 - z1;
    let area = omega.pairing(&z1, &z2);
    let one = Complex64::new(1.0, 0.0);
    let cross = Complex64::from_polar(1.0, -0.5 * area / hbar);
    let mut terms = vec![
        GaussianTerm::new(z1, Vector2::zeros(), g, one)?,
        GaussianTerm::new(z2, Vector2::zeros(), g, one)?,
        GaussianTerm::new(mid, delta, g, cross)?,
        GaussianTerm::new(mid, -delta, g, cross.conj())?,
    ];
    let norm = terms.iter().map(|t| t.trace(hbar)).sum::<Complex64>().re;
    for t in &mut terms {
        t.weight /= norm;
    }
    StateSum::new(terms, hbar)
}

/// Normalisation constant of the unnormalised two-component cat state.
pub fn cat_normalization(z1: Vector2<f64>, z2: Vector2<f64>, g: f64, hbar: f64) -> f64 {
    let d = z2 - z1;
    let area = SymplecticForm::standard().pairing(&z1, &z2);
    2.0 + 2.0 * (0.5 * area / hbar).cos() * (-(g * d[1] * d[1] + d[0] * d[0] / g) / (4.0 * hbar)).exp()
}

/// Robertson–Schrödinger check: `G > 0` and `√det G ≥ 1`.
pub fn uncertainty_check(g: &Matrix2<f64>) -> Result<bool> {
    let a = asymmetry(g);
    if a > SYMMETRY_TOL {
        return Err(BgcError::NotSymmetric { asymmetry: a });
    }
    let det = g.determinant();
    let pd = g[(0, 0)] > 0.0 && det > 0.0;
    Ok(pd && det.sqrt() >= 1.0 - 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(a: f64, b: f64) -> Vector2<f64> {
        Vector2::new(a, b)
    }

    #[test]
    fn peak_value() {
        let s = StateSum::single(GaussianTerm::coherent(v(0.0, 0.0), 1.0).unwrap(), 1.0).unwrap();
        assert!((wigner_eval(&s, &v(0.0, 0.0)).re - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn displaced_by_root_hbar() {
        let hbar: f64 = 0.3;
        let g = 2.0;
        let t = GaussianTerm::coherent(v(0.4, -1.0), g).unwrap();
        let w = t.wigner(&(t.z0 + v(hbar.sqrt(), 0.0)), hbar);
        assert!((w.re - (-1.0 / g).exp() / (PI * hbar)).abs() < 1e-14);
    }

    #[test]
    fn chi_of_coherent_state() {
        let s = StateSum::single(GaussianTerm::coherent(v(0.0, 0.0), 1.0).unwrap(), 1.0).unwrap();
        assert!((char_eval(&s, &v(2.0, 0.0)).re - (-1.0f64).exp()).abs() < 1e-15);
        assert!((char_eval(&s, &v(0.0, 0.0)).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fig2_cat_normalization() {
        let n = cat_normalization(v(0.0, 3.0), v(0.0, -3.0), 1.0, 1.0);
        assert!((n - (2.0 + 2.0 * (-9.0f64).exp())).abs() < 1e-15);
        assert!((n - 2.000247).abs() < 1e-6);
        let s = cat_state(v(0.0, 3.0), v(0.0, -3.0), 1.0, 1.0).unwrap();
        assert!((s.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn degenerate_cat_is_coherent() {
        let z = v(0.5, -0.2);
        assert!((cat_normalization(z, z, 1.3, 0.7) - 4.0).abs() < 1e-15);
        let s = cat_state(z, z, 1.3, 0.7).unwrap();
        let c = StateSum::single(GaussianTerm::coherent(z, 1.3).unwrap(), 0.7).unwrap();
        for x in [v(0.0, 0.0), v(1.0, -0.3), v(-0.4, 0.9)] {
            assert!((wigner_eval(&s, &x) - wigner_eval(&c, &x)).norm() < 1e-14);
        }
    }

    #[test]
    fn cat_rejects_bad_input() {
        assert!(cat_state(v(0.0, 1.0), v(0.0, -1.0), 0.0, 1.0).is_err());
        assert!(cat_state(v(0.0, 1.0), v(0.0, -1.0), 1.0, -1.0).is_err());
    }

    #[test]
    fn uncertainty_examples() {
        assert!(uncertainty_check(&Matrix2::identity()).unwrap());
        assert!(uncertainty_check(&Matrix2::new(3.0, 0.0, 0.0, 1.0 / 3.0)).unwrap());
        assert!(!uncertainty_check(&Matrix2::new(0.5, 0.0, 0.0, 1.0)).unwrap());
        assert!(uncertainty_check(&Matrix2::new(1.0, 0.2, 0.1, 1.0)).is_err());
    }
}
