//! Von Neumann entropy of Gaussian states and of their first-order
//! dephasing corrections.
//!
//! A one-mode Gaussian state with width matrix `G` (physical covariance
//! `(ħ/2)G`) has symplectic eigenvalue `z = √det G` and entropy
//!
//! ```text
//! f(z) = ½(z+1)ln(½(z+1)) − ½(z−1)ln(½(z−1)).
//! ```
//!
//! Its logarithm is again quadratic: `−ln ρ̂` has Weyl symbol `½x·Qx + ln Z`
//! with `Q = 2(z/ħ)·arccoth(z)·G⁻¹` and `Z = ½√(z² − 1)`.

use nalgebra::{Matrix2, Vector2};

use crate::approximations::{sc_gaussian_covariance, sc_width};
use crate::error::{require, BgcError, Result};
use crate::exact_channel::ChannelSpec;
use crate::observables::moments_closed;
use crate::phase_space::{CovarianceMatrix, GaussianTerm};

const PURE_GUARD: f64 = 1e-12;

pub fn symplectic_eigenvalue(g: &CovarianceMatrix) -> Result<f64> {
    if !g.is_positive_definite() {
        return Err(BgcError::NotPositiveDefinite);
    }
    Ok(g.det().sqrt())
}

/// `arccoth z = ½ln((z+1)/(z−1))` for `z > 1`.
pub fn arccoth(z: f64) -> f64 {
    0.5 * ((z + 1.0) / (z - 1.0)).ln()
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

pub fn entropy_f(z: f64) -> Result<f64> {
    // Rounding can push a pure state a hair below one.
    require(z >= 1.0 - PURE_GUARD, "z", "≥ 1", z)?;
    let z = z.max(1.0);
    Ok(xlogx(0.5 * (z + 1.0)) - xlogx(0.5 * (z - 1.0)))
}

/// The same value written as `z·arccoth z + ln(½√(z²−1))`.
pub fn entropy_f_log_route(z: f64) -> Result<f64> {
    if z <= 1.0 + PURE_GUARD {
        return Err(BgcError::PureStateSingularity { z });
    }
    Ok(z * arccoth(z) + (0.5 * ((z - 1.0) * (z + 1.0)).sqrt()).ln())
}

/// Quadratic form and normalisation of `−ln ρ̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLog {
    pub q_mat: Matrix2<f64>,
    pub log_z: f64,
}

impl GaussianLog {
    /// `B(x) = −½x·Qx − ln Z`, the symbol of `ln ρ̂` about the centre.
    pub fn symbol(&self, x: &Vector2<f64>) -> f64 {
        -0.5 * x.dot(&(self.q_mat * x)) - self.log_z
    }
}

pub fn log_gaussian(g: &CovarianceMatrix) -> Result<GaussianLog> {
    let z = symplectic_eigenvalue(g)?;
    if z <= 1.0 + PURE_GUARD {
        return Err(BgcError::PureStateSingularity { z });
    }
    let gi = g.g.try_inverse().ok_or(BgcError::NotPositiveDefinite)?;
    Ok(GaussianLog {
        q_mat: gi * (2.0 * z * arccoth(z) / g.hbar),
        log_z: (0.5 * ((z - 1.0) * (z + 1.0)).sqrt()).ln(),
    })
}

/// Weyl symbol of `e^{−βĤ}`, `Ĥ` the quantisation of `½x·Qx`, at `x`, and its
/// trace `Z(β) = 1/(2 sinh(ωħβ/2))` with `ω = √det Q`.
pub fn exp_quadratic_symbol(q: &Matrix2<f64>, beta: f64, hbar: f64, x: &Vector2<f64>) -> Result<(f64, f64)> {
    require(beta > 0.0, "beta", "> 0", beta)?;
    require(hbar > 0.0, "hbar", "> 0", hbar)?;
    if !(q[(0, 0)] > 0.0 && q.determinant() > 0.0) {
        return Err(BgcError::NotPositiveDefinite);
    }
    let omega = q.determinant().sqrt();
    let a = 0.5 * omega * hbar * beta;
    let h = 0.5 * x.dot(&(q * x));
    let symbol = (-(2.0 * a.tanh() / (omega * hbar)) * h).exp() / a.cosh();
    Ok((symbol, 0.5 / a.sinh()))
}

/// Characteristic function of `e^{−βĤ}/Z(β)`:
/// `exp(−(1/4ħ)(ω/tanh(ωħβ/2))·ξ·Q⁻¹ξ)`.
pub fn thermal_chi(q: &Matrix2<f64>, beta: f64, hbar: f64, xi: &Vector2<f64>) -> Result<f64> {
    let qi = q.try_inverse().ok_or(BgcError::NotPositiveDefinite)?;
    let omega = q.determinant().sqrt();
    let k = omega / (0.5 * omega * hbar * beta).tanh();
    Ok((-k * xi.dot(&(qi * xi)) / (4.0 * hbar)).exp())
}

/// Entropy via `(ħ/4)tr(QG) + ln Z`, the trace of `ρ̂·(−ln ρ̂)` in the Weyl
/// calculus (only the first two terms of the product formula survive).
pub fn entropy_gaussian_trace_route(g: &CovarianceMatrix) -> Result<f64> {
    let log = log_gaussian(g)?;
    Ok(0.25 * g.hbar * (log.q_mat * g.g).trace() + log.log_z)
}

pub fn entropy_gaussian(g: &CovarianceMatrix) -> Result<f64> {
    let z = symplectic_eigenvalue(g)?;
    let s = entropy_f(z)?;
    if z > 1.0 + 1e-6 {
        let other = entropy_gaussian_trace_route(g)?;
        if (other - s).abs() > 1e-10 * (1.0 + s) {
            log::warn!("entropy routes disagree at z = {z}: {s} vs {other}");
        }
    }
    Ok(s)
}

fn require_plain(term: &GaussianTerm, t: f64) -> Result<()> {
    if term.is_oscillatory() {
        return Err(BgcError::NotAState { dp: term.dp(), dq: term.dq() });
    }
    if t < 0.0 {
        return Err(BgcError::NegativeTime(t));
    }
    Ok(())
}

/// Entropy of the Gaussian state with the exact covariance, `f(2√det Γ/ħ)`.
pub fn entropy_cov(spec: &ChannelSpec, term: &GaussianTerm, t: f64) -> Result<f64> {
    require_plain(term, t)?;
    let m = moments_closed(spec, term, t)?;
    entropy_f(symplectic_eigenvalue(&m.cov)?)
}

/// Entropy of the leading-order wave packet, `f(√det G_t)`.
pub fn entropy_semiclassical(spec: &ChannelSpec, term: &GaussianTerm, t: f64) -> Result<f64> {
    require_plain(term, t)?;
    entropy_f(symplectic_eigenvalue(&sc_gaussian_covariance(spec, term, t)?)?)
}

/// `S(γ) = S(0) + γ²·∂S/∂γ² + O(γ⁴)`.
///
/// The first-order state has the same centre as the Gaussian one and only its
/// position variance moves, by `∂Γ_qq/∂γ² = ħt[p₀² + ħ(g + σ²t)/2]`. Pairing
/// this with `−ln ρ̂(0)` gives
///
/// ```text
/// ∂S/∂γ² = ½Q_qq·∂Γ_qq/∂γ² = t[2p₀² + ħ(g + σ²t)]·G_pp·arccoth(z)/(2z)
/// ```
///
/// with `G` the `γ = 0` width matrix and `z = √det G`.
pub fn entropy_perturbative(spec: &ChannelSpec, term: &GaussianTerm, t: f64) -> Result<f64> {
    require_plain(term, t)?;
    let (g, p0, h, s2) = (term.g, term.p0(), spec.hbar, spec.sigma * spec.sigma);
    let g0 = sc_width(&spec.with_gamma(0.0), g, p0, t);
    let z = g0.determinant().sqrt();
    if z <= 1.0 + PURE_GUARD {
        return Err(BgcError::PureStateSingularity { z });
    }
    let slope = t * (2.0 * p0 * p0 + h * (g + s2 * t)) * g0[(0, 0)] * arccoth(z) / (2.0 * z);
    Ok(entropy_f(z)? + spec.gamma * spec.gamma * slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cov(g: Matrix2<f64>, hbar: f64) -> CovarianceMatrix {
        CovarianceMatrix::new(g, hbar).unwrap()
    }

    #[test]
    fn symplectic_eigenvalue_examples() {
        assert_eq!(symplectic_eigenvalue(&cov(Matrix2::identity(), 1.0)).unwrap(), 1.0);
        assert!((symplectic_eigenvalue(&cov(Matrix2::new(3.7, 0.0, 0.0, 1.0 / 3.7), 1.0)).unwrap() - 1.0).abs() < 1e-15);
        let gt = cov(Matrix2::new(3.0, 2.0, 2.0, 8.0 / 3.0), 1.0);
        assert!((symplectic_eigenvalue(&gt).unwrap() - 2.0).abs() < 1e-14);
        assert!(symplectic_eigenvalue(&cov(Matrix2::new(1.0, 2.0, 2.0, 1.0), 1.0)).is_err());
    }

    #[test]
    fn f_values() {
        assert_eq!(entropy_f(1.0).unwrap(), 0.0);
        let expect = 1.5 * 1.5f64.ln() + 0.5 * 2f64.ln();
        assert!((entropy_f(2.0).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.95477).abs() < 1e-5);
        assert!(entropy_f(0.9).is_err());
        let mut prev = 0.0;
        for i in 1..2000 {
            let s = entropy_f(1.0 + 0.01 * i as f64).unwrap();
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn two_routes_agree() {
        for i in 1..=400 {
            let z = 1.0 + 99.0 * i as f64 / 401.0;
            let (a, b) = (entropy_f(z).unwrap(), entropy_f_log_route(z).unwrap());
            assert!((a - b).abs() < 1e-12, "z={z}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let z: f64 = rng.random_range(1.001..10.0);
            let r: f64 = rng.random_range(0.2..5.0);
            let th: f64 = rng.random_range(0.0..3.0);
            let (c, s) = (th.cos(), th.sin());
            let rot = Matrix2::new(c, -s, s, c);
            let g = rot * Matrix2::new(z * r, 0.0, 0.0, z / r) * rot.transpose();
            let g = cov(0.5 * (g + g.transpose()), rng.random_range(0.3..2.0));
            let a = entropy_gaussian(&g).unwrap();
            let b = entropy_gaussian_trace_route(&g).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + a), "{a} {b}");
        }
    }

    #[test]
    fn log_of_twice_identity() {
        let log = log_gaussian(&cov(2.0 * Matrix2::identity(), 0.7)).unwrap();
        let expect = 2.0 * 2.0 * 0.5 * 3f64.ln() / 0.7 * 0.5;
        assert!((log.q_mat - Matrix2::identity() * expect).abs().max() < 1e-14);
        assert!(matches!(log_gaussian(&cov(Matrix2::identity(), 1.0)), Err(BgcError::PureStateSingularity { .. })));
    }

    #[test]
    fn thermal_symbol_trace_and_small_beta() {
        let q = Matrix2::new(1.3, 0.4, 0.4, 0.9);
        let hbar = 0.6;
        let (sym, _) = exp_quadratic_symbol(&q, 1e-9, hbar, &Vector2::new(0.4, -0.7)).unwrap();
        assert!((sym - 1.0).abs() < 1e-8);
        assert!(exp_quadratic_symbol(&q, 0.0, hbar, &Vector2::zeros()).is_err());
        // (1/2πħ)∬A = Z: A is a Gaussian with exponent −k·½x·Qx.
        for &beta in &[0.3, 1.0, 4.0] {
            let (a0, z) = exp_quadratic_symbol(&q, beta, hbar, &Vector2::zeros()).unwrap();
            let omega = q.determinant().sqrt();
            let k = 2.0 * (0.5 * omega * hbar * beta).tanh() / (omega * hbar);
            let integral = a0 * 2.0 * std::f64::consts::PI / (k * omega);
            assert!((integral / (2.0 * std::f64::consts::PI * hbar) - z).abs() < 1e-12 * z);
        }
    }

    #[test]
    fn exp_log_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let hbar: f64 = rng.random_range(0.3..2.0);
            let (a, d) = (rng.random_range(1.2..4.0), rng.random_range(1.2..4.0));
            let b = rng.random_range(-0.5..0.5);
            let g = cov(Matrix2::new(a, b, b, d), hbar);
            let log = log_gaussian(&g).unwrap();
            let gi = g.g.try_inverse().unwrap();
            let z = g.det().sqrt();
            for _ in 0..5 {
                let x = Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let (sym, zb) = exp_quadratic_symbol(&log.q_mat, 1.0, hbar, &x).unwrap();
                assert!((zb.ln() - log.log_z).abs() < 1e-10);
                let w = sym / zb / (2.0 * std::f64::consts::PI * hbar);
                let expect = (-(x.dot(&(gi * x))) / hbar).exp() / (std::f64::consts::PI * hbar * z);
                assert!((w - expect).abs() < 1e-10 * (1.0 + expect));
                let chi = thermal_chi(&log.q_mat, 1.0, hbar, &x).unwrap();
                let chi_g = (-(x.dot(&(g.g * x))) / (4.0 * hbar)).exp();
                assert!((chi - chi_g).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cov_entropy_limits() {
        let spec = ChannelSpec::new(1.0, 0.0, 1.0).unwrap();
        let term = GaussianTerm::coherent(Vector2::zeros(), 1.0).unwrap();
        assert!(entropy_cov(&spec, &term, 0.0).unwrap().abs() < 1e-12);
        let s = entropy_cov(&spec, &term, 1.0).unwrap();
        assert!((s - entropy_f(2.0).unwrap()).abs() < 1e-12);
        assert!((entropy_semiclassical(&spec, &term, 1.0).unwrap() - s).abs() < 1e-12);
        // Dephasing adds an ħ² variance the wave packet misses.
        let spec = spec.with_gamma(0.5);
        assert!(entropy_cov(&spec, &term, 0.5).unwrap() > entropy_semiclassical(&spec, &term, 0.5).unwrap());
    }

    #[test]
    fn perturbative_entropy() {
        let spec = ChannelSpec::new(1.0, 0.0, 1.0).unwrap();
        let term = GaussianTerm::coherent(Vector2::zeros(), 1.0).unwrap();
        let z = (2.0 * (1.0 + 0.25 + 1.0 / 12.0) - 0.75f64 * 0.75).sqrt();
        assert!((z - 1.45057).abs() < 1e-5);
        assert!((entropy_perturbative(&spec, &term, 0.5).unwrap() - entropy_f(z).unwrap()).abs() < 1e-14);
        let with = entropy_perturbative(&spec.with_gamma(0.5), &term, 0.5).unwrap();
        let expect = entropy_f(z).unwrap() + 0.25 * 0.5 * 1.5 * 2.0 * arccoth(z) / (2.0 * z);
        assert!((with - expect).abs() < 1e-14);
        assert!((with - 0.694).abs() < 1e-3);
        let d1 = entropy_perturbative(&spec.with_gamma(0.3), &term, 0.5).unwrap() - entropy_f(z).unwrap();
        let d2 = entropy_perturbative(&spec.with_gamma(0.6), &term, 0.5).unwrap() - entropy_f(z).unwrap();
        assert!((d2 / d1 - 4.0).abs() < 1e-12);
        assert!(matches!(entropy_perturbative(&spec, &term, 0.0), Err(BgcError::PureStateSingularity { .. })));
    }

    #[test]
    fn perturbative_slope_matches_covariance_entropy() {
        // S_cov is a Gaussian entropy with the exact covariance, so its γ² slope
        // at γ = 0 must equal the first-order formula.
        let term = GaussianTerm::coherent(Vector2::new(0.6, 0.0), 1.3).unwrap();
        let spec = ChannelSpec::new(0.8, 0.0, 0.7).unwrap();
        let t = 0.7;
        let eps = 1e-4;
        let fd = (entropy_cov(&spec.with_gamma(f64::sqrt(eps)), &term, t).unwrap() - entropy_cov(&spec, &term, t).unwrap()) / eps;
        let slope = (entropy_perturbative(&spec.with_gamma(1.0), &term, t).unwrap() - entropy_perturbative(&spec, &term, t).unwrap()).abs();
        assert!((fd / slope - 1.0).abs() < 1e-3, "{fd} vs {slope}");
    }
}
