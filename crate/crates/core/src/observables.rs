//! Moments, purity and decoherence functionals of evolved states.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{BgcError, Result};
use crate::exact_channel::{aux_functions, evolve_params, ChannelSpec};
use crate::phase_space::{CovarianceMatrix, GaussianTerm, StateSum};
use crate::quad::{gauss_kronrod, golden_min};

/// Means and covariance; `var_*` accessors report the physical `Γ = (ħ/2)G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTable {
    pub mean: Vector2<f64>,
    pub cov: CovarianceMatrix,
}

impl MomentTable {
    pub fn var_p(&self) -> f64 {
        self.cov.physical()[(0, 0)]
    }
    pub fn cov_pq(&self) -> f64 {
        self.cov.physical()[(0, 1)]
    }
    pub fn var_q(&self) -> f64 {
        self.cov.physical()[(1, 1)]
    }
}

// Sixth-order central stencils on offsets −k..=k.
const D1: [f64; 7] = [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const D2: [f64; 7] = [1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
const D3: [f64; 9] = [
    -7.0 / 240.0,
    3.0 / 10.0,
    -169.0 / 120.0,
    61.0 / 30.0,
    0.0,
    -61.0 / 30.0,
    169.0 / 120.0,
    -3.0 / 10.0,
    7.0 / 240.0,
];
const D4: [f64; 9] = [
    7.0 / 240.0,
    -2.0 / 5.0,
    169.0 / 60.0,
    -122.0 / 15.0,
    91.0 / 8.0,
    -122.0 / 15.0,
    169.0 / 60.0,
    -2.0 / 5.0,
    7.0 / 240.0,
];

fn stencil(order: usize) -> &'static [f64] {
    match order {
        0 => &[1.0],
        1 => &D1,
        2 => &D2,
        3 => &D3,
        _ => &D4,
    }
}

/// `⟨p̂ⁿq̂ᵐ⟩ = (−iħ)^{n+m} ∂ξⁿ∂ηᵐ χ(t, 0, 0)` by sixth-order finite differences.
pub fn moment_fd(spec: &ChannelSpec, term: &GaussianTerm, n: usize, m: usize, t: f64) -> Result<f64> {
    term.require_state()?;
    if n + m > 4 {
        return Err(BgcError::InvalidParameter { field: "n + m", requirement: "≤ 4", value: (n + m) as f64 });
    }
    let hbar = spec.hbar;
    let h = 1e-2 * hbar.sqrt();
    let (sx, sy) = (stencil(n), stencil(m));
    let (kx, ky) = ((sx.len() / 2) as i32, (sy.len() / 2) as i32);
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, cy) in sy.iter().enumerate() {
        if *cy == 0.0 {
            continue;
        }
        let eta = (j as i32 - ky) as f64 * h;
        for (i, cx) in sx.iter().enumerate() {
            if *cx == 0.0 {
                continue;
            }
            let xi = (i as i32 - kx) as f64 * h;
            acc += crate::exact_channel::char_evolved(spec, term, xi, eta, t)? * (cx * cy);
        }
    }
    let deriv = acc / h.powi((n + m) as i32);
    let factor = Complex64::new(0.0, -hbar).powu((n + m) as u32);
    Ok((factor * deriv).re / term.weight.re)
}

/// Closed-form first and second moments.
pub fn moments_closed(spec: &ChannelSpec, term: &GaussianTerm, t: f64) -> Result<MomentTable> {
    term.require_state()?;
    if t < 0.0 {
        return Err(BgcError::NegativeTime(t));
    }
    let (h, g, p0) = (spec.hbar, term.g, term.p0());
    let (s2, g2) = (spec.sigma * spec.sigma, spec.gamma * spec.gamma);
    let var_p = h * (0.5 * g + s2 * t);
    let cov = h * (0.5 * g * t + 0.5 * s2 * t * t);
    let var_q = h * (0.5 / g + g2 * p0 * p0 * t + 0.5 * g * t * t + s2 * t.powi(3) / 3.0) + h * h * 0.5 * g2 * (g * t + s2 * t * t);
    Ok(MomentTable {
        mean: Vector2::new(p0, term.q0() + t * p0),
        cov: CovarianceMatrix::from_physical(Matrix2::new(var_p, cov, cov, var_q), h)?,
    })
}

/// `tr[ρ̂†ρ̂]` at one `η`, with the `ξ` integral done in closed form.
///
/// For each pair of terms the product of characteristic functions is a
/// Gaussian in `ξ`; `∫exp(−αξ² + bξ + c)dξ = √(π/α)·exp(b²/4α + c)`.
fn purity_density(spec: &ChannelSpec, state: &StateSum, eta: f64, t: f64) -> Result<f64> {
    let hbar = state.hbar;
    struct Piece {
        amp: Complex64,
        alpha: f64,
        q: f64,
        p: f64,
    }
    let mut pieces = Vec::with_capacity(state.terms.len());
    for term in &state.terms {
        let ep = evolve_params(spec, term, eta, t)?;
        let u = aux_functions(spec, term.g, eta, t)?.u;
        let e = eta + term.dp();
        // χ = amp·exp(−α(ξ−Q)² + (i/ħ)Pξ)
        let log_amp = Complex64::new(
            -ep.d_damp / hbar - e * e / (4.0 * hbar * term.g),
            (ep.phi + term.q0() * e - ep.p_cap * ep.q_cap) / hbar,
        );
        pieces.push(Piece { amp: term.weight * log_amp.exp() / u.sqrt(), alpha: ep.a / (4.0 * hbar), q: ep.q_cap, p: ep.p_cap });
    }
    let mut total = Complex64::new(0.0, 0.0);
    for x in &pieces {
        for y in &pieces {
            let alpha = x.alpha + y.alpha;
            let b = Complex64::new(2.0 * (x.alpha * x.q + y.alpha * y.q), (x.p - y.p) / hbar);
            let c = -x.alpha * x.q * x.q - y.alpha * y.q * y.q;
            let val = (PI / alpha).sqrt() * (b * b / (4.0 * alpha) + c).exp();
            total += x.amp * y.amp.conj() * val;
        }
    }
    Ok(total.re / (2.0 * PI * hbar))
}

/// `tr[ρ̂†(t)ρ̂(t)]` by adaptive quadrature over `η`.
pub fn purity(spec: &ChannelSpec, state: &StateSum, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(BgcError::NegativeTime(t));
    }
    let spec = spec.with_hbar(state.hbar);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for term in &state.terms {
        let half = 12.0 * (state.hbar * term.g).sqrt();
        lo = lo.min(-term.dp() - half);
        hi = hi.max(-term.dp() + half);
    }
    // Hand the integrator the bulk first; GK estimates the error per panel.
    let f = |eta: f64| purity_density(&spec, state, eta, t).unwrap_or(f64::NAN);
    let r = gauss_kronrod(f, lo, hi, 1e-14, 1e-12)?;
    if !r.value.is_finite() {
        // Re-run pointwise to surface the underlying error.
        purity_density(&spec, state, 0.5 * (lo + hi), t)?;
    }
    Ok(r.value)
}

/// Purity relative to its initial value.
pub fn purity_ratio(spec: &ChannelSpec, state: &StateSum, t: f64) -> Result<f64> {
    Ok(purity(spec, state, t)? / purity(spec, state, 0.0)?)
}

/// The oscillatory term that carries the coherence of a cat-type state.
fn coherence_term(state: &StateSum) -> &GaussianTerm {
    state
        .terms
        .iter()
        .max_by(|a, b| a.dz.norm().total_cmp(&b.dz.norm()))
        .expect("state has at least one term")
}

/// Leading-order short-time purity decay.
///
/// Linear onset `e^{−t[σ²δq² + γ²p₀²δp²]/ħ}` when `(δq, p₀) ≠ 0`, otherwise
/// the delayed `e^{−t³σ²δp²/3ħ}`.
pub fn purity_short_time(spec: &ChannelSpec, state: &StateSum, t: f64) -> f64 {
    let term = coherence_term(state);
    let (s2, g2, h) = (spec.sigma * spec.sigma, spec.gamma * spec.gamma, state.hbar);
    let (p0, dp, dq) = (term.p0(), term.dp(), term.dq());
    if dq != 0.0 || p0 != 0.0 {
        (-t * (s2 * dq * dq + g2 * p0 * p0 * dp * dp) / h).exp()
    } else {
        (-t.powi(3) * s2 * dp * dp / (3.0 * h)).exp()
    }
}

/// Semiclassical decoherence exponent `lim_{ħ→0} −ħ ln(purity ratio)`.
///
/// By Laplace's method this is `min_η [2D(t,η) + (η+δp)²/2g]`, the exponent
/// without the `ħ`-independent prefactor.
pub fn decoherence_exponent(spec: &ChannelSpec, term: &GaussianTerm, t: f64) -> Result<f64> {
    let f = |eta: f64| -> f64 {
        match evolve_params(spec, term, eta, t) {
            Ok(ep) => 2.0 * ep.d_damp + (eta + term.dp()).powi(2) / (2.0 * term.g),
            Err(_) => f64::INFINITY,
        }
    };
    let c = -term.dp();
    let w = 6.0 * term.g.sqrt() + term.dp().abs();
    let (_, v) = golden_min(f, c - w, c + w, 1e-12);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coherent(p0: f64, q0: f64, g: f64) -> GaussianTerm {
        GaussianTerm::coherent(Vector2::new(p0, q0), g).unwrap()
    }

    #[test]
    fn trace_and_mean() {
        let spec = ChannelSpec::new(0.8, 0.6, 1.0).unwrap();
        let tm = coherent(0.7, -0.2, 1.3);
        assert!((moment_fd(&spec, &tm, 0, 0, 0.5).unwrap() - 1.0).abs() < 1e-14);
        assert!((moment_fd(&spec, &tm, 1, 0, 0.5).unwrap() - 0.7).abs() < 1e-8);
        assert!((moment_fd(&spec, &tm, 0, 1, 0.5).unwrap() - (-0.2 + 0.35)).abs() < 1e-8);
    }

    #[test]
    fn var_q_example() {
        let spec = ChannelSpec::new(1.0, 1.0, 1.0).unwrap();
        let tm = coherent(0.0, 0.0, 1.0);
        let m = moments_closed(&spec, &tm, 1.0).unwrap();
        assert!((m.var_q() - 7.0 / 3.0).abs() < 1e-14);
        let fd = moment_fd(&spec, &tm, 0, 2, 1.0).unwrap();
        assert!((fd - 7.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn initial_table() {
        let spec = ChannelSpec::new(1.0, 1.0, 0.5).unwrap();
        let tm = coherent(0.3, 0.4, 2.0);
        let m = moments_closed(&spec, &tm, 0.0).unwrap();
        assert!((m.var_p() - 0.5).abs() < 1e-15);
        assert!((m.var_q() - 0.125).abs() < 1e-15);
        assert_eq!(m.cov_pq(), 0.0);
    }

    #[test]
    fn oscillatory_terms_rejected() {
        let spec = ChannelSpec::new(1.0, 1.0, 1.0).unwrap();
        let tm = GaussianTerm::new(Vector2::zeros(), Vector2::new(1.0, 0.0), 1.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!(moment_fd(&spec, &tm, 1, 0, 0.1).is_err());
        assert!(moments_closed(&spec, &tm, 0.1).is_err());
    }

    #[test]
    fn short_time_examples() {
        let spec = ChannelSpec::new(1.0, 0.5, 1.0).unwrap();
        let fig4 = GaussianTerm::new(Vector2::zeros(), Vector2::new(2.0, 4.0), 1.0, Complex64::new(1.0, 0.0)).unwrap();
        let s = StateSum::single(fig4, 1.0).unwrap();
        assert!((purity_short_time(&spec, &s, 0.05) - (-0.8f64).exp()).abs() < 1e-15);
        assert_eq!(purity_short_time(&spec, &s, 0.0), 1.0);
        let delayed = GaussianTerm::new(Vector2::zeros(), Vector2::new(2.0, 0.0), 1.0, Complex64::new(1.0, 0.0)).unwrap();
        let s = StateSum::single(delayed, 1.0).unwrap();
        assert!((purity_short_time(&spec, &s, 0.1) - (-4.0e-3f64 / 3.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn pure_coherent_state_has_unit_purity() {
        let spec = ChannelSpec::new(1.0, 1.0, 1.0).unwrap();
        let s = StateSum::single(coherent(0.5, 0.0, 1.4), 1.0).unwrap();
        assert!((purity(&spec, &s, 0.0).unwrap() - 1.0).abs() < 1e-11);
        assert!((purity_ratio(&spec, &s, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(purity_ratio(&spec, &s, 0.5).unwrap() < 1.0);
    }

    #[test]
    fn gamma_zero_purity_matches_gaussian_formula() {
        // A Gaussian state with width matrix G has purity 1/√det G.
        let spec = ChannelSpec::new(0.9, 0.0, 1.0).unwrap();
        let tm = coherent(0.2, 0.1, 1.5);
        let s = StateSum::single(tm, 1.0).unwrap();
        let t = 0.8;
        let m = moments_closed(&spec, &tm, t).unwrap();
        assert!((purity(&spec, &s, t).unwrap() - 1.0 / m.cov.det().sqrt()).abs() < 1e-11);
    }
}
