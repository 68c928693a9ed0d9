//! Closed-form evolution of Gaussian terms under
//! `∂ₜρ = −p∂_qρ + (ħσ²/2)∂ₚ²ρ + (ħγ²/2)p²∂_q²ρ`,
//! i.e. `H = p²/2` with Lindblad operators `σq̂` and `γĤ`.
//!
//! After a Fourier transform in `q` (dual variable `η`) each `η` decouples and
//! a Gaussian in `p` stays Gaussian. Everything is expressed through
//! `ω = σγη`, `β = 2σ²/g` and the functions
//!
//! ```text
//! u = cosh ωt + (ω²/β)·sinh(ωt)/ω,   v = cosh ωt + β·sinh(ωt)/ω,
//! ch = (cosh ωt − 1)/ω²,             sh = sinh(ωt)/ω.
//! ```
//!
//! All of them are even in `ω`, so we work with `ω²` and switch to power
//! series for `|ωt| < 1`, summed until the terms drop below machine epsilon.

use nalgebra::Vector2;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{require, BgcError, Result};
use crate::phase_space::{GaussianTerm, StateSum};

/// Physical parameters `(σ, γ, ħ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub sigma: f64,
    pub gamma: f64,
    pub hbar: f64,
}

impl ChannelSpec {
    pub fn new(sigma: f64, gamma: f64, hbar: f64) -> Result<Self> {
        require(sigma >= 0.0 && sigma.is_finite(), "sigma", "≥ 0", sigma)?;
        require(gamma >= 0.0 && gamma.is_finite(), "gamma", "≥ 0", gamma)?;
        require(hbar > 0.0 && hbar.is_finite(), "hbar", "> 0", hbar)?;
        Ok(Self { sigma, gamma, hbar })
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..*self }
    }

    pub fn with_hbar(&self, hbar: f64) -> Self {
        Self { hbar, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxFunctions {
    pub u: f64,
    pub v: f64,
    pub ch: f64,
    pub sh: f64,
    pub omega: f64,
    pub beta: f64,
}

/// Hyperbolic building blocks as functions of `ω²` and `t`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Hyper {
    pub cosh: f64,
    pub sh: f64,
    pub ch: f64,
    /// `(sh − t)/ω²`
    pub sh_minus_t: f64,
    /// `(t·sh − 2ch)/ω²`
    pub t_sh_minus_2ch: f64,
}

const SERIES_LIMIT: f64 = 1.0;

pub(crate) fn hyper(w2: f64, t: f64) -> Result<Hyper> {
    let x2 = w2 * t * t;
    if x2.abs() < SERIES_LIMIT {
        // Term k of each series carries (ω²)^k t^(2k) / (2k)! style factors.
        let t2 = t * t;
        let mut cosh = 1.0;
        let mut sh = t;
        let mut ch = 0.5 * t2;
        let mut smt = t * t2 / 6.0;
        let mut tsc = t2 * t2 / 12.0;
        // running (ω²)^(k−1) t^(2k) / (2k)!
        let mut e = 0.5 * t2;
        let mut k = 1.0f64;
        loop {
            let n = 2.0 * k;
            let c_term = e * w2;
            cosh += c_term;
            let s_term = e * t * w2 / (n + 1.0);
            sh += s_term;
            let e_next = e * w2 * t2 / ((n + 1.0) * (n + 2.0));
            ch += e_next;
            let smt_term = e_next * t / (n + 3.0);
            smt += smt_term;
            let tsc_term = e_next * t2 * 2.0 * (k + 1.0) / ((n + 3.0) * (n + 4.0));
            tsc += tsc_term;
            e = e_next;
            k += 1.0;
            if e_next.abs() <= 1e-18 * ch.abs() && tsc_term.abs() <= 1e-18 * tsc.abs() || k > 60.0 {
                break;
            }
        }
        return Ok(Hyper { cosh, sh, ch, sh_minus_t: smt, t_sh_minus_2ch: tsc });
    }
    if w2 > 0.0 {
        let w = w2.sqrt();
        let x = w * t;
        if x > 700.0 {
            return Err(BgcError::Overflow(x));
        }
        let cosh = x.cosh();
        let sh = x.sinh() / w;
        let ch = (cosh - 1.0) / w2;
        Ok(Hyper { cosh, sh, ch, sh_minus_t: (sh - t) / w2, t_sh_minus_2ch: (t * sh - 2.0 * ch) / w2 })
    } else {
        // Imaginary ω (not produced by the model, kept for the lemma suite).
        let w = (-w2).sqrt();
        let x = w * t;
        let cosh = x.cos();
        let sh = x.sin() / w;
        let ch = (cosh - 1.0) / w2;
        Ok(Hyper { cosh, sh, ch, sh_minus_t: (sh - t) / w2, t_sh_minus_2ch: (t * sh - 2.0 * ch) / w2 })
    }
}

/// `u, v, ch, sh` for given `ω²` and `β`, plus the damping bracket
/// `Ψ = (t·v − sh − 2β·ch)/ω²`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct UvFunctions {
    pub u: f64,
    pub v: f64,
    pub ch: f64,
    pub sh: f64,
    pub psi: f64,
}

pub(crate) fn uv_functions(w2: f64, beta: f64, t: f64) -> Result<UvFunctions> {
    let h = hyper(w2, t)?;
    let kappa = if beta > 0.0 { w2 / beta } else { 0.0 };
    let u = h.cosh + kappa * h.sh;
    let v = h.cosh + beta * h.sh;
    let psi = t * h.ch - h.sh_minus_t + beta * h.t_sh_minus_2ch;
    Ok(UvFunctions { u, v, ch: h.ch, sh: h.sh, psi })
}

/// `u` written with `κ = ω²/β = γ²η²g/2`, which stays finite when `σ = 0`.
fn model_uv(spec: &ChannelSpec, g: f64, eta: f64, t: f64) -> Result<(UvFunctions, f64, f64)> {
    let omega = spec.sigma * spec.gamma * eta;
    let beta = 2.0 * spec.sigma * spec.sigma / g;
    let kappa = 0.5 * spec.gamma * spec.gamma * eta * eta * g;
    let h = hyper(omega * omega, t)?;
    let u = h.cosh + kappa * h.sh;
    let v = h.cosh + beta * h.sh;
    let psi = t * h.ch - h.sh_minus_t + beta * h.t_sh_minus_2ch;
    Ok((UvFunctions { u, v, ch: h.ch, sh: h.sh, psi }, omega, beta))
}

pub fn aux_functions(spec: &ChannelSpec, g: f64, eta: f64, t: f64) -> Result<AuxFunctions> {
    require(g > 0.0, "g", "> 0", g)?;
    if t < 0.0 {
        return Err(BgcError::NegativeTime(t));
    }
    let (f, omega, beta) = model_uv(spec, g, eta, t)?;
    Ok(AuxFunctions { u: f.u, v: f.v, ch: f.ch, sh: f.sh, omega, beta })
}

/// The six parameters of the evolving Gaussian in `p` at fixed `η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionParameters {
    pub a: f64,
    pub c: f64,
    pub p_cap: f64,
    pub q_cap: f64,
    pub d_damp: f64,
    pub phi: f64,
}

impl EvolutionParameters {
    pub fn initial(term: &GaussianTerm) -> Self {
        Self { a: term.g, c: 1.0, p_cap: term.p0(), q_cap: term.dq(), d_damp: 0.0, phi: 0.0 }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.a, self.c, self.p_cap, self.q_cap, self.d_damp, self.phi]
    }
}

pub fn evolve_params(spec: &ChannelSpec, term: &GaussianTerm, eta: f64, t: f64) -> Result<EvolutionParameters> {
    if t < 0.0 {
        return Err(BgcError::NegativeTime(t));
    }
    let g = term.g;
    require(g > 0.0, "g", "> 0", g)?;
    let (f, _, beta) = model_uv(spec, g, eta, t)?;
    let (s2, g2) = (spec.sigma * spec.sigma, spec.gamma * spec.gamma);
    let (p0, dq) = (term.p0(), term.dq());
    let a = g * f.v / f.u;
    let c = 1.0 / f.v.sqrt();
    let p_cap = p0 / f.u;
    let q_cap = (dq - eta * (beta * f.ch + f.sh)) / f.v;
    let phi = beta * p0 * (eta * f.ch - dq * f.sh) / f.v;
    let d_damp = 0.5 * s2 * eta * eta * f.psi / f.v - s2 * eta * dq * f.ch / f.v
        + 0.5 * s2 * dq * dq * f.sh / f.v
        + 0.5 * g2 * eta * eta * p0 * p0 * f.sh / f.u;
    Ok(EvolutionParameters { a, c, p_cap, q_cap, d_damp, phi })
}

/// The γ → 0 limit of the damping exponent.
pub fn d_gamma_zero(spec: &ChannelSpec, term: &GaussianTerm, eta: f64, t: f64) -> f64 {
    let s2 = spec.sigma * spec.sigma;
    let g = term.g;
    let q0 = term.dq();
    let den = 1.0 + 2.0 * s2 * t / g;
    s2 / den * (t.powi(3) / 6.0 + s2 * t.powi(4) / (12.0 * g)) * eta * eta - 0.5 * q0 * s2 * t * t / den * eta
        + 0.5 * q0 * q0 * s2 * t / den
}

/// `χ(t, ξ, η)` of one term (weight included).
pub fn char_evolved(spec: &ChannelSpec, term: &GaussianTerm, xi: f64, eta: f64, t: f64) -> Result<Complex64> {
    let ep = evolve_params(spec, term, eta, t)?;
    let u = aux_functions(spec, term.g, eta, t)?.u;
    Ok(term.weight * chi_from_params(spec.hbar, term, &ep, u, xi, eta))
}

pub(crate) fn chi_from_params(hbar: f64, term: &GaussianTerm, ep: &EvolutionParameters, u: f64, xi: f64, eta: f64) -> Complex64 {
    let e = eta + term.dp();
    let x = xi - ep.q_cap;
    let re = -ep.d_damp / hbar - e * e / (4.0 * hbar * term.g) - ep.a * x * x / (4.0 * hbar);
    let im = (ep.phi + term.q0() * e + ep.p_cap * x) / hbar;
    Complex64::new(re, im).exp() / u.sqrt()
}

/// `χ(t, ξ, η)` of a whole state.
pub fn char_evolved_state(spec: &ChannelSpec, state: &StateSum, xi: f64, eta: f64, t: f64) -> Result<Complex64> {
    let s = spec.with_hbar(state.hbar);
    state.terms.iter().map(|term| char_evolved(&s, term, xi, eta, t)).sum()
}

/// Prefactor of the first form of the evolved characteristic function,
/// `c·√(a/g)`; equals `1/√u`.
pub fn prefactor_first_form(spec: &ChannelSpec, term: &GaussianTerm, eta: f64, t: f64) -> Result<f64> {
    let ep = evolve_params(spec, term, eta, t)?;
    Ok(ep.c * (ep.a / term.g).sqrt())
}

/// Partial transform `w(t, p, η) = ∫ e^{(i/ħ)ηq} W(t, p, q) dq` of one term.
pub fn partial_transform(spec: &ChannelSpec, term: &GaussianTerm, p: f64, eta: f64, t: f64) -> Result<Complex64> {
    let ep = evolve_params(spec, term, eta, t)?;
    Ok(term.weight * partial_from_params(spec.hbar, term, &ep, p, eta))
}

pub(crate) fn partial_from_params(hbar: f64, term: &GaussianTerm, ep: &EvolutionParameters, p: f64, eta: f64) -> Complex64 {
    let e = eta + term.dp();
    let re = -ep.d_damp / hbar - e * e / (4.0 * hbar * term.g) - (p - ep.p_cap).powi(2) / (hbar * ep.a);
    let im = (ep.phi + term.q0() * e - p * ep.q_cap) / hbar;
    Complex64::new(re, im).exp() * (ep.c / (term.g * PI * hbar).sqrt())
}

/// Uniform `η` quadrature used to invert the partial transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaQuadrature {
    pub center: f64,
    pub half_width: f64,
    pub n: usize,
}

impl EtaQuadrature {
    /// A rule for evaluating the evolved Wigner function at positions within
    /// `max_dist` of the drifted centre `q₀ + tp₀`.
    ///
    /// The node spacing keeps the aliased copies (period `2πħ/Δη`) beyond the
    /// support of the state; the `η` window truncates tails below `e^{−36}`.
    pub fn for_window(spec: &ChannelSpec, term: &GaussianTerm, t: f64, max_dist: f64) -> Self {
        let hbar = spec.hbar;
        let half_width = 12.0 * (hbar * term.g).sqrt();
        let period = max_dist + support_radius(spec, term, t);
        let d_eta = 2.0 * std::f64::consts::PI * hbar / period;
        let n = (2.0 * half_width / d_eta).ceil() as usize + 1;
        Self { center: -term.dp(), half_width, n: n.max(3) }
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 2.0 * self.half_width / (self.n - 1) as f64;
        (0..self.n).map(move |k| {
            let w = if k == 0 || k == self.n - 1 { 0.5 * h } else { h };
            (self.center - self.half_width + h * k as f64, w)
        })
    }
}

/// Generous radius in `q` outside of which the evolved term is negligible.
///
/// Dephasing gives the conditional `q` spread a `γ²p²t` contribution, so the
/// bound folds in momenta up to three standard deviations.
pub fn support_radius(spec: &ChannelSpec, term: &GaussianTerm, t: f64) -> f64 {
    let (hbar, g) = (spec.hbar, term.g);
    let (s2, g2) = (spec.sigma * spec.sigma, spec.gamma * spec.gamma);
    let p_spread = term.p0().powi(2) + 9.0 * hbar * (g + s2 * t);
    let var = hbar * (0.5 / g + g * t * t + s2 * t.powi(3) + g2 * t * p_spread) + hbar * hbar * g2 * (g * t + s2 * t * t);
    14.0 * var.sqrt() + term.dq().abs()
}

/// Wigner function of an evolved state on a tensor grid.
///
/// Returns values in row-major order over q then p (`index = iq·n_p + ip`).
pub fn wigner_evolved_grid(spec: &ChannelSpec, state: &StateSum, ps: &[f64], qs: &[f64], t: f64) -> Result<Vec<Complex64>> {
    let hbar = state.hbar;
    let s = spec.with_hbar(hbar);
    if ps.is_empty() || qs.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = vec![Complex64::new(0.0, 0.0); ps.len() * qs.len()];
    for term in &state.terms {
        let qc = term.q0() + t * term.p0();
        let max_dist = qs.iter().map(|q| (q - qc).abs()).fold(0.0, f64::max);
        let rule = EtaQuadrature::for_window(&s, term, t, max_dist);
        let nodes: Vec<(f64, f64)> = rule.nodes().collect();
        // w[k][ip] for each η node
        let mut w = vec![Complex64::new(0.0, 0.0); nodes.len() * ps.len()];
        for (k, &(eta, wt)) in nodes.iter().enumerate() {
            let ep = evolve_params(&s, term, eta, t)?;
            for (ip, &p) in ps.iter().enumerate() {
                w[k * ps.len() + ip] = term.weight * partial_from_params(hbar, term, &ep, p, eta) * wt;
            }
        }
        let scale = 1.0 / (2.0 * PI * hbar);
        for (iq, &q) in qs.iter().enumerate() {
            let row = &mut out[iq * ps.len()..(iq + 1) * ps.len()];
            for (k, &(eta, _)) in nodes.iter().enumerate() {
                let e = Complex64::from_polar(scale, -eta * q / hbar);
                let wk = &w[k * ps.len()..(k + 1) * ps.len()];
                for (o, x) in row.iter_mut().zip(wk) {
                    *o += e * x;
                }
            }
        }
    }
    Ok(out)
}

/// Pointwise Wigner value of an evolved state (slow; for spot checks).
pub fn wigner_evolved(spec: &ChannelSpec, state: &StateSum, x: &Vector2<f64>, t: f64) -> Result<Complex64> {
    Ok(wigner_evolved_grid(spec, state, &[x[0]], &[x[1]], t)?[0])
}
