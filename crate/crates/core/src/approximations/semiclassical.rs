//! Gaussian wave packets under the non-Hermitian symbol of the generator.
//!
//! Writing the Wigner equation as `iħ∂ₜρ = K(x, −iħ∇)ρ` gives, in `(p, q)`
//! ordering with dual variable `y = (y_p, y_q)`,
//!
//! ```text
//! K(x, y) = p·y_q − (i/2)[σ²y_p² + γ²p²y_q²].
//! ```
//!
//! The ansatz `ρ = c·e^{(i/ħ)d}/(πħ√det G) · exp(−(1/ħ)(x−X)·G⁻¹(x−X) + (i/ħ)x·Y)`
//! with `K` expanded to second order about `(X, Y)` closes on
//!
//! ```text
//! Ġ   = 2iK_yy + K_yx G + G K_xy − (i/2) G K_xx G
//! ḋ   = −K − Ẏ·X
//! ċ/c = tr K_xy − (i/4) tr(K_xx G)
//! ```
//!
//! and a centre equation mixing `∇Re K` and `∇Im K` through `B = 2iG⁻¹`
//! (see [`centre_velocity`]). `Im K ≤ 0` here, so `Im d` is nondecreasing.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{BgcError, Result};
use crate::exact_channel::ChannelSpec;
use crate::phase_space::GaussianTerm;

pub const DEFAULT_DT: f64 = 1e-3;

type C = Complex64;
type CMat = Matrix2<Complex64>;
type CVec = Vector2<Complex64>;

const I: C = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalState {
    pub x_cap: Vector2<f64>,
    pub y_cap: Vector2<f64>,
    pub g_mat: CMat,
    pub c_amp: C,
    pub d_phase: C,
}

impl SemiclassicalState {
    /// A term `e^{(i/ħ)(qδp − pδq)}·(...)` has `Y = (−δq, δp)`.
    pub fn from_term(term: &GaussianTerm) -> Self {
        Self {
            x_cap: term.z0,
            y_cap: Vector2::new(-term.dq(), term.dp()),
            g_mat: term.g_matrix().map(|v| C::new(v, 0.0)),
            c_amp: term.weight,
            d_phase: C::new(0.0, 0.0),
        }
    }

    pub fn wigner(&self, x: &Vector2<f64>, hbar: f64) -> C {
        let gi = self.g_mat.try_inverse().unwrap_or_else(CMat::zeros);
        let w = (x - self.x_cap).map(|v| C::new(v, 0.0));
        let quad = (w.transpose() * gi * w)[(0, 0)];
        let phase = I * (self.d_phase + x.dot(&self.y_cap)) / hbar;
        self.c_amp / (PI * hbar * self.g_mat.determinant().sqrt()) * (phase - quad / hbar).exp()
    }

    /// `tr ρ̂†ρ̂ = |c|²·e^{−2 Im d/ħ} / (|det G|·√det Re G⁻¹)`.
    pub fn purity(&self, hbar: f64) -> f64 {
        let gi = self.g_mat.try_inverse().unwrap_or_else(CMat::zeros).map(|z| z.re);
        self.c_amp.norm_sqr() * (-2.0 * self.d_phase.im / hbar).exp() / (self.g_mat.determinant().norm() * gi.determinant().sqrt())
    }

    fn re_g_positive(&self) -> bool {
        let r = self.g_mat.map(|z| z.re);
        r[(0, 0)] > 0.0 && r.determinant() > 0.0
    }

    fn pack(&self) -> [C; 9] {
        let g = &self.g_mat;
        [
            C::new(self.x_cap[0], 0.0),
            C::new(self.x_cap[1], 0.0),
            C::new(self.y_cap[0], 0.0),
            C::new(self.y_cap[1], 0.0),
            g[(0, 0)],
            g[(0, 1)],
            g[(1, 1)],
            self.c_amp,
            self.d_phase,
        ]
    }

    fn unpack(s: &[C; 9]) -> Self {
        Self {
            x_cap: Vector2::new(s[0].re, s[1].re),
            y_cap: Vector2::new(s[2].re, s[3].re),
            g_mat: CMat::new(s[4], s[5], s[5], s[6]),
            c_amp: s[7],
            d_phase: s[8],
        }
    }
}

/// `K` together with its first and second derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub struct SymbolJet {
    pub k: C,
    pub kx: CVec,
    pub ky: CVec,
    pub kxx: CMat,
    /// `∂x_i ∂y_j K`.
    pub kxy: CMat,
    pub kyy: CMat,
}

pub fn generator_symbol(spec: &ChannelSpec, x: &Vector2<f64>, y: &Vector2<f64>) -> SymbolJet {
    let (s2, g2) = (spec.sigma * spec.sigma, spec.gamma * spec.gamma);
    let (p, yp, yq) = (x[0], y[0], y[1]);
    let zero = C::new(0.0, 0.0);
    SymbolJet {
        k: C::new(p * yq, -0.5 * (s2 * yp * yp + g2 * p * p * yq * yq)),
        kx: CVec::new(C::new(yq, -g2 * p * yq * yq), zero),
        ky: CVec::new(C::new(0.0, -s2 * yp), C::new(p, -g2 * p * p * yq)),
        kxx: CMat::new(C::new(0.0, -g2 * yq * yq), zero, zero, zero),
        kxy: CMat::new(zero, C::new(1.0, -2.0 * g2 * p * yq), zero, zero),
        kyy: CMat::new(C::new(0.0, -s2), zero, zero, C::new(0.0, -g2 * p * p)),
    }
}

/// `(Ẋ, Ẏ)` from `BẊ − Ẏ = ∇ₓK + B∇_yK` with `X`, `Y` real.
fn centre_velocity(jet: &SymbolJet, g: &CMat) -> Result<(Vector2<f64>, Vector2<f64>)> {
    let b = g.try_inverse().ok_or(BgcError::NotPositiveDefinite)? * (2.0 * I);
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let bi_inv = bi.try_inverse().ok_or(BgcError::NotPositiveDefinite)?;
    let re = |v: &CVec| v.map(|z| z.re);
    let im = |v: &CVec| v.map(|z| z.im);
    let xdot = re(&jet.ky) + bi_inv * (im(&jet.kx) + br * im(&jet.ky));
    let ydot = br * xdot - re(&jet.kx) - br * re(&jet.ky) + bi * im(&jet.ky);
    Ok((xdot, ydot))
}

fn rhs(spec: &ChannelSpec, s: &[C; 9]) -> Result<[C; 9]> {
    let st = SemiclassicalState::unpack(s);
    let jet = generator_symbol(spec, &st.x_cap, &st.y_cap);
    let g = st.g_mat;
    let (xdot, ydot) = centre_velocity(&jet, &g)?;
    let gdot = jet.kyy * (2.0 * I) + jet.kxy.transpose() * g + g * jet.kxy - g * jet.kxx * g * (0.5 * I);
    let cdot = st.c_amp * (jet.kxy.trace() - (jet.kxx * g).trace() * (0.25 * I));
    let ddot = -jet.k - C::new(ydot.dot(&st.x_cap), 0.0);
    Ok([
        C::new(xdot[0], 0.0),
        C::new(xdot[1], 0.0),
        C::new(ydot[0], 0.0),
        C::new(ydot[1], 0.0),
        gdot[(0, 0)],
        0.5 * (gdot[(0, 1)] + gdot[(1, 0)]),
        gdot[(1, 1)],
        cdot,
        ddot,
    ])
}

fn axpy(a: &[C; 9], h: f64, k: &[C; 9]) -> [C; 9] {
    std::array::from_fn(|i| a[i] + k[i] * h)
}

fn integrate(spec: &ChannelSpec, s0: &SemiclassicalState, t: f64, n: usize) -> Result<SemiclassicalState> {
    let h = t / n as f64;
    let mut y = s0.pack();
    for step in 0..n {
        let k1 = rhs(spec, &y)?;
        let k2 = rhs(spec, &axpy(&y, 0.5 * h, &k1))?;
        let k3 = rhs(spec, &axpy(&y, 0.5 * h, &k2))?;
        let k4 = rhs(spec, &axpy(&y, h, &k3))?;
        y = std::array::from_fn(|i| y[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0));
        let st = SemiclassicalState::unpack(&y);
        if !st.re_g_positive() {
            let at = h * (step + 1) as f64;
            log::error!("Re G lost positive definiteness at t = {at}: {:?}", st.g_mat);
            return Err(BgcError::WidthDegenerate { t: at });
        }
    }
    Ok(SemiclassicalState::unpack(&y))
}

fn distance(a: &SemiclassicalState, b: &SemiclassicalState) -> f64 {
    let (pa, pb) = (a.pack(), b.pack());
    pa.iter().zip(pb.iter()).map(|(x, y)| (x - y).norm() / (1.0 + x.norm())).fold(0.0, f64::max)
}

const HALVING_TOL: f64 = 1e-10;
const MAX_HALVINGS: u32 = 10;

/// RK4 from `0` to `t`, accepted once halving the step changes no component
/// by more than `1e−10` relative.
pub fn sc_nonhermitian_evolve(spec: &ChannelSpec, s0: &SemiclassicalState, t: f64, dt: f64) -> Result<SemiclassicalState> {
    if t < 0.0 {
        return Err(BgcError::NegativeTime(t));
    }
    crate::error::require(dt > 0.0, "dt", "> 0", dt)?;
    if !s0.re_g_positive() {
        return Err(BgcError::WidthDegenerate { t: 0.0 });
    }
    if t == 0.0 {
        return Ok(*s0);
    }
    let mut n = ((t / dt).ceil() as usize).max(1);
    let mut coarse = integrate(spec, s0, t, n)?;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        n *= 2;
        let fine = integrate(spec, s0, t, n)?;
        change = distance(&coarse, &fine);
        if change < HALVING_TOL {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(BgcError::StepHalvingFailed { halvings: MAX_HALVINGS, change })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximations::{decay_rate, decoherence_onset, sc_gaussian_covariance};

    fn coherent(p0: f64, q0: f64, g: f64) -> GaussianTerm {
        GaussianTerm::coherent(Vector2::new(p0, q0), g).unwrap()
    }

    #[test]
    fn y_zero_reproduces_leading_width() {
        for &(gamma, p0, g) in &[(0.0, 0.0, 1.0), (0.5, 0.7, 1.0), (1.3, -0.4, 2.2)] {
            let spec = ChannelSpec::new(0.9, gamma, 1.0).unwrap();
            let term = coherent(p0, 0.2, g);
            let out = sc_nonhermitian_evolve(&spec, &SemiclassicalState::from_term(&term), 1.0, DEFAULT_DT).unwrap();
            let expect = sc_gaussian_covariance(&spec, &term, 1.0).unwrap().g;
            assert!((out.g_mat.map(|z| z.re) - expect).abs().max() < 1e-8);
            assert!(out.g_mat.map(|z| z.im).abs().max() < 1e-12);
            assert!((out.x_cap - Vector2::new(p0, 0.2 + p0)).norm() < 1e-12);
            assert!(out.d_phase.norm() < 1e-12);
            assert!((out.c_amp - C::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn gaussian_limit_matches_channel_formula() {
        use crate::gaussian_channel::{semigroup_matrices, LindbladLinearSpec};
        let spec = ChannelSpec::new(0.6, 0.0, 1.0).unwrap();
        let term = coherent(0.4, -0.3, 1.7);
        let out = sc_nonhermitian_evolve(&spec, &SemiclassicalState::from_term(&term), 0.8, DEFAULT_DT).unwrap();
        let m = semigroup_matrices(&LindbladLinearSpec::free_particle(0.6), 0.8).unwrap();
        let expect = m.transform_width(&term.g_matrix());
        assert!((out.g_mat.map(|z| z.re) - expect).abs().max() < 1e-8);
    }

    #[test]
    fn imaginary_phase_grows_at_predicted_rate() {
        let spec = ChannelSpec::new(1.0, 0.5, 1.0).unwrap();
        let term = GaussianTerm::new(Vector2::new(0.8, 0.0), Vector2::new(2.0, 4.0), 1.0, C::new(1.0, 0.0)).unwrap();
        let s0 = SemiclassicalState::from_term(&term);
        let rate = decay_rate(&spec, &s0.x_cap, &s0.y_cap);
        let mut prev = 0.0;
        for &t in &[0.002, 0.004, 0.006, 0.008] {
            let s = sc_nonhermitian_evolve(&spec, &s0, t, DEFAULT_DT).unwrap();
            assert!(s.d_phase.im >= prev);
            prev = s.d_phase.im;
        }
        let s = sc_nonhermitian_evolve(&spec, &s0, 0.004, DEFAULT_DT).unwrap();
        let slope = s.d_phase.im / 0.004;
        assert!((slope / rate - 1.0).abs() < 0.02, "slope {slope} vs rate {rate}");
        let onset = decoherence_onset(&spec, &s0.x_cap, &s0.y_cap, 0.004);
        assert!((s.d_phase.im / onset - 1.0).abs() < 0.02);
    }

    #[test]
    fn cubic_onset_when_rate_vanishes() {
        let spec = ChannelSpec::new(1.0, 0.7, 1.0).unwrap();
        let term = GaussianTerm::new(Vector2::new(0.0, 0.0), Vector2::new(2.0, 0.0), 1.0, C::new(1.0, 0.0)).unwrap();
        let s0 = SemiclassicalState::from_term(&term);
        assert_eq!(decay_rate(&spec, &s0.x_cap, &s0.y_cap), 0.0);
        let im = |t: f64| sc_nonhermitian_evolve(&spec, &s0, t, DEFAULT_DT).unwrap().d_phase.im;
        let (t1, t2) = (0.02, 0.04);
        let exponent = (im(t2) / im(t1)).ln() / (t2 / t1).ln();
        assert!((exponent - 3.0).abs() < 0.06, "exponent {exponent}");
        // The leading term is exact as t → 0; the deficit shrinks linearly.
        let gap = |t: f64| 1.0 - im(t) / decoherence_onset(&spec, &s0.x_cap, &s0.y_cap, t);
        assert!(gap(0.005).abs() < 0.01);
        assert!((gap(0.01) / gap(0.005) - 2.0).abs() < 0.05);
    }

    #[test]
    fn purity_of_initial_state() {
        let term = coherent(0.3, 0.1, 2.0);
        assert!((SemiclassicalState::from_term(&term).purity(1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn wigner_of_initial_state_matches_term() {
        let term = GaussianTerm::new(Vector2::new(0.5, -0.2), Vector2::new(1.0, -0.6), 1.4, C::new(0.3, 0.2)).unwrap();
        let s = SemiclassicalState::from_term(&term);
        for &x in &[Vector2::new(0.1, 0.2), Vector2::new(-0.7, 0.9)] {
            assert!((s.wigner(&x, 0.8) - term.wigner(&x, 0.8)).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = ChannelSpec::new(1.0, 1.0, 1.0).unwrap();
        let s0 = SemiclassicalState::from_term(&coherent(0.0, 0.0, 1.0));
        assert!(sc_nonhermitian_evolve(&spec, &s0, -1.0, 1e-3).is_err());
        assert!(sc_nonhermitian_evolve(&spec, &s0, 1.0, 0.0).is_err());
        let mut bad = s0;
        bad.g_mat[(0, 0)] = C::new(-1.0, 0.0);
        assert!(matches!(sc_nonhermitian_evolve(&spec, &bad, 1.0, 1e-3), Err(BgcError::WidthDegenerate { .. })));
    }
}
