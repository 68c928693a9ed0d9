//! Weyl-symbol propagator of the partially transformed equation
//! `∂ₜw = (i/ħ)ηp·w + (ħσ²/2)∂ₚ²w − (γ²η²/2ħ)p²w`.
//!
//! In operator form this is `∂ₜw = −(i/ħ)Ĥw` with the complex Hamiltonian
//! `H(ξ, p) = −(i/2)(σ²ξ² + γ²η²p²) − ηp`. Completing the square turns it
//! into a complex harmonic oscillator of frequency `ω = σγη`, whose
//! propagator symbol is
//!
//! ```text
//! A = sech(ωt/2) · e^{−(t − τ)/(2γ²ħ)} · e^{−(i/ħ)τ H(ξ, p)},   τ = 2 tanh(ωt/2)/ω.
//! ```
//!
//! `(t − τ)/γ² = σ²η²(t − τ)/ω²` is evaluated by series near `ω = 0`, which
//! keeps the symbol finite at `γ = 0` and `η = 0`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{BgcError, Result};
use crate::exact_channel::ChannelSpec;

/// Taylor coefficients of `tanh(x)/x` in powers of `x²`.
const TANH_OVER_X: [f64; 9] = [
    1.0,
    -1.0 / 3.0,
    2.0 / 15.0,
    -17.0 / 315.0,
    62.0 / 2835.0,
    -1382.0 / 155_925.0,
    21_844.0 / 6_081_075.0,
    -929_569.0 / 638_512_875.0,
    6_404_582.0 / 10_854_718_875.0,
];

/// `(τ, (t − τ)/ω², sech(ωt/2))` as functions of `ω²`.
fn tau_parts(w2: f64, t: f64) -> (f64, f64, f64) {
    let x2 = 0.25 * w2 * t * t;
    if x2 < 0.01 {
        // τ = t·Σ cₖ x^{2k}, so (t − τ)/ω² = −(t³/4)·Σ_{k≥1} cₖ x^{2k−2}.
        let mut rem = 0.0;
        let mut pow = 1.0;
        for c in TANH_OVER_X.iter().skip(1) {
            rem += c * pow;
            pow *= x2;
        }
        let tau = t * (1.0 + x2 * rem);
        let sech = 1.0 / (0.5 * w2.sqrt() * t).cosh();
        (tau, -0.25 * t.powi(3) * rem, sech)
    } else {
        let w = w2.sqrt();
        let x = 0.5 * w * t;
        let tau = 2.0 * x.tanh() / w;
        (tau, (t - tau) / w2, 1.0 / x.cosh())
    }
}

/// Lazily evaluated symbol `A(t, ξ, p)` at fixed `η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorSymbol {
    pub t: f64,
    pub eta: f64,
    pub spec: ChannelSpec,
}

impl PropagatorSymbol {
    pub fn new(spec: ChannelSpec, t: f64, eta: f64) -> Result<Self> {
        if t < 0.0 {
            return Err(BgcError::NegativeTime(t));
        }
        Ok(Self { t, eta, spec })
    }

    fn parts(&self) -> SymbolParts {
        let s = &self.spec;
        let w2 = (s.sigma * s.gamma * self.eta).powi(2);
        let (tau, rem, sech) = tau_parts(w2, self.t);
        // (t − τ)/(2γ²ħ) with ω² = σ²γ²η² cancelled against γ².
        let damp = 0.5 * s.sigma * s.sigma * self.eta * self.eta * rem / s.hbar;
        SymbolParts { tau, prefactor: sech * (-damp).exp() }
    }

    pub fn eval(&self, xi: f64, p: f64) -> Complex64 {
        let SymbolParts { tau, prefactor } = self.parts();
        let s = &self.spec;
        let h = Complex64::new(-self.eta * p, -0.5 * (s.sigma * s.sigma * xi * xi + (s.gamma * self.eta * p).powi(2)));
        prefactor * (Complex64::new(0.0, -tau / s.hbar) * h).exp()
    }
}

struct SymbolParts {
    tau: f64,
    prefactor: f64,
}

pub fn weyl_symbol(spec: &ChannelSpec, t: f64, eta: f64, xi: f64, p: f64) -> Result<Complex64> {
    Ok(PropagatorSymbol::new(*spec, t, eta)?.eval(xi, p))
}

/// Integral kernel `K(t, p, p')` with the `ξ` transform done analytically.
pub fn kernel(spec: &ChannelSpec, t: f64, eta: f64, p: f64, p_prime: f64) -> Result<Complex64> {
    KernelFactors::new(spec, t, eta)?.eval(p, p_prime)
}

/// Precomputed `η`-dependent pieces of the kernel.
#[derive(Debug, Clone, Copy)]
struct KernelFactors {
    hbar: f64,
    eta: f64,
    g2: f64,
    tau: f64,
    width: f64,
    prefactor: f64,
}

impl KernelFactors {
    fn new(spec: &ChannelSpec, t: f64, eta: f64) -> Result<Self> {
        let sym = PropagatorSymbol::new(*spec, t, eta)?;
        let SymbolParts { tau, prefactor } = sym.parts();
        let width = spec.hbar * tau * spec.sigma * spec.sigma;
        if !(width > 0.0) {
            return Err(BgcError::DistributionalKernel { width });
        }
        Ok(Self { hbar: spec.hbar, eta, g2: spec.gamma * spec.gamma, tau, width, prefactor })
    }

    fn eval(&self, p: f64, p_prime: f64) -> Result<Complex64> {
        let m = 0.5 * (p + p_prime);
        let d = p - p_prime;
        let re = -self.tau * self.g2 * self.eta * self.eta * m * m / (2.0 * self.hbar) - d * d / (2.0 * self.width);
        let im = self.tau * self.eta * m / self.hbar;
        Ok(Complex64::new(re, im).exp() * (self.prefactor / (2.0 * PI * self.width).sqrt()))
    }
}

/// Samples of a function of `p` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub p_min: f64,
    pub dp: f64,
    pub values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn from_fn<F: Fn(f64) -> Complex64>(p_min: f64, dp: f64, n: usize, f: F) -> Self {
        Self { p_min, dp, values: (0..n).map(|i| f(p_min + dp * i as f64)).collect() }
    }

    pub fn p(&self, i: usize) -> f64 {
        self.p_min + self.dp * i as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Default grid: 1024 points over `|p − center| ≤ 10√(ħ·max(g, 1/g))`.
    pub fn default_grid(center: f64, g: f64, hbar: f64) -> (f64, f64, usize) {
        let half = 10.0 * (hbar * g.max(1.0 / g)).sqrt();
        let n = 1024;
        (center - half, 2.0 * half / (n - 1) as f64, n)
    }
}

/// `w(t, p) = ∫K(t, p, p')w₀(p')dp'` by the trapezoidal rule on the input grid.
pub fn apply_kernel(spec: &ChannelSpec, t: f64, eta: f64, w0: &SampledFunction) -> Result<SampledFunction> {
    let n = w0.len();
    if n < 2 {
        return Err(BgcError::Grid("need at least two samples".into()));
    }
    let peak = w0.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tail = w0.values[0].norm().max(w0.values[n - 1].norm());
    if tail > 1e-10 * peak {
        log::warn!("input tails at {:.3e} of peak; domain truncation error likely", tail / peak.max(f64::MIN_POSITIVE));
    }
    let k = KernelFactors::new(spec, t, eta)?;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, o) in out.iter_mut().enumerate() {
        let p = w0.p(i);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in w0.values.iter().enumerate() {
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            acc += k.eval(p, w0.p(j))? * v * w;
        }
        *o = acc * w0.dp;
    }
    Ok(SampledFunction { p_min: w0.p_min, dp: w0.dp, values: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_is_one_at_time_zero() {
        let spec = ChannelSpec::new(1.2, 0.7, 0.9).unwrap();
        for &(eta, xi, p) in &[(0.0, 0.0, 0.0), (1.0, 2.0, -1.0), (-3.0, 0.5, 4.0)] {
            let a = weyl_symbol(&spec, 0.0, eta, xi, p).unwrap();
            assert!((a - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn reference_value() {
        let spec = ChannelSpec::new(1.0, 1.0, 1.0).unwrap();
        let a = weyl_symbol(&spec, 1.0, 1.0, 0.0, 0.0).unwrap();
        let expect = (1.0 / 0.5f64.cosh()) * (-0.5 * (1.0 - 2.0 * 0.5f64.tanh())).exp();
        assert!((a.re - expect).abs() < 1e-14 && a.im.abs() < 1e-15);
        assert!((a.re - 0.8538).abs() < 1e-4);
    }

    #[test]
    fn series_and_closed_forms_meet() {
        let t = 1.0;
        let x2 = 0.01;
        let w2 = 4.0 * x2 / (t * t);
        let (ta, ra, sa) = tau_parts(w2 * (1.0 - 1e-12), t);
        let (tb, rb, sb) = tau_parts(w2 * (1.0 + 1e-12), t);
        assert!((ta - tb).abs() < 1e-14);
        assert!((ra - rb).abs() < 1e-12);
        assert!((sa - sb).abs() < 1e-14);
        let (_, r0, _) = tau_parts(0.0, 2.0);
        assert!((r0 - 8.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn continuity_in_eta() {
        let spec = ChannelSpec::new(1.0, 1.0, 1.0).unwrap();
        let l = weyl_symbol(&spec, 0.7, -1e-8, 0.4, 0.3).unwrap();
        let r = weyl_symbol(&spec, 0.7, 1e-8, 0.4, 0.3).unwrap();
        let slope = (weyl_symbol(&spec, 0.7, 1e-4, 0.4, 0.3).unwrap() - weyl_symbol(&spec, 0.7, -1e-4, 0.4, 0.3).unwrap()) / 2e-4;
        assert!((r - l - slope * 2e-8).norm() < 1e-10);
    }

    #[test]
    fn heat_kernel_limit() {
        let spec = ChannelSpec::new(0.8, 0.0, 1.0).unwrap();
        let t = 0.6;
        let n = 4001;
        let dp = 20.0 / (n - 1) as f64;
        let mut sum = 0.0;
        for j in 0..n {
            let pp = -10.0 + dp * j as f64;
            let k = kernel(&spec, t, 0.0, 0.3, pp).unwrap();
            assert!(k.im.abs() < 1e-15 && k.re >= 0.0);
            sum += k.re * dp;
        }
        assert!((sum - 1.0).abs() < 1e-8);
    }

    #[test]
    fn distributional_at_zero_time() {
        let spec = ChannelSpec::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(kernel(&spec, 0.0, 1.0, 0.0, 0.0), Err(BgcError::DistributionalKernel { .. })));
        let spec = ChannelSpec::new(0.0, 1.0, 1.0).unwrap();
        assert!(kernel(&spec, 1.0, 1.0, 0.0, 0.0).is_err());
    }
}
