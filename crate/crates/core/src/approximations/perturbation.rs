//! First-order correction in `γ²` around the Gaussian channel.
//!
//! Split the generator as `ℒ₁ + γ²ℒ₂` with `ℒ₁ = −p∂_q + (ħσ²/2)∂ₚ²` and
//! `ℒ₂ = (ħ/2)p²∂_q²`. Then `ρ(t) = e^{tℒ₁}ρ₀ + γ²ℛ₁(t)e^{tℒ₁}ρ₀ + O(γ⁴)` with
//!
//! ```text
//! ℛ₁(t) = Σ_{k=0}^{4} t^{k+1}/(k+1)! · ad_{ℒ₁}^k ℒ₂
//! ```
//!
//! The commutator chain terminates after five terms. The table below was
//! checked against [`DiffOp`] arithmetic; the last entry is `+3ħ³σ⁴∂_q⁴`.

use nalgebra::Vector2;
use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::error::Result;
use crate::exact_channel::ChannelSpec;
use crate::gaussian_channel::{evolved_log_wigner, semigroup_matrices, LindbladLinearSpec};
use crate::phase_space::GaussianTerm;

/// Differential operator `Σ c·pᵏ∂ₚᵃ∂_qᵇ` with the multiplications on the left.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiffOp {
    pub terms: BTreeMap<(u32, u32, u32), f64>,
}

fn falling(m: u32, j: u32) -> f64 {
    (0..j).map(|i| (m - i) as f64).product()
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

impl DiffOp {
    pub fn monomial(c: f64, k: u32, a: u32, b: u32) -> Self {
        let mut op = Self::default();
        op.add_term((k, a, b), c);
        op
    }

    fn add_term(&mut self, key: (u32, u32, u32), c: f64) {
        let e = self.terms.entry(key).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            out.add_term(k, c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { terms: self.terms.iter().map(|(&k, &c)| (k, c * s)).filter(|(_, c)| *c != 0.0).collect() }
    }

    /// Composition `self ∘ other`, normal ordered with `∂ₚᵃpᵐ = Σⱼ C(a,j)·m!/(m−j)!·p^{m−j}∂ₚ^{a−j}`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (&(k, a, b), &c1) in &self.terms {
            for (&(m, c, d), &c2) in &other.terms {
                for j in 0..=a.min(m) {
                    let coeff = c1 * c2 * binom(a, j) * falling(m, j);
                    out.add_term((k + m - j, a - j + c, b + d), coeff);
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).add(&other.compose(self).scale(-1.0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest coefficient difference, for comparisons with rounding.
    pub fn distance(&self, other: &Self) -> f64 {
        self.add(&other.scale(-1.0)).terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Applies the operator to `P·e^φ`, returning the new polynomial factor.
    pub fn apply(&self, f: &PolyGaussian) -> Poly2 {
        let mut out = Poly2::default();
        // Group by (a, b) so shared derivatives are computed once.
        let mut cache: BTreeMap<(u32, u32), Poly2> = BTreeMap::new();
        for (&(k, a, b), &c) in &self.terms {
            let d = cache.entry((a, b)).or_insert_with(|| {
                let mut p = f.poly.clone();
                for _ in 0..b {
                    p = f.derive(&p, 1);
                }
                for _ in 0..a {
                    p = f.derive(&p, 0);
                }
                p
            });
            out = out.add(&d.shift(k, 0).scale(Complex64::new(c, 0.0)));
        }
        out
    }
}

/// `ad_{ℒ₁}ᵏℒ₂` for `k = 0..=4`.
pub fn ad_table(hbar: f64, sigma: f64) -> [DiffOp; 5] {
    let (h, s2) = (hbar, sigma * sigma);
    [
        DiffOp::monomial(0.5 * h, 2, 0, 2),
        DiffOp::monomial(h * h * s2, 1, 1, 2).add(&DiffOp::monomial(0.5 * h * h * s2, 0, 0, 2)),
        DiffOp::monomial(h * h * s2, 1, 0, 3).add(&DiffOp::monomial(h.powi(3) * s2 * s2, 0, 2, 2)),
        DiffOp::monomial(3.0 * h.powi(3) * s2 * s2, 0, 1, 3),
        DiffOp::monomial(3.0 * h.powi(3) * s2 * s2, 0, 0, 4),
    ]
}

/// `ℒ₁` and `ℒ₂` as operators.
pub fn split_generators(hbar: f64, sigma: f64) -> (DiffOp, DiffOp) {
    let l1 = DiffOp::monomial(-1.0, 1, 0, 1).add(&DiffOp::monomial(0.5 * hbar * sigma * sigma, 0, 2, 0));
    (l1, DiffOp::monomial(0.5 * hbar, 2, 0, 2))
}

/// Polynomial in `(p, q)`, keyed by exponents.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly2 {
    pub coeffs: BTreeMap<(u32, u32), Complex64>,
}

impl Poly2 {
    pub fn constant(c: Complex64) -> Self {
        let mut p = Self::default();
        p.coeffs.insert((0, 0), c);
        p
    }

    fn push(&mut self, key: (u32, u32), c: Complex64) {
        *self.coeffs.entry(key).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, &c) in &other.coeffs {
            out.push(k, c);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(&k, &c)| (k, c * s)).collect() }
    }

    /// Multiplies by `pⁱqʲ`.
    pub fn shift(&self, i: u32, j: u32) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(&(a, b), &c)| ((a + i, b + j), c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (&(a, b), &c) in &self.coeffs {
            for (&(i, j), &d) in &other.coeffs {
                out.push((a + i, b + j), c * d);
            }
        }
        out
    }

    /// Partial derivative in `p` (`axis = 0`) or `q` (`axis = 1`).
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = Self::default();
        for (&(a, b), &c) in &self.coeffs {
            let n = if axis == 0 { a } else { b };
            if n > 0 {
                let key = if axis == 0 { (a - 1, b) } else { (a, b - 1) };
                out.push(key, c * n as f64);
            }
        }
        out
    }

    pub fn eval(&self, x: &Vector2<f64>) -> Complex64 {
        self.coeffs.iter().map(|(&(a, b), &c)| c * x[0].powi(a as i32) * x[1].powi(b as i32)).sum()
    }
}

/// `P(x)·e^{φ(x)}` with `φ(x) = c + b·x − x·A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyGaussian {
    pub poly: Poly2,
    pub c: Complex64,
    pub b: Vector2<Complex64>,
    pub a: nalgebra::Matrix2<f64>,
}

impl PolyGaussian {
    /// `∂φ` along one axis, a degree-one polynomial.
    fn grad_phi(&self, axis: usize) -> Poly2 {
        let mut g = Poly2::constant(self.b[axis]);
        g.push((1, 0), Complex64::new(-2.0 * self.a[(axis, 0)], 0.0));
        g.push((0, 1), Complex64::new(-2.0 * self.a[(axis, 1)], 0.0));
        g
    }

    fn derive(&self, p: &Poly2, axis: usize) -> Poly2 {
        p.derivative(axis).add(&p.mul(&self.grad_phi(axis)))
    }

    pub fn exponent(&self, x: &Vector2<f64>) -> Complex64 {
        self.c + self.b[0] * x[0] + self.b[1] * x[1] - x.dot(&(self.a * x))
    }

    pub fn eval(&self, x: &Vector2<f64>) -> Complex64 {
        self.poly.eval(x) * self.exponent(x).exp()
    }
}

/// `ℛ₁(t)` for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationOperator {
    pub t: f64,
    pub spec: ChannelSpec,
    pub op: DiffOp,
}

impl PerturbationOperator {
    pub fn new(spec: ChannelSpec, t: f64) -> Self {
        let mut op = DiffOp::default();
        let mut coef = 1.0;
        for (k, ad) in ad_table(spec.hbar, spec.sigma).iter().enumerate() {
            coef *= t / (k + 1) as f64;
            op = op.add(&ad.scale(coef));
        }
        Self { t, spec, op }
    }
}

/// A Gaussian term carried through `e^{tℒ₁}`, together with `ℛ₁(t)` applied to it.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedGaussian {
    pub base: PolyGaussian,
    pub correction: Poly2,
}

impl PerturbedGaussian {
    pub fn new(spec: &ChannelSpec, term: &GaussianTerm, t: f64) -> Result<Self> {
        let m = semigroup_matrices(&LindbladLinearSpec::free_particle(spec.sigma), t)?;
        let (c, b, a) = evolved_log_wigner(term, &m, spec.hbar)?;
        let base = PolyGaussian { poly: Poly2::constant(Complex64::new(1.0, 0.0)), c, b, a };
        let correction = PerturbationOperator::new(*spec, t).op.apply(&base);
        Ok(Self { base, correction })
    }

    pub fn gaussian(&self, x: &Vector2<f64>) -> Complex64 {
        self.base.eval(x)
    }

    /// The coefficient of `γ²`.
    pub fn correction(&self, x: &Vector2<f64>) -> Complex64 {
        self.correction.eval(x) * self.base.exponent(x).exp()
    }

    /// `e^{tℒ₁}ρ₀ + γ²ℛ₁(t)e^{tℒ₁}ρ₀` at the given `γ`.
    pub fn corrected(&self, gamma: f64, x: &Vector2<f64>) -> Complex64 {
        let e = self.base.exponent(x).exp();
        (Complex64::new(1.0, 0.0) + self.correction.eval(x) * (gamma * gamma)) * e
    }
}

/// The `O(γ²)` Wigner correction `ℛ₁(t)e^{tℒ₁}ρ₀` at `x`.
///
/// Complex in general because oscillatory terms are complex.
pub fn perturb_correction(spec: &ChannelSpec, term: &GaussianTerm, t: f64, x: &Vector2<f64>) -> Result<Complex64> {
    Ok(PerturbedGaussian::new(spec, term, t)?.correction(x))
}
