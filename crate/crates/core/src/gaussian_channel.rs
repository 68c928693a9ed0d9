//! Gaussian quantum channels generated by quadratic Hamiltonians and linear
//! Lindblad operators.
//!
//! With `Ĥ = ½x̂·Qx̂` and `L̂_k = l_k·Ωx̂`, put `K = Σ l̄_k l_kᵀ`. The channel
//! acts on characteristic functions as
//! `χ(ξ) ↦ e^{−ξ·D_tξ/2ħ} χ(R_tᵀξ)` with
//! `R_t = e^{t(ΩQ + Im K Ω)}` and `D_t = ∫₀ᵗ R_s Re K R_sᵀ ds`.
//! `R_t` is the flow of the phase-space centre; its transpose appears on the
//! dual variable. A Gaussian with width matrix `G` leaves with
//! `G' = R_t G R_tᵀ + 2D_t`.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{require, BgcError, Result};
use crate::phase_space::{GaussianTerm, SymplecticForm};
use crate::quad::adaptive_simpson;

/// Quadratic Hamiltonian plus linear Lindblad operators.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladLinearSpec {
    pub q_mat: Matrix2<f64>,
    pub l_vecs: Vec<Vector2<Complex64>>,
}

impl LindbladLinearSpec {
    pub fn new(q_mat: Matrix2<f64>, l_vecs: Vec<Vector2<Complex64>>) -> Result<Self> {
        let asym = (q_mat[(0, 1)] - q_mat[(1, 0)]).abs();
        if asym > 1e-14 * (1.0 + q_mat.abs().max()) {
            return Err(BgcError::NotSymmetric { asymmetry: asym });
        }
        Ok(Self { q_mat, l_vecs })
    }

    /// `H = p²/2` with the single Lindblad operator `σq̂`.
    pub fn free_particle(sigma: f64) -> Self {
        Self {
            q_mat: Matrix2::new(1.0, 0.0, 0.0, 0.0),
            l_vecs: vec![Vector2::new(Complex64::new(-sigma, 0.0), Complex64::new(0.0, 0.0))],
        }
    }

    /// `K = Σ l̄ lᵀ`.
    pub fn k_matrix(&self) -> nalgebra::Matrix2<Complex64> {
        self.l_vecs
            .iter()
            .fold(nalgebra::Matrix2::zeros(), |acc, l| acc + l.map(|c| c.conj()) * l.transpose())
    }

    /// Generator `A = ΩQ + Im K Ω` of the centre flow.
    pub fn generator(&self) -> Matrix2<f64> {
        let omega = SymplecticForm::standard().omega;
        let im_k = self.k_matrix().map(|c| c.im);
        omega * self.q_mat + im_k * omega
    }

    pub fn re_k(&self) -> Matrix2<f64> {
        self.k_matrix().map(|c| c.re)
    }
}

/// `R_t`, `D_t` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChannelMatrices {
    pub r: Matrix2<f64>,
    pub d: Matrix2<f64>,
    pub t: f64,
}

impl GaussianChannelMatrices {
    pub fn identity() -> Self {
        Self { r: Matrix2::identity(), d: Matrix2::zeros(), t: 0.0 }
    }

    /// Output width matrix for an input width matrix `g`.
    pub fn transform_width(&self, g: &Matrix2<f64>) -> Matrix2<f64> {
        self.r * g * self.r.transpose() + 2.0 * self.d
    }
}

fn is_nilpotent(a: &Matrix2<f64>) -> bool {
    let scale = a.abs().max().max(1.0);
    (a * a).abs().max() <= 1e-15 * scale * scale
}

/// Matrix exponential by scaling and squaring with a diagonal Padé(6)
/// approximant.
pub fn expm(a: &Matrix2<f64>) -> Matrix2<f64> {
    const C: [f64; 7] = [
        1.0,
        1.0 / 2.0,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let norm = a.abs().row_sum().max();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let x = a / 2f64.powi(s);
    let id = Matrix2::identity();
    let mut num = id * C[0];
    let mut den = id * C[0];
    let mut pow = id;
    for (k, c) in C.iter().enumerate().skip(1) {
        pow *= x;
        num += pow * *c;
        den += pow * (if k % 2 == 0 { *c } else { -*c });
    }
    let mut e = den.try_inverse().expect("Padé denominator is well conditioned after scaling") * num;
    for _ in 0..s {
        e = e * e;
    }
    e
}

pub fn semigroup_matrices(spec: &LindbladLinearSpec, t: f64) -> Result<GaussianChannelMatrices> {
    if t < 0.0 {
        return Err(BgcError::NegativeTime(t));
    }
    let a = spec.generator();
    let k = spec.re_k();
    if is_nilpotent(&a) {
        let r = Matrix2::identity() + a * t;
        let d = k * t + (a * k + k * a.transpose()) * (0.5 * t * t) + a * k * a.transpose() * (t * t * t / 3.0);
        return Ok(GaussianChannelMatrices { r, d: symmetrize(&d), t });
    }
    let r = expm(&(a * t));
    let entry = |i: usize, j: usize| -> Result<f64> {
        let f = |s: f64| {
            let rs = expm(&(a * s));
            (rs * k * rs.transpose())[(i, j)]
        };
        Ok(adaptive_simpson(f, 0.0, t, 1e-12)?.value)
    };
    let d00 = entry(0, 0)?;
    let d01 = entry(0, 1)?;
    let d11 = entry(1, 1)?;
    Ok(GaussianChannelMatrices { r, d: Matrix2::new(d00, d01, d01, d11), t })
}

fn symmetrize(m: &Matrix2<f64>) -> Matrix2<f64> {
    0.5 * (m + m.transpose())
}

/// `e^{−ξ·Dξ/2ħ} χ(Rᵀξ)`.
pub fn apply_gaussian_channel<F>(chi: F, m: &GaussianChannelMatrices, hbar: f64, xi: &Vector2<f64>) -> Complex64
where
    F: Fn(&Vector2<f64>) -> Complex64,
{
    let damp = (-xi.dot(&(m.d * xi)) / (2.0 * hbar)).exp();
    chi(&(m.r.transpose() * xi)) * damp
}

/// Smallest eigenvalue of the Hermitian matrix `D + iΩ − iRᵀΩR`.
pub fn cp_margin(m: &GaussianChannelMatrices) -> f64 {
    let omega = SymplecticForm::standard().omega;
    // Off-diagonal imaginary part; Ω and RᵀΩR are antisymmetric.
    let w = omega - m.r.transpose() * omega * m.r;
    let a = m.d[(0, 0)];
    let d = m.d[(1, 1)];
    let b = Complex64::new(m.d[(0, 1)], w[(0, 1)]);
    0.5 * (a + d) - (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt()
}

pub fn cp_check(m: &GaussianChannelMatrices) -> bool {
    cp_margin(m) >= -1e-12
}

/// Wigner function of a Gaussian term after the channel, written as
/// `exp(φ(x))` with `φ` a complex quadratic.
///
/// Returns `(c, b, a)` with `φ(x) = c + b·x − x·a x`.
pub fn evolved_log_wigner(
    term: &GaussianTerm,
    m: &GaussianChannelMatrices,
    hbar: f64,
) -> Result<(Complex64, Vector2<Complex64>, Matrix2<f64>)> {
    require(hbar > 0.0, "hbar", "> 0", hbar)?;
    let g0 = term.g_matrix();
    let gp = m.transform_width(&g0);
    let gi = gp.try_inverse().ok_or(BgcError::NotPositiveDefinite)?;
    let s = term.chi_shift();
    let i = Complex64::new(0.0, 1.0);
    let rg0s = m.r * g0 * s;
    let rz0 = m.r * term.z0;
    let v: Vector2<Complex64> = Vector2::new(
        Complex64::new(rg0s[0] / (2.0 * hbar), rz0[0] / hbar),
        Complex64::new(rg0s[1] / (2.0 * hbar), rz0[1] / hbar),
    );
    let theta = (term.q0() * term.dp() - term.p0() * term.dq()) / hbar;
    let c0 = Complex64::new(-s.dot(&(g0 * s)) / (4.0 * hbar), theta);
    let gv: Vector2<Complex64> = gi.map(|x| Complex64::new(x, 0.0)) * v;
    let vgv = v[0] * gv[0] + v[1] * gv[1];
    let det = gp.determinant();
    if det <= 0.0 {
        return Err(BgcError::NotPositiveDefinite);
    }
    let norm = term.weight / (std::f64::consts::PI * hbar * det.sqrt());
    let c = norm.ln() + c0 + vgv * hbar;
    let b = gv * (-2.0 * i);
    Ok((c, b, gi / hbar))
}

/// Evaluates the Wigner function of a term pushed through the channel.
pub fn evolved_wigner(term: &GaussianTerm, m: &GaussianChannelMatrices, hbar: f64, x: &Vector2<f64>) -> Result<Complex64> {
    let (c, b, a) = evolved_log_wigner(term, m, hbar)?;
    let quad = x.dot(&(a * x));
    Ok((c + b[0] * x[0] + b[1] * x[1] - quad).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_zero() {
        let m = semigroup_matrices(&LindbladLinearSpec::free_particle(1.3), 0.0).unwrap();
        assert_eq!(m.r, Matrix2::identity());
        assert_eq!(m.d, Matrix2::zeros());
        assert!(semigroup_matrices(&LindbladLinearSpec::free_particle(1.0), -0.1).is_err());
    }

    #[test]
    fn free_particle_closed_form() {
        let (s, t) = (0.7, 1.3);
        let m = semigroup_matrices(&LindbladLinearSpec::free_particle(s), t).unwrap();
        assert!((m.r - Matrix2::new(1.0, 0.0, t, 1.0)).abs().max() < 1e-15);
        let d = s * s * Matrix2::new(t, t * t / 2.0, t * t / 2.0, t.powi(3) / 3.0);
        assert!((m.d - d).abs().max() < 1e-14);
        assert!(cp_check(&m));
    }

    #[test]
    fn expm_matches_rotation() {
        let th = 2.7;
        let e = expm(&Matrix2::new(0.0, -th, th, 0.0));
        let r = Matrix2::new(th.cos(), -th.sin(), th.sin(), th.cos());
        assert!((e - r).abs().max() < 1e-13);
    }

    #[test]
    fn general_path_matches_rotation_channel() {
        // Harmonic oscillator with l = (−σ, 0): D_t integrates a rotated projector.
        let sigma = 0.8;
        let spec = LindbladLinearSpec::new(Matrix2::identity(), vec![Vector2::new(Complex64::new(-sigma, 0.0), Complex64::new(0.0, 0.0))]).unwrap();
        let t = 1.1;
        let m = semigroup_matrices(&spec, t).unwrap();
        // Closed form: R_s e_p = (cos s, sin s).
        let d00 = sigma * sigma * (t / 2.0 + (2.0 * t).sin() / 4.0);
        let d01 = sigma * sigma * (t.sin().powi(2) / 2.0);
        let d11 = sigma * sigma * (t / 2.0 - (2.0 * t).sin() / 4.0);
        assert!((m.d - Matrix2::new(d00, d01, d01, d11)).abs().max() < 1e-11);
        assert!(cp_check(&m));
    }

    #[test]
    fn cp_rejects_negative_d() {
        let m = GaussianChannelMatrices { r: Matrix2::identity(), d: -0.1 * Matrix2::identity(), t: 0.0 };
        assert!(!cp_check(&m));
        assert!(cp_check(&GaussianChannelMatrices::identity()));
    }
}
