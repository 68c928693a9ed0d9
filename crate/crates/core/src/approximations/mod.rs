//! Approximate dynamics: Gaussian wave packets driven by the non-Hermitian
//! symbol of the generator, and first-order perturbation theory in `γ²`.

mod perturbation;
mod semiclassical;

pub use perturbation::{ad_table, perturb_correction, split_generators, DiffOp, PerturbationOperator, PerturbedGaussian, Poly2, PolyGaussian};
pub use semiclassical::{generator_symbol, sc_nonhermitian_evolve, SemiclassicalState, DEFAULT_DT};

use nalgebra::{Matrix2, Vector2};

use crate::error::{BgcError, Result};
use crate::exact_channel::ChannelSpec;
use crate::phase_space::{CovarianceMatrix, GaussianTerm};

/// Leading-order width matrix of a non-oscillatory term, in `(p, q)` ordering:
///
/// ```text
/// G_t = [ g + 2σ²t          gt + σ²t²                            ]
///       [ gt + σ²t²         1/g + 2tγ²p₀² + gt² + (2/3)σ²t³     ]
/// ```
pub fn sc_gaussian_covariance(spec: &ChannelSpec, term: &GaussianTerm, t: f64) -> Result<CovarianceMatrix> {
    term.require_state()?;
    if t < 0.0 {
        return Err(BgcError::NegativeTime(t));
    }
    CovarianceMatrix::new(sc_width(spec, term.g, term.p0(), t), spec.hbar)
}

pub(crate) fn sc_width(spec: &ChannelSpec, g: f64, p0: f64, t: f64) -> Matrix2<f64> {
    let (s2, g2) = (spec.sigma * spec.sigma, spec.gamma * spec.gamma);
    let pp = g + 2.0 * s2 * t;
    let pq = g * t + s2 * t * t;
    let qq = 1.0 / g + 2.0 * t * g2 * p0 * p0 + g * t * t + 2.0 * s2 * t.powi(3) / 3.0;
    Matrix2::new(pp, pq, pq, qq)
}

/// The exact physical covariance rebuilt from the semiclassical width plus the
/// `ħ²` dephasing correction the wave-packet picture misses:
/// `Γ = (ħ/2)G_t + (ħ²/2)γ²(gt + σ²t²)E_qq`.
pub fn covariance_from_semiclassical(spec: &ChannelSpec, term: &GaussianTerm, t: f64) -> Result<Matrix2<f64>> {
    let gt = sc_gaussian_covariance(spec, term, t)?;
    let h = spec.hbar;
    let extra = 0.5 * h * h * spec.gamma * spec.gamma * (term.g * t + spec.sigma * spec.sigma * t * t);
    Ok(gt.physical() + Matrix2::new(0.0, 0.0, 0.0, extra))
}

/// `−Im K(X₀, Y₀) = ½[σ²Y_p² + γ²p₀²Y_q²]`, the initial decay rate of `Im d`.
pub fn decay_rate(spec: &ChannelSpec, x0: &Vector2<f64>, y0: &Vector2<f64>) -> f64 {
    0.5 * (spec.sigma.powi(2) * y0[0].powi(2) + (spec.gamma * x0[0] * y0[1]).powi(2))
}

/// Leading-order `Im d(t)`.
///
/// Linear in `t` when the initial rate is nonzero. When it vanishes the free
/// flow rotates `Y` into the `p` direction (`Y_p(t) = −tY_q`) and the
/// position noise takes over at third order, `σ²Y_q²t³/6`.
pub fn decoherence_onset(spec: &ChannelSpec, x0: &Vector2<f64>, y0: &Vector2<f64>, t: f64) -> f64 {
    let rate = decay_rate(spec, x0, y0);
    if rate > 0.0 {
        t * rate
    } else {
        spec.sigma.powi(2) * y0[1].powi(2) * t.powi(3) / 6.0
    }
}
