//! Direct integration of the parameter equations of an evolving Gaussian at
//! fixed `η`:
//!
//! ```text
//! ȧ = 2σ² − γ²η²a²/2          Ṗ = −γ²η²aP/2
//! Q̇ = −2σ²Q/a − η            ċ = −σ²c/a
//! Ḋ = σ²Q²/2 + γ²η²P²/2      φ̇ = P(Q̇ + η)
//! ```

use crate::error::{require, BgcError, Result};
use crate::exact_channel::{ChannelSpec, EvolutionParameters};
use crate::phase_space::GaussianTerm;

fn rhs(spec: &ChannelSpec, eta: f64, y: &[f64; 6]) -> [f64; 6] {
    let (s2, k) = (spec.sigma * spec.sigma, (spec.gamma * eta).powi(2));
    let [a, c, p, q, _, _] = *y;
    let qdot = -2.0 * s2 * q / a - eta;
    [2.0 * s2 - 0.5 * k * a * a, -s2 * c / a, -0.5 * k * a * p, qdot, 0.5 * s2 * q * q + 0.5 * k * p * p, p * (qdot + eta)]
}

fn rk4(spec: &ChannelSpec, eta: f64, y0: [f64; 6], t: f64, n: usize) -> [f64; 6] {
    let h = t / n as f64;
    let mut y = y0;
    let add = |y: &[f64; 6], s: f64, k: &[f64; 6]| -> [f64; 6] { std::array::from_fn(|i| y[i] + s * k[i]) };
    for _ in 0..n {
        let k1 = rhs(spec, eta, &y);
        let k2 = rhs(spec, eta, &add(&y, 0.5 * h, &k1));
        let k3 = rhs(spec, eta, &add(&y, 0.5 * h, &k2));
        let k4 = rhs(spec, eta, &add(&y, h, &k3));
        y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    y
}

const HALVING_TOL: f64 = 1e-11;
const MAX_HALVINGS: u32 = 12;

/// RK4 from the initial parameters of `term`, halving `dt` until successive
/// answers agree to `1e−11` (relative to `max(1, |y|)`) in every component.
pub fn ode_params(spec: &ChannelSpec, term: &GaussianTerm, eta: f64, t: f64, dt: f64) -> Result<EvolutionParameters> {
    if t < 0.0 {
        return Err(BgcError::NegativeTime(t));
    }
    require(dt > 0.0, "dt", "> 0", dt)?;
    let init = EvolutionParameters::initial(term);
    if t == 0.0 {
        return Ok(init);
    }
    let y0 = init.as_array();
    let mut n = ((t / dt).ceil() as usize).max(1);
    let mut prev = rk4(spec, eta, y0, t, n);
    let mut change = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        n *= 2;
        let next = rk4(spec, eta, y0, t, n);
        change = prev.iter().zip(&next).map(|(a, b)| (a - b).abs() / a.abs().max(1.0)).fold(0.0, f64::max);
        prev = next;
        if change < HALVING_TOL {
            let [a, c, p_cap, q_cap, d_damp, phi] = prev;
            if a <= 0.0 {
                return Err(BgcError::NotPositiveDefinite);
            }
            return Ok(EvolutionParameters { a, c, p_cap, q_cap, d_damp, phi });
        }
    }
    Err(BgcError::StepHalvingFailed { halvings: MAX_HALVINGS, change })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_channel::evolve_params;
    use nalgebra::Vector2;
    use num_complex::Complex64;

    #[test]
    fn initial_conditions_exact() {
        let spec = ChannelSpec::new(1.0, 1.0, 1.0).unwrap();
        let term = GaussianTerm::new(Vector2::new(0.5, 0.1), Vector2::new(0.3, -0.7), 1.7, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(ode_params(&spec, &term, 2.0, 0.0, 1e-3).unwrap(), EvolutionParameters::initial(&term));
    }

    #[test]
    fn matches_closed_form() {
        let spec = ChannelSpec::new(1.3, 0.8, 1.0).unwrap();
        let term = GaussianTerm::new(Vector2::new(0.9, 0.0), Vector2::new(0.0, 1.2), 0.6, Complex64::new(1.0, 0.0)).unwrap();
        for &eta in &[-3.0, 0.0, 0.4, 4.5] {
            let a = ode_params(&spec, &term, eta, 0.8, 1e-2).unwrap().as_array();
            let b = evolve_params(&spec, &term, eta, 0.8).unwrap().as_array();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9, "eta {eta}: {a:?} vs {b:?}");
            }
        }
    }
}
