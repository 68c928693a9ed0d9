//! Integral identities for `u`, `v` and the evolving centres, checked by
//! quadrature of the left side against the closed right side.
//!
//! With `u = cosh ωs + (ω²/β)·sh`, `v = cosh ωs + β·sh`:
//!
//! ```text
//! ∫u/v²  = (v − 1)/(βv)            ∫1/v² = sh/v
//! ∫1/u²  = sh/u                    ∫u²/v² = (ω²/β²)t + (1 − ω²/β²)·sh/v
//! ∫Q²    = η²Ψ/v − 2ηQ₀·ch/v + Q₀²·sh/v
//! ∫P²    = P₀²·sh/u                ∫QP/a = P₀Q₀·sh/(gv) − P₀η·ch/(gv)
//! ```
//!
//! where `a = gv/u`, `P = P₀/u` and `Q = (Q₀ − η(β·ch + sh))/v`. The
//! Wronskian-type combination `βu² − (ω²/β)v²` is constant.

use crate::error::Result;
use crate::exact_channel::uv_functions;
use crate::quad::gauss_kronrod;

/// Extra inputs needed by the three centre integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaExtras {
    pub g: f64,
    pub eta: f64,
    pub q0: f64,
    pub p0: f64,
}

impl Default for LemmaExtras {
    fn default() -> Self {
        Self { g: 1.0, eta: 0.8, q0: 0.6, p0: -0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub quadrature: f64,
    pub closed_form: f64,
}

impl LemmaCheck {
    pub fn discrepancy(&self) -> f64 {
        (self.quadrature - self.closed_form).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn max_discrepancy(&self) -> f64 {
        self.checks.iter().map(LemmaCheck::discrepancy).fold(0.0, f64::max)
    }
}

pub fn integral_lemma_suite(omega: f64, beta: f64, t: f64) -> Result<LemmaReport> {
    integral_lemma_suite_with(omega, beta, t, LemmaExtras::default())
}

pub fn integral_lemma_suite_with(omega: f64, beta: f64, t: f64, x: LemmaExtras) -> Result<LemmaReport> {
    crate::error::require(beta > 0.0, "beta", "> 0", beta)?;
    let w2 = omega * omega;
    let uv = |s: f64| uv_functions(w2, beta, s).expect("lemma arguments stay in range");
    let end = uv_functions(w2, beta, t)?;
    let centre = |s: f64| {
        let f = uv(s);
        let a = x.g * f.v / f.u;
        (a, x.p0 / f.u, (x.q0 - x.eta * (beta * f.ch + f.sh)) / f.v)
    };
    let quad = |f: &dyn Fn(f64) -> f64| -> Result<f64> { Ok(gauss_kronrod(f, 0.0, t, 1e-15, 1e-14)?.value) };
    let r = w2 / (beta * beta);
    let (u, v, ch, sh, psi) = (end.u, end.v, end.ch, end.sh, end.psi);
    let checks = vec![
        LemmaCheck { name: "u/v^2", quadrature: quad(&|s| uv(s).u / uv(s).v.powi(2))?, closed_form: (v - 1.0) / (beta * v) },
        LemmaCheck { name: "1/v^2", quadrature: quad(&|s| uv(s).v.powi(-2))?, closed_form: sh / v },
        LemmaCheck { name: "1/u^2", quadrature: quad(&|s| uv(s).u.powi(-2))?, closed_form: sh / u },
        LemmaCheck { name: "u^2/v^2", quadrature: quad(&|s| (uv(s).u / uv(s).v).powi(2))?, closed_form: r * t + (1.0 - r) * sh / v },
        LemmaCheck {
            name: "Q^2",
            quadrature: quad(&|s| centre(s).2.powi(2))?,
            closed_form: x.eta * x.eta * psi / v - 2.0 * x.eta * x.q0 * ch / v + x.q0 * x.q0 * sh / v,
        },
        LemmaCheck { name: "P^2", quadrature: quad(&|s| centre(s).1.powi(2))?, closed_form: x.p0 * x.p0 * sh / u },
        LemmaCheck {
            name: "QP/a",
            quadrature: quad(&|s| {
                let (a, p, q) = centre(s);
                q * p / a
            })?,
            closed_form: x.p0 * x.q0 * sh / (x.g * v) - x.p0 * x.eta * ch / (x.g * v),
        },
    ];
    Ok(LemmaReport { checks })
}

/// Largest relative drift of `βu² − (ω²/β)v²` over `n` evenly spaced times in
/// `[0, t]`, measured against `β − ω²/β` and the size of the two terms.
pub fn wronskian_drift(omega: f64, beta: f64, t: f64, n: usize) -> Result<f64> {
    let w2 = omega * omega;
    let target = beta - w2 / beta;
    let mut worst: f64 = 0.0;
    for i in 0..=n {
        let s = t * i as f64 / n.max(1) as f64;
        let f = uv_functions(w2, beta, s)?;
        let (a, b) = (beta * f.u * f.u, w2 / beta * f.v * f.v);
        worst = worst.max(((a - b) - target).abs() / (a.abs() + b.abs()).max(1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_point() {
        let rep = integral_lemma_suite(1.0, 2.0, 1.0).unwrap();
        assert_eq!(rep.checks.len(), 7);
        assert!(rep.max_discrepancy() < 1e-10, "{rep:?}");
    }

    #[test]
    fn small_omega_branch() {
        let (beta, t) = (1.5, 0.9);
        let rep = integral_lemma_suite(1e-9, beta, t).unwrap();
        let c = &rep.checks[1];
        assert!((c.closed_form - t / (1.0 + beta * t)).abs() < 1e-12);
        assert!(rep.max_discrepancy() < 1e-10);
    }

    #[test]
    fn wronskian_constant() {
        for &(w, b) in &[(0.0, 1.0), (1.0, 2.0), (3.0, 0.4)] {
            assert!(wronskian_drift(w, b, 1.0, 50).unwrap() < 1e-12);
        }
    }
}
