//! The acceptance checks, shared by the command line and the test harness.
//!
//! Each criterion yields one or more [`OracleReport`]s. A criterion passes
//! when all of its gating reports pass; reports marked `informational` carry
//! supporting measurements and never gate.

use nalgebra::Vector2;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

use super::{
    entropy_numerical, integral_lemma_suite, ode_params, pde_evolve_split, wronskian_drift, DensityGridParams, PhaseSpaceGrid,
    SplitOptions,
};
use crate::approximations::PerturbedGaussian;
use crate::entropy::{entropy_cov, entropy_f, entropy_f_log_route, entropy_perturbative, exp_quadratic_symbol, log_gaussian};
use crate::error::Result;
use crate::exact_channel::{char_evolved, evolve_params, partial_transform, wigner_evolved_grid, ChannelSpec};
use crate::gaussian_channel::{apply_gaussian_channel, semigroup_matrices, LindbladLinearSpec};
use crate::observables::{decoherence_exponent, moment_fd, moments_closed, purity_ratio};
use crate::phase_space::{cat_state, CovarianceMatrix, GaussianTerm, StateSum};
use crate::propagator::{apply_kernel, kernel, SampledFunction};

/// One oracle comparison in the `{test, params, discrepancy, tolerance, pass}` shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub test: String,
    pub params: BTreeMap<String, f64>,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
}

impl OracleReport {
    fn new(test: impl Into<String>, params: &[(&str, f64)], discrepancy: f64, tolerance: f64) -> Self {
        Self {
            test: test.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            discrepancy,
            tolerance,
            pass: discrepancy.is_finite() && discrepancy <= tolerance,
            informational: false,
        }
    }

    fn info(mut self) -> Self {
        self.informational = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub reports: Vec<OracleReport>,
}

impl CriterionOutcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().filter(|r| !r.informational).all(|r| r.pass)
    }

    /// The gating report with the largest discrepancy-to-tolerance ratio.
    pub fn worst(&self) -> Option<&OracleReport> {
        self.reports
            .iter()
            .filter(|r| !r.informational)
            .max_by(|a, b| (a.discrepancy / a.tolerance).total_cmp(&(b.discrepancy / b.tolerance)))
    }
}

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "closed-form parameters vs ODE integration"),
    (2, "exact channel vs PDE solver"),
    (3, "Gaussian limit at zero dephasing"),
    (4, "moments and the hbar^2 variance term"),
    (5, "decoherence onset slopes and exponents"),
    (6, "purity monotonicity"),
    (7, "entropy identities"),
    (8, "entropy curves vs density-matrix entropy"),
    (9, "perturbation order"),
    (10, "integral identities and Wronskian"),
    (11, "propagator quadrature and semigroup"),
];

pub fn run_criterion(id: u8) -> Result<CriterionOutcome> {
    let reports = match id {
        1 => ode_agreement()?,
        2 => pde_agreement()?,
        3 => gaussian_limit()?,
        4 => moments()?,
        5 => onset()?,
        6 => monotonicity()?,
        7 => entropy_identities()?,
        8 => entropy_curves()?,
        9 => perturbation_order()?,
        10 => lemmas()?,
        11 => propagator()?,
        _ => return Err(crate::error::BgcError::InvalidParameter { field: "criterion", requirement: "in 1..=11", value: id as f64 }),
    };
    let title = CRITERIA[id as usize - 1].1;
    Ok(CriterionOutcome { id, title, reports })
}

pub fn acceptance_suite() -> Result<Vec<CriterionOutcome>> {
    CRITERIA.iter().map(|(id, _)| run_criterion(*id)).collect()
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn ode_agreement() -> Result<Vec<OracleReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut at = [0.0; 4];
    for _ in 0..200 {
        let spec = ChannelSpec::new(rng.random_range(0.0..2.0), rng.random_range(0.0..2.0), 1.0)?;
        let g = rng.random_range(0.2..5.0);
        let eta = rng.random_range(-5.0..5.0);
        let t = rng.random_range(0.0..1.0);
        let z0 = Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let dz = Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let term = GaussianTerm::new(z0, dz, g, one())?;
        let a = ode_params(&spec, &term, eta, t, 1e-2)?.as_array();
        let b = evolve_params(&spec, &term, eta, t)?.as_array();
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if d > worst {
            worst = d;
            at = [spec.sigma, spec.gamma, eta, t];
        }
    }
    Ok(vec![OracleReport::new(
        "ode_params_vs_closed_form",
        &[("draws", 200.0), ("worst_sigma", at[0]), ("worst_gamma", at[1]), ("worst_eta", at[2]), ("worst_t", at[3])],
        worst,
        1e-8,
    )])
}

fn pde_agreement() -> Result<Vec<OracleReport>> {
    let term = GaussianTerm::coherent(Vector2::zeros(), 1.0)?;
    let state = StateSum::single(term, 1.0)?;
    let (pr, qr, n) = ((-7.0, 7.0), (-14.0, 14.0), 512);
    let mut out = Vec::new();
    for &gamma in &[0.0, 0.5, 1.0] {
        let spec = ChannelSpec::new(1.0, gamma, 1.0)?;
        let w0 = PhaseSpaceGrid::exact(&spec, &state, pr, qr, n, n, 0.0)?;
        for &t in &[0.0, 0.5, 1.0] {
            let pde = pde_evolve_split(&spec, &w0, t, SplitOptions { steps: (50.0 * t).ceil() as usize + 1, richardson: true })?;
            let exact = PhaseSpaceGrid::exact(&spec, &state, pr, qr, n, n, t)?;
            let d = pde.linf_distance(&exact)?;
            out.push(OracleReport::new("pde_vs_exact_wigner", &[("gamma", gamma), ("t", t), ("n", n as f64)], d, 1e-3));
        }
    }
    Ok(out)
}

fn gaussian_limit() -> Result<Vec<OracleReport>> {
    let spec = ChannelSpec::new(1.0, 0.0, 1.0)?;
    let term = GaussianTerm::new(Vector2::new(0.5, -0.3), Vector2::new(0.4, 0.9), 1.3, Complex64::new(0.8, 0.1))?;
    let t = 0.7;
    let m = semigroup_matrices(&LindbladLinearSpec::free_particle(spec.sigma), t)?;
    let mut worst: f64 = 0.0;
    for i in 0..64 {
        for j in 0..64 {
            let xi = -4.0 + 8.0 * i as f64 / 63.0;
            let eta = -4.0 + 8.0 * j as f64 / 63.0;
            let a = char_evolved(&spec, &term, xi, eta, t)?;
            let b = apply_gaussian_channel(|x| term.chi(x, spec.hbar), &m, spec.hbar, &Vector2::new(xi, eta));
            worst = worst.max((a - b).norm());
        }
    }
    Ok(vec![OracleReport::new("char_evolved_vs_gaussian_channel", &[("t", t), ("grid", 64.0)], worst, 1e-10)])
}

fn moments() -> Result<Vec<OracleReport>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let spec = ChannelSpec::new(rng.random_range(0.2..1.5), rng.random_range(0.0..1.5), rng.random_range(0.3..1.5))?;
        let term = GaussianTerm::coherent(Vector2::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)), rng.random_range(0.5..2.0))?;
        let t = rng.random_range(0.1..1.0);
        let closed = moments_closed(&spec, &term, t)?;
        let (mp, mq) = (closed.mean[0], closed.mean[1]);
        let var_p = moment_fd(&spec, &term, 2, 0, t)? - mp * mp;
        let cov = moment_fd(&spec, &term, 1, 1, t)? - mp * mq;
        let var_q = moment_fd(&spec, &term, 0, 2, t)? - mq * mq;
        for (fd, c) in [(var_p, closed.var_p()), (cov, closed.cov_pq()), (var_q, closed.var_q())] {
            worst = worst.max((fd - c).abs() / c.abs().max(1e-3 * spec.hbar));
        }
    }
    out.push(OracleReport::new("moment_fd_vs_closed", &[("draws", 20.0)], worst, 1e-6));

    // Var(q)/ħ = A + Bħ; recover B from three ħ values by least squares.
    let (sigma, gamma, g, p0, t) = (1.0, 0.8, 1.2, 0.6, 0.7);
    let hs = [1.0, 0.5, 0.25];
    let mut ys = Vec::new();
    for &h in &hs {
        let spec = ChannelSpec::new(sigma, gamma, h)?;
        let term = GaussianTerm::coherent(Vector2::new(p0, 0.0), g)?;
        let mq = term.q0() + t * p0;
        ys.push((moment_fd(&spec, &term, 0, 2, t)? - mq * mq) / h);
    }
    let n = hs.len() as f64;
    let (sx, sy) = (hs.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let sxx = hs.iter().map(|x| x * x).sum::<f64>();
    let sxy = hs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>();
    let b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let expect = 0.5 * gamma * gamma * (g * t + sigma * sigma * t * t);
    out.push(OracleReport::new(
        "hbar_squared_coefficient",
        &[("sigma", sigma), ("gamma", gamma), ("g", g), ("p0", p0), ("t", t), ("fitted", b), ("expected", expect)],
        (b - expect).abs() / expect,
        0.01,
    ));
    Ok(out)
}

/// Least-squares fit of `y = a·t + b·t²`, returning `a`.
fn initial_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let (mut s2, mut s3, mut s4, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &y) in ts.iter().zip(ys) {
        s2 += t * t;
        s3 += t * t * t;
        s4 += t.powi(4);
        y1 += t * y;
        y2 += t * t * y;
    }
    (y1 * s4 - y2 * s3) / (s2 * s4 - s3 * s3)
}

/// Slope of `ln y` against `ln t`.
fn log_log_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ls: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ls.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ls).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// `lim_{ħ→0} −ħ ln(purity ratio)` by quadratic extrapolation through
/// `ħ ∈ {1/4, 1/8, 1/16}`; the `ħ`-independent prefactor drops out.
fn semiclassical_log_purity(spec: &ChannelSpec, term: &GaussianTerm, t: f64) -> Result<f64> {
    let hs = [0.25, 0.125, 0.0625];
    let mut e = [0.0; 3];
    for (k, &h) in hs.iter().enumerate() {
        let state = StateSum::single(*term, h)?;
        e[k] = -h * purity_ratio(&spec.with_hbar(h), &state, t)?.ln();
    }
    let (x0, x1, x2) = (hs[0], hs[1], hs[2]);
    Ok(e[0] * x1 * x2 / ((x0 - x1) * (x0 - x2)) + e[1] * x0 * x2 / ((x1 - x0) * (x1 - x2)) + e[2] * x0 * x1 / ((x2 - x0) * (x2 - x1)))
}

fn onset() -> Result<Vec<OracleReport>> {
    let mut out = Vec::new();
    let fig4 = GaussianTerm::new(Vector2::zeros(), Vector2::new(2.0, 4.0), 1.0, one())?;
    let state = StateSum::single(fig4, 1.0)?;
    let ts: Vec<f64> = (1..=10).map(|k| 0.002 * k as f64).collect();
    for &gamma in &[0.0, 0.5, 1.0] {
        let spec = ChannelSpec::new(1.0, gamma, 1.0)?;
        let ys = ts.iter().map(|&t| Ok(-purity_ratio(&spec, &state, t)?.ln())).collect::<Result<Vec<f64>>>()?;
        let slope = initial_slope(&ts, &ys);
        out.push(OracleReport::new(
            "purity_ratio_initial_slope",
            &[("gamma", gamma), ("hbar", 1.0), ("fitted", slope), ("expected", 16.0)],
            (slope - 16.0).abs() / 16.0,
            0.05,
        ));
        let es = ts.iter().map(|&t| semiclassical_log_purity(&spec, &fig4, t)).collect::<Result<Vec<f64>>>()?;
        let slope = initial_slope(&ts, &es);
        out.push(
            OracleReport::new("semiclassical_initial_slope", &[("gamma", gamma), ("fitted", slope), ("expected", 16.0)], (slope - 16.0).abs() / 16.0, 0.05)
                .info(),
        );
        let ds = ts.iter().map(|&t| decoherence_exponent(&spec, &fig4, t)).collect::<Result<Vec<f64>>>()?;
        let gap = es.iter().zip(&ds).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);
        out.push(OracleReport::new("extrapolated_vs_laplace_exponent", &[("gamma", gamma)], gap, 1e-3).info());
    }
    let delayed = GaussianTerm::new(Vector2::zeros(), Vector2::new(2.0, 0.0), 1.0, one())?;
    let state = StateSum::single(delayed, 1.0)?;
    let ts: Vec<f64> = (1..=10).map(|k| 0.005 * k as f64).collect();
    for &gamma in &[0.0, 0.5, 1.0] {
        let spec = ChannelSpec::new(1.0, gamma, 1.0)?;
        let ys = ts.iter().map(|&t| Ok(-purity_ratio(&spec, &state, t)?.ln())).collect::<Result<Vec<f64>>>()?;
        let k = log_log_slope(&ts, &ys);
        out.push(OracleReport::new("delayed_onset_exponent", &[("gamma", gamma), ("hbar", 1.0), ("fitted", k), ("expected", 3.0)], (k - 3.0).abs(), 0.1));
        let es = ts.iter().map(|&t| semiclassical_log_purity(&spec, &delayed, t)).collect::<Result<Vec<f64>>>()?;
        let k = log_log_slope(&ts, &es);
        out.push(OracleReport::new("semiclassical_onset_exponent", &[("gamma", gamma), ("fitted", k), ("expected", 3.0)], (k - 3.0).abs(), 0.1).info());
    }
    Ok(out)
}

fn monotonicity() -> Result<Vec<OracleReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_rise: f64 = 0.0;
    for _ in 0..50 {
        let spec = ChannelSpec::new(rng.random_range(0.0..2.0), rng.random_range(0.0..2.0), 1.0)?;
        let mut z = || Vector2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let (z1, z2) = (z(), z());
        let state = cat_state(z1, z2, rng.random_range(0.5..2.0), 1.0)?;
        let mut prev = f64::INFINITY;
        for k in 0..100 {
            let r = purity_ratio(&spec, &state, k as f64 / 99.0)?;
            worst_rise = worst_rise.max(r - prev);
            prev = r;
        }
    }
    Ok(vec![OracleReport::new("purity_ratio_nonincreasing", &[("configs", 50.0), ("t_points", 100.0)], worst_rise.max(0.0), 1e-10)])
}

fn entropy_identities() -> Result<Vec<OracleReport>> {
    let mut worst: f64 = 0.0;
    for k in 1..=400 {
        let z = 1.0 + 10f64.powf(-6.0 + 8.0 * k as f64 / 400.0).min(99.0);
        let a = entropy_f(z)?;
        worst = worst.max((a - entropy_f_log_route(z)?).abs());
    }
    let f_report = OracleReport::new("entropy_f_two_routes", &[("z_min", 1.0), ("z_max", 100.0)], worst, 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let hbar = rng.random_range(0.3..2.0);
        let (a, d, b) = (rng.random_range(1.2..4.0), rng.random_range(1.2..4.0), rng.random_range(-0.5..0.5));
        let g = CovarianceMatrix::new(nalgebra::Matrix2::new(a, b, b, d), hbar)?;
        let log = log_gaussian(&g)?;
        let gi = g.g.try_inverse().ok_or(crate::error::BgcError::NotPositiveDefinite)?;
        let z = g.det().sqrt();
        let x = Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let (sym, zb) = exp_quadratic_symbol(&log.q_mat, 1.0, hbar, &x)?;
        let w = sym / zb / (2.0 * std::f64::consts::PI * hbar);
        let expect = (-(x.dot(&(gi * x))) / hbar).exp() / (std::f64::consts::PI * hbar * z);
        worst = worst.max((w - expect).abs() / (1.0 + expect)).max((zb.ln() - log.log_z).abs());
    }
    let trip = OracleReport::new("exp_log_round_trip", &[("draws", 50.0)], worst, 1e-10);

    let spec = ChannelSpec::new(1.0, 0.5, 1.0)?;
    let coh = GaussianTerm::coherent(Vector2::zeros(), 1.0)?;
    let s = entropy_numerical(&spec, &coh, 0.0, &DensityGridParams::default())?;
    let pure = OracleReport::new("entropy_numerical_pure_state", &[("t", 0.0)], s.abs(), 1e-4);
    Ok(vec![f_report, trip, pure])
}

fn entropy_curves() -> Result<Vec<OracleReport>> {
    let mut out = Vec::new();
    let coh = GaussianTerm::coherent(Vector2::zeros(), 1.0)?;
    let grid = DensityGridParams::default();
    for &gamma in &[0.5, 1.0] {
        let spec = ChannelSpec::new(1.0, gamma, 1.0)?;
        let mut worst: f64 = 0.0;
        for k in 1..=10 {
            let t = 0.1 * k as f64;
            worst = worst.max((entropy_cov(&spec, &coh, t)? - entropy_numerical(&spec, &coh, t, &grid)?).abs());
        }
        out.push(OracleReport::new("entropy_cov_vs_numerical", &[("gamma", gamma), ("t_max", 1.0)], worst, 0.02));
    }
    let spec = ChannelSpec::new(1.0, 0.5, 1.0)?;
    let mut gaps = Vec::new();
    for k in 1..=10 {
        let t = 0.1 * k as f64;
        gaps.push((t, (entropy_perturbative(&spec, &coh, t)? - entropy_numerical(&spec, &coh, t, &grid)?).abs()));
    }
    let early = gaps.iter().filter(|(t, _)| *t <= 0.3 + 1e-12).map(|g| g.1).fold(0.0, f64::max);
    out.push(OracleReport::new("entropy_perturbative_small_t", &[("gamma", 0.5), ("t_max", 0.3)], early, 0.02));
    // Growth: the gap at each later time exceeds the small-t bound.
    let late = gaps.iter().filter(|(t, _)| *t > 0.3 + 1e-12).map(|g| g.1).fold(f64::INFINITY, f64::min);
    let (g1, g10) = (gaps[0].1, gaps[9].1);
    out.push(OracleReport::new(
        "entropy_perturbative_gap_grows",
        &[("gap_t0.1", g1), ("gap_t1", g10), ("min_late_gap", late), ("max_early_gap", early)],
        if late > early && g10 > g1 { 0.0 } else { 1.0 },
        0.0,
    ));
    Ok(out)
}

fn perturbation_order() -> Result<Vec<OracleReport>> {
    let t = 0.5;
    let term = GaussianTerm::coherent(Vector2::new(0.5, 0.0), 1.0)?;
    let state = StateSum::single(term, 1.0)?;
    let ps: Vec<f64> = (0..81).map(|i| -5.0 + 10.0 * i as f64 / 80.0).collect();
    let qs: Vec<f64> = (0..81).map(|i| -5.0 + 10.0 * i as f64 / 80.0).collect();
    let gammas = [0.05, 0.1, 0.2];
    let mut errs = Vec::new();
    for &gamma in &gammas {
        let spec = ChannelSpec::new(1.0, gamma, 1.0)?;
        let exact = wigner_evolved_grid(&spec, &state, &ps, &qs, t)?;
        let pert = PerturbedGaussian::new(&spec, &term, t)?;
        let mut worst: f64 = 0.0;
        for (iq, &q) in qs.iter().enumerate() {
            for (ip, &p) in ps.iter().enumerate() {
                let x = Vector2::new(p, q);
                worst = worst.max((exact[iq * ps.len() + ip] - pert.corrected(gamma, &x)).norm());
            }
        }
        errs.push(worst);
    }
    let k = log_log_slope(&gammas, &errs);
    Ok(vec![OracleReport::new(
        "gamma_squared_correction_order",
        &[("t", t), ("err_0.05", errs[0]), ("err_0.1", errs[1]), ("err_0.2", errs[2]), ("fitted", k)],
        (k - 4.0).abs(),
        0.3,
    )])
}

fn lemmas() -> Result<Vec<OracleReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut worst, mut drift): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let (w, b, t) = (rng.random_range(0.0..3.0), rng.random_range(0.2..5.0), rng.random_range(0.0..1.0));
        worst = worst.max(integral_lemma_suite(w, b, t)?.max_discrepancy());
        drift = drift.max(wronskian_drift(w, b, t, 20)?);
    }
    Ok(vec![
        OracleReport::new("integral_identities", &[("draws", 100.0)], worst, 1e-10),
        OracleReport::new("wronskian_constancy", &[("draws", 100.0)], drift, 1e-12),
    ])
}

fn propagator() -> Result<Vec<OracleReport>> {
    let spec = ChannelSpec::new(1.0, 0.5, 1.0)?;
    let term = GaussianTerm::coherent(Vector2::new(0.5, -0.3), 1.0)?;
    let mut worst: f64 = 0.0;
    for &(eta, t) in &[(0.0, 0.3), (0.8, 0.5), (-1.3, 1.0)] {
        let (p_min, dp, n) = SampledFunction::default_grid(term.p0(), 1.0, spec.hbar);
        let w0 = SampledFunction::from_fn(p_min, dp, n, |p| partial_transform(&spec, &term, p, eta, 0.0).unwrap_or(Complex64::new(f64::NAN, 0.0)));
        let wt = apply_kernel(&spec, t, eta, &w0)?;
        let peak = wt.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in (n / 4..3 * n / 4).step_by(7) {
            let exact = partial_transform(&spec, &term, wt.p(i), eta, t)?;
            worst = worst.max((wt.values[i] - exact).norm() / peak);
        }
    }
    let quad = OracleReport::new("kernel_quadrature_vs_closed_form", &[("gamma", 0.5)], worst, 1e-6);

    let (s, t, eta) = (0.3, 0.4, 1.1);
    let n = 4001;
    let (lo, hi) = (-12.0, 12.0);
    let h = (hi - lo) / (n - 1) as f64;
    let mut worst: f64 = 0.0;
    let direct_peak = kernel(&spec, s + t, eta, 0.0, 0.0)?.norm();
    for &(p, pp) in &[(0.0, 0.0), (0.5, -0.4), (-1.2, 0.3), (2.0, 1.5)] {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let mid = lo + h * j as f64;
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            acc += kernel(&spec, t, eta, p, mid)? * kernel(&spec, s, eta, mid, pp)? * w;
        }
        let composed = acc * h;
        worst = worst.max((composed - kernel(&spec, s + t, eta, p, pp)?).norm() / direct_peak);
    }
    let semi = OracleReport::new("kernel_semigroup", &[("s", s), ("t", t), ("eta", eta)], worst, 1e-6);
    Ok(vec![quad, semi])
}
