//! The subcommands. Each writes its tables into the output directory and
//! returns the paths it wrote, in order.

use bgc_core::approximations::{sc_nonhermitian_evolve, PerturbedGaussian, SemiclassicalState, DEFAULT_DT};
use bgc_core::entropy::{entropy_cov, entropy_perturbative, entropy_semiclassical};
use bgc_core::exact_channel::{char_evolved_state, wigner_evolved_grid};
use bgc_core::observables::{moment_fd, moments_closed, purity_ratio, purity_short_time};
use bgc_core::oracle::{entropy_numerical, pde_evolve_split, run_criterion, DensityGridParams, OracleReport, PhaseSpaceGrid, SplitOptions};
use bgc_core::{BgcError, GaussianTerm};
use nalgebra::Vector2;
use serde::Serialize;
use std::path::{Path, PathBuf};

use crate::config::{Resolved, RunConfig, Solver};
use crate::error::CliError;
use crate::table::{export_table, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Evolve,
    Moments,
    Purity,
    Entropy,
    Compare,
    OracleCheck,
}

pub fn run_command(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let res = cfg.resolve()?;
    std::fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
    match cmd {
        Command::Evolve => evolve(cfg, &res, out),
        Command::Moments => moments(cfg, &res, out),
        Command::Purity => purity(cfg, &res, out),
        Command::Entropy => entropy(cfg, &res, out),
        Command::Compare => compare(cfg, &res, out),
        Command::OracleCheck => oracle_check(cfg, out),
    }
}

fn write(table: &Table, out: &Path, name: &str) -> Result<PathBuf, CliError> {
    let path = out.join(name);
    export_table(table, &path)?;
    Ok(path)
}

/// The one non-oscillatory term the moment and entropy formulas act on.
fn single_state_term(res: &Resolved, command: &str) -> Result<GaussianTerm, CliError> {
    match res.state.terms.as_slice() {
        [t] if !t.is_oscillatory() => Ok(*t),
        _ => Err(CliError::Validation {
            field: "state".into(),
            message: format!("{command} needs a single term with dp = dq = 0"),
        }),
    }
}

fn evolve(cfg: &RunConfig, res: &Resolved, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let times = cfg.times();
    let n = cfg.time.n_steps;
    let every = cfg.evolve.every.unwrap_or(n);
    let snapshots: Vec<usize> = (0..=n).filter(|k| k % every == 0 || *k == n).collect();
    let (n_p, n_q) = (cfg.grid.n_p, cfg.grid.n_q);
    let mut written = Vec::new();
    let mut current: Option<(usize, PhaseSpaceGrid)> = None;
    for &k in &snapshots {
        let t = times[k];
        let grid = match cfg.evolve.solver {
            Solver::Exact => PhaseSpaceGrid::exact(&res.spec, &res.state, res.p_range, res.q_range, n_p, n_q, t)?,
            Solver::Pde => {
                let (k0, start) = match current.take() {
                    Some(c) => c,
                    None => (0, PhaseSpaceGrid::exact(&res.spec, &res.state, res.p_range, res.q_range, n_p, n_q, 0.0)?),
                };
                let dt = t - times[k0];
                let steps = (k - k0).max(1);
                pde_evolve_split(&res.spec, &start, dt, SplitOptions { steps, richardson: true })?
            }
        };
        let mut table = Table::new(["t", "p", "q", "re", "im"]);
        for ip in 0..grid.n_p {
            for iq in 0..grid.n_q {
                let v = grid.at(ip, iq);
                table.push(vec![t, grid.p(ip), grid.q(iq), v.re, v.im]);
            }
        }
        written.push(write(&table, out, &format!("wigner_{k:05}.csv"))?);
        if cfg.evolve.chi {
            written.push(write(&chi_table(cfg, res, t)?, out, &format!("chi_{k:05}.csv"))?);
        }
        current = Some((k, grid));
    }
    Ok(written)
}

/// `χ` on a square `(ξ, η)` grid sized by the widths of the first term.
fn chi_table(cfg: &RunConfig, res: &Resolved, t: f64) -> Result<Table, CliError> {
    let h = res.spec.hbar;
    let g_min = res.state.terms.iter().map(|t| t.g).fold(f64::INFINITY, f64::min);
    let g_max = res.state.terms.iter().map(|t| t.g).fold(0.0, f64::max);
    let dp_max = res.state.terms.iter().map(|t| t.dp().abs()).fold(0.0, f64::max);
    let dq_max = res.state.terms.iter().map(|t| t.dq().abs()).fold(0.0, f64::max);
    let xi_half = 8.0 * (h / g_min).sqrt() + dq_max;
    let eta_half = 8.0 * (h * g_max).sqrt() + dp_max;
    let n = cfg.evolve.chi_n;
    let mut table = Table::new(["t", "xi", "eta", "re", "im"]);
    for i in 0..n {
        let xi = -xi_half + 2.0 * xi_half * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let eta = -eta_half + 2.0 * eta_half * j as f64 / (n - 1) as f64;
            let v = char_evolved_state(&res.spec, &res.state, xi, eta, t)?;
            table.push(vec![t, xi, eta, v.re, v.im]);
        }
    }
    Ok(table)
}

fn moments(cfg: &RunConfig, res: &Resolved, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let term = single_state_term(res, "moments")?;
    let mut table = Table::new(["t", "mean_p", "mean_q", "var_p", "cov_pq", "var_q", "var_q_fd"]);
    for t in cfg.times() {
        let m = moments_closed(&res.spec, &term, t)?;
        let var_q_fd = moment_fd(&res.spec, &term, 0, 2, t)? - m.mean[1] * m.mean[1];
        table.push(vec![t, m.mean[0], m.mean[1], m.var_p(), m.cov_pq(), m.var_q(), var_q_fd]);
    }
    Ok(vec![write(&table, out, "moments.csv")?])
}

fn gamma_label(g: f64) -> String {
    format!("{g}")
}

fn purity(cfg: &RunConfig, res: &Resolved, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let gammas = cfg.purity.gammas.clone().unwrap_or_else(|| vec![res.spec.gamma]);
    let mut header = vec!["t".to_string()];
    header.extend(gammas.iter().map(|g| format!("ratio_gamma_{}", gamma_label(*g))));
    header.extend(gammas.iter().map(|g| format!("short_time_gamma_{}", gamma_label(*g))));
    let mut table = Table::new(header);
    for t in cfg.times() {
        let mut row = vec![t];
        for &g in &gammas {
            row.push(purity_ratio(&res.spec.with_gamma(g), &res.state, t)?);
        }
        for &g in &gammas {
            row.push(purity_short_time(&res.spec.with_gamma(g), &res.state, t));
        }
        table.push(row);
    }
    Ok(vec![write(&table, out, "purity.csv")?])
}

fn entropy(cfg: &RunConfig, res: &Resolved, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let term = single_state_term(res, "entropy")?;
    let e = &cfg.entropy;
    let grid = DensityGridParams { q_min: term.q0() - e.q_half, q_max: term.q0() + e.q_half, n_q: e.n_q, eta_max: e.eta_half, n_eta: e.n_eta };
    let gammas = e.gammas.clone().unwrap_or_else(|| vec![res.spec.gamma]);
    let mut table = Table::new(["gamma", "t", "S_numerical", "S_cov", "S_perturbative", "S_semiclassical"]);
    for &g in &gammas {
        let spec = res.spec.with_gamma(g);
        for t in cfg.times() {
            let numerical = if e.numerical {
                // Follow the centre so the window stays on the state.
                let shifted = DensityGridParams { q_min: grid.q_min + t * term.p0(), q_max: grid.q_max + t * term.p0(), ..grid };
                entropy_numerical(&spec, &term, t, &shifted)?
            } else {
                f64::NAN
            };
            let perturbative = match entropy_perturbative(&spec, &term, t) {
                // The initial state is pure; every route gives zero there.
                Err(BgcError::PureStateSingularity { .. }) => 0.0,
                other => other?,
            };
            table.push(vec![g, t, numerical, entropy_cov(&spec, &term, t)?, perturbative, entropy_semiclassical(&spec, &term, t)?]);
        }
    }
    Ok(vec![write(&table, out, "entropy.csv")?])
}

fn compare(cfg: &RunConfig, res: &Resolved, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let times = cfg.compare.times.clone().unwrap_or_else(|| vec![cfg.time.t_max]);
    let n = cfg.compare.n;
    let axis = |(lo, hi): (f64, f64)| -> Vec<f64> { (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect() };
    let (ps, qs) = (axis(res.p_range), axis(res.q_range));
    let hbar = res.spec.hbar;
    let mut table = Table::new(["t", "p", "q", "exact", "semiclassical", "perturbative"]);
    let mut summary = Table::new(["t", "linf_semiclassical", "linf_perturbative"]);
    for &t in &times {
        let exact = wigner_evolved_grid(&res.spec, &res.state, &ps, &qs, t)?;
        let sc = res
            .state
            .terms
            .iter()
            .map(|term| sc_nonhermitian_evolve(&res.spec, &SemiclassicalState::from_term(term), t, DEFAULT_DT))
            .collect::<Result<Vec<_>, _>>()?;
        let pert = res.state.terms.iter().map(|term| PerturbedGaussian::new(&res.spec, term, t)).collect::<Result<Vec<_>, _>>()?;
        let (mut d_sc, mut d_pert) = (0.0f64, 0.0f64);
        for (ip, &p) in ps.iter().enumerate() {
            for (iq, &q) in qs.iter().enumerate() {
                let x = Vector2::new(p, q);
                let e = exact[iq * ps.len() + ip].re;
                let s: f64 = sc.iter().map(|s| s.wigner(&x, hbar).re).sum();
                let w: f64 = pert.iter().map(|w| w.corrected(res.spec.gamma, &x).re).sum();
                d_sc = d_sc.max((s - e).abs());
                d_pert = d_pert.max((w - e).abs());
                table.push(vec![t, p, q, e, s, w]);
            }
        }
        summary.push(vec![t, d_sc, d_pert]);
    }
    Ok(vec![write(&table, out, "compare.csv")?, write(&summary, out, "compare_summary.csv")?])
}

#[derive(Debug, Serialize)]
struct CriterionJson {
    id: u8,
    title: &'static str,
    pass: bool,
    reports: Vec<OracleReport>,
}

fn oracle_check(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut results = Vec::new();
    let mut failed = Vec::new();
    for &id in &cfg.oracle.criteria {
        let c = run_criterion(id)?;
        let pass = c.pass();
        log::info!("criterion {id}: {}", if pass { "pass" } else { "FAIL" });
        if !pass {
            failed.push(id);
        }
        results.push(CriterionJson { id, title: c.title, pass, reports: c.reports });
    }
    let path = out.join("oracle_report.json");
    let text = serde_json::to_string_pretty(&results).expect("reports serialize") + "\n";
    std::fs::write(&path, text).map_err(|source| CliError::Io { path: path.clone(), source })?;
    if failed.is_empty() {
        Ok(vec![path])
    } else {
        Err(CliError::OracleFailure(failed))
    }
}
