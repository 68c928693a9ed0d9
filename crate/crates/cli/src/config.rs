//! Run configuration: one JSON document, every field optional, unknown keys
//! rejected. Dotted overrides (`--channel.gamma=0.5`) are applied to the
//! parsed document before it is checked.

use bgc_core::exact_channel::ChannelSpec;
use bgc_core::observables::moments_closed;
use bgc_core::phase_space::{cat_state, GaussianTerm, StateSum};
use bgc_core::BgcError;
use nalgebra::Vector2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub sigma: f64,
    pub gamma: f64,
    pub hbar: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { sigma: 1.0, gamma: 0.0, hbar: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TermConfig {
    pub p0: f64,
    pub q0: f64,
    pub dp: f64,
    pub dq: f64,
    pub g: f64,
    /// `[re, im]`
    pub weight: [f64; 2],
}

impl Default for TermConfig {
    fn default() -> Self {
        Self { p0: 0.0, q0: 0.0, dp: 0.0, dq: 0.0, g: 1.0, weight: [1.0, 0.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatConfig {
    /// `[p, q]` of each component.
    pub z1: [f64; 2],
    pub z2: [f64; 2],
    #[serde(default = "one")]
    pub g: f64,
}

fn one() -> f64 {
    1.0
}

/// Either an explicit list of terms or a two-component cat state. With
/// neither, a coherent state at the origin.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermConfig>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cat: Option<CatConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub t_max: f64,
    pub n_steps: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { t_max: 1.0, n_steps: 100 }
    }
}

/// Phase-space grid. Missing bounds default to ten standard deviations
/// (taken over the whole run) around the centres of the state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_max: Option<f64>,
    pub n_p: usize,
    pub n_q: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { p_min: None, p_max: None, q_min: None, q_max: None, n_p: 512, n_q: 512 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Exact,
    Pde,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveOptions {
    /// Write a snapshot every this many steps; defaults to first and last.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub every: Option<usize>,
    pub solver: Solver,
    /// Also write the characteristic function on a `(ξ, η)` grid.
    pub chi: bool,
    pub chi_n: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { every: None, solver: Solver::Exact, chi: false, chi_n: 128 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PurityOptions {
    /// Dephasing strengths to sweep; defaults to `channel.gamma`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,
    /// Diagonalize the reconstructed density matrix (the slow column).
    pub numerical: bool,
    pub q_half: f64,
    pub n_q: usize,
    pub eta_half: f64,
    pub n_eta: usize,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        let d = bgc_core::oracle::DensityGridParams::default();
        Self { gammas: None, numerical: true, q_half: d.q_max, n_q: d.n_q, eta_half: d.eta_max, n_eta: d.n_eta }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareOptions {
    /// Snapshot times; defaults to `time.t_max`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Points per axis of the comparison grid.
    pub n: usize,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { times: None, n: 41 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleOptions {
    pub criteria: Vec<u8>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { criteria: (1..=11).collect() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub channel: ChannelConfig,
    pub state: StateConfig,
    pub time: TimeConfig,
    pub grid: GridConfig,
    pub evolve: EvolveOptions,
    pub purity: PurityOptions,
    pub entropy: EntropyOptions,
    pub compare: CompareOptions,
    pub oracle: OracleOptions,
}

/// Everything a command needs, checked and converted to library types.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: ChannelSpec,
    pub state: StateSum,
    pub p_range: (f64, f64),
    pub q_range: (f64, f64),
}

pub fn parse_config(source: &str) -> Result<RunConfig, CliError> {
    parse_config_with(source, &[])
}

/// Parses `source`, applies `overrides` (each `--a.b.c=value`, value read as
/// JSON when it parses and as a string otherwise) and validates.
pub fn parse_config_with(source: &str, overrides: &[String]) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = if overrides.is_empty() {
        serde_json::from_str(source).map_err(config_error)?
    } else {
        let mut doc: Value = serde_json::from_str(source).map_err(config_error)?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        serde_json::from_value(doc).map_err(config_error)?
    };
    cfg.validate()?;
    Ok(cfg)
}

fn config_error(e: serde_json::Error) -> CliError {
    let message = e.to_string();
    // serde_json appends " at line L column C"; keep the message without it.
    let message = match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message,
    };
    CliError::Config { message, line: e.line(), column: e.column() }
}

fn apply_override(doc: &mut Value, raw: &str) -> Result<(), CliError> {
    let body = raw.strip_prefix("--").ok_or_else(|| CliError::Override(raw.into()))?;
    let (path, value) = body.split_once('=').ok_or_else(|| CliError::Override(raw.into()))?;
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(CliError::Override(raw.into()));
    }
    let value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.into()));
    let mut node = doc;
    for key in path.split('.') {
        if !node.is_object() {
            *node = Value::Object(Default::default());
        }
        node = node.as_object_mut().expect("just made an object").entry(key).or_insert(Value::Null);
    }
    *node = value;
    Ok(())
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Validation { field: field.into(), message: message.into() }
}

/// Attaches a config path to a library validation error.
fn core_at(prefix: &str, e: BgcError) -> CliError {
    match e {
        BgcError::InvalidParameter { field, .. } => invalid(format!("{prefix}{field}"), e.to_string()),
        other => invalid(prefix.trim_end_matches('.'), other.to_string()),
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.resolve().map(|_| ())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn channel_spec(&self) -> Result<ChannelSpec, CliError> {
        let c = &self.channel;
        ChannelSpec::new(c.sigma, c.gamma, c.hbar).map_err(|e| core_at("channel.", e))
    }

    pub fn state_sum(&self) -> Result<StateSum, CliError> {
        let hbar = self.channel.hbar;
        match (&self.state.terms, &self.state.cat) {
            (Some(_), Some(_)) => Err(invalid("state", "give either terms or cat, not both")),
            (None, Some(cat)) => {
                cat_state(Vector2::new(cat.z1[0], cat.z1[1]), Vector2::new(cat.z2[0], cat.z2[1]), cat.g, hbar).map_err(|e| core_at("state.cat.", e))
            }
            (terms, None) => {
                let default = [TermConfig::default()];
                let terms = terms.as_deref().unwrap_or(&default);
                if terms.is_empty() {
                    return Err(invalid("state.terms", "must contain at least one term"));
                }
                let built = terms
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        GaussianTerm::new(Vector2::new(t.p0, t.q0), Vector2::new(t.dp, t.dq), t.g, Complex64::new(t.weight[0], t.weight[1]))
                            .map_err(|e| core_at(&format!("state.terms[{i}]."), e))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                StateSum::new(built, hbar).map_err(|e| core_at("state.", e))
            }
        }
    }

    /// Validates every section and derives the default grid bounds.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let spec = self.channel_spec()?;
        let state = self.state_sum()?;
        let t = &self.time;
        if !(t.t_max >= 0.0 && t.t_max.is_finite()) {
            return Err(invalid("time.t_max", format!("t_max must be ≥ 0 (got {})", t.t_max)));
        }
        if t.n_steps == 0 {
            return Err(invalid("time.n_steps", "n_steps must be ≥ 1"));
        }
        let g = &self.grid;
        for (name, n) in [("grid.n_p", g.n_p), ("grid.n_q", g.n_q)] {
            if n < 5 {
                return Err(invalid(name, format!("must be ≥ 5 (got {n})")));
            }
        }
        let (p_auto, q_auto) = auto_bounds(&spec, &state, t.t_max)?;
        let p_range = (g.p_min.unwrap_or(p_auto.0), g.p_max.unwrap_or(p_auto.1));
        let q_range = (g.q_min.unwrap_or(q_auto.0), g.q_max.unwrap_or(q_auto.1));
        if !(p_range.0 < p_range.1) {
            return Err(invalid("grid.p_max", "p_max must exceed p_min"));
        }
        if !(q_range.0 < q_range.1) {
            return Err(invalid("grid.q_max", "q_max must exceed q_min"));
        }
        if self.evolve.every == Some(0) {
            return Err(invalid("evolve.every", "every must be ≥ 1"));
        }
        if self.evolve.chi_n < 2 {
            return Err(invalid("evolve.chi_n", "chi_n must be ≥ 2"));
        }
        for (name, list) in [("purity.gammas", &self.purity.gammas), ("entropy.gammas", &self.entropy.gammas)] {
            if let Some(gs) = list {
                if gs.is_empty() {
                    return Err(invalid(name, "must not be empty"));
                }
                if let Some(bad) = gs.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
                    return Err(invalid(name, format!("gamma must be ≥ 0 (got {bad})")));
                }
            }
        }
        let e = &self.entropy;
        if !(e.q_half > 0.0 && e.eta_half > 0.0) || e.n_q < 2 || e.n_eta < 2 {
            return Err(invalid("entropy", "density grid needs positive extents and at least two nodes per axis"));
        }
        if self.compare.n < 2 {
            return Err(invalid("compare.n", "n must be ≥ 2"));
        }
        if let Some(ts) = &self.compare.times {
            if let Some(bad) = ts.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
                return Err(invalid("compare.times", format!("times must be ≥ 0 (got {bad})")));
            }
        }
        if let Some(bad) = self.oracle.criteria.iter().find(|c| !(1..=11).contains(*c)) {
            return Err(invalid("oracle.criteria", format!("criteria are numbered 1 to 11 (got {bad})")));
        }
        Ok(Resolved { spec, state, p_range, q_range })
    }

    /// Uniform output times `t_k = k·t_max/n_steps`.
    pub fn times(&self) -> Vec<f64> {
        let n = self.time.n_steps;
        (0..=n).map(|k| self.time.t_max * k as f64 / n as f64).collect()
    }
}

/// Ten standard deviations around the moving centres, with the spread taken
/// at `t_max` (variances only grow).
type Range = (f64, f64);

fn auto_bounds(spec: &ChannelSpec, state: &StateSum, t_max: f64) -> Result<(Range, Range), CliError> {
    let (mut p_lo, mut p_hi, mut q_lo, mut q_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for term in &state.terms {
        let envelope = GaussianTerm::coherent(term.z0, term.g)?;
        let m = moments_closed(spec, &envelope, t_max)?;
        let (sp, sq) = (10.0 * m.var_p().sqrt(), 10.0 * m.var_q().sqrt());
        let (q_start, q_end) = (term.q0(), term.q0() + t_max * term.p0());
        p_lo = p_lo.min(term.p0() - sp);
        p_hi = p_hi.max(term.p0() + sp);
        q_lo = q_lo.min(q_start.min(q_end) - sq);
        q_hi = q_hi.max(q_start.max(q_end) + sq);
    }
    Ok(((p_lo, p_hi), (q_lo, q_hi)))
}
