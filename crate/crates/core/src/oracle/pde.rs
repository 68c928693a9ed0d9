//! Direct finite-difference solution of
//! `∂ₜW = −p∂_qW + (ħσ²/2)∂ₚ²W + (ħγ²/2)p²∂_q²W`.
//!
//! Second derivatives use the fourth-order five-point stencil. The transport
//! term uses a third-order upwind-biased stencil whose direction follows the
//! sign of `p` on each row. Values outside the box are taken to be zero.
//!
//! Two time integrators share the spatial operator:
//! * [`pde_evolve`]: classical RK4 under an explicit stability bound;
//! * [`pde_evolve_split`]: Strang splitting into a `p` sweep and a `q` sweep,
//!   each advanced by Crank–Nicolson with banded solves, optionally
//!   Richardson-extrapolated in `dt`. The degenerate `γ²p²` diffusion makes
//!   the explicit bound tiny on wide grids, which is why this variant exists.

use num_complex::Complex64;

use crate::error::{require, BgcError, Result};
use crate::exact_channel::{wigner_evolved_grid, ChannelSpec};
use crate::phase_space::StateSum;

/// Uniform grid including both end points; `values[ip·n_q + iq]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub n_p: usize,
    pub n_q: usize,
    pub values: Vec<Complex64>,
}

impl PhaseSpaceGrid {
    pub fn new(p_range: (f64, f64), q_range: (f64, f64), n_p: usize, n_q: usize) -> Result<Self> {
        if n_p < 5 || n_q < 5 {
            return Err(BgcError::Grid(format!("need at least 5 points per axis, got {n_p}×{n_q}")));
        }
        if !(p_range.1 > p_range.0 && q_range.1 > q_range.0) {
            return Err(BgcError::Grid("empty range".into()));
        }
        Ok(Self {
            p_min: p_range.0,
            p_max: p_range.1,
            q_min: q_range.0,
            q_max: q_range.1,
            n_p,
            n_q,
            values: vec![Complex64::new(0.0, 0.0); n_p * n_q],
        })
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(p_range: (f64, f64), q_range: (f64, f64), n_p: usize, n_q: usize, f: F) -> Result<Self> {
        let mut g = Self::new(p_range, q_range, n_p, n_q)?;
        for ip in 0..n_p {
            let p = g.p(ip);
            for iq in 0..n_q {
                g.values[ip * n_q + iq] = f(p, g.q(iq));
            }
        }
        Ok(g)
    }

    /// The exact evolved Wigner function sampled on the same nodes.
    pub fn exact(spec: &ChannelSpec, state: &StateSum, p_range: (f64, f64), q_range: (f64, f64), n_p: usize, n_q: usize, t: f64) -> Result<Self> {
        let mut g = Self::new(p_range, q_range, n_p, n_q)?;
        let ps: Vec<f64> = (0..n_p).map(|i| g.p(i)).collect();
        let qs: Vec<f64> = (0..n_q).map(|i| g.q(i)).collect();
        let w = wigner_evolved_grid(spec, state, &ps, &qs, t)?;
        for ip in 0..n_p {
            for iq in 0..n_q {
                g.values[ip * n_q + iq] = w[iq * n_p + ip];
            }
        }
        Ok(g)
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.n_p - 1) as f64
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n_q - 1) as f64
    }

    pub fn p(&self, i: usize) -> f64 {
        self.p_min + self.dp() * i as f64
    }

    pub fn q(&self, j: usize) -> f64 {
        self.q_min + self.dq() * j as f64
    }

    pub fn at(&self, ip: usize, iq: usize) -> Complex64 {
        self.values[ip * self.n_q + iq]
    }

    /// `Σ W·ΔpΔq`.
    pub fn mass(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * (self.dp() * self.dq())
    }

    /// `2πħ·Σ|W|²·ΔpΔq`.
    pub fn purity(&self, hbar: f64) -> f64 {
        2.0 * std::f64::consts::PI * hbar * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dp() * self.dq()
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest edge value relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let (np, nq) = (self.n_p, self.n_q);
        let mut edge: f64 = 0.0;
        for ip in 0..np {
            edge = edge.max(self.at(ip, 0).norm()).max(self.at(ip, nq - 1).norm());
        }
        for iq in 0..nq {
            edge = edge.max(self.at(0, iq).norm()).max(self.at(np - 1, iq).norm());
        }
        edge / self.peak().max(f64::MIN_POSITIVE)
    }

    pub fn linf_distance(&self, other: &Self) -> Result<f64> {
        if (self.n_p, self.n_q) != (other.n_p, other.n_q) {
            return Err(BgcError::Grid(format!("{}×{} vs {}×{}", self.n_p, self.n_q, other.n_p, other.n_q)));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    fn split(&self) -> (Vec<f64>, Vec<f64>) {
        (self.values.iter().map(|v| v.re).collect(), self.values.iter().map(|v| v.im).collect())
    }

    fn with_parts(&self, re: &[f64], im: &[f64]) -> Self {
        Self { values: re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect(), ..self.clone() }
    }
}

const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
/// `∂` on offsets −2..=1, for information travelling towards `+q`.
const UP_POS: [f64; 5] = [1.0 / 6.0, -1.0, 0.5, 1.0 / 3.0, 0.0];
/// Mirror image on offsets −1..=2.
const UP_NEG: [f64; 5] = [0.0, -1.0 / 3.0, -0.5, 1.0, -1.0 / 6.0];

/// Five-point stencil of the `q` operator on row `p`.
fn q_stencil(spec: &ChannelSpec, p: f64, dq: f64) -> [f64; 5] {
    let up = if p >= 0.0 { &UP_POS } else { &UP_NEG };
    let diff = 0.5 * spec.hbar * spec.gamma * spec.gamma * p * p / (dq * dq);
    std::array::from_fn(|k| -p * up[k] / dq + diff * D2[k])
}

fn p_stencil(spec: &ChannelSpec, dp: f64) -> [f64; 5] {
    let diff = 0.5 * spec.hbar * spec.sigma * spec.sigma / (dp * dp);
    std::array::from_fn(|k| diff * D2[k])
}

/// `out = L f` for the full operator on a real field.
fn apply_operator(spec: &ChannelSpec, grid: &PhaseSpaceGrid, f: &[f64], out: &mut [f64]) {
    let (np, nq) = (grid.n_p, grid.n_q);
    let ps = p_stencil(spec, grid.dp());
    for ip in 0..np {
        let qs = q_stencil(spec, grid.p(ip), grid.dq());
        let row = &f[ip * nq..(ip + 1) * nq];
        let o = &mut out[ip * nq..(ip + 1) * nq];
        apply_band_row(&qs, row, o);
        for (k, c) in ps.iter().enumerate() {
            let jp = ip as isize + k as isize - 2;
            if jp < 0 || jp >= np as isize || *c == 0.0 {
                continue;
            }
            let src = &f[jp as usize * nq..(jp as usize + 1) * nq];
            for (x, s) in o.iter_mut().zip(src) {
                *x += c * s;
            }
        }
    }
}

/// `out[i] = Σ_k s[k]·row[i+k−2]` with zero outside.
fn apply_band_row(s: &[f64; 5], row: &[f64], out: &mut [f64]) {
    let n = row.len();
    for i in 0..n {
        let mut acc = 0.0;
        for (k, c) in s.iter().enumerate() {
            let j = i as isize + k as isize - 2;
            if j >= 0 && (j as usize) < n {
                acc += c * row[j as usize];
            }
        }
        out[i] = acc;
    }
}

/// Largest stable RK4 step, with the 0.4 safety factor.
pub fn stability_bound(spec: &ChannelSpec, grid: &PhaseSpaceGrid) -> f64 {
    let pmax = grid.p_min.abs().max(grid.p_max.abs());
    let (dp, dq) = (grid.dp(), grid.dq());
    let mut bound = f64::INFINITY;
    if pmax > 0.0 {
        bound = bound.min(dq / pmax);
    }
    let s2 = spec.hbar * spec.sigma * spec.sigma;
    if s2 > 0.0 {
        bound = bound.min(dp * dp / s2);
    }
    let g2 = spec.hbar * spec.gamma * spec.gamma * pmax * pmax;
    if g2 > 0.0 {
        bound = bound.min(dq * dq / g2);
    }
    0.4 * bound
}

fn report_leak(w0: &PhaseSpaceGrid, w: &PhaseSpaceGrid) {
    let leak = (w.mass() - w0.mass()).norm();
    if leak > 1e-6 {
        log::warn!("boundary leak: mass changed by {leak:.3e}");
    } else {
        log::debug!("mass change {leak:.3e}");
    }
}

/// RK4 method of lines. `dt` above [`stability_bound`] is rejected.
pub fn pde_evolve(spec: &ChannelSpec, w0: &PhaseSpaceGrid, t: f64, dt: f64) -> Result<PhaseSpaceGrid> {
    if t < 0.0 {
        return Err(BgcError::NegativeTime(t));
    }
    require(dt > 0.0, "dt", "> 0", dt)?;
    let bound = stability_bound(spec, w0);
    if dt > bound {
        return Err(BgcError::UnstableStep { dt, bound });
    }
    let n = (t / dt).ceil() as usize;
    if n == 0 {
        return Ok(w0.clone());
    }
    let h = t / n as f64;
    let (mut re, mut im) = w0.split();
    let has_im = im.iter().any(|v| *v != 0.0);
    let len = re.len();
    let mut scratch = vec![vec![0.0; len]; 5];
    rk4_real(spec, w0, &mut re, h, n, &mut scratch);
    if has_im {
        rk4_real(spec, w0, &mut im, h, n, &mut scratch);
    }
    let out = w0.with_parts(&re, &im);
    report_leak(w0, &out);
    Ok(out)
}

fn rk4_real(spec: &ChannelSpec, grid: &PhaseSpaceGrid, f: &mut [f64], h: f64, n: usize, s: &mut [Vec<f64>]) {
    let len = f.len();
    for _ in 0..n {
        let (k1, rest) = s.split_at_mut(1);
        let (k2, rest) = rest.split_at_mut(1);
        let (k3, rest) = rest.split_at_mut(1);
        let (k4, tmp) = rest.split_at_mut(1);
        let (k1, k2, k3, k4, tmp) = (&mut k1[0], &mut k2[0], &mut k3[0], &mut k4[0], &mut tmp[0]);
        apply_operator(spec, grid, f, k1);
        for i in 0..len {
            tmp[i] = f[i] + 0.5 * h * k1[i];
        }
        apply_operator(spec, grid, tmp, k2);
        for i in 0..len {
            tmp[i] = f[i] + 0.5 * h * k2[i];
        }
        apply_operator(spec, grid, tmp, k3);
        for i in 0..len {
            tmp[i] = f[i] + h * k3[i];
        }
        apply_operator(spec, grid, tmp, k4);
        for i in 0..len {
            f[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// LU factors of a matrix with two sub- and two super-diagonals, without
/// pivoting. The Crank–Nicolson matrices here are close to diagonally dominant.
#[derive(Debug, Clone)]
struct BandLu {
    /// `band[i][k]` holds entry `(i, i+k−2)`; after factoring, `k < 2` are the
    /// multipliers of `L` and `k ≥ 2` the row of `U`.
    band: Vec<[f64; 5]>,
}

impl BandLu {
    fn factor(mut band: Vec<[f64; 5]>) -> Result<Self> {
        let n = band.len();
        for i in 0..n {
            let piv = band[i][2];
            if piv.abs() < 1e-300 {
                return Err(BgcError::Grid("singular implicit matrix".into()));
            }
            for r in i + 1..(i + 3).min(n) {
                // Entry (r, i) sits at k = i − r + 2.
                let kr = i + 2 - r;
                let m = band[r][kr] / piv;
                band[r][kr] = m;
                for j in i + 1..(i + 3).min(n) {
                    let kj_r = j + 2 - r;
                    let kj_i = j + 2 - i;
                    band[r][kj_r] -= m * band[i][kj_i];
                }
            }
        }
        Ok(Self { band })
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for r in 1..n {
            let lo = r.saturating_sub(2);
            for i in lo..r {
                x[r] -= self.band[r][i + 2 - r] * x[i];
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..(i + 3).min(n) {
                acc -= self.band[i][j + 2 - i] * x[j];
            }
            x[i] = acc / self.band[i][2];
        }
    }

    /// Solves for every column of a row-major block at once, treating each
    /// row of the block as one unknown.
    fn solve_rows(&self, x: &mut [f64], width: usize) {
        let n = self.band.len();
        for r in 1..n {
            let lo = r.saturating_sub(2);
            for i in lo..r {
                let m = self.band[r][i + 2 - r];
                let (head, tail) = x.split_at_mut(r * width);
                let src = &head[i * width..(i + 1) * width];
                for (d, s) in tail[..width].iter_mut().zip(src) {
                    *d -= m * s;
                }
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..(i + 3).min(n) {
                let u = self.band[i][j + 2 - i];
                let (head, tail) = x.split_at_mut(j * width);
                let src = &tail[..width];
                for (d, s) in head[i * width..(i + 1) * width].iter_mut().zip(src) {
                    *d -= u * s;
                }
            }
            let piv = 1.0 / self.band[i][2];
            for d in &mut x[i * width..(i + 1) * width] {
                *d *= piv;
            }
        }
    }
}

/// `I + c·S` as a band for a constant stencil `S` on `n` points.
fn shifted_band(s: &[f64; 5], c: f64, n: usize) -> Vec<[f64; 5]> {
    (0..n)
        .map(|i| {
            std::array::from_fn(|k| {
                let j = i as isize + k as isize - 2;
                if j < 0 || j >= n as isize {
                    0.0
                } else {
                    c * s[k] + if k == 2 { 1.0 } else { 0.0 }
                }
            })
        })
        .collect()
}

/// Strang-split Crank–Nicolson stepper with precomputed factorizations.
struct SplitStepper {
    n_p: usize,
    n_q: usize,
    p_explicit: [f64; 5],
    p_lu: BandLu,
    q_explicit: Vec<[f64; 5]>,
    q_lu: Vec<BandLu>,
}

impl SplitStepper {
    fn new(spec: &ChannelSpec, grid: &PhaseSpaceGrid, dt: f64) -> Result<Self> {
        let ps = p_stencil(spec, grid.dp());
        // Half step in p: CN weights ±dt/4.
        let p_explicit: [f64; 5] = std::array::from_fn(|k| 0.25 * dt * ps[k]);
        let p_lu = BandLu::factor(shifted_band(&ps, -0.25 * dt, grid.n_p))?;
        let mut q_explicit = Vec::with_capacity(grid.n_p);
        let mut q_lu = Vec::with_capacity(grid.n_p);
        for ip in 0..grid.n_p {
            let qs = q_stencil(spec, grid.p(ip), grid.dq());
            q_explicit.push(std::array::from_fn(|k| 0.5 * dt * qs[k]));
            q_lu.push(BandLu::factor(shifted_band(&qs, -0.5 * dt, grid.n_q))?);
        }
        Ok(Self { n_p: grid.n_p, n_q: grid.n_q, p_explicit, p_lu, q_explicit, q_lu })
    }

    fn p_half(&self, f: &mut [f64], tmp: &mut [f64]) {
        let (np, nq) = (self.n_p, self.n_q);
        tmp.copy_from_slice(f);
        for ip in 0..np {
            for (k, c) in self.p_explicit.iter().enumerate() {
                let jp = ip as isize + k as isize - 2;
                if jp < 0 || jp >= np as isize {
                    continue;
                }
                let jp = jp as usize;
                let dst = &mut tmp[ip * nq..(ip + 1) * nq];
                for (d, s) in dst.iter_mut().zip(&f[jp * nq..(jp + 1) * nq]) {
                    *d += c * s;
                }
            }
        }
        self.p_lu.solve_rows(tmp, nq);
        f.copy_from_slice(tmp);
    }

    fn q_full(&self, f: &mut [f64], row_tmp: &mut [f64]) {
        let nq = self.n_q;
        for ip in 0..self.n_p {
            let row = &mut f[ip * nq..(ip + 1) * nq];
            let s = &self.q_explicit[ip];
            let mut shifted = [0.0; 5];
            shifted.copy_from_slice(s);
            shifted[2] += 1.0;
            apply_band_row(&shifted, row, row_tmp);
            self.q_lu[ip].solve(row_tmp);
            row.copy_from_slice(row_tmp);
        }
    }

    fn step(&self, f: &mut [f64], tmp: &mut [f64], row_tmp: &mut [f64]) {
        self.p_half(f, tmp);
        self.q_full(f, row_tmp);
        self.p_half(f, tmp);
    }
}

fn split_run(spec: &ChannelSpec, w0: &PhaseSpaceGrid, t: f64, steps: usize) -> Result<PhaseSpaceGrid> {
    let stepper = SplitStepper::new(spec, w0, t / steps as f64)?;
    let (mut re, mut im) = w0.split();
    let mut tmp = vec![0.0; re.len()];
    let mut row_tmp = vec![0.0; w0.n_q];
    let has_im = im.iter().any(|v| *v != 0.0);
    for _ in 0..steps {
        stepper.step(&mut re, &mut tmp, &mut row_tmp);
        if has_im {
            stepper.step(&mut im, &mut tmp, &mut row_tmp);
        }
    }
    Ok(w0.with_parts(&re, &im))
}

/// Time integration settings for [`pde_evolve_split`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOptions {
    pub steps: usize,
    /// Combine `steps` and `2·steps` runs as `(4·fine − coarse)/3`.
    pub richardson: bool,
}

impl Default for SplitOptions {
    fn default() -> Self {
        Self { steps: 100, richardson: true }
    }
}

pub fn pde_evolve_split(spec: &ChannelSpec, w0: &PhaseSpaceGrid, t: f64, opts: SplitOptions) -> Result<PhaseSpaceGrid> {
    if t < 0.0 {
        return Err(BgcError::NegativeTime(t));
    }
    require(opts.steps > 0, "steps", "> 0", opts.steps as f64)?;
    if t == 0.0 {
        return Ok(w0.clone());
    }
    let fine = split_run(spec, w0, t, if opts.richardson { 2 * opts.steps } else { opts.steps })?;
    let out = if opts.richardson {
        let coarse = split_run(spec, w0, t, opts.steps)?;
        let values = fine.values.iter().zip(&coarse.values).map(|(f, c)| (4.0 * f - c) / 3.0).collect();
        PhaseSpaceGrid { values, ..fine }
    } else {
        fine
    };
    report_leak(w0, &out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::GaussianTerm;
    use nalgebra::Vector2;

    fn coherent_grid(p0: f64, q0: f64, n: usize) -> (PhaseSpaceGrid, GaussianTerm) {
        let term = GaussianTerm::coherent(Vector2::new(p0, q0), 1.0).unwrap();
        let g = PhaseSpaceGrid::from_fn((-6.0, 6.0), (-10.0, 10.0), n, n, |p, q| term.wigner(&Vector2::new(p, q), 1.0)).unwrap();
        (g, term)
    }

    #[test]
    fn band_lu_solves() {
        let n = 9;
        let s = [0.1, -0.3, 2.0, 0.4, -0.2];
        let lu = BandLu::factor(shifted_band(&s, 1.0, n)).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut shifted = s;
        shifted[2] += 1.0;
        let mut b = vec![0.0; n];
        apply_band_row(&shifted, &x, &mut b);
        let mut y = b.clone();
        lu.solve(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-13);
        }
        // Block form, three identical columns.
        let mut block: Vec<f64> = b.iter().flat_map(|v| [*v, 2.0 * v, -v]).collect();
        lu.solve_rows(&mut block, 3);
        for i in 0..n {
            assert!((block[3 * i] - x[i]).abs() < 1e-13);
            assert!((block[3 * i + 1] - 2.0 * x[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn upwind_stencils_are_third_order() {
        for s in [&UP_POS, &UP_NEG] {
            for m in 0..4 {
                let d: f64 = s.iter().enumerate().map(|(k, c)| c * ((k as f64 - 2.0).powi(m))).sum();
                let expect = if m == 1 { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-14, "moment {m}");
            }
        }
    }

    #[test]
    fn rejects_unstable_step() {
        let spec = ChannelSpec::new(1.0, 1.0, 1.0).unwrap();
        let (g, _) = coherent_grid(0.0, 0.0, 33);
        let bound = stability_bound(&spec, &g);
        assert!(matches!(pde_evolve(&spec, &g, 0.1, 2.0 * bound), Err(BgcError::UnstableStep { .. })));
    }

    #[test]
    fn pure_transport_shears() {
        let spec = ChannelSpec::new(0.0, 0.0, 1.0).unwrap();
        let (g, term) = coherent_grid(1.0, -1.0, 161);
        let t = 0.5;
        let dt = stability_bound(&spec, &g);
        let out = pde_evolve(&spec, &g, t, dt).unwrap();
        let exact = PhaseSpaceGrid::from_fn((-6.0, 6.0), (-10.0, 10.0), 161, 161, |p, q| term.wigner(&Vector2::new(p, q - t * p), 1.0)).unwrap();
        assert!(out.linf_distance(&exact).unwrap() < 2e-3);
        assert!((out.mass() - g.mass()).norm() < 1e-10);
    }

    #[test]
    fn explicit_and_split_agree() {
        let spec = ChannelSpec::new(1.0, 0.5, 1.0).unwrap();
        let (g, _) = coherent_grid(0.3, 0.0, 65);
        let t = 0.3;
        let a = pde_evolve(&spec, &g, t, stability_bound(&spec, &g)).unwrap();
        let b = pde_evolve_split(&spec, &g, t, SplitOptions { steps: 40, richardson: true }).unwrap();
        assert!(a.linf_distance(&b).unwrap() < 1e-5, "{}", a.linf_distance(&b).unwrap());
    }

    #[test]
    fn mass_conserved_and_purity_decreases() {
        let spec = ChannelSpec::new(1.0, 1.0, 1.0).unwrap();
        let term = GaussianTerm::coherent(Vector2::new(0.0, 0.0), 1.0).unwrap();
        let g = PhaseSpaceGrid::from_fn((-10.0, 10.0), (-25.0, 25.0), 129, 257, |p, q| term.wigner(&Vector2::new(p, q), 1.0)).unwrap();
        let mut prev = g.purity(1.0);
        let mut w = g.clone();
        for _ in 0..5 {
            w = pde_evolve_split(&spec, &w, 0.2, SplitOptions { steps: 10, richardson: false }).unwrap();
            let pur = w.purity(1.0);
            assert!(pur <= prev + 1e-12);
            prev = pur;
        }
        assert!((w.mass() - g.mass()).norm() < 1e-9, "{} vs {}", w.mass(), g.mass());
    }
}
