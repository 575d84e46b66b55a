//! Phase-averaged displacement and the decoherence channels acting on probes.

use crate::error::{DqsError, Result};
use crate::fock::{real_displacement, DensityOp, ModeSpace, PureState, C64};
use crate::special_fn::gauss_hermite;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Upper limit on modes for the Gauss-Hermite product rule.
pub const MAX_JITTER_MODES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub alpha: f64,
    /// Number of equidistant phase nodes; `None` picks the exact count.
    #[serde(default)]
    pub phase_nodes: Option<usize>,
    #[serde(default)]
    pub jitter_sigma: f64,
    #[serde(default = "default_jitter_nodes")]
    pub jitter_nodes: usize,
}

fn default_jitter_nodes() -> usize {
    9
}

impl ChannelParams {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, phase_nodes: None, jitter_sigma: 0.0, jitter_nodes: default_jitter_nodes() }
    }

    pub fn with_jitter(mut self, sigma: f64, nodes: usize) -> Self {
        self.jitter_sigma = sigma;
        self.jitter_nodes = nodes;
        self
    }

    pub fn with_phase_nodes(mut self, nodes: usize) -> Self {
        self.phase_nodes = Some(nodes);
        self
    }
}

/// Node count above which the phase sum equals the continuous average: `2 Σ d_i + 1`.
pub fn exact_phase_nodes(space: &ModeSpace) -> usize {
    2 * space.cutoffs().iter().sum::<usize>() + 1
}

#[derive(Debug, Clone)]
pub struct ChannelOutput {
    pub state: DensityOp,
    pub phase_nodes: usize,
    /// Set when fewer nodes than [`exact_phase_nodes`] were requested.
    pub below_exactness: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    Loss { kappa_t: f64 },
    /// Heating with rate `kappa_t * nbar`.
    Heating { kappa_t: f64, nbar: f64 },
    Dephasing { gamma_t: f64 },
    Jitter { sigma: f64 },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            NoiseSpec::Loss { kappa_t } => vec![kappa_t],
            NoiseSpec::Heating { kappa_t, nbar } => vec![kappa_t, nbar],
            NoiseSpec::Dephasing { gamma_t } => vec![gamma_t],
            NoiseSpec::Jitter { sigma } => vec![sigma],
        };
        if v.iter().all(|x| x.is_finite() && *x >= 0.0) {
            Ok(())
        } else {
            Err(DqsError::InvalidParameter(format!("negative or non-finite noise strength in {self:?}")))
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            NoiseSpec::Loss { .. } => "loss",
            NoiseSpec::Heating { .. } => "heating",
            NoiseSpec::Dephasing { .. } => "dephasing",
            NoiseSpec::Jitter { .. } => "jitter",
        }
    }

    /// Effective first-order strength: `κt` for loss, `κt n̄` for heating.
    pub fn first_order_strength(&self) -> Option<f64> {
        match *self {
            NoiseSpec::Loss { kappa_t } => Some(kappa_t),
            NoiseSpec::Heating { kappa_t, nbar } => Some(kappa_t * nbar),
            _ => None,
        }
    }

    /// Ratio `strength/α²` that must stay small for the first-order expansion.
    pub fn validity_ratio(&self, alpha: f64) -> Option<f64> {
        self.first_order_strength().map(|s| s / (alpha * alpha))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(DqsError::InvalidParameter(format!("alpha = {alpha}")));
    }
    Ok(())
}

fn resolve_nodes(space: &ModeSpace, params: &ChannelParams) -> Result<(usize, bool)> {
    let exact = exact_phase_nodes(space);
    let n = params.phase_nodes.unwrap_or(exact);
    if n < 4 {
        return Err(DqsError::InvalidParameter(format!("phase_nodes = {n} below 4")));
    }
    Ok((n, n < exact))
}

fn mode_displacements(space: &ModeSpace, alpha: f64) -> Result<Vec<DMatrix<f64>>> {
    let mut cache: BTreeMap<usize, DMatrix<f64>> = BTreeMap::new();
    space
        .cutoffs()
        .iter()
        .map(|&d| {
            if let Some(m) = cache.get(&d) {
                return Ok(m.clone());
            }
            let (m, _, _) = real_displacement(alpha, d, None)?;
            cache.insert(d, m.clone());
            Ok(m)
        })
        .collect()
}

/// `D(α e^{iδ})` from the real `D(α)`.
fn rotate(d0: &DMatrix<f64>, delta: f64) -> DMatrix<C64> {
    DMatrix::from_fn(d0.nrows(), d0.ncols(), |j, k| C64::from_polar(d0[(j, k)], delta * (j as f64 - k as f64)))
}

/// `X ↦ A X A†` with `A = ⊗ ops`, applied mode by mode on columns.
fn conjugate(space: &ModeSpace, x: &DMatrix<C64>, ops: &[DMatrix<C64>]) -> DMatrix<C64> {
    let n = space.dim();
    let mut cur = x.clone();
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for _ in 0..2 {
        for col in 0..n {
            let mut c: Vec<C64> = cur.column(col).iter().copied().collect();
            for (mode, op) in ops.iter().enumerate() {
                apply_mode_into(space, &c, mode, op, &mut buf);
                std::mem::swap(&mut c, &mut buf);
            }
            cur.column_mut(col).copy_from_slice(&c);
        }
        cur = cur.adjoint();
    }
    cur
}

fn apply_mode_into(space: &ModeSpace, v: &[C64], mode: usize, op: &DMatrix<C64>, out: &mut [C64]) {
    let d = space.cutoff(mode);
    let stride = space.stride(mode);
    let block = d * stride;
    out.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
    for base in (0..v.len()).step_by(block) {
        for k in 0..d {
            for inner in 0..stride {
                let x = v[base + k * stride + inner];
                if x.re == 0.0 && x.im == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[base + j * stride + inner] += op[(j, k)] * x;
                }
            }
        }
    }
}

/// Sum over `nodes` equidistant global phases of `U_φ A U_φ† ρ U_φ A† U_φ†`.
///
/// `U_φ = e^{iφN}` only tags each matrix element with the charge `N_row − N_col`, so the
/// node sum keeps, for each input charge `q`, the output elements whose charge is
/// congruent to `q` modulo `nodes`.
fn phase_sum(space: &ModeSpace, rho: &DMatrix<C64>, ops: &[DMatrix<C64>], nodes: usize, out: &mut DMatrix<C64>, weight: f64) {
    let totals = space.total_numbers();
    let n = space.dim();
    let mut charges: BTreeMap<i64, DMatrix<C64>> = BTreeMap::new();
    for j in 0..n {
        for i in 0..n {
            let z = rho[(i, j)];
            if z.re == 0.0 && z.im == 0.0 {
                continue;
            }
            let q = totals[i] as i64 - totals[j] as i64;
            charges.entry(q).or_insert_with(|| DMatrix::zeros(n, n))[(i, j)] = z;
        }
    }
    let m = nodes as i64;
    for (q, part) in charges {
        let y = conjugate(space, &part, ops);
        for j in 0..n {
            for i in 0..n {
                let q_out = totals[i] as i64 - totals[j] as i64;
                if (q_out - q).rem_euclid(m) == 0 {
                    out[(i, j)] += y[(i, j)] * weight;
                }
            }
        }
    }
}

fn hermitize(m: DMatrix<C64>) -> DMatrix<C64> {
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// `ρ_α = (1/N_φ) Σ_k D(α, φ_k) ρ D(α, φ_k)†` with `D(α, φ) = exp(α(e^{iφ}a† − e^{−iφ}a))` on every mode.
pub fn phase_averaged_displacement(rho: &DensityOp, params: &ChannelParams) -> Result<ChannelOutput> {
    check_alpha(params.alpha)?;
    let space = rho.space();
    let (nodes, below) = resolve_nodes(space, params)?;
    let ops: Vec<DMatrix<C64>> = mode_displacements(space, params.alpha)?.iter().map(|d| rotate(d, 0.0)).collect();
    let mut out = DMatrix::zeros(space.dim(), space.dim());
    phase_sum(space, rho.matrix(), &ops, nodes, &mut out, 1.0);
    Ok(ChannelOutput {
        state: DensityOp::new(space.clone(), hermitize(out))?,
        phase_nodes: nodes,
        below_exactness: below,
    })
}

/// Like [`phase_averaged_displacement`] with independent Gaussian phase offsets of width
/// `jitter_sigma` on every mode, integrated by a Gauss-Hermite product rule.
pub fn phase_jitter_averaged_displacement(rho: &DensityOp, params: &ChannelParams) -> Result<ChannelOutput> {
    check_alpha(params.alpha)?;
    let space = rho.space();
    let modes = space.modes();
    if modes > MAX_JITTER_MODES {
        return Err(DqsError::InvalidParameter(format!(
            "jitter quadrature supports at most {MAX_JITTER_MODES} modes, got {modes}"
        )));
    }
    if params.jitter_nodes < 5 {
        return Err(DqsError::InvalidParameter(format!(
            "jitter_nodes = {} below 5",
            params.jitter_nodes
        )));
    }
    if !(params.jitter_sigma >= 0.0) {
        return Err(DqsError::InvalidParameter(format!("jitter sigma {}", params.jitter_sigma)));
    }
    if params.jitter_sigma == 0.0 || modes == 1 {
        return phase_averaged_displacement(rho, params);
    }
    let (nodes, below) = resolve_nodes(space, params)?;
    let d0 = mode_displacements(space, params.alpha)?;
    let (x, w) = gauss_hermite(params.jitter_nodes);
    let scale = std::f64::consts::SQRT_2 * params.jitter_sigma;
    let norm = PI.sqrt();
    let mut out = DMatrix::zeros(space.dim(), space.dim());
    let total = params.jitter_nodes.pow(modes as u32);
    for t in 0..total {
        let mut rest = t;
        let mut weight = 1.0;
        let mut ops = Vec::with_capacity(modes);
        for d in &d0 {
            let k = rest % params.jitter_nodes;
            rest /= params.jitter_nodes;
            weight *= w[k] / norm;
            ops.push(rotate(d, scale * x[k]));
        }
        phase_sum(space, rho.matrix(), &ops, nodes, &mut out, weight);
    }
    Ok(ChannelOutput {
        state: DensityOp::new(space.clone(), hermitize(out))?,
        phase_nodes: nodes,
        below_exactness: below,
    })
}

/// Diagonal of the phase-averaged displaced state for a pure probe, in the exact-average limit.
///
/// Works sector by sector in total excitation number, so the cost is a few real matrix
/// products per sector and no density matrix is formed.
pub fn phase_averaged_diagonal(state: &PureState, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let space = state.space();
    let d0 = mode_displacements(space, alpha)?;
    let amps = state.amplitudes();
    let mut diag = vec![0.0; space.dim()];
    let totals = space.total_numbers();
    let mut sectors: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, a) in amps.iter().enumerate() {
        if a.re != 0.0 || a.im != 0.0 {
            sectors.entry(totals[i]).or_default().push(i);
        }
    }
    if space.modes() == 2 {
        let (d1, d2) = (space.cutoff(0), space.cutoff(1));
        for (_, idx) in sectors {
            let k_lo = idx.iter().map(|&i| i / d2).min().unwrap_or(0);
            let k_hi = idx.iter().map(|&i| i / d2).max().unwrap_or(0);
            let rows = k_hi - k_lo + 1;
            let mut xr = DMatrix::<f64>::zeros(rows, d2);
            let mut xi = DMatrix::<f64>::zeros(rows, d2);
            for &i in &idx {
                let (k, l) = (i / d2, i % d2);
                let a = amps[i];
                for c in 0..d2 {
                    let t = d0[1][(c, l)];
                    xr[(k - k_lo, c)] += a.re * t;
                    xi[(k - k_lo, c)] += a.im * t;
                }
            }
            let left = d0[0].columns(k_lo, rows);
            let yr = left * &xr;
            let yi = left * &xi;
            for k in 0..d1 {
                for c in 0..d2 {
                    diag[k * d2 + c] += yr[(k, c)].powi(2) + yi[(k, c)].powi(2);
                }
            }
        }
    } else {
        let ops: Vec<DMatrix<C64>> = d0.iter().map(|d| rotate(d, 0.0)).collect();
        let mut buf = vec![C64::new(0.0, 0.0); space.dim()];
        for (_, idx) in sectors {
            let mut v = vec![C64::new(0.0, 0.0); space.dim()];
            for &i in &idx {
                v[i] = amps[i];
            }
            for (mode, op) in ops.iter().enumerate() {
                apply_mode_into(space, &v, mode, op, &mut buf);
                std::mem::swap(&mut v, &mut buf);
            }
            for (p, z) in diag.iter_mut().zip(&v) {
                *p += z.norm_sqr();
            }
        }
    }
    Ok(diag)
}

/// Multiplies `ρ_{nm}` by `Π_i exp(−γt (n_i − m_i)² / 2)`.
pub fn apply_dephasing(rho: &DensityOp, gamma_t: f64) -> Result<DensityOp> {
    if !(gamma_t >= 0.0) || !gamma_t.is_finite() {
        return Err(DqsError::InvalidParameter(format!("gamma_t = {gamma_t}")));
    }
    let space = rho.space();
    let occ: Vec<Vec<usize>> = (0..space.dim()).map(|i| space.occupations(i)).collect();
    let m = DMatrix::from_fn(space.dim(), space.dim(), |i, j| {
        let s: f64 = occ[i].iter().zip(&occ[j]).map(|(&a, &b)| (a as f64 - b as f64).powi(2)).sum();
        rho.matrix()[(i, j)] * (-0.5 * gamma_t * s).exp()
    });
    DensityOp::new(space.clone(), m)
}

/// Result of a first-order loss or heating step.
#[derive(Debug, Clone)]
pub struct FirstOrderOutput {
    /// Unit-trace state.
    pub state: DensityOp,
    /// `1 − Tr` before renormalization (truncation at the top level).
    pub trace_deficit: f64,
}

fn ladder_c(d: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let (a, ad) = crate::fock::ladder(d);
    (a.map(|x| C64::new(x, 0.0)), ad.map(|x| C64::new(x, 0.0)))
}

fn embed_all(space: &ModeSpace, f: impl Fn(usize) -> DMatrix<C64>) -> Result<Vec<DMatrix<C64>>> {
    (0..space.modes()).map(|m| crate::fock::embed_operator(&f(m), m, space)).collect()
}

fn finish_first_order(space: &ModeSpace, m: DMatrix<C64>) -> Result<FirstOrderOutput> {
    let m = hermitize(m);
    let tr = m.trace().re;
    let min_diag = (0..space.dim()).map(|i| m[(i, i)].re).fold(f64::INFINITY, f64::min);
    if min_diag < -1e-14 {
        return Err(DqsError::Validity(format!(
            "first-order channel produced negative population {min_diag:.3e}; strength too large"
        )));
    }
    let state = DensityOp::new(space.clone(), m / C64::new(tr, 0.0))?;
    Ok(FirstOrderOutput { state, trace_deficit: 1.0 - tr })
}

/// `ρ − κt Σ_i [½{n_i, ρ} − a_i ρ a_i†]`, renormalized.
pub fn apply_loss_first_order(rho: &DensityOp, kappa_t: f64) -> Result<FirstOrderOutput> {
    if !(kappa_t >= 0.0) || !kappa_t.is_finite() {
        return Err(DqsError::InvalidParameter(format!("kappa_t = {kappa_t}")));
    }
    let space = rho.space();
    let r = rho.matrix();
    let a = embed_all(space, |m| ladder_c(space.cutoff(m)).0)?;
    let mut out = r.clone();
    for ai in &a {
        let n = ai.adjoint() * ai;
        out -= ((&n * r + r * &n) * C64::new(0.5, 0.0) - ai * r * ai.adjoint()) * C64::new(kappa_t, 0.0);
    }
    finish_first_order(space, out)
}

/// `ρ(1 − M k̄t) − k̄t Σ_i [{n_i, ρ} − (a_i† ρ a_i + a_i ρ a_i†)]`, renormalized.
pub fn apply_heating_first_order(rho: &DensityOp, kbar_t: f64) -> Result<FirstOrderOutput> {
    if !(kbar_t >= 0.0) || !kbar_t.is_finite() {
        return Err(DqsError::InvalidParameter(format!("kbar_t = {kbar_t}")));
    }
    let space = rho.space();
    let r = rho.matrix();
    let a = embed_all(space, |m| ladder_c(space.cutoff(m)).0)?;
    let mut out = r * C64::new(1.0 - space.modes() as f64 * kbar_t, 0.0);
    for ai in &a {
        let ad = ai.adjoint();
        let n = &ad * ai;
        out -= (&n * r + r * &n - (&ad * r * ai + ai * r * &ad)) * C64::new(kbar_t, 0.0);
    }
    finish_first_order(space, out)
}

/// Applies a probe-level noise channel; jitter acts inside the displacement and is ignored here.
pub fn apply_probe_noise(rho: &DensityOp, noise: &NoiseSpec) -> Result<DensityOp> {
    noise.validate()?;
    match *noise {
        NoiseSpec::Loss { kappa_t } => Ok(apply_loss_first_order(rho, kappa_t)?.state),
        NoiseSpec::Heating { kappa_t, nbar } => Ok(apply_heating_first_order(rho, kappa_t * nbar)?.state),
        NoiseSpec::Dephasing { gamma_t } => apply_dephasing(rho, gamma_t),
        NoiseSpec::Jitter { .. } => Ok(rho.clone()),
    }
}
