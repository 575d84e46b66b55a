use super::space::ModeSpace;
use super::C64;
use crate::error::{DqsError, Result};
use crate::special_fn::log_factorial;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Default bound on the probability lost when truncating an ideal state.
pub const DEFAULT_LEAKAGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn of(n: usize) -> Self {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Ideal single-mode probe state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Fock { n: usize },
    SqueezedVacuum { r: f64 },
    Coherent { re: f64, im: f64 },
    Cat { gamma: f64, parity: Parity },
}

impl StateSpec {
    pub fn fock(n: usize) -> Self {
        StateSpec::Fock { n }
    }

    pub fn squeezed(r: f64) -> Self {
        StateSpec::SqueezedVacuum { r }
    }

    /// Squeezed vacuum with `sinh² r = nbar`.
    pub fn squeezed_with_mean(nbar: f64) -> Self {
        StateSpec::SqueezedVacuum { r: nbar.sqrt().asinh() }
    }

    pub fn coherent(amplitude: C64) -> Self {
        StateSpec::Coherent { re: amplitude.re, im: amplitude.im }
    }

    pub fn cat(gamma: f64, parity: Parity) -> Self {
        StateSpec::Cat { gamma, parity }
    }

    /// Even cat with `gamma² tanh gamma² = nbar`.
    pub fn cat_with_mean(nbar: f64) -> Self {
        StateSpec::Cat { gamma: cat_gamma_for_mean(nbar), parity: Parity::Even }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            StateSpec::Fock { .. } => true,
            StateSpec::SqueezedVacuum { r } => r.is_finite() && r >= 0.0,
            StateSpec::Coherent { re, im } => re.is_finite() && im.is_finite(),
            StateSpec::Cat { gamma, parity } => {
                gamma.is_finite() && (gamma > 0.0 || (gamma == 0.0 && parity == Parity::Even))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(DqsError::InvalidParameter(format!("invalid state parameters {self:?}")))
        }
    }

    /// Mean excitation number of the ideal (untruncated) state.
    pub fn mean_occupation(&self) -> f64 {
        match *self {
            StateSpec::Fock { n } => n as f64,
            StateSpec::SqueezedVacuum { r } => r.sinh().powi(2),
            StateSpec::Coherent { re, im } => re * re + im * im,
            StateSpec::Cat { gamma, parity } => {
                let g2 = gamma * gamma;
                match parity {
                    Parity::Even => g2 * g2.tanh(),
                    Parity::Odd => g2 / g2.tanh(),
                }
            }
        }
    }

    pub fn definite_parity(&self) -> Option<Parity> {
        match *self {
            StateSpec::Fock { n } => Some(Parity::of(n)),
            StateSpec::SqueezedVacuum { .. } => Some(Parity::Even),
            StateSpec::Cat { parity, .. } => Some(parity),
            StateSpec::Coherent { re, im } if re == 0.0 && im == 0.0 => Some(Parity::Even),
            StateSpec::Coherent { .. } => None,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            StateSpec::Fock { .. } => "fock",
            StateSpec::SqueezedVacuum { .. } => "squeezed_vacuum",
            StateSpec::Coherent { .. } => "coherent",
            StateSpec::Cat { .. } => "cat",
        }
    }
}

/// Solves `g² tanh g² = nbar` for `g ≥ 0`.
pub fn cat_gamma_for_mean(nbar: f64) -> f64 {
    if nbar <= 0.0 {
        return 0.0;
    }
    // x tanh x is increasing; Newton on x = g² from a bracket-safe start
    let mut x = nbar.max(nbar.sqrt());
    for _ in 0..100 {
        let t = x.tanh();
        let f = x * t - nbar;
        let df = t + x * (1.0 - t * t);
        let step = f / df;
        x = (x - step).max(0.5 * x);
        if step.abs() < 1e-15 * x {
            break;
        }
    }
    x.sqrt()
}

/// Normalized amplitudes on a [`ModeSpace`].
///
/// `leakage` is the probability the ideal state had outside the truncated space; the
/// stored amplitudes are renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    space: ModeSpace,
    amplitudes: DVector<C64>,
    leakage: f64,
}

impl PureState {
    pub fn new(space: ModeSpace, amplitudes: DVector<C64>, leakage: f64) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(DqsError::Dimension(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                space.dim()
            )));
        }
        let norm = amplitudes.norm_squared();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(DqsError::InvalidState(format!("amplitudes have norm² {norm}")));
        }
        if !(0.0..=1.0).contains(&leakage) {
            return Err(DqsError::InvalidState(format!("leakage {leakage} outside [0, 1]")));
        }
        Ok(Self { space, amplitudes, leakage })
    }

    /// Normalizes `amplitudes`; fails on a zero vector.
    pub fn normalized(space: ModeSpace, mut amplitudes: DVector<C64>, leakage: f64) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(DqsError::InvalidState("cannot normalize a zero vector".into()));
        }
        amplitudes /= C64::new(norm, 0.0);
        Self::new(space, amplitudes, leakage)
    }

    pub fn basis(space: ModeSpace, occupations: &[usize]) -> Result<Self> {
        let idx = space.index(occupations).ok_or_else(|| {
            DqsError::InvalidState(format!("occupations {occupations:?} outside {:?}", space.cutoffs()))
        })?;
        let mut amps = DVector::zeros(space.dim());
        amps[idx] = C64::new(1.0, 0.0);
        Self::new(space, amps, 0.0)
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn to_density(&self) -> DensityOp {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOp { space: self.space.clone(), matrix: m, trace_deficit: 0.0 }
    }

    /// Weight in each total-number parity sector, (even, odd).
    pub fn parity_weights(&self) -> (f64, f64) {
        parity_weights(&self.space, self.amplitudes.iter().enumerate().map(|(i, a)| (i, a.norm_sqr())))
    }

    pub fn definite_parity(&self) -> Option<Parity> {
        definite(self.parity_weights())
    }
}

/// Density operator on a [`ModeSpace`]; `trace + trace_deficit = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOp {
    space: ModeSpace,
    matrix: DMatrix<C64>,
    trace_deficit: f64,
}

impl DensityOp {
    /// Wraps a matrix; the deficit is read off the trace.
    pub fn new(space: ModeSpace, matrix: DMatrix<C64>) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(DqsError::Dimension(format!(
                "density matrix is {}x{}, space dimension {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let herm = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-12 * scale {
            return Err(DqsError::InvalidState(format!("density matrix not Hermitian ({herm:.2e})")));
        }
        let tr = matrix.trace();
        if tr.re > 1.0 + 1e-9 || tr.re < -1e-12 {
            return Err(DqsError::InvalidState(format!("density matrix trace {}", tr.re)));
        }
        Ok(Self { space, matrix, trace_deficit: (1.0 - tr.re).max(0.0) })
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.space.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Rescales to unit trace.
    pub fn renormalized(&self) -> Self {
        let t = self.trace();
        Self {
            space: self.space.clone(),
            matrix: &self.matrix / C64::new(t, 0.0),
            trace_deficit: 0.0,
        }
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn parity_weights(&self) -> (f64, f64) {
        parity_weights(&self.space, (0..self.space.dim()).map(|i| (i, self.matrix[(i, i)].re)))
    }

    /// Parity of the state when it has no coherences between parity sectors.
    pub fn definite_parity(&self) -> Option<Parity> {
        definite(self.parity_weights())
    }
}

fn parity_weights(space: &ModeSpace, weights: impl Iterator<Item = (usize, f64)>) -> (f64, f64) {
    let mut even = 0.0;
    let mut odd = 0.0;
    for (i, w) in weights {
        if space.total_number(i) % 2 == 0 {
            even += w;
        } else {
            odd += w;
        }
    }
    (even, odd)
}

fn definite((even, odd): (f64, f64)) -> Option<Parity> {
    let total = even + odd;
    if odd <= 1e-12 * total {
        Some(Parity::Even)
    } else if even <= 1e-12 * total {
        Some(Parity::Odd)
    } else {
        None
    }
}

fn coherent_amplitudes(z: C64, cutoff: usize) -> Vec<C64> {
    let r = z.norm();
    if r == 0.0 {
        let mut v = vec![C64::new(0.0, 0.0); cutoff];
        v[0] = C64::new(1.0, 0.0);
        return v;
    }
    let (lr, phi) = (r.ln(), z.arg());
    (0..cutoff)
        .map(|n| {
            let logmag = -0.5 * r * r + n as f64 * lr - 0.5 * log_factorial(n as u64);
            C64::from_polar(logmag.exp(), phi * n as f64)
        })
        .collect()
}

/// Ideal amplitudes truncated to `cutoff` levels and their total weight.
fn ideal_amplitudes(spec: &StateSpec, cutoff: usize) -> Result<(Vec<C64>, f64)> {
    spec.validate()?;
    let zero = C64::new(0.0, 0.0);
    let amps = match *spec {
        StateSpec::Fock { n } => {
            let mut v = vec![zero; cutoff];
            if n < cutoff {
                v[n] = C64::new(1.0, 0.0);
            }
            v
        }
        StateSpec::SqueezedVacuum { r } => {
            let mut v = vec![zero; cutoff];
            let t = r.tanh();
            let pref = -0.5 * r.cosh().ln();
            v[0] = C64::new(pref.exp(), 0.0);
            if t > 0.0 {
                let lt = t.ln();
                let mut k = 1;
                while 2 * k < cutoff {
                    let logmag = pref + k as f64 * lt + 0.5 * log_factorial(2 * k as u64)
                        - k as f64 * std::f64::consts::LN_2
                        - log_factorial(k as u64);
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    v[2 * k] = C64::new(sign * logmag.exp(), 0.0);
                    k += 1;
                }
            }
            v
        }
        StateSpec::Coherent { re, im } => coherent_amplitudes(C64::new(re, im), cutoff),
        StateSpec::Cat { gamma, parity } => {
            let g2 = gamma * gamma;
            let norm = match parity {
                Parity::Even => 2.0 * (1.0 + (-2.0 * g2).exp()),
                Parity::Odd => -2.0 * (-2.0 * g2).exp_m1(),
            };
            let c = coherent_amplitudes(C64::new(gamma, 0.0), cutoff);
            c.into_iter()
                .enumerate()
                .map(|(n, a)| if Parity::of(n) == parity { a * (2.0 / norm.sqrt()) } else { zero })
                .collect()
        }
    };
    let weight: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    Ok((amps, weight))
}

/// Truncated single-mode probe; fails when more than `tol` of the ideal state is lost.
pub fn make_single_mode_state(spec: &StateSpec, cutoff: usize, tol: f64) -> Result<PureState> {
    let space = ModeSpace::new(vec![cutoff])?;
    let (amps, weight) = ideal_amplitudes(spec, cutoff)?;
    let leakage = (1.0 - weight).max(0.0);
    if leakage > tol {
        return Err(DqsError::Truncation {
            leakage,
            tolerance: tol,
            context: format!("{spec:?} at cutoff {cutoff}"),
        });
    }
    PureState::normalized(space, DVector::from_vec(amps), leakage)
}

/// Smallest cutoff at which `spec` loses at most `tol`.
pub fn cutoff_for(spec: &StateSpec, tol: f64) -> usize {
    let mut d = 2;
    loop {
        if let Ok((_, w)) = ideal_amplitudes(spec, d) {
            if 1.0 - w <= tol {
                return d;
            }
        }
        d += 1;
        if d > 100_000 {
            return d;
        }
    }
}

/// Tensor product, first part in mode 0.
pub fn product_state(parts: &[PureState]) -> Result<PureState> {
    if parts.is_empty() {
        return Err(DqsError::InvalidParameter("empty product".into()));
    }
    let mut cutoffs = Vec::new();
    let mut amps = DVector::from_element(1, C64::new(1.0, 0.0));
    let mut kept = 1.0;
    for p in parts {
        cutoffs.extend_from_slice(p.space().cutoffs());
        amps = amps.kronecker(p.amplitudes());
        kept *= 1.0 - p.leakage();
    }
    PureState::normalized(ModeSpace::new(cutoffs)?, amps, (1.0 - kept).max(0.0))
}

/// `(⊗|γ⟩ ± ⊗|-γ⟩)` over `modes` modes, normalized by `2(1 ± e^{-2Mγ²})`.
pub fn multimode_cat(gamma: f64, parity: Parity, modes: usize, cutoff: usize, tol: f64) -> Result<PureState> {
    let spec = StateSpec::cat(gamma, parity);
    spec.validate()?;
    let space = ModeSpace::uniform(modes, cutoff)?;
    let plus = coherent_amplitudes(C64::new(gamma, 0.0), cutoff);
    let s = parity.sign();
    let g2m = gamma * gamma * modes as f64;
    let norm = match parity {
        Parity::Even => 2.0 * (1.0 + (-2.0 * g2m).exp()),
        Parity::Odd => -2.0 * (-2.0 * g2m).exp_m1(),
    };
    let amps = DVector::from_fn(space.dim(), |i, _| {
        let mut a = C64::new(1.0, 0.0);
        let mut total = 0;
        for m in 0..modes {
            let n = space.occupation(i, m);
            a *= plus[n];
            total += n;
        }
        // ⊗|-γ⟩ carries (-1)^N
        let sign_minus = if total % 2 == 0 { 1.0 } else { -1.0 };
        a * ((1.0 + s * sign_minus) / norm.sqrt())
    });
    let weight = amps.norm_squared();
    let leakage = (1.0 - weight).max(0.0);
    if leakage > tol {
        return Err(DqsError::Truncation {
            leakage,
            tolerance: tol,
            context: format!("multimode cat gamma={gamma} modes={modes} cutoff={cutoff}"),
        });
    }
    PureState::normalized(space, amps, leakage)
}

/// Parity of a pure state, or `None` when it mixes sectors.
pub fn parity_of_state(state: &PureState) -> Option<Parity> {
    state.definite_parity()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_n(s: &PureState) -> f64 {
        s.amplitudes().iter().enumerate().map(|(n, a)| n as f64 * a.norm_sqr()).sum()
    }

    #[test]
    fn squeezed_mean_occupation() {
        let s = make_single_mode_state(&StateSpec::squeezed(2f64.ln()), 40, DEFAULT_LEAKAGE_TOL).unwrap();
        assert!((mean_n(&s) - 0.5625).abs() < 1e-8);
        assert_eq!(s.definite_parity(), Some(Parity::Even));
    }

    #[test]
    fn squeezed_from_mean_roundtrip() {
        let spec = StateSpec::squeezed_with_mean(5.0);
        assert!((spec.mean_occupation() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn cat_even_support_and_mean() {
        let s = make_single_mode_state(&StateSpec::cat(1.3, Parity::Even), 40, 1e-10).unwrap();
        for (n, a) in s.amplitudes().iter().enumerate() {
            if n % 2 == 1 {
                assert_eq!(*a, C64::new(0.0, 0.0));
            }
        }
        let g2: f64 = 1.69;
        assert!((mean_n(&s) - g2 * g2.tanh()).abs() < 1e-10);
        let odd = make_single_mode_state(&StateSpec::cat(1.3, Parity::Odd), 40, 1e-10).unwrap();
        assert!((mean_n(&odd) - g2 / g2.tanh()).abs() < 1e-10);
        assert_eq!(odd.definite_parity(), Some(Parity::Odd));
    }

    #[test]
    fn cat_gamma_inversion() {
        for nbar in [0.1, 1.0, 5.0, 20.0] {
            let spec = StateSpec::cat_with_mean(nbar);
            assert!((spec.mean_occupation() - nbar).abs() < 1e-12 * nbar.max(1.0));
        }
    }

    #[test]
    fn truncation_error_reports_leakage() {
        let err = make_single_mode_state(&StateSpec::coherent(C64::new(3.0, 0.0)), 5, 1e-8).unwrap_err();
        match err {
            DqsError::Truncation { leakage, .. } => assert!(leakage > 0.5),
            e => panic!("unexpected {e:?}"),
        }
        assert!(make_single_mode_state(&StateSpec::fock(5), 5, 1e-8).is_err());
    }

    #[test]
    fn coherent_mean_and_no_parity() {
        let z = C64::new(0.6, -0.8);
        let s = make_single_mode_state(&StateSpec::coherent(z), 40, 1e-12).unwrap();
        assert!((mean_n(&s) - 1.0).abs() < 1e-10);
        assert_eq!(s.definite_parity(), None);
    }

    #[test]
    fn product_order_and_leakage() {
        let a = make_single_mode_state(&StateSpec::fock(1), 3, 0.0).unwrap();
        let b = make_single_mode_state(&StateSpec::fock(2), 4, 0.0).unwrap();
        let p = product_state(&[a, b]).unwrap();
        let idx = p.space().index(&[1, 2]).unwrap();
        assert_eq!(p.amplitudes()[idx], C64::new(1.0, 0.0));
        assert_eq!(p.leakage(), 0.0);
    }

    #[test]
    fn multimode_cat_normalization_matches_formula() {
        let gamma: f64 = 0.8;
        let s = multimode_cat(gamma, Parity::Even, 2, 20, 1e-10).unwrap();
        assert!(s.leakage() < 1e-10);
        assert_eq!(s.definite_parity(), Some(Parity::Even));
        // ⟨0,0|ψ⟩ = 2 e^{-Mγ²/2} / sqrt(2(1+e^{-2Mγ²}))
        let want = 2.0 * (-gamma * gamma).exp() / (2.0 * (1.0 + (-4.0 * gamma * gamma).exp())).sqrt();
        assert!((s.amplitudes()[0].re - want).abs() < 1e-12);
    }

    #[test]
    fn density_rejects_non_hermitian() {
        let space = ModeSpace::new(vec![2]).unwrap();
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(0, 1)] = C64::new(0.3, 0.0);
        assert!(DensityOp::new(space, m).is_err());
    }
}
