use crate::channels::NoiseSpec;
use crate::error::{DqsError, Result};
use crate::fock::{coherence_summary, lower, CoherenceSummary, Expectation, PureState, C64};
use serde::{Deserialize, Serialize};

/// First-order loss/heating predictions are refused at or beyond this strength/α² ratio.
pub const FIRST_ORDER_RATIO_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseTreatment {
    Fixed { phi: f64 },
    Averaged,
}

/// `⟨S⟩, ⟨S†S⟩, ⟨S²⟩` for `S = Σ u_i a_i`.
fn linear_moments<S: Expectation + ?Sized>(state: &S, u: &[f64]) -> (C64, f64, C64) {
    let space = state.space().clone();
    let s_op = |v: &[C64]| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0.0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(lower(&space, v, i)) {
                *o += x * ui;
            }
        }
        out
    };
    let mean = state.expect(&|v| s_op(v));
    let second = state.expect(&|v| s_op(&s_op(v)));
    let c = coherence_summary(state).coherences;
    let mut number = 0.0;
    for i in 0..u.len() {
        for j in 0..u.len() {
            number += u[i] * u[j] * c[(i, j)].re;
        }
    }
    (mean, number, second)
}

/// `4 Var(Σ u_i A_i(φ))` with `A(φ) = (e^{iφ}a† − e^{−iφ}a)/i`, or its average over `φ`.
///
/// Uses the ideal commutator `[S, S†] = |u|²`, so levels at the cutoff do not bias the value.
pub fn qfim_direction_qfi(state: &PureState, u: &[f64], phase: PhaseTreatment) -> Result<f64> {
    let m = state.space().modes();
    if u.len() != m {
        return Err(DqsError::Dimension(format!("direction has {} entries, state has {m} modes", u.len())));
    }
    let u2: f64 = u.iter().map(|x| x * x).sum();
    if !(u2 > 0.0) {
        return Err(DqsError::InvalidParameter("direction vector must be nonzero".into()));
    }
    let (mean, number, second) = linear_moments(state, u);
    let var = match phase {
        PhaseTreatment::Fixed { phi } => {
            let rot = C64::from_polar(1.0, -phi);
            let g_mean = -2.0 * (rot * mean).im;
            let g2 = 2.0 * number + u2 - 2.0 * (rot * rot * second).re;
            g2 - g_mean * g_mean
        }
        PhaseTreatment::Averaged => 2.0 * number + u2 - 2.0 * mean.norm_sqr(),
    };
    Ok(4.0 * var)
}

/// Pure-state QFI for displacement along a fixed phase.
pub fn qfi_pure_fixed_phase(state: &PureState, phi: f64) -> Result<f64> {
    let u = vec![1.0; state.space().modes()];
    qfim_direction_qfi(state, &u, PhaseTreatment::Fixed { phi })
}

/// `F_self + F_cross`, the phase-averaged pure-state bound.
pub fn qfi_phase_averaged_pure_bound<S: Expectation + ?Sized>(state: &S) -> f64 {
    let c = coherence_summary(state);
    c.f_self() + c.f_cross()
}

/// Small-α joint-parity CFI `4M[1 + 2⟨n_B⟩ − 2Mα²(1 − 2⟨n_B⟩² + ⟨n_B⟩ + 3⟨n_B²⟩)]`.
pub fn parity_cfi_prediction_from_summary(summary: &CoherenceSummary, alpha: f64) -> f64 {
    let m = summary.modes as f64;
    let n = summary.nb_mean;
    let n2 = summary.nb_sq_mean;
    4.0 * m * (1.0 + 2.0 * n - 2.0 * m * alpha * alpha * (1.0 - 2.0 * n * n + n + 3.0 * n2))
}

/// [`parity_cfi_prediction_from_summary`] for a probe of definite joint parity.
pub fn parity_cfi_prediction(state: &PureState, alpha: f64) -> Result<f64> {
    if state.definite_parity().is_none() {
        return Err(DqsError::InvalidState("probe has no definite joint parity".into()));
    }
    Ok(parity_cfi_prediction_from_summary(&coherence_summary(state), alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoisePrediction {
    pub value: f64,
    /// `strength/α²` for loss and heating.
    pub validity_ratio: Option<f64>,
}

/// Leading-order CFI of a definite-parity probe under one noise channel.
pub fn decoherence_cfi_prediction(summary: &CoherenceSummary, noise: &NoiseSpec, alpha: f64) -> Result<NoisePrediction> {
    noise.validate()?;
    let f_s = summary.f_self();
    let f_c = summary.f_cross();
    let n_sum: f64 = summary.occupations.iter().sum();
    let m = summary.modes as f64;
    let ratio = noise.validity_ratio(alpha);
    if let Some(r) = ratio {
        if !(r < FIRST_ORDER_RATIO_LIMIT) {
            return Err(DqsError::Validity(format!(
                "first-order ratio {r:.3} at or above {FIRST_ORDER_RATIO_LIMIT}"
            )));
        }
    }
    let value = match *noise {
        NoiseSpec::Loss { .. } => {
            let r = ratio.unwrap_or(0.0);
            4.0 * (n_sum + m) + 4.0 * (1.0 - r) * n_sum + f_c
        }
        NoiseSpec::Heating { .. } => (1.0 - ratio.unwrap_or(0.0)) * f_s + f_c,
        NoiseSpec::Dephasing { gamma_t } => f_s + (-gamma_t).exp() * f_c,
        NoiseSpec::Jitter { sigma } => f_s + (-sigma * sigma).exp() * f_c,
    };
    Ok(NoisePrediction { value, validity_ratio: ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseFixedBound {
    /// `4M(2⟨N⟩+1+2√(⟨N⟩(⟨N⟩+1)))`
    pub bound: f64,
    /// `4M⟨b†² + b²⟩` on the state.
    pub delta: f64,
}

pub fn phase_fixed_bound<S: Expectation + ?Sized>(state: &S) -> PhaseFixedBound {
    let m = state.space().modes();
    let u = vec![1.0; m];
    let (_, _, second) = linear_moments(state, &u);
    let n = coherence_summary(state).total_mean.max(0.0);
    let mf = m as f64;
    PhaseFixedBound {
        bound: 4.0 * mf * (2.0 * n + 1.0 + 2.0 * (n * (n + 1.0)).sqrt()),
        delta: 8.0 * second.re,
    }
}
