use super::state::PureState;
use super::C64;
use crate::error::{DqsError, Result};
use nalgebra::DVector;

/// Weight below which an incomplete total-number block is tolerated.
const INCOMPLETE_BLOCK_TOL: f64 = 1e-8;

/// Two-mode beam splitter `exp(θ(e^{iφ} a₁†a₂ − e^{−iφ} a₁a₂†))`.
///
/// The exponential is applied exactly within each total-number block. With this sign
/// `|1,0⟩ ↦ cos θ |1,0⟩ − e^{−iφ} sin θ |0,1⟩`, so `θ = π/4, φ = π` sends an excitation
/// into the symmetric mode `(a₁ + a₂)/√2`.
pub fn beam_splitter_2mode(state: &PureState, theta: f64, phase: f64) -> Result<PureState> {
    let space = state.space();
    if space.modes() != 2 {
        return Err(DqsError::Dimension(format!(
            "beam splitter needs 2 modes, state has {}",
            space.modes()
        )));
    }
    let (d1, d2) = (space.cutoff(0), space.cutoff(1));
    let amps = state.amplitudes();
    let mut out = DVector::<C64>::zeros(space.dim());
    let mut extra_leak = 0.0;
    let e_plus = C64::from_polar(1.0, phase);
    let e_minus = e_plus.conj();
    for n in 0..=(d1 + d2 - 2) {
        let k_lo = n.saturating_sub(d2 - 1);
        let k_hi = n.min(d1 - 1);
        let idx = |k: usize| k * d2 + (n - k);
        let v: Vec<C64> = (k_lo..=k_hi).map(|k| amps[idx(k)]).collect();
        let weight: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        if weight == 0.0 {
            continue;
        }
        if k_lo != 0 || k_hi != n {
            if weight > INCOMPLETE_BLOCK_TOL {
                return Err(DqsError::Truncation {
                    leakage: weight,
                    tolerance: INCOMPLETE_BLOCK_TOL,
                    context: format!("beam splitter block N={n} exceeds cutoffs ({d1}, {d2})"),
                });
            }
            extra_leak += weight;
        }
        // off-diagonal couplings of the block generator
        let up: Vec<C64> = (k_lo..k_hi)
            .map(|k| e_plus * (((k + 1) * (n - k)) as f64).sqrt())
            .collect();
        let down: Vec<C64> = (k_lo + 1..=k_hi)
            .map(|k| -e_minus * ((k * (n - k + 1)) as f64).sqrt())
            .collect();
        let w = expm_tridiag_action(&up, &down, theta, v, (n + 1) as f64);
        for (j, k) in (k_lo..=k_hi).enumerate() {
            out[idx(k)] = w[j];
        }
    }
    let leakage = (state.leakage() + extra_leak).min(1.0);
    PureState::normalized(space.clone(), out, leakage)
}

/// `exp(θ G) v` for a zero-diagonal tridiagonal `G` with `G[j+1,j] = up[j]`,
/// `G[j,j+1] = down[j]`, using Taylor steps of norm at most one half.
fn expm_tridiag_action(up: &[C64], down: &[C64], theta: f64, mut v: Vec<C64>, norm_bound: f64) -> Vec<C64> {
    let n = v.len();
    if n == 1 || theta == 0.0 {
        return v;
    }
    let steps = (2.0 * theta.abs() * norm_bound).ceil().max(1.0) as usize;
    let h = theta / steps as f64;
    let apply = |x: &[C64]| -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); n];
        for j in 0..n - 1 {
            y[j + 1] += up[j] * x[j];
            y[j] += down[j] * x[j + 1];
        }
        y
    };
    for _ in 0..steps {
        let mut term = v.clone();
        let mut acc = v.clone();
        for k in 1..60 {
            term = apply(&term);
            let f = h / k as f64;
            let mut tn = 0.0;
            for (t, a) in term.iter_mut().zip(acc.iter_mut()) {
                *t *= f;
                *a += *t;
                tn += t.norm_sqr();
            }
            if tn.sqrt() < 1e-18 {
                break;
            }
        }
        v = acc;
    }
    v
}
