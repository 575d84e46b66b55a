use super::predictions::PhaseTreatment;
use crate::error::{DqsError, Result};
use crate::fock::{Parity, StateSpec};
use crate::special_fn::{bessel_i0_scaled, bessel_j0, laguerre};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoModeStrategy {
    /// Probe in one mode, split by a balanced beam splitter, joint parity.
    Delocalized,
    /// Probe in both modes, parity read out in each mode.
    SingleMode,
    /// Probe in both modes, joint parity.
    Separable,
}

impl TwoModeStrategy {
    pub const ALL: [TwoModeStrategy; 3] = [Self::Delocalized, Self::SingleMode, Self::Separable];

    pub fn name(self) -> &'static str {
        match self {
            Self::Delocalized => "delocalized",
            Self::SingleMode => "single_mode",
            Self::Separable => "separable",
        }
    }

    /// Factor relating the characteristic-function argument to α.
    fn beta_scale(self) -> f64 {
        match self {
            Self::Delocalized => 2.0 * SQRT_2,
            _ => 2.0,
        }
    }
}

fn supported(spec: &StateSpec) -> Result<()> {
    spec.validate()?;
    match spec {
        StateSpec::Coherent { .. } => Err(DqsError::InvalidParameter(format!(
            "two-mode formulas do not cover the {} family",
            spec.family_name()
        ))),
        _ => Ok(()),
    }
}

fn chi(spec: &StateSpec, beta: f64, phase: PhaseTreatment, squared: bool) -> Result<f64> {
    let b = beta.abs();
    let b2 = b * b;
    let v = match (*spec, phase) {
        (StateSpec::Fock { n }, _) => {
            let c = (-b2 / 2.0).exp() * laguerre(n, 0, b2)?;
            if squared {
                c * c
            } else {
                c
            }
        }
        (StateSpec::SqueezedVacuum { r }, PhaseTreatment::Averaged) => {
            let k = if squared { 2.0 } else { 1.0 };
            let a = k * b2 * (2.0 * r).cosh() / 2.0;
            let s = k * b2 * (2.0 * r).sinh() / 2.0;
            (-(a - s)).exp() * bessel_i0_scaled(s)
        }
        (StateSpec::SqueezedVacuum { r }, PhaseTreatment::Fixed { phi }) => {
            let (sn, cs) = phi.sin_cos();
            let c = (-b2 / 2.0 * ((2.0 * r).exp() * cs * cs + (-2.0 * r).exp() * sn * sn)).exp();
            if squared {
                c * c
            } else {
                c
            }
        }
        (StateSpec::Cat { gamma, parity }, PhaseTreatment::Averaged) => {
            let s = parity.sign();
            let e = (-2.0 * gamma * gamma).exp();
            let x = 2.0 * gamma * b;
            if squared {
                // e^{-β²}·e^{-4γ²}·I0(4γβ) = exp(-(β-2γ)²)·I0s(4γβ)
                let tail = (-(b - 2.0 * gamma).powi(2)).exp() * bessel_i0_scaled(2.0 * x);
                ((-b2).exp() * (1.0 + bessel_j0(2.0 * x) + 4.0 * s * e + e * e) + tail)
                    / (2.0 * (1.0 + s * e).powi(2))
            } else {
                let tail = (-(b - 2.0 * gamma).powi(2) / 2.0).exp() * bessel_i0_scaled(x);
                ((-b2 / 2.0).exp() * bessel_j0(x) + s * tail) / (1.0 + s * e)
            }
        }
        (StateSpec::Cat { gamma, parity }, PhaseTreatment::Fixed { phi }) => {
            let s = parity.sign();
            let g2 = gamma * gamma;
            let (sn, cs) = phi.sin_cos();
            let x = 2.0 * gamma * beta * cs;
            let cosh_part = ((x - 2.0 * g2).exp() + (-x - 2.0 * g2).exp()) / 2.0;
            let c = (-b2 / 2.0).exp() * ((2.0 * gamma * beta * sn).cos() + s * cosh_part)
                / (1.0 + s * (-2.0 * g2).exp());
            if squared {
                c * c
            } else {
                c
            }
        }
        (StateSpec::Coherent { .. }, _) => unreachable!(),
    };
    Ok(v)
}

/// Phase average of the characteristic function, `∫ dφ/2π χ(β, φ)`.
pub fn averaged_chi_one(spec: &StateSpec, beta: f64) -> Result<f64> {
    supported(spec)?;
    chi(spec, beta, PhaseTreatment::Averaged, false)
}

/// Phase average of the squared characteristic function.
pub fn averaged_chi_two(spec: &StateSpec, beta: f64) -> Result<f64> {
    supported(spec)?;
    chi(spec, beta, PhaseTreatment::Averaged, true)
}

/// Mean parity seen by `strategy`; for `SingleMode` this is one mode's parity.
pub fn parity_expectation(spec: &StateSpec, alpha: f64, strategy: TwoModeStrategy, phase: PhaseTreatment) -> Result<f64> {
    supported(spec)?;
    let p = spec.definite_parity().unwrap_or(Parity::Even).sign();
    let beta = strategy.beta_scale() * alpha;
    match strategy {
        TwoModeStrategy::Separable => chi(spec, beta, phase, true),
        _ => Ok(p * chi(spec, beta, phase, false)?),
    }
}

fn parity_derivative(spec: &StateSpec, alpha: f64, strategy: TwoModeStrategy, phase: PhaseTreatment) -> Result<f64> {
    if let StateSpec::Fock { n } = *spec {
        let scale = strategy.beta_scale();
        let b = scale * alpha;
        let b2 = b * b;
        let l = laguerre(n, 0, b2)?;
        let dl = if n == 0 { 0.0 } else { -laguerre(n - 1, 1, b2)? };
        let c = (-b2 / 2.0).exp() * l;
        let dc = (-b2 / 2.0).exp() * (-b * l + 2.0 * b * dl) * scale;
        return Ok(match strategy {
            TwoModeStrategy::Separable => 2.0 * c * dc,
            _ => Parity::of(n).sign() * dc,
        });
    }
    const H: f64 = 1e-4;
    const W: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
    let mut d = 0.0;
    for (k, w) in W.iter().enumerate() {
        let step = (k + 1) as f64 * H;
        d += w * (parity_expectation(spec, alpha + step, strategy, phase)?
            - parity_expectation(spec, alpha - step, strategy, phase)?);
    }
    Ok(d / H)
}

/// Parity Fisher information of the two-mode strategies from the characteristic-function closed forms.
pub fn analytic_two_mode_parity_fi(spec: &StateSpec, alpha: f64, strategy: TwoModeStrategy) -> Result<f64> {
    analytic_two_mode_parity_fi_with(spec, alpha, strategy, PhaseTreatment::Averaged)
}

pub fn analytic_two_mode_parity_fi_with(
    spec: &StateSpec,
    alpha: f64,
    strategy: TwoModeStrategy,
    phase: PhaseTreatment,
) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(DqsError::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let f = parity_expectation(spec, alpha, strategy, phase)?;
    let df = parity_derivative(spec, alpha, strategy, phase)?;
    let denom = (1.0 - f) * (1.0 + f);
    if !(denom > 0.0) {
        return Err(DqsError::Validity(format!("parity expectation {f} leaves no outcome variance")));
    }
    let fi = df * df / denom;
    Ok(match strategy {
        TwoModeStrategy::SingleMode => 2.0 * fi,
        _ => fi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomodyneScheme {
    TwoCopies,
    Interferometric,
    InterferometricMixed,
}

impl HomodyneScheme {
    pub const ALL: [HomodyneScheme; 3] = [Self::TwoCopies, Self::Interferometric, Self::InterferometricMixed];

    pub fn name(self) -> &'static str {
        match self {
            Self::TwoCopies => "two_copies",
            Self::Interferometric => "interferometric",
            Self::InterferometricMixed => "interferometric_mixed",
        }
    }
}

/// Homodyne Fisher information for squeezed-vacuum probes.
pub fn homodyne_fi_gaussian(scheme: HomodyneScheme, r: f64, alpha: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(DqsError::InvalidParameter(format!("squeezing must be non-negative, got {r}")));
    }
    if !alpha.is_finite() {
        return Err(DqsError::Domain(format!("alpha must be finite, got {alpha}")));
    }
    Ok(match scheme {
        HomodyneScheme::TwoCopies | HomodyneScheme::Interferometric => 8.0 * (2.0 * r).exp(),
        HomodyneScheme::InterferometricMixed => {
            let a2 = alpha * alpha;
            let sigma = 0.5 * (-2.0 * r).exp() + a2;
            2.0 * a2 / (sigma * sigma)
        }
    })
}

/// Large-`n̄`, small-α form `128 α² n̄²` of the phase-mixed interferometric value.
pub fn homodyne_mixed_asymptote(nbar: f64, alpha: f64) -> f64 {
    128.0 * alpha * alpha * nbar * nbar
}

/// Smallest α in `(0, alpha_max]` where `f(α) ≤ threshold`, or `None` if `f` stays above it.
pub fn dynamical_range<F>(f: F, threshold: f64, alpha_max: f64) -> Result<Option<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(alpha_max.is_finite() && alpha_max > 0.0) {
        return Err(DqsError::InvalidParameter(format!("alpha_max must be positive, got {alpha_max}")));
    }
    const GRID: usize = 400;
    let step = alpha_max / GRID as f64;
    let mut lo = step * 1e-3;
    if f(lo)? <= threshold {
        return Ok(Some(lo));
    }
    for k in 1..=GRID {
        let hi = step * k as f64;
        if f(hi)? <= threshold {
            let mut hi = hi;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if f(mid)? <= threshold {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-12 * hi {
                    break;
                }
            }
            return Ok(Some(hi));
        }
        lo = hi;
    }
    Ok(None)
}
