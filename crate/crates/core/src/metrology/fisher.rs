use crate::error::{DqsError, Result};
use crate::fock::{DensityOp, Povm, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Finite-difference and eigen-decomposition settings.
///
/// The step is `h = max(fd_min, fd_rel·α)`; a step of `α/2` or more is refused.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub fd_rel: f64,
    pub fd_min: f64,
    pub richardson: bool,
    /// Relative disagreement between plain and extrapolated derivatives that raises a flag.
    pub richardson_tol: f64,
    pub eigen_cutoff: f64,
    /// Outcomes with smaller probability are dropped from the classical sum.
    pub prob_floor: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            fd_rel: 0.05,
            fd_min: 1e-4,
            richardson: true,
            richardson_tol: 1e-2,
            eigen_cutoff: 1e-12,
            prob_floor: 1e-15,
        }
    }
}

impl NumericsConfig {
    pub fn step(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(DqsError::InvalidParameter(format!(
                "Fisher information needs alpha > 0, got {alpha}"
            )));
        }
        let h = self.fd_min.max(self.fd_rel * alpha);
        if h >= 0.5 * alpha {
            return Err(DqsError::Validity(format!(
                "finite-difference step {h:.3e} not below alpha/2 = {:.3e}",
                0.5 * alpha
            )));
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherEstimate {
    pub value: f64,
    /// Value from the plain central difference at step `h`.
    pub value_plain: f64,
    pub fd_step: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiEstimate {
    pub value: f64,
    pub value_plain: f64,
    /// Same estimate with a ten times larger eigenvalue cutoff.
    pub value_loose_cutoff: f64,
    pub fd_step: f64,
    pub flagged: bool,
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn classical_sum(p: &[f64], dp: &[f64], floor: f64) -> f64 {
    p.iter()
        .zip(dp)
        .filter(|(p, _)| **p > floor)
        .map(|(p, d)| d * d / p)
        .sum()
}

/// Classical Fisher information from an outcome distribution `α ↦ p(α)`.
pub fn cfi_from_probabilities<F>(probs: F, alpha: f64, cfg: &NumericsConfig) -> Result<FisherEstimate>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let h = cfg.step(alpha)?;
    let probs = |a: f64| -> Result<Vec<f64>> {
        let p = probs(a)?;
        if let Some(bad) = p.iter().find(|x| **x < -1e-12 || !x.is_finite()) {
            return Err(DqsError::Validity(format!("outcome probability {bad:e} at alpha = {a}")));
        }
        Ok(p)
    };
    let p0 = probs(alpha)?;
    let central = |h: f64| -> Result<Vec<f64>> {
        let (a, b) = (probs(alpha + h)?, probs(alpha - h)?);
        if a.len() != p0.len() || b.len() != p0.len() {
            return Err(DqsError::Dimension("outcome count changed with alpha".into()));
        }
        Ok(a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect())
    };
    let d1 = central(h)?;
    let plain = classical_sum(&p0, &d1, cfg.prob_floor);
    if !cfg.richardson {
        return Ok(FisherEstimate { value: plain, value_plain: plain, fd_step: h, flagged: false });
    }
    let d2 = central(0.5 * h)?;
    let rich: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
    let value = classical_sum(&p0, &rich, cfg.prob_floor);
    Ok(FisherEstimate { value, value_plain: plain, fd_step: h, flagged: rel_gap(value, plain) > cfg.richardson_tol })
}

/// Classical Fisher information of a Fock-diagonal POVM on the channel output.
pub fn cfi_povm<F>(channel: F, povm: &Povm, alpha: f64, cfg: &NumericsConfig) -> Result<FisherEstimate>
where
    F: Fn(f64) -> Result<DensityOp>,
{
    cfi_from_probabilities(|a| povm.probabilities(&channel(a)?), alpha, cfg)
}

fn sld_qfi(rho: &DMatrix<C64>, drho: &DMatrix<C64>, cutoff: f64) -> Result<(f64, f64)> {
    // entries spanning hundreds of decades stall the eigensolver; tiny ones are flushed
    let scale = rho.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let eig = [1e-30, 1e-24, 1e-18]
        .iter()
        .map(|f| rho.map(|z| if z.norm() < f * scale { C64::new(0.0, 0.0) } else { z }).symmetric_eigen())
        .find(|e| e.eigenvalues.iter().all(|l| l.is_finite()))
        .ok_or_else(|| DqsError::Validity("eigen-decomposition of the output state failed".into()))?;
    let v = &eig.eigenvectors;
    let lam: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let d = v.adjoint() * drho * v;
    let mut tight = 0.0;
    let mut loose = 0.0;
    for k in 0..lam.len() {
        for l in 0..lam.len() {
            let s = lam[k] + lam[l];
            let t = 2.0 * d[(k, l)].norm_sqr() / s;
            if s > cutoff {
                tight += t;
            }
            if s > 10.0 * cutoff {
                loose += t;
            }
        }
    }
    Ok((tight, loose))
}

/// Quantum Fisher information of `α ↦ ρ(α)` from the symmetric-logarithmic-derivative eigen formula.
pub fn qfi_mixed<F>(channel: F, alpha: f64, cfg: &NumericsConfig) -> Result<QfiEstimate>
where
    F: Fn(f64) -> Result<DensityOp>,
{
    let h = cfg.step(alpha)?;
    let rho0 = channel(alpha)?;
    let central = |h: f64| -> Result<DMatrix<C64>> {
        let a = channel(alpha + h)?;
        let b = channel(alpha - h)?;
        Ok((a.matrix() - b.matrix()) / C64::new(2.0 * h, 0.0))
    };
    let d1 = central(h)?;
    let (plain, plain_loose) = sld_qfi(rho0.matrix(), &d1, cfg.eigen_cutoff)?;
    if !cfg.richardson {
        return Ok(QfiEstimate {
            value: plain,
            value_plain: plain,
            value_loose_cutoff: plain_loose,
            fd_step: h,
            flagged: false,
        });
    }
    let d2 = central(0.5 * h)?;
    let rich = (d2 * C64::new(4.0, 0.0) - d1) / C64::new(3.0, 0.0);
    let (value, loose) = sld_qfi(rho0.matrix(), &rich, cfg.eigen_cutoff)?;
    Ok(QfiEstimate {
        value,
        value_plain: plain,
        value_loose_cutoff: loose,
        fd_step: h,
        flagged: rel_gap(value, plain) > cfg.richardson_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_rule() {
        let cfg = NumericsConfig::default();
        assert_eq!(cfg.step(1e-3).unwrap(), 1e-4);
        assert!((cfg.step(0.1).unwrap() - 5e-3).abs() < 1e-18);
        assert!(matches!(cfg.step(1e-4), Err(DqsError::Validity(_))));
        assert!(cfg.step(0.0).is_err());
    }

    #[test]
    fn poisson_mean_fisher() {
        // Poisson with mean α² has Fisher information 4 in α
        let probs = |a: f64| -> Result<Vec<f64>> {
            let lam = a * a;
            let mut p = vec![(-lam).exp()];
            for k in 1..40 {
                let next = p[k - 1] * lam / k as f64;
                p.push(next);
            }
            Ok(p)
        };
        let est = cfi_from_probabilities(probs, 0.7, &NumericsConfig::default()).unwrap();
        assert!((est.value - 4.0).abs() < 1e-7);
        assert!(!est.flagged);
    }
}
