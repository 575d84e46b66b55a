use crate::fock::CoherenceSummary;
use serde::Serialize;

/// Phase-averaged bounds evaluated from the probe's coherence summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundChain {
    pub f_self: f64,
    pub f_cross: f64,
    /// `F_self + F_cross`
    pub eq6: f64,
    /// Cauchy-Schwarz: `4Σ(2n_i+1) + 8Σ_{i≠j} √(n_i n_j)`
    pub eq7: f64,
    /// `4M(2⟨N⟩+1)`
    pub eq10: f64,
    /// `4M(2 max_i n_i + 1)`
    pub eq17: f64,
    /// `4M(2⟨N⟩+1+2√(⟨N⟩(⟨N⟩+1)))`
    pub phase_fixed: f64,
    pub sql: f64,
}

pub fn bound_chain(summary: &CoherenceSummary) -> BoundChain {
    let m = summary.modes as f64;
    let n = &summary.occupations;
    let f_self = summary.f_self();
    let f_cross = summary.f_cross();
    let mut cs = 0.0;
    for i in 0..n.len() {
        for j in 0..n.len() {
            if i != j {
                cs += (n[i].max(0.0) * n[j].max(0.0)).sqrt();
            }
        }
    }
    let total = summary.total_mean.max(0.0);
    BoundChain {
        f_self,
        f_cross,
        eq6: f_self + f_cross,
        eq7: f_self + 8.0 * cs,
        eq10: 4.0 * m * (2.0 * total + 1.0),
        eq17: 4.0 * m * (2.0 * summary.max_occupation() + 1.0),
        phase_fixed: 4.0 * m * (2.0 * total + 1.0 + 2.0 * (total * (total + 1.0)).sqrt()),
        sql: 4.0 * m,
    }
}
