//! Fisher information: numerical estimates, closed-form predictions and the bound chain.

mod bounds;
mod fisher;
mod predictions;
mod two_mode;

pub use bounds::{bound_chain, BoundChain};
pub use fisher::{
    cfi_from_probabilities, cfi_povm, qfi_mixed, FisherEstimate, NumericsConfig, QfiEstimate,
};
pub use predictions::{
    decoherence_cfi_prediction, parity_cfi_prediction, parity_cfi_prediction_from_summary, phase_fixed_bound,
    qfi_phase_averaged_pure_bound, qfi_pure_fixed_phase, qfim_direction_qfi, NoisePrediction, PhaseFixedBound,
    PhaseTreatment, FIRST_ORDER_RATIO_LIMIT,
};
pub use two_mode::{
    analytic_two_mode_parity_fi, analytic_two_mode_parity_fi_with, averaged_chi_one, averaged_chi_two,
    dynamical_range, homodyne_fi_gaussian, homodyne_mixed_asymptote, parity_expectation, HomodyneScheme, TwoModeStrategy,
};

use serde::Serialize;

/// One evaluated configuration: estimates, the self/cross split and the bound chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FisherReport {
    pub alpha: f64,
    pub qfi: Option<f64>,
    pub cfi: Option<f64>,
    pub f_self: f64,
    pub f_cross: f64,
    pub bound_eq6: f64,
    pub bound_eq7: f64,
    pub bound_eq10: f64,
    pub bound_eq17: f64,
    pub bound_phase_fixed: f64,
    pub sql: f64,
    pub metadata: ReportMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ReportMetadata {
    pub fd_step: Option<f64>,
    pub phase_nodes: Option<usize>,
    pub eigen_cutoff: Option<f64>,
    pub richardson_flag: bool,
    pub cfi_source: String,
    pub prediction: Option<f64>,
    pub leakage: f64,
    pub chain_violation: bool,
}

impl FisherReport {
    /// Report with the bound chain filled in and no estimates yet.
    pub fn from_bounds(alpha: f64, chain: &BoundChain) -> Self {
        Self {
            alpha,
            qfi: None,
            cfi: None,
            f_self: chain.f_self,
            f_cross: chain.f_cross,
            bound_eq6: chain.eq6,
            bound_eq7: chain.eq7,
            bound_eq10: chain.eq10,
            bound_eq17: chain.eq17,
            bound_phase_fixed: chain.phase_fixed,
            sql: chain.sql,
            metadata: ReportMetadata::default(),
        }
    }

    /// Checks `cfi ≤ qfi ≤ eq6 ≤ eq7 ≤ eq10` with 1% relative plus 1e-6 absolute slack.
    pub fn chain_holds(&self) -> bool {
        let le = |a: f64, b: f64| a <= b * 1.01 + 1e-6;
        let mut chain = Vec::new();
        if let Some(c) = self.cfi {
            chain.push(c);
        }
        if let Some(q) = self.qfi {
            chain.push(q);
        }
        chain.extend([self.bound_eq6, self.bound_eq7, self.bound_eq10]);
        chain.windows(2).all(|w| le(w[0], w[1]))
    }

    pub fn update_chain_flag(&mut self) {
        self.metadata.chain_violation = !self.chain_holds();
    }
}
