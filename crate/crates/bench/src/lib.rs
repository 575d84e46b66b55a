//! Fixtures shared by the benchmarks.

use dqs_core::fock::{make_single_mode_state, beam_splitter_2mode, product_state, PureState, StateSpec};

/// Balanced split of `|n⟩` over two modes with the given per-mode cutoff.
pub fn delocalized_fock(n: usize, cutoff: usize) -> PureState {
    let a = make_single_mode_state(&StateSpec::fock(n), cutoff, 0.0).unwrap();
    let vac = make_single_mode_state(&StateSpec::fock(0), cutoff, 0.0).unwrap();
    let pair = product_state(&[a, vac]).unwrap();
    beam_splitter_2mode(&pair, std::f64::consts::FRAC_PI_4, std::f64::consts::PI).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use dqs_core::fock::coherence_summary;

    #[test]
    fn fixture_puts_everything_in_the_common_mode() {
        let s = coherence_summary(&delocalized_fock(2, 8));
        assert!((s.nb_mean - 2.0).abs() < 1e-12);
    }
}
