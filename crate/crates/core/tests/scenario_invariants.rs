use approx::assert_relative_eq;
use dqs_core::channels::NoiseSpec;
use dqs_core::fock::StateSpec;
use dqs_core::scenarios::{noise_scan, saturation_scan, ScenarioConfig, Strategy, StrategyKind};

fn cfg() -> ScenarioConfig {
    ScenarioConfig { qfi: false, ..ScenarioConfig::default() }
}

#[test]
fn delocalized_and_separable_fock_probes_tie_at_small_alpha() {
    for n in 1..=3 {
        let deloc = Strategy::new(StrategyKind::Delocalized, StateSpec::fock(n), 2);
        let sep = Strategy::new(StrategyKind::Separable, StateSpec::fock(n), 2);
        let a = saturation_scan(&deloc, &[1e-3], &cfg()).unwrap().reports.remove(0);
        let b = saturation_scan(&sep, &[1e-3], &cfg()).unwrap().reports.remove(0);
        let nf = n as f64;
        assert_relative_eq!(a.cfi.unwrap(), b.cfi.unwrap(), max_relative = 5e-3);
        assert_relative_eq!(a.f_cross, 8.0 * nf, epsilon = 1e-9);
        assert_relative_eq!(b.f_cross, 0.0, epsilon = 1e-12);
        // ratio to the SQL: 1 + 2N for the delocalized probe, 1 + 2N/M for the product
        assert_relative_eq!(a.cfi.unwrap() / a.sql, 1.0 + 2.0 * nf, max_relative = 5e-3);
        assert_relative_eq!(b.cfi.unwrap() / b.sql, 1.0 + 2.0 * (2.0 * nf) / 2.0, max_relative = 5e-3);
        assert!(b.cfi.unwrap() < b.bound_eq10 * 0.9);
    }
}

#[test]
fn common_mode_surrogate_matches_explicit_pair() {
    for base in [StateSpec::fock(2), StateSpec::squeezed_with_mean(0.5625)] {
        let explicit = Strategy::new(StrategyKind::Delocalized, base, 2);
        let analytic = Strategy::new(StrategyKind::AllInCommonAnalytic, base, 2);
        let alphas = [1e-3, 0.05, 0.2];
        let a = saturation_scan(&explicit, &alphas, &cfg()).unwrap();
        let b = saturation_scan(&analytic, &alphas, &cfg()).unwrap();
        for (x, y) in a.reports.iter().zip(&b.reports) {
            assert_relative_eq!(x.cfi.unwrap(), y.cfi.unwrap(), max_relative = 1e-6);
            assert_relative_eq!(x.bound_eq6, y.bound_eq6, max_relative = 1e-6);
            assert_relative_eq!(x.bound_eq10, y.bound_eq10, max_relative = 1e-6);
            assert_relative_eq!(x.f_self + x.f_cross, y.f_self + y.f_cross, max_relative = 1e-6);
        }
    }
}

#[test]
fn cfi_stays_below_quantum_bound_on_mixed_output() {
    let s = Strategy::new(StrategyKind::Delocalized, StateSpec::fock(2), 2);
    let full = ScenarioConfig::default();
    let scan = saturation_scan(&s, &[1e-3, 0.05, 0.15], &full).unwrap();
    for r in &scan.reports {
        let q = r.qfi.expect("qfi");
        assert!(r.cfi.unwrap() <= q * (1.0 + 1e-6), "{r:?}");
        assert!(!r.metadata.chain_violation);
    }
}

#[test]
fn dephasing_lowers_quantum_fisher_information() {
    let s = Strategy::new(StrategyKind::Delocalized, StateSpec::fock(2), 2);
    let grid: Vec<_> = [0.0, 0.3, 0.8, 1.5].map(|g| NoiseSpec::Dephasing { gamma_t: g }).to_vec();
    let scan = noise_scan(&s, &grid, 1e-2, &ScenarioConfig::default()).unwrap();
    let q: Vec<f64> = scan.reports.iter().map(|r| r.qfi.unwrap()).collect();
    for w in q.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-9), "{q:?}");
    }
}

#[test]
fn larger_cats_lose_the_advantage_sooner() {
    use dqs_core::metrology::{analytic_two_mode_parity_fi, dynamical_range, TwoModeStrategy};
    // α at which the Fisher information has fallen to half its small-α value
    let range = |nbar| {
        let spec = StateSpec::cat_with_mean(nbar);
        let f = |a| analytic_two_mode_parity_fi(&spec, a, TwoModeStrategy::Delocalized);
        let half = 0.5 * f(1e-3).unwrap();
        dynamical_range(f, half, 2.0).unwrap().unwrap()
    };
    let r: Vec<f64> = [1.0, 3.0, 5.0, 10.0].map(range).to_vec();
    for w in r.windows(2) {
        assert!(w[1] < w[0], "{r:?}");
    }
}

#[test]
fn loss_favours_the_delocalized_probe() {
    use dqs_core::fock::coherence_summary;
    use dqs_core::metrology::decoherence_cfi_prediction;
    use dqs_core::scenarios::build_strategy_state;
    let deloc = Strategy::new(StrategyKind::Delocalized, StateSpec::fock(2), 2);
    let sep = Strategy::new(StrategyKind::Separable, StateSpec::fock(1), 2);
    let alpha = 0.05;
    let summary = |s: &Strategy| coherence_summary(build_strategy_state(s, &cfg()).unwrap().numeric_state());
    let (sd, ss) = (summary(&deloc), summary(&sep));
    let clean = NoiseSpec::Loss { kappa_t: 0.0 };
    let d0 = decoherence_cfi_prediction(&sd, &clean, alpha).unwrap().value;
    let p0 = decoherence_cfi_prediction(&ss, &clean, alpha).unwrap().value;
    for ratio in [0.2, 0.5, 0.9] {
        let noise = NoiseSpec::Loss { kappa_t: ratio * alpha * alpha };
        let d = decoherence_cfi_prediction(&sd, &noise, alpha).unwrap().value;
        let p = decoherence_cfi_prediction(&ss, &noise, alpha).unwrap().value;
        assert!(d > p);
        assert!(d / d0 > p / p0, "retained fraction {} vs {}", d / d0, p / p0);
    }
}
