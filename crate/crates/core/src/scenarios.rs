//! Probe strategies and the scans that evaluate them over α or noise strength.

use crate::channels::{
    apply_probe_noise, exact_phase_nodes, phase_averaged_diagonal, phase_averaged_displacement,
    phase_jitter_averaged_displacement, ChannelParams, NoiseSpec,
};
use crate::error::{DqsError, Result};
use crate::fock::{
    beam_splitter_2mode, coherence_summary, conjugate_by_modes, cutoff_for, displacement_matrix, excitation_povm,
    lower, make_single_mode_state, multimode_cat, product_state, CoherenceSummary, DensityOp, Expectation,
    ModeSpace, Povm, PovmKind, PureState, StateSpec, C64,
};
use crate::metrology::{
    analytic_two_mode_parity_fi, bound_chain, cfi_from_probabilities, decoherence_cfi_prediction,
    homodyne_fi_gaussian, parity_cfi_prediction_from_summary, qfi_mixed, BoundChain, FisherReport,
    HomodyneScheme, NumericsConfig, TwoModeStrategy,
};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

/// Largest dense product space a strategy may request.
pub const MAX_DENSE_DIM: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Probe in mode 0, spread over all modes by balanced beam splitters.
    Delocalized,
    /// The same probe in every mode.
    Separable,
    /// Separable preparation read out by per-mode parity.
    SingleModeReadout,
    /// Single-mode surrogate at amplitude `√M α`.
    AllInCommonAnalytic,
    /// `⊗|γ⟩ ± ⊗|−γ⟩` across all modes.
    MultimodeCat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    JointParity,
    PerModeParity,
    /// Each mode's parity read out on its own; informations of the marginals add.
    MarginalParity,
    Excitation,
    Homodyne,
}

/// Reference point of the readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutFrame {
    #[default]
    Origin,
    /// Undo the probe's own mean field before measuring.
    ProbeMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Strategy {
    pub kind: StrategyKind,
    pub base: StateSpec,
    pub modes: usize,
    pub measurement: Measurement,
    #[serde(default)]
    pub frame: ReadoutFrame,
}

impl Strategy {
    /// Strategy with the natural readout for `kind`.
    pub fn new(kind: StrategyKind, base: StateSpec, modes: usize) -> Self {
        let measurement = match kind {
            StrategyKind::SingleModeReadout => Measurement::MarginalParity,
            _ => Measurement::JointParity,
        };
        Self { kind, base, modes, measurement, frame: ReadoutFrame::Origin }
    }

    pub fn with_measurement(mut self, measurement: Measurement) -> Self {
        self.measurement = measurement;
        self
    }

    pub fn with_frame(mut self, frame: ReadoutFrame) -> Self {
        self.frame = frame;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.modes == 0 {
            return Err(DqsError::InvalidParameter("a strategy needs at least one mode".into()));
        }
        if self.kind == StrategyKind::MultimodeCat && !matches!(self.base, StateSpec::Cat { .. }) {
            return Err(DqsError::InvalidParameter("multimode_cat needs a cat base state".into()));
        }
        if self.measurement == Measurement::Homodyne
            && !(self.kind == StrategyKind::Delocalized
                && self.modes == 2
                && matches!(self.base, StateSpec::SqueezedVacuum { .. }))
        {
            return Err(DqsError::InvalidParameter(
                "homodyne readout is modelled only for a delocalized squeezed vacuum on two modes".into(),
            ));
        }
        Ok(())
    }

    fn uses_common_mode(&self) -> bool {
        match self.kind {
            StrategyKind::AllInCommonAnalytic => true,
            StrategyKind::Delocalized => self.modes > 2,
            _ => false,
        }
    }

    /// Matching closed-form two-mode strategy, if any.
    pub fn two_mode_strategy(&self) -> Option<TwoModeStrategy> {
        if self.modes != 2 || self.frame != ReadoutFrame::Origin {
            return None;
        }
        match (self.kind, self.measurement) {
            (StrategyKind::Delocalized | StrategyKind::AllInCommonAnalytic, Measurement::JointParity) => {
                Some(TwoModeStrategy::Delocalized)
            }
            (StrategyKind::Separable, Measurement::JointParity) => Some(TwoModeStrategy::Separable),
            (StrategyKind::Separable | StrategyKind::SingleModeReadout, Measurement::MarginalParity) => {
                Some(TwoModeStrategy::SingleMode)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub numerics: NumericsConfig,
    /// Per-mode probe cutoff; `None` sizes it from `leakage_tol`.
    pub cutoff: Option<usize>,
    pub leakage_tol: f64,
    /// Largest probability the displaced state may lose past the cutoff.
    pub output_tol: f64,
    pub qfi: bool,
    pub qfi_max_dim: usize,
    /// Use the closed-form two-mode expressions instead of Fock-space numerics.
    pub analytic: bool,
    /// Advantage threshold as a multiple of the SQL.
    pub range_multiple: f64,
    pub phase_nodes: Option<usize>,
    pub jitter_nodes: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            numerics: NumericsConfig::default(),
            cutoff: None,
            leakage_tol: 1e-10,
            output_tol: 1e-9,
            qfi: true,
            qfi_max_dim: 1600,
            analytic: false,
            range_multiple: 2.0,
            phase_nodes: None,
            jitter_nodes: 9,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let n = &self.numerics;
        let positive = [n.fd_rel, n.fd_min, n.eigen_cutoff, self.leakage_tol, self.output_tol, self.range_multiple];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) || !(n.richardson_tol > 0.0) || !(n.prob_floor >= 0.0) {
            return Err(DqsError::InvalidParameter("numerical settings must be positive and finite".into()));
        }
        if matches!(self.cutoff, Some(d) if d < 2) {
            return Err(DqsError::InvalidParameter("cutoff must be at least 2".into()));
        }
        if self.jitter_nodes < 5 {
            return Err(DqsError::InvalidParameter("jitter_nodes must be at least 5".into()));
        }
        Ok(())
    }
}

/// A constructed probe: dense on the full mode space, or a single-mode common-mode surrogate.
#[derive(Debug, Clone)]
pub enum BuiltProbe {
    Dense(PureState),
    CommonMode { surrogate: PureState, modes: usize },
}

impl BuiltProbe {
    pub fn modes(&self) -> usize {
        match self {
            BuiltProbe::Dense(s) => s.space().modes(),
            BuiltProbe::CommonMode { modes, .. } => *modes,
        }
    }

    pub fn leakage(&self) -> f64 {
        match self {
            BuiltProbe::Dense(s) => s.leakage(),
            BuiltProbe::CommonMode { surrogate, .. } => surrogate.leakage(),
        }
    }

    /// State that the numerics act on.
    pub fn numeric_state(&self) -> &PureState {
        match self {
            BuiltProbe::Dense(s) => s,
            BuiltProbe::CommonMode { surrogate, .. } => surrogate,
        }
    }

    pub fn summary(&self) -> CoherenceSummary {
        match self {
            BuiltProbe::Dense(s) => coherence_summary(s),
            BuiltProbe::CommonMode { surrogate, modes } => {
                let (n, n2) = number_moments(surrogate);
                CoherenceSummary::common_mode(*modes, n, n2)
            }
        }
    }

    /// Factor between α and the amplitude the numerics see.
    fn amplitude_scale(&self) -> f64 {
        match self {
            BuiltProbe::Dense(_) => 1.0,
            BuiltProbe::CommonMode { modes, .. } => (*modes as f64).sqrt(),
        }
    }
}

fn number_moments(s: &PureState) -> (f64, f64) {
    s.amplitudes().iter().enumerate().fold((0.0, 0.0), |(a, b), (n, c)| {
        let w = c.norm_sqr();
        let n = n as f64;
        (a + n * w, b + n * n * w)
    })
}

/// Cutoff per mode that holds the probe within `tol`.
pub fn probe_cutoff(strategy: &Strategy, cfg: &ScenarioConfig) -> usize {
    if let Some(d) = cfg.cutoff {
        return d;
    }
    match (strategy.kind, strategy.base) {
        (StrategyKind::MultimodeCat, StateSpec::Cat { gamma, .. }) => {
            cutoff_for(&StateSpec::coherent(C64::new(gamma, 0.0)), cfg.leakage_tol / strategy.modes as f64)
        }
        (StrategyKind::Separable | StrategyKind::SingleModeReadout, _) => {
            cutoff_for(&strategy.base, cfg.leakage_tol / strategy.modes as f64)
        }
        _ => cutoff_for(&strategy.base, cfg.leakage_tol),
    }
}

/// Extra levels needed to hold a displacement of `amplitude` applied to states below `cutoff`.
pub fn displacement_margin(amplitude: f64, cutoff: usize) -> usize {
    let a = amplitude.abs();
    (a * a + 6.0 * a * (cutoff as f64).sqrt() + 4.0).ceil() as usize
}

fn check_dense_dim(cutoff: usize, modes: usize) -> Result<()> {
    let dim = (cutoff as f64).powi(modes as i32);
    if dim > MAX_DENSE_DIM as f64 {
        return Err(DqsError::InvalidParameter(format!(
            "{modes} modes at cutoff {cutoff} exceed the dense limit of {MAX_DENSE_DIM} states"
        )));
    }
    Ok(())
}

fn build_at(strategy: &Strategy, cutoff: usize, tol: f64) -> Result<BuiltProbe> {
    strategy.validate()?;
    let m = strategy.modes;
    if strategy.uses_common_mode() {
        let surrogate = make_single_mode_state(&strategy.base, cutoff, tol)?;
        return Ok(BuiltProbe::CommonMode { surrogate, modes: m });
    }
    check_dense_dim(cutoff, m)?;
    let state = match strategy.kind {
        StrategyKind::Delocalized => {
            let s = make_single_mode_state(&strategy.base, cutoff, tol)?;
            if m == 1 {
                s
            } else {
                let vac = make_single_mode_state(&StateSpec::fock(0), cutoff, 0.0)?;
                beam_splitter_2mode(&product_state(&[s, vac])?, FRAC_PI_4, PI)?
            }
        }
        StrategyKind::Separable | StrategyKind::SingleModeReadout => {
            let s = make_single_mode_state(&strategy.base, cutoff, tol / m as f64)?;
            product_state(&vec![s; m])?
        }
        StrategyKind::MultimodeCat => match strategy.base {
            StateSpec::Cat { gamma, parity } => multimode_cat(gamma, parity, m, cutoff, tol)?,
            _ => unreachable!(),
        },
        StrategyKind::AllInCommonAnalytic => unreachable!(),
    };
    Ok(BuiltProbe::Dense(state))
}

/// Zero-extends every mode of `state` to `cutoff` levels.
pub fn pad_state(state: &PureState, cutoff: usize) -> Result<PureState> {
    let space = state.space();
    if space.cutoffs().iter().all(|&d| d == cutoff) {
        return Ok(state.clone());
    }
    if space.cutoffs().iter().any(|&d| d > cutoff) {
        return Err(DqsError::Dimension(format!("cannot pad cutoffs {:?} down to {cutoff}", space.cutoffs())));
    }
    let target = ModeSpace::uniform(space.modes(), cutoff)?;
    check_dense_dim(cutoff, space.modes())?;
    let mut amps = nalgebra::DVector::zeros(target.dim());
    for (i, a) in state.amplitudes().iter().enumerate() {
        let j = target.index(&space.occupations(i)).expect("padded space holds every occupation");
        amps[j] = *a;
    }
    PureState::new(target, amps, state.leakage())
}

fn pad_probe(probe: BuiltProbe, cutoff: usize) -> Result<BuiltProbe> {
    Ok(match probe {
        BuiltProbe::Dense(s) => BuiltProbe::Dense(pad_state(&s, cutoff)?),
        BuiltProbe::CommonMode { surrogate, modes } => {
            BuiltProbe::CommonMode { surrogate: pad_state(&surrogate, cutoff)?, modes }
        }
    })
}

/// Builds the probe of `strategy` at its own cutoff.
pub fn build_strategy_state(strategy: &Strategy, cfg: &ScenarioConfig) -> Result<BuiltProbe> {
    build_at(strategy, probe_cutoff(strategy, cfg), cfg.leakage_tol)
}

/// Closed-form parity Fisher information when `strategy` has one.
pub fn analytic_cfi(strategy: &Strategy, alpha: f64) -> Result<Option<f64>> {
    if matches!(strategy.base, StateSpec::Coherent { .. }) {
        return Ok(None);
    }
    if strategy.modes == 1
        && strategy.frame == ReadoutFrame::Origin
        && matches!(
            strategy.measurement,
            Measurement::JointParity | Measurement::PerModeParity | Measurement::MarginalParity
        )
    {
        return Ok(Some(0.5 * analytic_two_mode_parity_fi(&strategy.base, alpha, TwoModeStrategy::SingleMode)?));
    }
    match strategy.two_mode_strategy() {
        Some(s) => Ok(Some(analytic_two_mode_parity_fi(&strategy.base, alpha, s)?)),
        None => Ok(None),
    }
}

enum Readout {
    Povm(Povm),
    Marginals,
    None,
}

/// Per-α evaluation state shared by the scans.
struct Evaluator {
    strategy: Strategy,
    cfg: ScenarioConfig,
    probe: BuiltProbe,
    summary: CoherenceSummary,
    chain: BoundChain,
    readout: Readout,
    noise: Option<NoiseSpec>,
    noisy: Option<DensityOp>,
    frame_ops: Option<Vec<DMatrix<C64>>>,
}

impl Evaluator {
    fn new(strategy: &Strategy, cfg: &ScenarioConfig, alpha_max: f64, noise: Option<NoiseSpec>) -> Result<Self> {
        strategy.validate()?;
        cfg.validate()?;
        if noise.is_some() && strategy.uses_common_mode() {
            return Err(DqsError::InvalidParameter(
                "noise scans need an explicit Fock-space probe (at most two delocalized modes)".into(),
            ));
        }
        let d_probe = probe_cutoff(strategy, cfg);
        let scale = if strategy.uses_common_mode() { (strategy.modes as f64).sqrt() } else { 1.0 };
        let mut shift = 0.0;
        if strategy.frame == ReadoutFrame::ProbeMean {
            if let StateSpec::Coherent { re, im } = strategy.base {
                shift = (re * re + im * im).sqrt();
            }
        }
        let extra = match noise {
            Some(NoiseSpec::Heating { .. }) => 2,
            _ => 0,
        };
        let d_out = d_probe + displacement_margin(scale * alpha_max + shift, d_probe) + extra;
        let probe = pad_probe(build_at(strategy, d_probe, cfg.leakage_tol)?, d_out)?;
        let summary = probe.summary();
        let chain = bound_chain(&summary);
        let state = probe.numeric_state();
        let readout = match strategy.measurement {
            Measurement::JointParity => Readout::Povm(Povm::new(PovmKind::JointParity, state.space())),
            Measurement::PerModeParity => Readout::Povm(Povm::new(PovmKind::PerModeParity, state.space())),
            Measurement::MarginalParity => Readout::Marginals,
            Measurement::Excitation => Readout::Povm(excitation_povm(state.space())?),
            Measurement::Homodyne => Readout::None,
        };
        let noisy = match noise {
            Some(n @ (NoiseSpec::Loss { .. } | NoiseSpec::Heating { .. } | NoiseSpec::Dephasing { .. })) => {
                Some(apply_probe_noise(&state.to_density(), &n)?)
            }
            _ => None,
        };
        let frame_ops = match strategy.frame {
            ReadoutFrame::ProbeMean => {
                let space = state.space();
                let ops = (0..space.modes())
                    .map(|i| {
                        let mean = state.expect(&|v: &[C64]| lower(space, v, i));
                        displacement_matrix(-mean, space.cutoff(i), None).map(|d| d.matrix)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(ops)
            }
            ReadoutFrame::Origin => None,
        };
        Ok(Self { strategy: *strategy, cfg: *cfg, probe, summary, chain, readout, noise, noisy, frame_ops })
    }

    fn space(&self) -> &ModeSpace {
        self.probe.numeric_state().space()
    }

    fn needs_density(&self) -> bool {
        self.noise.is_some() || self.frame_ops.is_some()
    }

    fn params(&self, amplitude: f64) -> ChannelParams {
        let mut p = ChannelParams::new(amplitude);
        p.phase_nodes = self.cfg.phase_nodes;
        if let Some(NoiseSpec::Jitter { sigma }) = self.noise {
            p = p.with_jitter(sigma, self.cfg.jitter_nodes);
        }
        p
    }

    /// Output state at physical amplitude `alpha`.
    fn channel(&self, alpha: f64) -> Result<DensityOp> {
        let a = alpha * self.probe.amplitude_scale();
        let pure;
        let input = match &self.noisy {
            Some(r) => r,
            None => {
                pure = self.probe.numeric_state().to_density();
                &pure
            }
        };
        let out = match self.noise {
            Some(NoiseSpec::Jitter { .. }) => phase_jitter_averaged_displacement(input, &self.params(a))?,
            _ => phase_averaged_displacement(input, &self.params(a))?,
        };
        match &self.frame_ops {
            None => Ok(out.state),
            Some(ops) => {
                let refs: Vec<&DMatrix<C64>> = ops.iter().collect();
                let m = conjugate_by_modes(self.space(), out.state.matrix(), &refs);
                DensityOp::new(self.space().clone(), (&m + m.adjoint()) * C64::new(0.5, 0.0))
            }
        }
    }

    fn check_output(&self, alpha: f64, kept: f64) -> Result<()> {
        let lost = 1.0 - kept;
        if lost > self.cfg.output_tol {
            return Err(DqsError::Truncation {
                leakage: lost,
                tolerance: self.cfg.output_tol,
                context: format!("displaced probe at alpha = {alpha} with cutoffs {:?}", self.space().cutoffs()),
            });
        }
        Ok(())
    }

    /// Outcome probabilities; marginal readouts concatenate one distribution per mode.
    fn probabilities(&self, alpha: f64) -> Result<Vec<f64>> {
        let diag = if self.needs_density() {
            self.channel(alpha)?.diagonal()
        } else {
            phase_averaged_diagonal(self.probe.numeric_state(), alpha * self.probe.amplitude_scale())?
        };
        let (p, copies) = match &self.readout {
            Readout::Povm(povm) => (povm.probabilities_from_diagonal(&diag), 1.0),
            Readout::Marginals => {
                let space = self.space();
                let mut p = vec![0.0; 2 * space.modes()];
                for (i, w) in diag.iter().enumerate() {
                    for m in 0..space.modes() {
                        p[2 * m + space.occupation(i, m) % 2] += w;
                    }
                }
                (p, space.modes() as f64)
            }
            Readout::None => unreachable!(),
        };
        self.check_output(alpha, p.iter().sum::<f64>() / copies)?;
        Ok(p)
    }

    fn evaluate(&self, alpha: f64) -> Result<FisherReport> {
        let mut rep = FisherReport::from_bounds(alpha, &self.chain);
        rep.metadata.leakage = self.probe.leakage();
        let definite = self.probe.numeric_state().definite_parity().is_some();
        match self.noise {
            Some(n) => rep.metadata.prediction = Some(decoherence_cfi_prediction(&self.summary, &n, alpha)?.value),
            None if definite && self.strategy.measurement == Measurement::JointParity => {
                rep.metadata.prediction = Some(parity_cfi_prediction_from_summary(&self.summary, alpha));
            }
            None => {}
        }
        if self.strategy.measurement == Measurement::Homodyne {
            let StateSpec::SqueezedVacuum { r } = self.strategy.base else { unreachable!() };
            rep.cfi = Some(homodyne_fi_gaussian(HomodyneScheme::InterferometricMixed, r, alpha)?);
            rep.metadata.cfi_source = "analytic_homodyne".into();
        } else if self.cfg.analytic && self.noise.is_none() {
            rep.cfi = Some(analytic_cfi(&self.strategy, alpha)?.ok_or_else(|| {
                DqsError::InvalidParameter(format!(
                    "no closed form for {:?} with {:?} readout on {} modes",
                    self.strategy.kind, self.strategy.measurement, self.strategy.modes
                ))
            })?);
            rep.metadata.cfi_source = "analytic".into();
        } else if !matches!(self.readout, Readout::None) {
            let est = cfi_from_probabilities(|a| self.probabilities(a), alpha, &self.cfg.numerics)?;
            rep.cfi = Some(est.value);
            rep.metadata.fd_step = Some(est.fd_step);
            rep.metadata.richardson_flag |= est.flagged;
            rep.metadata.cfi_source = if self.needs_density() { "density" } else { "diagonal" }.into();
            if self.needs_density() {
                rep.metadata.phase_nodes = Some(self.cfg.phase_nodes.unwrap_or(exact_phase_nodes(self.space())));
            }
        }
        if self.cfg.qfi && self.space().dim() <= self.cfg.qfi_max_dim {
            let q = qfi_mixed(|a| self.channel(a), alpha, &self.cfg.numerics)?;
            rep.qfi = Some(q.value);
            rep.metadata.fd_step.get_or_insert(q.fd_step);
            rep.metadata.eigen_cutoff = Some(self.cfg.numerics.eigen_cutoff);
            rep.metadata.richardson_flag |= q.flagged;
            rep.metadata.phase_nodes.get_or_insert(self.cfg.phase_nodes.unwrap_or(exact_phase_nodes(self.space())));
        }
        rep.update_chain_flag();
        Ok(rep)
    }
}

/// Grid summary of where the advantage over the SQL ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicalRange {
    pub threshold: f64,
    /// Largest grid α before the first point at or below the threshold.
    pub last_above: Option<f64>,
    pub first_below: Option<f64>,
}

impl DynamicalRange {
    fn from_reports(axis: &[f64], reports: &[FisherReport], threshold: f64) -> Self {
        let mut last_above = None;
        let mut first_below = None;
        for (a, r) in axis.iter().zip(reports) {
            match r.cfi {
                Some(c) if c > threshold => last_above = Some(*a),
                Some(_) => {
                    first_below = Some(*a);
                    break;
                }
                None => break,
            }
        }
        Self { threshold, last_above, first_below }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub version: String,
    pub strategy: Strategy,
    pub config: ScenarioConfig,
    /// Fixed α of a noise scan.
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub reports: Vec<FisherReport>,
    pub noise: Vec<NoiseSpec>,
    pub dynamical_range: Option<DynamicalRange>,
    pub provenance: Provenance,
}

fn check_axis(axis: &[f64], name: &str) -> Result<()> {
    if axis.is_empty() {
        return Err(DqsError::InvalidParameter(format!("empty {name} grid")));
    }
    if axis.iter().any(|x| !x.is_finite()) {
        return Err(DqsError::InvalidParameter(format!("non-finite value in {name} grid")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DqsError::InvalidParameter(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

fn provenance(strategy: &Strategy, cfg: &ScenarioConfig, alpha: Option<f64>) -> Provenance {
    Provenance { version: env!("CARGO_PKG_VERSION").to_string(), strategy: *strategy, config: *cfg, alpha }
}

/// Fisher information over an α grid, evaluated in parallel.
pub fn saturation_scan(strategy: &Strategy, alphas: &[f64], cfg: &ScenarioConfig) -> Result<ScanResult> {
    check_axis(alphas, "alpha")?;
    if alphas[0] <= 0.0 {
        return Err(DqsError::InvalidParameter("alpha grid must be positive".into()));
    }
    let eval = Evaluator::new(strategy, cfg, *alphas.last().unwrap(), None)?;
    let reports = alphas.par_iter().map(|&a| eval.evaluate(a)).collect::<Result<Vec<_>>>()?;
    let threshold = cfg.range_multiple * eval.chain.sql;
    Ok(ScanResult {
        axis_name: "alpha".into(),
        axis: alphas.to_vec(),
        dynamical_range: Some(DynamicalRange::from_reports(alphas, &reports, threshold)),
        reports,
        noise: Vec::new(),
        provenance: provenance(strategy, cfg, None),
    })
}

/// Axis value of a noise descriptor.
pub fn noise_axis_value(noise: &NoiseSpec) -> f64 {
    match *noise {
        NoiseSpec::Loss { kappa_t } => kappa_t,
        NoiseSpec::Heating { kappa_t, nbar } => kappa_t * nbar,
        NoiseSpec::Dephasing { gamma_t } => gamma_t,
        NoiseSpec::Jitter { sigma } => sigma,
    }
}

/// Evaluates one noisy configuration at `alpha`.
pub fn noisy_report(strategy: &Strategy, noise: &NoiseSpec, alpha: f64, cfg: &ScenarioConfig) -> Result<FisherReport> {
    noise.validate()?;
    Evaluator::new(strategy, cfg, alpha, Some(*noise))?.evaluate(alpha)
}

/// Fisher information at fixed α across noise strengths of one kind.
pub fn noise_scan(strategy: &Strategy, noise: &[NoiseSpec], alpha: f64, cfg: &ScenarioConfig) -> Result<ScanResult> {
    if noise.is_empty() {
        return Err(DqsError::InvalidParameter("empty noise grid".into()));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(DqsError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let kind = noise[0].kind_name();
    if noise.iter().any(|n| n.kind_name() != kind) {
        return Err(DqsError::InvalidParameter("a noise scan takes one noise kind".into()));
    }
    for n in noise {
        n.validate()?;
    }
    let axis: Vec<f64> = noise.iter().map(noise_axis_value).collect();
    check_axis(&axis, kind)?;
    let reports = noise.par_iter().map(|n| noisy_report(strategy, n, alpha, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        axis_name: format!("{kind}_strength"),
        axis,
        reports,
        noise: noise.to_vec(),
        dynamical_range: None,
        provenance: provenance(strategy, cfg, Some(alpha)),
    })
}

/// Agreement between independent evaluation paths at one α.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub alpha: f64,
    pub numeric_cfi: f64,
    pub analytic_cfi: Option<f64>,
    pub prediction: Option<f64>,
    pub qfi: Option<f64>,
    pub bound_eq6: f64,
    /// `|analytic − numeric| / numeric`
    pub analytic_vs_numeric: Option<f64>,
    pub prediction_vs_numeric: Option<f64>,
    /// Relative excess of `cfi ≤ qfi ≤ eq6`, zero when ordered.
    pub qfi_chain_excess: Option<f64>,
    pub definite_parity: bool,
}

impl CrossCheck {
    /// Largest deviation across the available pairs.
    pub fn max_deviation(&self) -> f64 {
        [self.analytic_vs_numeric, self.prediction_vs_numeric, self.qfi_chain_excess]
            .iter()
            .flatten()
            .fold(0.0, |a, b| a.max(*b))
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Compares closed form, small-α prediction and SLD QFI against the Fock-space CFI.
pub fn oracle_crosscheck(strategy: &Strategy, alpha: f64, cfg: &ScenarioConfig) -> Result<CrossCheck> {
    let mut numeric_cfg = *cfg;
    numeric_cfg.analytic = false;
    let eval = Evaluator::new(strategy, &numeric_cfg, alpha, None)?;
    let rep = eval.evaluate(alpha)?;
    let numeric = rep.cfi.ok_or_else(|| DqsError::InvalidParameter("strategy has no Fock-space readout".into()))?;
    let analytic = analytic_cfi(strategy, alpha)?;
    let definite = eval.probe.numeric_state().definite_parity().is_some();
    let prediction = rep.metadata.prediction;
    let qfi_chain_excess = rep.qfi.map(|q| {
        let over_q = (numeric - q) / q;
        let over_b = (q - rep.bound_eq6) / rep.bound_eq6;
        over_q.max(over_b).max(0.0)
    });
    Ok(CrossCheck {
        alpha,
        numeric_cfi: numeric,
        analytic_cfi: analytic,
        prediction,
        qfi: rep.qfi,
        bound_eq6: rep.bound_eq6,
        analytic_vs_numeric: analytic.map(|a| rel(a, numeric)),
        prediction_vs_numeric: prediction.map(|p| rel(p, numeric)),
        qfi_chain_excess,
        definite_parity: definite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Parity;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::default()
    }

    #[test]
    fn delocalized_fock_two_splits_into_common_mode() {
        let s = Strategy::new(StrategyKind::Delocalized, StateSpec::fock(2), 2);
        let c = build_strategy_state(&s, &cfg()).unwrap().summary();
        assert!((c.nb_mean - 2.0).abs() < 1e-12);
        assert!((c.total_mean - 2.0).abs() < 1e-12);
        assert!((c.f_self() - 24.0).abs() < 1e-10);
        assert!((c.f_cross() - 16.0).abs() < 1e-10);
    }

    #[test]
    fn separable_has_no_cross_term() {
        let s = Strategy::new(StrategyKind::Separable, StateSpec::fock(1), 2);
        let c = build_strategy_state(&s, &cfg()).unwrap().summary();
        assert!((c.total_mean - 2.0).abs() < 1e-12);
        assert!(c.f_cross().abs() < 1e-12);
    }

    #[test]
    fn multimode_cat_coherences_are_equal() {
        let g: f64 = 0.9;
        let s = Strategy::new(StrategyKind::MultimodeCat, StateSpec::cat(g, Parity::Even), 2);
        let c = build_strategy_state(&s, &cfg()).unwrap().summary();
        let e = (-2.0 * 2.0 * g * g).exp();
        let want = g * g * (1.0 - e) / (1.0 + e);
        for i in 0..2 {
            for j in 0..2 {
                assert!((c.coherences[(i, j)].re - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn common_mode_surrogate_matches_explicit_two_mode() {
        let base = StateSpec::fock(2);
        let alphas = [1e-3, 0.05, 0.2];
        let explicit = saturation_scan(&Strategy::new(StrategyKind::Delocalized, base, 2), &alphas, &cfg()).unwrap();
        let common =
            saturation_scan(&Strategy::new(StrategyKind::AllInCommonAnalytic, base, 2), &alphas, &cfg()).unwrap();
        for (a, b) in explicit.reports.iter().zip(&common.reports) {
            assert!(rel(a.cfi.unwrap(), b.cfi.unwrap()) < 1e-6);
            assert!(rel(a.qfi.unwrap(), b.qfi.unwrap()) < 1e-6);
            assert!((a.f_self - b.f_self).abs() < 1e-9 && (a.f_cross - b.f_cross).abs() < 1e-9);
            assert!(rel(a.metadata.prediction.unwrap(), b.metadata.prediction.unwrap()) < 1e-9);
        }
    }

    #[test]
    fn vacuum_never_beats_sql() {
        let s = Strategy::new(StrategyKind::Separable, StateSpec::fock(0), 2);
        let r = saturation_scan(&s, &[1e-3, 0.1, 0.4, 0.8], &cfg()).unwrap();
        for rep in &r.reports {
            assert!(rep.cfi.unwrap() <= 8.0 * 1.001);
            assert!(!rep.metadata.chain_violation, "{rep:?}");
        }
        assert_eq!(r.dynamical_range.unwrap().last_above, None);
    }

    #[test]
    fn grids_are_checked() {
        let s = Strategy::new(StrategyKind::Separable, StateSpec::fock(1), 1);
        assert!(saturation_scan(&s, &[], &cfg()).is_err());
        assert!(saturation_scan(&s, &[0.1, 0.1], &cfg()).is_err());
        let noise = [NoiseSpec::Dephasing { gamma_t: 0.2 }, NoiseSpec::Loss { kappa_t: 0.1 }];
        assert!(noise_scan(&s, &noise, 0.1, &cfg()).is_err());
    }

    #[test]
    fn dephasing_leaves_separable_probe_flat() {
        let s = Strategy::new(StrategyKind::Separable, StateSpec::fock(1), 2);
        let noise: Vec<NoiseSpec> = [0.0, 0.5, 2.0].iter().map(|&g| NoiseSpec::Dephasing { gamma_t: g }).collect();
        let r = noise_scan(&s, &noise, 1e-3, &cfg()).unwrap();
        let c0 = r.reports[0].cfi.unwrap();
        for rep in &r.reports {
            assert!(rel(rep.cfi.unwrap(), c0) < 1e-3);
        }
    }

    #[test]
    fn crosscheck_single_fock() {
        let s = Strategy::new(StrategyKind::Separable, StateSpec::fock(1), 1);
        let x = oracle_crosscheck(&s, 1e-3, &cfg()).unwrap();
        assert!(x.max_deviation() < 0.01, "{x:?}");
        let coh = Strategy::new(StrategyKind::Separable, StateSpec::coherent(C64::new(0.5, 0.0)), 1);
        let x = oracle_crosscheck(&coh, 1e-3, &cfg()).unwrap();
        assert!(!x.definite_parity && x.prediction.is_none());
    }

    #[test]
    fn coherent_probe_in_its_own_frame_reaches_sql() {
        let s = Strategy::new(StrategyKind::Separable, StateSpec::coherent(C64::new(1.0, 0.0)), 1)
            .with_frame(ReadoutFrame::ProbeMean);
        let mut c = cfg();
        c.qfi = false;
        let r = saturation_scan(&s, &[1e-3], &c).unwrap();
        assert!(rel(r.reports[0].cfi.unwrap(), 4.0) < 0.01);
    }
}
