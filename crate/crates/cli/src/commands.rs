//! One function per subcommand; each returns a table and its JSON mirror.

use crate::config::{Command, RunConfig};
use crate::output::{Cell, Table};
use crate::CliError;
use dqs_core::fock::{Parity, StateSpec, C64};
use dqs_core::metrology::{
    analytic_two_mode_parity_fi, dynamical_range, homodyne_fi_gaussian, homodyne_mixed_asymptote, FisherReport,
    HomodyneScheme, TwoModeStrategy,
};
use dqs_core::scenarios::{
    noise_scan, oracle_crosscheck, saturation_scan, CrossCheck, ScanResult, ScenarioConfig, Strategy, StrategyKind,
};
use serde::Serialize;
use serde_json::{json, Value};

pub struct Outcome {
    pub table: Table,
    pub json: Value,
    /// Set by `validate` when a check fails.
    pub breach: bool,
}

const SCAN_COLUMNS: [&str; 22] = [
    "axis",
    "noise_kind",
    "alpha",
    "cfi",
    "qfi",
    "f_self",
    "f_cross",
    "bound_eq6",
    "bound_eq7",
    "bound_eq10",
    "bound_eq17",
    "bound_phase_fixed",
    "sql",
    "prediction",
    "prediction_rel_delta",
    "fd_step",
    "phase_nodes",
    "eigen_cutoff",
    "cfi_source",
    "leakage",
    "richardson_flag",
    "chain_violation",
];

fn report_row(axis: f64, noise_kind: &str, r: &FisherReport) -> Vec<Cell> {
    let delta = match (r.cfi, r.metadata.prediction) {
        (Some(c), Some(p)) if c != 0.0 => Some((p - c) / c),
        _ => None,
    };
    vec![
        axis.into(),
        noise_kind.into(),
        r.alpha.into(),
        r.cfi.into(),
        r.qfi.into(),
        r.f_self.into(),
        r.f_cross.into(),
        r.bound_eq6.into(),
        r.bound_eq7.into(),
        r.bound_eq10.into(),
        r.bound_eq17.into(),
        r.bound_phase_fixed.into(),
        r.sql.into(),
        r.metadata.prediction.into(),
        delta.into(),
        r.metadata.fd_step.into(),
        r.metadata.phase_nodes.into(),
        r.metadata.eigen_cutoff.into(),
        r.metadata.cfi_source.as_str().into(),
        r.metadata.leakage.into(),
        r.metadata.richardson_flag.into(),
        r.metadata.chain_violation.into(),
    ]
}

fn scan_table(scan: &ScanResult) -> Table {
    let mut t = Table::new(SCAN_COLUMNS.to_vec());
    t.note("axis", &scan.axis_name);
    let s = &scan.provenance.strategy;
    t.note("probe", format!("{:?}/{}/{}", s.kind, s.base.family_name(), s.modes).to_lowercase());
    if let Some(d) = &scan.dynamical_range {
        t.note("range_threshold", d.threshold);
        t.note("range_last_above", d.last_above.map_or(String::new(), |v| v.to_string()));
        t.note("range_first_below", d.first_below.map_or(String::new(), |v| v.to_string()));
    }
    for (i, r) in scan.reports.iter().enumerate() {
        let kind = scan.noise.get(i).map_or("", |n| n.kind_name());
        t.push(report_row(scan.axis[i], kind, r));
    }
    t
}

fn document<T: Serialize>(command: Command, cfg: &RunConfig, body: &T) -> Value {
    json!({
        "dqs_version": env!("CARGO_PKG_VERSION"),
        "table_version": crate::output::TABLE_VERSION,
        "command": command.name(),
        "config": cfg,
        "result": body,
    })
}

pub fn bounds(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut sc = cfg.scenario_config()?;
    sc.analytic = false;
    sc.qfi = true;
    scan(Command::Bounds, cfg, &sc)
}

pub fn saturate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    scan(Command::Saturate, cfg, &cfg.scenario_config()?)
}

fn scan(command: Command, cfg: &RunConfig, sc: &ScenarioConfig) -> Result<Outcome, CliError> {
    let result = saturation_scan(&cfg.strategy()?, &cfg.grid.alphas()?, sc)?;
    Ok(Outcome { table: scan_table(&result), json: document(command, cfg, &result), breach: false })
}

pub fn noise(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (grid, alpha) = cfg.grid.noise_grid()?;
    let result = noise_scan(&cfg.strategy()?, &grid, alpha, &cfg.scenario_config()?)?;
    Ok(Outcome { table: scan_table(&result), json: document(Command::NoiseScan, cfg, &result), breach: false })
}

#[derive(Serialize)]
struct TwoModeRow {
    alpha: f64,
    delocalized: f64,
    single_mode: f64,
    separable: f64,
    homodyne: Option<[f64; 4]>,
}

#[derive(Serialize)]
struct TwoModeResult {
    family: &'static str,
    nbar: f64,
    sql: f64,
    /// First α at which each strategy drops to the threshold, in `TwoModeStrategy::ALL` order.
    range_threshold: f64,
    dynamical_range: Vec<Option<f64>>,
    rows: Vec<TwoModeRow>,
}

pub fn two_mode(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let probe = cfg.probe.as_ref().ok_or_else(|| CliError::Config("a [probe] table is required".into()))?;
    let spec = probe.base.to_spec()?;
    let alphas = cfg.grid.alphas()?;
    let sql = 8.0;
    let threshold = cfg.scenario.range_multiple * sql;
    let squeeze = match spec {
        StateSpec::SqueezedVacuum { r } => Some(r),
        _ => None,
    };
    let alpha_max = *alphas.last().unwrap();
    let ranges = TwoModeStrategy::ALL
        .iter()
        .map(|&s| dynamical_range(|a| analytic_two_mode_parity_fi(&spec, a, s), threshold, alpha_max))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = alphas
        .iter()
        .map(|&a| -> Result<TwoModeRow, CliError> {
            let fi = |s| analytic_two_mode_parity_fi(&spec, a, s);
            let homodyne = match squeeze {
                Some(r) => Some([
                    homodyne_fi_gaussian(HomodyneScheme::TwoCopies, r, a)?,
                    homodyne_fi_gaussian(HomodyneScheme::Interferometric, r, a)?,
                    homodyne_fi_gaussian(HomodyneScheme::InterferometricMixed, r, a)?,
                    homodyne_mixed_asymptote(spec.mean_occupation(), a),
                ]),
                None => None,
            };
            Ok(TwoModeRow {
                alpha: a,
                delocalized: fi(TwoModeStrategy::Delocalized)?,
                single_mode: fi(TwoModeStrategy::SingleMode)?,
                separable: fi(TwoModeStrategy::Separable)?,
                homodyne,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(vec![
        "alpha",
        "delocalized",
        "single_mode",
        "separable",
        "homodyne_two_copies",
        "homodyne_interferometric",
        "homodyne_interferometric_mixed",
        "homodyne_mixed_asymptote",
        "sql",
    ]);
    t.note("family", spec.family_name());
    t.note("nbar", spec.mean_occupation());
    t.note("range_threshold", threshold);
    for (s, r) in TwoModeStrategy::ALL.iter().zip(&ranges) {
        t.note(&format!("range_{}", s.name()), r.map_or(String::new(), |v| v.to_string()));
    }
    for row in &rows {
        let h = row.homodyne.map_or([None; 4], |h| h.map(Some));
        t.push(vec![
            row.alpha.into(),
            row.delocalized.into(),
            row.single_mode.into(),
            row.separable.into(),
            h[0].into(),
            h[1].into(),
            h[2].into(),
            h[3].into(),
            sql.into(),
        ]);
    }
    let result = TwoModeResult {
        family: spec.family_name(),
        nbar: spec.mean_occupation(),
        sql,
        range_threshold: threshold,
        dynamical_range: ranges,
        rows,
    };
    Ok(Outcome { table: t, json: document(Command::TwoMode, cfg, &result), breach: false })
}

/// Fixed battery of cross-checks run by `validate`.
pub fn battery() -> Vec<(&'static str, Strategy)> {
    use StrategyKind::*;
    vec![
        ("fock1_single", Strategy::new(Separable, StateSpec::fock(1), 1)),
        ("vacuum_pair", Strategy::new(Separable, StateSpec::fock(0), 2)),
        ("fock1_separable_pair", Strategy::new(Separable, StateSpec::fock(1), 2)),
        ("fock2_delocalized", Strategy::new(Delocalized, StateSpec::fock(2), 2)),
        ("squeezed_delocalized", Strategy::new(Delocalized, StateSpec::squeezed_with_mean(0.5625), 2)),
        ("cat_single_mode_readout", Strategy::new(SingleModeReadout, StateSpec::cat_with_mean(1.0), 2)),
        ("odd_cat_separable", Strategy::new(Separable, StateSpec::cat(1.0, Parity::Odd), 2)),
        ("coherent_guard", Strategy::new(Separable, StateSpec::coherent(C64::new(0.5, 0.0)), 1)),
    ]
}

#[derive(Serialize)]
struct CheckRow {
    check: String,
    #[serde(flatten)]
    result: CrossCheck,
    pass: bool,
}

fn passes(x: &CrossCheck, tol: f64, analytic_tol: f64) -> bool {
    let within = |v: Option<f64>, t: f64| v.map_or(true, |d| d <= t);
    let ordered = within(x.analytic_vs_numeric, analytic_tol)
        && within(x.prediction_vs_numeric, tol)
        && within(x.qfi_chain_excess, tol)
        && x.numeric_cfi.is_finite();
    // a probe without definite parity must not get a parity prediction
    ordered && (x.definite_parity || x.prediction.is_none())
}

pub fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sc = cfg.scenario_config()?;
    let v = cfg.validate;
    let mut checks = battery();
    if cfg.probe.is_some() {
        checks.push(("config_probe", cfg.strategy()?));
    }
    let mut rows = Vec::new();
    for (name, s) in checks {
        let x = oracle_crosscheck(&s, v.alpha, &sc)?;
        let pass = passes(&x, v.tolerance, v.analytic_tolerance);
        rows.push(CheckRow { check: name.to_string(), result: x, pass });
    }
    let mut t = Table::new(vec![
        "check",
        "alpha",
        "numeric_cfi",
        "analytic_cfi",
        "prediction",
        "qfi",
        "bound_eq6",
        "analytic_vs_numeric",
        "prediction_vs_numeric",
        "qfi_chain_excess",
        "definite_parity",
        "pass",
    ]);
    t.note("tolerance", v.tolerance);
    t.note("analytic_tolerance", v.analytic_tolerance);
    for r in &rows {
        let x = &r.result;
        t.push(vec![
            r.check.as_str().into(),
            x.alpha.into(),
            x.numeric_cfi.into(),
            x.analytic_cfi.into(),
            x.prediction.into(),
            x.qfi.into(),
            x.bound_eq6.into(),
            x.analytic_vs_numeric.into(),
            x.prediction_vs_numeric.into(),
            x.qfi_chain_excess.into(),
            x.definite_parity.into(),
            r.pass.into(),
        ]);
    }
    let breach = rows.iter().any(|r| !r.pass);
    let json = document(Command::Validate, cfg, &json!({ "checks": rows, "pass": !breach }));
    Ok(Outcome { table: t, json, breach })
}

pub fn dispatch(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.check_for(command)?;
    match command {
        Command::Bounds => bounds(cfg),
        Command::Saturate => saturate(cfg),
        Command::NoiseScan => noise(cfg),
        Command::TwoMode => two_mode(cfg),
        Command::Validate => validate(cfg),
    }
}
