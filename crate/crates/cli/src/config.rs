//! Run configuration read from TOML. Unknown keys are rejected everywhere.

use crate::CliError;
use dqs_core::channels::NoiseSpec;
use dqs_core::fock::{Parity, StateSpec, C64};
use dqs_core::metrology::NumericsConfig;
use dqs_core::scenarios::{Measurement, ReadoutFrame, ScenarioConfig, Strategy, StrategyKind};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Bounds,
    Saturate,
    NoiseScan,
    TwoMode,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Saturate => "saturate",
            Command::NoiseScan => "noise-scan",
            Command::TwoMode => "two-mode",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must match the subcommand when given.
    pub command: Option<Command>,
    pub probe: Option<ProbeConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub scenario: ScenarioSettings,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Fock,
    SqueezedVacuum,
    Coherent,
    Cat,
}

/// Single-mode base state; squeezed and cat states may be given by mean occupation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseConfig {
    pub family: Family,
    pub n: Option<usize>,
    pub r: Option<f64>,
    pub gamma: Option<f64>,
    pub parity: Option<Parity>,
    pub nbar: Option<f64>,
    pub re: Option<f64>,
    pub im: Option<f64>,
}

impl BaseConfig {
    pub fn to_spec(&self) -> Result<StateSpec, CliError> {
        let err = |m: &str| Err(CliError::Config(format!("probe.base ({:?}): {m}", self.family)));
        let used: &[(&str, bool)] = &[
            ("n", self.n.is_some()),
            ("r", self.r.is_some()),
            ("gamma", self.gamma.is_some()),
            ("parity", self.parity.is_some()),
            ("nbar", self.nbar.is_some()),
            ("re", self.re.is_some()),
            ("im", self.im.is_some()),
        ];
        let allowed: &[&str] = match self.family {
            Family::Fock => &["n"],
            Family::SqueezedVacuum => &["r", "nbar"],
            Family::Coherent => &["re", "im"],
            Family::Cat => &["gamma", "parity", "nbar"],
        };
        if let Some((k, _)) = used.iter().find(|(k, set)| *set && !allowed.contains(k)) {
            return err(&format!("field `{k}` does not apply"));
        }
        if let Some(nbar) = self.nbar {
            if !(nbar.is_finite() && nbar >= 0.0) {
                return err("nbar must be a non-negative number");
            }
        }
        let spec = match self.family {
            Family::Fock => match self.n {
                Some(n) => StateSpec::fock(n),
                None => return err("needs `n`"),
            },
            Family::SqueezedVacuum => match (self.r, self.nbar) {
                (Some(r), None) => StateSpec::squeezed(r),
                (None, Some(nbar)) => StateSpec::squeezed_with_mean(nbar),
                _ => return err("needs exactly one of `r` and `nbar`"),
            },
            Family::Coherent => StateSpec::coherent(C64::new(self.re.unwrap_or(0.0), self.im.unwrap_or(0.0))),
            Family::Cat => match (self.gamma, self.nbar, self.parity.unwrap_or(Parity::Even)) {
                (Some(gamma), None, parity) => StateSpec::cat(gamma, parity),
                (None, Some(nbar), Parity::Even) => StateSpec::cat_with_mean(nbar),
                (None, Some(_), Parity::Odd) => return err("`nbar` is supported for even cats only"),
                _ => return err("needs exactly one of `gamma` and `nbar`"),
            },
        };
        spec.validate().map_err(|e| CliError::Config(format!("probe.base: {e}")))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub kind: Option<StrategyKind>,
    pub modes: Option<usize>,
    pub base: BaseConfig,
    pub measurement: Option<Measurement>,
    pub frame: Option<ReadoutFrame>,
}

impl ProbeConfig {
    pub fn strategy(&self) -> Result<Strategy, CliError> {
        let kind = self.kind.ok_or_else(|| CliError::Config("probe.kind is required".into()))?;
        let modes = self.modes.ok_or_else(|| CliError::Config("probe.modes is required".into()))?;
        let mut s = Strategy::new(kind, self.base.to_spec()?, modes);
        if let Some(m) = self.measurement {
            s = s.with_measurement(m);
        }
        if let Some(f) = self.frame {
            s = s.with_frame(f);
        }
        s.validate().map_err(|e| CliError::Config(format!("probe: {e}")))?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl RangeConfig {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let bad = |m: &str| Err(CliError::Config(format!("grid.alpha_range: {m}")));
        if self.count == 0 {
            return bad("count must be positive (empty grid)");
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start <= 0.0 || self.stop < self.start {
            return bad("needs 0 < start <= stop");
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let k = (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| {
                let t = i as f64 / k;
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub alpha: Option<Vec<f64>>,
    pub alpha_range: Option<RangeConfig>,
    pub noise: Option<Vec<NoiseSpec>>,
    /// Fixed α for noise scans.
    pub noise_alpha: Option<f64>,
}

impl GridConfig {
    /// The α axis; exactly one of `alpha` and `alpha_range` must be set.
    pub fn alphas(&self) -> Result<Vec<f64>, CliError> {
        let v = match (&self.alpha, &self.alpha_range) {
            (Some(v), None) => v.clone(),
            (None, Some(r)) => r.values()?,
            (Some(_), Some(_)) => return Err(CliError::Config("set only one of grid.alpha and grid.alpha_range".into())),
            (None, None) => return Err(CliError::Config("grid.alpha or grid.alpha_range is required".into())),
        };
        if v.is_empty() {
            return Err(CliError::Config("grid.alpha is empty".into()));
        }
        if v.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(CliError::Config("grid.alpha values must be positive and finite".into()));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("grid.alpha must be strictly increasing".into()));
        }
        Ok(v)
    }

    pub fn noise_grid(&self) -> Result<(Vec<NoiseSpec>, f64), CliError> {
        let noise = self.noise.clone().ok_or_else(|| CliError::Config("grid.noise is required".into()))?;
        if noise.is_empty() {
            return Err(CliError::Config("grid.noise is empty".into()));
        }
        for n in &noise {
            n.validate().map_err(|e| CliError::Config(format!("grid.noise: {e}")))?;
        }
        let alpha = self.noise_alpha.ok_or_else(|| CliError::Config("grid.noise_alpha is required".into()))?;
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(CliError::Config("grid.noise_alpha must be positive".into()));
        }
        Ok((noise, alpha))
    }
}

/// Everything in [`ScenarioConfig`] except the numerics, which live in their own table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSettings {
    pub cutoff: Option<usize>,
    pub leakage_tol: f64,
    pub output_tol: f64,
    pub qfi: bool,
    pub qfi_max_dim: usize,
    pub analytic: bool,
    pub range_multiple: f64,
    pub phase_nodes: Option<usize>,
    pub jitter_nodes: usize,
}

impl Default for ScenarioSettings {
    fn default() -> Self {
        let d = ScenarioConfig::default();
        Self {
            cutoff: d.cutoff,
            leakage_tol: d.leakage_tol,
            output_tol: d.output_tol,
            qfi: d.qfi,
            qfi_max_dim: d.qfi_max_dim,
            analytic: d.analytic,
            range_multiple: d.range_multiple,
            phase_nodes: d.phase_nodes,
            jitter_nodes: d.jitter_nodes,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateConfig {
    /// Relative tolerance for prediction and QFI-chain checks.
    pub tolerance: f64,
    /// Relative tolerance for closed form versus Fock-space numerics.
    pub analytic_tolerance: f64,
    pub alpha: f64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self { tolerance: 1e-2, analytic_tolerance: 1e-3, alpha: 1e-3 }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn strategy(&self) -> Result<Strategy, CliError> {
        self.probe.as_ref().ok_or_else(|| CliError::Config("a [probe] table is required".into()))?.strategy()
    }

    pub fn scenario_config(&self) -> Result<ScenarioConfig, CliError> {
        let s = &self.scenario;
        let cfg = ScenarioConfig {
            numerics: self.numerics,
            cutoff: s.cutoff,
            leakage_tol: s.leakage_tol,
            output_tol: s.output_tol,
            qfi: s.qfi,
            qfi_max_dim: s.qfi_max_dim,
            analytic: s.analytic,
            range_multiple: s.range_multiple,
            phase_nodes: s.phase_nodes,
            jitter_nodes: s.jitter_nodes,
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Checks the fields `command` needs before any numerics run.
    pub fn check_for(&self, command: Command) -> Result<(), CliError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(CliError::Config(format!(
                    "config is for `{}` but `{}` was requested",
                    c.name(),
                    command.name()
                )));
            }
        }
        self.scenario_config()?;
        let v = &self.validate;
        if [v.tolerance, v.analytic_tolerance, v.alpha].iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(CliError::Config("validate settings must be positive".into()));
        }
        match command {
            Command::Bounds | Command::Saturate => {
                self.strategy()?;
                self.grid.alphas()?;
            }
            Command::NoiseScan => {
                self.strategy()?;
                self.grid.noise_grid()?;
            }
            Command::TwoMode => {
                let probe = self.probe.as_ref().ok_or_else(|| CliError::Config("a [probe] table is required".into()))?;
                probe.base.to_spec()?;
                self.grid.alphas()?;
            }
            Command::Validate => {
                if self.probe.is_some() {
                    self.strategy()?;
                }
            }
        }
        Ok(())
    }
}
