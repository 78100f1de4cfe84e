//! Scenario files: TOML with units in the key names.

use std::path::{Path, PathBuf};

use hbgbc_core::{AllocationSearch, ChannelScenario, EdOptions, ErrorBudgets, Order, PowerConstraint};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenario: String,
    #[serde(default)]
    pub seed: u64,
    pub channel: ChannelSpec,
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub ed: EdSpec,
    pub mc: Option<McSpec>,
    #[serde(default)]
    pub timesharing: TimesharingSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Channel gains, powers, blocklengths and error budgets.
///
/// Give either `power_sum` or both `power_user1` and `power_user2`, and
/// either `n2` or the ratio `p = n2/n1`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub h1: f64,
    pub h2: f64,
    pub power_sum: Option<f64>,
    pub power_user1: Option<f64>,
    pub power_user2: Option<f64>,
    pub n1: u64,
    pub n2: Option<u64>,
    pub p: Option<f64>,
    pub eps_total: Option<f64>,
    pub eps_user1: Option<f64>,
    pub eps_user2: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    N1,
    N2,
    P,
    H1,
    H2,
    PowerSum,
    PowerUser1,
    PowerUser2,
    EpsTotal,
}

impl SweepVar {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVar::N1 => "n1",
            SweepVar::N2 => "n2",
            SweepVar::P => "p",
            SweepVar::H1 => "h1",
            SweepVar::H2 => "h2",
            SweepVar::PowerSum => "power_sum",
            SweepVar::PowerUser1 => "power_user1",
            SweepVar::PowerUser2 => "power_user2",
            SweepVar::EpsTotal => "eps_total",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepVar::N1 | SweepVar::N2)
    }
}

/// Either explicit `values`, or `start`/`stop` with a linear `step` or a
/// point `count` (log-spaced when `log = true`).
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
    pub count: Option<usize>,
    #[serde(default)]
    pub log: bool,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    #[default]
    SumRate,
    Region,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SatoHet,
    SatoHom,
    SatoRho,
    SingleUser,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    #[serde(default)]
    pub mode: SweepMode,
    #[serde(default = "default_families")]
    pub families: Vec<Family>,
    /// Correlation for `sato_rho`; defaults to `√(h1/h2)`.
    pub rho: Option<f64>,
    #[serde(default)]
    pub order: Order,
}

fn default_families() -> Vec<Family> {
    vec![Family::SatoHet, Family::SatoHom]
}

impl Default for BoundsSpec {
    fn default() -> Self {
        BoundsSpec {
            mode: SweepMode::default(),
            families: default_families(),
            rho: None,
            order: Order::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EdSpec {
    /// Power margin `δ`; defaults to 5% of `power_user2`.
    pub delta: Option<f64>,
    #[serde(default)]
    pub include_log_k: bool,
    #[serde(default)]
    pub log_m2_target_bits: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    pub fixed_eps_sic2: Option<f64>,
}

fn default_grid_points() -> usize {
    256
}

impl Default for EdSpec {
    fn default() -> Self {
        EdSpec {
            delta: None,
            include_log_k: false,
            log_m2_target_bits: 0.0,
            grid_points: default_grid_points(),
            fixed_eps_sic2: None,
        }
    }
}

impl EdSpec {
    pub fn options(&self) -> EdOptions {
        EdOptions {
            delta: self.delta,
            include_log_k: self.include_log_k,
        }
    }

    pub fn search(&self) -> AllocationSearch {
        AllocationSearch {
            log_m2_target: self.log_m2_target_bits,
            fixed_eps_sic2: self.fixed_eps_sic2,
            grid_points: self.grid_points,
            ed: self.options(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Sic1Density,
    Rx1Density,
    CoopDensity,
    DtDecoder,
    ErrorDecomposition,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::Sic1Density,
        Check::Rx1Density,
        Check::CoopDensity,
        Check::DtDecoder,
        Check::ErrorDecomposition,
    ];
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub trials: u64,
    #[serde(default = "default_sigmas")]
    pub confidence_sigmas: f64,
    #[serde(default = "all_checks")]
    pub checks: Vec<Check>,
    /// Noise correlation for the cooperative check; defaults to `√(h1/h2)`.
    pub rho: Option<f64>,
    /// Blocklengths of the codebook-level simulations.
    #[serde(default = "default_toy_n1")]
    pub toy_n1: u64,
    #[serde(default = "default_toy_n2")]
    pub toy_n2: u64,
    #[serde(default = "default_messages")]
    pub messages: usize,
}

fn default_sigmas() -> f64 {
    4.0
}

fn all_checks() -> Vec<Check> {
    Check::ALL.to_vec()
}

fn default_toy_n1() -> u64 {
    32
}

fn default_toy_n2() -> u64 {
    16
}

fn default_messages() -> usize {
    16
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimesharingSpec {
    #[serde(default = "default_alpha_step")]
    pub alpha_step: f64,
    #[serde(default = "default_ts_blocklengths")]
    pub blocklengths: Vec<u64>,
    #[serde(default = "default_true")]
    pub normalize: bool,
}

fn default_alpha_step() -> f64 {
    0.05
}

fn default_ts_blocklengths() -> Vec<u64> {
    vec![128, 512, 2048]
}

fn default_true() -> bool {
    true
}

impl Default for TimesharingSpec {
    fn default() -> Self {
        TimesharingSpec {
            alpha_step: default_alpha_step(),
            blocklengths: default_ts_blocklengths(),
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub ndjson: Option<PathBuf>,
}

fn bad(field: impl Into<String>, constraint: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.into(),
        constraint: constraint.into(),
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    /// Checks the file as a whole, including every sweep point, before any
    /// computation.
    pub fn validate(&self) -> Result<()> {
        if self.scenario.is_empty() || self.scenario.contains([',', '"', '\n']) {
            return Err(bad(
                "scenario",
                "must be nonempty and free of commas, quotes and newlines",
            ));
        }
        let c = &self.channel;
        match (c.power_sum, c.power_user1, c.power_user2) {
            (Some(_), None, None) | (None, Some(_), Some(_)) => {}
            _ => {
                return Err(bad(
                    "channel.power_sum",
                    "give either power_sum or both power_user1 and power_user2",
                ))
            }
        }
        if c.n2.is_some() == c.p.is_some() {
            return Err(bad("channel.n2", "give exactly one of n2 and p"));
        }
        match (c.eps_total, c.eps_user1, c.eps_user2) {
            (Some(_), None, None) | (_, Some(_), Some(_)) => {}
            _ => {
                return Err(bad(
                    "channel.eps_total",
                    "give eps_total, or both eps_user1 and eps_user2",
                ))
            }
        }
        if let Some(rho) = self.bounds.rho {
            if !(rho.abs() < 1.0) {
                return Err(bad("bounds.rho", format!("must satisfy |rho| < 1, got {rho}")));
            }
        }
        if self.bounds.families.is_empty() {
            return Err(bad("bounds.families", "must list at least one family"));
        }
        if let Some(mc) = &self.mc {
            if mc.trials == 0 {
                return Err(bad("mc.trials", "must be at least 1"));
            }
            if !(mc.confidence_sigmas.is_finite() && mc.confidence_sigmas > 0.0) {
                return Err(bad("mc.confidence_sigmas", "must be finite and > 0"));
            }
            if mc.checks.is_empty() {
                return Err(bad("mc.checks", "must list at least one check"));
            }
            if let Some(rho) = mc.rho {
                if !(rho.abs() < 1.0) {
                    return Err(bad("mc.rho", format!("must satisfy |rho| < 1, got {rho}")));
                }
            }
        }
        let ts = &self.timesharing;
        if !(ts.alpha_step > 0.0 && ts.alpha_step <= 1.0) {
            return Err(bad("timesharing.alpha_step", "must be in (0, 1]"));
        }
        if ts.blocklengths.is_empty() || ts.blocklengths.contains(&0) {
            return Err(bad(
                "timesharing.blocklengths",
                "must be a nonempty list of positive integers",
            ));
        }
        for v in self.sweep_values()? {
            self.scenario_at(v)?;
        }
        Ok(())
    }

    /// The sweep variable and its values; a file without a sweep evaluates
    /// the single point `n1`.
    pub fn sweep_variable(&self) -> SweepVar {
        self.sweep.as_ref().map_or(SweepVar::N1, |s| s.variable)
    }

    pub fn sweep_values(&self) -> Result<Vec<f64>> {
        let Some(sw) = &self.sweep else {
            return Ok(vec![self.channel.n1 as f64]);
        };
        let mut values = match (&sw.values, sw.start, sw.stop, sw.step, sw.count) {
            (Some(v), None, None, None, None) => {
                if v.is_empty() {
                    return Err(bad("sweep.values", "must not be empty"));
                }
                v.clone()
            }
            (None, Some(a), Some(b), Some(step), None) if !sw.log => {
                if !(step > 0.0 && b >= a && a.is_finite() && b.is_finite()) {
                    return Err(bad("sweep.step", "needs step > 0 and start <= stop"));
                }
                let k = ((b - a) / step + 1e-9).floor() as usize;
                (0..=k).map(|i| a + step * i as f64).collect()
            }
            (None, Some(a), Some(b), None, Some(k)) => {
                if k == 0 || !(b >= a && a.is_finite() && b.is_finite()) || (sw.log && a <= 0.0) {
                    return Err(bad(
                        "sweep.count",
                        "needs count >= 1 and start <= stop (start > 0 for log spacing)",
                    ));
                }
                if k == 1 {
                    vec![a]
                } else {
                    (0..k)
                        .map(|i| {
                            let t = i as f64 / (k - 1) as f64;
                            if sw.log {
                                (a.ln() * (1.0 - t) + b.ln() * t).exp()
                            } else {
                                a + (b - a) * t
                            }
                        })
                        .collect()
                }
            }
            _ => {
                return Err(bad(
                    "sweep",
                    "give values, or start and stop with either step (linear) or count",
                ))
            }
        };
        if sw.variable.is_integer() {
            for v in &mut values {
                *v = v.round();
            }
            values.dedup();
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(bad("sweep.values", "must be finite"));
        }
        Ok(values)
    }

    /// Channel specification with the sweep variable set to `value`.
    pub fn channel_at(&self, value: f64) -> Result<ChannelSpec> {
        let mut c = self.channel.clone();
        let var = self.sweep_variable();
        if var.is_integer() && !(value >= 1.0 && value <= u64::MAX as f64) {
            return Err(bad(
                format!("sweep.{}", var.as_str()),
                format!("must be >= 1, got {value}"),
            ));
        }
        match var {
            SweepVar::N1 => c.n1 = value as u64,
            SweepVar::N2 => {
                c.n2 = Some(value as u64);
                c.p = None;
            }
            SweepVar::P => {
                c.p = Some(value);
                c.n2 = None;
            }
            SweepVar::H1 => c.h1 = value,
            SweepVar::H2 => c.h2 = value,
            SweepVar::PowerSum => {
                if c.power_sum.is_none() {
                    return Err(bad("sweep.variable", "power_sum sweep needs a power_sum channel"));
                }
                c.power_sum = Some(value);
            }
            SweepVar::PowerUser1 | SweepVar::PowerUser2 => {
                if c.power_user1.is_none() {
                    return Err(bad(
                        "sweep.variable",
                        "per-user power sweep needs power_user1/power_user2",
                    ));
                }
                if var == SweepVar::PowerUser1 {
                    c.power_user1 = Some(value);
                } else {
                    c.power_user2 = Some(value);
                }
            }
            SweepVar::EpsTotal => {
                c.eps_total = Some(value);
                c.eps_user1 = None;
                c.eps_user2 = None;
            }
        }
        Ok(c)
    }

    pub fn scenario_at(&self, value: f64) -> Result<ChannelScenario> {
        self.channel_at(value)?.scenario()
    }
}

impl ChannelSpec {
    pub fn n2(&self) -> Result<u64> {
        match (self.n2, self.p) {
            (Some(n2), _) => Ok(n2),
            (None, Some(p)) => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(bad("channel.p", format!("must be in (0, 1], got {p}")));
                }
                Ok(((p * self.n1 as f64).round() as u64).max(1))
            }
            (None, None) => Err(bad("channel.n2", "give n2 or p")),
        }
    }

    pub fn power(&self) -> Result<PowerConstraint> {
        match (self.power_sum, self.power_user1, self.power_user2) {
            (Some(p), None, None) => Ok(PowerConstraint::Sum(p)),
            (None, Some(p1), Some(p2)) => Ok(PowerConstraint::Individual { p1, p2 }),
            _ => Err(bad(
                "channel.power_sum",
                "give either power_sum or both per-user powers",
            )),
        }
    }

    pub fn budgets(&self) -> Result<ErrorBudgets> {
        match (self.eps_user1, self.eps_user2, self.eps_total) {
            (Some(eps1), Some(eps2), _) => Ok(ErrorBudgets { eps1, eps2 }),
            (None, None, Some(t)) => Ok(ErrorBudgets {
                eps1: 0.5 * t,
                eps2: 0.5 * t,
            }),
            _ => Err(bad("channel.eps_total", "give eps_total or both per-user budgets")),
        }
    }

    /// `eps_total`, or `eps_user1 + eps_user2` when only the split is given.
    pub fn eps(&self) -> Result<f64> {
        match (self.eps_total, self.eps_user1, self.eps_user2) {
            (Some(t), _, _) => Ok(t),
            (None, Some(a), Some(b)) => Ok(a + b),
            _ => Err(bad("channel.eps_total", "give eps_total or both per-user budgets")),
        }
    }

    pub fn scenario(&self) -> Result<ChannelScenario> {
        Ok(ChannelScenario::new(
            self.h1,
            self.h2,
            self.power()?,
            self.n1,
            self.n2()?,
            self.eps()?,
        )?)
    }
}
