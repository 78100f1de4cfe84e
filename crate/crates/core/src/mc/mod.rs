//! Monte Carlo checks of the information-density moments, the modified DT
//! bound and the error-probability decomposition.

mod decomp;
mod density;
mod dt;
pub mod stats;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::early::EdOptions;
use crate::error::{Error, Result};
use crate::scenario::ChannelScenario;

pub use decomp::{decompose_errors, verify_error_decomposition, ErrorCounts};
pub use density::{verify_coop_density, verify_rx1_density, verify_sic1_density, CoopInput};
pub use dt::{simulate_dt_decoder, simulate_dt_decoder_with_threshold, DT_MAX_BLOCKLENGTH, DT_MAX_MESSAGES};

/// Below this many trials a report carries a statistical-power warning.
pub const MIN_POWERED_TRIALS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Supplies the gains, powers and the blocklengths `n1`, `n2`.
    pub scenario: ChannelScenario,
    pub confidence_sigmas: f64,
    /// Codebook size of the toy two-user simulation.
    pub messages: usize,
    pub ed: EdOptions,
}

impl McConfig {
    pub fn new(scenario: ChannelScenario, trials: u64, seed: u64) -> Self {
        McConfig {
            trials,
            seed,
            scenario,
            confidence_sigmas: 4.0,
            messages: 16,
            ed: EdOptions::default(),
        }
    }

    pub fn n1(&self) -> u64 {
        self.scenario.n1()
    }

    pub fn n2(&self) -> u64 {
        self.scenario.n2()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if !(self.confidence_sigmas.is_finite() && self.confidence_sigmas > 0.0) {
            return Err(Error::invalid(
                "confidence_sigmas",
                format!("must be finite and > 0, got {}", self.confidence_sigmas),
            ));
        }
        Ok(())
    }

    fn power_warning(&self) -> Option<String> {
        (self.trials < MIN_POWERED_TRIALS).then(|| {
            format!(
                "only {} trials; at least {MIN_POWERED_TRIALS} are needed for a meaningful test",
                self.trials
            )
        })
    }
}

/// Outcome of one Monte Carlo check.
///
/// Moment checks report the mean and variance of the information density
/// divided by its blocklength, in bits and bits².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub check: String,
    pub empirical_mean: f64,
    pub empirical_var: f64,
    pub target_mean: f64,
    pub target_var: f64,
    pub std_error: f64,
    pub var_std_error: f64,
    pub pass: bool,
    pub trials_used: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// `|a − b| ≤ k·se`, with a rounding allowance when `se` vanishes.
fn within(a: f64, b: f64, k: f64, se: f64) -> bool {
    (a - b).abs() <= k * se + 1e-12 * (1.0 + b.abs())
}

fn moment_report(check: &str, cfg: &McConfig, m: &stats::Moments, target_mean: f64, target_var: f64) -> McReport {
    let (mean, var) = (m.mean(), m.variance());
    let (se, var_se) = (m.mean_std_error(), m.variance_std_error());
    let k = cfg.confidence_sigmas;
    McReport {
        check: check.to_string(),
        empirical_mean: mean,
        empirical_var: var,
        target_mean,
        target_var,
        std_error: se,
        var_std_error: var_se,
        pass: within(mean, target_mean, k, se) && within(var, target_var, k, var_se),
        trials_used: m.count(),
        details: BTreeMap::new(),
        warning: cfg.power_warning(),
    }
}
