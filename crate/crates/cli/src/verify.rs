//! Monte Carlo checks driven by a scenario file.

use hbgbc_core::mc::{
    simulate_dt_decoder, verify_coop_density, verify_error_decomposition, verify_rx1_density, verify_sic1_density,
    CoopInput,
};
use hbgbc_core::{rho_star, ChannelScenario, McConfig, McReport, PowerConstraint};

use crate::config::{Check, McSpec, ScenarioFile};
use crate::error::{CliError, Result};

fn config(file: &ScenarioFile, mc: &McSpec, s: ChannelScenario, seed: u64) -> McConfig {
    let mut cfg = McConfig::new(s, mc.trials, seed);
    cfg.confidence_sigmas = mc.confidence_sigmas;
    cfg.messages = mc.messages;
    cfg.ed = file.ed.options();
    cfg
}

/// Runs every configured check. Check `k` uses seed `seed + k`.
pub fn run_checks(file: &ScenarioFile, seed: u64) -> Result<Vec<McReport>> {
    let mc = file.mc.as_ref().ok_or_else(|| CliError::Config {
        field: "mc".into(),
        constraint: "verify needs an [mc] section".into(),
    })?;
    let s = file.channel.scenario()?;
    let rho = mc.rho.unwrap_or_else(|| rho_star(s.h1(), s.h2()));
    mc.checks
        .iter()
        .enumerate()
        .map(|(k, check)| {
            let seed = seed.wrapping_add(k as u64);
            let report = match check {
                Check::Sic1Density => verify_sic1_density(&config(file, mc, s, seed))?,
                Check::Rx1Density => verify_rx1_density(&config(file, mc, s, seed))?,
                Check::CoopDensity => {
                    // The cooperative receiver sees the superposition at total power.
                    let sum = match s.power() {
                        PowerConstraint::Individual { p1, p2 } => s.with_power(PowerConstraint::Sum(p1 + p2))?,
                        PowerConstraint::Sum(_) => s,
                    };
                    verify_coop_density(&config(file, mc, sum, seed), rho, &CoopInput::CompositeShell { seed })?
                }
                Check::DtDecoder => {
                    let toy = s.with_blocklengths(mc.toy_n1, mc.toy_n2)?;
                    simulate_dt_decoder(&config(file, mc, toy, seed), mc.messages)?
                }
                Check::ErrorDecomposition => {
                    let toy = s.with_blocklengths(mc.toy_n1, mc.toy_n2)?;
                    verify_error_decomposition(&config(file, mc, toy, seed))?
                }
            };
            Ok(report)
        })
        .collect()
}

/// A failed check counts only when the run had enough trials to mean it.
pub fn hard_failure(reports: &[McReport]) -> bool {
    reports.iter().any(|r| !r.pass && r.warning.is_none())
}

pub fn render_ndjson(reports: &[McReport]) -> String {
    reports
        .iter()
        .map(|r| serde_json::to_string(r).expect("reports serialize") + "\n")
        .collect()
}
