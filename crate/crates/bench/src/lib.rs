//! Fixed workloads shared by the benchmarks under `benches/`.

use hbgbc_core::{ChannelScenario, ErrorBudgets, Probability};

/// Error probabilities spanning the range the bounds are evaluated at.
pub fn q_inv_inputs() -> Vec<Probability> {
    (1..=64)
        .map(|k| Probability::new(10f64.powf(-(k as f64) * 0.25)).expect("inside (0, 1)"))
        .collect()
}

/// The sum-rate sweep of the outer-bound comparison, `n1 = 128..=2048`.
pub fn sato_sweep() -> Vec<ChannelScenario> {
    (128..=2048)
        .step_by(16)
        .map(|n1| {
            let n2 = (0.9 * n1 as f64).round() as u64;
            ChannelScenario::sum_power(1.0, 10.0, 10.0, n1, n2, 2e-6).expect("valid scenario")
        })
        .collect()
}

/// An individual-power scenario for the early-decoding allocation search.
pub fn ed_scenario(n1: u64) -> ChannelScenario {
    let n2 = (0.9 * n1 as f64).round() as u64;
    ChannelScenario::individual_power(1.0, 10.0, 8.0, 0.2, n1, n2, 2e-6).expect("valid scenario")
}

pub const ED_BUDGETS: ErrorBudgets = ErrorBudgets { eps1: 1e-6, eps2: 1e-6 };
