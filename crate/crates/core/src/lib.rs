//! Second-order bounds for the two-user Gaussian broadcast channel with
//! heterogeneous blocklength constraints.
//!
//! * [`scalar`]: capacity, dispersions and the Gaussian tail.
//! * [`outer`]: single-user and Sato-type converse bounds.
//! * [`early`]: early decoding with composite shell codes.
//! * [`shell`]: composite shell sampling and the density-ratio constant `K̃`.
//! * [`mc`]: Monte Carlo checks of the underlying distributional claims.
//! * [`timesharing`]: finite-blocklength time sharing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod early;
pub mod error;
pub mod mc;
pub mod optim;
pub mod outer;
pub mod scalar;
pub mod scenario;
pub mod shell;
pub mod timesharing;

pub use early::{
    ed_achievable, ed_best_allocation, ed_latency_row, ed_min_blocklength, AllocationSearch, EdBlocklength,
    EdLatencyRow, EdOptions, EdResult, EffectiveGains, ErrorAllocation, ErrorBudgets,
};
pub use error::{Error, Result};
pub use mc::{McConfig, McReport};
pub use outer::{
    rho_quantities, rho_star, sato_het, sato_hom, sato_rho, single_user_bound, sum_rate_bound_rho, BoundFamily,
    RateBound, RhoQuantities,
};
pub use scalar::{cap, disp_iid, disp_shell, q, q_inv, Probability, Snr};
pub use scenario::{ChannelScenario, Order, PowerConstraint, User};
pub use shell::{
    k1_prefactor, k_tilde, ratio_exponent, sample_composite_shell, shell_surface, CompositeShellCodeword, RatioPoint,
};
pub use timesharing::{ts_rates, ts_region, RatePair, SecondOrderRatePair};
