//! Early decoding with composite shell codes under individual power constraints.
//!
//! User 1 sends a composite shell codeword whose first `n2` symbols lie on
//! their own power shell, so user 2 can decode user 1's message from a
//! partial reception, cancel it, and then decode its own i.i.d. Gaussian
//! codeword. [`ed_min_blocklength`] gives the number of symbols user 2 needs
//! for the first step; [`ed_achievable`] the resulting message sizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::golden_section_min;
use crate::scalar::{cap, disp_iid, disp_shell, q_inv, Probability, Snr};
use crate::scenario::ChannelScenario;
use crate::shell::k_tilde;

/// Default power margin as a fraction of `P2`.
pub const DEFAULT_DELTA_FRACTION: f64 = 0.05;

/// Slack allowed when checking that an allocation fits its budget; splits
/// computed as `ε2 − ε_SIC,2` may round up by an ulp.
const BUDGET_SLACK: f64 = 8.0 * f64::EPSILON;

/// Per-step target error probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorAllocation {
    pub eps1: Probability,
    pub eps_sic1: Probability,
    pub eps_sic2: Probability,
}

impl ErrorAllocation {
    /// Checks `ε1 + ε_SIC,1 + ε_SIC,2 ≤ ε_total`.
    pub fn new(eps1: f64, eps_sic1: f64, eps_sic2: f64, eps_total: f64) -> Result<Self> {
        let alloc = ErrorAllocation {
            eps1: Probability::new(eps1)?,
            eps_sic1: Probability::new(eps_sic1)?,
            eps_sic2: Probability::new(eps_sic2)?,
        };
        alloc.check_budget(eps_total)?;
        Ok(alloc)
    }

    pub fn total(&self) -> f64 {
        self.eps1.get() + self.eps_sic1.get() + self.eps_sic2.get()
    }

    pub fn check_budget(&self, eps_total: f64) -> Result<()> {
        if self.total() <= eps_total * (1.0 + BUDGET_SLACK) {
            Ok(())
        } else {
            Err(Error::invalid(
                "error allocation",
                format!(
                    "eps1 + eps_sic1 + eps_sic2 = {} exceeds eps_total = {eps_total}",
                    self.total()
                ),
            ))
        }
    }
}

/// Error budgets of the two users: `ε1` for user 1, `ε2` shared by the two
/// SIC steps at user 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudgets {
    pub eps1: f64,
    pub eps2: f64,
}

/// Knobs of the early-decoding analysis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EdOptions {
    /// Power margin `δ` in `P̄2 = P2 − δ`; `None` means `0.05·P2`.
    pub delta: Option<f64>,
    /// Charge `log₂ K̃` against user 1's message size in the early-decoding
    /// condition. This term is third order and off by default.
    pub include_log_k: bool,
}

/// Interference-normalized gains seen by the two receivers while user 2's
/// codeword is on the air.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveGains {
    pub g1: f64,
    pub g2: f64,
    pub p_bar2: f64,
    pub delta: f64,
}

impl EffectiveGains {
    pub fn new(h1: f64, h2: f64, p2: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < p2) {
            return Err(Error::invalid(
                "delta",
                format!("must satisfy 0 < delta < P2 = {p2}, got {delta}"),
            ));
        }
        let p_bar2 = p2 - delta;
        Ok(EffectiveGains {
            g1: h1 / (1.0 + h1 * p_bar2),
            g2: h2 / (1.0 + h2 * p_bar2),
            p_bar2,
            delta,
        })
    }

    pub fn for_scenario(s: &ChannelScenario, opts: &EdOptions) -> Result<Self> {
        let (_, p2) = s.individual_powers()?;
        let delta = opts.delta.unwrap_or(DEFAULT_DELTA_FRACTION * p2);
        Self::new(s.h1(), s.h2(), p2, delta)
    }
}

/// Outcome of [`ed_min_blocklength`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdBlocklength {
    /// Smallest integer `n2` meeting the early-decoding condition.
    pub n2: u64,
    /// The real-valued threshold before rounding up.
    pub threshold: f64,
    /// Set when `ε_SIC,1 ≥ ½`, where the dispersion term turns into a bonus.
    pub nonpositive_backoff: bool,
}

/// Achievable message sizes with early decoding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdResult {
    pub n2_min: u64,
    pub log_m1: f64,
    pub log_m2: f64,
    pub c_bar1: f64,
    pub v_bar1: f64,
}

/// Positive root `m₊` of `m² − a·m − b = 0` for `b > 0`, cancellation-free.
fn positive_root(a: f64, b: f64) -> f64 {
    let disc = (0.25 * a * a + b).sqrt();
    if a >= 0.0 {
        0.5 * a + disc
    } else {
        b / (disc - 0.5 * a)
    }
}

/// `n2 ≥ (√V·Q⁻¹/(2C) + √(V·Q⁻¹²/(4C²) + log M1/C))²`, rounded up.
///
/// `C` and `V` are the capacity and shell dispersion at `g2·P1`. The returned
/// `n2` is the smallest integer for which `n2 − a·√n2 − b ≥ 0` holds with
/// `a = √V·Q⁻¹/C` and `b = log M1/C`.
pub fn ed_min_blocklength(log_m1: f64, g2p1: Snr, eps_sic1: Probability) -> Result<EdBlocklength> {
    if !(log_m1.is_finite() && log_m1 > 0.0) {
        return Err(Error::Domain {
            name: "log_m1",
            value: log_m1,
            constraint: "finite and > 0",
        });
    }
    if g2p1.get() <= 0.0 {
        return Err(Error::Domain {
            name: "g2p1",
            value: g2p1.get(),
            constraint: "> 0",
        });
    }
    let c = cap(g2p1);
    let backoff = q_inv(eps_sic1);
    let a = disp_shell(g2p1).sqrt() * backoff / c;
    let b = log_m1 / c;
    let m = positive_root(a, b);
    let threshold = m * m;

    let holds = |n: u64| {
        let m = (n as f64).sqrt();
        m * m - a * m - b >= 0.0
    };
    let mut n2 = (threshold.ceil() as u64).max(1);
    while n2 > 1 && holds(n2 - 1) {
        n2 -= 1;
    }
    while !holds(n2) {
        n2 += 1;
    }
    Ok(EdBlocklength {
        n2,
        threshold,
        nonpositive_backoff: backoff <= 0.0,
    })
}

/// [`ed_min_blocklength`] with the optional `log₂ K̃` charge applied.
pub fn ed_required_blocklength(
    log_m1: f64,
    g2p1: Snr,
    eps_sic1: Probability,
    opts: &EdOptions,
) -> Result<EdBlocklength> {
    let debit = if opts.include_log_k {
        k_tilde(g2p1.get())?.log2()
    } else {
        0.0
    };
    ed_min_blocklength(log_m1 + debit, g2p1, eps_sic1)
}

/// Smallest blocklength satisfying the first-order condition `n·C ≥ log M1`.
pub fn ed_asymptotic_blocklength(log_m1: f64, g2p1: Snr) -> Result<u64> {
    let c = cap(g2p1);
    if !(log_m1 > 0.0 && c > 0.0) {
        return Err(Error::Domain {
            name: "log_m1",
            value: log_m1,
            constraint: "> 0 with g2p1 > 0",
        });
    }
    Ok(((log_m1 / c).ceil() as u64).max(1))
}

/// `(C̄1, V̄1)`: blocklength-weighted capacity and shell dispersion at user 1.
pub fn user1_moments(s: &ChannelScenario, gains: &EffectiveGains) -> Result<(f64, f64)> {
    let (p1, _) = s.individual_powers()?;
    let p = s.p();
    let inner = Snr::new(gains.g1 * p1)?;
    let outer = Snr::new(s.h1() * p1)?;
    Ok((
        p * cap(inner) + (1.0 - p) * cap(outer),
        p * disp_shell(inner) + (1.0 - p) * disp_shell(outer),
    ))
}

/// Achievable `log M1` at user 1, which treats user 2's codeword as noise.
pub fn user1_log_m(s: &ChannelScenario, gains: &EffectiveGains, eps1: Probability) -> Result<f64> {
    let (c, v) = user1_moments(s, gains)?;
    let n1 = s.n1() as f64;
    Ok(n1 * c - (n1 * v).sqrt() * q_inv(eps1))
}

/// Achievable `log M2` after a successful cancellation of user 1.
pub fn user2_log_m(n2: u64, h2: f64, gains: &EffectiveGains, eps_sic2: Probability) -> Result<f64> {
    let x = Snr::new(h2 * gains.p_bar2)?;
    let n = n2 as f64;
    Ok(n * cap(x) - (n * disp_iid(x)).sqrt() * q_inv(eps_sic2))
}

/// Message sizes achievable with early decoding at the scenario's `n2`.
pub fn ed_achievable(s: &ChannelScenario, alloc: &ErrorAllocation, opts: &EdOptions) -> Result<EdResult> {
    let (p1, _) = s.individual_powers()?;
    alloc.check_budget(s.eps())?;
    let gains = EffectiveGains::for_scenario(s, opts)?;
    let (c_bar1, v_bar1) = user1_moments(s, &gains)?;
    let log_m1 = user1_log_m(s, &gains, alloc.eps1)?;
    if !(log_m1 > 0.0) {
        return Err(Error::Infeasible(format!(
            "user 1 message size {log_m1:.6} bits is not positive"
        )));
    }
    let need = ed_required_blocklength(log_m1, Snr::new(gains.g2 * p1)?, alloc.eps_sic1, opts)?;
    if s.n2() < need.n2 {
        return Err(Error::EdShortfall {
            n2: s.n2(),
            required: need.n2,
            shortfall: need.n2 - s.n2(),
        });
    }
    let log_m2 = user2_log_m(s.n2(), s.h2(), &gains, alloc.eps_sic2)?;
    if !(log_m2 >= 0.0) {
        return Err(Error::Infeasible(format!(
            "user 2 message size {log_m2:.6} bits is negative; eps_sic2 = {:e} is too small",
            alloc.eps_sic2.get()
        )));
    }
    Ok(EdResult {
        n2_min: need.n2,
        log_m1,
        log_m2,
        c_bar1,
        v_bar1,
    })
}

/// How [`ed_best_allocation`] trades `ε_SIC,1` against `ε_SIC,2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationSearch {
    /// User 2 must still be able to send this many bits in the `n2` symbols
    /// that early decoding needs. This rules out `ε_SIC,2 → 0`.
    pub log_m2_target: f64,
    /// Pin `ε_SIC,2` and search `ε_SIC,1 ∈ (0, ε2 − ε_SIC,2]` only.
    pub fixed_eps_sic2: Option<f64>,
    /// Coarse grid size before golden-section refinement.
    pub grid_points: usize,
    pub ed: EdOptions,
}

impl Default for AllocationSearch {
    fn default() -> Self {
        AllocationSearch {
            log_m2_target: 0.0,
            fixed_eps_sic2: None,
            grid_points: 256,
            ed: EdOptions::default(),
        }
    }
}

/// Real-valued smallest `n` with `n·C − √(n·V)·Q⁻¹(ε) ≥ target`.
fn real_threshold(target: f64, c: f64, v: f64, eps: f64) -> f64 {
    let a = v.sqrt() * q_inv(Probability::new(eps).expect("split stays inside (0, 1)")) / c;
    let b = target / c;
    if b <= 0.0 {
        return if a > 0.0 { a * a } else { 0.0 };
    }
    let m = positive_root(a, b);
    m * m
}

/// Picks `(ε_SIC,1, ε_SIC,2)` inside user 2's budget `ε2` so that user 2
/// needs as few symbols as possible.
///
/// User 2 needs `max(n_ED(ε_SIC,1), n_own(ε_SIC,2))` symbols, where `n_own`
/// carries [`AllocationSearch::log_m2_target`] bits at `ε_SIC,2`. The split
/// is parametrized by its log-odds `ln(ε_SIC,1/ε_SIC,2)`, scanned on a
/// uniform grid (log-spaced in both probabilities) and refined by golden
/// section around the best grid point.
pub fn ed_best_allocation(
    s: &ChannelScenario,
    budgets: ErrorBudgets,
    log_m1: f64,
    search: &AllocationSearch,
) -> Result<ErrorAllocation> {
    let (p1, _) = s.individual_powers()?;
    let ErrorBudgets { eps1, eps2 } = budgets;
    if !(eps2 > 0.0 && eps2 < 1.0) {
        return Err(Error::Infeasible(format!(
            "user 2 budget eps2 = {eps2} leaves no split"
        )));
    }
    if !(log_m1 > 0.0) {
        return Err(Error::Domain {
            name: "log_m1",
            value: log_m1,
            constraint: "> 0",
        });
    }
    let gains = EffectiveGains::for_scenario(s, &search.ed)?;
    let g2p1 = Snr::new(gains.g2 * p1)?;
    let debit = if search.ed.include_log_k {
        k_tilde(g2p1.get())?.log2()
    } else {
        0.0
    };
    let (c_ed, v_ed) = (cap(g2p1), disp_shell(g2p1));
    let own = Snr::new(s.h2() * gains.p_bar2)?;
    let (c_own, v_own) = (cap(own), disp_iid(own));
    let grid_points = search.grid_points.max(200);

    let (eps_sic1, eps_sic2) = match search.fixed_eps_sic2 {
        Some(fixed) => {
            if !(fixed > 0.0 && fixed < eps2) {
                return Err(Error::Infeasible(format!(
                    "fixed eps_sic2 = {fixed} leaves nothing of eps2 = {eps2} for eps_sic1"
                )));
            }
            let hi = eps2 - fixed;
            let lo = hi * 1e-12;
            let cost = |log_e: f64| real_threshold(log_m1 + debit, c_ed, v_ed, log_e.exp().min(hi));
            let best = refine(cost, lo.ln(), hi.ln(), grid_points);
            (best.exp().min(hi), fixed)
        }
        None => {
            let split = |lambda: f64| (eps2 / (1.0 + (-lambda).exp()), eps2 / (1.0 + lambda.exp()));
            let cost = |lambda: f64| {
                let (e1, e2) = split(lambda);
                real_threshold(log_m1 + debit, c_ed, v_ed, e1).max(real_threshold(
                    search.log_m2_target,
                    c_own,
                    v_own,
                    e2,
                ))
            };
            // e^{-700} keeps both probabilities representable.
            let best = refine(cost, -60.0, 700.0, grid_points);
            split(best)
        }
    };
    if !(eps_sic1 > 0.0 && eps_sic2 > 0.0) {
        return Err(Error::Infeasible("no split of eps2 is representable".into()));
    }
    ErrorAllocation::new(eps1, eps_sic1, eps_sic2, eps1 + eps2)
}

/// Grid scan of `cost` on `[lo, hi]` followed by golden-section search
/// between the neighbours of the best grid point.
fn refine<F: Fn(f64) -> f64>(cost: F, lo: f64, hi: f64, points: usize) -> f64 {
    let step = (hi - lo) / (points - 1) as f64;
    let at = |i: usize| if i + 1 == points { hi } else { lo + step * i as f64 };
    let best = (0..points)
        .map(|i| (i, cost(at(i))))
        .fold((0, f64::INFINITY), |acc, (i, c)| if c < acc.1 { (i, c) } else { acc });
    let a = at(best.0.saturating_sub(1));
    let b = at((best.0 + 1).min(points - 1));
    let (x, fx) = golden_section_min(&cost, a, b, 1e-10 * (hi - lo));
    if fx <= best.1 {
        x
    } else {
        at(best.0)
    }
}

/// One row of an early-decoding latency sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdLatencyRow {
    pub n1: u64,
    pub log_m1_bits: f64,
    pub n2_shell: u64,
    pub n2_asymptotic: u64,
    pub eps_sic1_opt: f64,
}

/// Latency of early decoding when user 1 sends at its achievable rate.
///
/// `s` fixes the channel and `p = n2/n1`, which enters user 1's rate through
/// `C̄1` and `V̄1`. The number of symbols user 2 actually needs is computed
/// afterwards and may differ from the nominal `n2`.
pub fn ed_latency_row(s: &ChannelScenario, budgets: ErrorBudgets, search: &AllocationSearch) -> Result<EdLatencyRow> {
    let (p1, _) = s.individual_powers()?;
    let gains = EffectiveGains::for_scenario(s, &search.ed)?;
    let log_m1 = user1_log_m(s, &gains, Probability::new(budgets.eps1)?)?;
    if !(log_m1 > 0.0) {
        return Err(Error::Infeasible(format!(
            "user 1 message size {log_m1:.6} bits is not positive at n1 = {}",
            s.n1()
        )));
    }
    let alloc = ed_best_allocation(s, budgets, log_m1, search)?;
    let g2p1 = Snr::new(gains.g2 * p1)?;
    let shell = ed_required_blocklength(log_m1, g2p1, alloc.eps_sic1, &search.ed)?;
    Ok(EdLatencyRow {
        n1: s.n1(),
        log_m1_bits: log_m1,
        n2_shell: shell.n2,
        n2_asymptotic: ed_asymptotic_blocklength(log_m1, g2p1)?,
        eps_sic1_opt: alloc.eps_sic1.get(),
    })
}
