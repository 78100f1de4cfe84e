//! Converse (outer) bounds on message sizes under a sum power constraint.
//!
//! Every bound is a Gaussian approximation: the `order` flag selects whether
//! the dispersion backoff and the `½·log₂ n` term are kept, and all `O(1)`
//! residuals are dropped.
//!
//! The sum-rate bounds come from a cooperative receiver that sees both
//! outputs over a noise pair of correlation `ρ`. Choosing `ρ` only changes
//! the joint law, so the cooperative bound holds at error level `2ε`. The
//! doubling happens in [`sato_het`] and [`sato_hom`]; [`sum_rate_bound_rho`]
//! uses the scenario's `ε` as given.

use std::f64::consts::LOG2_E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cap, disp_shell, q_inv, Probability, Snr, LOG2_E_SQ};
use crate::scenario::{ChannelScenario, Order, User};

/// Which outer bound produced a [`RateBound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    SingleUser,
    SatoHet,
    SatoHom,
    SatoRho,
}

impl BoundFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundFamily::SingleUser => "single_user",
            BoundFamily::SatoHet => "sato_het",
            BoundFamily::SatoHom => "sato_hom",
            BoundFamily::SatoRho => "sato_rho",
        }
    }
}

/// Upper bounds on `log₂ M1`, `log₂ M2` and `log₂ M1 + log₂ M2`, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub log_m1_max: f64,
    pub log_m2_max: f64,
    pub sum_bits_max: f64,
    pub family: BoundFamily,
    pub order: Order,
}

/// Cooperative-receiver quantities at noise correlation `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoQuantities {
    pub rho: f64,
    /// `(h1 + h2 − 2ρ√(h1h2)) / (1 − ρ²)`.
    pub h_rho: f64,
    /// Per-symbol mean of the cooperative information density, bits.
    pub c_rho1: f64,
    /// Mean increment per unit of energy placed after symbol `n2`.
    pub c_rho2: f64,
    pub v_rho1: f64,
    pub v_rho2: f64,
}

fn snr(x: f64) -> Result<Snr> {
    Snr::new(x)
}

/// `n·C(x) − √(n·V(x))·Q⁻¹(ε) (+ ½·log₂ n)` for a single user.
pub fn single_user_log_m(n: u64, x: Snr, eps: Probability, order: Order) -> f64 {
    order.expand(n as f64, cap(x), disp_shell(x), q_inv(eps))
}

/// Single-user converse for user `k` at error probability `ε`.
pub fn single_user_bound(s: &ChannelScenario, user: User, order: Order) -> Result<f64> {
    let power = s.sum_power_value()?;
    let x = snr(s.h(user) * power)?;
    Ok(single_user_log_m(s.n(user), x, Probability::new(s.eps())?, order))
}

/// Effective gain of the cooperative receiver at correlation `ρ`.
pub fn h_rho(h1: f64, h2: f64, rho: f64) -> f64 {
    (h1 + h2 - 2.0 * rho * (h1 * h2).sqrt()) / (1.0 - rho * rho)
}

/// The correlation that minimizes every `ρ`-dependent first-order term.
pub fn rho_star(h1: f64, h2: f64) -> f64 {
    (h1 / h2).sqrt()
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "rho",
            value: rho,
            constraint: "|rho| < 1",
        })
    }
}

pub fn rho_quantities(s: &ChannelScenario, rho: f64) -> Result<RhoQuantities> {
    check_rho(rho)?;
    let power = s.sum_power_value()?;
    let (h1, p) = (s.h1(), s.p());
    let pbar = 1.0 - p;
    let hr = h_rho(h1, s.h2(), rho);
    let a_r = hr / (1.0 + hr * power);
    let a_1 = h1 / (1.0 + h1 * power);
    let d_r = (1.0 + hr * power).powi(2);
    let d_1 = (1.0 + h1 * power).powi(2);

    let c_rho1 = p * cap(snr(hr * power)?) + pbar * cap(snr(h1 * power)?) + 0.5 * pbar * LOG2_E * (a_r - a_1) * power;
    let c_rho2 = 0.5 * LOG2_E * (a_1 - a_r);
    let v_rho1 = 0.25
        * LOG2_E_SQ
        * ((p * 2.0 * hr * hr * power * power + 4.0 * hr * power) / d_r + pbar * 2.0 * h1 * h1 * power * power / d_1);
    let v_rho2 = 0.25 * LOG2_E_SQ * (4.0 * h1 / d_1 - 4.0 * hr / d_r);

    Ok(RhoQuantities {
        rho,
        h_rho: hr,
        c_rho1,
        c_rho2,
        v_rho1,
        v_rho2,
    })
}

/// Cooperative sum-rate bound at a fixed correlation `ρ`.
///
/// The worst-case input places no energy after symbol `n2` in the mean and,
/// when `P² < 1/(h1·h_ρ)`, all of its `(n1 − n2)·P` share there in the
/// variance.
pub fn sum_rate_bound_rho(s: &ChannelScenario, rho: f64, order: Order) -> Result<f64> {
    let rq = rho_quantities(s, rho)?;
    let power = s.sum_power_value()?;
    let extra = if power * power < 1.0 / (s.h1() * rq.h_rho) {
        rq.v_rho2 * (1.0 - s.p()) * power
    } else {
        0.0
    };
    let backoff = q_inv(Probability::new(s.eps())?);
    Ok(order.expand(s.n1() as f64, rq.c_rho1, rq.v_rho1 + extra, backoff))
}

/// First-order sum-rate term `C*_s(h1, h2, p, P)` at the optimal correlation.
pub fn sato_first_order(h1: f64, h2: f64, p: f64, power: f64) -> Result<f64> {
    let pbar = 1.0 - p;
    Ok(p * cap(snr(h2 * power)?)
        + pbar * cap(snr(h1 * power)?)
        + LOG2_E * 0.5 * pbar * (h2 / (1.0 + h2 * power) - h1 / (1.0 + h1 * power)) * power)
}

/// Dispersion correction `V*_{s,a}`, nonzero only when `P² < 1/(h1·h2)`,
/// where it is negative.
pub fn sato_extra_dispersion(h1: f64, h2: f64, power: f64) -> f64 {
    if power * power < 1.0 / (h1 * h2) {
        4.0 * h1 * power / (1.0 + h1 * power).powi(2) - 4.0 * h2 * power / (1.0 + h2 * power).powi(2)
    } else {
        0.0
    }
}

/// Sum-rate dispersion `V*_s(h1, h2, p, P)`.
pub fn sato_dispersion(h1: f64, h2: f64, p: f64, power: f64) -> f64 {
    let pbar = 1.0 - p;
    let hp2 = h2 * power;
    let hp1 = h1 * power;
    0.25 * LOG2_E_SQ
        * ((p * 2.0 * hp2 * hp2 + 4.0 * hp2) / (1.0 + hp2).powi(2)
            + pbar * 2.0 * hp1 * hp1 / (1.0 + hp1).powi(2)
            + pbar * sato_extra_dispersion(h1, h2, power))
}

/// `2ε` as a probability; the cooperative bounds are evaluated there.
fn relaxed(eps: f64) -> Result<Probability> {
    Probability::new(2.0 * eps)
}

fn individual_bounds(s: &ChannelScenario, order: Order) -> Result<(f64, f64)> {
    Ok((
        single_user_bound(s, User::One, order)?,
        single_user_bound(s, User::Two, order)?,
    ))
}

/// Sato-type outer bound for heterogeneous blocklengths.
pub fn sato_het(s: &ChannelScenario, order: Order) -> Result<RateBound> {
    let power = s.sum_power_value()?;
    let (h1, h2, p) = (s.h1(), s.h2(), s.p());
    let c = sato_first_order(h1, h2, p, power)?;
    let v = sato_dispersion(h1, h2, p, power);
    let sum = order.expand(s.n1() as f64, c, v, q_inv(relaxed(s.eps())?));
    let (log_m1_max, log_m2_max) = individual_bounds(s, order)?;
    Ok(RateBound {
        log_m1_max,
        log_m2_max,
        sum_bits_max: sum,
        family: BoundFamily::SatoHet,
        order,
    })
}

/// `n1·C(x) − √(n1·V(x))·Q⁻¹(2ε) (+ ½·log₂ n1)`.
pub fn sato_hom_sum(n1: u64, h2_power: Snr, eps: f64, order: Order) -> Result<f64> {
    Ok(order.expand(n1 as f64, cap(h2_power), disp_shell(h2_power), q_inv(relaxed(eps)?)))
}

/// Sato-type outer bound when user 2 is allowed the full blocklength `n1`.
pub fn sato_hom(s: &ChannelScenario, order: Order) -> Result<RateBound> {
    let power = s.sum_power_value()?;
    let sum = sato_hom_sum(s.n1(), snr(s.h2() * power)?, s.eps(), order)?;
    let (log_m1_max, log_m2_max) = individual_bounds(s, order)?;
    Ok(RateBound {
        log_m1_max,
        log_m2_max,
        sum_bits_max: sum,
        family: BoundFamily::SatoHom,
        order,
    })
}

/// Cooperative bound at an arbitrary `ρ`, packaged as a [`RateBound`].
///
/// The sum is evaluated at `2ε` so it is comparable with [`sato_het`].
pub fn sato_rho(s: &ChannelScenario, rho: f64, order: Order) -> Result<RateBound> {
    let relaxed_s = s.with_eps_unchecked(2.0 * s.eps());
    let sum = sum_rate_bound_rho(&relaxed_s, rho, order)?;
    let (log_m1_max, log_m2_max) = individual_bounds(s, order)?;
    Ok(RateBound {
        log_m1_max,
        log_m2_max,
        sum_bits_max: sum,
        family: BoundFamily::SatoRho,
        order,
    })
}
