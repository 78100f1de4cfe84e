use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Power constraint on the transmitted block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerConstraint {
    /// `‖x^{n1}‖² ≤ n1·P` on the superimposed input.
    Sum(f64),
    /// `‖x_k^{n_k}‖² ≤ n_k·P_k` on each user's codeword.
    Individual { p1: f64, p2: f64 },
}

/// Which terms of a second-order expansion are kept.
///
/// `O(1)` residuals are never included; this only decides whether the
/// dispersion backoff and the `½·log₂ n` term are present.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Order {
    #[serde(rename = "first")]
    FirstOrder,
    #[serde(rename = "second")]
    SecondOrder,
    #[default]
    #[serde(rename = "halflogn")]
    WithHalfLogN,
}

impl Order {
    pub fn as_str(self) -> &'static str {
        match self {
            Order::FirstOrder => "first",
            Order::SecondOrder => "second",
            Order::WithHalfLogN => "halflogn",
        }
    }

    /// `n·c − √(n·v)·backoff (+ ½·log₂ n)`, truncated per this order.
    pub fn expand(self, n: f64, c: f64, v: f64, backoff: f64) -> f64 {
        match self {
            Order::FirstOrder => n * c,
            Order::SecondOrder => n * c - (n * v).sqrt() * backoff,
            Order::WithHalfLogN => n * c - (n * v).sqrt() * backoff + 0.5 * n.log2(),
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Order::FirstOrder),
            "second" => Ok(Order::SecondOrder),
            "halflogn" => Ok(Order::WithHalfLogN),
            other => Err(Error::invalid(
                "order",
                format!("expected one of first|second|halflogn, got {other:?}"),
            )),
        }
    }
}

/// Upper limit on the total error budget. Relaxing `ε` to `2ε` for the
/// cooperative receiver only yields an outer bound below this value.
pub const EPS_LIMIT: f64 = 0.25;

/// Two-user Gaussian broadcast channel with heterogeneous blocklengths.
///
/// User 1 decodes after `n1` symbols and has the weaker channel `h1`; user 2
/// decodes after `n2 ≤ n1` symbols with `h2 ≥ h1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario")]
pub struct ChannelScenario {
    h1: f64,
    h2: f64,
    power: PowerConstraint,
    n1: u64,
    n2: u64,
    eps: f64,
}

#[derive(Deserialize)]
struct RawScenario {
    h1: f64,
    h2: f64,
    power: PowerConstraint,
    n1: u64,
    n2: u64,
    eps: f64,
}

impl TryFrom<RawScenario> for ChannelScenario {
    type Error = Error;

    fn try_from(r: RawScenario) -> Result<Self> {
        ChannelScenario::new(r.h1, r.h2, r.power, r.n1, r.n2, r.eps)
    }
}

impl ChannelScenario {
    pub fn new(h1: f64, h2: f64, power: PowerConstraint, n1: u64, n2: u64, eps: f64) -> Result<Self> {
        let s = ChannelScenario {
            h1,
            h2,
            power,
            n1,
            n2,
            eps,
        };
        s.validate()?;
        Ok(s)
    }

    /// Sum-power scenario with `n2` given directly.
    pub fn sum_power(h1: f64, h2: f64, power: f64, n1: u64, n2: u64, eps: f64) -> Result<Self> {
        Self::new(h1, h2, PowerConstraint::Sum(power), n1, n2, eps)
    }

    /// Individual-power scenario with `n2` given directly.
    pub fn individual_power(h1: f64, h2: f64, p1: f64, p2: f64, n1: u64, n2: u64, eps: f64) -> Result<Self> {
        Self::new(h1, h2, PowerConstraint::Individual { p1, p2 }, n1, n2, eps)
    }

    fn validate(&self) -> Result<()> {
        if !(self.h1.is_finite() && self.h1 > 0.0) {
            return Err(Error::invalid("h1", format!("must be finite and > 0, got {}", self.h1)));
        }
        if !(self.h2.is_finite() && self.h2 >= self.h1) {
            return Err(Error::invalid(
                "h2",
                format!("must be finite and >= h1 = {}, got {}", self.h1, self.h2),
            ));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match self.power {
            PowerConstraint::Sum(p) if !positive(p) => {
                return Err(Error::invalid("power_sum", format!("must be finite and > 0, got {p}")));
            }
            PowerConstraint::Individual { p1, .. } if !positive(p1) => {
                return Err(Error::invalid(
                    "power_user1",
                    format!("must be finite and > 0, got {p1}"),
                ));
            }
            PowerConstraint::Individual { p2, .. } if !positive(p2) => {
                return Err(Error::invalid(
                    "power_user2",
                    format!("must be finite and > 0, got {p2}"),
                ));
            }
            _ => {}
        }
        if self.n2 < 1 {
            return Err(Error::invalid("n2", "must be >= 1"));
        }
        if self.n1 < self.n2 {
            return Err(Error::invalid(
                "n1",
                format!("must be >= n2 = {}, got {}", self.n2, self.n1),
            ));
        }
        if !(self.eps > 0.0 && self.eps < EPS_LIMIT) {
            return Err(Error::invalid(
                "eps_total",
                format!("must satisfy 0 < eps < {EPS_LIMIT}, got {}", self.eps),
            ));
        }
        Ok(())
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn h2(&self) -> f64 {
        self.h2
    }

    pub fn power(&self) -> PowerConstraint {
        self.power
    }

    pub fn n1(&self) -> u64 {
        self.n1
    }

    pub fn n2(&self) -> u64 {
        self.n2
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Blocklength ratio `n2/n1 ∈ (0, 1]`.
    pub fn p(&self) -> f64 {
        self.n2 as f64 / self.n1 as f64
    }

    pub fn h(&self, user: User) -> f64 {
        match user {
            User::One => self.h1,
            User::Two => self.h2,
        }
    }

    pub fn n(&self, user: User) -> u64 {
        match user {
            User::One => self.n1,
            User::Two => self.n2,
        }
    }

    /// The sum power `P`, or an error for individual-power scenarios.
    pub fn sum_power_value(&self) -> Result<f64> {
        match self.power {
            PowerConstraint::Sum(p) => Ok(p),
            PowerConstraint::Individual { .. } => Err(Error::invalid(
                "power",
                "this bound needs a sum power constraint (power_sum)",
            )),
        }
    }

    /// `(P1, P2)`, or an error for sum-power scenarios.
    pub fn individual_powers(&self) -> Result<(f64, f64)> {
        match self.power {
            PowerConstraint::Individual { p1, p2 } => Ok((p1, p2)),
            PowerConstraint::Sum(_) => Err(Error::invalid(
                "power",
                "early decoding needs individual power constraints (power_user1, power_user2)",
            )),
        }
    }

    pub fn with_blocklengths(&self, n1: u64, n2: u64) -> Result<Self> {
        Self::new(self.h1, self.h2, self.power, n1, n2, self.eps)
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.h1, self.h2, self.power, self.n1, self.n2, eps)
    }

    /// Same scenario at a relaxed error level; callers keep `eps < 1`.
    pub(crate) fn with_eps_unchecked(&self, eps: f64) -> Self {
        ChannelScenario { eps, ..*self }
    }

    pub fn with_gains(&self, h1: f64, h2: f64) -> Result<Self> {
        Self::new(h1, h2, self.power, self.n1, self.n2, self.eps)
    }

    pub fn with_power(&self, power: PowerConstraint) -> Result<Self> {
        Self::new(self.h1, self.h2, power, self.n1, self.n2, self.eps)
    }
}

/// Receiver index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum User {
    One,
    Two,
}

impl TryFrom<u8> for User {
    type Error = Error;
    fn try_from(k: u8) -> Result<Self> {
        match k {
            1 => Ok(User::One),
            2 => Ok(User::Two),
            _ => Err(Error::invalid("user", format!("must be 1 or 2, got {k}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid() {
        let ok = ChannelScenario::sum_power(1.0, 10.0, 10.0, 1024, 922, 2e-6);
        assert!(ok.is_ok());
        assert!(ChannelScenario::sum_power(0.0, 10.0, 10.0, 1024, 922, 2e-6).is_err());
        assert!(ChannelScenario::sum_power(2.0, 1.0, 10.0, 1024, 922, 2e-6).is_err());
        assert!(ChannelScenario::sum_power(1.0, 1.0, -1.0, 1024, 922, 2e-6).is_err());
        assert!(ChannelScenario::sum_power(1.0, 1.0, 1.0, 100, 101, 2e-6).is_err());
        assert!(ChannelScenario::sum_power(1.0, 1.0, 1.0, 100, 0, 2e-6).is_err());
        assert!(ChannelScenario::sum_power(1.0, 1.0, 1.0, 100, 50, 0.25).is_err());
        assert!(ChannelScenario::sum_power(1.0, 1.0, 1.0, 100, 50, 0.0).is_err());
        assert!(ChannelScenario::individual_power(1.0, 2.0, 8.0, 0.0, 100, 50, 1e-3).is_err());
    }

    #[test]
    fn error_names_field() {
        let err = ChannelScenario::sum_power(1.0, 0.5, 10.0, 1024, 922, 2e-6).unwrap_err();
        assert!(err.to_string().contains("h2"), "{err}");
        let err = ChannelScenario::sum_power(1.0, 2.0, 10.0, 1024, 922, 0.3).unwrap_err();
        assert!(err.to_string().contains("eps_total"), "{err}");
    }

    #[test]
    fn power_mode_accessors() {
        let spc = ChannelScenario::sum_power(1.0, 2.0, 10.0, 10, 9, 1e-3).unwrap();
        assert_eq!(spc.sum_power_value().unwrap(), 10.0);
        assert!(spc.individual_powers().is_err());
        assert!((spc.p() - 0.9).abs() < 1e-15);
        let ipc = ChannelScenario::individual_power(1.0, 2.0, 8.0, 0.2, 10, 9, 1e-3).unwrap();
        assert_eq!(ipc.individual_powers().unwrap(), (8.0, 0.2));
        assert!(ipc.sum_power_value().is_err());
    }

    #[test]
    fn order_parse_roundtrip() {
        for o in [Order::FirstOrder, Order::SecondOrder, Order::WithHalfLogN] {
            assert_eq!(o.as_str().parse::<Order>().unwrap(), o);
        }
        assert!("third".parse::<Order>().is_err());
    }

    #[test]
    fn deserialization_validates() {
        let s = ChannelScenario::sum_power(1.0, 2.0, 3.0, 10, 5, 1e-3).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<ChannelScenario>(&json).unwrap(), s);
        let bad = json.replace("\"n2\":5", "\"n2\":50");
        assert!(serde_json::from_str::<ChannelScenario>(&bad).is_err());
    }
}
