//! Time sharing between two coding schemes at finite blocklength.
//!
//! Splitting `n` symbols into `αn` and `(1−α)n` scales each scheme's
//! dispersion debit by `√α` and `√(1−α)` instead of `α` and `1−α`, so the
//! time-sharing curve sags below the chord between its endpoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cap, disp_iid, q_inv, Probability, Snr};

/// Rates of a scheme as `fo − so/√n` per user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderRatePair {
    pub fo1: f64,
    pub fo2: f64,
    pub so1: f64,
    pub so2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub r1: f64,
    pub r2: f64,
}

impl SecondOrderRatePair {
    pub fn new(fo1: f64, fo2: f64, so1: f64, so2: f64) -> Result<Self> {
        for (name, v) in [("fo1", fo1), ("fo2", fo2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("so1", so1), ("so2", so2)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        Ok(SecondOrderRatePair { fo1, fo2, so1, so2 })
    }

    pub fn rate(&self, n: f64) -> RatePair {
        let root = n.sqrt();
        RatePair {
            r1: self.fo1 - self.so1 / root,
            r2: self.fo2 - self.so2 / root,
        }
    }
}

fn check_n(n: f64) -> Result<()> {
    if n.is_finite() && n > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "n",
            value: n,
            constraint: "finite and > 0",
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "alpha",
            value: alpha,
            constraint: "in [0, 1]",
        })
    }
}

/// Rate pair when scheme `a` uses `αn` symbols and scheme `b` the rest.
pub fn ts_rates(a: &SecondOrderRatePair, b: &SecondOrderRatePair, alpha: f64, n: f64) -> Result<RatePair> {
    check_alpha(alpha)?;
    check_n(n)?;
    if alpha == 1.0 {
        return Ok(a.rate(n));
    }
    if alpha == 0.0 {
        return Ok(b.rate(n));
    }
    let (sa, sb, root) = (alpha.sqrt(), (1.0 - alpha).sqrt(), n.sqrt());
    Ok(RatePair {
        r1: alpha * a.fo1 + (1.0 - alpha) * b.fo1 - (sa * a.so1 + sb * b.so1) / root,
        r2: alpha * a.fo2 + (1.0 - alpha) * b.fo2 - (sa * a.so2 + sb * b.so2) / root,
    })
}

/// Convex combination of the two endpoint rate pairs at blocklength `n`.
pub fn chord(a: &SecondOrderRatePair, b: &SecondOrderRatePair, alpha: f64, n: f64) -> Result<RatePair> {
    check_alpha(alpha)?;
    check_n(n)?;
    let (ra, rb) = (a.rate(n), b.rate(n));
    Ok(RatePair {
        r1: alpha * ra.r1 + (1.0 - alpha) * rb.r1,
        r2: alpha * ra.r2 + (1.0 - alpha) * rb.r2,
    })
}

pub fn ts_region(a: &SecondOrderRatePair, b: &SecondOrderRatePair, n: f64, grid: &[f64]) -> Result<Vec<RatePair>> {
    if grid.is_empty() {
        return Err(Error::invalid("alpha_grid", "must contain at least one point"));
    }
    grid.iter().map(|&alpha| ts_rates(a, b, alpha, n)).collect()
}

/// `0, step, 2·step, …, 1` with `1/step` rounded to an integer count.
pub fn alpha_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::invalid("alpha_step", format!("must be in (0, 1], got {step}")));
    }
    let count = (1.0 / step).round().max(1.0) as usize;
    Ok((0..=count).map(|i| i as f64 / count as f64).collect())
}

/// Endpoints where only one user is served, at `R_{k,0} = C(h_k P) −
/// √(V_G(h_k P)/n)·Q⁻¹(ε)`.
pub fn single_user_endpoints(
    h1: f64,
    h2: f64,
    power: f64,
    eps: Probability,
) -> Result<(SecondOrderRatePair, SecondOrderRatePair)> {
    let backoff = q_inv(eps);
    let (x1, x2) = (Snr::new(h1 * power)?, Snr::new(h2 * power)?);
    Ok((
        SecondOrderRatePair::new(cap(x1), 0.0, disp_iid(x1).sqrt() * backoff, 0.0)?,
        SecondOrderRatePair::new(0.0, cap(x2), 0.0, disp_iid(x2).sqrt() * backoff)?,
    ))
}

/// Time-sharing curve with each user's rate divided by its own
/// single-user rate at the same `n`.
pub fn ts_normalized(a: &SecondOrderRatePair, b: &SecondOrderRatePair, n: f64, grid: &[f64]) -> Result<Vec<RatePair>> {
    let (ra, rb) = (a.rate(n).r1, b.rate(n).r2);
    if !(ra > 0.0 && rb > 0.0) {
        return Err(Error::Infeasible(format!(
            "single-user rates at n = {n} are not positive ({ra}, {rb})"
        )));
    }
    Ok(ts_region(a, b, n, grid)?
        .into_iter()
        .map(|p| RatePair {
            r1: p.r1 / ra,
            r2: p.r2 / rb,
        })
        .collect())
}

/// Sub-blocks shorter than this are outside the range where the Gaussian
/// approximation is trusted.
pub const LOW_CONFIDENCE_SUBBLOCK: f64 = 64.0;

/// Whether either nonempty sub-block is shorter than
/// [`LOW_CONFIDENCE_SUBBLOCK`].
pub fn low_confidence(alpha: f64, n: f64) -> bool {
    [alpha * n, (1.0 - alpha) * n]
        .iter()
        .any(|&len| len > 0.0 && len < LOW_CONFIDENCE_SUBBLOCK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig1() -> (SecondOrderRatePair, SecondOrderRatePair) {
        single_user_endpoints(1.0, 1.0, 10.0, Probability::new(1e-6).unwrap()).unwrap()
    }

    #[test]
    fn endpoints_exact() {
        let (a, b) = fig1();
        for n in [128.0, 512.0, 2048.0] {
            assert_eq!(ts_rates(&a, &b, 1.0, n).unwrap(), a.rate(n));
            assert_eq!(ts_rates(&a, &b, 0.0, n).unwrap(), b.rate(n));
        }
    }

    #[test]
    fn equal_schemes_pay_extra_debit() {
        let a = SecondOrderRatePair::new(1.0, 2.0, 3.0, 4.0).unwrap();
        let n = 100.0;
        let r = ts_rates(&a, &a, 0.25, n).unwrap();
        let factor = 0.25f64.sqrt() + 0.75f64.sqrt();
        assert!((factor - 1.366_025_403_784_438_6).abs() < 1e-15);
        assert!((r.r1 - (1.0 - factor * 3.0 / 10.0)).abs() < 1e-15);
        let half = ts_rates(&a, &a, 0.5, n).unwrap();
        assert!((half.r2 - (2.0 - 2f64.sqrt() * 4.0 / 10.0)).abs() < 1e-15);
        assert!(half.r2 < a.rate(n).r2);
    }

    #[test]
    fn large_n_recovers_first_order() {
        let (a, b) = fig1();
        let r = ts_rates(&a, &b, 0.3, 1e30).unwrap();
        assert!((r.r1 - 0.3 * a.fo1).abs() < 1e-12);
        assert!((r.r2 - 0.7 * b.fo2).abs() < 1e-12);
    }

    #[test]
    fn sag_deeper_for_short_blocks() {
        let (a, b) = fig1();
        let grid = alpha_grid(0.05).unwrap();
        assert_eq!(grid.len(), 21);
        let mid = |n| ts_normalized(&a, &b, n, &grid).unwrap()[10];
        let (p128, p512, p2048) = (mid(128.0), mid(512.0), mid(2048.0));
        assert!(p128.r1 < p512.r1 && p512.r1 < p2048.r1);
        assert!(p2048.r1 < 0.5);
    }

    #[test]
    fn argument_checks() {
        let (a, b) = fig1();
        assert!(ts_rates(&a, &b, -0.1, 10.0).is_err());
        assert!(ts_rates(&a, &b, 1.1, 10.0).is_err());
        assert!(ts_rates(&a, &b, 0.5, 0.0).is_err());
        assert!(ts_region(&a, &b, 10.0, &[]).is_err());
        assert!(alpha_grid(0.0).is_err());
        assert!(SecondOrderRatePair::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(SecondOrderRatePair::new(1.0, 0.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn confidence_annotation() {
        assert!(low_confidence(0.05, 128.0));
        assert!(!low_confidence(0.5, 128.0));
        assert!(!low_confidence(1.0, 128.0));
        assert!(!low_confidence(0.0, 2048.0));
    }

    proptest! {
        #[test]
        fn below_chord(fo in proptest::array::uniform4(0.0f64..5.0), so in proptest::array::uniform4(0.0f64..5.0),
                       alpha in 0.0f64..=1.0, n in 1.0f64..1e6) {
            let a = SecondOrderRatePair::new(fo[0], fo[1], so[0], so[1]).unwrap();
            let b = SecondOrderRatePair::new(fo[2], fo[3], so[2], so[3]).unwrap();
            let ts = ts_rates(&a, &b, alpha, n).unwrap();
            let ch = chord(&a, &b, alpha, n).unwrap();
            let tol = 1e-12 * (1.0 + ch.r1.abs() + ch.r2.abs());
            prop_assert!(ts.r1 <= ch.r1 + tol && ts.r2 <= ch.r2 + tol);
            if alpha > 1e-6 && alpha < 1.0 - 1e-6 && so[0] > 0.1 {
                prop_assert!(ts.r1 < ch.r1);
            }
        }
    }
}
