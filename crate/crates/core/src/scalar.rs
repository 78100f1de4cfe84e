//! Scalar special functions shared by every bound.
//!
//! All information quantities are in bits. The capacity `C(x) = ½·log₂(1+x)`,
//! the shell dispersion `V(x)` and the i.i.d. Gaussian dispersion `V_G(x)` are
//! functions of a nonnegative SNR; the Gaussian tail `Q` and its inverse turn
//! error probabilities into backoff factors.

use std::f64::consts::{LOG2_E, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(log₂ e)²`.
pub const LOG2_E_SQ: f64 = LOG2_E * LOG2_E;

/// A nonnegative, finite signal-to-noise ratio.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Snr(f64);

impl Snr {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Snr(value))
        } else {
            Err(Error::Domain {
                name: "snr",
                value,
                constraint: "finite and >= 0",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Snr {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Snr::new(value)
    }
}

impl From<Snr> for f64 {
    fn from(s: Snr) -> f64 {
        s.0
    }
}

/// A probability strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Probability(value))
        } else {
            Err(Error::Domain {
                name: "probability",
                value,
                constraint: "0 < p < 1",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Gaussian capacity `½·log₂(1+x)` in bits per channel use.
pub fn cap(x: Snr) -> f64 {
    0.5 * x.0.ln_1p() * LOG2_E
}

/// Shell-codebook dispersion `(log₂e)²/2 · x(x+2)/(x+1)²`.
pub fn disp_shell(x: Snr) -> f64 {
    let x = x.0;
    if x.is_infinite() {
        return 0.5 * LOG2_E_SQ;
    }
    0.5 * LOG2_E_SQ * x * (x + 2.0) / ((x + 1.0) * (x + 1.0))
}

/// i.i.d. Gaussian codebook dispersion `(log₂e)² · x/(x+1)`.
pub fn disp_iid(x: Snr) -> f64 {
    let x = x.0;
    LOG2_E_SQ * x / (x + 1.0)
}

/// Standard Gaussian tail probability `Q(x) = ½·erfc(x/√2)`.
pub fn q(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain {
            name: "x",
            value: x,
            constraint: "finite",
        });
    }
    Ok(q_unchecked(x))
}

fn q_unchecked(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Standard normal density.
fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse Gaussian tail `Q⁻¹(p)`.
///
/// Safeguarded Newton iteration on `ln Q(x) = ln p` inside a bisection
/// bracket. The upper tail is solved directly; `p > ½` goes through
/// `Q⁻¹(p) = −Q⁻¹(1−p)`, where `1−p` is exact.
pub fn q_inv(p: Probability) -> f64 {
    let p = p.0;
    if p == 0.5 {
        return 0.0;
    }
    if p > 0.5 {
        return -upper_tail_inv(1.0 - p);
    }
    upper_tail_inv(p)
}

/// Solves `Q(x) = p` for `0 < p < ½`, returning `x > 0`.
fn upper_tail_inv(p: f64) -> f64 {
    let target = p.ln();
    // Q(x) underflows to zero just below x = 38.5.
    let (mut lo, mut hi) = (0.0_f64, 38.5_f64);

    // Abramowitz & Stegun 26.2.23 starting point, |error| < 4.5e-4.
    let t = (-2.0 * p.ln()).sqrt();
    let mut x = t
        - (2.515517 + 0.802853 * t + 0.010328 * t * t) / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
    x = x.clamp(lo, hi);

    for _ in 0..100 {
        let qx = q_unchecked(x);
        if qx <= 0.0 {
            hi = x;
            x = 0.5 * (lo + hi);
            continue;
        }
        let f = qx.ln() - target;
        if f == 0.0 {
            return x;
        }
        // ln Q is decreasing in x.
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = -phi(x) / qx;
        let mut next = x - f / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 2.0 * f64::EPSILON * x.abs().max(1.0) || hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
    }
    x
}
