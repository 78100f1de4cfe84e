//! Composite shell codewords and the output-density machinery behind `K̃`.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `c² = 729·π/8`.
pub const C_SQ: f64 = 729.0 * PI / 8.0;

fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// A codeword whose first `split` symbols and remaining symbols each lie on
/// their own power shell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeShellCodeword {
    pub symbols: Vec<f64>,
    pub split: usize,
}

impl CompositeShellCodeword {
    pub fn segment_i(&self) -> &[f64] {
        &self.symbols[..self.split]
    }

    pub fn segment_ii(&self) -> &[f64] {
        &self.symbols[self.split..]
    }
}

fn check_shell_args(n1: usize, n2: usize, power: f64) -> Result<()> {
    if n2 == 0 {
        return Err(Error::invalid("n2", "must be at least 1"));
    }
    if n1 < n2 {
        return Err(Error::invalid("n1", format!("must be >= n2 = {n2}, got {n1}")));
    }
    if !(power.is_finite() && power > 0.0) {
        return Err(Error::invalid("power", format!("must be finite and > 0, got {power}")));
    }
    Ok(())
}

/// Overwrites `buf` with a uniform draw from the sphere of radius `√(len·P)`.
pub fn fill_shell<R: Rng + ?Sized>(buf: &mut [f64], power: f64, rng: &mut R) {
    if buf.is_empty() {
        return;
    }
    loop {
        let mut norm_sq = 0.0;
        for v in buf.iter_mut() {
            *v = rng.sample(StandardNormal);
            norm_sq += *v * *v;
        }
        if norm_sq > 0.0 {
            let scale = (buf.len() as f64 * power / norm_sq).sqrt();
            buf.iter_mut().for_each(|v| *v *= scale);
            return;
        }
    }
}

/// Draws a composite shell codeword into `buf` (length `n1`) from `rng`.
pub fn fill_composite_shell<R: Rng + ?Sized>(buf: &mut [f64], n2: usize, power: f64, rng: &mut R) {
    let (head, tail) = buf.split_at_mut(n2);
    fill_shell(head, power, rng);
    fill_shell(tail, power, rng);
}

pub fn sample_composite_shell_with<R: Rng + ?Sized>(
    n1: usize,
    n2: usize,
    power: f64,
    rng: &mut R,
) -> Result<CompositeShellCodeword> {
    check_shell_args(n1, n2, power)?;
    let mut symbols = vec![0.0; n1];
    fill_composite_shell(&mut symbols, n2, power, rng);
    Ok(CompositeShellCodeword { symbols, split: n2 })
}

/// Seeded draw; stream `0` of the ChaCha8 generator keyed by `seed`.
pub fn sample_composite_shell(n1: usize, n2: usize, power: f64, seed: u64) -> Result<CompositeShellCodeword> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_composite_shell_with(n1, n2, power, &mut rng)
}

/// Natural log of the surface area `2π^{n/2} r^{n−1} / Γ(n/2)` of the
/// sphere of radius `r` in `n` dimensions.
pub fn shell_surface(n: u64, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain {
            name: "n",
            value: 0.0,
            constraint: ">= 1",
        });
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain {
            name: "r",
            value: r,
            constraint: "finite and > 0",
        });
    }
    let n = n as f64;
    Ok(LN_2 + 0.5 * n * PI.ln() - ln_gamma(0.5 * n) + (n - 1.0) * r.ln())
}

/// Normalized output powers of the two segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub t_i: f64,
    pub t_ii: f64,
    pub p: f64,
    pub power: f64,
}

impl RatioPoint {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("t_i", self.t_i), ("t_ii", self.t_ii)] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Domain {
                    name,
                    value: t,
                    constraint: "finite and >= 0",
                });
            }
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::Domain {
                name: "p",
                value: self.p,
                constraint: "in (0, 1]",
            });
        }
        if !(self.power.is_finite() && self.power > 0.0) {
            return Err(Error::Domain {
                name: "power",
                value: self.power,
                constraint: "finite and > 0",
            });
        }
        Ok(())
    }

    /// Overall normalized output power `p·t_I + (1−p)·t_II`.
    pub fn t(&self) -> f64 {
        self.p * self.t_i + (1.0 - self.p) * self.t_ii
    }
}

/// Contribution of one segment to the exponent, `≥ 0` with equality at
/// `t = 1+P`.
///
/// With `s = √(1+4Pt)` and `w = (s − (1+2P)) / (2(1+P))` the segment term
/// is `(1+P)·w² − (w − ln(1+w))`, free of the cancellation in the raw form.
fn segment_exponent(power: f64, t: f64) -> f64 {
    let s = (1.0 + 4.0 * power * t).sqrt();
    let s0 = 1.0 + 2.0 * power;
    let d = 4.0 * power * (t - (1.0 + power)) / (s + s0);
    let w = d / (2.0 * (1.0 + power));
    (1.0 + power) * w * w - w_minus_ln1p(w)
}

/// `w − ln(1+w)` for `w > −1`.
fn w_minus_ln1p(w: f64) -> f64 {
    if w.abs() < 1e-3 {
        let mut term = w * w;
        let mut sum = 0.0;
        for k in 2..12 {
            sum += term / k as f64 * if k % 2 == 0 { 1.0 } else { -1.0 };
            term *= w;
        }
        sum
    } else {
        w - w.ln_1p()
    }
}

/// Exponent `f = f₁ − f₂` of the output density ratio bound
/// `dP/dQ ≤ K₁·e^{−n₁f/2}`.
pub fn ratio_exponent(pt: RatioPoint) -> Result<f64> {
    pt.validate()?;
    let RatioPoint { t_i, t_ii, p, power } = pt;
    let tail = if p < 1.0 {
        (1.0 - p) * segment_exponent(power, t_ii)
    } else {
        0.0
    };
    Ok(p * segment_exponent(power, t_i) + tail)
}

/// The same exponent evaluated term by term as `f₁ − f₂`.
pub fn ratio_exponent_direct(pt: RatioPoint) -> Result<f64> {
    pt.validate()?;
    let RatioPoint { t_i, t_ii, p, power } = pt;
    let s_i = (1.0 + 4.0 * power * t_i).sqrt();
    let s_ii = (1.0 + 4.0 * power * t_ii).sqrt();
    let f1 = (1.0 + power) + p * t_i + (1.0 - p) * t_ii - p * s_i - (1.0 - p) * s_ii
        + p * s_i.ln_1p()
        + (1.0 - p) * s_ii.ln_1p();
    let f2 = (2.0 * (1.0 + power)).ln() + pt.t() / (1.0 + power);
    Ok(f1 - f2)
}

/// `K₁(P, t_I, t_II) = (c²/4)·∏ (1 + sᵢ)/√sᵢ` with `sᵢ = √(1+4P·tᵢ)`.
pub fn k1_prefactor(power: f64, t_i: f64, t_ii: f64) -> Result<f64> {
    if !(power.is_finite() && power > 0.0) {
        return Err(Error::Domain {
            name: "power",
            value: power,
            constraint: "finite and > 0",
        });
    }
    let mut k = 1.0;
    for (name, t) in [("t_i", t_i), ("t_ii", t_ii)] {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Domain {
                name,
                value: t,
                constraint: "finite and > 0",
            });
        }
        let s = (1.0 + 4.0 * power * t).sqrt();
        k *= (1.0 + s) / s.sqrt();
    }
    Ok(0.25 * C_SQ * k)
}

/// `K̃ = 729·(π/8)·(1+P)²/(1+2P)`.
pub fn k_tilde(power: f64) -> Result<f64> {
    if !(power.is_finite() && power > 0.0) {
        return Err(Error::Domain {
            name: "power",
            value: power,
            constraint: "finite and > 0",
        });
    }
    Ok(C_SQ * (1.0 + power) * (1.0 + power) / (1.0 + 2.0 * power))
}

/// Log-density of `Y = X + Z` at a point with `‖y‖² = norm_sq`, where `X` is
/// uniform on the `m`-dimensional sphere of radius `√(mP)` and `Z` is unit
/// white Gaussian noise.
///
/// The average of `exp(r‖y‖cos θ)` over the sphere is a one-dimensional
/// integral in `θ` with weight `sin^{m−2} θ`, evaluated by composite Simpson
/// in the log domain.
pub fn log_shell_output_density(m: usize, power: f64, norm_sq: f64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let mf = m as f64;
    let r_sq = mf * power;
    let a = (r_sq * norm_sq).sqrt();
    let base = -0.5 * mf * (2.0 * PI).ln() - 0.5 * (norm_sq + r_sq);
    let log_avg = if m == 1 {
        a + (-2.0 * a).exp().ln_1p() - LN_2
    } else {
        const STEPS: usize = 4096;
        let h = PI / STEPS as f64;
        let mut terms = Vec::with_capacity(STEPS + 1);
        for k in 0..=STEPS {
            let theta = k as f64 * h;
            let sin = theta.sin();
            let lw = if m == 2 {
                0.0
            } else if sin <= 0.0 {
                continue;
            } else {
                (mf - 2.0) * sin.ln()
            };
            let simpson = if k == 0 || k == STEPS {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            terms.push(a * theta.cos() + lw + (simpson * h / 3.0).ln());
        }
        let peak = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_int = peak + terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln();
        // ∫₀^π sin^{m−2} θ dθ = √π·Γ((m−1)/2)/Γ(m/2)
        let log_norm = 0.5 * PI.ln() + ln_gamma(0.5 * (mf - 1.0)) - ln_gamma(0.5 * mf);
        log_int - log_norm
    };
    base + log_avg
}

/// Empirical distribution of `ln dP_Y/dQ_Y` at outputs of a composite shell
/// code, with `Q_Y = N(0, (1+P)I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRatioReport {
    pub n1: usize,
    pub n2: usize,
    pub power: f64,
    pub samples: usize,
    pub ratio_q999: f64,
    pub ratio_max: f64,
    pub k_tilde: f64,
    pub below_k_tilde: bool,
    /// Below this blocklength the comparison is informative only.
    pub soft: bool,
}

pub const DENSITY_RATIO_HARD_N1: usize = 64;

pub fn density_ratio_estimate(
    n1: usize,
    n2: usize,
    power: f64,
    samples: usize,
    seed: u64,
) -> Result<DensityRatioReport> {
    check_shell_args(n1, n2, power)?;
    if samples == 0 {
        return Err(Error::invalid("samples", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![0.0; n1];
    let mut log_ratios = Vec::with_capacity(samples);
    let log_q_scale = -0.5 * n1 as f64 * (2.0 * PI * (1.0 + power)).ln();
    for _ in 0..samples {
        fill_composite_shell(&mut y, n2, power, &mut rng);
        for v in y.iter_mut() {
            *v += rng.sample::<f64, _>(StandardNormal);
        }
        let sq = |s: &[f64]| s.iter().map(|v| v * v).sum::<f64>();
        let (a, b) = (sq(&y[..n2]), sq(&y[n2..]));
        let log_p = log_shell_output_density(n2, power, a) + log_shell_output_density(n1 - n2, power, b);
        let log_q = log_q_scale - 0.5 * (a + b) / (1.0 + power);
        log_ratios.push(log_p - log_q);
    }
    log_ratios.sort_by(f64::total_cmp);
    let idx = ((samples as f64 * 0.999).ceil() as usize).clamp(1, samples) - 1;
    let k = k_tilde(power)?;
    let ratio_q999 = log_ratios[idx].exp();
    Ok(DensityRatioReport {
        n1,
        n2,
        power,
        samples,
        ratio_q999,
        ratio_max: log_ratios[samples - 1].exp(),
        k_tilde: k,
        below_k_tilde: ratio_q999 < k,
        soft: n1 < DENSITY_RATIO_HARD_N1,
    })
}
