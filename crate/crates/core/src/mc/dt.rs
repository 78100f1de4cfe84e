use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::stats::{run_chunks, Moments};
use super::{McConfig, McReport};
use crate::early::EffectiveGains;
use crate::error::{Error, Result};
use crate::scenario::PowerConstraint;
use crate::shell::{fill_composite_shell, k_tilde};

pub const DT_MAX_BLOCKLENGTH: u64 = 64;
pub const DT_MAX_MESSAGES: usize = 256;

/// Amplitude gain and codeword power of the link user 2 decodes user 1 over.
pub(super) fn sic1_link(cfg: &McConfig) -> Result<(f64, f64)> {
    let s = &cfg.scenario;
    match s.power() {
        PowerConstraint::Individual { p1, .. } => Ok((EffectiveGains::for_scenario(s, &cfg.ed)?.g2, p1)),
        PowerConstraint::Sum(p) => Ok((s.h2(), p)),
    }
}

pub(super) fn check_scale(n: u64, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("messages", "must be at least 1"));
    }
    if n > DT_MAX_BLOCKLENGTH || m > DT_MAX_MESSAGES {
        return Err(Error::ScaleLimit(format!(
            "threshold decoding simulates n <= {DT_MAX_BLOCKLENGTH} and M <= {DT_MAX_MESSAGES}, got n = {n}, M = {m}"
        )));
    }
    Ok(())
}

/// Information density `ln dP_{Y|X}/dQ_Y` of one codeword, in nats, with
/// `Q_Y = N(0, 1+g·P)` per symbol.
pub(super) fn density(codeword: &[f64], y: &[f64], amp: f64, ref_var: f64) -> f64 {
    let mut acc = 0.0;
    for (&c, &v) in codeword.iter().zip(y) {
        let z = v - amp * c;
        acc += v * v / ref_var - z * z;
    }
    0.5 * (acc + codeword.len() as f64 * ref_var.ln())
}

/// Threshold decoding of a random composite shell code with `γ = K̃·M`.
///
/// The codeword has length `n1` and is split at `n2`; the link is the one
/// user 2 sees user 1 through. Returns the empirical error rate against the
/// DT bound estimated on the same trials.
pub fn simulate_dt_decoder(cfg: &McConfig, m: usize) -> Result<McReport> {
    let (gain, power) = sic1_link(cfg)?;
    let log_gamma = (k_tilde(gain * power)? * m as f64).ln();
    simulate_dt_decoder_with_threshold(cfg, m, log_gamma)
}

/// [`simulate_dt_decoder`] with an explicit `ln γ` (may be `+∞`).
///
/// Each trial draws a fresh codebook and a uniform message, decodes the
/// smallest message whose density exceeds `ln γ`, and records
/// `1{ĩ ≤ ln γ} + K̃·M·1{ĩ > ln γ}·e^{−ĩ}` for the sent codeword. The second
/// term is an unbiased estimate of `K̃·M·Pr[ĩ(X; Ȳ) > ln γ]` with `Ȳ ~ Q`.
pub fn simulate_dt_decoder_with_threshold(cfg: &McConfig, m: usize, log_gamma: f64) -> Result<McReport> {
    cfg.validate()?;
    check_scale(cfg.n1(), m)?;
    if log_gamma.is_nan() {
        return Err(Error::invalid("log_gamma", "must not be NaN"));
    }
    let (gain, power) = sic1_link(cfg)?;
    let snr = gain * power;
    let k = k_tilde(snr)?;
    let (n, split) = (cfg.n1() as usize, cfg.n2() as usize);
    let amp = gain.sqrt();
    let ref_var = 1.0 + snr;

    #[derive(Clone, Copy)]
    struct Acc {
        error: Moments,
        rhs: Moments,
        diff: Moments,
        outage: Moments,
    }
    let parts = run_chunks(
        cfg.trials,
        cfg.seed,
        || Acc {
            error: Moments::new(0.0),
            rhs: Moments::new(0.0),
            diff: Moments::new(0.0),
            outage: Moments::new(0.0),
        },
        |rng: &mut ChaCha8Rng, acc: &mut Acc| {
            let mut book = vec![0.0; m * n];
            for cw in book.chunks_mut(n) {
                fill_composite_shell(cw, split, power, rng);
            }
            let sent = rng.random_range(0..m);
            let y: Vec<f64> = book[sent * n..(sent + 1) * n]
                .iter()
                .map(|&c| amp * c + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let i_sent = density(&book[sent * n..(sent + 1) * n], &y, amp, ref_var);
            let decoded = if m == 1 {
                Some(0)
            } else {
                (0..m).find(|&j| {
                    let ij = if j == sent {
                        i_sent
                    } else {
                        density(&book[j * n..(j + 1) * n], &y, amp, ref_var)
                    };
                    ij > log_gamma
                })
            };
            let error = if decoded == Some(sent) { 0.0 } else { 1.0 };
            let outage = if i_sent > log_gamma { 0.0 } else { 1.0 };
            let confusion = if outage == 0.0 {
                k * m as f64 * (-i_sent).exp()
            } else {
                0.0
            };
            let rhs = outage + confusion;
            acc.error.push(error);
            acc.rhs.push(rhs);
            acc.diff.push(error - rhs);
            acc.outage.push(outage);
        },
    );
    let mut it = parts.into_iter();
    let mut total = it.next().expect("at least one chunk");
    for p in it {
        total.error.merge(&p.error);
        total.rhs.merge(&p.rhs);
        total.diff.merge(&p.diff);
        total.outage.merge(&p.outage);
    }
    let se = total.diff.mean_std_error();
    let (err, rhs) = (total.error.mean(), total.rhs.mean());
    let mut details = BTreeMap::new();
    details.insert("outage".into(), total.outage.mean());
    details.insert("confusion_term".into(), rhs - total.outage.mean());
    details.insert("k_tilde".into(), k);
    details.insert("log_gamma".into(), log_gamma);
    details.insert("messages".into(), m as f64);
    details.insert("n".into(), n as f64);
    Ok(McReport {
        check: "dt_decoder".into(),
        empirical_mean: err,
        empirical_var: total.error.variance(),
        target_mean: rhs,
        target_var: total.rhs.variance(),
        std_error: se,
        var_std_error: total.rhs.mean_std_error(),
        pass: err <= rhs + cfg.confidence_sigmas * se,
        trials_used: total.error.count(),
        details,
        warning: cfg.power_warning(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::early::EdOptions;
    use crate::scenario::ChannelScenario;

    /// `g2 = 2/(1 + 2·0.25) = 4/3` and `P1 = 3` give `g2·P1 = 4`.
    fn toy(n1: u64, n2: u64, trials: u64) -> McConfig {
        let s = ChannelScenario::individual_power(1.0, 2.0, 3.0, 0.5, n1, n2, 1e-3).unwrap();
        let mut cfg = McConfig::new(s, trials, 21);
        cfg.ed = EdOptions {
            delta: Some(0.25),
            include_log_k: false,
        };
        cfg
    }

    #[test]
    fn link_snr() {
        let (g, p) = sic1_link(&toy(32, 16, 1)).unwrap();
        assert!((g * p - 4.0).abs() < 1e-14);
    }

    #[test]
    fn error_below_bound() {
        let r = simulate_dt_decoder(&toy(32, 16, 3000), 16).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.target_mean <= 1.0 + 1e-12);
    }

    #[test]
    fn single_message_never_errs() {
        let r = simulate_dt_decoder(&toy(16, 8, 2000), 1).unwrap();
        assert_eq!(r.empirical_mean, 0.0);
        assert!(r.details["outage"] >= 0.0);
        assert!(r.pass);
    }

    #[test]
    fn infinite_threshold_is_all_outage() {
        let r = simulate_dt_decoder_with_threshold(&toy(16, 8, 500), 4, f64::INFINITY).unwrap();
        assert_eq!(r.details["outage"], 1.0);
        assert_eq!(r.empirical_mean, 1.0);
        assert_eq!(r.target_mean, 1.0);
        assert!(r.pass);
    }

    #[test]
    fn scale_limits() {
        assert!(matches!(
            simulate_dt_decoder(&toy(65, 8, 10), 4),
            Err(Error::ScaleLimit(_))
        ));
        assert!(matches!(
            simulate_dt_decoder(&toy(32, 8, 10), 257),
            Err(Error::ScaleLimit(_))
        ));
        assert!(simulate_dt_decoder(&toy(32, 8, 10), 0).is_err());
    }

    #[test]
    fn density_of_exact_codeword() {
        let c = [1.0, -1.0];
        let y = [2.0, -2.0];
        let want = 0.5 * ((4.0 / 5.0 - 1.0) * 2.0 + 2.0 * 5f64.ln());
        assert!((density(&c, &y, 1.0, 5.0) - want).abs() < 1e-15);
    }
}
