use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::dt::{check_scale, density};
use super::stats::run_chunks;
use super::{McConfig, McReport};
use crate::early::EffectiveGains;
use crate::error::{Error, Result};
use crate::shell::{fill_composite_shell, k_tilde};

/// Error-event counts over shared trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub trials: u64,
    pub user1: u64,
    pub user2: u64,
    pub both: u64,
    pub either: u64,
}

impl ErrorCounts {
    pub fn record(&mut self, e1: bool, e2: bool) {
        self.trials += 1;
        self.user1 += e1 as u64;
        self.user2 += e2 as u64;
        self.both += (e1 && e2) as u64;
        self.either += (e1 || e2) as u64;
    }

    pub fn merge(&mut self, o: &ErrorCounts) {
        self.trials += o.trials;
        self.user1 += o.user1;
        self.user2 += o.user2;
        self.both += o.both;
        self.either += o.either;
    }

    /// `either = user1 + user2 − both` and `both ≤ min(user1, user2)`.
    pub fn identity_holds(&self) -> bool {
        self.either + self.both == self.user1 + self.user2 && self.both <= self.user1.min(self.user2)
    }

    fn rate(&self, k: u64) -> f64 {
        k as f64 / self.trials as f64
    }
}

pub fn decompose_errors(e1: &[bool], e2: &[bool]) -> Result<ErrorCounts> {
    if e1.len() != e2.len() {
        return Err(Error::invalid(
            "error events",
            format!("user sequences differ in length ({} vs {})", e1.len(), e2.len()),
        ));
    }
    let mut c = ErrorCounts::default();
    e1.iter().zip(e2).for_each(|(&a, &b)| c.record(a, b));
    Ok(c)
}

/// Smallest index whose density exceeds `log_gamma`.
fn threshold_decode<F: Fn(usize) -> f64>(m: usize, log_gamma: f64, density_of: F) -> Option<usize> {
    (0..m).find(|&j| density_of(j) > log_gamma)
}

/// Full two-user toy simulation with early decoding and SIC at user 2, and
/// the inclusion–exclusion count of its error events.
pub fn verify_error_decomposition(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let m = cfg.messages;
    check_scale(cfg.n1(), m)?;
    let s = &cfg.scenario;
    let (p1, _) = s.individual_powers()?;
    let gains = EffectiveGains::for_scenario(s, &cfg.ed)?;
    let (n1, n2) = (s.n1() as usize, s.n2() as usize);
    let (h1, h2, pb2) = (s.h1(), s.h2(), gains.p_bar2);

    // User 1: treats user 2's codeword as noise on the first n2 symbols.
    let var1 = [1.0 + h1 * pb2, 1.0];
    let ref1 = [h1 * p1 + var1[0], h1 * p1 + 1.0];
    let log_gamma1 = (k_tilde(gains.g1 * p1)? * m as f64).ln();
    // User 2, early-decoding step on the normalized output.
    let scale2 = (1.0 + h2 * pb2).sqrt();
    let g2p1 = gains.g2 * p1;
    let log_gamma_sic1 = (k_tilde(g2p1)? * m as f64).ln();
    // User 2, own message after cancellation; the i.i.d. input needs no K.
    let log_gamma_sic2 = (m as f64).ln();

    let rx1_density = |c: &[f64], y: &[f64]| {
        let mut acc = 0.0;
        for (i, (&ci, &yi)) in c.iter().zip(y).enumerate() {
            let seg = usize::from(i >= n2);
            let z = yi - h1.sqrt() * ci;
            acc += (ref1[seg] / var1[seg]).ln() + yi * yi / ref1[seg] - z * z / var1[seg];
        }
        0.5 * acc
    };

    let parts = run_chunks(
        cfg.trials,
        cfg.seed,
        ErrorCounts::default,
        |rng: &mut ChaCha8Rng, acc| {
            let mut book1 = vec![0.0; m * n1];
            for cw in book1.chunks_mut(n1) {
                fill_composite_shell(cw, n2, p1, rng);
            }
            let book2: Vec<f64> = (0..m * n2)
                .map(|_| pb2.sqrt() * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let (w1, w2) = (rng.random_range(0..m), rng.random_range(0..m));
            let c1 = |j: usize| &book1[j * n1..(j + 1) * n1];
            let c2 = |j: usize| &book2[j * n2..(j + 1) * n2];
            let x: Vec<f64> = (0..n1)
                .map(|i| c1(w1)[i] + if i < n2 { c2(w2)[i] } else { 0.0 })
                .collect();
            let y1: Vec<f64> = x
                .iter()
                .map(|&v| h1.sqrt() * v + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let y2: Vec<f64> = x[..n2]
                .iter()
                .map(|&v| h2.sqrt() * v + rng.sample::<f64, _>(StandardNormal))
                .collect();

            let d1 = threshold_decode(m, log_gamma1, |j| rx1_density(c1(j), &y1));
            let y2n: Vec<f64> = y2.iter().map(|v| v / scale2).collect();
            let sic = threshold_decode(m, log_gamma_sic1, |j| {
                density(&c1(j)[..n2], &y2n, gains.g2.sqrt(), 1.0 + g2p1)
            });
            let d2 = sic.and_then(|j| {
                let r: Vec<f64> = y2.iter().zip(&c1(j)[..n2]).map(|(v, c)| v - h2.sqrt() * c).collect();
                threshold_decode(m, log_gamma_sic2, |k| density(c2(k), &r, h2.sqrt(), 1.0 + h2 * pb2))
            });
            acc.record(d1 != Some(w1), d2 != Some(w2));
        },
    );
    let mut counts = ErrorCounts::default();
    parts.iter().for_each(|p| counts.merge(p));

    let either = counts.rate(counts.either);
    let combined = counts.rate(counts.user1 + counts.user2 - counts.both);
    let bernoulli = either * (1.0 - either);
    let mut details = BTreeMap::new();
    details.insert("eps1".into(), counts.rate(counts.user1));
    details.insert("eps2".into(), counts.rate(counts.user2));
    details.insert("eps_both".into(), counts.rate(counts.both));
    Ok(McReport {
        check: "error_decomposition".into(),
        empirical_mean: either,
        empirical_var: bernoulli,
        target_mean: combined,
        target_var: bernoulli,
        std_error: (bernoulli / counts.trials as f64).sqrt(),
        var_std_error: 0.0,
        pass: counts.identity_holds() && either == combined,
        trials_used: counts.trials,
        details,
        warning: cfg.power_warning(),
    })
}
