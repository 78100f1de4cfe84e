use std::f64::consts::LOG2_E;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::stats::run_moments;
use super::{moment_report, McConfig, McReport};
use crate::early::{user1_moments, EffectiveGains};
use crate::error::{Error, Result};
use crate::outer::{check_rho, h_rho, rho_quantities};
use crate::scalar::{cap, disp_shell, Snr};
use crate::shell::{fill_composite_shell, fill_shell, sample_composite_shell};

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Early-decoding step at user 2: user 1's message from the first `n2`
/// symbols, with user 2's own Gaussian codeword as interference.
pub fn verify_sic1_density(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let s = &cfg.scenario;
    let (p1, _) = s.individual_powers()?;
    let gains = EffectiveGains::for_scenario(s, &cfg.ed)?;
    let snr = gains.g2 * p1;
    let n2 = s.n2() as usize;
    let interference = (s.h2() * gains.p_bar2).sqrt();
    let scale = (1.0 + s.h2() * gains.p_bar2).sqrt();
    let gain = gains.g2.sqrt();
    let ref_var = 1.0 + snr;
    let offset = 0.5 * n2 as f64 * ref_var.ln();
    let (target_mean, target_var) = {
        let x = Snr::new(snr)?;
        (cap(x), disp_shell(x) / n2 as f64)
    };

    let m = run_moments(cfg.trials, cfg.seed, target_mean, |rng| {
        let mut x1 = vec![0.0; n2];
        fill_shell(&mut x1, p1, rng);
        let mut acc = 0.0;
        for &xi in &x1 {
            let noise = (interference * normal(rng) + normal(rng)) / scale;
            let y = gain * xi + noise;
            acc += y * y / ref_var - noise * noise;
        }
        (0.5 * acc + offset) * LOG2_E / n2 as f64
    });
    let mut r = moment_report("sic1_density", cfg, &m, target_mean, target_var);
    r.details.insert("snr".into(), snr);
    r.details.insert("n2".into(), n2 as f64);
    Ok(r)
}

/// User 1 decoding its composite shell codeword over `n1` symbols while
/// user 2's codeword occupies the first `n2`.
pub fn verify_rx1_density(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let s = &cfg.scenario;
    let (p1, _) = s.individual_powers()?;
    let gains = EffectiveGains::for_scenario(s, &cfg.ed)?;
    let (n1, n2) = (s.n1() as usize, s.n2() as usize);
    let h1 = s.h1();
    let interference = (h1 * gains.p_bar2).sqrt();
    let amp = h1.sqrt();
    let noisy = 1.0 + h1 * gains.p_bar2;
    let segments = [(noisy, h1 * p1 + noisy), (1.0, h1 * p1 + 1.0)];
    let offset = 0.5 * (n2 as f64 * (segments[0].1 / segments[0].0).ln() + (n1 - n2) as f64 * segments[1].1.ln());
    let (c_bar, v_bar) = user1_moments(s, &gains)?;
    let target_var = v_bar / n1 as f64;

    let m = run_moments(cfg.trials, cfg.seed, c_bar, |rng| {
        let mut x1 = vec![0.0; n1];
        fill_composite_shell(&mut x1, n2, p1, rng);
        let mut acc = 0.0;
        for (i, &xi) in x1.iter().enumerate() {
            let (var, ref_var) = if i < n2 { segments[0] } else { segments[1] };
            let noise = if i < n2 {
                interference * normal(rng) + normal(rng)
            } else {
                normal(rng)
            };
            let y = amp * xi + noise;
            acc += y * y / ref_var - noise * noise / var;
        }
        (0.5 * acc + offset) * LOG2_E / n1 as f64
    });
    let mut r = moment_report("rx1_density", cfg, &m, c_bar, target_var);
    r.details.insert("c_bar1".into(), c_bar);
    r.details.insert("v_bar1".into(), v_bar);
    Ok(r)
}

/// The fixed input of the cooperative-receiver check.
#[derive(Debug, Clone, PartialEq)]
pub enum CoopInput {
    /// A composite shell codeword drawn once from this seed.
    CompositeShell { seed: u64 },
    /// A given input with `‖x‖² = n1·P`.
    Given(Vec<f64>),
}

/// Cooperative receiver observing `Y1^{n1}` and `Y2^{n2}` over noise of
/// correlation `ρ`, with the input held fixed across trials.
pub fn verify_coop_density(cfg: &McConfig, rho: f64, input: &CoopInput) -> Result<McReport> {
    cfg.validate()?;
    check_rho(rho)?;
    let s = &cfg.scenario;
    let power = s.sum_power_value()?;
    let (n1, n2) = (s.n1() as usize, s.n2() as usize);
    let x = match input {
        CoopInput::CompositeShell { seed } => sample_composite_shell(n1, n2, power, *seed)?.symbols,
        CoopInput::Given(x) => {
            if x.len() != n1 {
                return Err(Error::invalid(
                    "input",
                    format!("length must be n1 = {n1}, got {}", x.len()),
                ));
            }
            let energy: f64 = x.iter().map(|v| v * v).sum();
            let want = n1 as f64 * power;
            if ((energy - want) / want).abs() > 1e-9 {
                return Err(Error::invalid(
                    "input",
                    format!("energy must equal n1·P = {want}, got {energy}"),
                ));
            }
            x.clone()
        }
    };
    let s_ii: f64 = x[n2..].iter().map(|v| v * v).sum();
    let rq = rho_quantities(s, rho)?;
    let target_mean = rq.c_rho1 + rq.c_rho2 * s_ii / n1 as f64;
    let target_var = rq.v_rho1 / n1 as f64 + rq.v_rho2 * s_ii / (n1 as f64 * n1 as f64);

    let (h1, h2) = (s.h1(), s.h2());
    let (a1, a2) = (h1.sqrt(), h2.sqrt());
    let hr = h_rho(h1, h2, rho);
    let one_m_rho2 = 1.0 - rho * rho;
    let chol = one_m_rho2.sqrt();
    let joint_ref = power / (1.0 + power * hr);
    let single_ref = 1.0 + h1 * power;
    let offset = 0.5 * (n2 as f64 * (1.0 + power * hr).ln() + (n1 - n2) as f64 * single_ref.ln());

    let m = run_moments(cfg.trials, cfg.seed, target_mean, |rng| {
        let mut acc = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            let w1 = normal(rng);
            if i < n2 {
                let w2 = normal(rng);
                let y1 = a1 * xi + w1;
                let y2 = a2 * xi + rho * w1 + chol * w2;
                let quad = (y1 * y1 - 2.0 * rho * y1 * y2 + y2 * y2) / one_m_rho2;
                let u = (a1 * y1 + a2 * y2 - rho * (a1 * y2 + a2 * y1)) / one_m_rho2;
                acc += quad - joint_ref * u * u - (w1 * w1 + w2 * w2);
            } else {
                let y1 = a1 * xi + w1;
                acc += y1 * y1 / single_ref - w1 * w1;
            }
        }
        (0.5 * acc + offset) * LOG2_E / n1 as f64
    });
    let mut r = moment_report("coop_density", cfg, &m, target_mean, target_var);
    r.details.insert("rho".into(), rho);
    r.details.insert("h_rho".into(), hr);
    r.details.insert("energy_tail".into(), s_ii);
    Ok(r)
}
