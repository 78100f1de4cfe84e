//! Early-decoding latency sweeps.

use std::fmt::Write;

use hbgbc_core::{ed_latency_row, EdLatencyRow};

use crate::config::{ScenarioFile, SweepVar};
use crate::error::{CliError, Result};
use crate::format::fmt_sig;
use crate::output::{render_svg, write_atomic, Series};
use crate::run::{Overrides, Written};

pub const ED_HEADER: &str = "n1,log_m1_bits,n2_shell,n2_asymptotic,eps_sic1_opt";

/// One row per `n1`. User 1 sends at its achievable size for that `n1`.
pub fn ed_latency_rows(file: &ScenarioFile) -> Result<Vec<EdLatencyRow>> {
    if file.sweep_variable() != SweepVar::N1 {
        return Err(CliError::Config {
            field: "sweep.variable".into(),
            constraint: "early-decoding latency sweeps n1".into(),
        });
    }
    let budgets = file.channel.budgets()?;
    let search = file.ed.search();
    file.sweep_values()?
        .into_iter()
        .map(|x| Ok(ed_latency_row(&file.scenario_at(x)?, budgets, &search)?))
        .collect()
}

pub fn render_ed_csv(rows: &[EdLatencyRow]) -> String {
    let mut out = format!("{ED_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.n1,
            fmt_sig(r.log_m1_bits),
            r.n2_shell,
            r.n2_asymptotic,
            fmt_sig(r.eps_sic1_opt)
        )
        .unwrap();
    }
    out
}

pub fn run_ed_latency(file: &ScenarioFile, ov: &Overrides) -> Result<Written> {
    let rows = ed_latency_rows(file)?;
    let csv = ov.csv_path(file, "-ed");
    let svg = ov.svg_path(file, &csv);
    let svg_text = match &svg {
        Some(_) => {
            let curve = |name: &str, f: fn(&EdLatencyRow) -> u64| Series {
                name: name.to_string(),
                points: rows.iter().map(|r| (r.log_m1_bits, f(r) as f64)).collect(),
            };
            Some(render_svg(
                &file.scenario,
                "log M1 (bits)",
                "n2",
                &[
                    curve("n2_shell", |r| r.n2_shell),
                    curve("n2_asymptotic", |r| r.n2_asymptotic),
                ],
            )?)
        }
        None => None,
    };
    write_atomic(&csv, render_ed_csv(&rows).as_bytes())?;
    if let (Some(p), Some(t)) = (&svg, svg_text) {
        write_atomic(p, t.as_bytes())?;
    }
    Ok(Written { csv, svg })
}
