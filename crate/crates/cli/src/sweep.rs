//! Outer-bound sweeps: sum-rate curves and rate-region boundaries.

use hbgbc_core::{rho_star, sato_het, sato_hom, sato_rho, single_user_bound, ChannelScenario, Order, RateBound, User};

use crate::config::{Family, ScenarioFile, SweepMode};
use crate::error::Result;
use crate::format::{fmt_sig, render_csv, CurveRecord};
use crate::output::{render_svg, write_atomic, Series};
use crate::run::{Overrides, Written};

fn family_name(f: Family) -> &'static str {
    match f {
        Family::SatoHet => "sato_het",
        Family::SatoHom => "sato_hom",
        Family::SatoRho => "sato_rho",
        Family::SingleUser => "single_user",
    }
}

fn bound(file: &ScenarioFile, s: &ChannelScenario, f: Family, order: Order) -> Result<Option<RateBound>> {
    let rho = file.bounds.rho.unwrap_or_else(|| rho_star(s.h1(), s.h2()));
    Ok(match f {
        Family::SatoHet => Some(sato_het(s, order)?),
        Family::SatoHom => Some(sato_hom(s, order)?),
        Family::SatoRho => Some(sato_rho(s, rho, order)?),
        Family::SingleUser => None,
    })
}

/// Rows of a sum-rate sweep, series by series. Every series appears twice:
/// in bits per symbol of the longer block (`/n1`) and in bits (`:bits`).
pub fn sum_rate_records(file: &ScenarioFile, order: Order) -> Result<Vec<CurveRecord>> {
    let var = file.sweep_variable().as_str();
    let xs = file.sweep_values()?;
    let scenarios: Vec<_> = xs.iter().map(|&x| file.scenario_at(x)).collect::<Result<_>>()?;

    let mut columns: Vec<(String, &'static str, Vec<f64>)> = Vec::new();
    for &f in &file.bounds.families {
        if f == Family::SingleUser {
            for (user, name) in [(User::One, "single_user_1"), (User::Two, "single_user_2")] {
                let ys = scenarios
                    .iter()
                    .map(|s| Ok(single_user_bound(s, user, order)?))
                    .collect::<Result<_>>()?;
                columns.push((name.to_string(), "log_m", ys));
            }
        } else {
            let ys = scenarios
                .iter()
                .map(|s| Ok(bound(file, s, f, order)?.expect("sum-rate family").sum_bits_max))
                .collect::<Result<_>>()?;
            columns.push((family_name(f).to_string(), "sum", ys));
        }
    }

    let mut out = Vec::new();
    for (name, kind, ys) in &columns {
        for per_symbol in [true, false] {
            for ((x, y), s) in xs.iter().zip(ys).zip(&scenarios) {
                let (series, y_name, y) = if per_symbol {
                    (name.clone(), format!("{kind}_bits_per_symbol"), y / s.n1() as f64)
                } else {
                    (format!("{name}:bits"), format!("{kind}_bits"), *y)
                };
                out.push(CurveRecord {
                    scenario: file.scenario.clone(),
                    series,
                    x_name: var.to_string(),
                    x: *x,
                    y_name,
                    y,
                    order: order.as_str().to_string(),
                    confidence: None,
                });
            }
        }
    }
    Ok(out)
}

/// Outer corner points of `{0 ≤ R1 ≤ a, 0 ≤ R2 ≤ b, R1 + R2 ≤ s}`, from the
/// `R2` axis to the `R1` axis.
pub fn region_corners(a: f64, b: f64, s: f64) -> Vec<(f64, f64)> {
    let (a, b, s) = (a.max(0.0), b.max(0.0), s.max(0.0));
    let top = b.min(s);
    let right = a.min(s);
    let mut pts = vec![
        (0.0, top),
        ((s - b).clamp(0.0, right), top),
        (right, (s - a).clamp(0.0, top)),
        (right, 0.0),
    ];
    pts.dedup();
    pts
}

/// Rate-region boundaries, one series per family and sweep point.
pub fn region_records(file: &ScenarioFile, order: Order) -> Result<Vec<CurveRecord>> {
    let var = file.sweep_variable().as_str();
    let xs = file.sweep_values()?;
    let mut out = Vec::new();
    for &x in &xs {
        let s = file.scenario_at(x)?;
        let a = single_user_bound(&s, User::One, order)?;
        let b = single_user_bound(&s, User::Two, order)?;
        let n1 = s.n1() as f64;
        let tag = if xs.len() > 1 {
            format!("@{var}={}", fmt_sig(x))
        } else {
            String::new()
        };
        for &f in &file.bounds.families {
            let corners = match bound(file, &s, f, order)? {
                Some(r) => region_corners(a, b, r.sum_bits_max),
                None => region_corners(a, b, a.max(0.0) + b.max(0.0)),
            };
            for per_symbol in [true, false] {
                let (series, scale, xn, yn) = if per_symbol {
                    (
                        format!("{}{tag}", family_name(f)),
                        1.0 / n1,
                        "r1_bits_per_symbol",
                        "r2_bits_per_symbol",
                    )
                } else {
                    (
                        format!("{}{tag}:bits", family_name(f)),
                        1.0,
                        "log_m1_bits",
                        "log_m2_bits",
                    )
                };
                for &(r1, r2) in &corners {
                    out.push(CurveRecord {
                        scenario: file.scenario.clone(),
                        series: series.clone(),
                        x_name: xn.to_string(),
                        x: r1 * scale,
                        y_name: yn.to_string(),
                        y: r2 * scale,
                        order: order.as_str().to_string(),
                        confidence: None,
                    });
                }
            }
        }
    }
    Ok(out)
}

pub fn sweep_records(file: &ScenarioFile, order: Order) -> Result<Vec<CurveRecord>> {
    match file.bounds.mode {
        SweepMode::SumRate => sum_rate_records(file, order),
        SweepMode::Region => region_records(file, order),
    }
}

/// Groups the per-symbol series of `records` for plotting.
pub(crate) fn plot_series(records: &[CurveRecord]) -> Vec<Series> {
    let mut series: Vec<Series> = Vec::new();
    for r in records.iter().filter(|r| !r.series.ends_with(":bits")) {
        match series.iter_mut().find(|s| s.name == r.series) {
            Some(s) => s.points.push((r.x, r.y)),
            None => series.push(Series {
                name: r.series.clone(),
                points: vec![(r.x, r.y)],
            }),
        }
    }
    series
}

/// Evaluates the requested bound families at every sweep point and writes
/// the CSV (and optionally an SVG).
pub fn run_sweep(file: &ScenarioFile, ov: &Overrides) -> Result<Written> {
    let records = sweep_records(file, ov.order(file))?;
    let csv = ov.csv_path(file, "");
    let svg = ov.svg_path(file, &csv);
    let svg_text = match &svg {
        Some(_) => {
            let first = records.iter().find(|r| !r.series.ends_with(":bits"));
            let (xl, yl) = first.map_or(("x", "y"), |r| (r.x_name.as_str(), r.y_name.as_str()));
            Some(render_svg(&file.scenario, xl, yl, &plot_series(&records))?)
        }
        None => None,
    };
    write_atomic(&csv, render_csv(&records).as_bytes())?;
    if let (Some(p), Some(t)) = (&svg, svg_text) {
        write_atomic(p, t.as_bytes())?;
    }
    Ok(Written { csv, svg })
}
