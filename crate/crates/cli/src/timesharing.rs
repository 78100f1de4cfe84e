//! Finite-blocklength time-sharing curves.

use hbgbc_core::timesharing::{alpha_grid, low_confidence, single_user_endpoints, ts_normalized};
use hbgbc_core::{ts_region, Order, Probability};

use crate::config::ScenarioFile;
use crate::error::Result;
use crate::format::{render_csv, CurveRecord};
use crate::output::{render_svg, write_atomic};
use crate::run::{Overrides, Written};
use crate::sweep::plot_series;

/// One series per blocklength plus the first-order chord, each point
/// tagged with its `α` and whether a sub-block is too short to trust.
pub fn timesharing_records(file: &ScenarioFile) -> Result<Vec<CurveRecord>> {
    let s = file.channel.scenario()?;
    let ts = &file.timesharing;
    let power = s.sum_power_value()?;
    let (a, b) = single_user_endpoints(s.h1(), s.h2(), power, Probability::new(s.eps())?)?;
    let grid = alpha_grid(ts.alpha_step)?;
    let (xn, yn) = if ts.normalize {
        ("r1_normalized", "r2_normalized")
    } else {
        ("r1_bits_per_symbol", "r2_bits_per_symbol")
    };
    let record = |series: String, x: f64, y: f64, order: Order, alpha: f64, low: bool| CurveRecord {
        scenario: file.scenario.clone(),
        series,
        x_name: xn.to_string(),
        x,
        y_name: yn.to_string(),
        y,
        order: order.as_str().to_string(),
        confidence: Some((alpha, low)),
    };

    let mut out = Vec::new();
    for &n in &ts.blocklengths {
        let nf = n as f64;
        let curve = if ts.normalize {
            ts_normalized(&a, &b, nf, &grid)?
        } else {
            ts_region(&a, &b, nf, &grid)?
        };
        for (pt, &alpha) in curve.iter().zip(&grid) {
            out.push(record(
                format!("n={n}"),
                pt.r1,
                pt.r2,
                Order::SecondOrder,
                alpha,
                low_confidence(alpha, nf),
            ));
        }
    }
    for &alpha in &grid {
        let (r1, r2) = (
            alpha * a.fo1 + (1.0 - alpha) * b.fo1,
            alpha * a.fo2 + (1.0 - alpha) * b.fo2,
        );
        let (x, y) = if ts.normalize {
            (r1 / a.fo1, r2 / b.fo2)
        } else {
            (r1, r2)
        };
        out.push(record("asymptotic".to_string(), x, y, Order::FirstOrder, alpha, false));
    }
    Ok(out)
}

pub fn run_timesharing(file: &ScenarioFile, ov: &Overrides) -> Result<Written> {
    let records = timesharing_records(file)?;
    let csv = ov.csv_path(file, "-ts");
    let svg = ov.svg_path(file, &csv);
    let svg_text = match &svg {
        Some(_) => Some(render_svg(
            &file.scenario,
            &records[0].x_name,
            &records[0].y_name,
            &plot_series(&records),
        )?),
        None => None,
    };
    write_atomic(&csv, render_csv(&records).as_bytes())?;
    if let (Some(p), Some(t)) = (&svg, svg_text) {
        write_atomic(p, t.as_bytes())?;
    }
    Ok(Written { csv, svg })
}
