//! Locale-free number formatting and the curve CSV schema.

use std::fmt::Write;

/// Twelve significant digits, `%.12g` style: fixed notation for exponents in
/// `[-4, 12)`, scientific otherwise, trailing zeros dropped.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let s = format!("{:.*}", (11 - exp) as usize, x);
        trim_zeros(&s).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One point of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRecord {
    pub scenario: String,
    pub series: String,
    pub x_name: String,
    pub x: f64,
    pub y_name: String,
    pub y: f64,
    pub order: String,
    /// `(α, low-confidence flag)` on time-sharing curves.
    pub confidence: Option<(f64, bool)>,
}

pub const CURVE_HEADER: &str = "scenario,series,x_name,x,y_name,y,order";
pub const TS_HEADER: &str = "scenario,series,x_name,x,y_name,y,order,alpha,confidence";

/// Renders records as CSV. The time-sharing columns are added when any
/// record carries them.
pub fn render_csv(records: &[CurveRecord]) -> String {
    let annotated = records.iter().any(|r| r.confidence.is_some());
    let mut out = String::new();
    out.push_str(if annotated { TS_HEADER } else { CURVE_HEADER });
    out.push('\n');
    for r in records {
        write!(
            out,
            "{},{},{},{},{},{},{}",
            r.scenario,
            r.series,
            r.x_name,
            fmt_sig(r.x),
            r.y_name,
            fmt_sig(r.y),
            r.order
        )
        .unwrap();
        if annotated {
            match r.confidence {
                Some((alpha, low)) => write!(out, ",{},{}", fmt_sig(alpha), if low { "low" } else { "ok" }).unwrap(),
                None => out.push_str(",,"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(128.0), "128");
        assert_eq!(fmt_sig(0.1), "0.1");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(2.0 / 3.0 * 1e3), "666.666666667");
        assert_eq!(fmt_sig(2e-6), "2e-06");
        assert_eq!(fmt_sig(1.234e-5), "1.234e-05");
        assert_eq!(fmt_sig(123456789012.0), "123456789012");
        assert_eq!(fmt_sig(1234567890123.0), "1.23456789012e+12");
        assert_eq!(fmt_sig(999999999999.5), "1e+12");
        assert_eq!(fmt_sig(0.0001), "0.0001");
    }

    #[test]
    fn csv_layout() {
        let r = CurveRecord {
            scenario: "s".into(),
            series: "a".into(),
            x_name: "n1".into(),
            x: 128.0,
            y_name: "y".into(),
            y: 0.5,
            order: "halflogn".into(),
            confidence: None,
        };
        assert_eq!(
            render_csv(std::slice::from_ref(&r)),
            format!("{CURVE_HEADER}\ns,a,n1,128,y,0.5,halflogn\n")
        );
        let t = CurveRecord {
            confidence: Some((0.25, true)),
            ..r.clone()
        };
        assert_eq!(
            render_csv(&[r, t]),
            format!("{TS_HEADER}\ns,a,n1,128,y,0.5,halflogn,,\ns,a,n1,128,y,0.5,halflogn,0.25,low\n")
        );
    }
}
