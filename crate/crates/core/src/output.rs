//! CSV serialization of time series and sweep tables.
//!
//! Numbers are written with 12 significant digits, `.` as decimal separator,
//! in the shortest of fixed or scientific notation (like C's `%.12g`).

use std::fmt::Write;

use crate::dynamics::TimeSeries;
use crate::sweep::SweepTable;

pub const SIG_DIGITS: usize = 12;

/// `%.12g`-style formatting.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= SIG_DIGITS as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn timeseries_csv(ts: &TimeSeries) -> String {
    let mut out = String::from("t_us");
    for s in &ts.labels {
        write!(out, ",P_{}", s.ket()).unwrap();
    }
    out.push_str(",epsilon,trace_drift,min_eig\n");
    for i in 0..ts.len() {
        out.push_str(&fmt_sig(ts.times[i]));
        for pops in &ts.populations {
            write!(out, ",{}", fmt_sig(pops[i])).unwrap();
        }
        writeln!(
            out,
            ",{},{},{}",
            fmt_sig(ts.epsilon[i]),
            fmt_sig(ts.trace_drift[i]),
            fmt_sig(ts.min_eigenvalue[i])
        )
        .unwrap();
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header: the axis column, then per family the ε column followed by its
/// diagnostics (Ω₃₁, selective-condition residual, steady-state residual,
/// null-space dimension, status).
pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = format!("{}_mhz", table.axis);
    for &f in &table.families {
        let tag = format!("{}={}", table.family_param, fmt_sig(f));
        for col in [
            "eps",
            "omega31_mhz",
            "selective_residual_mhz",
            "steady_residual",
            "null_dim",
            "status",
        ] {
            write!(out, ",{col}[{tag}]").unwrap();
        }
    }
    out.push('\n');
    for (x, row) in table.grid.iter().zip(&table.cells) {
        out.push_str(&fmt_sig(*x));
        for cell in row {
            let eps = match &cell.epsilon {
                Ok(e) => fmt_sig(*e),
                Err(_) => "err".to_string(),
            };
            write!(
                out,
                ",{},{},{},{},{},{}",
                eps,
                fmt_sig(cell.omega31_mhz),
                fmt_sig(cell.selective_residual),
                cell.steady_residual.map(fmt_sig).unwrap_or_default(),
                cell.null_dim.map(|n| n.to_string()).unwrap_or_default(),
                csv_field(&cell.status())
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(140.0), "140");
        assert_eq!(fmt_sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_sig(-0.992096575593), "-0.992096575593");
        assert_eq!(fmt_sig(1e-3), "0.001");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-07");
        assert_eq!(fmt_sig(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_sig(f64::NAN), "nan");
    }

    #[test]
    fn quoting_only_when_needed() {
        assert_eq!(csv_field("ok"), "ok");
        assert_eq!(csv_field("a, b"), "\"a, b\"");
    }
}
