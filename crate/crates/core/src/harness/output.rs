use std::path::Path;

use super::{SummaryRow, SweepRecord};
use crate::error::Result;

pub const RECORD_COLUMNS: [&str; 11] = [
    "strategy",
    "sweep_value",
    "trial",
    "seed",
    "r1_bps",
    "r2_bps",
    "rsum_bps",
    "feasible",
    "iterations",
    "eig_ratio",
    "wall_time_s",
];

pub const SUMMARY_COLUMNS: [&str; 9] = [
    "strategy",
    "sweep_value",
    "trials",
    "feasible",
    "feasibility",
    "mean_r1_bps",
    "mean_r2_bps",
    "mean_rsum_bps",
    "failures",
];

/// Shortest rendering of `x` rounded to 12 significant digits: plain decimal
/// for moderate exponents, scientific otherwise.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, sci.parse::<f64>().expect("round trip")))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn record_row(r: &SweepRecord) -> [String; 11] {
    [
        r.strategy.name().to_string(),
        format_float(r.sweep_value),
        r.trial.to_string(),
        r.seed.to_string(),
        format_float(r.r1),
        format_float(r.r2),
        format_float(r.rsum),
        r.feasible.to_string(),
        r.iterations.to_string(),
        format_float(r.eig_ratio),
        format_float(r.wall_time_s),
    ]
}

fn summary_row(s: &SummaryRow) -> [String; 9] {
    [
        s.strategy.name().to_string(),
        format_float(s.sweep_value),
        s.trials.to_string(),
        s.feasible.to_string(),
        format_float(s.feasibility),
        format_float(s.mean_r1),
        format_float(s.mean_r2),
        format_float(s.mean_rsum),
        s.failures.to_string(),
    ]
}

fn to_csv<const N: usize>(header: [&str; N], rows: impl Iterator<Item = [String; N]>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
}

pub fn records_to_csv(records: &[SweepRecord]) -> Result<String> {
    to_csv(RECORD_COLUMNS, records.iter().map(record_row))
}

pub fn summary_to_csv(summary: &[SummaryRow]) -> Result<String> {
    to_csv(SUMMARY_COLUMNS, summary.iter().map(summary_row))
}

pub fn write_records(path: &Path, records: &[SweepRecord]) -> Result<()> {
    std::fs::write(path, records_to_csv(records)?)?;
    Ok(())
}

pub fn write_summary(path: &Path, summary: &[SummaryRow]) -> Result<()> {
    std::fs::write(path, summary_to_csv(summary)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.1 + 0.2), "0.3");
        assert_eq!(format_float(26_501_300.123456789), "26501300.1235");
        assert_eq!(format_float(-2.5e-7), "-2.5e-7");
        assert_eq!(format_float(1.234567890123456e20), "1.23456789012e20");
        assert_eq!(format_float(1e-5), "0.00001");
        assert_eq!(format_float(f64::NAN), "NaN");
        assert_eq!(format_float(0.0), "0");
    }

    #[test]
    fn rendering_round_trips_to_twelve_digits() {
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 123456.789e3, 9.999999999999e-3] {
            let y: f64 = format_float(x).parse().unwrap();
            assert!(((y - x) / x).abs() < 5e-12, "{x} -> {y}");
        }
    }
}
