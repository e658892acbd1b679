//! CSV and JSON encodings of scan results.
//!
//! CSV rows are radius-major and every float is written with 17 significant
//! digits, which is enough for an exact `f64` round trip.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scan::{AnalyticRecord, ScanRecord, ScanResult};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "r_idx,phi_idx,beta_re,beta_im,p_est,p_se,p_exact,p_eq3";
pub const ANALYTIC_CSV_HEADER: &str = "r_idx,phi_idx,beta_re,beta_im,p_eq3";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidParameter(format!("unknown format '{other}'"))),
        }
    }
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_records_csv<W: Write>(records: &[ScanRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.r_idx,
            r.phi_idx,
            sci(r.beta_re),
            sci(r.beta_im),
            sci(r.p_est),
            sci(r.p_se),
            sci(r.p_exact),
            sci(r.p_eq3)
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `result` in the requested format. Records are emitted sorted by
/// `(r_idx, phi_idx)`.
pub fn serialize_scan<W: Write>(result: &ScanResult, format: Format, mut out: W) -> Result<()> {
    let mut sorted;
    let result = if result
        .records
        .windows(2)
        .all(|w| (w[0].r_idx, w[0].phi_idx) < (w[1].r_idx, w[1].phi_idx))
    {
        result
    } else {
        sorted = result.clone();
        sorted.records.sort_by_key(|r| (r.r_idx, r.phi_idx));
        &sorted
    };
    match format {
        Format::Csv => write_records_csv(&result.records, out),
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, result)?;
            writeln!(out)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn scan_to_string(result: &ScanResult, format: Format) -> Result<String> {
    let mut buf = Vec::new();
    serialize_scan(result, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("serializers emit UTF-8"))
}

fn field<T: FromStr>(line: usize, name: &str, raw: Option<&str>) -> Result<T> {
    let raw = raw.ok_or_else(|| Error::Parse(format!("line {line}: missing field {name}")))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad value '{raw}' for {name}")))
}

/// Parses the CSV produced by [`write_records_csv`]; counts are not part of
/// the CSV and come back as `None`.
pub fn parse_csv(text: &str) -> Result<Vec<ScanRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == CSV_HEADER => {}
        other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 2;
        let mut it = line.split(',');
        let rec = ScanRecord {
            r_idx: field(line_no, "r_idx", it.next())?,
            phi_idx: field(line_no, "phi_idx", it.next())?,
            beta_re: field(line_no, "beta_re", it.next())?,
            beta_im: field(line_no, "beta_im", it.next())?,
            p_est: field(line_no, "p_est", it.next())?,
            p_se: field(line_no, "p_se", it.next())?,
            p_exact: field(line_no, "p_exact", it.next())?,
            p_eq3: field(line_no, "p_eq3", it.next())?,
            counts: None,
        };
        if it.next().is_some() {
            return Err(Error::Parse(format!("line {line_no}: too many fields")));
        }
        records.push(rec);
    }
    Ok(records)
}

pub fn parse_json(text: &str) -> Result<ScanResult> {
    Ok(serde_json::from_str(text)?)
}

/// Reads records from either encoding, sniffing JSON by its leading brace.
pub fn parse_records(text: &str) -> Result<Vec<ScanRecord>> {
    if text.trim_start().starts_with('{') {
        Ok(parse_json(text)?.records)
    } else {
        parse_csv(text)
    }
}

pub fn write_analytic<W: Write>(records: &[AnalyticRecord], format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{ANALYTIC_CSV_HEADER}")?;
            for r in records {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.r_idx,
                    r.phi_idx,
                    sci(r.beta_re),
                    sci(r.beta_im),
                    sci(r.p_eq3)
                )?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::CountingConfig;
    use crate::quasiprob::{ChannelParams, SignalSpec};
    use crate::scan::{build_polar_grid, run_scan};

    fn small_scan() -> ScanResult {
        let grid = build_polar_grid(3, 5, 1.5).unwrap();
        let config = CountingConfig {
            intervals: 300,
            master_seed: 42,
            ..Default::default()
        };
        run_scan(&SignalSpec::coherent(0.7, 0.2), &grid, &ChannelParams::apparatus_default(), &config, 0.0).unwrap()
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let result = small_scan();
        let text = scan_to_string(&result, Format::Csv).unwrap();
        assert_eq!(text.lines().count(), 16);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        let parsed = parse_csv(&text).unwrap();
        let mut again = Vec::new();
        write_records_csv(&parsed, &mut again).unwrap();
        assert_eq!(text.as_bytes(), &again[..]);
        for (a, b) in parsed.iter().zip(&result.records) {
            assert_eq!(a.p_est.to_bits(), b.p_est.to_bits());
            assert_eq!(a.beta_im.to_bits(), b.beta_im.to_bits());
        }
    }

    #[test]
    fn json_round_trip_and_metadata() {
        let result = small_scan();
        let text = scan_to_string(&result, Format::Json).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["metadata"]["master_seed"], 42);
        assert_eq!(value["metadata"]["code_version"], env!("CARGO_PKG_VERSION"));
        assert!(value["records"][0].get("p_eq3").is_some());
        assert_eq!(parse_json(&text).unwrap(), result);
        assert_eq!(parse_records(&text).unwrap(), result.records);
    }

    #[test]
    fn unsorted_records_are_sorted_on_output() {
        let mut result = small_scan();
        let sorted = scan_to_string(&result, Format::Csv).unwrap();
        result.records.reverse();
        assert_eq!(scan_to_string(&result, Format::Csv).unwrap(), sorted);
    }

    #[test]
    fn malformed_csv() {
        assert!(parse_csv("a,b\n").is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\n1,2,3\n")).is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\n0,0,1,1,1,1,1,x\n")).is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\n0,0,1,1,1,1,1,1,1\n")).is_err());
        assert!("xml".parse::<Format>().is_err());
    }
}
