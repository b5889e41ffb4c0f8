//! Table and manifest emission.
//!
//! Numbers are written with 12 significant digits (`{:.11e}`) so regression
//! diffs stay meaningful; non-finite values print as `inf` / `nan`.

use std::path::Path;

use anyhow::{Context, Result};
use fockfisher::{SweepRow, SweepTable};
use serde::Serialize;

pub const HEADER: [&str; 15] = [
    "label", "N", "n", "delta_part", "Delta", "eta_a", "eta_b", "Upsilon", "Sigma2", "FC_pp", "FC_dd",
    "FQ_pp", "FQ_dd", "HCR", "flags",
];
pub const CUTOFF_COLUMN: &str = "Delta_cutoff";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err("expected `csv` or `json`".into()),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn record(row: &SweepRow, with_cutoff: bool) -> Vec<String> {
    let mut r = vec![
        row.label.clone(),
        row.photons.to_string(),
        opt(row.n),
        opt(row.partition),
        num(row.delta),
        num(row.eta_a),
        num(row.eta_b),
        num(row.upsilon),
        num(row.sigma2),
        num(row.fc_pp),
        num(row.fc_dd),
        num(row.fq_pp),
        num(row.fq_dd),
        num(row.hcr),
        row.flags.join(";"),
    ];
    if with_cutoff {
        r.push(row.delta_cutoff.map(num).unwrap_or_default());
    }
    r
}

pub fn write_csv<W: std::io::Write>(out: W, rows: &[SweepRow], with_cutoff: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = HEADER.to_vec();
    if with_cutoff {
        header.push(CUTOFF_COLUMN);
    }
    w.write_record(&header)?;
    for row in rows {
        w.write_record(record(row, with_cutoff))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonTable<'a, C: Serialize> {
    name: &'a str,
    parameter_order: [&'a str; 2],
    config: &'a C,
    rows: &'a [SweepRow],
}

/// Writes `table` to `path`. JSON tables embed the config; CSV tables keep a
/// single header line and point to the manifest instead.
pub fn write_table<C: Serialize>(path: &Path, table: &SweepTable, rows: &[SweepRow], format: Format, with_cutoff: bool, config: &C) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let out = std::io::BufWriter::new(file);
    match format {
        Format::Csv => write_csv(out, rows, with_cutoff),
        Format::Json => {
            let doc = JsonTable {
                name: &table.name,
                parameter_order: fockfisher::PARAMETER_ORDER,
                config,
                rows,
            };
            serde_json::to_writer_pretty(out, &doc)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(1.380082497046856), "1.38008249705e0");
        assert_eq!(num(0.0), "0.00000000000e0");
        assert_eq!(num(-2.5e-300), "-2.50000000000e-300");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(f64::NAN), "nan");
    }

    #[test]
    fn csv_quotes_labels_with_commas() {
        let row = SweepRow {
            label: "ghb(0,6)".into(),
            photons: 6,
            n: Some(0),
            partition: Some(6),
            delta: 5.0,
            eta_a: 1.0,
            eta_b: 1.0,
            upsilon: 1.38,
            sigma2: 2.0,
            fc_pp: 1.0,
            fc_dd: 1.0,
            fq_pp: 1.0,
            fq_dd: 1.0,
            hcr: 2.0,
            flags: vec![],
            delta_cutoff: Some(2.5),
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row], true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), format!("{},{CUTOFF_COLUMN}", HEADER.join(",")));
        assert!(lines.next().unwrap().starts_with("\"ghb(0,6)\",6,0,6,5.00000000000e0,"));
    }
}
