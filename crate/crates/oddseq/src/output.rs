//! Output metadata, CSV/JSON tables and JSON-lines dumps.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

/// Current time, or `SOURCE_DATE_EPOCH` when it is set, so reruns can be
/// byte-identical.
pub fn now() -> DateTime<Utc> {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|t| DateTime::from_timestamp(t, 0))
        .unwrap_or_else(Utc::now)
}

fn stamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Embedded in every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command_line: String,
    pub seed: Option<u64>,
    pub started: String,
    pub finished: String,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl Metadata {
    pub fn start(args: &[String], seed: Option<u64>) -> Self {
        let mut line = vec![env!("CARGO_PKG_NAME").to_string()];
        line.extend(args.iter().skip(1).map(|a| quote_arg(a)));
        let t = stamp(now());
        Metadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command_line: line.join(" "),
            seed,
            started: t.clone(),
            finished: t,
            extra: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.extra.insert(key.to_string(), value.into());
    }

    pub fn finish(&mut self) {
        self.finished = stamp(now());
    }

    fn comment_lines(&self) -> Result<Vec<String>> {
        let v = serde_json::to_value(self)?;
        let mut out = Vec::new();
        if let Value::Object(map) = v {
            for (k, v) in map {
                out.push(format!("# {k}: {}", serde_json::to_string(&v)?));
            }
        }
        Ok(out)
    }
}

fn quote_arg(a: &str) -> String {
    if !a.is_empty() && a.chars().all(|c| c.is_ascii_alphanumeric() || "-_.,/=:+".contains(c)) {
        a.to_string()
    } else {
        format!("'{}'", a.replace('\'', r"'\''"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A rectangular table of already formatted cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Stdout or a file.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// CSV with `#` metadata lines ahead of the header, or one JSON document.
pub fn write_table(out: &mut dyn Write, meta: &Metadata, table: &Table, format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            for l in meta.comment_lines()? {
                writeln!(out, "{l}")?;
            }
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(&table.columns)?;
            for r in &table.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<BTreeMap<&str, &str>> = table
                .rows
                .iter()
                .map(|r| table.columns.iter().map(String::as_str).zip(r.iter().map(String::as_str)).collect())
                .collect();
            let doc = serde_json::json!({ "metadata": meta, "columns": table.columns, "rows": rows });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Single pretty-printed JSON document with a `metadata` key.
pub fn write_report<T: Serialize>(out: &mut dyn Write, meta: &Metadata, report: &T) -> Result<()> {
    let mut v = serde_json::to_value(report)?;
    if let Value::Object(map) = &mut v {
        map.insert("metadata".into(), serde_json::to_value(meta)?);
    }
    serde_json::to_writer_pretty(&mut *out, &v)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Decimal scientific notation for `exp(ln_x)`, valid far beyond `f64` range.
pub fn format_exp(ln_x: f64) -> String {
    if !ln_x.is_finite() {
        return if ln_x == f64::NEG_INFINITY { "0".into() } else { "nan".into() };
    }
    let l10 = ln_x / std::f64::consts::LN_10;
    let mut e = l10.floor();
    let mut mant = 10f64.powf(l10 - e);
    if mant >= 9.999_999_999_999_5 {
        mant /= 10.0;
        e += 1.0;
    }
    format!("{mant:.12}e{e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_formatting() {
        assert_eq!(format_exp(0.0), "1.000000000000e0");
        assert_eq!(format_exp(1000f64.ln()), "1.000000000000e3");
        assert_eq!(format_exp(-2f64.ln()), "5.000000000000e-1");
        assert!(format_exp(5000.0).ends_with("e2171"));
    }

    #[test]
    fn arguments_are_quoted_when_needed() {
        assert_eq!(quote_arg("--n-max"), "--n-max");
        assert_eq!(quote_arg("a b"), "'a b'");
        assert_eq!(quote_arg("it's"), r"'it'\''s'");
    }
}
