//! CSV and JSON tables with a fixed column order.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(Error::Config(format!("format must be json or csv, got '{s}'"))),
        }
    }
}

/// A record type with a documented column order (its field order).
pub trait Row: Serialize + DeserializeOwned {
    const COLUMNS: &'static [&'static str];
}

/// Rows as text. CSV floats use the shortest representation that parses back
/// to the same value; JSON is an array with one object per line.
pub fn render<R: Row>(rows: &[R], format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record(R::COLUMNS).map_err(csv_err)?;
            for r in rows {
                w.serialize(r).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
        }
        Format::Json => {
            let mut out = String::from("[");
            for (i, r) in rows.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                out.push_str(&serde_json::to_string(r)?);
            }
            out.push_str("\n]\n");
            Ok(out)
        }
    }
}

/// Inverse of [`render`].
pub fn parse<R: Row>(text: &str, format: Format) -> Result<Vec<R>> {
    match format {
        Format::Csv => {
            let mut rd = csv::Reader::from_reader(text.as_bytes());
            let header = rd.headers().map_err(csv_err)?.clone();
            if !header.iter().eq(R::COLUMNS.iter().copied()) {
                return Err(Error::Config(format!("unexpected CSV header {header:?}")));
            }
            rd.deserialize().map(|r| r.map_err(csv_err)).collect()
        }
        Format::Json => Ok(serde_json::from_str(text)?),
    }
}

/// Write rows to `path`.
pub fn export<R: Row>(rows: &[R], format: Format, path: &Path) -> Result<()> {
    fs::write(path, render(rows, format)?)?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// Serde adapter writing `None` as the string "n/a".
pub mod na {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_str("n/a"),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Cell {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
        match Cell::deserialize(d)? {
            Cell::Num(x) => Ok(Some(x)),
            Cell::Text(t) if t == "n/a" => Ok(None),
            Cell::Text(t) => t
                .parse()
                .map(Some)
                .map_err(|_| serde::de::Error::custom(format!("expected a number or n/a, got '{t}'"))),
        }
    }
}

/// Serde adapter writing `None` as "n/a" for text cells.
pub mod na_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<String>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(v.as_deref().unwrap_or("n/a"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
        let t = String::deserialize(d)?;
        Ok(if t == "n/a" { None } else { Some(t) })
    }
}
