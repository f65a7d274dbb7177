//! Daily closing prices: CSV ingestion, rise/fall binarization, tuple
//! extraction and walk series.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{check_tuple_length, is_bits, window_counts, DistError, FrequencyDistribution, Source};

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("missing column '{0}' in header")]
    MissingColumn(String),
    #[error("row {row}: cannot parse close '{value}'")]
    BadClose { row: usize, value: String },
    #[error("row {row}: close {value} is not positive")]
    NonPositiveClose { row: usize, value: f64 },
    #[error("row {row}: cannot parse date '{value}' with format '{format}'")]
    BadDate { row: usize, value: String, format: String },
    #[error("row {row}: date {date} is not after the previous row's {previous}")]
    Unsorted { row: usize, date: NaiveDate, previous: NaiveDate },
    #[error("row {row}: duplicate date {date}")]
    DuplicateDate { row: usize, date: NaiveDate },
    #[error("need at least {needed} items, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("'{0}' is not a bit string")]
    NotBits(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Column names and date format of a price CSV. Rows are numbered from 1,
/// not counting the header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub date_col: String,
    pub close_col: String,
    /// `chrono` format string, e.g. `%Y-%m-%d`.
    pub date_format: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            date_col: "Date".into(),
            close_col: "Close".into(),
            date_format: "%Y-%m-%d".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub date: NaiveDate,
    pub close: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub label: String,
    pub points: Vec<PricePoint>,
}

/// Reads a price series, streaming. Dates must be strictly increasing; gaps
/// are fine.
pub fn ingest_csv<R: Read>(input: R, schema: &CsvSchema, label: &str) -> Result<PriceSeries, MarketError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| MarketError::MissingColumn(name.to_string()))
    };
    let date_idx = find(&schema.date_col)?;
    let close_idx = find(&schema.close_col)?;
    let mut points: Vec<PricePoint> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let raw_date = rec.get(date_idx).unwrap_or("");
        let raw_close = rec.get(close_idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, &schema.date_format).map_err(|_| MarketError::BadDate {
            row,
            value: raw_date.to_string(),
            format: schema.date_format.clone(),
        })?;
        let close: f64 = raw_close.parse().map_err(|_| MarketError::BadClose {
            row,
            value: raw_close.to_string(),
        })?;
        if !close.is_finite() {
            return Err(MarketError::BadClose {
                row,
                value: raw_close.to_string(),
            });
        }
        if close <= 0.0 {
            return Err(MarketError::NonPositiveClose { row, value: close });
        }
        if let Some(prev) = points.last() {
            if date == prev.date {
                return Err(MarketError::DuplicateDate { row, date });
            }
            if date < prev.date {
                return Err(MarketError::Unsorted {
                    row,
                    date,
                    previous: prev.date,
                });
            }
        }
        points.push(PricePoint { date, close });
    }
    Ok(PriceSeries {
        label: label.to_string(),
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub label: String,
    pub first_date: Option<NaiveDate>,
    pub last_date: Option<NaiveDate>,
}

/// Rise/fall bits, as a `'0'`/`'1'` string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinarySequence {
    pub bits: String,
    pub provenance: Provenance,
}

impl BinarySequence {
    /// A sequence not derived from a price file (synthetic or pasted).
    pub fn from_bits(label: &str, bits: &str) -> Result<Self, MarketError> {
        if !is_bits(bits) {
            return Err(MarketError::NotBits(bits.to_string()));
        }
        Ok(Self {
            bits: bits.to_string(),
            provenance: Provenance {
                label: label.to_string(),
                first_date: None,
                last_date: None,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    fn as_digits(&self) -> Vec<u8> {
        self.bits.bytes().map(|b| b - b'0').collect()
    }
}

/// Bit `i` is 1 iff `close[i + 1] > close[i]`; an unchanged close is 0.
pub fn encode_directions(series: &PriceSeries) -> Result<BinarySequence, MarketError> {
    if series.points.len() < 2 {
        return Err(MarketError::InsufficientData {
            needed: 2,
            got: series.points.len(),
        });
    }
    let bits = series
        .points
        .windows(2)
        .map(|w| if w[1].close > w[0].close { '1' } else { '0' })
        .collect();
    Ok(BinarySequence {
        bits,
        provenance: Provenance {
            label: series.label.clone(),
            first_date: series.points.first().map(|p| p.date),
            last_date: series.points.last().map(|p| p.date),
        },
    })
}

/// Overlapping length-`k` windows, step 1.
pub fn extract_tuples(seq: &BinarySequence, k: usize) -> Result<FrequencyDistribution, MarketError> {
    check_tuple_length(k)?;
    if seq.len() < k {
        return Err(MarketError::InsufficientData {
            needed: k,
            got: seq.len(),
        });
    }
    let mut counts = BTreeMap::new();
    window_counts(&seq.as_digits(), k, &mut counts);
    let source = Source::Market {
        label: seq.provenance.label.clone(),
        k,
        first_date: seq.provenance.first_date.map(|d| d.to_string()),
        last_date: seq.provenance.last_date.map(|d| d.to_string()),
    };
    Ok(FrequencyDistribution::from_counts(source, counts)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkSeries {
    pub values: Vec<i64>,
}

impl WalkSeries {
    /// Two-column `index,value` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{i},{v}")?;
        }
        Ok(())
    }
}

/// Cumulative +1/-1 walk starting at 0.
pub fn walk(seq: &BinarySequence) -> Result<WalkSeries, MarketError> {
    if seq.is_empty() {
        return Err(MarketError::InsufficientData { needed: 1, got: 0 });
    }
    let mut values = Vec::with_capacity(seq.len() + 1);
    values.push(0);
    let mut v = 0i64;
    for b in seq.bits.bytes() {
        v += if b == b'1' { 1 } else { -1 };
        values.push(v);
    }
    Ok(WalkSeries { values })
}
