//! Frequency distributions over bit strings and their file formats.
//!
//! Counts are kept exactly; probabilities are derived on demand as
//! `count / total`, either as an exact ratio or as `f64`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eca::{Boundary, InitialCondition, Slicing};
use crate::halting::BlankMode;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("'{0}' is not a bit string")]
    NotBits(String),
    #[error("tuple length {0} outside 1..=16")]
    BadTupleLength(usize),
    #[error("malformed distribution file at line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const MAX_TUPLE_LEN: usize = 16;

pub fn is_bits(s: &str) -> bool {
    s.bytes().all(|b| b == b'0' || b == b'1')
}

pub fn reverse_bits(s: &str) -> String {
    s.chars().rev().collect()
}

pub fn complement_bits(s: &str) -> String {
    s.chars().map(|c| if c == '0' { '1' } else { '0' }).collect()
}

/// How Turing machines were selected for a distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    Exhaustive,
    Sampled { size: u64, seed: u64 },
}

/// Where a distribution came from. Recorded in JSON output so runs with
/// different parameters stay comparable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    TuringMachines {
        states: u32,
        cutoff: u64,
        blank: BlankMode,
        sampling: Sampling,
        /// Machines visited (with repetition in sampled mode).
        machines: u64,
        /// Runs performed: machines times blanks.
        runs: u64,
    },
    Eca {
        rules: Vec<u8>,
        k: usize,
        width: usize,
        steps: usize,
        boundary: Boundary,
        init: InitialCondition,
        slicing: Slicing,
        complement_closure: bool,
    },
    Market {
        label: String,
        k: usize,
        first_date: Option<String>,
        last_date: Option<String>,
    },
    File {
        path: String,
    },
}

/// A map from bit strings to occurrence counts plus a normalization total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyDistribution {
    source: Source,
    total: u64,
    counts: BTreeMap<String, u64>,
}

impl FrequencyDistribution {
    /// Builds a distribution normalized by the sum of counts. Zero counts are
    /// dropped.
    pub fn from_counts<I>(source: Source, counts: I) -> Result<Self, DistError>
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut map = BTreeMap::new();
        for (s, c) in counts {
            if !is_bits(&s) || s.is_empty() {
                return Err(DistError::NotBits(s));
            }
            if c > 0 {
                *map.entry(s).or_insert(0) += c;
            }
        }
        let total = map.values().sum();
        Ok(Self {
            source,
            total,
            counts: map,
        })
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn count(&self, s: &str) -> u64 {
        self.counts.get(s).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn contains(&self, s: &str) -> bool {
        self.counts.contains_key(s)
    }

    pub fn exact_probability(&self, s: &str) -> Option<Ratio<u64>> {
        self.counts.get(s).map(|&c| Ratio::new(c, self.total))
    }

    pub fn probability(&self, s: &str) -> Option<f64> {
        self.counts.get(s).map(|&c| c as f64 / self.total as f64)
    }

    /// Probability over all runs rather than halting runs, for
    /// Turing-machine distributions. Falls back to [`Self::probability`].
    pub fn probability_over_all_runs(&self, s: &str) -> Option<f64> {
        match self.source {
            Source::TuringMachines { runs, .. } => self.counts.get(s).map(|&c| c as f64 / runs as f64),
            _ => self.probability(s),
        }
    }

    pub fn min_probability(&self) -> Option<f64> {
        self.counts.values().min().map(|&c| c as f64 / self.total as f64)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(s, &c)| (s.as_str(), c))
    }

    /// The sub-distribution of strings of length `k`, renormalized.
    pub fn restricted_to_length(&self, k: usize) -> FrequencyDistribution {
        let counts: BTreeMap<String, u64> = self
            .counts
            .iter()
            .filter(|(s, _)| s.len() == k)
            .map(|(s, &c)| (s.clone(), c))
            .collect();
        let total = counts.values().sum();
        Self {
            source: self.source.clone(),
            total,
            counts,
        }
    }

    /// Adds the counts of `other` into `self`. Commutative and associative in
    /// the counts; the source of `self` is kept.
    pub fn merge(&mut self, other: &FrequencyDistribution) {
        for (s, &c) in &other.counts {
            *self.counts.entry(s.clone()).or_insert(0) += c;
        }
        self.total += other.total;
    }

    /// CSV with header `string,count,probability`, in rank order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DistError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["string", "count", "probability"])?;
        for entry in crate::ctm::rank_distribution(self) {
            w.write_record([
                entry.string.as_str(),
                &entry.count.to_string(),
                &entry.probability.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Reads the CSV format; the probability column is ignored and the total
    /// becomes the sum of counts.
    pub fn read_csv<R: Read>(input: R, source: Source) -> Result<Self, DistError> {
        let mut r = csv::Reader::from_reader(input);
        let mut counts = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let s = rec.get(0).ok_or_else(|| DistError::Format {
                line,
                reason: "missing string column".into(),
            })?;
            let c: u64 = rec
                .get(1)
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| DistError::Format {
                    line,
                    reason: "missing or non-integer count".into(),
                })?;
            counts.push((s.trim().to_string(), c));
        }
        Self::from_counts(source, counts)
    }

    pub fn to_json(&self) -> String {
        let doc = JsonDoc {
            source: &self.source,
            total: self.total,
            support: self.counts.len(),
            entries: crate::ctm::rank_distribution(self)
                .into_iter()
                .map(|e| JsonEntry {
                    string: e.string,
                    count: e.count,
                    probability: e.probability,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, DistError> {
        #[derive(Deserialize)]
        struct Owned {
            source: Source,
            total: u64,
            entries: Vec<JsonEntry>,
        }
        let doc: Owned = serde_json::from_str(text)?;
        let d = Self::from_counts(doc.source, doc.entries.into_iter().map(|e| (e.string, e.count)))?;
        if d.total != doc.total {
            return Err(DistError::Format {
                line: 0,
                reason: format!("total {} does not match the sum of counts {}", doc.total, d.total),
            });
        }
        Ok(d)
    }
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    source: &'a Source,
    total: u64,
    support: usize,
    entries: Vec<JsonEntry>,
}

#[derive(Serialize, Deserialize)]
struct JsonEntry {
    string: String,
    count: u64,
    probability: f64,
}

/// Counts overlapping windows of length `k` (step 1) in `bits`.
pub fn window_counts(bits: &[u8], k: usize, counts: &mut BTreeMap<String, u64>) {
    if k == 0 || bits.len() < k {
        return;
    }
    for w in bits.windows(k) {
        let key: String = w.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        *counts.entry(key).or_insert(0) += 1;
    }
}

pub fn check_tuple_length(k: usize) -> Result<(), DistError> {
    if (1..=MAX_TUPLE_LEN).contains(&k) {
        Ok(())
    } else {
        Err(DistError::BadTupleLength(k))
    }
}
