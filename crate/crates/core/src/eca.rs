//! Elementary cellular automata and the k-tuple distributions of their
//! evolutions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{check_tuple_length, window_counts, DistError, FrequencyDistribution, Source};

#[derive(Debug, Error)]
pub enum EcaError {
    #[error("width must be at least 3, got {0}")]
    TooNarrow(usize),
    #[error("at least one step is required")]
    NoSteps,
    #[error("density {0} outside [0, 1]")]
    BadDensity(f64),
    #[error("the rule set is empty")]
    NoRules,
    #[error(transparent)]
    Dist(#[from] DistError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Cyclic,
    /// Cells beyond the edges read as 0.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// A single 1 at `width / 2`.
    SingleOne,
    /// Each cell is 1 with probability `density`, from a ChaCha8 stream.
    Random { seed: u64, density: f64 },
}

impl Eq for InitialCondition {}

/// How an evolution is cut into bit sequences for tuple counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Slicing {
    #[default]
    Rows,
    Columns,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcaConfig {
    pub rule: u8,
    pub width: usize,
    pub steps: usize,
    pub boundary: Boundary,
    pub init: InitialCondition,
}

impl EcaConfig {
    pub fn validate(&self) -> Result<(), EcaError> {
        if self.width < 3 {
            return Err(EcaError::TooNarrow(self.width));
        }
        if self.steps == 0 {
            return Err(EcaError::NoSteps);
        }
        if let InitialCondition::Random { density, .. } = self.init {
            if !(0.0..=1.0).contains(&density) {
                return Err(EcaError::BadDensity(density));
            }
        }
        Ok(())
    }

    pub fn initial_row(&self) -> Vec<u8> {
        match self.init {
            InitialCondition::SingleOne => {
                let mut row = vec![0; self.width];
                row[self.width / 2] = 1;
                row
            }
            InitialCondition::Random { seed, density } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..self.width).map(|_| rng.gen_bool(density) as u8).collect()
            }
        }
    }
}

/// `steps + 1` rows; row 0 is the initial condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evolution {
    pub rows: Vec<Vec<u8>>,
}

impl Evolution {
    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn column(&self, i: usize) -> Vec<u8> {
        self.rows.iter().map(|r| r[i]).collect()
    }

    /// Plain PBM (`P1`) image, one pixel per cell, 1 = black.
    pub fn to_pbm(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "P1\n{} {}", self.width(), self.rows.len());
        for row in &self.rows {
            let line: Vec<&str> = row.iter().map(|&c| if c == 1 { "1" } else { "0" }).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

#[inline]
fn apply(rule: u8, left: u8, centre: u8, right: u8) -> u8 {
    (rule >> ((left << 2) | (centre << 1) | right)) & 1
}

pub fn step_row(rule: u8, row: &[u8], boundary: Boundary) -> Vec<u8> {
    let w = row.len();
    (0..w)
        .map(|i| {
            let (l, r) = match boundary {
                Boundary::Cyclic => (row[(i + w - 1) % w], row[(i + 1) % w]),
                Boundary::Fixed => (
                    if i == 0 { 0 } else { row[i - 1] },
                    if i + 1 == w { 0 } else { row[i + 1] },
                ),
            };
            apply(rule, l, row[i], r)
        })
        .collect()
}

pub fn evolve(config: &EcaConfig) -> Result<Evolution, EcaError> {
    config.validate()?;
    Ok(evolve_from(config.rule, config.initial_row(), config.steps, config.boundary))
}

fn evolve_from(rule: u8, first: Vec<u8>, steps: usize, boundary: Boundary) -> Evolution {
    let mut rows = Vec::with_capacity(steps + 1);
    rows.push(first);
    for t in 0..steps {
        let next = step_row(rule, &rows[t], boundary);
        rows.push(next);
    }
    Evolution { rows }
}

/// The column of the initially live cell over `steps` rows (row 0 included),
/// on a fixed-0 lattice wide enough that the light cone never reaches the
/// edge.
pub fn central_column(rule: u8, steps: usize) -> Result<String, EcaError> {
    if steps == 0 {
        return Err(EcaError::NoSteps);
    }
    let config = EcaConfig {
        rule,
        width: 2 * steps + 3,
        steps: steps - 1,
        boundary: Boundary::Fixed,
        init: InitialCondition::SingleOne,
    };
    let centre = config.width / 2;
    if steps == 1 {
        return Ok("1".into());
    }
    let evo = evolve(&config)?;
    Ok(evo.rows.iter().map(|r| if r[centre] == 1 { '1' } else { '0' }).collect())
}

/// Shared parameters for a multi-rule tuple distribution; the rule field of
/// each evolution comes from the rule set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TupleTemplate {
    pub width: usize,
    pub steps: usize,
    pub boundary: Boundary,
    pub init: InitialCondition,
    pub slicing: Slicing,
    /// Also evolve every rule from the complemented initial row.
    pub complement_closure: bool,
}

impl Default for TupleTemplate {
    fn default() -> Self {
        Self {
            width: 63,
            steps: 63,
            boundary: Boundary::Cyclic,
            init: InitialCondition::SingleOne,
            slicing: Slicing::Rows,
            complement_closure: false,
        }
    }
}

pub fn all_rules() -> Vec<u8> {
    (0..=255).collect()
}

/// Overlapping k-windows of every row (or column) of every rule's evolution,
/// pooled. Rules are evolved in parallel; the result does not depend on the
/// pool size.
pub fn eca_tuple_distribution(rules: &[u8], k: usize, template: &TupleTemplate) -> Result<FrequencyDistribution, EcaError> {
    check_tuple_length(k)?;
    if rules.is_empty() {
        return Err(EcaError::NoRules);
    }
    let base = EcaConfig {
        rule: 0,
        width: template.width,
        steps: template.steps,
        boundary: template.boundary,
        init: template.init,
    };
    base.validate()?;
    let first = base.initial_row();
    let mut starts = vec![first.clone()];
    if template.complement_closure {
        starts.push(first.iter().map(|&c| 1 - c).collect());
    }
    let counts = rules
        .par_iter()
        .map(|&rule| {
            let mut counts = BTreeMap::new();
            for start in &starts {
                let evo = evolve_from(rule, start.clone(), template.steps, template.boundary);
                match template.slicing {
                    Slicing::Rows => evo.rows.iter().for_each(|r| window_counts(r, k, &mut counts)),
                    Slicing::Columns => (0..evo.width()).for_each(|i| window_counts(&evo.column(i), k, &mut counts)),
                }
            }
            counts
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (s, c) in b {
                *a.entry(s).or_insert(0) += c;
            }
            a
        });
    let source = Source::Eca {
        rules: rules.to_vec(),
        k,
        width: template.width,
        steps: template.steps,
        boundary: template.boundary,
        init: template.init,
        slicing: template.slicing,
        complement_closure: template.complement_closure,
    };
    Ok(FrequencyDistribution::from_counts(source, counts)?)
}

/// Tuple distributions for several lengths, merged into one distribution
/// whose support mixes lengths.
pub fn eca_multi_length(rules: &[u8], ks: &[usize], template: &TupleTemplate) -> Result<FrequencyDistribution, EcaError> {
    let mut iter = ks.iter();
    let first = iter.next().ok_or(EcaError::Dist(DistError::BadTupleLength(0)))?;
    let mut acc = eca_tuple_distribution(rules, *first, template)?;
    for &k in iter {
        acc.merge(&eca_tuple_distribution(rules, k, template)?);
    }
    Ok(acc)
}
