//! Alignment of two string distributions and tie-corrected Spearman rank
//! correlation between them.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::FrequencyDistribution;
use crate::market::{extract_tuples, BinarySequence, MarketError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("no {k}-bit strings to align: left support {left}, right support {right}, policy {policy:?}")]
    EmptyAlignment {
        k: usize,
        left: usize,
        right: usize,
        policy: AlignPolicy,
    },
    #[error("need at least 3 pairs, got {0}")]
    InsufficientPairs(usize),
    #[error("all values on the {0} side are tied; rank correlation is undefined")]
    DegenerateRanks(Side),
    #[error("vectors have different lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("{0}")]
    Market(String),
}

impl From<MarketError> for StatsError {
    fn from(e: MarketError) -> Self {
        StatsError::Market(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlignPolicy {
    /// Strings present in both distributions.
    #[default]
    Intersection,
    /// Strings present in either; the missing side counts 0.
    UnionZeroFill,
}

impl std::fmt::Display for AlignPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AlignPolicy::Intersection => "intersection",
            AlignPolicy::UnionZeroFill => "union-zero-fill",
        })
    }
}

impl std::str::FromStr for AlignPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "intersection" => Ok(AlignPolicy::Intersection),
            "union" | "union-zero-fill" => Ok(AlignPolicy::UnionZeroFill),
            other => Err(format!("unknown alignment policy '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedPair {
    pub strings: Vec<String>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub policy: AlignPolicy,
}

impl AlignedPair {
    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn swapped(&self) -> AlignedPair {
        AlignedPair {
            strings: self.strings.clone(),
            xs: self.ys.clone(),
            ys: self.xs.clone(),
            policy: self.policy,
        }
    }
}

/// Pairs up the counts of `k`-bit strings, in lexicographic order.
pub fn align(
    a: &FrequencyDistribution,
    b: &FrequencyDistribution,
    k: usize,
    policy: AlignPolicy,
) -> Result<AlignedPair, StatsError> {
    let left: BTreeSet<&str> = a.iter().map(|(s, _)| s).filter(|s| s.len() == k).collect();
    let right: BTreeSet<&str> = b.iter().map(|(s, _)| s).filter(|s| s.len() == k).collect();
    let strings: Vec<String> = match policy {
        AlignPolicy::Intersection => left.intersection(&right).map(|s| s.to_string()).collect(),
        AlignPolicy::UnionZeroFill => left.union(&right).map(|s| s.to_string()).collect(),
    };
    if strings.is_empty() || left.is_empty() || right.is_empty() {
        return Err(StatsError::EmptyAlignment {
            k,
            left: left.len(),
            right: right.len(),
            policy,
        });
    }
    let xs = strings.iter().map(|s| a.count(s) as f64).collect();
    let ys = strings.iter().map(|s| b.count(s) as f64).collect();
    Ok(AlignedPair {
        strings,
        xs,
        ys,
        policy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpearmanResult {
    pub rho: f64,
    pub n: usize,
}

impl std::fmt::Display for SpearmanResult {
    /// The `rho|n` cell format.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2}|{}", self.rho, self.n)
    }
}

/// 1-based ranks in ascending order; tied values share the mean of the
/// positions they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Product-moment correlation of the average-rank vectors.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<SpearmanResult, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::InsufficientPairs(n));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let all_tied = |r: &[f64]| r.iter().all(|&v| v == r[0]);
    if all_tied(&rx) {
        return Err(StatsError::DegenerateRanks(Side::Left));
    }
    if all_tied(&ry) {
        return Err(StatsError::DegenerateRanks(Side::Right));
    }
    let rho = pearson(&rx, &ry).expect("non-constant ranks");
    Ok(SpearmanResult { rho, n })
}

pub fn spearman(pair: &AlignedPair) -> Result<SpearmanResult, StatsError> {
    spearman_rho(&pair.xs, &pair.ys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCell {
    pub k: usize,
    pub result: Result<SpearmanResult, String>,
    /// Aligned pair count, also when no rho could be computed.
    pub pairs: usize,
}

/// One Spearman comparison per tuple length between a binarized series and
/// a reference distribution.
pub fn compare_table(
    market: &BinarySequence,
    reference: &FrequencyDistribution,
    ks: &[usize],
    policy: AlignPolicy,
) -> Vec<ComparisonCell> {
    ks.iter()
        .map(|&k| {
            let aligned = extract_tuples(market, k)
                .map_err(StatsError::from)
                .and_then(|tuples| align(&tuples, reference, k, policy));
            match aligned {
                Ok(pair) => ComparisonCell {
                    k,
                    pairs: pair.len(),
                    result: spearman(&pair).map_err(|e| e.to_string()),
                },
                Err(e) => ComparisonCell {
                    k,
                    pairs: 0,
                    result: Err(e.to_string()),
                },
            }
        })
        .collect()
}

/// `k,rho,n`; cells without a rho carry `NA`.
pub fn table_csv(cells: &[ComparisonCell]) -> String {
    let mut out = String::from("k,rho,n\n");
    for c in cells {
        match &c.result {
            Ok(r) => writeln!(out, "{},{},{}", c.k, r.rho, r.n),
            Err(_) => writeln!(out, "{},NA,{}", c.k, c.pairs),
        }
        .expect("writing to a string");
    }
    out
}

/// A text table with one `rho|n` cell per tuple length, plus a footnote for
/// every absent cell.
pub fn table_text(row_label: &str, reference_label: &str, cells: &[ComparisonCell]) -> String {
    let header_label = format!("market v. {reference_label}");
    let first_width = header_label.len().max(row_label.len());
    let cell_text: Vec<String> = cells
        .iter()
        .map(|c| match &c.result {
            Ok(r) => r.to_string(),
            Err(_) => "NA".to_string(),
        })
        .collect();
    let widths: Vec<usize> = cells
        .iter()
        .zip(&cell_text)
        .map(|(c, t)| c.k.to_string().len().max(t.len()))
        .collect();
    let mut out = String::new();
    let _ = write!(out, "| {header_label:<first_width$} |");
    for (c, w) in cells.iter().zip(&widths) {
        let _ = write!(out, " {:>w$} |", c.k);
    }
    out.push('\n');
    let _ = write!(out, "| {row_label:<first_width$} |");
    for (t, w) in cell_text.iter().zip(&widths) {
        let _ = write!(out, " {t:>w$} |");
    }
    out.push('\n');
    for c in cells {
        if let Err(reason) = &c.result {
            let _ = writeln!(out, "k={}: {}", c.k, reason);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Source;

    fn dist(pairs: &[(&str, u64)]) -> FrequencyDistribution {
        FrequencyDistribution::from_counts(
            Source::File { path: "-".into() },
            pairs.iter().map(|(s, c)| (s.to_string(), *c)),
        )
        .unwrap()
    }

    #[test]
    fn alignment_policies() {
        let a = dist(&[("00", 5), ("01", 3)]);
        let b = dist(&[("01", 2), ("11", 9)]);
        let inter = align(&a, &b, 2, AlignPolicy::Intersection).unwrap();
        assert_eq!(inter.strings, vec!["01"]);
        let uni = align(&a, &b, 2, AlignPolicy::UnionZeroFill).unwrap();
        assert_eq!(uni.strings, vec!["00", "01", "11"]);
        assert_eq!(uni.xs, vec![5.0, 3.0, 0.0]);
        assert_eq!(uni.ys, vec![0.0, 2.0, 9.0]);
        let c = dist(&[("10", 1)]);
        assert!(matches!(
            align(&a, &c, 2, AlignPolicy::Intersection),
            Err(StatsError::EmptyAlignment { left: 2, right: 1, .. })
        ));
        assert!(align(&a, &b, 3, AlignPolicy::UnionZeroFill).is_err());
    }

    #[test]
    fn full_support_alignment() {
        let all: Vec<(String, u64)> = (0..32u64).map(|x| (format!("{x:05b}"), x + 1)).collect();
        let a = FrequencyDistribution::from_counts(Source::File { path: "-".into() }, all.clone()).unwrap();
        let pair = align(&a, &a, 5, AlignPolicy::Intersection).unwrap();
        assert_eq!(pair.len(), 32);
    }

    #[test]
    fn simple_rhos() {
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap().rho, 1.0);
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]).unwrap().rho, -1.0);
        // Average ranks [1, 2.5, 2.5, 4] vs [1, 3, 2, 4]: 4.5 / sqrt(4.5 * 5).
        let r = spearman_rho(&[1.0, 2.0, 2.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r.rho - 3.0 / 10f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.n, 4);
    }

    #[test]
    fn rho_errors() {
        assert_eq!(spearman_rho(&[1.0, 2.0], &[1.0, 2.0]), Err(StatsError::InsufficientPairs(2)));
        assert_eq!(
            spearman_rho(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::DegenerateRanks(Side::Left))
        );
        assert_eq!(
            spearman_rho(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]),
            Err(StatsError::DegenerateRanks(Side::Right))
        );
        assert!(spearman_rho(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn alternating_market_is_degenerate() {
        let seq = BinarySequence::from_bits("alt", &"01".repeat(200)).unwrap();
        let reference = dist(&[("01", 1), ("10", 2), ("00", 3), ("0101", 1), ("1010", 4), ("0000", 5)]);
        let cells = compare_table(&seq, &reference, &[2, 4, 5], AlignPolicy::Intersection);
        assert!(cells.iter().all(|c| c.result.is_err()));
        assert_eq!(cells[0].pairs, 2);
    }

    #[test]
    fn self_comparison_is_perfect() {
        let bits: String = (0..400u32).map(|i| if (i * 7919 % 13) < 6 { '1' } else { '0' }).collect();
        let seq = BinarySequence::from_bits("s", &bits).unwrap();
        for k in 3..=6 {
            let own = extract_tuples(&seq, k).unwrap();
            let cells = compare_table(&seq, &own, &[k], AlignPolicy::Intersection);
            let r = cells[0].result.clone().unwrap();
            assert!((r.rho - 1.0).abs() < 1e-12);
            assert_eq!(r.n, own.len());
        }
    }

    #[test]
    fn table_rendering() {
        let cells = vec![
            ComparisonCell {
                k: 5,
                pairs: 32,
                result: Ok(SpearmanResult { rho: 0.28, n: 32 }),
            },
            ComparisonCell {
                k: 6,
                pairs: 2,
                result: Err("need at least 3 pairs, got 2".into()),
            },
        ];
        assert_eq!(table_csv(&cells), "k,rho,n\n5,0.28,32\n6,NA,2\n");
        let text = table_text("DJIA", "CA", &cells);
        assert!(text.contains("0.28|32"));
        assert!(text.contains("k=6: need at least 3 pairs"));
    }
}
