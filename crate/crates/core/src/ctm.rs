//! The output distribution D(n) of small Turing machines and the
//! coding-theorem complexity estimate `K(s) ~ -log2 D(n)(s)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{DistError, FrequencyDistribution, Sampling, Source};
use crate::halting::{sweep, BlankMode, CensusReport, Detectors, HaltingError, Selection, DEFAULT_EXHAUSTIVE_BUDGET};
use crate::machine::MachineClass;

/// Smallest sample accepted in sampled mode.
pub const MIN_SAMPLE_SIZE: u64 = 10_000;

#[derive(Debug, Error)]
pub enum CtmError {
    #[error(transparent)]
    Halting(#[from] HaltingError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("sample size {0} is below the minimum of {MIN_SAMPLE_SIZE}")]
    SampleTooSmall(u64),
    #[error("'{string}' is not in the distribution's support (smallest probability there: {min_probability})")]
    NotInSupport { string: String, min_probability: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    /// Every machine in the class; refused above `budget` machines.
    Exhaustive { budget: u64 },
    /// `size` machine indices drawn uniformly with replacement from a
    /// seeded ChaCha8 stream.
    Sampled { size: u64, seed: u64 },
}

impl Mode {
    pub fn exhaustive() -> Self {
        Mode::Exhaustive {
            budget: DEFAULT_EXHAUSTIVE_BUDGET,
        }
    }
}

/// Parameters of a D(n) computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionConfig {
    pub class: MachineClass,
    pub mode: Mode,
    pub cutoff: u64,
    pub blank: BlankMode,
}

/// D(n) together with the census of the same sweep.
#[derive(Debug, Clone)]
pub struct MachineDistribution {
    pub distribution: FrequencyDistribution,
    pub census: CensusReport,
}

/// The machine indices a sampled run visits, in draw order.
pub fn sample_indices(class: MachineClass, size: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = class.rulespace_size();
    (0..size).map(|_| rng.gen_range(0..space)).collect()
}

/// Counts the outputs of all halting runs, normalized by the number of
/// halting runs.
pub fn compute_distribution(config: &DistributionConfig) -> Result<MachineDistribution, CtmError> {
    let (swept, sampling) = match config.mode {
        Mode::Exhaustive { budget } => (
            sweep(
                config.class,
                Selection::Exhaustive { budget },
                config.cutoff,
                config.blank,
                Detectors::ALL,
                true,
            )?,
            Sampling::Exhaustive,
        ),
        Mode::Sampled { size, seed } => {
            if size < MIN_SAMPLE_SIZE {
                return Err(CtmError::SampleTooSmall(size));
            }
            let indices = sample_indices(config.class, size, seed);
            (
                sweep(
                    config.class,
                    Selection::Indices(&indices),
                    config.cutoff,
                    config.blank,
                    Detectors::ALL,
                    true,
                )?,
                Sampling::Sampled { size, seed },
            )
        }
    };
    let source = Source::TuringMachines {
        states: config.class.states(),
        cutoff: config.cutoff,
        blank: config.blank,
        sampling,
        machines: swept.report.total_machines,
        runs: swept.report.total_runs,
    };
    let distribution = FrequencyDistribution::from_counts(source, swept.outputs)?;
    debug_assert_eq!(distribution.total(), swept.report.halting);
    Ok(MachineDistribution {
        distribution,
        census: swept.report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    pub string: String,
    pub probability: f64,
    /// `-log2(probability)`, in bits, with no additive constant.
    pub k_ctm: f64,
}

pub fn ctm_complexity(s: &str, dist: &FrequencyDistribution) -> Result<ComplexityEstimate, CtmError> {
    match dist.probability(s) {
        Some(p) => Ok(ComplexityEstimate {
            string: s.to_string(),
            probability: p,
            k_ctm: -p.log2(),
        }),
        None => Err(CtmError::NotInSupport {
            string: s.to_string(),
            min_probability: dist.min_probability().unwrap_or(0.0),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaltingFraction {
    pub states: u32,
    pub halting: u64,
    pub runs: u64,
    pub fraction: f64,
}

/// Share of runs that halted within the cutoff.
pub fn halting_fraction(report: &CensusReport) -> HaltingFraction {
    HaltingFraction {
        states: report.states,
        halting: report.halting,
        runs: report.total_runs,
        fraction: report.halting as f64 / report.total_runs as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedString {
    pub string: String,
    pub count: u64,
    pub probability: f64,
    /// 1-based; strings with equal counts share their average rank.
    pub rank: f64,
}

/// Orders strings by descending probability, then shorter first, then
/// lexicographically.
pub fn rank_distribution(dist: &FrequencyDistribution) -> Vec<RankedString> {
    let mut entries: Vec<(&str, u64)> = dist.iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.len().cmp(&b.0.len())).then(a.0.cmp(b.0)));
    let total = dist.total() as f64;
    let mut out = Vec::with_capacity(entries.len());
    let mut i = 0;
    while i < entries.len() {
        let mut j = i;
        while j < entries.len() && entries[j].1 == entries[i].1 {
            j += 1;
        }
        // positions i+1 ..= j share their mean
        let rank = (i + 1 + j) as f64 / 2.0;
        for &(s, c) in &entries[i..j] {
            out.push(RankedString {
                string: s.to_string(),
                count: c,
                probability: c as f64 / total,
                rank,
            });
        }
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::reverse_bits;
    use num_rational::Ratio;

    fn exhaustive(n: u32, cutoff: u64) -> MachineDistribution {
        compute_distribution(&DistributionConfig {
            class: MachineClass::new(n).unwrap(),
            mode: Mode::exhaustive(),
            cutoff,
            blank: BlankMode::Both,
        })
        .unwrap()
    }

    #[test]
    fn d1_is_uniform_over_single_bits() {
        let d = exhaustive(1, 1);
        assert_eq!(d.distribution.len(), 2);
        assert_eq!(d.distribution.exact_probability("0"), Some(Ratio::new(1, 2)));
        assert_eq!(d.distribution.exact_probability("1"), Some(Ratio::new(1, 2)));
        assert_eq!(d.census.total_machines, 36);
        assert_eq!(d.distribution.total(), 24);
    }

    #[test]
    fn d2_headline_values() {
        let d = exhaustive(2, 6).distribution;
        assert_eq!(d.total(), 6088);
        assert_eq!(d.len(), 22);
        assert_eq!(d.count("0"), 2000);
        assert_eq!(d.count("00"), 508);
        assert!((d.probability("00").unwrap() - 0.0834).abs() <= 5e-5);
        let sum: f64 = d.iter().map(|(s, _)| d.probability(s).unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        for (s, c) in d.iter() {
            assert_eq!(d.count(&reverse_bits(s)), c);
        }
    }

    #[test]
    fn complexity_of_single_bit() {
        let d = exhaustive(1, 1).distribution;
        let e = ctm_complexity("0", &d).unwrap();
        assert_eq!(e.k_ctm, 1.0);
        match ctm_complexity("0101", &d) {
            Err(CtmError::NotInSupport { min_probability, .. }) => assert_eq!(min_probability, 0.5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn d2_complexity_order() {
        let d = exhaustive(2, 6).distribution;
        let k = |s| ctm_complexity(s, &d).unwrap().k_ctm;
        assert!(k("0") < k("00") && k("00") < k("001") && k("001") < k("000"));
        assert!((k("00") - 3.58).abs() < 0.01);
    }

    #[test]
    fn fraction_from_census() {
        let d = exhaustive(1, 1);
        let f = halting_fraction(&d.census);
        assert_eq!((f.halting, f.runs), (24, 72));
        assert!((f.fraction - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ranks_share_ties() {
        let d = exhaustive(2, 6).distribution;
        let ranked = rank_distribution(&d);
        assert_eq!(&ranked[0].string, "0");
        assert_eq!(ranked[0].rank, 1.5);
        assert_eq!(ranked[1].rank, 1.5);
        assert!(ranked[2..6].iter().all(|r| r.rank == 4.5 && r.string.len() == 2));
        let single = FrequencyDistribution::from_counts(Source::File { path: "-".into() }, [("1".into(), 3)]).unwrap();
        assert_eq!(rank_distribution(&single)[0].rank, 1.0);
    }

    #[test]
    fn sampled_mode_is_reproducible_and_validated() {
        let cfg = DistributionConfig {
            class: MachineClass::new(2).unwrap(),
            mode: Mode::Sampled { size: 20_000, seed: 3 },
            cutoff: 6,
            blank: BlankMode::Both,
        };
        let a = compute_distribution(&cfg).unwrap().distribution;
        let b = compute_distribution(&cfg).unwrap().distribution;
        assert_eq!(a, b);
        let small = DistributionConfig {
            mode: Mode::Sampled { size: 10, seed: 3 },
            ..cfg
        };
        assert!(matches!(compute_distribution(&small), Err(CtmError::SampleTooSmall(10))));
    }

    #[test]
    fn exhaustive_budget_refused() {
        let cfg = DistributionConfig {
            class: MachineClass::new(4).unwrap(),
            mode: Mode::exhaustive(),
            cutoff: 107,
            blank: BlankMode::Both,
        };
        assert!(matches!(
            compute_distribution(&cfg),
            Err(CtmError::Halting(HaltingError::BudgetExceeded { .. }))
        ));
    }
}
