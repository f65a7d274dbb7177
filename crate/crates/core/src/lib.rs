//! Empirical algorithmic probability.
//!
//! Enumerates small Turing machines to build the output distribution D(n),
//! turns output frequencies into complexity estimates with the coding
//! theorem, and compares such distributions with k-tuple frequencies from
//! elementary cellular automata and binarized price series.

pub mod codec;
pub mod ctm;
pub mod dist;
pub mod eca;
pub mod halting;
pub mod machine;
pub mod market;
pub mod stats;

pub use ctm::{compute_distribution, ctm_complexity, halting_fraction, rank_distribution, DistributionConfig, Mode};
pub use dist::{FrequencyDistribution, Source};
pub use halting::{busy_beaver, run_census, BlankMode, CensusReport, CutoffTable, Detectors};
pub use machine::{decode_machine, encode_machine, mirror, simulate, MachineClass, RunOutcome, TransitionTable};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
