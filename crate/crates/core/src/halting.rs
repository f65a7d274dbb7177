//! Halting censuses over whole `(n,2)` rulespaces, Busy Beaver values and the
//! runtime cutoffs derived from them.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::{decode_machine, Action, Execution, MachineClass, Move, StepResult, Tape, TransitionTable};

/// Largest rulespace swept exhaustively unless the caller raises the budget.
/// This is the size of the 3-state class.
pub const DEFAULT_EXHAUSTIVE_BUDGET: u64 = 7_529_536;

const CUTOFFS_TOML: &str = include_str!("../config/cutoffs.toml");

#[derive(Debug, Error)]
pub enum HaltingError {
    #[error(
        "exhaustive sweep of {states}-state machines needs {size} machines, over the budget of {budget}; \
         use sampled mode or raise the budget"
    )]
    BudgetExceeded { states: u32, size: u64, budget: u64 },
    #[error("cutoff must be at least 1")]
    ZeroCutoff,
    #[error("cutoff schedule must be non-empty and strictly ascending")]
    BadSchedule,
    #[error("invalid cutoff config: {0}")]
    Config(String),
}

/// Which blank symbol(s) each machine is started on.
///
/// `Both` runs every machine twice, once per blank, and pools the runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BlankMode {
    Zero,
    One,
    #[default]
    Both,
}

impl BlankMode {
    pub fn blanks(self) -> &'static [u8] {
        match self {
            BlankMode::Zero => &[0],
            BlankMode::One => &[1],
            BlankMode::Both => &[0, 1],
        }
    }
}

impl fmt::Display for BlankMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlankMode::Zero => "zero",
            BlankMode::One => "one",
            BlankMode::Both => "both",
        })
    }
}

impl std::str::FromStr for BlankMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" | "zero" => Ok(BlankMode::Zero),
            "1" | "one" => Ok(BlankMode::One),
            "both" => Ok(BlankMode::Both),
            other => Err(format!("unknown blank mode '{other}' (expected zero, one or both)")),
        }
    }
}

/// Enabled non-halting detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detectors {
    /// Head on a fresh cell at the frontier whose chain of blank-reading
    /// transitions keeps moving outward and revisits a state.
    pub blank_escape: bool,
    /// Exact repetition of state, head position and visited segment.
    pub cycle: bool,
}

impl Detectors {
    pub const ALL: Detectors = Detectors {
        blank_escape: true,
        cycle: true,
    };
    pub const NONE: Detectors = Detectors {
        blank_escape: false,
        cycle: false,
    };
}

impl Default for Detectors {
    fn default() -> Self {
        Self::ALL
    }
}

/// Classification of a single run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Halted { steps: u64, ones: u64, output: String },
    Escapes { steps: u64 },
    Cycles { steps: u64 },
    Unresolved,
}

/// Reusable per-worker run classifier; keeps its tape buffer between runs.
#[derive(Debug)]
pub struct Classifier {
    detectors: Detectors,
    tape: Option<Tape>,
    snapshot: Vec<u8>,
}

impl Classifier {
    pub fn new(detectors: Detectors) -> Self {
        Self {
            detectors,
            tape: Some(Tape::with_capacity(0, 64)),
            snapshot: Vec::new(),
        }
    }

    /// Runs `table` from an all-`blank` tape for up to `cutoff` steps.
    ///
    /// Halting outputs are independent of the detectors: a detector only ever
    /// stops a run that could not have halted.
    pub fn classify(&mut self, table: &TransitionTable, cutoff: u64, blank: u8) -> Verdict {
        let escapes = if self.detectors.blank_escape {
            escape_chains(table, blank)
        } else {
            EscapeChains::default()
        };
        let mut tape = self.tape.take().unwrap_or_else(|| Tape::new(blank));
        tape.reset(blank);
        let mut exec = Execution::with_tape(table, tape);

        // Brent-style cycle check: one saved configuration, re-saved at every
        // power-of-two step count.
        let mut saved_state = 0u32;
        let mut saved_head = 0i64;
        let mut saved_bounds = (0i64, 0i64);
        let mut next_save = 1u64;
        self.snapshot.clear();
        self.snapshot.push(blank);

        let verdict = loop {
            if exec.steps() >= cutoff {
                break Verdict::Unresolved;
            }
            let (lo, hi) = (exec.tape().min_visited(), exec.tape().max_visited());
            if exec.step() == StepResult::Halted {
                match exec.halted_outcome() {
                    crate::machine::RunOutcome::Halted { steps, ones, output } => {
                        break Verdict::Halted { steps, ones, output }
                    }
                    crate::machine::RunOutcome::CutoffExceeded { .. } => unreachable!(),
                }
            }
            let t = exec.tape();
            if self.detectors.blank_escape {
                let state = exec.state() as usize;
                if t.max_visited() > hi && escapes.right.get(state).copied().unwrap_or(false)
                    || t.min_visited() < lo && escapes.left.get(state).copied().unwrap_or(false)
                {
                    break Verdict::Escapes { steps: exec.steps() };
                }
            }
            if self.detectors.cycle {
                let bounds = (t.min_visited(), t.max_visited());
                if exec.state() == saved_state
                    && t.head() == saved_head
                    && bounds == saved_bounds
                    && t.visited().eq(self.snapshot.iter().copied())
                {
                    break Verdict::Cycles { steps: exec.steps() };
                }
                if exec.steps() == next_save {
                    saved_state = exec.state();
                    saved_head = t.head();
                    saved_bounds = bounds;
                    self.snapshot.clear();
                    self.snapshot.extend(t.visited());
                    next_save *= 2;
                }
            }
        };
        self.tape = Some(exec.into_tape());
        verdict
    }
}

#[derive(Debug, Default)]
struct EscapeChains {
    left: Vec<bool>,
    right: Vec<bool>,
}

/// For each state and direction: does reading blanks forever, always moving
/// in that direction, loop through states without halting?
fn escape_chains(table: &TransitionTable, blank: u8) -> EscapeChains {
    let n = table.class().states() as usize;
    let chain = |start: usize, dir: Move| {
        let mut seen = vec![false; n];
        let mut state = start;
        loop {
            if seen[state] {
                return true;
            }
            seen[state] = true;
            match table.action(state as u32, blank) {
                Action::Step { mv, next, .. } if mv == dir => state = next as usize,
                _ => return false,
            }
        }
    };
    EscapeChains {
        left: (0..n).map(|q| chain(q, Move::Left)).collect(),
        right: (0..n).map(|q| chain(q, Move::Right)).collect(),
    }
}

/// Aggregate result of classifying every machine in a sweep.
///
/// `halting + non_halting_proven + unresolved == total_runs`, where
/// `total_runs` is `total_machines` times the number of blanks in `blank`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub states: u32,
    pub blank: BlankMode,
    pub detectors: Detectors,
    pub total_machines: u64,
    pub total_runs: u64,
    pub halting: u64,
    pub non_halting_proven: u64,
    pub escapes: u64,
    pub cycles: u64,
    pub unresolved: u64,
    pub cutoff_used: u64,
    pub max_steps_observed: u64,
    /// Most non-blank cells left by a halting run (1s on a 0-blank tape).
    pub max_ones_observed: u64,
}

impl CensusReport {
    fn empty(class: MachineClass, blank: BlankMode, detectors: Detectors, cutoff: u64) -> Self {
        Self {
            states: class.states(),
            blank,
            detectors,
            total_machines: 0,
            total_runs: 0,
            halting: 0,
            non_halting_proven: 0,
            escapes: 0,
            cycles: 0,
            unresolved: 0,
            cutoff_used: cutoff,
            max_steps_observed: 0,
            max_ones_observed: 0,
        }
    }

    /// Commutative, associative merge of two partial reports over disjoint
    /// machine sets.
    pub fn merge(mut self, other: &CensusReport) -> Self {
        debug_assert_eq!(self.states, other.states);
        debug_assert_eq!(self.cutoff_used, other.cutoff_used);
        self.total_machines += other.total_machines;
        self.total_runs += other.total_runs;
        self.halting += other.halting;
        self.non_halting_proven += other.non_halting_proven;
        self.escapes += other.escapes;
        self.cycles += other.cycles;
        self.unresolved += other.unresolved;
        self.max_steps_observed = self.max_steps_observed.max(other.max_steps_observed);
        self.max_ones_observed = self.max_ones_observed.max(other.max_ones_observed);
        self
    }

    fn record(&mut self, verdict: &Verdict, blank: u8) {
        self.total_runs += 1;
        match verdict {
            Verdict::Halted { steps, ones, output } => {
                self.halting += 1;
                let marks = if blank == 0 { *ones } else { output.len() as u64 - ones };
                self.max_steps_observed = self.max_steps_observed.max(*steps);
                self.max_ones_observed = self.max_ones_observed.max(marks);
            }
            Verdict::Escapes { .. } => {
                self.non_halting_proven += 1;
                self.escapes += 1;
            }
            Verdict::Cycles { .. } => {
                self.non_halting_proven += 1;
                self.cycles += 1;
            }
            Verdict::Unresolved => self.unresolved += 1,
        }
    }
}

/// Which machines a sweep visits.
#[derive(Debug, Clone, Copy)]
pub enum Selection<'a> {
    Exhaustive { budget: u64 },
    Indices(&'a [u64]),
}

/// Census plus, optionally, the output counts of halting runs.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub report: CensusReport,
    pub outputs: HashMap<String, u64>,
}

struct Partial {
    report: CensusReport,
    outputs: HashMap<String, u64>,
    classifier: Classifier,
}

/// Classifies every selected machine on every blank of `blank`, in parallel
/// on the current rayon pool. The result does not depend on the pool size.
pub fn sweep(
    class: MachineClass,
    selection: Selection<'_>,
    cutoff: u64,
    blank: BlankMode,
    detectors: Detectors,
    collect_outputs: bool,
) -> Result<Sweep, HaltingError> {
    if cutoff == 0 {
        return Err(HaltingError::ZeroCutoff);
    }
    let identity = || Partial {
        report: CensusReport::empty(class, blank, detectors, cutoff),
        outputs: HashMap::new(),
        classifier: Classifier::new(detectors),
    };
    let visit = |mut acc: Partial, index: u64| {
        let table = decode_machine(index, class).expect("index within rulespace");
        acc.report.total_machines += 1;
        for &b in blank.blanks() {
            let verdict = acc.classifier.classify(&table, cutoff, b);
            acc.report.record(&verdict, b);
            if collect_outputs {
                if let Verdict::Halted { output, .. } = verdict {
                    *acc.outputs.entry(output).or_insert(0) += 1;
                }
            }
        }
        acc
    };
    let combine = |mut a: Partial, b: Partial| {
        a.report = a.report.merge(&b.report);
        let (mut big, small) = if a.outputs.len() >= b.outputs.len() {
            (a.outputs, b.outputs)
        } else {
            (b.outputs, a.outputs)
        };
        for (k, v) in small {
            *big.entry(k).or_insert(0) += v;
        }
        a.outputs = big;
        a
    };
    let done = match selection {
        Selection::Exhaustive { budget } => {
            let size = class.rulespace_size();
            if size > budget {
                return Err(HaltingError::BudgetExceeded {
                    states: class.states(),
                    size,
                    budget,
                });
            }
            const CHUNK: u64 = 4096;
            (0..size.div_ceil(CHUNK))
                .into_par_iter()
                .fold(identity, |acc, chunk| {
                    let end = ((chunk + 1) * CHUNK).min(size);
                    (chunk * CHUNK..end).fold(acc, visit)
                })
                .reduce(identity, combine)
        }
        Selection::Indices(indices) => indices
            .par_iter()
            .copied()
            .with_min_len(1024)
            .fold(identity, visit)
            .reduce(identity, combine),
    };
    Ok(Sweep {
        report: done.report,
        outputs: done.outputs,
    })
}

/// Exhaustive halting census of a class.
pub fn run_census(
    class: MachineClass,
    cutoff: u64,
    blank: BlankMode,
    detectors: Detectors,
    budget: u64,
) -> Result<CensusReport, HaltingError> {
    Ok(sweep(class, Selection::Exhaustive { budget }, cutoff, blank, detectors, false)?.report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeaverStatus {
    Exact,
    LowerBound,
}

/// Why a Busy Beaver record is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactnessBasis {
    /// Every run that hit the cutoff was proven non-halting.
    AllNonHaltersProven,
    /// The stable cutoff reached the configured known step bound.
    KnownCutoffReached,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusyBeaverRecord {
    pub states: u32,
    pub sigma: u64,
    pub s_max: u64,
    pub status: BeaverStatus,
    pub basis: ExactnessBasis,
    /// Cutoff of the last census, at which the values were stable.
    pub stable_cutoff: u64,
    pub halting: u64,
    pub unresolved: u64,
    pub censuses: Vec<CensusReport>,
}

/// Doubling schedule `1, 2, 4, ..., 2^k` with `2^k >= limit`.
pub fn doubling_schedule(limit: u64) -> Vec<u64> {
    let mut out = vec![1];
    while *out.last().unwrap() < limit {
        let next = out.last().unwrap() * 2;
        out.push(next);
    }
    out
}

/// Runs blank-0 censuses with escalating cutoffs until the halting count and
/// both maxima agree across two consecutive cutoffs.
pub fn busy_beaver(
    class: MachineClass,
    schedule: &[u64],
    cutoffs: &CutoffTable,
    budget: u64,
) -> Result<BusyBeaverRecord, HaltingError> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) || schedule[0] == 0 {
        return Err(HaltingError::BadSchedule);
    }
    let mut censuses: Vec<CensusReport> = Vec::new();
    let mut stable = false;
    for &cutoff in schedule {
        let report = run_census(class, cutoff, BlankMode::Zero, Detectors::ALL, budget)?;
        let same = censuses.last().is_some_and(|prev| {
            prev.halting == report.halting
                && prev.max_steps_observed == report.max_steps_observed
                && prev.max_ones_observed == report.max_ones_observed
        });
        censuses.push(report);
        if same {
            stable = true;
            break;
        }
    }
    let last = censuses.last().expect("schedule is non-empty");
    let known = cutoffs.known(class.states());
    let basis = if !stable {
        ExactnessBasis::None
    } else if last.unresolved == 0 {
        ExactnessBasis::AllNonHaltersProven
    } else if known.is_some_and(|k| last.cutoff_used >= k.steps) {
        ExactnessBasis::KnownCutoffReached
    } else {
        ExactnessBasis::None
    };
    Ok(BusyBeaverRecord {
        states: class.states(),
        sigma: last.max_ones_observed,
        s_max: last.max_steps_observed,
        status: if basis == ExactnessBasis::None {
            BeaverStatus::LowerBound
        } else {
            BeaverStatus::Exact
        },
        basis,
        stable_cutoff: last.cutoff_used,
        halting: last.halting,
        unresolved: last.unresolved,
        censuses,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffProvenance {
    /// Re-established by exhaustive census.
    Derived,
    /// Accepted published constant.
    Published,
    /// Configured fallback for classes without a known bound.
    EducatedGuess,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownBeaver {
    pub states: u32,
    pub sigma: u64,
    pub steps: u64,
    pub provenance: CutoffProvenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cutoff {
    pub steps: u64,
    pub provenance: CutoffProvenance,
}

/// Versioned table of known step bounds, loaded from TOML.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffTable {
    pub version: u32,
    pub fallback_steps: u64,
    pub known: Vec<KnownBeaver>,
}

impl CutoffTable {
    pub fn from_toml(text: &str) -> Result<Self, HaltingError> {
        let table: CutoffTable = toml::from_str(text).map_err(|e| HaltingError::Config(e.to_string()))?;
        if table.fallback_steps == 0 || table.known.iter().any(|k| k.steps == 0) {
            return Err(HaltingError::Config("step bounds must be positive".into()));
        }
        Ok(table)
    }

    /// The table shipped in `config/cutoffs.toml`.
    pub fn builtin() -> Self {
        Self::from_toml(CUTOFFS_TOML).expect("bundled cutoff config parses")
    }

    pub fn known(&self, states: u32) -> Option<&KnownBeaver> {
        self.known.iter().find(|k| k.states == states)
    }

    pub fn with_fallback(mut self, steps: u64) -> Self {
        self.fallback_steps = steps;
        self
    }

    /// `S(n,2)` when known, otherwise the configured fallback.
    pub fn cutoff_for(&self, class: MachineClass) -> Cutoff {
        match self.known(class.states()) {
            Some(k) => Cutoff {
                steps: k.steps,
                provenance: k.provenance,
            },
            None => Cutoff {
                steps: self.fallback_steps,
                provenance: CutoffProvenance::EducatedGuess,
            },
        }
    }
}

impl Default for CutoffTable {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::simulate;

    fn class(n: u32) -> MachineClass {
        MachineClass::new(n).unwrap()
    }

    #[test]
    fn single_state_census() {
        let r = run_census(class(1), 10, BlankMode::Zero, Detectors::ALL, u64::MAX).unwrap();
        assert_eq!(r.total_machines, 36);
        assert_eq!(r.halting, 12);
        assert_eq!(r.unresolved, 0);
        assert_eq!(r.halting + r.non_halting_proven + r.unresolved, r.total_runs);
        assert_eq!(r.max_steps_observed, 1);
    }

    #[test]
    fn two_state_census_matches_dual_blank_count() {
        let zero = run_census(class(2), 6, BlankMode::Zero, Detectors::ALL, u64::MAX).unwrap();
        let both = run_census(class(2), 6, BlankMode::Both, Detectors::ALL, u64::MAX).unwrap();
        assert_eq!(zero.halting, 3044);
        assert_eq!(both.halting, 6088);
        assert_eq!(both.total_machines, 10_000);
        assert_eq!(both.total_runs, 20_000);
        let long = run_census(class(2), 1000, BlankMode::Both, Detectors::ALL, u64::MAX).unwrap();
        assert_eq!(long.halting, 6088);
        assert!(zero.max_steps_observed <= zero.cutoff_used);
    }

    #[test]
    fn census_monotone_in_cutoff() {
        let mut prev = 0;
        for cutoff in 1..=8 {
            let r = run_census(class(2), cutoff, BlankMode::Zero, Detectors::ALL, u64::MAX).unwrap();
            assert!(r.halting >= prev);
            prev = r.halting;
        }
    }

    #[test]
    fn detectors_do_not_change_halting_count() {
        let with = run_census(class(2), 50, BlankMode::Both, Detectors::ALL, u64::MAX).unwrap();
        let without = run_census(class(2), 50, BlankMode::Both, Detectors::NONE, u64::MAX).unwrap();
        assert_eq!(with.halting, without.halting);
        assert_eq!(without.non_halting_proven, 0);
        assert!(with.non_halting_proven > 0);
        // translated cyclers are left to the cutoff
        assert!(with.unresolved > 0);
        assert_eq!(with.halting + with.non_halting_proven + with.unresolved, with.total_runs);
    }

    #[test]
    fn detector_soundness_spot_check() {
        let c = class(3);
        let mut clf = Classifier::new(Detectors::ALL);
        let mut checked = 0;
        for index in (0..c.rulespace_size()).step_by(997) {
            let t = decode_machine(index, c).unwrap();
            for blank in [0, 1] {
                match clf.classify(&t, 21, blank) {
                    Verdict::Escapes { .. } | Verdict::Cycles { .. } => {
                        assert!(!simulate(&t, 210, blank).unwrap().halted(), "machine {index}");
                        checked += 1;
                    }
                    _ => {}
                }
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn budget_refusal() {
        let err = run_census(class(4), 107, BlankMode::Zero, Detectors::ALL, DEFAULT_EXHAUSTIVE_BUDGET).unwrap_err();
        assert!(matches!(err, HaltingError::BudgetExceeded { states: 4, .. }));
        assert!(err.to_string().contains("sampled"));
    }

    #[test]
    fn busy_beaver_small() {
        let table = CutoffTable::builtin();
        let b1 = busy_beaver(class(1), &doubling_schedule(64), &table, u64::MAX).unwrap();
        assert_eq!((b1.sigma, b1.s_max, b1.status), (1, 1, BeaverStatus::Exact));
        let b2 = busy_beaver(class(2), &doubling_schedule(64), &table, u64::MAX).unwrap();
        assert_eq!((b2.sigma, b2.s_max, b2.status), (4, 6, BeaverStatus::Exact));
        assert_eq!(b1.basis, ExactnessBasis::AllNonHaltersProven);
        assert_eq!(b2.basis, ExactnessBasis::KnownCutoffReached);
        assert!(b2.s_max >= b2.sigma);
    }

    #[test]
    fn schedule_validation() {
        let t = CutoffTable::builtin();
        assert!(busy_beaver(class(1), &[], &t, u64::MAX).is_err());
        assert!(busy_beaver(class(1), &[4, 2], &t, u64::MAX).is_err());
        assert_eq!(doubling_schedule(20), vec![1, 2, 4, 8, 16, 32]);
    }

    #[test]
    fn cutoffs_from_config() {
        let t = CutoffTable::builtin();
        assert_eq!(t.version, 1);
        assert_eq!(t.cutoff_for(class(2)).steps, 6);
        assert_eq!(t.cutoff_for(class(3)).steps, 21);
        let four = t.cutoff_for(class(4));
        assert_eq!(four.steps, 107);
        assert_eq!(four.provenance, CutoffProvenance::Published);
        let five = t.cutoff_for(class(5));
        assert_eq!(five, Cutoff { steps: 500, provenance: CutoffProvenance::EducatedGuess });
        assert_eq!(t.clone().with_fallback(2000).cutoff_for(class(5)).steps, 2000);
        assert!(CutoffTable::from_toml("version = 1\nfallback_steps = 0\nknown = []").is_err());
    }

    #[test]
    fn schedule_independence() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    sweep(class(2), Selection::Exhaustive { budget: u64::MAX }, 6, BlankMode::Both, Detectors::ALL, true)
                        .unwrap()
                })
        };
        let a = run(1);
        let b = run(5);
        assert_eq!(a.report, b.report);
        assert_eq!(a.outputs, b.outputs);
    }
}
