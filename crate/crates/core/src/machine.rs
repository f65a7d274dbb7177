//! n-state 2-symbol Turing machines: indexing, textual dumps and simulation
//! on a two-way unbounded tape.
//!
//! A machine in the class `(n,2)` has `2n` table entries, one per
//! `(state, read bit)` pair. Each entry holds one of `4n + 2` actions: a
//! regular step `(write, move, next)` or a halting write that writes a bit at
//! the head and stops without moving. The whole table is therefore a number
//! in base `4n + 2` with `2n` digits, which is the machine index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest state count whose rulespace still fits in a `u64` index.
pub const MAX_STATES: u32 = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("a machine class needs at least one state")]
    NoStates,
    #[error("{0} states exceed the supported maximum of {MAX_STATES}")]
    TooManyStates(u32),
    #[error("machine index {index} is out of range for a rulespace of {size} machines")]
    IndexOutOfRange { index: u64, size: u64 },
    #[error("table for {states} states needs {expected} entries, got {got}")]
    WrongEntryCount { states: u32, expected: usize, got: usize },
    #[error("entry {entry} refers to state {next}, but the class has {states} states")]
    BadNextState { entry: usize, next: u32, states: u32 },
    #[error("step cap must be at least 1")]
    ZeroStepCap,
    #[error("cannot parse table line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// The class `(n,2)` of machines with `n` non-halting states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MachineClass {
    states: u32,
}

impl MachineClass {
    pub fn new(states: u32) -> Result<Self, MachineError> {
        if states == 0 {
            return Err(MachineError::NoStates);
        }
        if states > MAX_STATES {
            return Err(MachineError::TooManyStates(states));
        }
        Ok(Self { states })
    }

    pub fn states(self) -> u32 {
        self.states
    }

    /// Number of distinct actions per table entry, `4n + 2`.
    pub fn radix(self) -> u64 {
        4 * self.states as u64 + 2
    }

    /// Number of table entries, `2n`.
    pub fn entries(self) -> usize {
        2 * self.states as usize
    }

    /// `(4n + 2)^(2n)`.
    pub fn rulespace_size(self) -> u64 {
        self.radix().pow(self.entries() as u32)
    }

    /// Maps a single base-`(4n+2)` digit to its action.
    ///
    /// Digits `0..4n` enumerate steps in lexicographic `(write, move, next)`
    /// order with `Left < Right`; `4n` and `4n + 1` are the halting writes of
    /// 0 and 1.
    pub fn action_for_digit(self, digit: u64) -> Action {
        let n = self.states as u64;
        debug_assert!(digit < self.radix());
        if digit >= 4 * n {
            return Action::Halt {
                write: (digit - 4 * n) as u8,
            };
        }
        let write = (digit / (2 * n)) as u8;
        let mv = if (digit / n).is_multiple_of(2) { Move::Left } else { Move::Right };
        let next = (digit % n) as u32;
        Action::Step { write, mv, next }
    }

    pub fn digit_for_action(self, action: Action) -> u64 {
        let n = self.states as u64;
        match action {
            Action::Halt { write } => 4 * n + write as u64,
            Action::Step { write, mv, next } => {
                let m = match mv {
                    Move::Left => 0,
                    Move::Right => 1,
                };
                write as u64 * 2 * n + m * n + next as u64
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    Left,
    Right,
}

impl Move {
    pub fn flipped(self) -> Self {
        match self {
            Move::Left => Move::Right,
            Move::Right => Move::Left,
        }
    }

    fn delta(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Right => 1,
        }
    }
}

/// One table entry. `next` is a zero-based state index; the textual format
/// and `Display` use one-based state numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Step { write: u8, mv: Move, next: u32 },
    Halt { write: u8 },
}

impl Action {
    fn mirrored(self) -> Self {
        match self {
            Action::Step { write, mv, next } => Action::Step {
                write,
                mv: mv.flipped(),
                next,
            },
            halt => halt,
        }
    }
}

/// The full transition function of an `(n,2)` machine.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransitionTable {
    class: MachineClass,
    entries: Vec<Action>,
}

impl TransitionTable {
    /// Builds a table from entries ordered `(state 1, read 0), (state 1, read
    /// 1), (state 2, read 0), ...`.
    pub fn from_entries(class: MachineClass, entries: Vec<Action>) -> Result<Self, MachineError> {
        if entries.len() != class.entries() {
            return Err(MachineError::WrongEntryCount {
                states: class.states,
                expected: class.entries(),
                got: entries.len(),
            });
        }
        for (entry, action) in entries.iter().enumerate() {
            if let Action::Step { write, next, .. } = *action {
                if next >= class.states {
                    return Err(MachineError::BadNextState {
                        entry,
                        next: next + 1,
                        states: class.states,
                    });
                }
                debug_assert!(write <= 1);
            }
        }
        Ok(Self { class, entries })
    }

    pub fn class(&self) -> MachineClass {
        self.class
    }

    pub fn entries(&self) -> &[Action] {
        &self.entries
    }

    /// Action for a zero-based state and a read bit.
    #[inline]
    pub fn action(&self, state: u32, read: u8) -> Action {
        self.entries[2 * state as usize + read as usize]
    }

    /// The machine index of this table; inverse of [`decode_machine`].
    pub fn index(&self) -> u64 {
        encode_machine(self)
    }
}

/// Decodes a machine index. Entry `(state s, bit b)` is digit `2(s-1) + b`
/// of the index in base `4n + 2`, least significant digit first.
pub fn decode_machine(index: u64, class: MachineClass) -> Result<TransitionTable, MachineError> {
    let size = class.rulespace_size();
    if index >= size {
        return Err(MachineError::IndexOutOfRange { index, size });
    }
    let radix = class.radix();
    let mut rest = index;
    let entries = (0..class.entries())
        .map(|_| {
            let digit = rest % radix;
            rest /= radix;
            class.action_for_digit(digit)
        })
        .collect();
    Ok(TransitionTable { class, entries })
}

pub fn encode_machine(table: &TransitionTable) -> u64 {
    let class = table.class;
    table
        .entries
        .iter()
        .rev()
        .fold(0, |acc, &action| acc * class.radix() + class.digit_for_action(action))
}

/// Flips the direction of every step. Halting writes are unchanged.
pub fn mirror(table: &TransitionTable) -> TransitionTable {
    TransitionTable {
        class: table.class,
        entries: table.entries.iter().map(|a| a.mirrored()).collect(),
    }
}

impl fmt::Display for TransitionTable {
    /// One line per entry: `state,read -> write,move,next` or
    /// `state,read -> write,HALT`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, action) in self.entries.iter().enumerate() {
            let state = i / 2 + 1;
            let read = i % 2;
            match *action {
                Action::Step { write, mv, next } => {
                    let m = if mv == Move::Left { 'L' } else { 'R' };
                    writeln!(f, "{state},{read} -> {write},{m},{}", next + 1)?;
                }
                Action::Halt { write } => writeln!(f, "{state},{read} -> {write},HALT")?,
            }
        }
        Ok(())
    }
}

impl FromStr for TransitionTable {
    type Err = MachineError;

    /// Parses the `Display` format. Entries may appear in any order, but every
    /// `(state, read)` pair must be given exactly once.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let parse_err = |line: usize, reason: &str| MachineError::Parse {
            line,
            reason: reason.to_string(),
        };
        let mut rows: Vec<(usize, usize, Action)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let (lhs, rhs) = raw
                .split_once("->")
                .ok_or_else(|| parse_err(line, "missing '->'"))?;
            let lhs: Vec<&str> = lhs.trim().split(',').map(str::trim).collect();
            let rhs: Vec<&str> = rhs.trim().split(',').map(str::trim).collect();
            if lhs.len() != 2 {
                return Err(parse_err(line, "left side must be 'state,read'"));
            }
            let state: usize = lhs[0].parse().map_err(|_| parse_err(line, "bad state"))?;
            let read = parse_bit(lhs[1]).ok_or_else(|| parse_err(line, "bad read bit"))?;
            if state == 0 {
                return Err(parse_err(line, "states are numbered from 1"));
            }
            let write = rhs
                .first()
                .and_then(|w| parse_bit(w))
                .ok_or_else(|| parse_err(line, "bad write bit"))?;
            let action = match rhs.as_slice() {
                [_, halt] if halt.eq_ignore_ascii_case("HALT") => Action::Halt { write },
                [_, mv, next] => {
                    let mv = match *mv {
                        "L" | "l" => Move::Left,
                        "R" | "r" => Move::Right,
                        _ => return Err(parse_err(line, "move must be L or R")),
                    };
                    let next: u32 = next.parse().map_err(|_| parse_err(line, "bad next state"))?;
                    if next == 0 {
                        return Err(parse_err(line, "states are numbered from 1"));
                    }
                    Action::Step {
                        write,
                        mv,
                        next: next - 1,
                    }
                }
                _ => return Err(parse_err(line, "right side must be 'write,move,next' or 'write,HALT'")),
            };
            rows.push((state - 1, read as usize, action));
        }
        let states = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0) as u32;
        let class = MachineClass::new(states)?;
        let mut entries: Vec<Option<Action>> = vec![None; class.entries()];
        for (state, read, action) in rows {
            let slot = &mut entries[2 * state + read];
            if slot.is_some() {
                return Err(MachineError::Parse {
                    line: 0,
                    reason: format!("duplicate entry for {},{}", state + 1, read),
                });
            }
            *slot = Some(action);
        }
        let entries = entries
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                a.ok_or_else(|| MachineError::Parse {
                    line: 0,
                    reason: format!("missing entry for {},{}", i / 2 + 1, i % 2),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        TransitionTable::from_entries(class, entries)
    }
}

fn parse_bit(s: &str) -> Option<u8> {
    match s {
        "0" => Some(0),
        "1" => Some(1),
        _ => None,
    }
}

/// Two-way unbounded tape addressed by signed offsets from the start cell.
#[derive(Debug, Clone)]
pub struct Tape {
    cells: Vec<u8>,
    /// Index in `cells` of offset 0.
    origin: usize,
    blank: u8,
    head: i64,
    min_visited: i64,
    max_visited: i64,
}

impl Tape {
    pub fn new(blank: u8) -> Self {
        Self::with_capacity(blank, 16)
    }

    pub fn with_capacity(blank: u8, capacity: usize) -> Self {
        let capacity = capacity.max(2);
        Self {
            cells: vec![blank; capacity],
            origin: capacity / 2,
            blank,
            head: 0,
            min_visited: 0,
            max_visited: 0,
        }
    }

    /// Clears the tape back to all-blank with the head at offset 0.
    pub fn reset(&mut self, blank: u8) {
        self.blank = blank;
        self.cells.fill(blank);
        self.origin = self.cells.len() / 2;
        self.head = 0;
        self.min_visited = 0;
        self.max_visited = 0;
    }

    pub fn blank(&self) -> u8 {
        self.blank
    }

    pub fn head(&self) -> i64 {
        self.head
    }

    pub fn min_visited(&self) -> i64 {
        self.min_visited
    }

    pub fn max_visited(&self) -> i64 {
        self.max_visited
    }

    pub fn get(&self, offset: i64) -> u8 {
        let idx = self.origin as i64 + offset;
        if idx < 0 || idx >= self.cells.len() as i64 {
            self.blank
        } else {
            self.cells[idx as usize]
        }
    }

    #[inline]
    pub fn read(&self) -> u8 {
        self.get(self.head)
    }

    #[inline]
    pub fn write(&mut self, bit: u8) {
        let idx = self.ensure(self.head);
        self.cells[idx] = bit;
    }

    /// Moves the head and extends the visited segment.
    #[inline]
    pub fn shift(&mut self, mv: Move) {
        self.head += mv.delta();
        self.min_visited = self.min_visited.min(self.head);
        self.max_visited = self.max_visited.max(self.head);
    }

    fn ensure(&mut self, offset: i64) -> usize {
        let idx = self.origin as i64 + offset;
        if idx < 0 {
            let grow = (self.cells.len()).max((-idx) as usize);
            let mut cells = vec![self.blank; grow];
            cells.extend_from_slice(&self.cells);
            self.cells = cells;
            self.origin += grow;
        } else if idx as usize >= self.cells.len() {
            let grow = (self.cells.len()).max(idx as usize + 1 - self.cells.len());
            self.cells.resize(self.cells.len() + grow, self.blank);
        }
        (self.origin as i64 + offset) as usize
    }

    /// Contents of the visited segment, `min_visited..=max_visited`.
    pub fn visited(&self) -> impl Iterator<Item = u8> + '_ {
        (self.min_visited..=self.max_visited).map(move |o| self.get(o))
    }

    pub fn visited_len(&self) -> usize {
        (self.max_visited - self.min_visited + 1) as usize
    }
}

/// Result of running a machine from a blank tape.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RunOutcome {
    Halted {
        steps: u64,
        ones: u64,
        output: String,
    },
    CutoffExceeded {
        cap: u64,
    },
}

impl RunOutcome {
    pub fn output(&self) -> Option<&str> {
        match self {
            RunOutcome::Halted { output, .. } => Some(output),
            RunOutcome::CutoffExceeded { .. } => None,
        }
    }

    pub fn halted(&self) -> bool {
        matches!(self, RunOutcome::Halted { .. })
    }
}

/// Whether the last step halted the machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepResult {
    Continue,
    Halted,
}

/// Step-by-step execution state of one machine. Used directly by the
/// non-halting detectors; [`simulate`] wraps it for plain runs.
#[derive(Debug, Clone)]
pub struct Execution<'a> {
    table: &'a TransitionTable,
    tape: Tape,
    state: u32,
    steps: u64,
    halted: bool,
}

impl<'a> Execution<'a> {
    pub fn new(table: &'a TransitionTable, blank: u8) -> Self {
        Self::with_tape(table, Tape::new(blank))
    }

    /// Starts a run on a recycled tape buffer, which is reset first.
    pub fn with_tape(table: &'a TransitionTable, mut tape: Tape) -> Self {
        let blank = tape.blank();
        tape.reset(blank);
        Self {
            table,
            tape,
            state: 0,
            steps: 0,
            halted: false,
        }
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn tape(&self) -> &Tape {
        &self.tape
    }

    pub fn into_tape(self) -> Tape {
        self.tape
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    #[inline]
    pub fn step(&mut self) -> StepResult {
        debug_assert!(!self.halted);
        let read = self.tape.read();
        self.steps += 1;
        match self.table.action(self.state, read) {
            Action::Halt { write } => {
                self.tape.write(write);
                self.halted = true;
                StepResult::Halted
            }
            Action::Step { write, mv, next } => {
                self.tape.write(write);
                self.tape.shift(mv);
                self.state = next;
                StepResult::Continue
            }
        }
    }

    /// Outcome for a halted execution.
    pub fn halted_outcome(&self) -> RunOutcome {
        debug_assert!(self.halted);
        let mut output = String::with_capacity(self.tape.visited_len());
        let mut ones = 0;
        for bit in self.tape.visited() {
            ones += bit as u64;
            output.push(if bit == 1 { '1' } else { '0' });
        }
        RunOutcome::Halted {
            steps: self.steps,
            ones,
            output,
        }
    }
}

/// Runs `table` from an all-`blank` tape for at most `step_cap` steps.
pub fn simulate(table: &TransitionTable, step_cap: u64, blank: u8) -> Result<RunOutcome, MachineError> {
    if step_cap == 0 {
        return Err(MachineError::ZeroStepCap);
    }
    let mut exec = Execution::new(table, blank);
    while exec.steps() < step_cap {
        if exec.step() == StepResult::Halted {
            return Ok(exec.halted_outcome());
        }
    }
    Ok(RunOutcome::CutoffExceeded { cap: step_cap })
}
