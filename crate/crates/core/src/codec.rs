//! A two-mode lossless code for bit strings, used as a compression-style
//! upper bound on program-size complexity.
//!
//! Layout (bits, most significant first):
//!
//! ```text
//! tag(2) | gamma(len) | payload
//! ```
//!
//! * tag `00`, literal: the `len` raw bits.
//! * tag `01`, runs: a sequence of runs `gamma(block_len) | block | gamma(repeats)`
//!   whose expansions concatenate to exactly `len` bits.
//!
//! `gamma(x)` is the Elias gamma code of `x >= 1`. Tags `10` and `11` are
//! reserved. Every codeword is self-delimiting.

use std::fmt;

use thiserror::Error;

use crate::dist::is_bits;

/// Longest block considered by the run encoder.
pub const MAX_BLOCK: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("cannot encode an empty string")]
    Empty,
    #[error("'{0}' is not a bit string")]
    NotBits(String),
    #[error("codeword truncated")]
    Truncated,
    #[error("reserved mode tag {0:02b}")]
    ReservedTag(u8),
    #[error("runs expand past the declared length of {0} bits")]
    Overrun(u64),
    #[error("{0} unexpected bits after the end of the codeword")]
    TrailingBits(usize),
    #[error("invalid hex: {0}")]
    Hex(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeMode {
    Literal,
    Runs,
}

impl fmt::Display for CodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodeMode::Literal => "literal",
            CodeMode::Runs => "runs",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    bits: Vec<bool>,
}

impl Codeword {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Total length in bits, header included.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn mode(&self) -> Option<CodeMode> {
        match (self.bits.first(), self.bits.get(1)) {
            (Some(false), Some(false)) => Some(CodeMode::Literal),
            (Some(false), Some(true)) => Some(CodeMode::Runs),
            _ => None,
        }
    }

    /// Length of the tag plus the gamma-coded length field.
    pub fn header_len(&self) -> Option<usize> {
        let mut r = Reader::new(&self.bits);
        r.take(2).ok()?;
        r.gamma().ok()?;
        Some(r.pos)
    }

    /// Packs the bits MSB first, zero-padded to a whole byte.
    pub fn to_hex(&self) -> String {
        self.bits
            .chunks(8)
            .map(|chunk| {
                let byte = chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)));
                format!("{byte:02x}")
            })
            .collect()
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn gamma_len(x: u64) -> usize {
    debug_assert!(x >= 1);
    2 * (63 - x.leading_zeros() as usize) + 1
}

fn push_gamma(out: &mut Vec<bool>, x: u64) {
    debug_assert!(x >= 1);
    let width = 64 - x.leading_zeros() as usize;
    out.extend(std::iter::repeat_n(false, width - 1));
    for i in (0..width).rev() {
        out.push((x >> i) & 1 == 1);
    }
}

struct Reader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bits: &'a [bool]) -> Self {
        Self { bits, pos: 0 }
    }

    fn bit(&mut self) -> Result<bool, CodecError> {
        let b = *self.bits.get(self.pos).ok_or(CodecError::Truncated)?;
        self.pos += 1;
        Ok(b)
    }

    fn take(&mut self, n: usize) -> Result<&'a [bool], CodecError> {
        if self.pos + n > self.bits.len() {
            return Err(CodecError::Truncated);
        }
        let s = &self.bits[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn gamma(&mut self) -> Result<u64, CodecError> {
        let mut zeros = 0;
        while !self.bit()? {
            zeros += 1;
            if zeros > 63 {
                return Err(CodecError::Truncated);
            }
        }
        let mut x = 1u64;
        for _ in 0..zeros {
            x = (x << 1) | self.bit()? as u64;
        }
        Ok(x)
    }
}

#[derive(Debug, Clone, Copy)]
struct Run {
    start: usize,
    block: usize,
    repeats: usize,
}

fn run_cost(block: usize, repeats: usize) -> usize {
    gamma_len(block as u64) + block + gamma_len(repeats as u64)
}

/// Minimum-cost cover of `s` by runs, by dynamic programming over prefix
/// lengths. For each block length only a bounded set of repeat counts is
/// tried, so the cover is optimal among those candidates.
fn plan_runs(s: &[bool]) -> Vec<Run> {
    let n = s.len();
    let mut best = vec![usize::MAX; n + 1];
    let mut choice: Vec<Option<Run>> = vec![None; n + 1];
    best[0] = 0;
    for i in 0..n {
        if best[i] == usize::MAX {
            continue;
        }
        for block in 1..=MAX_BLOCK.min(n - i) {
            let mut max_rep = 1;
            while i + (max_rep + 1) * block <= n
                && s[i + max_rep * block..i + (max_rep + 1) * block] == s[i..i + block]
            {
                max_rep += 1;
            }
            let candidates = (1..=max_rep.min(8)).chain(std::iter::once(max_rep));
            for repeats in candidates {
                let end = i + block * repeats;
                let cost = best[i] + run_cost(block, repeats);
                // strict < keeps the earliest, shortest-block choice on ties
                if cost < best[end] {
                    best[end] = cost;
                    choice[end] = Some(Run { start: i, block, repeats });
                }
            }
        }
    }
    let mut runs = Vec::new();
    let mut end = n;
    while end > 0 {
        let run = choice[end].expect("every prefix is reachable with block length 1");
        runs.push(run);
        end = run.start;
    }
    runs.reverse();
    runs
}

fn parse_bits(s: &str) -> Result<Vec<bool>, CodecError> {
    if s.is_empty() {
        return Err(CodecError::Empty);
    }
    if !is_bits(s) {
        return Err(CodecError::NotBits(s.to_string()));
    }
    Ok(s.bytes().map(|b| b == b'1').collect())
}

fn literal(bits: &[bool]) -> Vec<bool> {
    let mut out = vec![false, false];
    push_gamma(&mut out, bits.len() as u64);
    out.extend_from_slice(bits);
    out
}

fn runs(bits: &[bool]) -> Vec<bool> {
    let mut out = vec![false, true];
    push_gamma(&mut out, bits.len() as u64);
    for run in plan_runs(bits) {
        push_gamma(&mut out, run.block as u64);
        out.extend_from_slice(&bits[run.start..run.start + run.block]);
        push_gamma(&mut out, run.repeats as u64);
    }
    out
}

/// Encodes in whichever mode is shorter; literal wins ties.
pub fn encode(s: &str) -> Result<Codeword, CodecError> {
    let bits = parse_bits(s)?;
    let lit = literal(&bits);
    let rle = runs(&bits);
    Ok(Codeword::from_bits(if rle.len() < lit.len() { rle } else { lit }))
}

pub fn decode(code: &Codeword) -> Result<String, CodecError> {
    let (s, used) = decode_prefix(code.bits())?;
    if used != code.len() {
        return Err(CodecError::TrailingBits(code.len() - used));
    }
    Ok(s)
}

/// Decodes one codeword from the front of `bits`, returning the string and
/// the number of bits consumed.
pub fn decode_prefix(bits: &[bool]) -> Result<(String, usize), CodecError> {
    let mut r = Reader::new(bits);
    let tag = r.take(2)?;
    let tag = (tag[0] as u8) << 1 | tag[1] as u8;
    let len = r.gamma()?;
    let mut out = String::with_capacity(len as usize);
    let push = |out: &mut String, b: &[bool]| out.extend(b.iter().map(|&b| if b { '1' } else { '0' }));
    match tag {
        0b00 => {
            let len = usize::try_from(len).map_err(|_| CodecError::Truncated)?;
            push(&mut out, r.take(len)?);
        }
        0b01 => {
            let mut written = 0u64;
            while written < len {
                let block = r.gamma()?;
                if block > len - written {
                    return Err(CodecError::Overrun(len));
                }
                let pattern = r.take(block as usize)?;
                let repeats = r.gamma()?;
                if block.checked_mul(repeats).is_none_or(|w| w > len - written) {
                    return Err(CodecError::Overrun(len));
                }
                for _ in 0..repeats {
                    push(&mut out, pattern);
                }
                written += block * repeats;
            }
        }
        other => return Err(CodecError::ReservedTag(other)),
    }
    Ok((out, r.pos))
}

/// Decodes the hex form from [`Codeword::to_hex`]. Padding after the
/// codeword must be fewer than eight zero bits.
pub fn decode_hex(hex: &str) -> Result<String, CodecError> {
    let hex = hex.trim();
    if !hex.len().is_multiple_of(2) {
        return Err(CodecError::Hex("odd number of digits".into()));
    }
    let mut bits = Vec::with_capacity(hex.len() * 4);
    for i in (0..hex.len()).step_by(2) {
        let byte = u8::from_str_radix(&hex[i..i + 2], 16).map_err(|e| CodecError::Hex(e.to_string()))?;
        bits.extend((0..8).rev().map(|j| (byte >> j) & 1 == 1));
    }
    let (s, used) = decode_prefix(&bits)?;
    let rest = &bits[used..];
    if rest.len() >= 8 || rest.iter().any(|&b| b) {
        return Err(CodecError::TrailingBits(rest.len()));
    }
    Ok(s)
}

pub fn code_length(s: &str) -> Result<usize, CodecError> {
    Ok(encode(s)?.len())
}

/// Upper bound on the program-size complexity of `s`, in bits, up to the
/// fixed size of the decoder.
pub fn k_upper_bound(s: &str) -> Result<usize, CodecError> {
    code_length(s)
}

/// A complexity estimator over bit strings. `None` means the estimator has
/// no opinion on that string.
pub trait ComplexityEstimator {
    fn name(&self) -> &str;
    fn estimate(&self, s: &str) -> Option<f64>;
}

/// The literal/runs code above as an estimator.
#[derive(Debug, Clone, Copy, Default)]
pub struct BaselineCodec;

impl ComplexityEstimator for BaselineCodec {
    fn name(&self) -> &str {
        "baseline"
    }

    fn estimate(&self, s: &str) -> Option<f64> {
        k_upper_bound(s).ok().map(|b| b as f64)
    }
}
