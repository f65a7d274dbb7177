mod commands;
mod error;
mod manifest;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use algoprob::eca::{Boundary, Slicing};
use algoprob::stats::AlignPolicy;
use algoprob::BlankMode;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "algoprob", version, about = "Empirical algorithmic probability from small Turing machines")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    group: Group,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// Worker threads (default: one per core). Never changes results.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Seed for every random draw a command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Step cutoff, overriding the configured Busy Beaver bound.
    #[arg(long, global = true)]
    pub cutoff: Option<u64>,
    /// Largest rulespace an exhaustive sweep may visit.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    pub out_format: OutFormat,
    #[arg(long, global = true, default_value = "algoprob-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutFormat {
    Csv,
    Json,
}

impl OutFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutFormat::Csv => "csv",
            OutFormat::Json => "json",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Group {
    /// Output distributions of Turing machines and complexity estimates.
    #[command(subcommand)]
    Ctm(CtmCmd),
    /// Halting censuses and Busy Beaver values.
    #[command(subcommand)]
    Bb(BbCmd),
    /// Elementary cellular automata.
    #[command(subcommand)]
    Eca(EcaCmd),
    /// Binarized price series.
    #[command(subcommand)]
    Market(MarketCmd),
    /// The baseline self-delimiting code.
    #[command(subcommand)]
    Codec(CodecCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Subcommand)]
pub enum CtmCmd {
    /// Compute D(n).
    Dist {
        #[arg(short = 'n', long = "states")]
        states: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
        mode: ModeArg,
        /// Machines drawn in sampled mode.
        #[arg(long, default_value_t = 100_000)]
        size: u64,
        #[arg(long, default_value_t = BlankMode::Both)]
        blank: BlankMode,
    },
    /// Coding-theorem complexity of bit strings.
    K {
        #[arg(required = true)]
        strings: Vec<String>,
        /// States of the exhaustive D(n) to use.
        #[arg(short = 'n', long = "states", default_value_t = 2)]
        states: u32,
        #[arg(long, default_value_t = BlankMode::Both)]
        blank: BlankMode,
        /// Read the distribution from a CSV or JSON file instead.
        #[arg(long)]
        dist: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum BbCmd {
    /// Halting census at one cutoff.
    Census {
        #[arg(short = 'n', long = "states")]
        states: u32,
        #[arg(long, default_value_t = BlankMode::Both)]
        blank: BlankMode,
    },
    /// Busy Beaver values from doubling cutoffs.
    Beaver {
        #[arg(short = 'n', long = "states")]
        states: u32,
        /// Largest cutoff tried (default: ten times the configured bound).
        #[arg(long)]
        limit: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryArg {
    Cyclic,
    Fixed,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Cyclic => Boundary::Cyclic,
            BoundaryArg::Fixed => Boundary::Fixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitArg {
    Single,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlicingArg {
    Rows,
    Columns,
}

impl From<SlicingArg> for Slicing {
    fn from(s: SlicingArg) -> Self {
        match s {
            SlicingArg::Rows => Slicing::Rows,
            SlicingArg::Columns => Slicing::Columns,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvolutionArgs {
    #[arg(long, default_value_t = 63)]
    pub width: usize,
    #[arg(long, default_value_t = 63)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Cyclic)]
    pub boundary: BoundaryArg,
    /// Single 1 in the middle, or a seeded random row.
    #[arg(long, value_enum, default_value_t = InitArg::Single)]
    pub init: InitArg,
    /// Share of 1s in a random initial row.
    #[arg(long, default_value_t = 0.5)]
    pub density: f64,
}

#[derive(Debug, Subcommand)]
pub enum EcaCmd {
    /// Pooled k-tuple distributions over a set of rules.
    Dist {
        /// `all`, a list `30,110` or a range `0..255`.
        #[arg(long, default_value = "all")]
        rules: String,
        /// A length, list or inclusive range such as `5..10`.
        #[arg(long, default_value = "5..10")]
        k: String,
        #[command(flatten)]
        evolution: EvolutionArgs,
        #[arg(long, value_enum, default_value_t = SlicingArg::Rows)]
        slicing: SlicingArg,
        /// Also evolve each rule from the complemented initial row.
        #[arg(long)]
        complement: bool,
    },
    /// Central column of a rule started from a single 1.
    Column {
        #[arg(long)]
        rule: u8,
        #[arg(long, default_value_t = 64)]
        steps: usize,
    },
    /// Space-time diagram as a PBM image.
    Pbm {
        #[arg(long)]
        rule: u8,
        #[command(flatten)]
        evolution: EvolutionArgs,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SchemaArgs {
    #[arg(long, default_value = "Date")]
    pub date_col: String,
    #[arg(long, default_value = "Close")]
    pub close_col: String,
    #[arg(long, default_value = "%Y-%m-%d")]
    pub date_format: String,
}

#[derive(Debug, Subcommand)]
pub enum MarketCmd {
    /// Rise/fall bits of a price CSV.
    Encode {
        input: PathBuf,
        #[command(flatten)]
        schema: SchemaArgs,
    },
    /// Overlapping k-tuple distributions of the bits.
    Tuples {
        input: PathBuf,
        #[command(flatten)]
        schema: SchemaArgs,
        #[arg(long, default_value = "5..10")]
        k: String,
    },
    /// Cumulative +1/-1 walk of the bits.
    Walk {
        input: PathBuf,
        #[command(flatten)]
        schema: SchemaArgs,
    },
    /// Spearman correlation of the tuple distributions with a reference.
    Compare {
        input: PathBuf,
        #[command(flatten)]
        schema: SchemaArgs,
        /// `eca`, `d:N` for an exhaustive D(N), or a distribution file.
        #[arg(long = "ref", default_value = "eca")]
        reference: String,
        #[arg(long, default_value = "5..10")]
        k: String,
        #[arg(long, default_value_t = AlignPolicy::Intersection)]
        policy: AlignPolicy,
    },
    /// Seeded synthetic price series in the default CSV schema.
    Synth {
        #[arg(long, default_value_t = 1000)]
        days: usize,
        #[arg(long, default_value = "2000-01-03")]
        start: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum CodecCmd {
    Encode {
        #[arg(required = true)]
        strings: Vec<String>,
    },
    Decode {
        #[arg(required = true)]
        hex: Vec<String>,
    },
    /// Upper bound on complexity, in bits.
    Bound {
        #[arg(required = true)]
        strings: Vec<String>,
    },
}

fn run(cli: Cli, argv: Vec<String>) -> Result<(), CliError> {
    let global = cli.global.clone();
    let go = move || commands::dispatch(global, cli.group, argv);
    match cli.global.workers {
        Some(0) => Err(CliError::Validation("--workers must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation(e.to_string()))?
            .install(go),
        None => go(),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("algoprob: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
