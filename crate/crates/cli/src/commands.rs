use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use algoprob::codec::{self, Codeword};
use algoprob::ctm::{MachineDistribution, MIN_SAMPLE_SIZE};
use algoprob::eca::{self, EcaConfig, InitialCondition, TupleTemplate};
use algoprob::halting::{doubling_schedule, DEFAULT_EXHAUSTIVE_BUDGET};
use algoprob::market::{self, BinarySequence, CsvSchema};
use algoprob::stats::{self, AlignPolicy};
use algoprob::{
    busy_beaver, compute_distribution, ctm_complexity, halting_fraction, run_census, BlankMode, CutoffTable, Detectors,
    DistributionConfig, FrequencyDistribution, MachineClass, Mode, Source,
};
use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::manifest::{OutputDir, RunManifest, Versions};
use crate::parse::{self, Reference};
use crate::{BbCmd, CodecCmd, CtmCmd, EcaCmd, EvolutionArgs, Global, Group, InitArg, MarketCmd, ModeArg, OutFormat, SchemaArgs};

/// One command invocation: its output directory and the manifest being
/// filled in.
struct Run {
    global: Global,
    cutoffs: CutoffTable,
    out: OutputDir,
    manifest: RunManifest,
}

impl Run {
    fn new(global: Global, argv: Vec<String>) -> CliResult<Self> {
        let cutoffs = CutoffTable::builtin();
        let out = OutputDir::create(&global.out_dir)?;
        let manifest = RunManifest {
            command: argv,
            versions: Versions {
                cli: env!("CARGO_PKG_VERSION"),
                core: algoprob::VERSION,
                cutoff_table: cutoffs.version,
            },
            workers: global.workers,
            config: json!({ "out_format": global.out_format }),
            seeds: BTreeMap::new(),
            cutoffs: BTreeMap::new(),
            outputs: Vec::new(),
        };
        Ok(Self {
            global,
            cutoffs,
            out,
            manifest,
        })
    }

    fn config(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("config serializes");
        self.manifest.config.as_object_mut().expect("config is an object").insert(key.into(), value);
    }

    fn seed(&mut self, name: &str, seed: u64) {
        self.manifest.seeds.insert(name.into(), seed);
    }

    fn budget(&self) -> u64 {
        self.global.budget.unwrap_or(DEFAULT_EXHAUSTIVE_BUDGET)
    }

    /// The step cutoff for a class: `--cutoff` when given, else the table.
    fn cutoff(&mut self, class: MachineClass) -> u64 {
        let (steps, provenance) = match self.global.cutoff {
            Some(c) => (c, json!("override")),
            None => {
                let c = self.cutoffs.cutoff_for(class);
                (c.steps, serde_json::to_value(c.provenance).expect("serializes"))
            }
        };
        self.manifest.cutoffs.insert(
            format!("n{}", class.states()),
            json!({ "steps": steps, "provenance": provenance }),
        );
        steps
    }

    fn write(&mut self, file: &str, contents: &[u8]) -> CliResult<()> {
        self.out.write(file, contents)?;
        Ok(())
    }

    fn write_json(&mut self, file: &str, value: &impl Serialize) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("serializes");
        text.push('\n');
        self.write(file, text.as_bytes())
    }

    fn write_distribution(&mut self, stem: &str, dist: &FrequencyDistribution) -> CliResult<String> {
        let file = format!("{stem}.{}", self.global.out_format.extension());
        let text = match self.global.out_format {
            OutFormat::Csv => dist.to_csv_string(),
            OutFormat::Json => dist.to_json(),
        };
        self.write(&file, text.as_bytes())?;
        Ok(file)
    }

    /// Rows as CSV with a header, or as a JSON array of objects.
    fn write_rows<T: Serialize>(&mut self, stem: &str, header: &[&str], rows: &[T], csv_row: impl Fn(&T) -> String) -> CliResult<String> {
        let file = format!("{stem}.{}", self.global.out_format.extension());
        let text = match self.global.out_format {
            OutFormat::Csv => {
                let mut s = header.join(",");
                s.push('\n');
                for r in rows {
                    s.push_str(&csv_row(r));
                    s.push('\n');
                }
                s
            }
            OutFormat::Json => {
                let mut s = serde_json::to_string_pretty(rows).expect("serializes");
                s.push('\n');
                s
            }
        };
        self.write(&file, text.as_bytes())?;
        Ok(file)
    }

    fn finish(self) -> CliResult<()> {
        let path = self.out.finish(self.manifest)?;
        println!("manifest: {}", path.display());
        Ok(())
    }
}

pub fn dispatch(global: Global, group: Group, argv: Vec<String>) -> CliResult<()> {
    let mut run = Run::new(global, argv)?;
    match group {
        Group::Ctm(cmd) => ctm(&mut run, cmd)?,
        Group::Bb(cmd) => bb(&mut run, cmd)?,
        Group::Eca(cmd) => eca_cmd(&mut run, cmd)?,
        Group::Market(cmd) => market_cmd(&mut run, cmd)?,
        Group::Codec(cmd) => codec_cmd(&mut run, cmd)?,
    }
    run.finish()
}

fn machine_distribution(run: &mut Run, states: u32, mode: Mode, blank: BlankMode) -> CliResult<MachineDistribution> {
    let class = MachineClass::new(states)?;
    let cutoff = run.cutoff(class);
    Ok(compute_distribution(&DistributionConfig {
        class,
        mode,
        cutoff,
        blank,
    })?)
}

fn ctm(run: &mut Run, cmd: CtmCmd) -> CliResult<()> {
    match cmd {
        CtmCmd::Dist {
            states,
            mode,
            size,
            blank,
        } => {
            let mode = match mode {
                ModeArg::Exhaustive => Mode::Exhaustive { budget: run.budget() },
                ModeArg::Sampled => {
                    if size < MIN_SAMPLE_SIZE {
                        return Err(CliError::Validation(format!("--size must be at least {MIN_SAMPLE_SIZE}")));
                    }
                    run.seed("sample", run.global.seed);
                    Mode::Sampled {
                        size,
                        seed: run.global.seed,
                    }
                }
            };
            run.config("states", states);
            run.config("mode", mode);
            run.config("blank", blank);
            run.config("detectors", Detectors::ALL);
            let d = machine_distribution(run, states, mode, blank)?;
            let file = run.write_distribution(&format!("d{states}"), &d.distribution)?;
            let fraction = halting_fraction(&d.census);
            run.write_json(
                &format!("census_n{states}.json"),
                &json!({ "census": d.census, "halting_fraction": fraction }),
            )?;
            println!(
                "D({states}): {} strings from {} halting runs of {} ({} machines, blank {blank}); wrote {file}",
                d.distribution.len(),
                d.census.halting,
                d.census.total_runs,
                d.census.total_machines,
            );
        }
        CtmCmd::K {
            strings,
            states,
            blank,
            dist,
        } => {
            for s in &strings {
                if !algoprob::dist::is_bits(s) || s.is_empty() {
                    return Err(CliError::Validation(format!("'{s}' is not a bit string")));
                }
            }
            let distribution = match &dist {
                Some(path) => {
                    run.config("distribution_file", path);
                    read_distribution(path)?
                }
                None => {
                    run.config("states", states);
                    run.config("blank", blank);
                    run.config("mode", Mode::Exhaustive { budget: run.budget() });
                    machine_distribution(run, states, Mode::Exhaustive { budget: run.budget() }, blank)?.distribution
                }
            };
            let estimates = strings
                .iter()
                .map(|s| ctm_complexity(s, &distribution))
                .collect::<Result<Vec<_>, _>>()?;
            run.config("strings", &strings);
            for e in &estimates {
                println!("{}\tp={}\tk={:.6}", e.string, e.probability, e.k_ctm);
            }
            run.write_rows("k_ctm", &["string", "probability", "k_ctm"], &estimates, |e| {
                format!("{},{},{}", e.string, e.probability, e.k_ctm)
            })?;
        }
    }
    Ok(())
}

fn bb(run: &mut Run, cmd: BbCmd) -> CliResult<()> {
    match cmd {
        BbCmd::Census { states, blank } => {
            let class = MachineClass::new(states)?;
            let cutoff = run.cutoff(class);
            run.config("states", states);
            run.config("blank", blank);
            run.config("detectors", Detectors::ALL);
            let report = run_census(class, cutoff, blank, Detectors::ALL, run.budget())?;
            println!(
                "n={states} cutoff={cutoff} blank={blank}: sigma={} s_max={} halting={} proven={} unresolved={} runs={}",
                report.max_ones_observed,
                report.max_steps_observed,
                report.halting,
                report.non_halting_proven,
                report.unresolved,
                report.total_runs
            );
            let fraction = halting_fraction(&report);
            run.write_json(
                &format!("census_n{states}.json"),
                &json!({ "census": report, "halting_fraction": fraction }),
            )?;
        }
        BbCmd::Beaver { states, limit } => {
            let class = MachineClass::new(states)?;
            let bound = run.cutoff(class);
            let limit = limit.unwrap_or(bound.saturating_mul(10));
            let schedule = doubling_schedule(limit);
            run.config("states", states);
            run.config("blank", BlankMode::Zero);
            run.config("schedule", &schedule);
            let record = busy_beaver(class, &schedule, &run.cutoffs, run.budget())?;
            println!(
                "n={states}: sigma={} s_max={} status={:?} basis={:?} stable at cutoff {}",
                record.sigma, record.s_max, record.status, record.basis, record.stable_cutoff
            );
            run.write_json(&format!("beaver_n{states}.json"), &record)?;
        }
    }
    Ok(())
}

fn initial_condition(run: &mut Run, evo: &EvolutionArgs) -> InitialCondition {
    match evo.init {
        InitArg::Single => InitialCondition::SingleOne,
        InitArg::Random => {
            run.seed("initial_row", run.global.seed);
            InitialCondition::Random {
                seed: run.global.seed,
                density: evo.density,
            }
        }
    }
}

fn eca_cmd(run: &mut Run, cmd: EcaCmd) -> CliResult<()> {
    match cmd {
        EcaCmd::Dist {
            rules,
            k,
            evolution,
            slicing,
            complement,
        } => {
            let rules = parse::rules(&rules)?;
            let ks = parse::lengths(&k)?;
            let template = TupleTemplate {
                width: evolution.width,
                steps: evolution.steps,
                boundary: evolution.boundary.into(),
                init: initial_condition(run, &evolution),
                slicing: slicing.into(),
                complement_closure: complement,
            };
            run.config("rules", &rules);
            run.config("k", &ks);
            run.config("template", template);
            for k in ks {
                let d = eca::eca_tuple_distribution(&rules, k, &template)?;
                let file = run.write_distribution(&format!("eca_k{k}"), &d)?;
                println!("k={k}: {} strings, {} windows; wrote {file}", d.len(), d.total());
            }
        }
        EcaCmd::Column { rule, steps } => {
            run.config("rule", rule);
            run.config("steps", steps);
            let bits = eca::central_column(rule, steps)?;
            println!("{bits}");
            run.write(&format!("column_rule{rule}.txt"), format!("{bits}\n").as_bytes())?;
        }
        EcaCmd::Pbm { rule, evolution } => {
            let config = EcaConfig {
                rule,
                width: evolution.width,
                steps: evolution.steps,
                boundary: evolution.boundary.into(),
                init: initial_condition(run, &evolution),
            };
            run.config("evolution", config);
            let evo = eca::evolve(&config)?;
            let file = format!("rule{rule}.pbm");
            run.write(&file, evo.to_pbm().as_bytes())?;
            println!("wrote {file}");
        }
    }
    Ok(())
}

fn read_distribution(path: &Path) -> CliResult<FrequencyDistribution> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        Ok(FrequencyDistribution::from_json(&std::fs::read_to_string(path)?)?)
    } else {
        let source = Source::File {
            path: path.display().to_string(),
        };
        Ok(FrequencyDistribution::read_csv(File::open(path)?, source)?)
    }
}

fn label_of(path: &Path) -> String {
    path.file_stem().map_or_else(|| "series".to_string(), |s| s.to_string_lossy().into_owned())
}

fn load_bits(run: &mut Run, input: &Path, schema: &SchemaArgs) -> CliResult<BinarySequence> {
    run.config("input", input);
    run.config("schema", schema);
    let schema = CsvSchema {
        date_col: schema.date_col.clone(),
        close_col: schema.close_col.clone(),
        date_format: schema.date_format.clone(),
    };
    let series = market::ingest_csv(File::open(input)?, &schema, &label_of(input))?;
    Ok(market::encode_directions(&series)?)
}

fn market_cmd(run: &mut Run, cmd: MarketCmd) -> CliResult<()> {
    match cmd {
        MarketCmd::Encode { input, schema } => {
            let seq = load_bits(run, &input, &schema)?;
            println!("{}", seq.bits);
            let label = label_of(&input);
            run.write(&format!("{label}_bits.txt"), format!("{}\n", seq.bits).as_bytes())?;
        }
        MarketCmd::Tuples { input, schema, k } => {
            let ks = parse::lengths(&k)?;
            let seq = load_bits(run, &input, &schema)?;
            run.config("k", &ks);
            let label = label_of(&input);
            for k in ks {
                let d = market::extract_tuples(&seq, k)?;
                let file = run.write_distribution(&format!("{label}_k{k}"), &d)?;
                println!("k={k}: {} distinct of {} windows; wrote {file}", d.len(), d.total());
            }
        }
        MarketCmd::Walk { input, schema } => {
            let seq = load_bits(run, &input, &schema)?;
            let w = market::walk(&seq)?;
            let mut buf = Vec::new();
            w.write_csv(&mut buf)?;
            let file = format!("{}_walk.csv", label_of(&input));
            run.write(&file, &buf)?;
            println!("{} steps, final value {}; wrote {file}", seq.len(), w.values.last().copied().unwrap_or(0));
        }
        MarketCmd::Compare {
            input,
            schema,
            reference,
            k,
            policy,
        } => compare(run, &input, &schema, &reference, &k, policy)?,
        MarketCmd::Synth { days, start } => {
            let start = NaiveDate::parse_from_str(&start, "%Y-%m-%d")
                .map_err(|e| CliError::Validation(format!("bad --start '{start}': {e}")))?;
            if days < 2 {
                return Err(CliError::Validation("--days must be at least 2".into()));
            }
            run.config("days", days);
            run.config("start", start.to_string());
            run.seed("prices", run.global.seed);
            let mut rng = ChaCha8Rng::seed_from_u64(run.global.seed);
            let mut close = 100.0f64;
            let mut text = String::from("Date,Close\n");
            for (i, date) in start.iter_days().take(days).enumerate() {
                if i > 0 {
                    close *= 1.0 + rng.gen_range(-0.02..0.02);
                }
                text.push_str(&format!("{},{close:.4}\n", date.format("%Y-%m-%d")));
            }
            run.write("synthetic.csv", text.as_bytes())?;
            println!("wrote synthetic.csv ({days} days)");
        }
    }
    Ok(())
}

fn compare(run: &mut Run, input: &Path, schema: &SchemaArgs, reference: &str, k: &str, policy: AlignPolicy) -> CliResult<()> {
    let ks = parse::lengths(k)?;
    let reference = parse::reference(reference)?;
    let seq = load_bits(run, input, schema)?;
    run.config("k", &ks);
    run.config("policy", policy);
    let (ref_label, ref_dist) = match &reference {
        Reference::Eca => {
            let template = TupleTemplate::default();
            run.config("reference", json!({ "kind": "eca", "rules": "all", "template": template }));
            ("eca".to_string(), eca::eca_multi_length(&eca::all_rules(), &ks, &template)?)
        }
        Reference::Machines(n) => {
            let mode = Mode::Exhaustive { budget: run.budget() };
            run.config("reference", json!({ "kind": "machines", "states": n, "blank": BlankMode::Both, "mode": mode }));
            (format!("d{n}"), machine_distribution(run, *n, mode, BlankMode::Both)?.distribution)
        }
        Reference::File(path) => {
            run.config("reference", json!({ "kind": "file", "path": path }));
            (label_of(path), read_distribution(path)?)
        }
    };
    let cells = stats::compare_table(&seq, &ref_dist, &ks, policy);
    let label = label_of(input);
    let stem = format!("{label}_vs_{ref_label}");
    let text = stats::table_text(&label, &ref_label, &cells);
    print!("{text}");
    match run.global.out_format {
        OutFormat::Csv => {
            run.write(&format!("{stem}.csv"), stats::table_csv(&cells).as_bytes())?;
            run.write(&format!("{stem}.txt"), text.as_bytes())?;
        }
        OutFormat::Json => {
            let rows: Vec<Value> = cells
                .iter()
                .map(|c| match &c.result {
                    Ok(r) => json!({ "k": c.k, "rho": r.rho, "n": r.n }),
                    Err(reason) => json!({ "k": c.k, "rho": null, "n": c.pairs, "reason": reason }),
                })
                .collect();
            run.write_json(&format!("{stem}.json"), &rows)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Encoded {
    string: String,
    mode: String,
    code_length: usize,
    hex: String,
}

#[derive(Serialize)]
struct Decoded {
    hex: String,
    string: String,
}

#[derive(Serialize)]
struct Bound {
    string: String,
    length: usize,
    k_upper_bound: usize,
}

fn codec_cmd(run: &mut Run, cmd: CodecCmd) -> CliResult<()> {
    match cmd {
        CodecCmd::Encode { strings } => {
            let rows = strings
                .iter()
                .map(|s| {
                    let code: Codeword = codec::encode(s)?;
                    Ok(Encoded {
                        string: s.clone(),
                        mode: code.mode().map_or_else(String::new, |m| m.to_string()),
                        code_length: code.len(),
                        hex: code.to_hex(),
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            for r in &rows {
                println!("{}\t{}\t{}", r.string, r.code_length, r.hex);
            }
            run.write_rows("codec_encode", &["string", "mode", "code_length", "hex"], &rows, |r| {
                format!("{},{},{},{}", r.string, r.mode, r.code_length, r.hex)
            })?;
        }
        CodecCmd::Decode { hex } => {
            let rows = hex
                .iter()
                .map(|h| {
                    Ok(Decoded {
                        hex: h.clone(),
                        string: codec::decode_hex(h)?,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            for r in &rows {
                println!("{}", r.string);
            }
            run.write_rows("codec_decode", &["hex", "string"], &rows, |r| format!("{},{}", r.hex, r.string))?;
        }
        CodecCmd::Bound { strings } => {
            let rows = strings
                .iter()
                .map(|s| {
                    Ok(Bound {
                        string: s.clone(),
                        length: s.len(),
                        k_upper_bound: codec::k_upper_bound(s)?,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            for r in &rows {
                println!("{}\t{}", r.string, r.k_upper_bound);
            }
            run.write_rows("codec_bound", &["string", "length", "k_upper_bound"], &rows, |r| {
                format!("{},{},{}", r.string, r.length, r.k_upper_bound)
            })?;
        }
    }
    Ok(())
}
