//! The `santa` command. Exit codes are uniform across subcommands: 0 for a
//! clean result (a completed run, a violation-free trace, a passing check),
//! 1 when the subject itself is bad (a stalled or deadlocked run, trace
//! violations, a failing check), 2 for usage and structural problems.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use santa_refine::{check_class_refinement, parse_spec, RefinementMapping};
use santa_scenario::{run_backend, BackendId, ScenarioConfig};

use crate::bench::run_bench;
use crate::jsonl;
use crate::validate::{validate_trace, TraceShape};

#[derive(Parser)]
#[command(name = "santa", version, about = "Santa Claus scenario workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario configuration on one backend.
    Run(RunArgs),
    /// Measure wall time across increasing round counts.
    Bench(BenchArgs),
    /// Check a recorded trace against the behavioral properties.
    Validate(ValidateArgs),
    /// Refinement tooling for the staged class developments.
    Refine {
        #[command(subcommand)]
        cmd: RefineCmd,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Report {
    Text,
    Json,
}

#[derive(Args)]
struct PopulationArgs {
    /// Backend to drive.
    #[arg(long, default_value = "guards")]
    backend: BackendId,
    /// Reindeer population.
    #[arg(long, default_value_t = 9)]
    reindeer: usize,
    /// Elf population.
    #[arg(long, default_value_t = 20)]
    elves: usize,
    /// Reindeer required per delivery.
    #[arg(long, default_value_t = 9)]
    barrier: usize,
    /// Elves served per help session.
    #[arg(long, default_value_t = 3)]
    group: usize,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    population: PopulationArgs,
    /// Santa rounds to complete.
    #[arg(long, default_value_t = 10_000)]
    rounds: u64,
    /// Full cycles each reindeer performs before retiring.
    #[arg(long = "reindeer-cycles", default_value_t = 2_000)]
    reindeer_cycles: u64,
    /// Record the run to this JSONL trace file.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Report::Text)]
    report: Report,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    population: PopulationArgs,
    /// Round counts to measure, strictly increasing.
    #[arg(long, value_delimiter = ',', default_value = "1000,10000")]
    levels: Vec<u64>,
    /// Runs per level; the median is reported.
    #[arg(long, default_value_t = 3)]
    runs: usize,
    #[arg(long, value_enum, default_value_t = Report::Text)]
    report: Report,
}

#[derive(Args)]
struct ValidateArgs {
    /// Trace file to check, one JSON event per line.
    trace: PathBuf,
    /// Reindeer required per delivery.
    #[arg(long, default_value_t = 9)]
    barrier: usize,
    /// Elves served per help session.
    #[arg(long, default_value_t = 3)]
    group: usize,
    #[arg(long, value_enum, default_value_t = Report::Text)]
    report: Report,
}

#[derive(Subcommand)]
enum RefineCmd {
    /// Check one coupling relation in a class-system file.
    Check(RefineCheckArgs),
}

#[derive(Args)]
struct RefineCheckArgs {
    /// Class-system file to read.
    file: PathBuf,
    /// Name of the abstract class.
    #[arg(long = "abstract")]
    abstract_name: String,
    /// Name of the concrete class.
    #[arg(long = "concrete")]
    concrete_name: String,
    /// Name of the coupling relation.
    #[arg(long)]
    relation: String,
}

impl PopulationArgs {
    fn config(&self, rounds: u64, reindeer_cycles: Option<u64>) -> ScenarioConfig {
        ScenarioConfig {
            reindeer_count: self.reindeer,
            elf_count: self.elves,
            barrier_size: self.barrier,
            group_size: self.group,
            santa_rounds: rounds,
            reindeer_cycles,
            elf_cycles: None,
        }
    }
}

pub fn run() -> i32 {
    match Cli::parse().cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Validate(args) => cmd_validate(args),
        Cmd::Refine { cmd: RefineCmd::Check(args) } => cmd_refine_check(args),
    }
}

fn cmd_run(args: RunArgs) -> i32 {
    let cfg = args.population.config(args.rounds, Some(args.reindeer_cycles));
    let record = args.trace.is_some();
    let run = match run_backend(args.population.backend, &cfg, record) {
        Ok(run) => run,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    if let Some(path) = &args.trace {
        if let Err(e) = jsonl::write_events(path, &run.events) {
            eprintln!("cannot write {}: {e}", path.display());
            return 2;
        }
    }
    let s = &run.stats;
    match args.report {
        Report::Json => println!("{}", serde_json::to_string_pretty(s).expect("stats serialize")),
        Report::Text => {
            println!(
                "backend={} rounds={}/{} deliveries={} help_sessions={} wall_s={:.3} stalled={} deadlocked={} broadcasts={}",
                s.backend,
                s.santa_rounds_completed,
                cfg.santa_rounds,
                s.deliveries,
                s.help_sessions,
                s.wall_s,
                s.stalled,
                s.deadlocked,
                s.broadcasts,
            );
            if let Some(path) = &args.trace {
                println!("trace={} events={}", path.display(), run.events.len());
            }
        }
    }
    if s.stalled || s.deadlocked {
        1
    } else {
        0
    }
}

fn cmd_bench(args: BenchArgs) -> i32 {
    let base = args.population.config(0, None);
    let report = match run_bench(args.population.backend, &base, &args.levels, args.runs) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    match args.report {
        Report::Json => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serialize"))
        }
        Report::Text => {
            println!(
                "backend={} runs={} reindeer={} elves={} barrier={} group={}",
                report.backend, report.runs, report.reindeer, report.elves, report.barrier, report.group,
            );
            for level in &report.levels {
                let wall = match level.median_wall_s {
                    Some(w) => format!("{w:.3}"),
                    None => "n/a".into(),
                };
                let spread = match level.spread_s {
                    Some(sp) => format!(" spread_s={sp:.3}"),
                    None => String::new(),
                };
                println!(
                    "rounds={} median_wall_s={wall}{spread} deliveries={} help_sessions={} deadlocked={}",
                    level.rounds, level.deliveries, level.help_sessions, level.deadlocked,
                );
            }
            for (pair, ratio) in report.levels.windows(2).zip(&report.ratios) {
                let shown = match ratio {
                    Some(r) => format!("{r:.2}"),
                    None => "n/a".into(),
                };
                println!("ratio {}->{}: {shown}", pair[0].rounds, pair[1].rounds);
            }
        }
    }
    0
}

fn cmd_validate(args: ValidateArgs) -> i32 {
    let events = match jsonl::read_events(&args.trace) {
        Ok(events) => events,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.trace.display());
            return 2;
        }
    };
    let shape = TraceShape::new(args.barrier, args.group);
    match validate_trace(&events, &shape) {
        Err(e) => {
            eprintln!("structural error: {e}");
            2
        }
        Ok(violations) if violations.is_empty() => {
            match args.report {
                Report::Json => println!("[]"),
                Report::Text => println!("trace ok: {} events, no violations", events.len()),
            }
            0
        }
        Ok(violations) => {
            match args.report {
                Report::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&violations).expect("violations serialize")
                ),
                Report::Text => {
                    for v in &violations {
                        println!("{v}");
                    }
                    println!("{} violation(s) in {} events", violations.len(), events.len());
                }
            }
            1
        }
    }
}

fn cmd_refine_check(args: RefineCheckArgs) -> i32 {
    let text = match std::fs::read_to_string(&args.file) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.file.display());
            return 2;
        }
    };
    let spec = match parse_spec(&text) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let Some(abs) = spec.system(&args.abstract_name) else {
        eprintln!("no class named {} in {}", args.abstract_name, args.file.display());
        return 2;
    };
    let Some(conc) = spec.system(&args.concrete_name) else {
        eprintln!("no class named {} in {}", args.concrete_name, args.file.display());
        return 2;
    };
    let Some(couple) = spec.couple(&args.relation) else {
        eprintln!("no relation named {} in {}", args.relation, args.file.display());
        return 2;
    };
    match check_class_refinement(abs, conc, couple, &RefinementMapping::Search) {
        Err(e) => {
            eprintln!("{e}");
            2
        }
        Ok(report) => {
            println!("{report}");
            if report.passed() {
                0
            } else {
                1
            }
        }
    }
}
