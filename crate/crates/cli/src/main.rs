//! `patsort`: sort, inspect and generate pattern-avoiding sequences.
//!
//! Exit codes: 0 success (or "avoids"), 1 "contains" or a failed
//! `--seeded-check`, 2 usage, parse or I/O errors, 3 resource caps.

mod input;

use std::fmt::Display;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;

use input::{parse_values, Values};
use patsort::generators::{
    gen_layered_runs, gen_rejection, gen_stack_family, inject_duplicates, Seed, StackTarget,
};
use patsort::matrix::{count_avoiders, count_t, OracleLimits};
use patsort::treesort::{count_trees_exact, MAX_BLOCK_LEN};
use patsort::{
    contains_pattern, keyed, sort_pattern_avoiding_keys, Error, Pattern, SortReport, SorterConfig,
};

const STATS_SCHEMA_VERSION: u32 = 1;
const BENCH_HEADER: &str =
    "family,n,rep,seed,k,comparisons,comparisons_per_element,phases,rounds,time_ms";
/// Largest tree height `count --what trees` will evaluate.
const MAX_TREE_COUNT_HEIGHT: usize = 16;

#[derive(Debug, Parser)]
#[command(
    name = "patsort",
    version,
    about = "Sort and inspect pattern-avoiding sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sort whitespace-separated integers, printing one per line.
    Sort {
        /// Input file; stdin when omitted or "-".
        input: Option<PathBuf>,
        /// Write a JSON stats document to this path.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Block length for decision-tree sorting (1 to 8).
        #[arg(long)]
        k: Option<usize>,
        /// Maximum number of decision-tree advances.
        #[arg(long)]
        budget: Option<u64>,
        /// Pattern the input is known to avoid; only recorded in the stats.
        #[arg(long)]
        pattern: Option<String>,
        /// Compare the output with a reference stable sort; exit 1 on mismatch.
        #[arg(long)]
        seeded_check: bool,
    },
    /// Report whether a sequence contains a pattern.
    Check {
        /// Sequence file; stdin when "-".
        input: PathBuf,
        /// Permutation such as "2,3,1".
        #[arg(long)]
        pattern: String,
    },
    /// Generate a pattern-avoiding instance.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// Pattern avoided by the stack family: 231, 312, 132 or 213.
        #[arg(long)]
        target: Option<String>,
        /// Number of interleaved increasing runs for the layered family.
        #[arg(long)]
        t: Option<usize>,
        /// Pattern to avoid for the rejection family.
        #[arg(long)]
        pattern: Option<String>,
        /// Map values onto this many distinct values, keeping avoidance.
        #[arg(long)]
        duplicates: Option<usize>,
        #[arg(long, env = "PATSORT_SEED", default_value_t = 0)]
        seed: Seed,
    },
    /// Print an exact count.
    Count {
        #[arg(long, value_enum)]
        what: CountWhat,
        #[arg(long)]
        pattern: Option<String>,
        /// Columns (matrices) or length (avoiders).
        #[arg(long)]
        n: Option<usize>,
        /// Rows (matrices).
        #[arg(long)]
        m: Option<usize>,
        /// Block length (trees).
        #[arg(long)]
        k: Option<usize>,
        /// Height (trees).
        #[arg(long)]
        h: Option<usize>,
    },
    /// Measure the sorter on generated instances and write CSV.
    Bench {
        #[arg(long, value_enum)]
        family: BenchFamily,
        /// Comma-separated ascending sizes.
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, env = "PATSORT_SEED", default_value_t = 0)]
        seed: Seed,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Stack,
    Layered,
    Rejection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchFamily {
    Stack,
    Layered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CountWhat {
    Avoiders,
    Matrices,
    Trees,
}

/// A command failure and its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Display) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }

    fn resource(message: impl Display) -> Self {
        Failure {
            code: 3,
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceLimit(_) => Failure::resource(e),
            _ => Failure::usage(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(e)
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn read_input(path: Option<&Path>) -> Result<String, Failure> {
    let mut text = String::new();
    match path {
        None => io::stdin().read_to_string(&mut text).map(|_| ()),
        Some(p) if p.as_os_str() == "-" => io::stdin().read_to_string(&mut text).map(|_| ()),
        Some(p) => fs::read_to_string(p).map(|t| text = t),
    }
    .map_err(|e| {
        Failure::usage(format!(
            "{}: {e}",
            path.map_or("stdin".into(), |p| p.display().to_string())
        ))
    })?;
    Ok(text)
}

fn parse_pattern(s: &str) -> Result<Pattern, Failure> {
    s.parse::<Pattern>().map_err(Failure::from)
}

fn print_lines<T: Display>(items: impl IntoIterator<Item = T>) -> io::Result<()> {
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    for x in items {
        writeln!(out, "{x}")?;
    }
    out.flush()
}

#[derive(Debug, Serialize)]
struct LayerStats {
    tuple_size: Option<usize>,
    runs_in: usize,
    runs_out: usize,
    comparisons: u64,
    max_phases: usize,
    rounds: usize,
}

#[derive(Debug, Serialize)]
struct PhaseStats {
    d: usize,
    m_i: usize,
    rounds: usize,
    completed: bool,
}

/// The `--stats` document.
#[derive(Debug, Serialize)]
struct StatsDocument {
    schema_version: u32,
    command: Vec<String>,
    n: usize,
    k: Option<usize>,
    t1: Option<usize>,
    t2: Option<usize>,
    pattern: Option<String>,
    /// Phases of the final merge.
    phases: Vec<PhaseStats>,
    layers: Vec<LayerStats>,
    comparisons: u64,
    tree_advances: u64,
    fallback_blocks: usize,
    wall_time_ms: f64,
}

impl StatsDocument {
    fn new(report: &SortReport, pattern: Option<String>, wall_time_ms: f64) -> Self {
        let phases = report
            .final_merge()
            .and_then(|l| l.merges.first())
            .map(|m| {
                m.phases
                    .iter()
                    .map(|p| PhaseStats {
                        d: p.d,
                        m_i: p.runs,
                        rounds: p.rounds,
                        completed: p.completed,
                    })
                    .collect()
            })
            .unwrap_or_default();
        StatsDocument {
            schema_version: STATS_SCHEMA_VERSION,
            command: std::env::args().collect(),
            n: report.n,
            k: report.k(),
            t1: report.plan.map(|p| p.t1),
            t2: report.plan.map(|p| p.t2),
            pattern,
            phases,
            layers: report
                .layers
                .iter()
                .map(|l| LayerStats {
                    tuple_size: l.tuple_size,
                    runs_in: l.runs_in,
                    runs_out: l.runs_out,
                    comparisons: l.comparisons,
                    max_phases: l.max_phases,
                    rounds: l.rounds,
                })
                .collect(),
            comparisons: report.comparisons,
            tree_advances: report.tree_advances(),
            fallback_blocks: report.fallback_blocks(),
            wall_time_ms,
        }
    }
}

/// Sorts and prints `values`; returns the report and whether the optional
/// reference check passed.
fn sort_and_print<V: Ord + Clone + Display>(
    values: &[V],
    cfg: &SorterConfig,
    seeded_check: bool,
) -> Result<(SortReport, f64, bool), Failure> {
    let start = Instant::now();
    let (sorted, report) = sort_pattern_avoiding_keys(values, cfg)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let ok = !seeded_check || {
        let mut reference = keyed(values);
        reference.sort();
        reference == sorted
    };
    print_lines(sorted.iter().map(|k| &k.value))?;
    Ok((report, ms, ok))
}

fn cmd_sort(
    input: Option<&Path>,
    stats: Option<&Path>,
    k: Option<usize>,
    budget: Option<u64>,
    pattern: Option<String>,
    seeded_check: bool,
) -> CmdResult {
    if let Some(p) = &pattern {
        parse_pattern(p)?;
    }
    let cfg = SorterConfig {
        k_override: k,
        tree_budget: budget,
        ..SorterConfig::default()
    };
    cfg.validate()?;
    let values = parse_values(&read_input(input)?).map_err(Failure::usage)?;
    let (report, ms, ok) = match &values {
        Values::Small(v) => sort_and_print(v, &cfg, seeded_check)?,
        Values::Big(v) => sort_and_print(v, &cfg, seeded_check)?,
    };
    if let Some(path) = stats {
        let doc = StatsDocument::new(&report, pattern, ms);
        let json = serde_json::to_string_pretty(&doc).expect("stats serialize");
        fs::write(path, json + "\n")
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    }
    if ok {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("patsort: output differs from the reference sort");
        Ok(ExitCode::from(1))
    }
}

fn cmd_check(input: &Path, pattern: &str) -> CmdResult {
    let p = parse_pattern(pattern)?;
    let values = parse_values(&read_input(Some(input))?).map_err(Failure::usage)?;
    let contains = match &values {
        Values::Small(v) => contains_pattern(v, &p),
        Values::Big(v) => contains_pattern(v, &p),
    };
    println!("{}", if contains { "contains" } else { "avoids" });
    Ok(ExitCode::from(u8::from(contains)))
}

fn stack_target(target: Option<&str>) -> Result<StackTarget, Failure> {
    target.map_or(Ok(StackTarget::P231), |t| t.parse().map_err(Failure::from))
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    family: Family,
    n: usize,
    target: Option<&str>,
    t: Option<usize>,
    pattern: Option<&str>,
    duplicates: Option<usize>,
    seed: Seed,
) -> CmdResult {
    let perm = match family {
        Family::Stack => {
            if t.is_some() || pattern.is_some() {
                return Err(Failure::usage(
                    "--family stack takes --target, not --t or --pattern",
                ));
            }
            gen_stack_family(n, stack_target(target)?, seed)
        }
        Family::Layered => {
            if target.is_some() || pattern.is_some() {
                return Err(Failure::usage(
                    "--family layered takes --t, not --target or --pattern",
                ));
            }
            let t = t.ok_or_else(|| Failure::usage("--family layered requires --t"))?;
            gen_layered_runs(n, t, seed)?
        }
        Family::Rejection => {
            if target.is_some() || t.is_some() {
                return Err(Failure::usage(
                    "--family rejection takes --pattern, not --target or --t",
                ));
            }
            let p = parse_pattern(
                pattern.ok_or_else(|| Failure::usage("--family rejection requires --pattern"))?,
            )?;
            gen_rejection(&p, n, seed)?
        }
    };
    match duplicates {
        Some(0) => Err(Failure::usage("--duplicates must be at least 1")),
        Some(d) => {
            // Decorrelate the value map from the permutation's own seed.
            let values = inject_duplicates(&perm, d, seed ^ 0x9e37_79b9_7f4a_7c15);
            print_lines(values)?;
            Ok(ExitCode::SUCCESS)
        }
        None => {
            print_lines(perm.entries())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn require<T>(value: Option<T>, flag: &str, what: CountWhat) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::usage(format!("--what {what:?} requires {flag}").to_lowercase()))
}

fn cmd_count(
    what: CountWhat,
    pattern: Option<&str>,
    n: Option<usize>,
    m: Option<usize>,
    k: Option<usize>,
    h: Option<usize>,
) -> CmdResult {
    let limits = OracleLimits::default();
    let count: BigUint = match what {
        CountWhat::Avoiders => {
            let p = parse_pattern(require(pattern, "--pattern", what)?)?;
            count_avoiders(&p, require(n, "--n", what)?, &limits)?
        }
        CountWhat::Matrices => {
            let p = parse_pattern(require(pattern, "--pattern", what)?)?;
            count_t(
                &p,
                require(m, "--m", what)?,
                require(n, "--n", what)?,
                &limits,
            )?
        }
        CountWhat::Trees => {
            let k = require(k, "--k", what)?;
            let h = require(h, "--h", what)?;
            if k == 0 || h == 0 {
                return Err(Failure::usage("--k and --h must be at least 1"));
            }
            if k > MAX_BLOCK_LEN || h > MAX_TREE_COUNT_HEIGHT {
                return Err(Failure::resource(format!(
                    "tree counts are limited to k <= {MAX_BLOCK_LEN} and h <= {MAX_TREE_COUNT_HEIGHT}"
                )));
            }
            count_trees_exact(k, h)
        }
    };
    println!("{count}");
    Ok(ExitCode::SUCCESS)
}

fn parse_sizes(sizes: &str) -> Result<Vec<usize>, Failure> {
    let parsed: Vec<usize> = sizes
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("--sizes: not a list of sizes: {sizes:?}")))?;
    if parsed.windows(2).any(|w| w[0] > w[1]) {
        return Err(Failure::usage("--sizes must be ascending"));
    }
    Ok(parsed)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    family: BenchFamily,
    sizes: &str,
    reps: usize,
    target: Option<&str>,
    t: Option<usize>,
    seed: Seed,
    out: Option<&Path>,
) -> CmdResult {
    let sizes = parse_sizes(sizes)?;
    let (label, target, t) = match family {
        BenchFamily::Stack => {
            if t.is_some() {
                return Err(Failure::usage("--family stack takes --target, not --t"));
            }
            let target = stack_target(target)?;
            (format!("stack-{target}"), target, 0)
        }
        BenchFamily::Layered => {
            if target.is_some() {
                return Err(Failure::usage("--family layered takes --t, not --target"));
            }
            let t = t.ok_or_else(|| Failure::usage("--family layered requires --t"))?;
            if t == 0 {
                return Err(Failure::usage("--t must be at least 1"));
            }
            (format!("layered-{t}"), StackTarget::P231, t)
        }
    };
    let cfg = SorterConfig::default();
    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    for &n in &sizes {
        for rep in 0..reps {
            let s = seed.wrapping_add(rep as u64);
            let perm = match family {
                BenchFamily::Stack => gen_stack_family(n, target, s),
                BenchFamily::Layered => gen_layered_runs(n, t, s)?,
            };
            let start = Instant::now();
            let (_, report) = sort_pattern_avoiding_keys(perm.entries(), &cfg)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let phases = report
                .layers
                .iter()
                .map(|l| l.max_phases)
                .max()
                .unwrap_or(0);
            let rounds: usize = report.layers.iter().map(|l| l.rounds).sum();
            let per = if n == 0 {
                0.0
            } else {
                report.comparisons as f64 / n as f64
            };
            csv.push_str(&format!(
                "{label},{n},{rep},{s},{},{},{per:.4},{phases},{rounds},{ms:.3}\n",
                report.k().unwrap_or(0),
                report.comparisons,
            ));
        }
    }
    match out {
        Some(path) => {
            fs::write(path, csv).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
        }
        None => io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Sort {
            input,
            stats,
            k,
            budget,
            pattern,
            seeded_check,
        } => cmd_sort(
            input.as_deref(),
            stats.as_deref(),
            k,
            budget,
            pattern,
            seeded_check,
        ),
        Command::Check { input, pattern } => cmd_check(&input, &pattern),
        Command::Gen {
            family,
            n,
            target,
            t,
            pattern,
            duplicates,
            seed,
        } => cmd_gen(
            family,
            n,
            target.as_deref(),
            t,
            pattern.as_deref(),
            duplicates,
            seed,
        ),
        Command::Count {
            what,
            pattern,
            n,
            m,
            k,
            h,
        } => cmd_count(what, pattern.as_deref(), n, m, k, h),
        Command::Bench {
            family,
            sizes,
            reps,
            target,
            t,
            seed,
            out,
        } => cmd_bench(
            family,
            &sizes,
            reps,
            target.as_deref(),
            t,
            seed,
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("patsort: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
