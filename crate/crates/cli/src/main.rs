//! `mbe` — enumerate, verify, and benchmark maximal bicliques in bipartite
//! edge lists.
//!
//! Exit status: 0 on success, 1 on a verification mismatch, 2 on usage,
//! parse, or guard errors.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mbe_core::oracle;
use mbe_core::stats::{report, RunMeta};
use mbe_core::{
    run_parallel, Biclique, BicliqueSet, BipartiteGraph, LoadOptions, Mode, ParallelConfig,
    RunOutcome, Side,
};

#[derive(Parser)]
#[command(name = "mbe", version, about = "Parallel maximal biclique enumeration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate or count maximal bicliques.
    Run(RunArgs),
    /// Cross-check the engine against brute-force oracles.
    Verify(VerifyArgs),
    /// Repeat a counting run and report wall-time statistics.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Edge-list file: whitespace-separated `u v` pairs, one edge per line.
    #[arg(long)]
    input: PathBuf,
    /// Treat vertex indices as 1-based (KONECT convention) and reject 0.
    #[arg(long)]
    one_based: bool,
    /// Skip the first non-comment line (a `|E| |U| |V|`-style header).
    #[arg(long)]
    header: bool,
}

#[derive(Args, Clone)]
struct WorkerArgs {
    /// Worker count; defaults to the available hardware parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Work-stealing depth bound; 1 disables stealing.
    #[arg(short, long, default_value_t = 2)]
    k: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RunMode {
    Count,
    Enumerate,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    workers: WorkerArgs,
    #[arg(long, value_enum, default_value_t = RunMode::Count)]
    mode: RunMode,
    /// Where to write bicliques in enumerate mode (`-` for stdout).
    #[arg(long)]
    output: Option<String>,
    /// Write the per-worker stats document to this JSON file.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Disable phase timing.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    workers: WorkerArgs,
    /// Check against the subset-closure brute-force enumerator.
    #[arg(long)]
    closure: bool,
    /// Check against the plain recursive reference search.
    #[arg(long)]
    reference: bool,
    /// Candidate-side cap for the closure oracle.
    #[arg(long, default_value_t = oracle::CLOSURE_SIDE_LIMIT)]
    closure_limit: usize,
    /// Candidate-side cap for the recursive reference.
    #[arg(long, default_value_t = oracle::REFERENCE_SIDE_LIMIT)]
    reference_limit: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    workers: WorkerArgs,
    /// Number of timed repetitions.
    #[arg(long, default_value_t = 5)]
    repeat: usize,
}

/// Failures that are usage/environment problems rather than verification
/// mismatches; they exit with status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn load_graph(args: &InputArgs) -> Result<BipartiteGraph> {
    let file = File::open(&args.input)
        .map_err(|e| UsageError(format!("cannot open {}: {e}", args.input.display())))?;
    let options = LoadOptions {
        one_based: args.one_based,
        allow_comments: true,
        header: args.header,
    };
    BipartiteGraph::load_edge_list(BufReader::new(file), options)
        .map_err(|e| UsageError(format!("{}: {e}", args.input.display())).into())
}

fn config(workers: &WorkerArgs, mode: Mode, timing: bool) -> ParallelConfig {
    ParallelConfig {
        n_workers: workers
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
        k: workers.k,
        mode,
        timing,
        debug_checks: None,
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// One biclique per line in original input IDs, both sides ascending, lines
/// sorted lexicographically: byte-identical across worker/k configurations.
fn render_bicliques(g: &BipartiteGraph, found: &[Biclique]) -> Vec<String> {
    let mut lines: Vec<String> = found
        .iter()
        .map(|b| {
            let left: Vec<String> = b
                .left
                .iter()
                .map(|&v| g.original_id(Side::V, v).to_string())
                .collect();
            let right: Vec<String> = b
                .right
                .iter()
                .map(|&u| g.original_id(Side::U, u).to_string())
                .collect();
            format!("L: {} | R: {}", left.join(","), right.join(","))
        })
        .collect();
    lines.sort_unstable();
    lines
}

fn write_stats(path: &Path, dataset: &str, g: &BipartiteGraph, cfg: &ParallelConfig, outcome: &RunOutcome) -> Result<()> {
    let meta = RunMeta {
        dataset,
        n_u: g.n_u(),
        n_v: g.n_v(),
        edges: g.edge_count(),
        count: outcome.count,
        n_workers: cfg.n_workers,
        k: cfg.k,
        wall_ms: outcome.wall.as_secs_f64() * 1e3,
    };
    let doc = report(&meta, &outcome.workers);
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &doc)?;
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    if args.mode == RunMode::Enumerate && args.output.is_none() {
        bail!(UsageError(
            "enumerate mode requires --output <path> (or `-` for stdout)".into()
        ));
    }
    let g = load_graph(&args.input)?;
    let mode = match args.mode {
        RunMode::Count => Mode::Count,
        RunMode::Enumerate => Mode::Enumerate,
    };
    let cfg = config(&args.workers, mode, !args.no_timing);
    let outcome = run_parallel(&g, cfg).map_err(|e| UsageError(e.to_string()))?;
    if let Some(found) = &outcome.bicliques {
        let lines = render_bicliques(&g, found);
        let target = args.output.as_deref().unwrap();
        if target == "-" {
            let stdout = std::io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            for line in &lines {
                writeln!(out, "{line}")?;
            }
            out.flush()?;
            eprintln!("{}", outcome.count);
        } else {
            let file = File::create(target).with_context(|| format!("cannot write {target}"))?;
            let mut out = BufWriter::new(file);
            for line in &lines {
                writeln!(out, "{line}")?;
            }
            out.flush()?;
            println!("{}", outcome.count);
        }
    } else {
        println!("{}", outcome.count);
    }
    if let Some(stats) = &args.stats {
        write_stats(stats, &dataset_name(&args.input.input), &g, &cfg, &outcome)?;
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    if !args.closure && !args.reference {
        bail!(UsageError(
            "verify needs at least one of --closure / --reference".into()
        ));
    }
    let g = load_graph(&args.input)?;
    let cfg = config(&args.workers, Mode::Enumerate, false);
    let outcome = run_parallel(&g, cfg).map_err(|e| UsageError(e.to_string()))?;
    let engine: BicliqueSet = outcome
        .bicliques
        .unwrap_or_default()
        .into_iter()
        .map(|b| (b.left, b.right))
        .collect();
    println!("engine: {} maximal bicliques", engine.len());
    engine
        .check_mutual_closure(&g)
        .map_err(|e| anyhow::anyhow!("engine emission fails mutual closure: {e}"))?;

    let mut ok = true;
    if args.closure {
        let set = oracle::closure_enumerate(&g, args.closure_limit)
            .map_err(|e| UsageError(e.to_string()))?;
        let agree = set == engine;
        println!(
            "closure oracle: {} maximal bicliques — {}",
            set.len(),
            if agree { "match" } else { "MISMATCH" }
        );
        ok &= agree;
    }
    if args.reference {
        let set = oracle::reference_recursive_mbea_with_limit(&g, args.reference_limit)
            .map_err(|e| UsageError(e.to_string()))?;
        let agree = set == engine;
        println!(
            "recursive reference: {} maximal bicliques — {}",
            set.len(),
            if agree { "match" } else { "MISMATCH" }
        );
        ok &= agree;
    }
    if !ok {
        bail!("oracle disagreement");
    }
    println!("verified");
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    if args.repeat == 0 {
        bail!(UsageError("--repeat must be >= 1".into()));
    }
    let g = load_graph(&args.input)?;
    let cfg = config(&args.workers, Mode::Count, false);
    let mut count = 0;
    let mut times: Vec<Duration> = Vec::with_capacity(args.repeat);
    for _ in 0..args.repeat {
        let outcome = run_parallel(&g, cfg).map_err(|e| UsageError(e.to_string()))?;
        count = outcome.count;
        times.push(outcome.wall);
    }
    times.sort_unstable();
    let ms = |d: &Duration| d.as_secs_f64() * 1e3;
    let total: f64 = times.iter().map(ms).sum();
    println!(
        "count {count} | {} runs | min {:.2} ms | median {:.2} ms | mean {:.2} ms | max {:.2} ms",
        times.len(),
        ms(&times[0]),
        ms(&times[times.len() / 2]),
        total / times.len() as f64,
        ms(times.last().unwrap()),
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
