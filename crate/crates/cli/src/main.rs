//! randlab: drive the experiment suites, replay sketch streams, sample hash
//! functions, and run structures against operation scripts.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use randlab_core::count_min::{CmsParams, CountMinSketch, StreamMode};
use randlab_core::cuckoo::CuckooTable;
use randlab_core::harness::{self, ExperimentSpec, Format, SuiteParams};
use randlab_core::hashing;
use randlab_core::lsh;
use randlab_core::rng::RandomSource;
use randlab_core::skiplist::SkipList;
use randlab_core::treap::Treap;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "randlab", version, about = "randomized-structure lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and emit its report; exits nonzero if any
    /// metric fails.
    Validate(ValidateArgs),
    /// List the available suites.
    Suites,
    /// Replay an operation script against a structure and print its
    /// instrumentation counters.
    Bench(BenchArgs),
    /// Sketch subcommands.
    #[command(subcommand)]
    Sketch(SketchCommand),
    /// Hash-family subcommands.
    #[command(subcommand)]
    Hash(HashCommand),
    /// Near-neighbor index subcommands.
    #[command(subcommand)]
    Lsh(LshCommand),
    /// Contraction min-cut over a graph file.
    Mincut(MincutArgs),
}

#[derive(Args)]
struct MincutArgs {
    /// Graph file: first line `n m`, then `m` lines `u v` (0-based).
    #[arg(long)]
    graph: PathBuf,
    /// Independent contraction runs; the smallest cut wins.
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: u64,
}

/// Seeds parse as decimal or 0x-prefixed hex.
fn parse_seed(text: &str) -> Result<u64, String> {
    let parsed = if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        text.parse()
    };
    parsed.map_err(|_| format!("bad seed {text:?} (decimal or 0x-hex)"))
}

#[derive(Args)]
struct ValidateArgs {
    /// Suite name; see `randlab suites`.
    suite: String,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: u64,
    #[arg(long, default_value = "text")]
    format: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock runtime in the report (breaks byte-for-byte
    /// reproducibility of the output, the statistics stay identical).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// treap | skiplist | cuckoo
    structure: String,
    /// Script with one operation per line: `insert K`, `delete K`, `search K`.
    #[arg(long)]
    ops: PathBuf,
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: u64,
}

#[derive(Subcommand)]
enum SketchCommand {
    /// Build a count-min sketch from an `index count` stream and answer
    /// point queries from a file of indices.
    Replay(SketchReplayArgs),
}

#[derive(Args)]
struct SketchReplayArgs {
    /// Stream file: one `index count` pair per line (or the compact binary
    /// pair layout with --binary).
    #[arg(long)]
    input: PathBuf,
    /// Query file: one index per line.
    #[arg(long)]
    query: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Accept negative counts and answer with the row median.
    #[arg(long)]
    general: bool,
    /// Read the input as the compact binary pair format.
    #[arg(long)]
    binary: bool,
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: u64,
}

#[derive(Subcommand)]
enum HashCommand {
    /// Sample a member of a hash family and print it as JSON.
    Sample(HashSampleArgs),
}

#[derive(Args)]
struct HashSampleArgs {
    /// mod_p | multiply_shift | tabulation
    #[arg(long)]
    family: String,
    /// Largest key the function must accept (mod_p).
    #[arg(long, default_value_t = u32::MAX as u64)]
    universe_max: u64,
    /// Bucket count (mod_p).
    #[arg(long, default_value_t = 1 << 16)]
    m: u64,
    /// Input bits (multiply_shift).
    #[arg(long, default_value_t = 64)]
    k: u32,
    /// Output bits (multiply_shift).
    #[arg(long, default_value_t = 16)]
    l: u32,
    /// Character count (tabulation).
    #[arg(long, default_value_t = 8)]
    c: u32,
    /// Bits per character (tabulation).
    #[arg(long, default_value_t = 8)]
    char_bits: u32,
    /// Output bits (tabulation).
    #[arg(long, default_value_t = 16)]
    m_bits: u32,
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: u64,
    /// Also print the sampled function applied to this key.
    #[arg(long)]
    eval: Option<u64>,
    /// Write the versioned binary layout here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum LshCommand {
    /// Build a near-neighbor index over a 0/1 dataset and answer queries,
    /// one `query_id point_id distance` line per query.
    Query(LshQueryArgs),
}

#[derive(Args)]
struct LshQueryArgs {
    /// Dataset: one 0/1 vector per line (or decimals in [0,1] with --l1).
    #[arg(long)]
    data: PathBuf,
    /// Queries, same format as the dataset.
    #[arg(long)]
    queries: PathBuf,
    /// Near radius (in bits; with --l1, in embedding cells).
    #[arg(long)]
    r1: u32,
    /// Far radius; answers are never farther than this.
    #[arg(long)]
    r2: u32,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Treat inputs as l1 vectors and embed each coordinate into this many
    /// unary cells before indexing.
    #[arg(long)]
    l1_resolution: Option<usize>,
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: u64,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Validate(args) => validate(args),
        Command::Suites => {
            for suite in harness::available_suites() {
                println!(
                    "{suite}: {}",
                    harness::suite_description(suite).unwrap_or("")
                );
            }
            Ok(0)
        }
        Command::Bench(args) => bench(args),
        Command::Sketch(SketchCommand::Replay(args)) => sketch_replay(args),
        Command::Hash(HashCommand::Sample(args)) => hash_sample(args),
        Command::Lsh(LshCommand::Query(args)) => lsh_query(args),
        Command::Mincut(args) => mincut(args),
    }
}

fn mincut(args: MincutArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.graph)
        .with_context(|| format!("reading {}", args.graph.display()))?;
    let graph =
        randlab_core::mincut::MultiGraph::from_text(&text).map_err(|e| anyhow::anyhow!(e))?;
    let mut src = RandomSource::new(args.seed);
    let cut = randlab_core::mincut::karger_amplified(&mut src, &graph, args.reps)
        .map_err(|e| anyhow::anyhow!(e))?;
    println!("cut_size {}", cut.cut_size);
    let side = |vs: &[u32]| {
        vs.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("side_a {}", side(&cut.partition.0));
    println!("side_b {}", side(&cut.partition.1));
    Ok(0)
}

fn validate(args: ValidateArgs) -> Result<i32> {
    let format: Format = args
        .format
        .parse()
        .map_err(|e: String| anyhow::anyhow!(e))?;
    let spec = ExperimentSpec {
        suite: args.suite,
        params: SuiteParams {
            n: args.n,
            p: args.p,
            eps: args.eps,
            delta: args.delta,
            phi: args.phi,
            trials: args.trials,
        },
        seed: args.seed,
    };
    let report = if args.timing {
        harness::run_timed(&spec)?
    } else {
        harness::run(&spec)?
    };
    let rendered = harness::emit(&report, format);
    match args.out {
        Some(path) => {
            std::fs::write(&path, rendered)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{rendered}"),
    }
    Ok(if report.all_pass() { 0 } else { 1 })
}

enum BenchOp {
    Insert(u64),
    Delete(u64),
    Search(u64),
}

fn parse_ops(text: &str) -> Result<Vec<BenchOp>> {
    let mut ops = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let verb = fields.next().unwrap();
        let key: u64 = fields
            .next()
            .with_context(|| format!("line {}: missing key", lineno + 1))?
            .parse()
            .with_context(|| format!("line {}: bad key", lineno + 1))?;
        match verb {
            "insert" => ops.push(BenchOp::Insert(key)),
            "delete" => ops.push(BenchOp::Delete(key)),
            "search" => ops.push(BenchOp::Search(key)),
            other => bail!("line {}: unknown op {other:?}", lineno + 1),
        }
    }
    Ok(ops)
}

fn bench(args: BenchArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.ops)
        .with_context(|| format!("reading {}", args.ops.display()))?;
    let ops = parse_ops(&text)?;
    let mut src = RandomSource::new(args.seed);
    let mut inserts = 0u64;
    let mut deletes = 0u64;
    let mut searches = 0u64;
    let mut found = 0u64;
    match args.structure.as_str() {
        "treap" => {
            let mut treap = Treap::new();
            for op in &ops {
                match op {
                    BenchOp::Insert(k) => {
                        treap.insert(*k, &mut src).ok();
                        inserts += 1;
                    }
                    BenchOp::Delete(k) => {
                        treap.delete(k).ok();
                        deletes += 1;
                    }
                    BenchOp::Search(k) => {
                        searches += 1;
                        if treap.search(k).found {
                            found += 1;
                        }
                    }
                }
            }
            let stats = treap.stats();
            println!(
                "treap len {} inserts {inserts} deletes {deletes} searches {searches} found {found}",
                treap.len()
            );
            println!(
                "rotations {} key_comparisons {} priority_ties {} bits_consumed {}",
                stats.rotations,
                stats.key_comparisons,
                stats.priority_ties,
                src.bits_consumed()
            );
        }
        "skiplist" => {
            let mut list = SkipList::new(0.5, ops.len() as u64 + 1)
                .map_err(|e| anyhow::anyhow!(e.to_string()))?;
            for op in &ops {
                match op {
                    BenchOp::Insert(k) => {
                        list.insert(*k, &mut src).ok();
                        inserts += 1;
                    }
                    BenchOp::Delete(k) => {
                        list.delete(k).ok();
                        deletes += 1;
                    }
                    BenchOp::Search(k) => {
                        searches += 1;
                        if list.search(k).found {
                            found += 1;
                        }
                    }
                }
            }
            let stats = list.stats();
            println!(
                "skiplist len {} inserts {inserts} deletes {deletes} searches {searches} found {found}",
                list.len()
            );
            println!(
                "links {} links_traversed {} bits_consumed {}",
                list.total_links(),
                stats.links_traversed,
                src.bits_consumed()
            );
        }
        "cuckoo" => {
            let slots = (ops.len().max(8) * 4).next_power_of_two();
            let mut table =
                CuckooTable::new(&mut src, slots).map_err(|e| anyhow::anyhow!(e.to_string()))?;
            for op in &ops {
                match op {
                    BenchOp::Insert(k) => {
                        table.insert(*k, *k, &mut src).ok();
                        inserts += 1;
                    }
                    BenchOp::Delete(k) => {
                        table.delete(*k).ok();
                        deletes += 1;
                    }
                    BenchOp::Search(k) => {
                        searches += 1;
                        if table.contains(*k) {
                            found += 1;
                        }
                    }
                }
            }
            let stats = table.stats();
            println!(
                "cuckoo len {} inserts {inserts} deletes {deletes} searches {searches} found {found}",
                table.len()
            );
            println!(
                "displacements {} rehashes {} bits_consumed {}",
                stats.displacements,
                stats.rehashes,
                src.bits_consumed()
            );
        }
        other => bail!("unknown structure {other:?} (treap | skiplist | cuckoo)"),
    }
    Ok(0)
}

fn sketch_replay(args: SketchReplayArgs) -> Result<i32> {
    let params =
        CmsParams::new(args.eps, args.delta).map_err(|e| anyhow::anyhow!(e.to_string()))?;
    let mode = if args.general {
        StreamMode::General
    } else {
        StreamMode::NonNegative
    };
    let updates = if args.binary {
        let bytes = std::fs::read(&args.input)
            .with_context(|| format!("reading {}", args.input.display()))?;
        randlab_core::count_min::read_binary_stream(&bytes)
            .map_err(|e| anyhow::anyhow!(e.to_string()))?
    } else {
        let text = std::fs::read_to_string(&args.input)
            .with_context(|| format!("reading {}", args.input.display()))?;
        randlab_core::count_min::read_text_stream(&text)
            .map_err(|e| anyhow::anyhow!(e.to_string()))?
    };
    let universe_max = updates.iter().map(|&(i, _)| i).max().unwrap_or(0).max(1);
    let mut src = RandomSource::new(args.seed);
    let mut sketch = CountMinSketch::new(&mut src, params, mode, universe_max)
        .map_err(|e| anyhow::anyhow!(e.to_string()))?;
    for (index, count) in updates {
        sketch
            .update(index, count)
            .map_err(|e| anyhow::anyhow!(e.to_string()))?;
    }
    let queries = std::fs::read_to_string(&args.query)
        .with_context(|| format!("reading {}", args.query.display()))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (lineno, line) in queries.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let index: u64 = line
            .parse()
            .with_context(|| format!("query line {}: bad index", lineno + 1))?;
        let estimate = if index > universe_max {
            // Outside the stream's key range nothing was ever counted.
            0
        } else if mode == StreamMode::NonNegative {
            sketch
                .point_query_min(index)
                .map_err(|e| anyhow::anyhow!(e.to_string()))?
        } else {
            sketch.point_query_median(index)
        };
        writeln!(out, "{index} {estimate}")?;
    }
    Ok(0)
}

fn hash_sample(args: HashSampleArgs) -> Result<i32> {
    let mut src = RandomSource::new(args.seed);
    let handle = match args.family.as_str() {
        "mod_p" => hashing::sample_mod_p(&mut src, args.universe_max, args.m),
        "multiply_shift" => hashing::sample_multiply_shift(&mut src, args.k, args.l),
        "tabulation" => hashing::sample_tabulation(&mut src, args.c, args.char_bits, args.m_bits),
        other => bail!("unknown family {other:?} (mod_p | multiply_shift | tabulation)"),
    }
    .map_err(|e| anyhow::anyhow!(e.to_string()))?;
    println!("{}", handle.to_json());
    if let Some(key) = args.eval {
        println!("eval {key} -> {}", handle.eval(key));
    }
    if let Some(path) = args.out {
        std::fs::write(&path, handle.to_bytes())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(0)
}

fn lsh_query(args: LshQueryArgs) -> Result<i32> {
    let data = std::fs::read_to_string(&args.data)
        .with_context(|| format!("reading {}", args.data.display()))?;
    let queries_text = std::fs::read_to_string(&args.queries)
        .with_context(|| format!("reading {}", args.queries.display()))?;
    let (points, queries) = match args.l1_resolution {
        None => (
            lsh::parse_hamming_dataset(&data).map_err(|e| anyhow::anyhow!(e.to_string()))?,
            lsh::parse_hamming_dataset(&queries_text)
                .map_err(|e| anyhow::anyhow!(e.to_string()))?,
        ),
        Some(resolution) => {
            let embed = |text: &str| -> Result<Vec<lsh::BitVector>> {
                lsh::parse_l1_dataset(text)
                    .map_err(|e| anyhow::anyhow!(e.to_string()))?
                    .iter()
                    .map(|v| {
                        lsh::l1_embed(v, resolution).map_err(|e| anyhow::anyhow!(e.to_string()))
                    })
                    .collect()
            };
            (embed(&data)?, embed(&queries_text)?)
        }
    };
    let mut src = RandomSource::new(args.seed);
    let index = lsh::PlebIndex::build(&mut src, points, args.r1, args.r2, args.delta)
        .map_err(|e| anyhow::anyhow!(e.to_string()))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (query_id, query) in queries.iter().enumerate() {
        let outcome = index
            .query(query)
            .map_err(|e| anyhow::anyhow!(e.to_string()))?;
        writeln!(
            out,
            "{}",
            lsh::format_query_result(query_id, outcome.result)
        )?;
    }
    Ok(0)
}
