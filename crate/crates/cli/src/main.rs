use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use log::{info, warn};

use slimpart::compressed::CompressionConfig;
use slimpart::io::{
    read_csr_binary, read_metis_graph, stream_compress, write_partition, BinaryCsrSource, MetisTextSource,
    NeighborhoodSource,
};
use slimpart::metrics::{mean_record, write_records, RunRecord};
use slimpart::multilevel::Refiner;
use slimpart::refinement::GainTableMode;
use slimpart::{partition, CompressedGraph, Epsilon, Graph, GraphView, Partition, RunConfig, RunReport};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Metis,
    Csrbin,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Parser, Debug)]
#[command(name = "partition", version, about = "Balanced k-way graph partitioning")]
struct Args {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "metis")]
    format: Format,
    /// Compress the input while loading and partition the compressed graph.
    #[arg(long, value_enum, default_value = "off")]
    compress: Switch,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    #[arg(long, default_value = "0.03", value_parser = parse_epsilon)]
    epsilon: Epsilon,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Runs with seeds `seed, seed+1, ...`.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    repetitions: u32,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    workers: u32,
    #[arg(long, default_value = "lp+fm", value_parser = parse_refiner)]
    refiner: Refiner,
    #[arg(long, default_value = "sparse", value_parser = parse_gain_table)]
    gain_table: GainTableMode,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u32).range(2..))]
    t_bump: u32,
    /// LP rounds for both coarsening and refinement.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    rounds: u32,
    #[arg(long)]
    deterministic: bool,
    /// Partition file of the best run. Defaults to `<graph>.part.<k>`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// CSV report. Printed to stdout if absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_epsilon(s: &str) -> Result<Epsilon, String> {
    s.parse().map_err(|e: slimpart::Error| e.to_string())
}

fn parse_refiner(s: &str) -> Result<Refiner, String> {
    s.parse().map_err(|e: slimpart::Error| e.to_string())
}

fn parse_gain_table(s: &str) -> Result<GainTableMode, String> {
    s.parse().map_err(|e: slimpart::Error| e.to_string())
}

enum Input {
    Plain(Graph),
    Compressed(CompressedGraph),
}

fn load(args: &Args) -> slimpart::Result<Input> {
    let workers = if args.deterministic { 1 } else { args.workers as usize };
    let compressed = |source: &dyn NeighborhoodSource| -> slimpart::Result<Input> {
        let (cg, stats) = stream_compress(source, &CompressionConfig::default(), None, workers)?;
        info!("compressed in {} packets, ratio {:.2}", stats.packets, cg.compression_ratio());
        Ok(Input::Compressed(cg))
    };
    match (args.format, args.compress) {
        (Format::Metis, Switch::Off) => {
            let (g, report) = read_metis_graph(&args.graph)?;
            if report != Default::default() {
                warn!("input repaired: {report:?}");
            }
            Ok(Input::Plain(g))
        }
        (Format::Metis, Switch::On) => compressed(&MetisTextSource::open(&args.graph)?),
        (Format::Csrbin, Switch::Off) => Ok(Input::Plain(read_csr_binary(&args.graph)?)),
        (Format::Csrbin, Switch::On) => compressed(&BinaryCsrSource::open(&args.graph)?),
    }
}

fn run_once<G: GraphView>(g: &G, config: &RunConfig) -> slimpart::Result<(Partition, RunReport)> {
    let (p, report) = partition(g, config)?;
    info!(
        "seed {}: cut {} imbalance {:.4} in {:.3}s",
        config.seed, report.cut, report.imbalance, report.times.total
    );
    Ok((p, report))
}

fn run(args: &Args) -> slimpart::Result<()> {
    let input = load(args)?;
    let instance = args
        .graph
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| args.graph.display().to_string());
    let mut records = Vec::new();
    let mut best: Option<(i64, Partition)> = None;
    for rep in 0..args.repetitions as u64 {
        let config = RunConfig {
            epsilon: args.epsilon,
            seed: args.seed.wrapping_add(rep),
            workers: args.workers as usize,
            coarsening_rounds: args.rounds as usize,
            refinement_rounds: args.rounds as usize,
            t_bump: args.t_bump as usize,
            refiner: args.refiner,
            gain_table: args.gain_table,
            deterministic: args.deterministic,
            ..RunConfig::new(args.k as usize)
        };
        let (p, report) = match &input {
            Input::Plain(g) => run_once(g, &config)?,
            Input::Compressed(cg) => {
                let (p, mut report) = run_once(cg, &config)?;
                report.compression_ratio = Some(cg.compression_ratio());
                (p, report)
            }
        };
        records.push(RunRecord::from_report(&instance, args.k as usize, config.seed, &report));
        if best.as_ref().is_none_or(|(cut, _)| report.cut < *cut) {
            best = Some((report.cut, p));
        }
    }
    if records.len() > 1 {
        records.extend(mean_record(&records));
    }

    let output = args.output.clone().unwrap_or_else(|| default_output(&args.graph, args.k));
    if let Some((_, p)) = best {
        write_partition(&output, p.assignment())?;
    }
    match &args.report {
        Some(path) => write_records(File::create(path)?, &records)?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_records(&mut lock, &records)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn default_output(graph: &Path, k: u32) -> PathBuf {
    let mut name = graph.as_os_str().to_owned();
    name.push(format!(".part.{k}"));
    PathBuf::from(name)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
