//! Reads run CSVs, one per algorithm, and prints a performance profile.
//!
//! `perf-profile --run lp=lp.csv --run lpfm=lpfm.csv --tau 1,1.01,1.1,2`
//!
//! Per instance, the cut of an algorithm is its aggregate (`mean`) row if
//! present, else the arithmetic mean over its rows.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use slimpart::metrics::{performance_profile, read_records, Observation};

#[derive(Parser, Debug)]
#[command(name = "perf-profile", version, about = "Performance profiles over run CSVs")]
struct Args {
    /// `NAME=PATH` of a run CSV.
    #[arg(long = "run", required = true, value_parser = parse_run)]
    runs: Vec<(String, PathBuf)>,
    #[arg(long, value_delimiter = ',', default_value = "1,1.01,1.02,1.05,1.1,1.2,1.5,2")]
    tau: Vec<f64>,
    /// Output CSV. Printed to stdout if absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_run(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or("expected NAME=PATH")?;
    if name.is_empty() {
        return Err("empty algorithm name".into());
    }
    Ok((name.to_string(), PathBuf::from(path)))
}

fn observations(name: &str, path: &PathBuf) -> slimpart::Result<Vec<Observation>> {
    let records = read_records(File::open(path)?)?;
    let mut per_instance: BTreeMap<(String, usize), (Option<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let slot = per_instance.entry((r.instance, r.k)).or_default();
        if r.seed == "mean" {
            slot.0 = Some(r.cut);
        } else {
            slot.1.push(r.cut);
        }
    }
    Ok(per_instance
        .into_iter()
        .map(|((instance, k), (mean, cuts))| Observation {
            instance: format!("{instance}@{k}"),
            algorithm: name.to_string(),
            cut: mean.unwrap_or_else(|| cuts.iter().sum::<f64>() / cuts.len() as f64),
        })
        .collect())
}

fn run(args: &Args) -> slimpart::Result<()> {
    let mut all = Vec::new();
    for (name, path) in &args.runs {
        all.extend(observations(name, path)?);
    }
    let algorithms: Vec<String> = args.runs.iter().map(|(n, _)| n.clone()).collect();
    let profile = performance_profile(&all, &algorithms, &args.tau)?;
    let out: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout()),
    };
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["tau".to_string()];
    header.extend(algorithms);
    w.write_record(&header)?;
    for (tau, row) in args.tau.iter().zip(profile) {
        let mut fields = vec![tau.to_string()];
        fields.extend(row.iter().map(|f| f.to_string()));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
