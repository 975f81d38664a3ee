//! Run records and performance profiles.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multilevel::RunReport;

/// One row of a run CSV. `seed` is `"mean"` on aggregate rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub k: usize,
    pub seed: String,
    pub cut: f64,
    pub imbalance: f64,
    pub time_total_s: f64,
    pub time_coarsen_s: f64,
    pub time_initial_s: f64,
    pub time_refine_s: f64,
    pub peak_aux_bytes: f64,
    pub compression_ratio: Option<f64>,
}

impl RunRecord {
    pub fn from_report(instance: &str, k: usize, seed: u64, report: &RunReport) -> Self {
        Self {
            instance: instance.to_string(),
            k,
            seed: seed.to_string(),
            cut: report.cut as f64,
            imbalance: report.imbalance,
            time_total_s: report.times.total,
            time_coarsen_s: report.times.coarsen,
            time_initial_s: report.times.initial,
            time_refine_s: report.times.refine,
            peak_aux_bytes: report.peak_aux.max() as f64,
            compression_ratio: report.compression_ratio,
        }
    }

    pub fn is_aggregate(&self) -> bool {
        self.seed == "mean"
    }
}

/// Arithmetic mean of every numeric column. `None` for no records.
pub fn mean_record(records: &[RunRecord]) -> Option<RunRecord> {
    let first = records.first()?;
    let n = records.len() as f64;
    let mean = |f: fn(&RunRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let ratio = records
        .iter()
        .map(|r| r.compression_ratio)
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.iter().sum::<f64>() / n);
    Some(RunRecord {
        instance: first.instance.clone(),
        k: first.k,
        seed: "mean".into(),
        cut: mean(|r| r.cut),
        imbalance: mean(|r| r.imbalance),
        time_total_s: mean(|r| r.time_total_s),
        time_coarsen_s: mean(|r| r.time_coarsen_s),
        time_initial_s: mean(|r| r.time_initial_s),
        time_refine_s: mean(|r| r.time_refine_s),
        peak_aux_bytes: mean(|r| r.peak_aux_bytes),
        compression_ratio: ratio,
    })
}

pub fn write_records<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Cut of one algorithm on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub instance: String,
    pub algorithm: String,
    pub cut: f64,
}

/// Fraction of instances per algorithm whose cut is within `τ` times the best
/// cut on that instance, for every `τ` in `taus`. Returns
/// `profile[i][a]` for `taus[i]` and `algorithms[a]`. Every algorithm must
/// have exactly one observation per instance.
pub fn performance_profile(
    observations: &[Observation],
    algorithms: &[String],
    taus: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if let Some(t) = taus.iter().find(|t| !(t.is_finite() && **t >= 1.0)) {
        return Err(Error::Domain(format!("τ must be a finite value >= 1, got {t}")));
    }
    let mut table: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
    for o in observations {
        if !algorithms.contains(&o.algorithm) {
            continue;
        }
        if !(o.cut.is_finite() && o.cut >= 0.0) {
            return Err(Error::Domain(format!("invalid cut {} for {}/{}", o.cut, o.instance, o.algorithm)));
        }
        if table.entry(&o.instance).or_default().insert(&o.algorithm, o.cut).is_some() {
            return Err(Error::Domain(format!("duplicate observation for {}/{}", o.instance, o.algorithm)));
        }
    }
    let mut missing = BTreeSet::new();
    for (instance, row) in &table {
        for a in algorithms {
            if !row.contains_key(a.as_str()) {
                missing.insert(format!("{instance}/{a}"));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Domain(format!(
            "missing observations: {}",
            missing.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let instances = table.len().max(1) as f64;
    Ok(taus
        .iter()
        .map(|&tau| {
            let tau = exact_decimal(tau);
            algorithms
                .iter()
                .map(|a| {
                    let within = table
                        .values()
                        .filter(|row| {
                            let best = row.values().copied().fold(f64::INFINITY, f64::min);
                            within_factor(row[a.as_str()], best, tau)
                        })
                        .count();
                    within as f64 / instances
                })
                .collect()
        })
        .collect())
}

/// `τ` as the fraction of its shortest decimal representation, so 1.1 means
/// 11/10 rather than the nearest double.
fn exact_decimal(tau: f64) -> (u128, u128) {
    let s = format!("{tau}");
    match s.split_once('.') {
        None => (s.parse().unwrap_or(u128::MAX), 1),
        Some((int, frac)) => {
            let frac = &frac[..frac.len().min(18)];
            let den = 10u128.pow(frac.len() as u32);
            let num = format!("{int}{frac}").parse().unwrap_or(u128::MAX);
            (num, den)
        }
    }
}

/// `cut <= τ·best`, exact for integral cuts.
fn within_factor(cut: f64, best: f64, (num, den): (u128, u128)) -> bool {
    if cut.fract() == 0.0 && best.fract() == 0.0 && cut < 1e18 && best < 1e18 {
        (cut as u128).saturating_mul(den) <= (best as u128).saturating_mul(num)
    } else {
        cut <= best * num as f64 / den as f64
    }
}
