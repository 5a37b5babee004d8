//! Overlap distributions and peak classification over an instance set.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use wscluster::landscape::{
    classify_peaks, peak_fraction, sample_overlap_distribution, write_histogram_csv, OverlapParams, PeakFraction,
    PeakParams, PeakVerdict, MIN_INSTANCES,
};
use wscluster::{ProblemInstance, RngStream};

use crate::error::{write_bytes, CliError, CliResult};
use crate::report::{stable_hash, write_report};
use crate::solve::load_instance;

#[derive(Debug, Clone, Serialize)]
pub struct LandscapeParams {
    pub instances: Vec<PathBuf>,
    pub overlap: OverlapParams,
    pub peaks: PeakParams,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceVerdict {
    pub instance_id: String,
    pub n: usize,
    pub samples: u64,
    pub verdict: PeakVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct LandscapeOutput {
    pub instances: Vec<InstanceVerdict>,
    /// Multi-peak fraction per size; absent when some size has fewer than
    /// the required number of instances.
    pub fractions: Option<Vec<PeakFraction>>,
    pub warnings: Vec<String>,
}

/// Instance files named directly or found in listed directories
/// (`manifest.json` excluded), sorted.
pub fn collect_instance_files(paths: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = std::fs::read_dir(p).map_err(|e| CliError::io(p, e))?;
            for entry in entries {
                let f = entry.map_err(|e| CliError::io(p, e))?.path();
                if f.extension().is_some_and(|x| x == "json") && f.file_name().is_some_and(|n| n != "manifest.json") {
                    out.push(f);
                }
            }
        } else {
            out.push(p.clone());
        }
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(CliError::Usage("no instance files given".into()));
    }
    Ok(out)
}

/// Stream used for instance `id`, independent of processing order.
pub fn instance_stream(seed: u64, id: &str) -> RngStream {
    RngStream::from_parts(seed, stable_hash(&["landscape", id]), 0)
}

/// Classifies every instance, writing one histogram CSV per instance into
/// `out/histograms` and `out/landscape.json`.
pub fn analyze(
    instances: &[(String, ProblemInstance)],
    overlap: &OverlapParams,
    peaks: &PeakParams,
    seed: u64,
    out: Option<&Path>,
) -> CliResult<LandscapeOutput> {
    let results: Vec<CliResult<(InstanceVerdict, Vec<u8>)>> = instances
        .par_iter()
        .map(|(id, inst)| {
            let hist = sample_overlap_distribution(inst, overlap, &instance_stream(seed, id))?;
            let verdict = classify_peaks(&hist, peaks)?;
            let mut csv = Vec::new();
            write_histogram_csv(&mut csv, &hist)?;
            Ok((
                InstanceVerdict {
                    instance_id: id.clone(),
                    n: inst.n(),
                    samples: hist.total(),
                    verdict,
                },
                csv,
            ))
        })
        .collect();
    let mut verdicts = Vec::with_capacity(results.len());
    for r in results {
        let (v, csv) = r?;
        if let Some(dir) = out {
            write_bytes(&dir.join("histograms").join(format!("{}.csv", v.instance_id)), &csv)?;
        }
        verdicts.push(v);
    }
    let mut by_size: BTreeMap<usize, Vec<PeakVerdict>> = BTreeMap::new();
    for v in &verdicts {
        by_size.entry(v.n).or_default().push(v.verdict.clone());
    }
    let mut warnings = Vec::new();
    let fractions = if by_size.values().all(|v| v.len() >= MIN_INSTANCES) {
        Some(peak_fraction(&by_size)?)
    } else {
        warnings.push(format!(
            "multi-peak fractions need at least {MIN_INSTANCES} instances per size; none reported"
        ));
        None
    };
    Ok(LandscapeOutput {
        instances: verdicts,
        fractions,
        warnings,
    })
}

pub fn run(params: &LandscapeParams, out: &Path, jobs: usize) -> CliResult<LandscapeOutput> {
    let files = collect_instance_files(&params.instances)?;
    let instances = files.iter().map(|f| load_instance(f)).collect::<CliResult<Vec<_>>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::validation(format!("thread pool: {e}")))?;
    let output = pool.install(|| analyze(&instances, &params.overlap, &params.peaks, params.seed, Some(out)))?;
    for w in &output.warnings {
        log::warn!("{w}");
    }
    write_report(&out.join("landscape.json"), "landscape", params, &output)?;
    Ok(output)
}
