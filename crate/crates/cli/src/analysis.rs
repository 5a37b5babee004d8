//! Run log to time-to-solution table and scaling fits.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use wscluster::scaling::{compare_solvers, fit_bootstrap, fit_label, FitModel, FitResult, RankRow};
use wscluster::tts::{instance_tts, tts_table, InstanceTts, RunRecord, TtsPoint};
use wscluster::{RngStream, SolverId};

use crate::error::{write_bytes, CliError, CliResult};
use crate::report::stable_hash;

#[derive(Debug, Clone, Serialize)]
pub struct SolverFit {
    pub solver: SolverId,
    pub model: FitModel,
    pub label: String,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TtsAnalysis {
    pub instances: Vec<InstanceTts>,
    pub points: Vec<TtsPoint>,
    /// `(solver, n)` groups where no instance was solved.
    pub unsolved: Vec<(SolverId, usize)>,
}

pub fn tts_analysis(records: &[RunRecord], percentile: f64, seed: u64) -> CliResult<TtsAnalysis> {
    let instances = instance_tts(records)?;
    let mut rng = RngStream::from_parts(seed, stable_hash(&["tts"]), 0);
    let (points, unsolved) = tts_table(&instances, percentile, &mut rng)?;
    Ok(TtsAnalysis {
        instances,
        points,
        unsolved,
    })
}

/// Bootstrap fits of both models per solver on work-unit times.
pub fn fit_solvers(instances: &[InstanceTts], percentile: f64, last_k: usize, seed: u64) -> Vec<SolverFit> {
    let mut samples: BTreeMap<SolverId, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for t in instances {
        samples.entry(t.solver).or_default().entry(t.n).or_default().push(t.tts_work);
    }
    let mut out = Vec::new();
    for (solver, by_size) in samples {
        for model in [FitModel::Linear, FitModel::LogCorrected] {
            let label = fit_label(solver, model);
            let mut rng = RngStream::from_parts(seed, stable_hash(&["fit", &label]), 0);
            let (fit, error) = match fit_bootstrap(model, &by_size, percentile, last_k, &mut rng) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            out.push(SolverFit {
                solver,
                model,
                label,
                fit,
                error,
            });
        }
    }
    out
}

/// Ranking of the linear fits by `b`.
pub fn rank_linear(fits: &[SolverFit]) -> Vec<RankRow> {
    let linear: Vec<(String, FitResult)> = fits
        .iter()
        .filter(|f| f.model == FitModel::Linear)
        .filter_map(|f| f.fit.clone().map(|fit| (f.label.clone(), fit)))
        .collect();
    compare_solvers(&linear)
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::validation(format!("{}: {e}", path.display()))
}

pub fn write_instance_tts_csv(path: &Path, rows: &[InstanceTts]) -> CliResult<()> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in rows {
        wtr.serialize(r).map_err(csv_err(path))?;
    }
    write_bytes(path, &wtr.into_inner().expect("in-memory writer"))
}

pub const TTS_TABLE_HEADER: [&str; 9] = [
    "n",
    "solver",
    "unit",
    "percentile",
    "tts",
    "ci_low",
    "ci_high",
    "instances",
    "censored_fraction",
];

pub fn write_tts_csv(path: &Path, points: &[TtsPoint]) -> CliResult<()> {
    let mut buf = Vec::new();
    {
        let mut wtr = csv::Writer::from_writer(&mut buf);
        wtr.write_record(TTS_TABLE_HEADER).map_err(csv_err(path))?;
        for p in points {
            let unit = serde_json::to_value(p.unit).expect("unit serializes");
            wtr.write_record([
                p.n.to_string(),
                p.solver.to_string(),
                unit.as_str().unwrap_or_default().to_string(),
                p.percentile.to_string(),
                p.tts.to_string(),
                p.ci.low.to_string(),
                p.ci.high.to_string(),
                p.instances.to_string(),
                p.censored_fraction.to_string(),
            ])
            .map_err(csv_err(path))?;
        }
        wtr.flush().map_err(|e| CliError::io(path, e))?;
    }
    buf.flush().ok();
    write_bytes(path, &buf)
}
