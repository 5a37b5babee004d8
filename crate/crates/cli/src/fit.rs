//! Scaling fits of a `n,tts` table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wscluster::scaling::{
    compare_solvers, fit_bootstrap, fit_linear, fit_log_corrected, write_curve_csv, FitModel, FitPoint, FitResult,
    RankRow,
};
use wscluster::RngStream;

use crate::error::{read_text, write_bytes, CliError, CliResult};
use crate::report::{stable_hash, write_report};

/// Samples per curve written with `--curve`.
const CURVE_SAMPLES: usize = 50;

#[derive(Debug, Clone, Serialize)]
pub struct FitParams {
    pub input: PathBuf,
    pub model: FitModel,
    pub last_k: usize,
    pub percentile: f64,
    pub unit: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledFit {
    pub label: String,
    pub fit: FitResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitOutput {
    pub fits: Vec<LabeledFit>,
    pub ranking: Vec<RankRow>,
}

/// `label -> n -> values` from a CSV with columns `n` and `tts` (or
/// `log10_tts`), optionally `solver` and `unit`. Rows in another unit are
/// skipped.
pub fn read_table(path: &Path, unit: &str) -> CliResult<BTreeMap<String, BTreeMap<usize, Vec<f64>>>> {
    let text = read_text(path)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| CliError::validation(format!("{}: header: {e}", path.display())))?
        .clone();
    let col = |name: &str| header.iter().position(|h| h.trim() == name);
    let n_col = col("n").ok_or_else(|| CliError::validation(format!("{}: missing column 'n'", path.display())))?;
    let (value_col, is_log) = match (col("tts"), col("log10_tts")) {
        (Some(c), _) => (c, false),
        (None, Some(c)) => (c, true),
        _ => {
            return Err(CliError::validation(format!(
                "{}: missing column 'tts' or 'log10_tts'",
                path.display()
            )))
        }
    };
    let (solver_col, unit_col) = (col("solver"), col("unit"));
    let mut out: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for (k, row) in rdr.records().enumerate() {
        let line = k + 2;
        let bad = |m: String| CliError::validation(format!("{}: row {line}: {m}", path.display()));
        let row = row.map_err(|e| bad(e.to_string()))?;
        if unit_col.is_some_and(|c| row.get(c).map(str::trim) != Some(unit)) {
            continue;
        }
        let n: usize = row[n_col].trim().parse().map_err(|_| bad(format!("bad n '{}'", &row[n_col])))?;
        if n == 0 {
            return Err(bad("n must be positive".into()));
        }
        let raw = row[value_col].trim();
        let v: f64 = raw.parse().map_err(|_| bad(format!("bad value '{raw}'")))?;
        let v = if is_log { 10f64.powf(v) } else { v };
        if v.is_nan() || v <= 0.0 {
            return Err(bad(format!("time to solution must be positive, got '{raw}'")));
        }
        let label = solver_col.map_or("data", |c| row.get(c).unwrap_or("data")).trim().to_string();
        out.entry(label).or_default().entry(n).or_default().push(v);
    }
    if out.is_empty() {
        return Err(CliError::validation(format!("{}: no rows in unit '{unit}'", path.display())));
    }
    Ok(out)
}

/// Direct fit when every size has one value, bootstrap over instances
/// otherwise.
pub fn fit_table(
    samples: &BTreeMap<usize, Vec<f64>>,
    model: FitModel,
    last_k: usize,
    percentile: f64,
    rng: &mut RngStream,
) -> CliResult<FitResult> {
    if samples.values().all(|v| v.len() == 1) {
        let points: Vec<FitPoint> = samples
            .iter()
            .filter(|(_, v)| v[0].is_finite())
            .map(|(&n, v)| FitPoint {
                n: n as f64,
                log10_tts: v[0].log10(),
            })
            .collect();
        Ok(match model {
            FitModel::Linear => fit_linear(&points, last_k)?,
            FitModel::LogCorrected => fit_log_corrected(&points)?,
        })
    } else {
        Ok(fit_bootstrap(model, samples, percentile, last_k, rng)?)
    }
}

fn curve_path(base: &Path, label: &str, several: bool) -> PathBuf {
    if !several {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let safe: String = label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    base.with_file_name(format!("{stem}-{safe}.csv"))
}

pub fn run(params: &FitParams, out: Option<&Path>, curve: Option<&Path>) -> CliResult<FitOutput> {
    let table = read_table(&params.input, &params.unit)?;
    let mut fits = Vec::new();
    for (label, samples) in &table {
        let mut rng = RngStream::from_parts(params.seed, stable_hash(&["fit", label]), 0);
        let fit = fit_table(samples, params.model, params.last_k, params.percentile, &mut rng)
            .map_err(|e| CliError::validation(format!("{label}: {e}")))?;
        for w in &fit.warnings {
            log::warn!("{label}: {w}");
        }
        fits.push(LabeledFit {
            label: label.clone(),
            fit,
        });
    }
    if let Some(base) = curve {
        for f in &fits {
            let lo = f.fit.points.iter().map(|p| p.n).fold(f64::INFINITY, f64::min);
            let hi = f.fit.points.iter().map(|p| p.n).fold(0.0, f64::max);
            let mut buf = Vec::new();
            write_curve_csv(&mut buf, &f.fit, lo, hi.max(lo * 1.0001), CURVE_SAMPLES)?;
            write_bytes(&curve_path(base, &f.label, fits.len() > 1), &buf)?;
        }
    }
    let ranking = compare_solvers(&fits.iter().map(|f| (f.label.clone(), f.fit.clone())).collect::<Vec<_>>());
    let output = FitOutput { fits, ranking };
    if let Some(path) = out {
        write_report(path, "fit", params, &output)?;
    }
    Ok(output)
}
