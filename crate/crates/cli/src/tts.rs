use std::path::{Path, PathBuf};

use serde::Serialize;
use wscluster::tts::read_run_log;

use crate::analysis::{tts_analysis, write_instance_tts_csv, write_tts_csv, TtsAnalysis};
use crate::error::{CliError, CliResult};
use crate::report::write_report;

#[derive(Debug, Clone, Serialize)]
pub struct TtsRequest {
    pub log: PathBuf,
    pub percentile: f64,
    pub seed: u64,
}

/// Writes `instance_tts.csv`, `tts.csv` and `tts.json` into `out`.
pub fn run(req: &TtsRequest, out: &Path) -> CliResult<TtsAnalysis> {
    let file = std::fs::File::open(&req.log).map_err(|e| CliError::io(&req.log, e))?;
    let records = read_run_log(file).map_err(|e| CliError::validation(format!("{}: {e}", req.log.display())))?;
    let analysis = tts_analysis(&records, req.percentile, req.seed)?;
    write_instance_tts_csv(&out.join("instance_tts.csv"), &analysis.instances)?;
    write_tts_csv(&out.join("tts.csv"), &analysis.points)?;
    write_report(&out.join("tts.json"), "tts", req, &analysis)?;
    Ok(analysis)
}
