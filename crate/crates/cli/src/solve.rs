use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde_json::Value;
use wscluster::instance::parse_instance;
use wscluster::solvers::solve;
use wscluster::tts::{write_run_log, RunRecord, RUN_LOG_HEADER};
use wscluster::{ProblemInstance, RngStream, SolveOutcome, SolverId, SolverParams};

use crate::error::{read_text, CliError, CliResult};

/// Instance id used in run logs: the file stem.
pub fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn load_instance(path: &Path) -> CliResult<(String, ProblemInstance)> {
    let text = read_text(path)?;
    let instance =
        parse_instance(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    Ok((instance_id(path), instance))
}

/// Defaults for `solver` at size `n`, overlaid with the keys of
/// `overrides` and with the budget knob set to `budget`.
pub fn resolve_params(
    solver: SolverId,
    n: usize,
    overrides: Option<&Value>,
    budget: Option<usize>,
) -> CliResult<SolverParams> {
    let mut value = serde_json::to_value(SolverParams::defaults(solver, n)).expect("params serialize");
    if let Some(over) = overrides {
        let over = over
            .as_object()
            .ok_or_else(|| CliError::validation("solver parameters must be a JSON object"))?;
        let target = value.as_object_mut().expect("tagged params are objects");
        for (k, v) in over {
            if k == "solver" && v.as_str() != Some(solver.as_str()) {
                return Err(CliError::validation(format!(
                    "parameter file is for solver {v}, but solver {solver} was requested"
                )));
            }
            target.insert(k.clone(), v.clone());
        }
    }
    let params: SolverParams =
        serde_json::from_value(value).map_err(|e| CliError::validation(format!("solver parameters: {e}")))?;
    let params = match budget {
        Some(b) => params.with_budget(b),
        None => params,
    };
    params.validate()?;
    Ok(params)
}

/// One seeded run reduced to its run-log row.
pub fn execute(
    instance: &ProblemInstance,
    id: &str,
    params: &SolverParams,
    seed: u64,
) -> CliResult<(RunRecord, SolveOutcome)> {
    let outcome = solve(instance, params, &mut RngStream::new(seed))?;
    let record = RunRecord {
        solver: params.solver(),
        n: instance.n(),
        instance_id: id.to_string(),
        seed,
        success: outcome.success,
        work: outcome.work_sweep_site_updates,
        wall_ns: outcome.wall_time.as_nanos().min(u64::MAX as u128) as u64,
        t_ann_work: params.nominal_work(instance.n()),
    };
    Ok((record, outcome))
}

/// Appends rows to a run log, writing the header into a new or empty file
/// and refusing files with a different header.
pub fn append_log(path: &Path, records: &[RunRecord]) -> CliResult<()> {
    let existing = match std::fs::File::open(path) {
        Ok(f) => {
            let mut first = String::new();
            BufReader::new(f).read_line(&mut first).map_err(|e| CliError::io(path, e))?;
            Some(first)
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(CliError::io(path, e)),
    };
    let needs_header = match existing.as_deref() {
        None | Some("") => true,
        Some(line) if line.trim_end() == RUN_LOG_HEADER.join(",") => false,
        Some(line) => {
            return Err(CliError::validation(format!(
                "{}: not a run log (header '{}')",
                path.display(),
                line.trim_end()
            )))
        }
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::io(path, e))?;
    let mut buf = Vec::new();
    write_run_log(&mut buf, records, needs_header)?;
    file.write_all(&buf).map_err(|e| CliError::io(path, e))?;
    file.flush().map_err(|e| CliError::io(path, e))
}

/// Runs one solver on one instance file and appends the row to `log`.
pub fn run(
    solver: SolverId,
    instance_path: &Path,
    seed: u64,
    params_path: Option<&Path>,
    budget: Option<usize>,
    log: &Path,
) -> CliResult<(RunRecord, SolveOutcome)> {
    let (id, instance) = load_instance(instance_path)?;
    let overrides = match params_path {
        Some(p) => Some(
            serde_json::from_str::<Value>(&read_text(p)?)
                .map_err(|e| CliError::validation(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    let params = resolve_params(solver, instance.n(), overrides.as_ref(), budget)?;
    let (record, outcome) = execute(&instance, &id, &params, seed)?;
    append_log(log, std::slice::from_ref(&record))?;
    Ok((record, outcome))
}
