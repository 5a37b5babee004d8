//! Success probabilities and time-to-solution.
//!
//! The time to solution is the cost of one run times the number of
//! repetitions `R = ln(0.01) / ln(1 - p)` needed to see the ground state at
//! least once with 99% probability. Unsolved points carry `f64::INFINITY`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::mcmc::RngStream;
use crate::solvers::{solve, SolverId, SolverParams};
use crate::stats::{nearest_rank, wilson_interval, Interval};

/// Target confidence of the repetition count.
pub const TARGET_CONFIDENCE: f64 = 0.99;

/// Bootstrap resamples used for confidence intervals.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Header of the run-log CSV.
pub const RUN_LOG_HEADER: [&str; 8] = [
    "solver",
    "n",
    "instance_id",
    "seed",
    "success",
    "work",
    "wall_ns",
    "t_ann_work",
];

/// One solver run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub solver: SolverId,
    pub n: usize,
    pub instance_id: String,
    pub seed: u64,
    pub success: bool,
    /// Measured work in site updates.
    pub work: u64,
    pub wall_ns: u64,
    /// Nominal per-run budget in site updates; identifies the parameter
    /// point the run belongs to.
    pub t_ann_work: u64,
}

impl RunRecord {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("run record with n = 0"));
        }
        if self.work == 0 {
            return Err(Error::invalid("run record with zero work"));
        }
        Ok(())
    }
}

/// Reads a run log, checking the header and every row.
pub fn read_run_log<R: Read>(reader: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::parse("run log header", e.to_string()))?;
    if header.iter().ne(RUN_LOG_HEADER) {
        return Err(Error::parse(
            "run log header",
            format!("expected '{}', found '{}'", RUN_LOG_HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut out = Vec::new();
    for (k, row) in rdr.deserialize::<RunRecord>().enumerate() {
        let context = format!("run log row {}", k + 2);
        let record = row.map_err(|e| Error::parse(context.clone(), e.to_string()))?;
        record.validate().map_err(|e| Error::parse(context, e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

/// Writes rows to a run log. The header is written when `with_header`.
pub fn write_run_log<W: Write>(writer: W, records: &[RunRecord], with_header: bool) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    let io = |e: csv::Error| Error::parse("run log", e.to_string());
    if with_header {
        wtr.write_record(RUN_LOG_HEADER).map_err(io)?;
    }
    for r in records {
        wtr.serialize(r).map_err(io)?;
    }
    wtr.flush().map_err(|e| Error::parse("run log", e.to_string()))?;
    Ok(())
}

/// Fraction of successful runs with its Wilson 95% interval.
pub fn success_probability(records: &[RunRecord]) -> Result<(f64, Interval)> {
    if records.is_empty() {
        return Err(Error::invalid("success probability of an empty set of runs"));
    }
    let hits = records.iter().filter(|r| r.success).count() as u64;
    let trials = records.len() as u64;
    Ok((hits as f64 / trials as f64, wilson_interval(hits, trials)))
}

/// Repetitions needed for 99% confidence, at least one.
pub fn repetitions(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("success probability {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(f64::INFINITY);
    }
    if p >= TARGET_CONFIDENCE {
        return Ok(1.0);
    }
    Ok(((1.0 - TARGET_CONFIDENCE).ln() / (1.0 - p).ln()).max(1.0))
}

/// `t_ann * R(p)`; infinite when `p = 0`.
pub fn time_to_solution(p: f64, t_ann: f64) -> Result<f64> {
    Ok(t_ann * repetitions(p)?)
}

/// Cost of one parameter point measured over `trials` runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: SolverParams,
    pub p: f64,
    pub p_ci: Interval,
    /// Mean measured work per run.
    pub t_ann: f64,
    pub tts: f64,
}

/// Outcome of a parameter scan. `best` indexes `grid` and is `None` when
/// no point solved the instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtsOptimum {
    pub best: Option<usize>,
    pub grid: Vec<GridPoint>,
}

impl TtsOptimum {
    pub fn best_point(&self) -> Option<&GridPoint> {
        self.best.map(|k| &self.grid[k])
    }
}

/// Runs every grid point `trials` times and picks the smallest time to
/// solution, breaking ties toward the cheaper run. Trial `t` of grid point
/// `g` uses stream `rng.run(g * trials + t)`.
pub fn optimize_tts(
    instance: &ProblemInstance,
    grid: &[SolverParams],
    trials: usize,
    rng: &RngStream,
) -> Result<TtsOptimum> {
    if grid.is_empty() {
        return Err(Error::invalid("empty parameter grid"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let mut points = Vec::with_capacity(grid.len());
    for (g, params) in grid.iter().enumerate() {
        let mut hits = 0u64;
        let mut work = 0u64;
        for t in 0..trials {
            let mut stream = rng.run((g * trials + t) as u64);
            let out = solve(instance, params, &mut stream)?;
            hits += out.success as u64;
            work += out.work_sweep_site_updates;
        }
        let p = hits as f64 / trials as f64;
        let t_ann = work as f64 / trials as f64;
        points.push(GridPoint {
            params: params.clone(),
            p,
            p_ci: wilson_interval(hits, trials as u64),
            t_ann,
            tts: time_to_solution(p, t_ann)?,
        });
    }
    let best = (0..points.len())
        .filter(|&k| points[k].tts.is_finite())
        .min_by(|&a, &b| {
            let (pa, pb) = (&points[a], &points[b]);
            pa.tts.total_cmp(&pb.tts).then(pa.t_ann.total_cmp(&pb.t_ann))
        });
    Ok(TtsOptimum { best, grid: points })
}

/// Currency of a time to solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TtsUnit {
    Work,
    WallSeconds,
}

/// Percentile of the per-instance time to solution at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtsPoint {
    pub n: usize,
    pub solver: SolverId,
    pub unit: TtsUnit,
    pub percentile: f64,
    pub tts: f64,
    /// Bootstrap 95% interval of the percentile.
    pub ci: Interval,
    pub instances: usize,
    /// Fraction of instances never solved; they rank above every finite
    /// value.
    pub censored_fraction: f64,
}

/// Nearest-rank percentile across instances with a bootstrap interval.
///
/// Unsolved instances (infinite values) count as larger than every solved
/// one. Values are sorted before resampling, so the result does not depend
/// on input order.
pub fn aggregate_percentile<R: Rng + ?Sized>(
    values: &[f64],
    percentile: f64,
    rng: &mut R,
) -> Result<(f64, Interval, f64)> {
    if !(percentile > 0.0 && percentile < 100.0) {
        return Err(Error::invalid(format!("percentile {percentile} outside (0, 100)")));
    }
    if values.iter().any(|v| v.is_nan() || *v < 0.0) {
        return Err(Error::invalid("time to solution must be non-negative"));
    }
    let unsolved = values.iter().filter(|v| v.is_infinite()).count();
    if values.is_empty() || unsolved == values.len() {
        return Err(Error::Unsolved(format!(
            "no finite time to solution ({unsolved} unsolved of {} instances)",
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let point = nearest_rank(&sorted, percentile);
    let mut boot = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut sample = vec![0.0; sorted.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for x in sample.iter_mut() {
            *x = sorted[rng.random_range(0..sorted.len())];
        }
        sample.sort_by(f64::total_cmp);
        boot.push(nearest_rank(&sample, percentile));
    }
    boot.sort_by(f64::total_cmp);
    let ci = Interval::new(nearest_rank(&boot, 2.5).min(point), nearest_rank(&boot, 97.5).max(point));
    Ok((point, ci, unsolved as f64 / values.len() as f64))
}

/// Per-instance time to solution for one solver at one size, minimized
/// over the budgets present in the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceTts {
    pub solver: SolverId,
    pub n: usize,
    pub instance_id: String,
    pub t_ann_work: u64,
    pub p: f64,
    pub tts_work: f64,
    pub tts_wall_seconds: f64,
}

/// Reduces a run log to the best time to solution per
/// `(solver, n, instance)`. The cost of a run is its mean measured work
/// (or wall time) within the group of runs sharing a budget.
pub fn instance_tts(records: &[RunRecord]) -> Result<Vec<InstanceTts>> {
    let mut groups: BTreeMap<(SolverId, usize, &str, u64), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.solver, r.n, r.instance_id.as_str(), r.t_ann_work))
            .or_default()
            .push(r);
    }
    let mut best: BTreeMap<(SolverId, usize, &str), InstanceTts> = BTreeMap::new();
    for ((solver, n, id, budget), runs) in groups {
        let count = runs.len() as f64;
        let p = runs.iter().filter(|r| r.success).count() as f64 / count;
        let work = runs.iter().map(|r| r.work as f64).sum::<f64>() / count;
        let wall = runs.iter().map(|r| r.wall_ns as f64).sum::<f64>() / count * 1e-9;
        let candidate = InstanceTts {
            solver,
            n,
            instance_id: id.to_string(),
            t_ann_work: budget,
            p,
            tts_work: time_to_solution(p, work)?,
            tts_wall_seconds: time_to_solution(p, wall)?,
        };
        let slot = best.entry((solver, n, id)).or_insert_with(|| candidate.clone());
        if candidate.tts_work < slot.tts_work {
            *slot = candidate;
        }
    }
    Ok(best.into_values().collect())
}

/// Aggregates per-instance values into one point per `(solver, n, unit)`.
/// Sizes where every instance is unsolved are skipped and returned
/// separately.
pub fn tts_table(
    per_instance: &[InstanceTts],
    percentile: f64,
    rng: &mut RngStream,
) -> Result<(Vec<TtsPoint>, Vec<(SolverId, usize)>)> {
    let mut by_size: BTreeMap<(SolverId, usize), Vec<&InstanceTts>> = BTreeMap::new();
    for t in per_instance {
        by_size.entry((t.solver, t.n)).or_default().push(t);
    }
    let mut points = Vec::new();
    let mut unsolved = Vec::new();
    for ((solver, n), rows) in by_size {
        for unit in [TtsUnit::Work, TtsUnit::WallSeconds] {
            let values: Vec<f64> = rows
                .iter()
                .map(|r| match unit {
                    TtsUnit::Work => r.tts_work,
                    TtsUnit::WallSeconds => r.tts_wall_seconds,
                })
                .collect();
            match aggregate_percentile(&values, percentile, rng) {
                Ok((tts, ci, censored_fraction)) => points.push(TtsPoint {
                    n,
                    solver,
                    unit,
                    percentile,
                    tts,
                    ci,
                    instances: values.len(),
                    censored_fraction,
                }),
                Err(Error::Unsolved(_)) => {
                    if unit == TtsUnit::Work {
                        unsolved.push((solver, n));
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok((points, unsolved))
}
