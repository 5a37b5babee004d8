//! Plan-driven benchmark: instances, reference energies, runs, analysis.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use wscluster::instance::{parse_instance, serialize_instance};
use wscluster::scaling::RankRow;
use wscluster::tts::{read_run_log, RunRecord};
use wscluster::{ProblemInstance, ReferenceMethod, RngStream, SolverId, SolverParams};

use crate::analysis::{fit_solvers, rank_linear, tts_analysis, write_instance_tts_csv, write_tts_csv, SolverFit, TtsAnalysis};
use crate::error::{create_dir, read_text, write_bytes, CliError, CliResult};
use crate::generate::{generate_set, LayoutSpec};
use crate::report::{stable_hash, write_report};
use crate::solve::{append_log, execute, resolve_params};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstancePlan {
    pub pair_counts: Vec<usize>,
    /// Instances per size.
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverPlan {
    pub solver: SolverId,
    /// Keys overriding the solver defaults.
    #[serde(default)]
    pub params: Option<Value>,
    /// Budget grid used at every size without an entry in
    /// `budgets_by_pairs`.
    #[serde(default)]
    pub budgets: Vec<usize>,
    #[serde(default)]
    pub budgets_by_pairs: BTreeMap<usize, Vec<usize>>,
}

impl SolverPlan {
    pub fn budgets_for(&self, pairs: usize) -> &[usize] {
        self.budgets_by_pairs.get(&pairs).unwrap_or(&self.budgets)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsensusRun {
    pub solver: SolverId,
    #[serde(default)]
    pub params: Option<Value>,
    pub budget: usize,
}

/// Long runs whose best energy becomes the reference of instances too large
/// for enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsensusPlan {
    pub runs: Vec<ConsensusRun>,
    /// Seeds per run.
    pub seeds: usize,
}

impl Default for ConsensusPlan {
    fn default() -> Self {
        ConsensusPlan {
            runs: vec![
                ConsensusRun {
                    solver: SolverId::PtIcm,
                    params: None,
                    budget: 4000,
                },
                ConsensusRun {
                    solver: SolverId::Sa,
                    params: None,
                    budget: 4000,
                },
            ],
            seeds: 2,
        }
    }
}

fn default_percentile() -> f64 {
    50.0
}

fn default_last_k() -> usize {
    wscluster::scaling::DEFAULT_LAST_K
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchPlan {
    pub instances: InstancePlan,
    pub solvers: Vec<SolverPlan>,
    /// Runs per (instance, solver, budget).
    pub trials: usize,
    /// Master seed of every run and resample.
    pub seed: u64,
    #[serde(default = "default_percentile")]
    pub percentile: f64,
    #[serde(default = "default_last_k")]
    pub fit_last_k: usize,
    #[serde(default)]
    pub consensus: ConsensusPlan,
}

impl BenchPlan {
    pub fn parse(text: &str) -> CliResult<Self> {
        let plan: BenchPlan = serde_json::from_str(text).map_err(|e| CliError::validation(format!("plan: {e}")))?;
        plan.validate()?;
        Ok(plan)
    }

    /// Checks every size, budget and parameter set before anything runs.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::validation(format!("plan: {m}")));
        if self.instances.pair_counts.is_empty() || self.instances.pair_counts.contains(&0) {
            return bad("pair_counts must be a non-empty list of positive counts".into());
        }
        if self.instances.count == 0 {
            return bad("instances.count must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.solvers.is_empty() {
            return bad("no solvers listed".into());
        }
        if !(self.percentile > 0.0 && self.percentile < 100.0) {
            return bad(format!("percentile {} outside (0, 100)", self.percentile));
        }
        if self.consensus.seeds == 0 || self.consensus.runs.is_empty() {
            return bad("consensus needs at least one run and one seed".into());
        }
        for &pairs in &self.instances.pair_counts {
            let n = 16 * pairs;
            for s in &self.solvers {
                let budgets = s.budgets_for(pairs);
                if budgets.is_empty() {
                    return bad(format!("solver {} has no budgets for {pairs} pairs", s.solver));
                }
                for &b in budgets {
                    resolve_params(s.solver, n, s.params.as_ref(), Some(b))
                        .map_err(|e| CliError::validation(format!("plan: solver {}: {e}", s.solver)))?;
                }
            }
            for c in &self.consensus.runs {
                resolve_params(c.solver, n, c.params.as_ref(), Some(c.budget))
                    .map_err(|e| CliError::validation(format!("plan: consensus {}: {e}", c.solver)))?;
            }
        }
        Ok(())
    }
}

/// Seed of trial `trial` of `solver` at `budget` on instance `id`.
pub fn trial_seed(master: u64, solver: SolverId, id: &str, budget: usize, trial: usize) -> u64 {
    let key = stable_hash(&[solver.as_str(), id, &budget.to_string()]);
    RngStream::from_parts(master, key, trial as u64).next_u64()
}

fn consensus_seed(master: u64, id: &str, run: usize, k: usize) -> u64 {
    let key = stable_hash(&["consensus", id, &run.to_string()]);
    RngStream::from_parts(master, key, k as u64).next_u64()
}

#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub id: String,
    pub pairs: usize,
    pub instance: ProblemInstance,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceEntry {
    pub instance_id: String,
    pub n: usize,
    pub method: ReferenceMethod,
    pub energy_scaled: Option<i64>,
    pub all_down_scaled: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Undercut {
    pub instance_id: String,
    pub solver: SolverId,
    pub seed: u64,
    pub energy_scaled: i64,
    pub reference_scaled: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub runs_planned: usize,
    pub runs_new: usize,
    pub runs_in_log: usize,
    pub complete: bool,
    pub failures: Vec<String>,
    pub references: Vec<ReferenceEntry>,
    /// Runs of this session that found an energy below the reference.
    pub reference_undercuts: Vec<Undercut>,
    pub tts: Option<TtsAnalysis>,
    pub fits: Vec<SolverFit>,
    pub ranking: Vec<RankRow>,
}

/// Output layout of a bench directory.
pub struct BenchPaths {
    pub root: PathBuf,
}

impl BenchPaths {
    pub fn instances(&self) -> PathBuf {
        self.root.join("instances")
    }
    pub fn run_log(&self) -> PathBuf {
        self.root.join("runs.csv")
    }
    pub fn instance_tts(&self) -> PathBuf {
        self.root.join("instance_tts.csv")
    }
    pub fn tts_table(&self) -> PathBuf {
        self.root.join("tts.csv")
    }
    pub fn report(&self) -> PathBuf {
        self.root.join("report.json")
    }
}

fn pool(jobs: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::validation(format!("thread pool: {e}")))
}

/// Generated instances with reference energies, reusing files left by an
/// earlier execution of the same plan.
pub fn prepare_instances(plan: &BenchPlan, dir: &Path, jobs: usize) -> CliResult<Vec<BenchInstance>> {
    create_dir(dir)?;
    let mut out = Vec::new();
    let mut pending = Vec::new();
    for &pairs in &plan.instances.pair_counts {
        for g in generate_set(LayoutSpec::Pairs(pairs), plan.instances.count, plan.instances.seed)? {
            let path = dir.join(format!("{}.json", g.id));
            let instance = if path.exists() {
                let saved = parse_instance(&read_text(&path)?)
                    .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
                if saved.couplings() != g.instance.couplings() || saved.fields() != g.instance.fields() {
                    return Err(CliError::validation(format!(
                        "{} does not match the instance generated by the plan",
                        path.display()
                    )));
                }
                saved
            } else {
                g.instance
            };
            if instance.reference_method() == ReferenceMethod::Construction {
                pending.push(out.len());
            }
            out.push(BenchInstance {
                id: g.id,
                pairs,
                instance,
            });
        }
    }
    let tasks: Vec<(usize, usize, usize)> = pending
        .iter()
        .flat_map(|&i| {
            (0..plan.consensus.runs.len()).flat_map(move |r| (0..plan.consensus.seeds).map(move |k| (i, r, k)))
        })
        .collect();
    let found: Vec<CliResult<(usize, i64)>> = pool(jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(i, r, k)| {
                let b = &out[i];
                let run = &plan.consensus.runs[r];
                let params = resolve_params(run.solver, b.instance.n(), run.params.as_ref(), Some(run.budget))?;
                let seed = consensus_seed(plan.seed, &b.id, r, k);
                let (_, outcome) = execute(&b.instance, &b.id, &params, seed)?;
                Ok((i, outcome.best_energy_scaled))
            })
            .collect()
    });
    let mut best: BTreeMap<usize, i64> = BTreeMap::new();
    for f in found {
        let (i, e) = f?;
        let slot = best.entry(i).or_insert(e);
        *slot = (*slot).min(e);
    }
    for &i in &pending {
        let b = &mut out[i];
        let down = b.instance.energy(&b.instance.all_down())?;
        let reference = best.get(&i).copied().unwrap_or(down).min(down);
        b.instance = b.instance.clone().with_reference(Some(reference), ReferenceMethod::Consensus);
    }
    for b in &out {
        let path = dir.join(format!("{}.json", b.id));
        let text = serialize_instance(&b.instance);
        let unchanged = std::fs::read_to_string(&path).is_ok_and(|t| t == text);
        if !unchanged {
            write_bytes(&path, text.as_bytes())?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct Task {
    instance: usize,
    params: SolverParams,
    seed: u64,
}

fn plan_tasks(plan: &BenchPlan, instances: &[BenchInstance]) -> CliResult<Vec<Task>> {
    let mut tasks = Vec::new();
    for (i, b) in instances.iter().enumerate() {
        for s in &plan.solvers {
            for &budget in s.budgets_for(b.pairs) {
                let params = resolve_params(s.solver, b.instance.n(), s.params.as_ref(), Some(budget))?;
                for t in 0..plan.trials {
                    tasks.push(Task {
                        instance: i,
                        params: params.clone(),
                        seed: trial_seed(plan.seed, s.solver, &b.id, budget, t),
                    });
                }
            }
        }
    }
    Ok(tasks)
}

type RunKey = (SolverId, String, u64, u64);

fn key_of(r: &RunRecord) -> RunKey {
    (r.solver, r.instance_id.clone(), r.seed, r.t_ann_work)
}

/// Executes `plan` into `out`. Runs already present in the run log are
/// skipped; at most `max_runs` new runs are made when given, in which case
/// the analysis is left for a later call.
pub fn run_plan(plan: &BenchPlan, out: &Path, jobs: usize, max_runs: Option<usize>) -> CliResult<BenchSummary> {
    plan.validate()?;
    let paths = BenchPaths { root: out.to_path_buf() };
    create_dir(out)?;
    write_report(&out.join("plan.json"), "bench-plan", plan, &())?;
    let instances = prepare_instances(plan, &paths.instances(), jobs)?;
    let references = instances
        .iter()
        .map(|b| {
            Ok(ReferenceEntry {
                instance_id: b.id.clone(),
                n: b.instance.n(),
                method: b.instance.reference_method(),
                energy_scaled: b.instance.reference_energy_scaled(),
                all_down_scaled: b.instance.energy(&b.instance.all_down())?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let log_path = paths.run_log();
    let existing = if log_path.exists() {
        read_run_log(std::fs::File::open(&log_path).map_err(|e| CliError::io(&log_path, e))?)?
    } else {
        Vec::new()
    };
    let done: HashSet<RunKey> = existing.iter().map(key_of).collect();
    let tasks = plan_tasks(plan, &instances)?;
    let runs_planned = tasks.len();
    let mut pending: Vec<&Task> = tasks
        .iter()
        .filter(|t| {
            let b = &instances[t.instance];
            let key = (t.params.solver(), b.id.clone(), t.seed, t.params.nominal_work(b.instance.n()));
            !done.contains(&key)
        })
        .collect();
    let limited = max_runs.is_some_and(|m| m < pending.len());
    if let Some(m) = max_runs {
        pending.truncate(m);
    }

    let threads = pool(jobs)?;
    let chunk = (8 * threads.current_num_threads()).max(16);
    let mut failures = Vec::new();
    let mut undercuts = Vec::new();
    let mut runs_new = 0;
    for (c, batch) in pending.chunks(chunk).enumerate() {
        let results: Vec<_> = threads.install(|| {
            batch
                .par_iter()
                .map(|t| {
                    let b = &instances[t.instance];
                    (t, execute(&b.instance, &b.id, &t.params, t.seed))
                })
                .collect()
        });
        let mut rows = Vec::with_capacity(results.len());
        for (t, r) in results {
            let b = &instances[t.instance];
            match r {
                Ok((record, outcome)) => {
                    if let Some(reference) = b.instance.reference_energy_scaled() {
                        if outcome.best_energy_scaled < reference {
                            undercuts.push(Undercut {
                                instance_id: b.id.clone(),
                                solver: record.solver,
                                seed: record.seed,
                                energy_scaled: outcome.best_energy_scaled,
                                reference_scaled: reference,
                            });
                        }
                    }
                    rows.push(record);
                }
                Err(e) => {
                    let msg = format!("{} on {} seed {}: {e}", t.params.solver(), b.id, t.seed);
                    log::warn!("{msg}");
                    failures.push(msg);
                }
            }
        }
        append_log(&log_path, &rows)?;
        runs_new += rows.len();
        log::info!("batch {}: {} of {} pending runs done", c + 1, runs_new, pending.len());
    }
    for u in &undercuts {
        log::warn!(
            "{} seed {} found {} below the reference {} of {}",
            u.solver,
            u.seed,
            u.energy_scaled,
            u.reference_scaled,
            u.instance_id
        );
    }

    let records = read_run_log(std::fs::File::open(&log_path).map_err(|e| CliError::io(&log_path, e))?)?;
    let mut summary = BenchSummary {
        runs_planned,
        runs_new,
        runs_in_log: records.len(),
        complete: !limited,
        failures,
        references,
        reference_undercuts: undercuts,
        tts: None,
        fits: Vec::new(),
        ranking: Vec::new(),
    };
    if limited {
        return Ok(summary);
    }
    let analysis = tts_analysis(&records, plan.percentile, plan.seed)?;
    write_instance_tts_csv(&paths.instance_tts(), &analysis.instances)?;
    write_tts_csv(&paths.tts_table(), &analysis.points)?;
    summary.fits = fit_solvers(&analysis.instances, plan.percentile, plan.fit_last_k, plan.seed);
    summary.ranking = rank_linear(&summary.fits);
    summary.tts = Some(analysis);
    write_report(&paths.report(), "bench", plan, &summary)?;
    Ok(summary)
}

pub fn run(plan_path: &Path, out: &Path, jobs: usize, max_runs: Option<usize>) -> CliResult<BenchSummary> {
    let plan = BenchPlan::parse(&read_text(plan_path)?)?;
    run_plan(&plan, out, jobs, max_runs)
}
