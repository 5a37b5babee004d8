//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use wscluster::landscape::{OverlapParams, PeakParams};
use wscluster::scaling::{FitModel, DEFAULT_LAST_K};
use wscluster::SolverId;

use crate::error::{CliError, CliResult};
use crate::generate::{parse_grid, LayoutSpec};

#[derive(Debug, Parser)]
#[command(name = "wscluster", version, about = "Weak-strong cluster Ising benchmark toolkit")]
pub struct Cli {
    /// Log progress (-v) or debug detail (-vv) to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate weak-strong cluster instances and a checksum manifest.
    Generate(GenerateArgs),
    /// Run one solver on one instance and append the run to a log.
    Solve(SolveArgs),
    /// Execute a benchmark plan: runs, time to solution and fits.
    Bench(BenchArgs),
    /// Time to solution from a run log.
    Tts(TtsArgs),
    /// Fit scaling models to a table of times to solution.
    Fit(FitArgs),
    /// Overlap distributions and peak classification.
    Landscape(LandscapeArgs),
    /// Noisy two-level model curves.
    Twolevel(TwoLevelArgs),
    /// Store or list external comparison curves.
    Import(ImportArgs),
}

fn parse_solver(s: &str) -> Result<SolverId, String> {
    s.parse().map_err(|e: wscluster::Error| e.to_string())
}

fn parse_model(s: &str) -> Result<FitModel, String> {
    s.parse().map_err(|e: wscluster::Error| e.to_string())
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("layout").required(true).args(["pairs", "grid"])))]
pub struct GenerateArgs {
    /// Number of weak-strong pairs, arranged as squarely as possible.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub pairs: Option<u64>,
    /// Pair grid as ROWSxCOLS.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// One of sa, pa, pt-icm, rmc-icm, hcm, ss.
    #[arg(long, value_parser = parse_solver)]
    pub solver: SolverId,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// JSON object overriding solver parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Budget knob: schedule length (sa, hcm), population (pa), sweeps
    /// (pt-icm, ss) or rounds (rmc-icm).
    #[arg(long)]
    pub budget: Option<usize>,
    /// Run log to append to.
    #[arg(long, default_value = "runs.csv")]
    pub log: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Plan file (JSON).
    pub plan: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Concurrent runs; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Stop after this many new runs (the analysis is skipped).
    #[arg(long)]
    pub max_runs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TtsArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 50.0)]
    pub percentile: f64,
    /// Seed of the bootstrap resamples.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with columns n and tts (or log10_tts), optionally solver and unit.
    #[arg(long)]
    pub input: PathBuf,
    /// linear or log-corrected.
    #[arg(long, value_parser = parse_model, default_value = "linear")]
    pub model: FitModel,
    /// Sizes used by the linear model, largest first; 0 keeps all.
    #[arg(long, default_value_t = DEFAULT_LAST_K)]
    pub last_k: usize,
    #[arg(long, default_value_t = 50.0)]
    pub percentile: f64,
    /// Rows with a unit column are kept only in this unit.
    #[arg(long, default_value = "work")]
    pub unit: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV samples of the fitted curve.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    /// Instance files or directories of instance files.
    #[arg(long, required = true, num_args = 1..)]
    pub instances: Vec<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = OverlapParams::default().sweeps)]
    pub sweeps: usize,
    #[arg(long, default_value_t = OverlapParams::default().t_min)]
    pub t_min: f64,
    #[arg(long, default_value_t = OverlapParams::default().t_max)]
    pub t_max: f64,
    #[arg(long, default_value_t = OverlapParams::default().temperatures)]
    pub temperatures: usize,
    #[arg(long, default_value_t = OverlapParams::default().burn_in_fraction)]
    pub burn_in_fraction: f64,
    #[arg(long, default_value_t = PeakParams::default().sigma)]
    pub sigma: f64,
    #[arg(long, default_value_t = PeakParams::default().relative_height)]
    pub relative_height: f64,
    #[arg(long, default_value_t = PeakParams::default().min_separation)]
    pub min_separation: f64,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct TwoLevelArgs {
    #[arg(long, default_value_t = 1)]
    pub n_min: u32,
    #[arg(long, default_value_t = 16)]
    pub n_max: u32,
    #[arg(long, default_value_t = 500.0)]
    pub t_ann: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Bit-flip probability per spin; repeat for several curves.
    #[arg(long)]
    pub noise: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("action").required(true).args(["csv", "list"])))]
pub struct ImportArgs {
    /// CSV with columns n and tts, optionally units.
    #[arg(long, requires = "label")]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub label: Option<String>,
    /// Units of tts when the CSV has no units column.
    #[arg(long)]
    pub units: Option<String>,
    /// Where the data comes from.
    #[arg(long, default_value = "")]
    pub provenance: String,
    /// List stored curves.
    #[arg(long)]
    pub list: bool,
    #[arg(long, default_value = "curves")]
    pub store: PathBuf,
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Generate(a) => {
            let spec = match (a.pairs, a.grid) {
                (Some(p), _) => LayoutSpec::Pairs(p as usize),
                (None, Some((rows, cols))) => LayoutSpec::Grid { rows, cols },
                (None, None) => unreachable!("clap requires one of --pairs, --grid"),
            };
            let files = crate::generate::run(spec, a.count as usize, a.seed, &a.out)?;
            for f in files {
                println!("{}\t{}\t{}", f.file, f.n, f.sha256);
            }
        }
        Command::Solve(a) => {
            let (record, outcome) = crate::solve::run(
                a.solver,
                &a.instance,
                a.seed,
                a.params.as_deref(),
                a.budget,
                &a.log,
            )?;
            println!(
                "{} {} seed {}: energy {} success {} work {}",
                record.solver, record.instance_id, record.seed, outcome.best_energy_scaled, record.success, record.work
            );
        }
        Command::Bench(a) => {
            let s = crate::bench::run(&a.plan, &a.out, a.jobs, a.max_runs)?;
            println!(
                "runs: {} planned, {} new, {} in log{}",
                s.runs_planned,
                s.runs_new,
                s.runs_in_log,
                if s.complete { "" } else { " (stopped early)" }
            );
            for r in &s.ranking {
                println!("{}\tb = {:.5}", r.label, r.b);
            }
            for f in &s.failures {
                eprintln!("failed: {f}");
            }
        }
        Command::Tts(a) => {
            let req = crate::tts::TtsRequest {
                log: a.log,
                percentile: a.percentile,
                seed: a.seed,
            };
            let analysis = crate::tts::run(&req, &a.out)?;
            for (solver, n) in analysis.unsolved {
                log::warn!("{solver} at n = {n}: no instance solved");
            }
        }
        Command::Fit(a) => {
            let params = crate::fit::FitParams {
                input: a.input,
                model: a.model,
                last_k: a.last_k,
                percentile: a.percentile,
                unit: a.unit,
                seed: a.seed,
            };
            let out = crate::fit::run(&params, a.out.as_deref(), a.curve.as_deref())?;
            for f in out.fits {
                match f.fit.c {
                    Some(c) => println!("{}\ta = {} b = {} c = {}", f.label, f.fit.a, f.fit.b, c),
                    None => println!("{}\ta = {} b = {}", f.label, f.fit.a, f.fit.b),
                }
            }
        }
        Command::Landscape(a) => {
            let params = crate::landscape::LandscapeParams {
                instances: a.instances,
                overlap: OverlapParams {
                    t_min: a.t_min,
                    t_max: a.t_max,
                    temperatures: a.temperatures,
                    sweeps: a.sweeps,
                    burn_in_fraction: a.burn_in_fraction,
                },
                peaks: PeakParams {
                    sigma: a.sigma,
                    relative_height: a.relative_height,
                    min_separation: a.min_separation,
                },
                seed: a.seed,
            };
            let out = crate::landscape::run(&params, &a.out, a.jobs)?;
            for f in out.fractions.unwrap_or_default() {
                println!(
                    "n = {}\tmulti-peak {}/{} = {:.3} [{:.3}, {:.3}]",
                    f.n, f.multi_peak, f.instances, f.fraction, f.ci.low, f.ci.high
                );
            }
        }
        Command::Twolevel(a) => {
            let req = crate::twolevel::TwoLevelRequest {
                n_min: a.n_min,
                n_max: a.n_max,
                t_ann: a.t_ann,
                dt: a.dt,
                noise: a.noise,
            };
            crate::twolevel::run(&req, &a.out)?;
        }
        Command::Import(a) => {
            if a.list {
                for c in crate::import::list(&a.store)? {
                    println!("{}\t{}\t{} points\t{}", c.label, c.units, c.points.len(), c.provenance);
                }
            } else {
                let csv = a.csv.expect("clap requires --csv or --list");
                let label = a.label.expect("clap requires --label with --csv");
                let path = crate::import::import(&csv, &label, a.units.as_deref(), &a.provenance, &a.store)?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

/// Parses `args` and runs the subcommand; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

impl From<clap::Error> for CliError {
    fn from(e: clap::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}
