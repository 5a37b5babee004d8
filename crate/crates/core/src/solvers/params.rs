use serde::{Deserialize, Serialize};

use super::SolverId;
use crate::error::{Error, Result};
use crate::instance::CELL_SITES;
use crate::mcmc::{geometric_temperature_ladder, linear_beta_schedule, Schedule, TemperatureLadder};

/// Simulated annealing: linear schedule in beta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaParams {
    pub beta_ini: f64,
    pub beta_end: f64,
    /// Number of temperatures.
    pub steps: usize,
    pub sweeps_per_beta: usize,
}

impl Default for SaParams {
    fn default() -> Self {
        SaParams {
            beta_ini: 0.1,
            beta_end: 3.0,
            steps: 100,
            sweeps_per_beta: 1,
        }
    }
}

impl SaParams {
    pub fn schedule(&self) -> Result<Schedule> {
        linear_beta_schedule(self.beta_ini, self.beta_end, self.steps)
    }
}

/// Population annealing with `temperatures` betas evenly spaced in
/// `[0, beta_max]` and `sweeps` Metropolis sweeps per replica per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaParams {
    pub population: usize,
    pub temperatures: usize,
    pub sweeps: usize,
    #[serde(default = "one")]
    pub beta_max: f64,
}

fn one() -> f64 {
    1.0
}

impl PaParams {
    /// Published parameters for the nearest tabulated size.
    pub fn for_size(n: usize) -> Self {
        const TABLE: [(usize, usize, usize); 5] = [
            (180, 100, 100),
            (296, 300, 100),
            (489, 10_000, 200),
            (681, 100_000, 300),
            (945, 3_000_000, 300),
        ];
        let &(_, population, temperatures) = nearest(&TABLE, n, |r| r.0);
        PaParams {
            population,
            temperatures,
            sweeps: 10,
            beta_max: 1.0,
        }
    }

    pub fn schedule(&self) -> Result<Schedule> {
        linear_beta_schedule(0.0, self.beta_max, self.temperatures)
    }
}

/// Parallel tempering with isoenergetic cluster moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PtIcmParams {
    pub t_min: f64,
    pub t_max: f64,
    pub temperatures: usize,
    /// ICM moves happen at this many of the lowest temperatures.
    pub icm_temperatures: usize,
    pub sweeps: usize,
    #[serde(default = "four")]
    pub replicas_per_temperature: usize,
}

fn four() -> usize {
    4
}

impl Default for PtIcmParams {
    fn default() -> Self {
        PtIcmParams {
            t_min: 0.2279,
            t_max: 2.5,
            temperatures: 21,
            icm_temperatures: 5,
            sweeps: 1000,
            replicas_per_temperature: 4,
        }
    }
}

impl PtIcmParams {
    pub fn ladder(&self) -> Result<TemperatureLadder> {
        geometric_temperature_ladder(self.t_min, self.t_max, self.temperatures)
    }
}

/// Replica Monte Carlo combined with isoenergetic cluster moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RmcIcmParams {
    pub t_min: f64,
    pub t_max: f64,
    pub temperatures: usize,
    pub icm_temperatures: usize,
    pub rounds: usize,
    /// Independent replica sets; ICM pairs sets `(0,1)`, `(2,3)`, ...
    #[serde(default = "two")]
    pub replica_sets: usize,
}

fn two() -> usize {
    2
}

impl Default for RmcIcmParams {
    fn default() -> Self {
        RmcIcmParams {
            t_min: 0.2279,
            t_max: 2.5,
            temperatures: 21,
            icm_temperatures: 5,
            rounds: 1000,
            replica_sets: 2,
        }
    }
}

impl RmcIcmParams {
    pub fn ladder(&self) -> Result<TemperatureLadder> {
        geometric_temperature_ladder(self.t_min, self.t_max, self.temperatures)
    }
}

/// Hybrid cluster method: linear beta schedule with `steps` temperatures,
/// `n` cluster proposals at each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HcmParams {
    pub beta_ini: f64,
    pub beta_end: f64,
    pub steps: usize,
}

impl HcmParams {
    /// Published schedule length for the nearest tabulated size.
    pub fn for_size(n: usize) -> Self {
        const TABLE: [(usize, usize); 5] = [(192, 5), (300, 6), (520, 8), (720, 11), (992, 14)];
        HcmParams {
            beta_ini: 0.5,
            beta_end: 3.0,
            steps: nearest(&TABLE, n, |r| r.0).1,
        }
    }

    pub fn schedule(&self) -> Result<Schedule> {
        linear_beta_schedule(self.beta_ini, self.beta_end, self.steps)
    }
}

fn nearest<T>(table: &[T], n: usize, key: impl Fn(&T) -> usize) -> &T {
    table
        .iter()
        .min_by_key(|r| key(r).abs_diff(n))
        .expect("non-empty table")
}

/// Parameters of one solver, tagged by solver id in JSON
/// (`{"solver": "pt-icm", "t_min": 0.2279, ...}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solver")]
pub enum SolverParams {
    #[serde(rename = "sa")]
    Sa(SaParams),
    #[serde(rename = "pa")]
    Pa(PaParams),
    #[serde(rename = "pt-icm")]
    PtIcm(PtIcmParams),
    #[serde(rename = "rmc-icm")]
    RmcIcm(RmcIcmParams),
    #[serde(rename = "hcm")]
    Hcm(HcmParams),
    #[serde(rename = "ss")]
    Ss(PtIcmParams),
}

impl SolverParams {
    /// Defaults for `solver` on an `n`-site instance.
    pub fn defaults(solver: SolverId, n: usize) -> Self {
        match solver {
            SolverId::Sa => SolverParams::Sa(SaParams::default()),
            SolverId::Pa => SolverParams::Pa(PaParams::for_size(n)),
            SolverId::PtIcm => SolverParams::PtIcm(PtIcmParams::default()),
            SolverId::RmcIcm => SolverParams::RmcIcm(RmcIcmParams::default()),
            SolverId::Hcm => SolverParams::Hcm(HcmParams::for_size(n)),
            SolverId::Ss => SolverParams::Ss(PtIcmParams::default()),
        }
    }

    pub fn solver(&self) -> SolverId {
        match self {
            SolverParams::Sa(_) => SolverId::Sa,
            SolverParams::Pa(_) => SolverId::Pa,
            SolverParams::PtIcm(_) => SolverId::PtIcm,
            SolverParams::RmcIcm(_) => SolverId::RmcIcm,
            SolverParams::Hcm(_) => SolverId::Hcm,
            SolverParams::Ss(_) => SolverId::Ss,
        }
    }

    /// The knob that sets the per-run budget: SA and HCM schedule length,
    /// PA population, PT/SS sweeps, RMC rounds.
    pub fn budget(&self) -> usize {
        match self {
            SolverParams::Sa(p) => p.steps,
            SolverParams::Pa(p) => p.population,
            SolverParams::PtIcm(p) | SolverParams::Ss(p) => p.sweeps,
            SolverParams::RmcIcm(p) => p.rounds,
            SolverParams::Hcm(p) => p.steps,
        }
    }

    pub fn with_budget(&self, budget: usize) -> Self {
        let mut out = self.clone();
        match &mut out {
            SolverParams::Sa(p) => p.steps = budget,
            SolverParams::Pa(p) => p.population = budget,
            SolverParams::PtIcm(p) | SolverParams::Ss(p) => p.sweeps = budget,
            SolverParams::RmcIcm(p) => p.rounds = budget,
            SolverParams::Hcm(p) => p.steps = budget,
        }
        out
    }

    /// Nominal work of one run on an `n`-site instance, in site updates.
    /// Cluster-based solvers count one proposal per site here; their
    /// measured work also includes cluster memberships.
    pub fn nominal_work(&self, n: usize) -> u64 {
        let n = n as u64;
        match self {
            SolverParams::Sa(p) => (p.steps * p.sweeps_per_beta) as u64 * n,
            SolverParams::Pa(p) => (p.temperatures * p.sweeps * p.population) as u64 * n,
            SolverParams::PtIcm(p) => (p.sweeps * p.temperatures * p.replicas_per_temperature) as u64 * n,
            SolverParams::Ss(p) => {
                (p.sweeps * p.temperatures * p.replicas_per_temperature) as u64 * (n / CELL_SITES as u64)
            }
            SolverParams::RmcIcm(p) => (p.rounds * p.temperatures * p.replica_sets) as u64 * n,
            SolverParams::Hcm(p) => p.steps as u64 * n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SolverParams::Sa(p) => p.schedule().map(|_| ()),
            SolverParams::Pa(p) => {
                if p.population == 0 {
                    return Err(Error::invalid("population annealing needs population >= 1"));
                }
                if !(p.beta_max > 0.0) {
                    return Err(Error::invalid("population annealing needs beta_max > 0"));
                }
                p.schedule().map(|_| ())
            }
            SolverParams::PtIcm(p) | SolverParams::Ss(p) => {
                p.ladder()?;
                if p.icm_temperatures > p.temperatures {
                    return Err(Error::invalid("icm_temperatures exceeds the ladder size"));
                }
                if p.replicas_per_temperature < 4 {
                    return Err(Error::invalid(
                        "ground-state certification needs at least 4 replicas per temperature",
                    ));
                }
                Ok(())
            }
            SolverParams::RmcIcm(p) => {
                p.ladder()?;
                if p.icm_temperatures > p.temperatures {
                    return Err(Error::invalid("icm_temperatures exceeds the ladder size"));
                }
                if p.replica_sets == 0 {
                    return Err(Error::invalid("replica Monte Carlo needs at least one replica set"));
                }
                Ok(())
            }
            SolverParams::Hcm(p) => p.schedule().map(|_| ()),
        }
    }
}
