//! Ground-state heuristics.
//!
//! Every solver is a single-threaded, deterministic function of its
//! instance, parameters and [`RngStream`]. Work is counted in site updates:
//! one Metropolis proposal, or one site taking part in a cluster move.

mod hcm;
mod icm;
mod pa;
mod params;
mod pt;
mod rmc;
mod sa;
mod superspin;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::instance::ProblemInstance;
use crate::mcmc::{RngStream, SpinState};

pub use hcm::hcm_anneal;
pub use icm::{houdayer_icm_move, IcmScratch};
pub use pa::{critical_population, population_annealing, PopulationStats};
pub use params::{HcmParams, PaParams, PtIcmParams, RmcIcmParams, SaParams, SolverParams};
pub use pt::{pt_energy_histograms, pt_icm, swap_accepts};
pub use rmc::{replica_mc_icm, rmc_cluster_move};
pub use sa::simulated_annealing;
pub use superspin::{ss_solve, superspin_reduce, SuperSpinReduction};

/// The six benchmarked heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolverId {
    #[serde(rename = "sa")]
    Sa,
    #[serde(rename = "pa")]
    Pa,
    #[serde(rename = "pt-icm")]
    PtIcm,
    #[serde(rename = "rmc-icm")]
    RmcIcm,
    #[serde(rename = "hcm")]
    Hcm,
    #[serde(rename = "ss")]
    Ss,
}

impl SolverId {
    pub const ALL: [SolverId; 6] = [
        SolverId::Sa,
        SolverId::Pa,
        SolverId::PtIcm,
        SolverId::RmcIcm,
        SolverId::Hcm,
        SolverId::Ss,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverId::Sa => "sa",
            SolverId::Pa => "pa",
            SolverId::PtIcm => "pt-icm",
            SolverId::RmcIcm => "rmc-icm",
            SolverId::Hcm => "hcm",
            SolverId::Ss => "ss",
        }
    }

    /// Whether the solver needs the weak-strong cell structure.
    pub fn needs_layout(self) -> bool {
        matches!(self, SolverId::Hcm | SolverId::Ss)
    }
}

impl std::fmt::Display for SolverId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SolverId {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                crate::Error::Invalid(format!(
                    "unknown solver '{s}' (expected one of sa, pa, pt-icm, rmc-icm, hcm, ss)"
                ))
            })
    }
}

/// Result of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub best_energy_scaled: i64,
    pub best_state: Vec<i8>,
    /// `best_energy_scaled` equals the instance's reference energy.
    pub success: bool,
    pub work_sweep_site_updates: u64,
    pub wall_time: Duration,
    /// Ground-state certificate (PT+ICM and SS only).
    pub gs_criteria_met: Option<bool>,
}

/// Lowest-energy state seen during a run.
#[derive(Debug, Clone)]
pub(crate) struct BestTracker {
    energy: i64,
    state: Vec<i8>,
}

impl BestTracker {
    pub(crate) fn new(state: &SpinState) -> Self {
        BestTracker {
            energy: state.energy(),
            state: state.spins().to_vec(),
        }
    }

    #[inline]
    pub(crate) fn observe(&mut self, state: &SpinState) -> bool {
        if state.energy() < self.energy {
            self.energy = state.energy();
            self.state.clear();
            self.state.extend_from_slice(state.spins());
            true
        } else {
            false
        }
    }

    pub(crate) fn energy(&self) -> i64 {
        self.energy
    }

    pub(crate) fn into_outcome(
        self,
        instance: &ProblemInstance,
        work: u64,
        started: Instant,
        gs_criteria_met: Option<bool>,
    ) -> SolveOutcome {
        debug_assert_eq!(instance.energy(&self.state).ok(), Some(self.energy));
        SolveOutcome {
            success: instance.reference_energy_scaled() == Some(self.energy),
            best_energy_scaled: self.energy,
            best_state: self.state,
            work_sweep_site_updates: work,
            wall_time: started.elapsed(),
            gs_criteria_met,
        }
    }
}

/// Runs the solver described by `params`.
pub fn solve(instance: &ProblemInstance, params: &SolverParams, rng: &mut RngStream) -> Result<SolveOutcome> {
    params.validate()?;
    match params {
        SolverParams::Sa(p) => simulated_annealing(instance, &p.schedule()?, p.sweeps_per_beta, rng),
        SolverParams::Pa(p) => population_annealing(instance, p, rng).map(|(o, _)| o),
        SolverParams::PtIcm(p) => pt_icm(instance, p, rng),
        SolverParams::RmcIcm(p) => replica_mc_icm(instance, p, rng),
        SolverParams::Hcm(p) => hcm_anneal(instance, p, rng),
        SolverParams::Ss(p) => ss_solve(instance, p, rng),
    }
}
