use std::time::Instant;

use super::{BestTracker, SolveOutcome};
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::mcmc::{metropolis_sweep, MetropolisTable, RngStream, Schedule, SpinState};

/// Simulated annealing from a uniformly random state: `sweeps_per_beta`
/// Metropolis sweeps at each beta of `schedule`, keeping the lowest-energy
/// state seen after any sweep.
pub fn simulated_annealing(
    instance: &ProblemInstance,
    schedule: &Schedule,
    sweeps_per_beta: usize,
    rng: &mut RngStream,
) -> Result<SolveOutcome> {
    if !schedule.betas().windows(2).all(|w| w[1] >= w[0]) {
        return Err(Error::invalid("annealing schedule must be non-decreasing in beta"));
    }
    let started = Instant::now();
    let mut state = SpinState::random(instance, rng);
    let mut best = BestTracker::new(&state);
    let mut work = 0u64;
    for &beta in schedule.betas() {
        let table = MetropolisTable::new(instance, beta);
        for _ in 0..sweeps_per_beta {
            work += metropolis_sweep(instance, &mut state, &table, rng);
            best.observe(&state);
        }
    }
    Ok(best.into_outcome(instance, work, started, None))
}
