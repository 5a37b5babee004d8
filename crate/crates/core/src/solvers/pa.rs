use std::time::Instant;

use rand::Rng;

use super::{BestTracker, PaParams, SolveOutcome, SolverParams};
use crate::error::Result;
use crate::instance::ProblemInstance;
use crate::mcmc::{metropolis_sweep, MetropolisTable, RngStream, SpinState};

/// Summary of the population over a population-annealing run.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationStats {
    pub final_population: usize,
    /// Number of distinct ancestors from the initial population that
    /// survive to the end.
    pub surviving_families: usize,
    pub final_mean_energy_scaled: f64,
}

/// Population size needed for 99% success given success probability `p`
/// measured at population `population`: `R ln(0.01) / ln(1 - p)`.
pub fn critical_population(population: usize, p: f64) -> f64 {
    if p >= 1.0 {
        return population as f64;
    }
    population as f64 * (0.01f64).ln() / (1.0 - p).ln()
}

/// Systematic resampling: returns the indices to copy, exactly `count` of
/// them, with expected multiplicities `count * w_i / sum(w)`.
fn systematic_resample<R: Rng + ?Sized>(weights: &[f64], count: usize, rng: &mut R) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let step = total / count as f64;
    let mut u = rng.random::<f64>() * step;
    let mut picks = Vec::with_capacity(count);
    let mut acc = 0.0;
    let mut i = 0;
    for _ in 0..count {
        while i + 1 < weights.len() && acc + weights[i] <= u {
            acc += weights[i];
            i += 1;
        }
        picks.push(i);
        u += step;
    }
    picks
}

/// Population annealing over betas evenly spaced in `[0, beta_max]`.
///
/// Replicas start uniformly random (equilibrium at beta 0). At each later
/// beta the population is resampled with weights `exp(-dbeta * E / scale)`
/// and every replica receives `sweeps` Metropolis sweeps. The best state
/// over the whole history is returned.
pub fn population_annealing(
    instance: &ProblemInstance,
    params: &PaParams,
    rng: &mut RngStream,
) -> Result<(SolveOutcome, PopulationStats)> {
    SolverParams::Pa(params.clone()).validate()?;
    let started = Instant::now();
    let schedule = params.schedule()?;
    let scale = instance.scale() as f64;
    let mut population: Vec<SpinState> = (0..params.population).map(|_| SpinState::random(instance, rng)).collect();
    let mut family: Vec<usize> = (0..params.population).collect();
    let mut best = BestTracker::new(&population[0]);
    population.iter().for_each(|s| {
        best.observe(s);
    });

    let mut work = 0u64;
    let mut prev_beta = schedule.betas()[0];
    for (k, &beta) in schedule.betas().iter().enumerate() {
        if k > 0 {
            let dbeta = beta - prev_beta;
            let e_min = population.iter().map(SpinState::energy).min().expect("non-empty");
            let weights: Vec<f64> = population
                .iter()
                .map(|s| (-dbeta * (s.energy() - e_min) as f64 / scale).exp())
                .collect();
            let picks = systematic_resample(&weights, params.population, rng);
            population = picks.iter().map(|&i| population[i].clone()).collect();
            family = picks.iter().map(|&i| family[i]).collect();
        }
        prev_beta = beta;
        let table = MetropolisTable::new(instance, beta);
        for replica in &mut population {
            for _ in 0..params.sweeps {
                work += metropolis_sweep(instance, replica, &table, rng);
                best.observe(replica);
            }
        }
    }

    let mut families = family.clone();
    families.sort_unstable();
    families.dedup();
    let stats = PopulationStats {
        final_population: population.len(),
        surviving_families: families.len(),
        final_mean_energy_scaled: population.iter().map(|s| s.energy() as f64).sum::<f64>() / population.len() as f64,
    };
    Ok((best.into_outcome(instance, work, started, None), stats))
}
