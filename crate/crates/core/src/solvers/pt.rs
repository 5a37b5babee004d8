use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;

use super::icm::{houdayer_icm_move, IcmScratch};
use super::{BestTracker, PtIcmParams, SolveOutcome, SolverParams};
use crate::error::Result;
use crate::instance::ProblemInstance;
use crate::mcmc::{metropolis_sweep, MetropolisTable, RngStream, SpinState};

/// Replica-exchange acceptance between neighbouring temperatures:
/// `min(1, exp((beta_i - beta_j) * (E_i - E_j) / scale))`.
#[inline]
pub fn swap_accepts<R: Rng + ?Sized>(beta_i: f64, beta_j: f64, e_i: i64, e_j: i64, scale: i64, rng: &mut R) -> bool {
    let log_ratio = (beta_i - beta_j) * (e_i - e_j) as f64 / scale as f64;
    log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp()
}

/// Replicas of parallel tempering, indexed `[chain][temperature]` with
/// temperature 0 the coldest.
pub(crate) struct TemperingChains {
    pub(crate) betas: Vec<f64>,
    pub(crate) tables: Vec<MetropolisTable>,
    pub(crate) chains: Vec<Vec<SpinState>>,
}

impl TemperingChains {
    pub(crate) fn new(instance: &ProblemInstance, betas: Vec<f64>, chains: usize, rng: &mut RngStream) -> Self {
        let tables = betas.iter().map(|&b| MetropolisTable::new(instance, b)).collect();
        let chains = (0..chains)
            .map(|_| betas.iter().map(|_| SpinState::random(instance, rng)).collect())
            .collect();
        TemperingChains { betas, tables, chains }
    }

    pub(crate) fn sweep_all(&mut self, instance: &ProblemInstance, rng: &mut RngStream) -> u64 {
        let mut work = 0;
        for chain in &mut self.chains {
            for (state, table) in chain.iter_mut().zip(&self.tables) {
                work += metropolis_sweep(instance, state, table, rng);
            }
        }
        work
    }

    pub(crate) fn exchange(&mut self, scale: i64, rng: &mut RngStream) {
        for chain in &mut self.chains {
            for k in 0..chain.len().saturating_sub(1) {
                if swap_accepts(
                    self.betas[k],
                    self.betas[k + 1],
                    chain[k].energy(),
                    chain[k + 1].energy(),
                    scale,
                    rng,
                ) {
                    chain.swap(k, k + 1);
                }
            }
        }
    }

    /// One Houdayer move per chain pair `(0,1)`, `(2,3)`, ... at each of the
    /// `icm_temperatures` coldest temperatures.
    pub(crate) fn icm_round(
        &mut self,
        instance: &ProblemInstance,
        icm_temperatures: usize,
        scratch: &mut IcmScratch,
        rng: &mut RngStream,
    ) -> u64 {
        let mut work = 0u64;
        for pair in self.chains.chunks_exact_mut(2) {
            let (left, right) = pair.split_at_mut(1);
            for k in 0..icm_temperatures {
                if let Some(size) = houdayer_icm_move(instance, &mut left[0][k], &mut right[0][k], scratch, rng) {
                    work += 2 * size as u64;
                }
            }
        }
        work
    }
}

#[derive(Debug, Clone)]
struct ColdRecord {
    energy: i64,
    state: Vec<i8>,
    first_sweep: usize,
}

/// Parallel tempering with isoenergetic cluster moves.
///
/// `replicas_per_temperature` chains each sweep every temperature of the
/// ladder, attempt neighbour swaps, and exchange Houdayer clusters pairwise
/// at the `icm_temperatures` coldest temperatures. The ground-state
/// certificate requires every chain's coldest replica to reach the same
/// lowest-energy state, and each to do so within the first quarter of the
/// sweeps.
pub fn pt_icm(instance: &ProblemInstance, params: &PtIcmParams, rng: &mut RngStream) -> Result<SolveOutcome> {
    SolverParams::PtIcm(params.clone()).validate()?;
    let started = Instant::now();
    let ladder = params.ladder()?;
    let mut pt = TemperingChains::new(instance, ladder.betas(), params.replicas_per_temperature, rng);
    let mut scratch = IcmScratch::new(instance.n());
    let mut best = BestTracker::new(&pt.chains[0][0]);
    let mut cold: Vec<ColdRecord> = pt
        .chains
        .iter()
        .map(|c| ColdRecord {
            energy: c[0].energy(),
            state: c[0].spins().to_vec(),
            first_sweep: 0,
        })
        .collect();
    for chain in &pt.chains {
        for s in chain {
            best.observe(s);
        }
    }

    let mut work = 0u64;
    for sweep in 1..=params.sweeps {
        work += pt.sweep_all(instance, rng);
        work += pt.icm_round(instance, params.icm_temperatures, &mut scratch, rng);
        pt.exchange(instance.scale(), rng);
        for (chain, record) in pt.chains.iter().zip(&mut cold) {
            for s in chain {
                best.observe(s);
            }
            let c = &chain[0];
            if c.energy() < record.energy {
                record.energy = c.energy();
                record.state.clear();
                record.state.extend_from_slice(c.spins());
                record.first_sweep = sweep;
            }
        }
    }

    let quarter = params.sweeps as f64 * 0.25;
    let certified = params.sweeps > 0
        && cold.iter().all(|r| {
            r.energy == best.energy() && r.state == cold[0].state && r.first_sweep as f64 <= quarter
        });
    Ok(best.into_outcome(instance, work, started, Some(certified)))
}

/// Energy histograms of the PT+ICM replicas at each temperature, coldest
/// first, pooled over chains and recorded after every sweep past
/// `burn_in`. Runs `params.sweeps` sweeps in total.
pub fn pt_energy_histograms(
    instance: &ProblemInstance,
    params: &PtIcmParams,
    burn_in: usize,
    rng: &mut RngStream,
) -> Result<Vec<BTreeMap<i64, u64>>> {
    SolverParams::PtIcm(params.clone()).validate()?;
    let ladder = params.ladder()?;
    let mut pt = TemperingChains::new(instance, ladder.betas(), params.replicas_per_temperature, rng);
    let mut scratch = IcmScratch::new(instance.n());
    let mut hist = vec![BTreeMap::new(); ladder.len()];
    for sweep in 0..params.sweeps {
        pt.sweep_all(instance, rng);
        pt.icm_round(instance, params.icm_temperatures, &mut scratch, rng);
        pt.exchange(instance.scale(), rng);
        if sweep >= burn_in {
            for chain in &pt.chains {
                for (h, s) in hist.iter_mut().zip(chain) {
                    *h.entry(s.energy()).or_insert(0) += 1;
                }
            }
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_network, WeakStrongLayout};

    #[test]
    fn zero_energy_difference_always_swaps() {
        let mut rng = RngStream::new(0);
        for _ in 0..1000 {
            assert!(swap_accepts(4.0, 0.4, -100, -100, 25, &mut rng));
        }
        // colder replica already lower: swapping would raise the cold energy
        let accepted = (0..10_000)
            .filter(|_| swap_accepts(4.0, 0.4, -100, 0, 25, &mut rng))
            .count();
        let expected = (-(4.0 - 0.4) * 100.0 / 25.0f64).exp() * 10_000.0;
        assert!((accepted as f64 - expected).abs() < 5.0 * expected.sqrt() + 1.0);
    }

    #[test]
    fn single_pair_certified() {
        let inst = generate_network(&WeakStrongLayout::single_pair(), 0).unwrap();
        let params = PtIcmParams {
            sweeps: 10_000,
            ..PtIcmParams::default()
        };
        let out = pt_icm(&inst, &params, &mut RngStream::new(11)).unwrap();
        assert_eq!(out.best_energy_scaled, -1012);
        assert!(out.success);
        assert_eq!(out.gs_criteria_met, Some(true));
        assert!(out.work_sweep_site_updates >= 10_000 * 21 * 4 * 16);
    }

    #[test]
    fn deterministic_given_seed() {
        let inst = generate_network(&WeakStrongLayout::for_pair_count(4).unwrap(), 2).unwrap();
        let params = PtIcmParams {
            sweeps: 50,
            ..PtIcmParams::default()
        };
        let a = pt_icm(&inst, &params, &mut RngStream::new(5)).unwrap();
        let b = pt_icm(&inst, &params, &mut RngStream::new(5)).unwrap();
        assert_eq!(a.best_state, b.best_state);
        assert_eq!(a.work_sweep_site_updates, b.work_sweep_site_updates);
    }
}
