use std::time::Instant;

use rand::Rng;

use super::icm::IcmScratch;
use super::pt::TemperingChains;
use super::{BestTracker, RmcIcmParams, SolveOutcome, SolverParams};
use crate::error::Result;
use crate::instance::ProblemInstance;
use crate::mcmc::{RngStream, SpinState};

/// Replica Monte Carlo cluster move between replicas at inverse
/// temperatures `beta_a` and `beta_b`.
///
/// The cluster is the connected region of disagreeing sites around a random
/// seed. Flipping it in both replicas leaves the overlap unchanged and only
/// alters bonds on the cluster boundary and the cluster's fields; the move
/// is accepted with `min(1, exp(-(beta_a dE_a + beta_b dE_b) / scale))`,
/// which equals the effective-coupling rule with weight `beta_a - beta_b`
/// on the boundary. Returns the cluster size if a cluster was built and
/// whether it was accepted.
pub fn rmc_cluster_move<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    a: &mut SpinState,
    beta_a: f64,
    b: &mut SpinState,
    beta_b: f64,
    scratch: &mut IcmScratch,
    rng: &mut R,
) -> Option<(usize, bool)> {
    if !scratch.grow_overlap_cluster(instance, a.spins(), b.spins(), rng) {
        return None;
    }
    let da = instance.cluster_delta(a.spins(), scratch.cluster(), scratch.membership());
    let db = instance.cluster_delta(b.spins(), scratch.cluster(), scratch.membership());
    let action = (beta_a * da as f64 + beta_b * db as f64) / instance.scale() as f64;
    let accepted = action <= 0.0 || rng.random::<f64>() < (-action).exp();
    if accepted {
        a.apply_cluster(scratch.cluster(), da);
        b.apply_cluster(scratch.cluster(), db);
    }
    Some((scratch.cluster().len(), accepted))
}

/// Replica Monte Carlo with isoenergetic cluster moves.
///
/// Each round sweeps every replica, then per replica set makes
/// `temperatures - 1` replica Monte Carlo moves between randomly chosen
/// adjacent temperatures, then performs Houdayer moves between paired sets
/// at the `icm_temperatures` coldest temperatures.
pub fn replica_mc_icm(instance: &ProblemInstance, params: &RmcIcmParams, rng: &mut RngStream) -> Result<SolveOutcome> {
    SolverParams::RmcIcm(params.clone()).validate()?;
    let started = Instant::now();
    let ladder = params.ladder()?;
    let mut sets = TemperingChains::new(instance, ladder.betas(), params.replica_sets, rng);
    let mut scratch = IcmScratch::new(instance.n());
    let mut best = BestTracker::new(&sets.chains[0][0]);
    let temps = sets.betas.len();
    let mut work = 0u64;
    for _ in 0..params.rounds {
        work += sets.sweep_all(instance, rng);
        for chain in &mut sets.chains {
            for _ in 0..temps.saturating_sub(1) {
                let k = rng.random_range(0..temps - 1);
                let (lo, hi) = chain.split_at_mut(k + 1);
                if let Some((size, _)) = rmc_cluster_move(
                    instance,
                    &mut lo[k],
                    sets.betas[k],
                    &mut hi[0],
                    sets.betas[k + 1],
                    &mut scratch,
                    rng,
                ) {
                    work += 2 * size as u64;
                }
            }
        }
        work += sets.icm_round(instance, params.icm_temperatures, &mut scratch, rng);
        for chain in &sets.chains {
            for s in chain {
                best.observe(s);
            }
        }
    }
    Ok(best.into_outcome(instance, work, started, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_network, Coupling, WeakStrongLayout};

    #[test]
    fn identical_replicas_no_cluster() {
        let inst = generate_network(&WeakStrongLayout::single_pair(), 0).unwrap();
        let mut rng = RngStream::new(0);
        let mut a = SpinState::random(&inst, &mut rng);
        let mut b = a.clone();
        let mut scratch = IcmScratch::new(inst.n());
        assert!(rmc_cluster_move(&inst, &mut a, 2.0, &mut b, 1.0, &mut scratch, &mut rng).is_none());
    }

    #[test]
    fn global_flip_without_fields_is_free() {
        let couplings = vec![Coupling::new(0, 1, 1), Coupling::new(1, 2, -1), Coupling::new(0, 2, 1)];
        let inst = ProblemInstance::new(3, 1, couplings, vec![0; 3]).unwrap();
        let mut rng = RngStream::new(3);
        let mut scratch = IcmScratch::new(3);
        for _ in 0..100 {
            let mut a = SpinState::new(&inst, vec![1, 1, -1]).unwrap();
            let mut b = SpinState::new(&inst, vec![-1, -1, 1]).unwrap();
            let (size, accepted) =
                rmc_cluster_move(&inst, &mut a, 10.0, &mut b, 0.1, &mut scratch, &mut rng).unwrap();
            assert_eq!(size, 3);
            assert!(accepted);
            assert_eq!(a.spins(), &[-1, -1, 1]);
        }
    }

    #[test]
    fn single_pair_ground_state() {
        let inst = generate_network(&WeakStrongLayout::single_pair(), 0).unwrap();
        let params = RmcIcmParams {
            rounds: 10_000,
            ..RmcIcmParams::default()
        };
        let out = replica_mc_icm(&inst, &params, &mut RngStream::new(8)).unwrap();
        assert_eq!(out.best_energy_scaled, -1012);
        assert!(out.success);
    }
}
