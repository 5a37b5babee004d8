use std::time::Instant;

use rand::Rng;

use super::{BestTracker, HcmParams, SolveOutcome, SolverParams};
use crate::error::{Error, Result};
use crate::instance::{ProblemInstance, CELL_SITES};
use crate::mcmc::{RngStream, SpinState};

/// Domain decomposition: one domain per K4,4 unit cell.
pub(crate) struct Domains {
    sites: Vec<[usize; CELL_SITES]>,
    domain_of: Vec<u32>,
}

impl Domains {
    pub(crate) fn from_layout(instance: &ProblemInstance) -> Result<Self> {
        let layout = instance
            .layout()
            .ok_or_else(|| Error::invalid("HCM requires cell structure (instance has no weak-strong layout)"))?;
        if layout.num_sites() != instance.n() {
            return Err(Error::invalid("layout does not cover the instance sites"));
        }
        let sites: Vec<[usize; CELL_SITES]> = layout.cell_sites().into_iter().map(|(_, s)| s).collect();
        let mut domain_of = vec![0u32; instance.n()];
        for (d, cell) in sites.iter().enumerate() {
            for &s in cell {
                domain_of[s] = d as u32;
            }
        }
        Ok(Domains { sites, domain_of })
    }
}

struct ClusterBuffers {
    in_cluster: Vec<bool>,
    cluster: Vec<usize>,
    stack: Vec<usize>,
}

/// One hybrid-cluster proposal: a Wolff cluster grown inside a random
/// domain, flipped with Metropolis acceptance on the couplings leaving the
/// domain and on the fields of the cluster sites. Returns the cluster size.
fn hcm_step(
    instance: &ProblemInstance,
    domains: &Domains,
    state: &mut SpinState,
    beta: f64,
    buf: &mut ClusterBuffers,
    rng: &mut RngStream,
) -> usize {
    let scale = instance.scale() as f64;
    let d = rng.random_range(0..domains.sites.len());
    let seed = domains.sites[d][rng.random_range(0..CELL_SITES)];
    let spins = state.spins();

    for &i in &buf.cluster {
        buf.in_cluster[i] = false;
    }
    buf.cluster.clear();
    buf.in_cluster[seed] = true;
    buf.stack.push(seed);
    let mut external = 0i64;
    while let Some(i) = buf.stack.pop() {
        buf.cluster.push(i);
        let si = spins[i] as i64;
        let mut outside = instance.fields()[i];
        for (j, jv) in instance.neighbors(i) {
            if domains.domain_of[j] as usize != d {
                outside += jv * spins[j] as i64;
                continue;
            }
            if buf.in_cluster[j] {
                continue;
            }
            let satisfied = jv * si * spins[j] as i64;
            if satisfied > 0 && rng.random::<f64>() < 1.0 - (-2.0 * beta * satisfied as f64 / scale).exp() {
                buf.in_cluster[j] = true;
                buf.stack.push(j);
            }
        }
        external += 2 * si * outside;
    }

    let accept = external <= 0 || rng.random::<f64>() < (-beta * external as f64 / scale).exp();
    if accept {
        let delta = instance.cluster_delta(spins, &buf.cluster, &buf.in_cluster);
        state.apply_cluster(&buf.cluster, delta);
    }
    buf.cluster.len()
}

/// Hybrid cluster method annealing: `n` domain-restricted cluster
/// proposals at each beta of a linear schedule.
pub fn hcm_anneal(instance: &ProblemInstance, params: &HcmParams, rng: &mut RngStream) -> Result<SolveOutcome> {
    SolverParams::Hcm(params.clone()).validate()?;
    let domains = Domains::from_layout(instance)?;
    let started = Instant::now();
    let schedule = params.schedule()?;
    let n = instance.n();
    let mut state = SpinState::random(instance, rng);
    let mut best = BestTracker::new(&state);
    let mut buf = ClusterBuffers {
        in_cluster: vec![false; n],
        cluster: Vec::with_capacity(CELL_SITES),
        stack: Vec::with_capacity(CELL_SITES),
    };
    let mut work = 0u64;
    for &beta in schedule.betas() {
        for _ in 0..n {
            work += hcm_step(instance, &domains, &mut state, beta, &mut buf, rng) as u64;
            best.observe(&state);
        }
        debug_assert!(state.is_coherent(instance));
    }
    Ok(best.into_outcome(instance, work, started, None))
}
