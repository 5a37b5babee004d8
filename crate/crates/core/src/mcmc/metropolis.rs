use rand::Rng;

use super::state::SpinState;
use crate::instance::ProblemInstance;

/// Acceptance probabilities `exp(-beta * dE / scale)` for every even
/// `dE` an instance can produce.
#[derive(Debug, Clone)]
pub struct MetropolisTable {
    beta: f64,
    // index k holds the probability for dE = 2k
    probs: Vec<f64>,
}

impl MetropolisTable {
    pub fn new(instance: &ProblemInstance, beta: f64) -> Self {
        let half_max = (instance.max_flip_delta() / 2) as usize;
        let scale = instance.scale() as f64;
        let probs = (0..=half_max)
            .map(|k| (-beta * (2 * k) as f64 / scale).exp())
            .collect();
        MetropolisTable { beta, probs }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Draws exactly one uniform per call, whatever the outcome, so the
    /// stream position depends only on the number of proposals.
    #[inline]
    pub fn accept<R: Rng + ?Sized>(&self, delta: i64, rng: &mut R) -> bool {
        let u = rng.random::<f64>();
        delta <= 0 || u < self.probs[(delta / 2) as usize]
    }
}

/// One sequential Metropolis sweep over sites `0..n`. Returns the number
/// of proposals made.
pub fn metropolis_sweep<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    state: &mut SpinState,
    table: &MetropolisTable,
    rng: &mut R,
) -> u64 {
    let n = instance.n();
    for site in 0..n {
        let delta = instance.delta_unchecked(state.spins(), site);
        if table.accept(delta, rng) {
            state.apply_flip(site, delta);
        }
    }
    n as u64
}
