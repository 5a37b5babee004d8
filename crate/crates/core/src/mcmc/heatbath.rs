use rand::Rng;

use super::state::SpinState;
use crate::instance::ProblemInstance;

/// Heat-bath flip probabilities `1 / (1 + exp(beta * dE / scale))`.
///
/// Unlike Metropolis, a zero-energy flip is taken with probability 1/2,
/// so the chain is aperiodic even at infinite temperature.
#[derive(Debug, Clone)]
pub struct HeatBathTable {
    half_max: i64,
    // index k holds the probability for dE = 2 (k - half_max)
    probs: Vec<f64>,
}

impl HeatBathTable {
    pub fn new(instance: &ProblemInstance, beta: f64) -> Self {
        let half_max = instance.max_flip_delta() / 2;
        let scale = instance.scale() as f64;
        let probs = (-half_max..=half_max)
            .map(|k| match k {
                0 => 0.5,
                _ => 1.0 / (1.0 + (beta * (2 * k) as f64 / scale).exp()),
            })
            .collect();
        HeatBathTable { half_max, probs }
    }

    #[inline]
    pub fn accept<R: Rng + ?Sized>(&self, delta: i64, rng: &mut R) -> bool {
        rng.random::<f64>() < self.probs[(delta / 2 + self.half_max) as usize]
    }
}

/// One sequential heat-bath sweep. Returns the number of proposals made.
pub fn heat_bath_sweep<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    state: &mut SpinState,
    table: &HeatBathTable,
    rng: &mut R,
) -> u64 {
    for site in 0..instance.n() {
        let delta = instance.delta_unchecked(state.spins(), site);
        if table.accept(delta, rng) {
            state.apply_flip(site, delta);
        }
    }
    instance.n() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Coupling;
    use crate::mcmc::RngStream;

    #[test]
    fn two_site_boltzmann() {
        let inst = ProblemInstance::new(2, 25, vec![Coupling::new(0, 1, 25)], vec![10, 0]).unwrap();
        let beta = 0.8;
        let states: [[i8; 2]; 4] = [[-1, -1], [-1, 1], [1, -1], [1, 1]];
        let weights: Vec<f64> = states
            .iter()
            .map(|s| (-beta * inst.energy(s).unwrap() as f64 / 25.0).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        let table = HeatBathTable::new(&inst, beta);
        let mut rng = RngStream::new(9);
        let mut state = SpinState::new(&inst, vec![1, 1]).unwrap();
        let mut counts = [0usize; 4];
        let sweeps = 200_000;
        for _ in 0..sweeps {
            heat_bath_sweep(&inst, &mut state, &table, &mut rng);
            let k = states.iter().position(|s| s == state.spins()).unwrap();
            counts[k] += 1;
        }
        for k in 0..4 {
            let p = counts[k] as f64 / sweeps as f64;
            assert!((p - weights[k] / z).abs() < 0.01, "state {k}: {p} vs {}", weights[k] / z);
        }
    }
}
