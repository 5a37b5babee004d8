use rand::Rng;

use crate::error::Result;
use crate::instance::ProblemInstance;

/// Spin configuration with its exact scaled energy cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinState {
    spins: Vec<i8>,
    energy: i64,
}

impl SpinState {
    pub fn new(instance: &ProblemInstance, spins: Vec<i8>) -> Result<Self> {
        let energy = instance.energy(&spins)?;
        Ok(SpinState { spins, energy })
    }

    pub fn random<R: Rng + ?Sized>(instance: &ProblemInstance, rng: &mut R) -> Self {
        let spins: Vec<i8> = (0..instance.n())
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        let energy = instance.energy_unchecked(&spins);
        SpinState { spins, energy }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn into_spins(self) -> Vec<i8> {
        self.spins
    }

    pub fn energy(&self) -> i64 {
        self.energy
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    /// Flips `site` and returns the energy change.
    #[inline]
    pub fn flip(&mut self, instance: &ProblemInstance, site: usize) -> i64 {
        let d = instance.delta_unchecked(&self.spins, site);
        self.apply_flip(site, d);
        d
    }

    #[inline]
    pub(crate) fn apply_flip(&mut self, site: usize, delta: i64) {
        self.spins[site] = -self.spins[site];
        self.energy += delta;
    }

    /// Flips every site of `cluster` given its precomputed energy change.
    pub(crate) fn apply_cluster(&mut self, cluster: &[usize], delta: i64) {
        for &i in cluster {
            self.spins[i] = -self.spins[i];
        }
        self.energy += delta;
    }

    /// Whether the cached energy equals a full recomputation.
    pub fn is_coherent(&self, instance: &ProblemInstance) -> bool {
        instance.energy(&self.spins).map(|e| e == self.energy).unwrap_or(false)
    }
}
