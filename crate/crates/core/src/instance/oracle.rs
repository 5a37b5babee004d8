use std::collections::BTreeMap;

use super::ProblemInstance;
use crate::error::{Error, Result};

/// Largest instance the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Exact ground state by Gray-code enumeration of all `2^n` states.
///
/// Ties are broken toward the lexicographically smallest state, comparing
/// site 0 first with `-1 < +1`.
pub fn brute_force_ground_state(instance: &ProblemInstance) -> Result<(i64, Vec<i8>)> {
    let n = instance.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::Limit(format!(
            "exhaustive search is limited to {BRUTE_FORCE_LIMIT} sites, instance has {n}"
        )));
    }
    let mut state = instance.all_down();
    let mut energy = instance.energy_unchecked(&state);
    // Site i maps to bit (n-1-i) so integer order matches lexicographic order.
    let mut key: u32 = 0;
    let mut best = (energy, key);
    for step in 1u32..(1u32 << n) {
        let site = step.trailing_zeros() as usize;
        energy += instance.delta_unchecked(&state, site);
        state[site] = -state[site];
        key ^= 1 << (n - 1 - site);
        if energy < best.0 || (energy == best.0 && key < best.1) {
            best = (energy, key);
        }
    }
    let ground = (0..n)
        .map(|i| if best.1 >> (n - 1 - i) & 1 == 1 { 1 } else { -1 })
        .collect();
    Ok((best.0, ground))
}

/// Largest instance whose Boltzmann distribution is enumerated.
pub const BOLTZMANN_LIMIT: usize = 20;

/// Exact Boltzmann probability of every state at `beta`, indexed by the
/// integer whose bit `i` is set when site `i` is `+1`.
pub fn boltzmann_state_distribution(instance: &ProblemInstance, beta: f64) -> Result<Vec<f64>> {
    let n = instance.n();
    if n > BOLTZMANN_LIMIT {
        return Err(Error::Limit(format!(
            "Boltzmann enumeration is limited to {BOLTZMANN_LIMIT} sites, instance has {n}"
        )));
    }
    let size = 1usize << n;
    let mut energies = vec![0i64; size];
    let mut state = instance.all_down();
    let mut energy = instance.energy_unchecked(&state);
    let mut code = 0usize;
    energies[0] = energy;
    for step in 1..size {
        let site = step.trailing_zeros() as usize;
        energy += instance.delta_unchecked(&state, site);
        state[site] = -state[site];
        code ^= 1 << site;
        energies[code] = energy;
    }
    let e_min = *energies.iter().min().expect("non-empty");
    let scale = instance.scale() as f64;
    let mut weights: Vec<f64> = energies
        .iter()
        .map(|&e| (-beta * (e - e_min) as f64 / scale).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= z);
    Ok(weights)
}

/// Exact Boltzmann distribution of the energy at `beta`.
pub fn boltzmann_energy_distribution(instance: &ProblemInstance, beta: f64) -> Result<BTreeMap<i64, f64>> {
    let probs = boltzmann_state_distribution(instance, beta)?;
    let n = instance.n();
    let mut out = BTreeMap::new();
    let mut spins = vec![0i8; n];
    for (code, p) in probs.iter().enumerate() {
        for (i, s) in spins.iter_mut().enumerate() {
            *s = if code >> i & 1 == 1 { 1 } else { -1 };
        }
        *out.entry(instance.energy_unchecked(&spins)).or_insert(0.0) += p;
    }
    Ok(out)
}

/// State code used by [`boltzmann_state_distribution`].
pub fn state_code(spins: &[i8]) -> usize {
    spins
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0)
        .map(|(i, _)| 1usize << i)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_network, Coupling, WeakStrongLayout};

    #[test]
    fn single_site() {
        let inst = ProblemInstance::new(1, 25, vec![], vec![11]).unwrap();
        assert_eq!(brute_force_ground_state(&inst).unwrap(), (-11, vec![1]));
    }

    #[test]
    fn antiferromagnetic_tie_break() {
        let inst = ProblemInstance::new(2, 25, vec![Coupling::new(0, 1, -25)], vec![0, 0]).unwrap();
        assert_eq!(brute_force_ground_state(&inst).unwrap(), (-25, vec![-1, 1]));
    }

    #[test]
    fn single_pair_ground_state() {
        let inst = generate_network(&WeakStrongLayout::single_pair(), 0).unwrap();
        let (e, s) = brute_force_ground_state(&inst).unwrap();
        assert_eq!(e, -1012);
        assert_eq!(s, inst.all_down());
    }

    #[test]
    fn boltzmann_two_sites() {
        let inst = ProblemInstance::new(2, 25, vec![Coupling::new(0, 1, 25)], vec![0, 0]).unwrap();
        let dist = boltzmann_energy_distribution(&inst, 1.0).unwrap();
        let (a, b) = (1f64.exp(), (-1f64).exp());
        assert!((dist[&-25] - a / (a + b)).abs() < 1e-12);
        assert!((dist[&25] - b / (a + b)).abs() < 1e-12);
        let states = boltzmann_state_distribution(&inst, 0.0).unwrap();
        assert_eq!(states, vec![0.25; 4]);
        assert_eq!(state_code(&[1, -1]), 1);
    }

    #[test]
    fn refuses_large() {
        let inst = ProblemInstance::new(25, 1, vec![], vec![0; 25]).unwrap();
        let err = brute_force_ground_state(&inst).unwrap_err();
        assert!(err.to_string().contains("24"));
    }
}
