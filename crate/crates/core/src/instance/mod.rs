//! Ising problem instances in integer-scaled units.
//!
//! Energies follow `E = -sum_{i<j} J_ij s_i s_j - sum_i h_i s_i` with every
//! `J_ij` and `h_i` multiplied by [`ProblemInstance::scale`]. Scaled energies
//! are exact `i64` values; divide by the scale for physical units.

mod chimera;
mod io;
mod layout;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chimera::{build_chimera, CellCoord, Chimera, ChimeraCoord, ChimeraGraph, Side, CELL_SITES};
pub use io::{parse_instance, parse_instance_with_report, serialize_instance, ParseReport, FORMAT_VERSION};
pub use layout::{generate_network, BackboneEdge, ClusterPair, WeakStrongLayout, DEFAULT_SCALE};
pub use oracle::{
    boltzmann_energy_distribution, boltzmann_state_distribution, brute_force_ground_state, state_code, BOLTZMANN_LIMIT,
    BRUTE_FORCE_LIMIT,
};

/// One coupler `J_ij` with `i < j`, in scaled units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub value: i64,
}

impl Coupling {
    pub fn new(i: usize, j: usize, value: i64) -> Self {
        Coupling { i, j, value }
    }
}

/// How the reference (ground-state) energy of an instance was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMethod {
    /// Exhaustive enumeration of every state.
    Exhaustive,
    /// The all-down state implied by the weak-strong construction.
    Construction,
    /// Best energy found across long solver runs.
    Consensus,
    #[default]
    Unset,
}

/// Compressed adjacency used by the Monte Carlo kernels.
#[derive(Debug, Clone, Default)]
pub(crate) struct Adjacency {
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
    weights: Vec<i32>,
}

impl Adjacency {
    fn build(n: usize, couplings: &[Coupling]) -> Self {
        let mut degree = vec![0u32; n];
        for c in couplings {
            degree[c.i] += 1;
            degree[c.j] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0u32);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let total = *offsets.last().unwrap() as usize;
        let mut neighbors = vec![0u32; total];
        let mut weights = vec![0i32; total];
        let mut fill: Vec<u32> = offsets[..n].to_vec();
        for c in couplings {
            for (a, b) in [(c.i, c.j), (c.j, c.i)] {
                let k = fill[a] as usize;
                neighbors[k] = b as u32;
                weights[k] = c.value as i32;
                fill[a] += 1;
            }
        }
        Adjacency {
            offsets,
            neighbors,
            weights,
        }
    }

    #[inline]
    pub(crate) fn row(&self, site: usize) -> (&[u32], &[i32]) {
        let lo = self.offsets[site] as usize;
        let hi = self.offsets[site + 1] as usize;
        (&self.neighbors[lo..hi], &self.weights[lo..hi])
    }
}

/// An Ising instance with integer couplings and fields.
///
/// Immutable once built; share freely between concurrent solver runs.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    n: usize,
    scale: i64,
    couplings: Vec<Coupling>,
    fields: Vec<i64>,
    layout: Option<WeakStrongLayout>,
    reference_energy_scaled: Option<i64>,
    reference_method: ReferenceMethod,
    adjacency: Adjacency,
    max_delta: i64,
}

impl PartialEq for ProblemInstance {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.scale == other.scale
            && self.couplings == other.couplings
            && self.fields == other.fields
            && self.layout == other.layout
            && self.reference_energy_scaled == other.reference_energy_scaled
            && self.reference_method == other.reference_method
    }
}

impl ProblemInstance {
    /// Builds an instance from a coupling list and a dense field vector.
    ///
    /// Couplings are sorted; self-loops, `i > j`, duplicate pairs and
    /// out-of-range sites are rejected.
    pub fn new(n: usize, scale: i64, mut couplings: Vec<Coupling>, fields: Vec<i64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("instance must have at least one site"));
        }
        if scale <= 0 {
            return Err(Error::invalid(format!("scale must be positive, got {scale}")));
        }
        if fields.len() != n {
            return Err(Error::invalid(format!(
                "field vector has {} entries for {n} sites",
                fields.len()
            )));
        }
        for c in &couplings {
            if c.i == c.j {
                return Err(Error::invalid(format!("self-loop on site {}", c.i)));
            }
            if c.i > c.j {
                return Err(Error::invalid(format!("coupling ({}, {}) must have i < j", c.i, c.j)));
            }
            if c.j >= n {
                return Err(Error::invalid(format!("coupling ({}, {}) references site >= n = {n}", c.i, c.j)));
            }
            if c.value.abs() > i32::MAX as i64 / 64 {
                return Err(Error::invalid(format!("coupling ({}, {}) magnitude too large", c.i, c.j)));
            }
        }
        couplings.sort_unstable();
        if let Some(w) = couplings.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::invalid(format!("duplicate edge ({}, {})", w[0].i, w[0].j)));
        }
        let adjacency = Adjacency::build(n, &couplings);
        let max_delta = (0..n)
            .map(|i| {
                let (_, w) = adjacency.row(i);
                2 * (w.iter().map(|&x| (x as i64).abs()).sum::<i64>() + fields[i].abs())
            })
            .max()
            .unwrap_or(0);
        Ok(ProblemInstance {
            n,
            scale,
            couplings,
            fields,
            layout: None,
            reference_energy_scaled: None,
            reference_method: ReferenceMethod::Unset,
            adjacency,
            max_delta,
        })
    }

    pub fn with_layout(mut self, layout: Option<WeakStrongLayout>) -> Self {
        self.layout = layout;
        self
    }

    pub fn with_reference(mut self, energy: Option<i64>, method: ReferenceMethod) -> Self {
        self.reference_energy_scaled = energy;
        self.reference_method = if energy.is_some() {
            method
        } else {
            ReferenceMethod::Unset
        };
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn fields(&self) -> &[i64] {
        &self.fields
    }

    pub fn layout(&self) -> Option<&WeakStrongLayout> {
        self.layout.as_ref()
    }

    pub fn reference_energy_scaled(&self) -> Option<i64> {
        self.reference_energy_scaled
    }

    pub fn reference_method(&self) -> ReferenceMethod {
        self.reference_method
    }

    /// Largest possible `|dE|` of a single spin flip, in scaled units.
    pub fn max_flip_delta(&self) -> i64 {
        self.max_delta
    }

    pub(crate) fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    /// Neighbours of `site` with their scaled couplings.
    pub fn neighbors(&self, site: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let (nb, w) = self.adjacency.row(site);
        nb.iter().zip(w).map(|(&j, &v)| (j as usize, v as i64))
    }

    fn check_state(&self, state: &[i8]) -> Result<()> {
        if state.len() != self.n {
            return Err(Error::invalid(format!(
                "state has {} spins, instance has {} sites",
                state.len(),
                self.n
            )));
        }
        if let Some(k) = state.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::invalid(format!("spin {k} is {} (must be +1 or -1)", state[k])));
        }
        Ok(())
    }

    /// Exact energy in scaled units.
    pub fn energy(&self, state: &[i8]) -> Result<i64> {
        self.check_state(state)?;
        Ok(self.energy_unchecked(state))
    }

    pub(crate) fn energy_unchecked(&self, state: &[i8]) -> i64 {
        let bonds: i64 = self
            .couplings
            .iter()
            .map(|c| c.value * (state[c.i] * state[c.j]) as i64)
            .sum();
        let field: i64 = self
            .fields
            .iter()
            .zip(state)
            .map(|(&h, &s)| h * s as i64)
            .sum();
        -bonds - field
    }

    /// `sum_j J_ij s_j + h_i`.
    #[inline]
    pub(crate) fn local_field(&self, state: &[i8], site: usize) -> i64 {
        let (nb, w) = self.adjacency.row(site);
        let mut acc = self.fields[site];
        for (&j, &v) in nb.iter().zip(w) {
            acc += v as i64 * state[j as usize] as i64;
        }
        acc
    }

    /// Energy change from flipping `site`, in O(degree).
    pub fn delta_energy(&self, state: &[i8], site: usize) -> Result<i64> {
        self.check_state(state)?;
        if site >= self.n {
            return Err(Error::invalid(format!("site {site} out of range for n = {}", self.n)));
        }
        Ok(self.delta_unchecked(state, site))
    }

    #[inline]
    pub(crate) fn delta_unchecked(&self, state: &[i8], site: usize) -> i64 {
        2 * state[site] as i64 * self.local_field(state, site)
    }

    /// Energy change from flipping every site in `cluster` at once.
    pub(crate) fn cluster_delta(&self, state: &[i8], cluster: &[usize], in_cluster: &[bool]) -> i64 {
        let mut delta = 0i64;
        for &i in cluster {
            let (nb, w) = self.adjacency.row(i);
            let mut outside = self.fields[i];
            for (&j, &v) in nb.iter().zip(w) {
                if !in_cluster[j as usize] {
                    outside += v as i64 * state[j as usize] as i64;
                }
            }
            delta += 2 * state[i] as i64 * outside;
        }
        delta
    }

    /// The state with every spin equal to -1.
    pub fn all_down(&self) -> Vec<i8> {
        vec![-1; self.n]
    }
}
