use std::time::Instant;

use super::{pt_icm, PtIcmParams, SolveOutcome, SolverParams};
use crate::error::{Error, Result};
use crate::instance::{Coupling, ProblemInstance, CELL_SITES};
use crate::mcmc::RngStream;

/// An instance collapsed to one logical spin per unit cell.
#[derive(Debug, Clone)]
pub struct SuperSpinReduction {
    reduced: ProblemInstance,
    cells: Vec<[usize; CELL_SITES]>,
    n_full: usize,
    offset_scaled: i64,
}

impl SuperSpinReduction {
    /// The logical instance. Its energies omit the constant intra-cell
    /// contribution; see [`SuperSpinReduction::reduced_energy`].
    pub fn reduced(&self) -> &ProblemInstance {
        &self.reduced
    }

    /// Energy of the intra-cell couplings in any cell-uniform state.
    pub fn offset(&self) -> i64 {
        self.offset_scaled
    }

    /// Energy of `lift(logical)` on the full instance.
    pub fn reduced_energy(&self, logical: &[i8]) -> Result<i64> {
        Ok(self.reduced.energy(logical)? + self.offset_scaled)
    }

    /// Maps each logical spin onto the 8 sites of its cell.
    pub fn lift(&self, logical: &[i8]) -> Result<Vec<i8>> {
        if logical.len() != self.cells.len() {
            return Err(Error::invalid(format!(
                "logical state has {} spins, expected {}",
                logical.len(),
                self.cells.len()
            )));
        }
        let mut full = vec![0i8; self.n_full];
        for (cell, &s) in self.cells.iter().zip(logical) {
            for &site in cell {
                full[site] = s;
            }
        }
        Ok(full)
    }
}

/// Collapses every unit cell of a weak-strong instance into a super-spin.
///
/// Logical couplings sum the physical couplings between two cells, logical
/// fields sum the fields of a cell, and the couplings inside a cell become
/// a constant offset.
pub fn superspin_reduce(instance: &ProblemInstance) -> Result<SuperSpinReduction> {
    let layout = instance
        .layout()
        .ok_or_else(|| Error::invalid("HCM/SS require cell structure (instance has no weak-strong layout)"))?;
    if layout.num_sites() != instance.n() {
        return Err(Error::invalid("layout does not cover the instance sites"));
    }
    let cells: Vec<[usize; CELL_SITES]> = layout.cell_sites().into_iter().map(|(_, s)| s).collect();
    let mut cell_of = vec![0usize; instance.n()];
    for (k, cell) in cells.iter().enumerate() {
        for &s in cell {
            cell_of[s] = k;
        }
    }

    let mut offset = 0i64;
    let mut logical = std::collections::BTreeMap::<(usize, usize), i64>::new();
    for c in instance.couplings() {
        let (a, b) = (cell_of[c.i], cell_of[c.j]);
        if a == b {
            offset -= c.value;
        } else {
            *logical.entry((a.min(b), a.max(b))).or_default() += c.value;
        }
    }
    let couplings = logical
        .into_iter()
        .filter(|&(_, v)| v != 0)
        .map(|((i, j), v)| Coupling::new(i, j, v))
        .collect();
    let fields = cells
        .iter()
        .map(|cell| cell.iter().map(|&s| instance.fields()[s]).sum())
        .collect();
    let mut reduced = ProblemInstance::new(cells.len(), instance.scale(), couplings, fields)?;
    if let Some(r) = instance.reference_energy_scaled() {
        reduced = reduced.with_reference(Some(r - offset), instance.reference_method());
    }
    Ok(SuperSpinReduction {
        reduced,
        cells,
        n_full: instance.n(),
        offset_scaled: offset,
    })
}

/// Super-spin solver: PT+ICM on the reduced instance, lifted back.
///
/// The search is restricted to cell-uniform states, so the result is an
/// upper bound on the ground-state energy. Work is counted in logical-site
/// updates.
pub fn ss_solve(instance: &ProblemInstance, params: &PtIcmParams, rng: &mut RngStream) -> Result<SolveOutcome> {
    SolverParams::Ss(params.clone()).validate()?;
    let started = Instant::now();
    let reduction = superspin_reduce(instance)?;
    let inner = pt_icm(reduction.reduced(), params, rng)?;
    let best_state = reduction.lift(&inner.best_state)?;
    let best_energy_scaled = reduction.reduced_energy(&inner.best_state)?;
    debug_assert_eq!(instance.energy(&best_state).ok(), Some(best_energy_scaled));
    Ok(SolveOutcome {
        success: instance.reference_energy_scaled() == Some(best_energy_scaled),
        best_energy_scaled,
        best_state,
        work_sweep_site_updates: inner.work_sweep_site_updates,
        wall_time: started.elapsed(),
        gs_criteria_met: inner.gs_criteria_met,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_network, ReferenceMethod, WeakStrongLayout};
    use rand::Rng;

    #[test]
    fn single_pair_reduction() {
        let inst = generate_network(&WeakStrongLayout::single_pair(), 0).unwrap();
        let red = superspin_reduce(&inst).unwrap();
        assert_eq!(red.reduced().n(), 2);
        assert_eq!(red.reduced().couplings(), &[Coupling::new(0, 1, 100)]);
        let mut fields = red.reduced().fields().to_vec();
        fields.sort_unstable();
        assert_eq!(fields, vec![-200, 88]);
        assert_eq!(red.reduced_energy(&[-1, -1]).unwrap(), -1012);
        assert_eq!(red.reduced().reference_energy_scaled(), Some(-1012 - red.offset()));
    }

    #[test]
    fn lifted_energy_identity() {
        let inst = generate_network(&WeakStrongLayout::for_pair_count(6).unwrap(), 9).unwrap();
        let red = superspin_reduce(&inst).unwrap();
        assert_eq!(red.reduced().n(), inst.n() / CELL_SITES);
        let mut rng = RngStream::new(1);
        for _ in 0..1000 {
            let logical: Vec<i8> = (0..red.reduced().n())
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            let full = red.lift(&logical).unwrap();
            assert_eq!(red.reduced_energy(&logical).unwrap(), inst.energy(&full).unwrap());
        }
    }

    #[test]
    fn requires_layout() {
        let inst = ProblemInstance::new(8, 25, vec![], vec![0; 8]).unwrap();
        let err = superspin_reduce(&inst).unwrap_err();
        assert!(err.to_string().contains("require cell structure"));
    }

    #[test]
    fn single_pair_solved_cheaply() {
        let inst = generate_network(&WeakStrongLayout::single_pair(), 0).unwrap();
        let params = PtIcmParams {
            sweeps: 100,
            ..PtIcmParams::default()
        };
        let out = ss_solve(&inst, &params, &mut RngStream::new(2)).unwrap();
        assert_eq!(out.best_energy_scaled, -1012);
        assert!(out.success);
        assert_eq!(out.best_state, vec![-1; 16]);
    }

    #[test]
    fn upper_bound_on_non_uniform_ground_state() {
        // one cell whose two sides prefer opposite orientations
        let base = generate_network(&WeakStrongLayout::single_pair(), 0).unwrap();
        let mut fields = base.fields().to_vec();
        for f in fields.iter_mut().take(4) {
            *f = 400;
        }
        let inst = ProblemInstance::new(16, 25, base.couplings().to_vec(), fields)
            .unwrap()
            .with_layout(base.layout().cloned());
        let (ground, _) = crate::instance::brute_force_ground_state(&inst).unwrap();
        let inst = inst.with_reference(Some(ground), ReferenceMethod::Exhaustive);
        let params = PtIcmParams {
            sweeps: 200,
            ..PtIcmParams::default()
        };
        let out = ss_solve(&inst, &params, &mut RngStream::new(3)).unwrap();
        assert!(out.best_energy_scaled >= ground);
    }
}
