//! Benchmarking toolkit for weak-strong cluster Ising networks on the
//! chimera topology.
//!
//! The crate is organised bottom-up:
//!
//! * [`instance`] builds chimera graphs, weak-strong cluster networks and
//!   evaluates energies exactly in integer units.
//! * [`mcmc`] holds the shared Monte Carlo machinery (spin states, Metropolis
//!   sweeps, schedules and deterministic random streams).
//! * [`solvers`] implements the heuristics: simulated annealing, population
//!   annealing, parallel tempering and replica Monte Carlo with isoenergetic
//!   cluster moves, the hybrid cluster method and the super-spin reduction.
//! * [`tts`] and [`scaling`] turn run outcomes into time-to-solution values
//!   and fit their growth with system size.
//! * [`landscape`] samples spin-overlap distributions and classifies their
//!   peak structure.
//! * [`twolevel`] integrates the noisy two-level annealing model.

pub mod error;
pub mod instance;
pub mod landscape;
pub mod mcmc;
pub mod scaling;
pub mod solvers;
pub mod stats;
pub mod tts;
pub mod twolevel;

pub use error::{Error, Result};
pub use instance::{ProblemInstance, ReferenceMethod, WeakStrongLayout};
pub use mcmc::{RngStream, SpinState};
pub use solvers::{SolveOutcome, SolverId, SolverParams};
