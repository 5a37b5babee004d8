//! Monte Carlo machinery shared by every solver.

mod heatbath;
mod metropolis;
mod rng;
mod schedule;
mod state;

pub use heatbath::{heat_bath_sweep, HeatBathTable};
pub use metropolis::{metropolis_sweep, MetropolisTable};
pub use rng::RngStream;
pub use schedule::{geometric_temperature_ladder, linear_beta_schedule, Schedule, TemperatureLadder};
pub use state::SpinState;
