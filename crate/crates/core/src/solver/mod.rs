//! Time integration, sparse solves, error estimation and energy diagnostics.

mod cg;
mod energy;
mod estimator;
mod sparse;
mod state;
mod stepping;

pub use cg::{linear_solve, SolveStats, SolverOptions};
pub use energy::{internal_energy, relative_energy_errors, total_energy, Energies, RelativeError};
pub use estimator::{estimate, estimate_with, Estimate};
pub use sparse::CsrMatrix;
pub use state::StateVector;
pub use stepping::{backward_euler_solve, backward_euler_step, StepOutcome, TimeStepper};
