use super::cg::{linear_solve, SolveStats, SolverOptions};
use super::sparse::CsrMatrix;
use super::state::StateVector;
use crate::assembly::SystemMatrices;
use crate::error::{check_generation, Error, Result};

/// Constant-step backward Euler integrator.
#[derive(Clone, Copy, Debug)]
pub struct TimeStepper {
    dt: f64,
    pub options: SolverOptions,
}

impl TimeStepper {
    pub fn new(dt: f64, options: SolverOptions) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        Ok(Self { dt, options })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, sys: &SystemMatrices, theta: &StateVector) -> Result<StepOutcome> {
        backward_euler_step(sys, theta, self.dt, self.options)
    }
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub delta: Vec<f64>,
    pub theta: StateVector,
    pub stats: SolveStats,
}

/// Solves `(M + dt K) d = dt f - dt K theta` on raw matrices.
pub fn backward_euler_solve(
    mass: &CsrMatrix,
    stiffness: &CsrMatrix,
    load: &[f64],
    theta: &[f64],
    dt: f64,
    opts: SolverOptions,
) -> Result<(Vec<f64>, SolveStats)> {
    let a = mass.linear_combination(1.0, stiffness, dt);
    let k_theta = stiffness.matvec(theta);
    let rhs: Vec<f64> = load.iter().zip(&k_theta).map(|(f, kt)| dt * f - dt * kt).collect();
    linear_solve(&a, &rhs, None, opts)
}

/// One backward Euler step; the load of `sys` must be assembled at `t + dt`.
pub fn backward_euler_step(
    sys: &SystemMatrices,
    theta: &StateVector,
    dt: f64,
    opts: SolverOptions,
) -> Result<StepOutcome> {
    check_generation(sys.generation(), theta.generation)?;
    let t_new = theta.time + dt;
    if (sys.load_time - t_new).abs() > 1e-9 * t_new.abs().max(dt) {
        return Err(Error::Precondition(format!("load assembled at t = {}, step ends at {t_new}", sys.load_time)));
    }
    // the stiffness annihilates constants; removing one avoids cancellation for flat fields
    let shift = theta.coeffs.first().copied().unwrap_or(0.0);
    let shifted: Vec<f64> = theta.coeffs.iter().map(|t| t - shift).collect();
    let (delta, stats) = backward_euler_solve(&sys.mass, &sys.stiffness, &sys.load, &shifted, dt, opts)?;
    let coeffs = theta.coeffs.iter().zip(&delta).map(|(a, d)| a + d).collect();
    Ok(StepOutcome { delta, theta: StateVector { coeffs, time: t_new, generation: theta.generation }, stats })
}
