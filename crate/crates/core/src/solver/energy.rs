use super::state::StateVector;
use crate::assembly::SystemMatrices;
use crate::error::Result;

/// `E_i = 1/2 theta^T K theta`
pub fn internal_energy(sys: &SystemMatrices, theta: &StateVector) -> Result<f64> {
    sys.check(theta)?;
    Ok(0.5 * sys.stiffness.bilinear(&theta.coeffs, &theta.coeffs))
}

/// `E_T = E_i + 1/2 theta_new^T M (theta_new - theta_old) / dt`
pub fn total_energy(sys: &SystemMatrices, theta_new: &StateVector, theta_old: &StateVector, dt: f64) -> Result<f64> {
    sys.check(theta_new)?;
    sys.check(theta_old)?;
    let rate: Vec<f64> = theta_new.coeffs.iter().zip(&theta_old.coeffs).map(|(n, o)| (n - o) / dt).collect();
    Ok(internal_energy(sys, theta_new)? + 0.5 * sys.mass.bilinear(&theta_new.coeffs, &rate))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Energies {
    pub internal: f64,
    pub total: f64,
}

impl Energies {
    pub fn compute(sys: &SystemMatrices, theta_new: &StateVector, theta_old: &StateVector, dt: f64) -> Result<Self> {
        Ok(Self { internal: internal_energy(sys, theta_new)?, total: total_energy(sys, theta_new, theta_old, dt)? })
    }
}

/// Relative deviation from a reference value; absolute when the reference is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativeError {
    pub value: f64,
    pub absolute: bool,
}

impl RelativeError {
    pub fn new(value: f64, reference: f64) -> Self {
        let diff = (reference - value).abs();
        if reference == 0.0 {
            Self { value: diff, absolute: true }
        } else {
            Self { value: diff / reference.abs(), absolute: false }
        }
    }
}

/// `(eps_i, eps_T)` of `energies` against `reference`.
pub fn relative_energy_errors(energies: Energies, reference: Energies) -> (RelativeError, RelativeError) {
    (RelativeError::new(energies.internal, reference.internal), RelativeError::new(energies.total, reference.total))
}
