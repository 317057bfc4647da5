use super::state::StateVector;
use crate::assembly::{HeatSource, Material, QuadratureCache};
use crate::error::{check_generation, Result};
use crate::par;
use crate::spline::CellIndex;
use std::collections::BTreeMap;

/// Per-cell error indicators and their root-sum-square.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub per_cell: BTreeMap<CellIndex, f64>,
    pub total: f64,
    pub generation: u64,
}

impl Estimate {
    pub fn from_cells(per_cell: BTreeMap<CellIndex, f64>, generation: u64) -> Self {
        let total = per_cell.values().map(|e| e * e).sum::<f64>().sqrt();
        Self { per_cell, total, generation }
    }

    pub fn len(&self) -> usize {
        self.per_cell.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_cell.is_empty()
    }
}

/// Residual indicator
/// `eps_Q^2 = h_Q^2 int_Q |f - Cp rho (theta_new - theta_old) / dt + k lap theta_new|^2`
/// with the source evaluated at `theta_new.time`.
pub fn estimate(
    cache: &QuadratureCache,
    mat: &Material,
    src: &HeatSource,
    theta_new: &StateVector,
    theta_old: &StateVector,
    dt: f64,
) -> Result<Estimate> {
    let t = theta_new.time;
    estimate_with(cache, mat, |x| src.value(t, x), theta_new, theta_old, dt)
}

/// Residual indicator for an arbitrary source density `f(x)`.
pub fn estimate_with<F>(
    cache: &QuadratureCache,
    mat: &Material,
    f: F,
    theta_new: &StateVector,
    theta_old: &StateVector,
    dt: f64,
) -> Result<Estimate>
where
    F: Fn([f64; 2]) -> f64 + Sync + Send,
{
    check_generation(cache.generation(), theta_new.generation)?;
    check_generation(cache.generation(), theta_old.generation)?;
    let cp_rho = mat.heat_capacity();
    let k = mat.conductivity;
    let rate: Vec<f64> = theta_new.coeffs.iter().zip(&theta_old.coeffs).map(|(n, o)| (n - o) / dt).collect();
    let values = par::map(cache.cells(), |c| {
        // constants have zero Laplacian; shifting them out keeps it exact
        let shift = theta_new.coeffs[c.dofs[0]];
        let shifted: Vec<f64> = c.dofs.iter().map(|&d| theta_new.coeffs[d] - shift).collect();
        let n = c.n_functions();
        let mut integral = 0.0;
        for q in 0..c.n_points() {
            let (mut dv, mut lap) = (0.0, 0.0);
            for (r, &d) in c.dofs.iter().enumerate() {
                dv += rate[d] * c.values[q * n + r];
                lap += shifted[r] * c.laplacians[q * n + r];
            }
            let r = f(c.points[q]) - cp_rho * dv + k * lap;
            integral += c.weights[q] * r * r;
        }
        (c.h * c.h * integral).sqrt()
    });
    let per_cell = cache.cells().iter().map(|c| c.cell).zip(values).collect();
    Ok(Estimate::from_cells(per_cell, cache.generation()))
}
