use crate::assembly::quadrature::gauss_on;
use crate::error::{check_generation, Error, Result};
use crate::hierarchy::{local_tensor_values, prolong_local, CellState, HierarchicalMesh, HierarchicalSpace};
use crate::par;
use crate::solver::{linear_solve, CsrMatrix, SolveStats, SolverOptions, StateVector};
use crate::spline::CellIndex;

/// Local coefficients of a field on `fine`, in the B-splines of its level,
/// obtained from the coefficients on the active ancestor `coarse`.
fn descend(space: &HierarchicalSpace, coarse: &CellIndex, fine: &CellIndex, mut row: Vec<f64>) -> Vec<f64> {
    let levels = space.levels();
    for k in coarse.level..fine.level {
        row = prolong_local(levels, &fine.ancestor(k), &fine.ancestor(k + 1), &row);
    }
    row
}

/// Local coefficients `C^T theta` of a discrete field on one of its active cells.
fn cell_coefficients(space: &HierarchicalSpace, cell: &CellIndex, coeffs: &[f64]) -> Vec<f64> {
    let basis = space.extraction().cell(cell).expect("active cell");
    let p = space.degree();
    let mut out = vec![0.0; (p + 1) * (p + 1)];
    for (r, &d) in basis.dofs.iter().enumerate() {
        for (o, c) in out.iter_mut().zip(basis.coefficients(r)) {
            *o += coeffs[d] * c;
        }
    }
    out
}

/// Re-expresses a field in a space obtained from its own by refinement.
///
/// The THB coefficient of an active function of level `l` equals the
/// level-`l` B-spline coefficient of the field on any active level-`l`
/// cell of its support, so the transfer is exact.
pub fn transfer_refine(old: &HierarchicalSpace, new: &HierarchicalSpace, theta: &StateVector) -> Result<StateVector> {
    theta.check(old)?;
    let p = new.degree();
    let n1 = p + 1;
    let levels = new.levels();
    let dof_map = new.dof_map();
    let coeffs = par::map(dof_map.functions(), |f| -> Result<f64> {
        let tspace = levels.space(f.level);
        let cell = tspace
            .cells_in_support(f)?
            .into_iter()
            .find(|c| new.mesh().is_active(c))
            .expect("active function has an active cell of its level in its support");
        let src = match old.mesh().state(&cell) {
            CellState::Active => cell,
            CellState::Outside => (0..cell.level)
                .rev()
                .map(|k| cell.ancestor(k))
                .find(|a| old.mesh().is_active(a))
                .expect("mesh covers the domain"),
            CellState::Refined => {
                return Err(Error::Precondition(format!("cell {cell:?} is coarser in the target space")));
            }
        };
        let local = descend(new, &src, &cell, cell_coefficients(old, &src, &theta.coeffs));
        Ok(local[(f.a - cell.i) * n1 + (f.b - cell.j)])
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(StateVector::new(new, coeffs, theta.time))
}

/// A temperature field that can be sampled at parametric points.
pub trait Field: Sync {
    fn value(&self, x: [f64; 2]) -> f64;

    /// Mesh on which the field is piecewise polynomial, used to integrate
    /// exactly on the common refinement.
    fn mesh(&self) -> Option<&HierarchicalMesh> {
        None
    }
}

/// Discrete field given by THB coefficients on a space.
#[derive(Clone, Copy, Debug)]
pub struct DiscreteField<'a> {
    space: &'a HierarchicalSpace,
    coeffs: &'a [f64],
}

impl<'a> DiscreteField<'a> {
    pub fn new(space: &'a HierarchicalSpace, theta: &'a StateVector) -> Result<Self> {
        check_generation(space.generation(), theta.generation)?;
        Ok(Self { space, coeffs: &theta.coeffs })
    }
}

impl Field for DiscreteField<'_> {
    fn value(&self, x: [f64; 2]) -> f64 {
        self.space.evaluate(self.coeffs, x).expect("point inside the parametric domain")
    }

    fn mesh(&self) -> Option<&HierarchicalMesh> {
        Some(self.space.mesh())
    }
}

/// Field given by a closure of parametric coordinates.
pub struct FnField<F>(pub F);

impl<F: Fn([f64; 2]) -> f64 + Sync> Field for FnField<F> {
    fn value(&self, x: [f64; 2]) -> f64 {
        (self.0)(x)
    }
}

/// Cells of `other` (or `cell` itself) partitioning `cell` on the common refinement.
fn integration_cells(cell: &CellIndex, other: Option<&HierarchicalMesh>) -> Vec<CellIndex> {
    let Some(mesh) = other else { return vec![*cell] };
    if cell.level >= mesh.max_levels() || mesh.state(cell) != CellState::Refined {
        return vec![*cell];
    }
    cell.children().iter().flat_map(|c| integration_cells(c, other)).collect()
}

/// Result of an L2 projection.
#[derive(Clone, Debug)]
pub struct Projection {
    pub theta: StateVector,
    pub stats: SolveStats,
}

/// Galerkin L2 projection of `field` onto `space`.
pub fn project_l2<F: Field + ?Sized>(space: &HierarchicalSpace, field: &F, time: f64) -> Result<Projection> {
    let ext = space.extraction();
    let levels = space.levels();
    let n_gauss = space.degree() + 1;
    let other = field.mesh();
    let local = par::map(ext.cells(), |b| {
        let n = b.n_functions();
        let mut ge = vec![0.0; n * n];
        let mut be = vec![0.0; n];
        for sub in integration_cells(&b.cell, other) {
            let ([x0, x1], [y0, y1]) = space.mesh().cell_bounds(&sub);
            let (gx, wx) = gauss_on(n_gauss, x0, x1);
            let (gy, wy) = gauss_on(n_gauss, y0, y1);
            for (xa, wa) in gx.iter().zip(&wx) {
                for (yb, wb) in gy.iter().zip(&wy) {
                    let x = [*xa, *yb];
                    let w = wa * wb;
                    let vals = b.combine(&local_tensor_values(levels.space(b.cell.level), &b.cell, x, 0));
                    let g = field.value(x);
                    for (r, vr) in vals.iter().enumerate() {
                        be[r] += w * g * vr.value;
                        for (s, vs) in vals.iter().enumerate() {
                            ge[r * n + s] += w * vr.value * vs.value;
                        }
                    }
                }
            }
        }
        (ge, be)
    });
    let elements: Vec<&[usize]> = ext.cells().iter().map(|b| b.dofs.as_slice()).collect();
    let mut gram = CsrMatrix::from_elements(space.n_dofs(), &elements);
    let mut rhs = vec![0.0; space.n_dofs()];
    for (b, (ge, be)) in ext.cells().iter().zip(&local) {
        gram.add_element(&b.dofs, ge);
        for (&d, v) in b.dofs.iter().zip(be) {
            rhs[d] += v;
        }
    }
    let opts = SolverOptions { rel_tol: 1e-14, max_iter: 50_000 };
    let (coeffs, stats) = linear_solve(&gram, &rhs, None, opts)?;
    Ok(Projection { theta: StateVector::new(space, coeffs, time), stats })
}
