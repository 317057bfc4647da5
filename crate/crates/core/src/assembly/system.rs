use super::physics::{Geometry, HeatSource, Material};
use super::quadrature::gauss_on;
use crate::error::{check_generation, Error, Result};
use crate::hierarchy::{local_tensor_values, CellBasis, DofMap, HierarchicalSpace};
use crate::par;
use crate::solver::{CsrMatrix, StateVector};
use crate::spline::CellIndex;
use std::sync::Arc;

/// Basis tables of one active cell at its Gauss points, in physical units.
#[derive(Clone, Debug)]
pub struct CellQuadrature {
    pub cell: CellIndex,
    pub dofs: Vec<usize>,
    pub points: Vec<[f64; 2]>,
    /// Gauss weight times Jacobian determinant.
    pub weights: Vec<f64>,
    /// `values[q * n + r]` for point `q`, function `r`.
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
    pub laplacians: Vec<f64>,
    /// Physical side length of the cell.
    pub h: f64,
}

impl CellQuadrature {
    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn n_functions(&self) -> usize {
        self.dofs.len()
    }

    /// Field value and Laplacian at point `q` for global coefficients.
    pub fn field(&self, coeffs: &[f64], q: usize) -> (f64, f64) {
        let n = self.dofs.len();
        let mut v = 0.0;
        let mut lap = 0.0;
        for (r, &d) in self.dofs.iter().enumerate() {
            v += coeffs[d] * self.values[q * n + r];
            lap += coeffs[d] * self.laplacians[q * n + r];
        }
        (v, lap)
    }
}

/// Per-cell quadrature tables of one space generation.
#[derive(Debug)]
pub struct QuadratureCache {
    generation: u64,
    n_dofs: usize,
    n_gauss: usize,
    geometry: Geometry,
    cells: Vec<CellQuadrature>,
}

impl QuadratureCache {
    pub fn new(space: &HierarchicalSpace, geometry: Geometry, n_gauss: usize) -> Result<Self> {
        let p = space.degree();
        if n_gauss < p + 1 {
            return Err(Error::Precondition(format!("n_gauss = {n_gauss} below p + 1 = {}", p + 1)));
        }
        let ext = space.extraction();
        let levels = space.levels();
        let cells = par::map(ext.cells(), |b| cell_tables(b, levels.space(b.cell.level), space, geometry, n_gauss));
        Ok(Self { generation: space.generation(), n_dofs: space.n_dofs(), n_gauss, geometry, cells })
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_gauss(&self) -> usize {
        self.n_gauss
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn cells(&self) -> &[CellQuadrature] {
        &self.cells
    }
}

fn cell_tables(
    basis: &CellBasis,
    tspace: &crate::spline::TensorSpace,
    space: &HierarchicalSpace,
    geometry: Geometry,
    n_gauss: usize,
) -> CellQuadrature {
    let ([x0, x1], [y0, y1]) = space.mesh().cell_bounds(&basis.cell);
    let (gx, wx) = gauss_on(n_gauss, x0, x1);
    let (gy, wy) = gauss_on(n_gauss, y0, y1);
    let l = geometry.side_length();
    let jac = geometry.jacobian();
    let n = basis.n_functions();
    let npts = n_gauss * n_gauss;
    let mut out = CellQuadrature {
        cell: basis.cell,
        dofs: basis.dofs.clone(),
        points: Vec::with_capacity(npts),
        weights: Vec::with_capacity(npts),
        values: Vec::with_capacity(npts * n),
        grads: Vec::with_capacity(npts * n),
        laplacians: Vec::with_capacity(npts * n),
        h: (x1 - x0) * l,
    };
    for (xa, wa) in gx.iter().zip(&wx) {
        for (yb, wb) in gy.iter().zip(&wy) {
            let xh = [*xa, *yb];
            out.points.push(geometry.to_physical(xh));
            out.weights.push(wa * wb * jac);
            let local = local_tensor_values(tspace, &basis.cell, xh, 2);
            for v in basis.combine(&local) {
                out.values.push(v.value);
                out.grads.push([v.grad[0] / l, v.grad[1] / l]);
                out.laplacians.push((v.hess[0] + v.hess[2]) / (l * l));
            }
        }
    }
    out
}

/// Mass and stiffness matrices of one generation and the load at one time.
#[derive(Clone, Debug)]
pub struct SystemMatrices {
    /// `Cp rho int N^T N`
    pub mass: CsrMatrix,
    /// `k int B^T B`
    pub stiffness: CsrMatrix,
    pub load: Vec<f64>,
    pub load_time: f64,
    pub dof_map: Arc<DofMap>,
    pub quadrature: Arc<QuadratureCache>,
}

impl SystemMatrices {
    pub fn generation(&self) -> u64 {
        self.quadrature.generation()
    }

    pub fn n_dofs(&self) -> usize {
        self.mass.n()
    }

    /// Re-assembles the load vector for time `t`.
    pub fn update_load(&mut self, src: &HeatSource, t: f64) {
        self.load = assemble_load(&self.quadrature, src, t);
        self.load_time = t;
    }

    pub fn check(&self, state: &StateVector) -> Result<()> {
        check_generation(self.generation(), state.generation)
    }
}

/// Builds M, K and f(t) on `space` with `n_gauss` points per direction.
pub fn assemble(
    space: &HierarchicalSpace,
    geom: Geometry,
    mat: &Material,
    src: &HeatSource,
    t: f64,
    n_gauss: usize,
) -> Result<SystemMatrices> {
    let cache = Arc::new(QuadratureCache::new(space, geom, n_gauss)?);
    assemble_with_cache(space, cache, mat, src, t)
}

pub fn assemble_with_cache(
    space: &HierarchicalSpace,
    cache: Arc<QuadratureCache>,
    mat: &Material,
    src: &HeatSource,
    t: f64,
) -> Result<SystemMatrices> {
    check_generation(space.generation(), cache.generation())?;
    let (mass, stiffness) = assemble_matrices(&cache, mat);
    let load = assemble_load(&cache, src, t);
    Ok(SystemMatrices { mass, stiffness, load, load_time: t, dof_map: space.dof_map().clone(), quadrature: cache })
}

/// Sparsity pattern shared by every matrix of the generation.
pub fn pattern(cache: &QuadratureCache) -> CsrMatrix {
    let elements: Vec<&[usize]> = cache.cells().iter().map(|c| c.dofs.as_slice()).collect();
    CsrMatrix::from_elements(cache.n_dofs(), &elements)
}

pub fn assemble_matrices(cache: &QuadratureCache, mat: &Material) -> (CsrMatrix, CsrMatrix) {
    let cp_rho = mat.heat_capacity();
    let k = mat.conductivity;
    let local = par::map(cache.cells(), |c| {
        let n = c.n_functions();
        let mut me = vec![0.0; n * n];
        let mut ke = vec![0.0; n * n];
        for q in 0..c.n_points() {
            let w = c.weights[q];
            let v = &c.values[q * n..(q + 1) * n];
            let g = &c.grads[q * n..(q + 1) * n];
            for a in 0..n {
                for b in 0..n {
                    me[a * n + b] += w * cp_rho * v[a] * v[b];
                    ke[a * n + b] += w * k * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
        }
        (me, ke)
    });
    let mut mass = pattern(cache);
    let mut stiffness = mass.clone();
    for (c, (me, ke)) in cache.cells().iter().zip(&local) {
        mass.add_element(&c.dofs, me);
        stiffness.add_element(&c.dofs, ke);
    }
    (mass, stiffness)
}

/// `f_i = int N_i f(x, t)`
pub fn assemble_load(cache: &QuadratureCache, src: &HeatSource, t: f64) -> Vec<f64> {
    assemble_rhs(cache, |x| src.value(t, x))
}

/// `b_i = int N_i g(x)` for a function of physical position.
pub fn assemble_rhs<G>(cache: &QuadratureCache, g: G) -> Vec<f64>
where
    G: Fn([f64; 2]) -> f64 + Sync + Send,
{
    let local = par::map(cache.cells(), |c| {
        let n = c.n_functions();
        let mut fe = vec![0.0; n];
        for q in 0..c.n_points() {
            let wf = c.weights[q] * g(c.points[q]);
            if wf == 0.0 {
                continue;
            }
            for (a, v) in c.values[q * n..(q + 1) * n].iter().enumerate() {
                fe[a] += wf * v;
            }
        }
        fe
    });
    let mut f = vec![0.0; cache.n_dofs()];
    for (c, fe) in cache.cells().iter().zip(&local) {
        for (&d, v) in c.dofs.iter().zip(fe) {
            f[d] += v;
        }
    }
    f
}
