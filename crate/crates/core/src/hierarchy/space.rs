use super::mesh::{CellState, HierarchicalMesh, LevelGrid, Levels};
use crate::error::Result;
use crate::par;
use crate::spline::{CellIndex, FunctionIndex, TensorSpace};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

static NEXT_GENERATION: AtomicU64 = AtomicU64::new(1);

fn next_generation() -> u64 {
    NEXT_GENERATION.fetch_add(1, Ordering::Relaxed)
}

const IN_DOMAIN: u8 = 1;
const ACTIVE: u8 = 2;

/// Contiguous numbering of the active functions, level-major then `(a, b)`.
#[derive(Clone, Debug)]
pub struct DofMap {
    functions: Vec<FunctionIndex>,
    index: Vec<LevelGrid<u32>>,
}

impl DofMap {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[FunctionIndex] {
        &self.functions
    }

    pub fn function(&self, dof: usize) -> FunctionIndex {
        self.functions[dof]
    }

    pub fn dof(&self, f: &FunctionIndex) -> Option<usize> {
        let g = self.index.get(f.level)?;
        if f.a >= g.nx || f.b >= g.ny {
            return None;
        }
        let d = *g.get(f.a, f.b);
        (d != u32::MAX).then_some(d as usize)
    }
}

/// Restriction of the THB basis to one active cell: each THB function that
/// does not vanish on the cell, written in the `(p+1)^2` B-splines of the
/// cell's level.
#[derive(Clone, Debug)]
pub struct CellBasis {
    pub cell: CellIndex,
    pub functions: Vec<FunctionIndex>,
    pub dofs: Vec<usize>,
    /// `coeffs[r * (p+1)^2 + s * (p+1) + t]` multiplies the local B-spline
    /// `(cell.i + s, cell.j + t)`.
    coeffs: Vec<f64>,
    n_local: usize,
}

/// Value and parametric derivatives of one THB function at a point.
#[derive(Clone, Copy, Debug)]
pub struct ThbValue {
    pub function: FunctionIndex,
    pub dof: usize,
    pub value: f64,
    pub grad: [f64; 2],
    /// `[d2/dx2, d2/dxdy, d2/dy2]`
    pub hess: [f64; 3],
}

impl CellBasis {
    pub fn n_functions(&self) -> usize {
        self.functions.len()
    }

    pub fn coefficients(&self, row: usize) -> &[f64] {
        &self.coeffs[row * self.n_local..(row + 1) * self.n_local]
    }

    /// Levels spanned by the functions that do not vanish on the cell.
    pub fn level_range(&self) -> (usize, usize) {
        let lo = self.functions.iter().map(|f| f.level).min().unwrap_or(self.cell.level);
        let hi = self.functions.iter().map(|f| f.level).max().unwrap_or(self.cell.level);
        (lo, hi)
    }

    /// Combines local tensor-product values `local[k]` (value, dx, dy, dxx,
    /// dxy, dyy per local B-spline) into THB values.
    pub fn combine(&self, local: &[[f64; 6]]) -> Vec<ThbValue> {
        self.functions
            .iter()
            .zip(&self.dofs)
            .enumerate()
            .map(|(r, (f, &dof))| {
                let mut acc = [0.0; 6];
                for (c, l) in self.coefficients(r).iter().zip(local) {
                    if *c != 0.0 {
                        for k in 0..6 {
                            acc[k] += c * l[k];
                        }
                    }
                }
                ThbValue { function: *f, dof, value: acc[0], grad: [acc[1], acc[2]], hess: [acc[3], acc[4], acc[5]] }
            })
            .collect()
    }
}

/// Tensor-product B-spline values and derivatives of the cell's level at a
/// point of the (closed) cell, ordered as the columns of [`CellBasis`].
pub fn local_tensor_values(space: &TensorSpace, cell: &CellIndex, x: [f64; 2], deriv_order: usize) -> Vec<[f64; 6]> {
    let bx = space.knots(0).eval_in_cell(cell.i, x[0], deriv_order);
    let by = space.knots(1).eval_in_cell(cell.j, x[1], deriv_order);
    let mut out = Vec::with_capacity(bx.len() * by.len());
    for u in &bx {
        for v in &by {
            out.push([u[0] * v[0], u[1] * v[0], u[0] * v[1], u[2] * v[0], u[1] * v[1], u[0] * v[2]]);
        }
    }
    out
}

/// Re-expresses local coefficients on cell `coarse` (level `k`) in the
/// B-splines of its child cell `fine` (level `k + 1`).
pub fn prolong_local(levels: &Levels, coarse: &CellIndex, fine: &CellIndex, row: &[f64]) -> Vec<f64> {
    debug_assert_eq!(fine.parent().as_ref(), Some(coarse));
    let p = levels.degree();
    let n1 = p + 1;
    let sx = levels.two_scale(coarse.level, 0);
    let sy = levels.two_scale(coarse.level, 1);
    let mut next = vec![0.0; n1 * n1];
    for s in 0..n1 {
        for t in 0..n1 {
            let c = row[s * n1 + t];
            if c == 0.0 {
                continue;
            }
            for &(fa, wx) in sx.row(coarse.i + s) {
                if fa < fine.i || fa > fine.i + p {
                    continue;
                }
                for &(fb, wy) in sy.row(coarse.j + t) {
                    if fb < fine.j || fb > fine.j + p {
                        continue;
                    }
                    next[(fa - fine.i) * n1 + (fb - fine.j)] += c * wx * wy;
                }
            }
        }
    }
    next
}

/// Per-cell extraction of the THB basis for one generation.
#[derive(Debug)]
pub struct Extraction {
    cells: Vec<CellBasis>,
    slot: Vec<LevelGrid<u32>>,
}

impl Extraction {
    pub fn cells(&self) -> &[CellBasis] {
        &self.cells
    }

    pub fn cell(&self, c: &CellIndex) -> Option<&CellBasis> {
        let g = self.slot.get(c.level)?;
        let s = *g.get(c.i, c.j);
        (s != u32::MAX).then(|| &self.cells[s as usize])
    }
}

/// Hierarchical spline space on a hierarchical mesh: the active (HB)
/// functions of every level and the truncation realizing the THB basis.
#[derive(Clone, Debug)]
pub struct HierarchicalSpace {
    mesh: HierarchicalMesh,
    fn_state: Vec<LevelGrid<u8>>,
    generation: u64,
    dofs: OnceLock<Arc<DofMap>>,
    extraction: OnceLock<Arc<Extraction>>,
}

impl HierarchicalSpace {
    /// Single-level hierarchy of depth `max_levels` on the base space.
    pub fn build_initial(base: TensorSpace, max_levels: usize) -> Result<Self> {
        let levels = Arc::new(Levels::new(base, max_levels)?);
        let mesh = HierarchicalMesh::new(levels.clone());
        let fn_state = (0..levels.n_levels())
            .map(|l| {
                let [nx, ny] = levels.space(l).functions_per_dir();
                let fill = if l == 0 { IN_DOMAIN | ACTIVE } else { 0 };
                LevelGrid::new(nx, ny, fill)
            })
            .collect();
        Ok(Self { mesh, fn_state, generation: next_generation(), dofs: OnceLock::new(), extraction: OnceLock::new() })
    }

    /// Tensor-product space refined uniformly `level` times (hierarchy depth `level + 1`).
    pub fn uniform(base: TensorSpace, level: usize) -> Result<Self> {
        let mut s = Self::build_initial(base, level + 1)?;
        for l in 0..level {
            let cells: Vec<_> = s.mesh.active_cells_of_level(l).collect();
            for c in cells {
                s.subdivide_cell(&c)?;
            }
        }
        Ok(s)
    }

    pub fn mesh(&self) -> &HierarchicalMesh {
        &self.mesh
    }

    pub fn levels(&self) -> &Arc<Levels> {
        self.mesh.levels()
    }

    pub fn degree(&self) -> usize {
        self.mesh.degree()
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn is_active_function(&self, f: &FunctionIndex) -> bool {
        self.fn_state.get(f.level).is_some_and(|g| f.a < g.nx && f.b < g.ny && g.get(f.a, f.b) & ACTIVE != 0)
    }

    /// Whether the support of `f` lies inside the domain of its level.
    pub fn support_in_domain(&self, f: &FunctionIndex) -> bool {
        self.fn_state[f.level].get(f.a, f.b) & IN_DOMAIN != 0
    }

    pub fn dof_map(&self) -> &Arc<DofMap> {
        self.dofs.get_or_init(|| {
            let mut functions = Vec::new();
            let index = self
                .fn_state
                .iter()
                .enumerate()
                .map(|(l, g)| {
                    let mut idx = LevelGrid::new(g.nx, g.ny, u32::MAX);
                    for a in 0..g.nx {
                        for b in 0..g.ny {
                            if g.get(a, b) & ACTIVE != 0 {
                                idx.set(a, b, functions.len() as u32);
                                functions.push(FunctionIndex::new(l, a, b));
                            }
                        }
                    }
                    idx
                })
                .collect();
            Arc::new(DofMap { functions, index })
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_map().len()
    }

    pub fn extraction(&self) -> &Arc<Extraction> {
        self.extraction.get_or_init(|| {
            let dofs = self.dof_map().clone();
            let cells: Vec<CellIndex> = self.mesh.active_cells().collect();
            let bases = par::map(&cells, |c| self.compute_cell_basis(c, &dofs));
            let mut slot: Vec<LevelGrid<u32>> = (0..self.mesh.max_levels())
                .map(|l| {
                    let [nx, ny] = self.mesh.cells_per_dir(l);
                    LevelGrid::new(nx, ny, u32::MAX)
                })
                .collect();
            for (k, c) in cells.iter().enumerate() {
                slot[c.level].set(c.i, c.j, k as u32);
            }
            Arc::new(Extraction { cells: bases, slot })
        })
    }

    /// Iterated truncation restricted to cell `q`: functions of every level
    /// up to `q.level` are expanded level by level through the two-scale
    /// relation, dropping at each level the coefficients of B-splines whose
    /// support lies in that level's domain.
    fn compute_cell_basis(&self, q: &CellIndex, dofs: &DofMap) -> CellBasis {
        let levels = self.levels();
        let p = self.degree();
        let n1 = p + 1;
        let n_local = n1 * n1;
        let mut functions: Vec<FunctionIndex> = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();

        for k in 0..=q.level {
            let anc = q.ancestor(k);
            if k > 0 {
                let prev = q.ancestor(k - 1);
                for row in rows.iter_mut() {
                    *row = prolong_local(levels, &prev, &anc, row);
                }
                let g = &self.fn_state[k];
                for s in 0..n1 {
                    for t in 0..n1 {
                        if g.get(anc.i + s, anc.j + t) & IN_DOMAIN != 0 {
                            for row in rows.iter_mut() {
                                row[s * n1 + t] = 0.0;
                            }
                        }
                    }
                }
            }
            let g = &self.fn_state[k];
            for s in 0..n1 {
                for t in 0..n1 {
                    if g.get(anc.i + s, anc.j + t) & ACTIVE != 0 {
                        let mut unit = vec![0.0; n_local];
                        unit[s * n1 + t] = 1.0;
                        rows.push(unit);
                        functions.push(FunctionIndex::new(k, anc.i + s, anc.j + t));
                    }
                }
            }
        }

        let mut basis = CellBasis { cell: *q, functions: Vec::new(), dofs: Vec::new(), coeffs: Vec::new(), n_local };
        for (f, row) in functions.into_iter().zip(rows) {
            // entries are nonnegative, so an all-zero row means the function vanishes here
            if row.iter().any(|&c| c != 0.0) {
                basis.dofs.push(dofs.dof(&f).expect("active function without dof"));
                basis.functions.push(f);
                basis.coeffs.extend(row);
            }
        }
        basis
    }

    /// THB functions nonzero at a parametric point, with parametric
    /// derivatives up to `deriv_order`.
    pub fn thb_eval(&self, x: [f64; 2], deriv_order: usize) -> Result<Vec<ThbValue>> {
        let cell = self.mesh.locate(x)?;
        let basis = self.extraction().cell(&cell).expect("located cell is active");
        let local = local_tensor_values(self.levels().space(cell.level), &cell, x, deriv_order);
        Ok(basis.combine(&local))
    }

    /// Evaluates `sum_i coeffs[i] * T_i(x)`.
    pub fn evaluate(&self, coeffs: &[f64], x: [f64; 2]) -> Result<f64> {
        Ok(self.thb_eval(x, 0)?.iter().map(|v| coeffs[v.dof] * v.value).sum())
    }

    /// True iff on every active cell the non-vanishing THB functions
    /// belong to at most `m` successive levels.
    pub fn is_admissible(&self, m: usize) -> bool {
        self.extraction().cells().iter().all(|b| {
            let (lo, hi) = b.level_range();
            hi - lo < m
        })
    }

    /// Subdivides an active cell and updates the active functions.
    pub fn subdivide_cell(&mut self, q: &CellIndex) -> Result<()> {
        self.mesh.subdivide(q)?;
        self.after_change(q);
        Ok(())
    }

    /// Reactivates a subdivided cell whose four children are active.
    pub fn reactivate_cell(&mut self, q: &CellIndex) -> Result<()> {
        self.mesh.reactivate(q)?;
        self.after_change(q);
        Ok(())
    }

    /// Recomputes membership for the functions whose support touches `q`
    /// (level `l`) or its children (level `l + 1`).
    fn after_change(&mut self, q: &CellIndex) {
        let p = self.degree();
        self.update_functions(q.level, [q.i, q.i + p], [q.j, q.j + p]);
        if q.level + 1 < self.mesh.max_levels() {
            self.update_functions(q.level + 1, [2 * q.i, 2 * q.i + 1 + p], [2 * q.j, 2 * q.j + 1 + p]);
        }
        self.generation = next_generation();
        self.dofs = OnceLock::new();
        self.extraction = OnceLock::new();
    }

    fn update_functions(&mut self, level: usize, ra: [usize; 2], rb: [usize; 2]) {
        let space = self.levels().space(level).clone();
        let g = &self.fn_state[level];
        let (nx, ny) = (g.nx, g.ny);
        for a in ra[0]..=ra[1].min(nx - 1) {
            for b in rb[0]..=rb[1].min(ny - 1) {
                let (i0, i1) = space.knots(0).support_cells(a);
                let (j0, j1) = space.knots(1).support_cells(b);
                let mut inside = true;
                let mut refined = true;
                for i in i0..=i1 {
                    for j in j0..=j1 {
                        match self.mesh.state(&CellIndex::new(level, i, j)) {
                            CellState::Outside => {
                                inside = false;
                                refined = false;
                            }
                            CellState::Active => refined = false,
                            CellState::Refined => {}
                        }
                    }
                }
                let mut st = 0;
                if inside {
                    st |= IN_DOMAIN;
                    if !refined {
                        st |= ACTIVE;
                    }
                }
                self.fn_state[level].set(a, b, st);
            }
        }
    }
}
