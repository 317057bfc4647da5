//! Multilevel support extensions and the refinement/coarsening
//! neighborhoods that drive admissible adaptivity.

use super::mesh::HierarchicalMesh;
use crate::error::{Error, Result};
use crate::spline::CellIndex;

/// Inclusive index range of level-`k` cells in the support extension
/// of the level-`k` cell `(i, j)`, clipped to the grid.
fn extension_block(mesh: &HierarchicalMesh, k: usize, i: usize, j: usize) -> ([usize; 2], [usize; 2]) {
    let p = mesh.degree();
    let [nx, ny] = mesh.cells_per_dir(k);
    ([i.saturating_sub(p), (i + p).min(nx - 1)], [j.saturating_sub(p), (j + p).min(ny - 1)])
}

/// Level-`k` cells sharing the support of some level-`k` B-spline with `q`.
pub fn support_extension(mesh: &HierarchicalMesh, q: &CellIndex, k: usize) -> Result<Vec<CellIndex>> {
    if k > q.level {
        return Err(Error::Domain(format!("support extension level {k} above cell level {}", q.level)));
    }
    let a = q.ancestor(k);
    let (ri, rj) = extension_block(mesh, k, a.i, a.j);
    Ok((ri[0]..=ri[1]).flat_map(|i| (rj[0]..=rj[1]).map(move |j| CellIndex::new(k, i, j))).collect())
}

/// Active cells of level `l - m + 1` that must be subdivided before `q`
/// (of level `l`) can be, so that the mesh stays admissible of class `m`.
pub fn refinement_neighborhood(mesh: &HierarchicalMesh, q: &CellIndex, m: usize) -> Vec<CellIndex> {
    if q.level + 1 < m {
        return Vec::new();
    }
    let target = q.level + 1 - m;
    let a = q.ancestor(target + 1);
    let (ri, rj) = extension_block(mesh, target + 1, a.i, a.j);
    let mut out: Vec<CellIndex> = Vec::new();
    for pi in ri[0] / 2..=ri[1] / 2 {
        for pj in rj[0] / 2..=rj[1] / 2 {
            let c = CellIndex::new(target, pi, pj);
            if mesh.is_active(&c) {
                out.push(c);
            }
        }
    }
    out
}

/// Active cells of level `l + m` inside the support extension of the
/// children of `q` (of level `l`); `q` may only be reactivated when empty.
pub fn coarsening_neighborhood(mesh: &HierarchicalMesh, q: &CellIndex, m: usize) -> Vec<CellIndex> {
    let target = q.level + m;
    if target >= mesh.max_levels() {
        return Vec::new();
    }
    let p = mesh.degree();
    let [nx, ny] = mesh.cells_per_dir(q.level + 1);
    // union of the children's extensions at level l+1
    let ri = [(2 * q.i).saturating_sub(p), (2 * q.i + 1 + p).min(nx - 1)];
    let rj = [(2 * q.j).saturating_sub(p), (2 * q.j + 1 + p).min(ny - 1)];
    let scale = 1usize << (m - 1);
    let mut out = Vec::new();
    for i in ri[0] * scale..(ri[1] + 1) * scale {
        for j in rj[0] * scale..(rj[1] + 1) * scale {
            let c = CellIndex::new(target, i, j);
            if mesh.is_active(&c) {
                out.push(c);
            }
        }
    }
    out
}
