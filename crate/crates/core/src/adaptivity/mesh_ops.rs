use super::marking::{MarkKind, MarkedSet};
use crate::error::{Error, Result};
use crate::hierarchy::{coarsening_neighborhood, refinement_neighborhood, CellState, HierarchicalSpace};
use crate::spline::CellIndex;
use std::collections::BTreeSet;

/// Outcome of one call to [`refine`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefineReport {
    /// Every cell subdivided, marked or required by admissibility.
    pub subdivided: Vec<CellIndex>,
    /// Marked cells left alone because they sit on the deepest level.
    pub at_capacity: Vec<CellIndex>,
}

/// Outcome of one call to [`coarsen`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoarsenReport {
    pub reactivated: Vec<CellIndex>,
}

/// Subdivides every marked cell, first subdividing recursively the cells of
/// its refinement neighborhood so that the mesh stays admissible of class `m`.
pub fn refine(space: &mut HierarchicalSpace, marked: &MarkedSet, m: usize) -> Result<RefineReport> {
    if marked.kind != MarkKind::Refine {
        return Err(Error::Precondition("refine needs a refinement marking".into()));
    }
    if let Some(c) = marked.cells.iter().find(|c| !space.mesh().is_active(c)) {
        return Err(Error::Precondition(format!("marked cell {c:?} is not active")));
    }
    let mut report = RefineReport::default();
    for q in &marked.cells {
        refine_recursive(space, q, m, &mut report)?;
    }
    if !report.at_capacity.is_empty() {
        log::warn!("{} marked cells are already on the deepest level", report.at_capacity.len());
    }
    Ok(report)
}

fn refine_recursive(space: &mut HierarchicalSpace, q: &CellIndex, m: usize, report: &mut RefineReport) -> Result<()> {
    if q.level + 1 >= space.mesh().max_levels() {
        report.at_capacity.push(*q);
        return Ok(());
    }
    for nb in refinement_neighborhood(space.mesh(), q, m) {
        refine_recursive(space, &nb, m, report)?;
    }
    if space.mesh().is_active(q) {
        space.subdivide_cell(q)?;
        report.subdivided.push(*q);
    }
    Ok(())
}

/// Reactivates the parents of marked cells whose four children are all
/// marked and whose coarsening neighborhood is empty, finest level first.
pub fn coarsen(space: &mut HierarchicalSpace, marked: &MarkedSet, m: usize) -> Result<CoarsenReport> {
    if marked.kind != MarkKind::Coarsen {
        return Err(Error::Precondition("coarsen needs a coarsening marking".into()));
    }
    let parents: BTreeSet<CellIndex> = marked.cells.iter().filter_map(CellIndex::parent).collect();
    let mut report = CoarsenReport::default();
    // reverse key order visits the finest level first
    for q in parents.iter().rev() {
        let mesh = space.mesh();
        if mesh.state(q) != CellState::Refined {
            continue;
        }
        let children = q.children();
        if !children.iter().all(|c| mesh.is_active(c) && marked.contains(c)) {
            continue;
        }
        if !coarsening_neighborhood(mesh, q, m).is_empty() {
            continue;
        }
        space.reactivate_cell(q)?;
        report.reactivated.push(*q);
    }
    Ok(report)
}
