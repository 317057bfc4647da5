//! Hierarchical meshes and THB-spline spaces.
//!
//! A [`HierarchicalSpace`] owns its [`HierarchicalMesh`]. Every mutation
//! (subdivision or reactivation of a cell) re-derives the active functions
//! locally and bumps the space generation; data built against an older
//! generation is rejected downstream.

mod mesh;
mod neighborhood;
mod space;

pub use mesh::{CellState, HierarchicalMesh, Levels};
pub use neighborhood::{coarsening_neighborhood, refinement_neighborhood, support_extension};
pub use space::{local_tensor_values, prolong_local, CellBasis, DofMap, Extraction, HierarchicalSpace, ThbValue};

use crate::error::{Error, Result};

/// Admissibility class `m >= 2` of a hierarchical mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdmissibilityClass(usize);

impl AdmissibilityClass {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!("admissibility class must be at least 2, got {m}")));
        }
        Ok(Self(m))
    }

    pub fn get(self) -> usize {
        self.0
    }
}
