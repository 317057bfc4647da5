//! Geometry, quadrature and Galerkin assembly of the heat equation.

mod physics;
pub mod quadrature;
mod sampling;
mod system;

pub use physics::{Geometry, HeatSource, Material, ScanPath};
pub use sampling::{sample_field, SampledField};
pub use system::{
    assemble, assemble_load, assemble_matrices, assemble_rhs, assemble_with_cache, pattern, CellQuadrature,
    QuadratureCache, SystemMatrices,
};
