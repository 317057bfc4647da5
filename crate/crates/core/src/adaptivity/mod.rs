//! Dörfler marking, admissible refinement and coarsening, and transfer of
//! fields between spaces.

mod marking;
mod mesh_ops;
mod transfer;

pub use crate::solver::Estimate;
pub use marking::{mark_max, mark_min, MarkKind, MarkedSet};
pub use mesh_ops::{coarsen, refine, CoarsenReport, RefineReport};
pub use transfer::{project_l2, transfer_refine, DiscreteField, Field, FnField, Projection};
