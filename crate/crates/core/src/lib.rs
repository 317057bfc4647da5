//! Adaptive isogeometric simulation of 2D transient heat conduction with a
//! moving Gaussian heat source, on truncated hierarchical B-splines with
//! admissible refinement and coarsening.

pub mod adaptivity;
pub mod assembly;
pub mod driver;
pub mod error;
pub mod hierarchy;
pub mod par;
pub mod solver;
pub mod spline;

pub use error::{Error, Result};
