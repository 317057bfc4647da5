use crate::error::{check_generation, Result};
use crate::hierarchy::HierarchicalSpace;

/// THB coefficients of a temperature field, tied to the space generation
/// they were computed on.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub coeffs: Vec<f64>,
    pub time: f64,
    pub generation: u64,
}

impl StateVector {
    pub fn new(space: &HierarchicalSpace, coeffs: Vec<f64>, time: f64) -> Self {
        assert_eq!(coeffs.len(), space.n_dofs(), "coefficient count differs from the space dimension");
        Self { coeffs, time, generation: space.generation() }
    }

    /// Constant field; exact because the THB basis is a partition of unity.
    pub fn constant(space: &HierarchicalSpace, value: f64, time: f64) -> Self {
        Self::new(space, vec![value; space.n_dofs()], time)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn check(&self, space: &HierarchicalSpace) -> Result<()> {
        check_generation(space.generation(), self.generation)
    }

    /// Field value at a parametric point.
    pub fn evaluate(&self, space: &HierarchicalSpace, x: [f64; 2]) -> Result<f64> {
        self.check(space)?;
        space.evaluate(&self.coeffs, x)
    }
}
