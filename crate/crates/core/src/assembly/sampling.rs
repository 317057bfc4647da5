use super::physics::Geometry;
use crate::error::{check_generation, Error, Result};
use crate::hierarchy::HierarchicalSpace;
use crate::par;
use crate::solver::StateVector;
use std::io::Write;

/// Temperatures on an `n x n` grid of physical points spanning `[0, L]^2`.
#[derive(Clone, Debug)]
pub struct SampledField {
    pub n: usize,
    pub spacing: f64,
    /// Row-major with x varying fastest.
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn point(&self, k: usize) -> [f64; 2] {
        [(k % self.n) as f64 * self.spacing, (k / self.n) as f64 * self.spacing]
    }

    /// Legacy VTK structured points, one scalar field `temperature`.
    pub fn write_vtk<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "temperature")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET STRUCTURED_POINTS")?;
        writeln!(w, "DIMENSIONS {} {} 1", self.n, self.n)?;
        writeln!(w, "ORIGIN 0 0 0")?;
        writeln!(w, "SPACING {} {} 1", self.spacing, self.spacing)?;
        writeln!(w, "POINT_DATA {}", self.values.len())?;
        writeln!(w, "SCALARS temperature double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,value")?;
        for (k, v) in self.values.iter().enumerate() {
            let [x, y] = self.point(k);
            writeln!(w, "{x},{y},{v}")?;
        }
        Ok(())
    }
}

/// Evaluates the discrete field on a uniform grid of physical points.
pub fn sample_field(space: &HierarchicalSpace, theta: &StateVector, geom: Geometry, n: usize) -> Result<SampledField> {
    check_generation(space.generation(), theta.generation)?;
    if n < 2 {
        return Err(Error::Precondition("sample grid needs n >= 2".into()));
    }
    let spacing = geom.side_length() / (n - 1) as f64;
    let values = par::map_range(n * n, |k| {
        let x = [(k % n) as f64 * spacing, (k / n) as f64 * spacing];
        space.evaluate(&theta.coeffs, geom.to_parametric(x))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(SampledField { n, spacing, values })
}
