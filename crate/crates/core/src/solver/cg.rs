use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::par;

/// Stopping rule for the preconditioned conjugate gradient solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Target `|b - A x| / |b|`.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_iter: 20_000 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Conjugate gradients with Jacobi preconditioning, started from `x0` (or zero).
pub fn linear_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: SolverOptions,
) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.n();
    assert_eq!(b.len(), n);
    let b_norm = par::dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((vec![0.0; n], SolveStats { iterations: 0, rel_residual: 0.0 }));
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();

    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let ax = a.matvec(&x);
    let mut r = par::map_range(n, |i| b[i] - ax[i]);
    let mut rel = par::dot(&r, &r).sqrt() / b_norm;
    if rel <= opts.rel_tol {
        return Ok((x, SolveStats { iterations: 0, rel_residual: rel }));
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = par::dot(&r, &z);
    let mut ap = vec![0.0; n];

    for it in 1..=opts.max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = par::dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::Numerical { message: "matrix is not positive definite".into(), residual: rel });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = par::dot(&r, &r).sqrt() / b_norm;
        if rel <= opts.rel_tol {
            return Ok((x, SolveStats { iterations: it, rel_residual: rel }));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = par::dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Numerical { message: format!("CG did not converge in {} iterations", opts.max_iter), residual: rel })
}
