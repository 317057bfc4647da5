use crate::par;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix whose pattern couples every pair of indices sharing an element.
    pub fn from_elements(n: usize, elements: &[&[usize]]) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for dofs in elements {
            for &r in dofs.iter() {
                rows[r].extend_from_slice(dofs);
            }
        }
        Self::from_rows(n, rows)
    }

    fn from_rows(n: usize, mut rows: Vec<Vec<usize>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            cols.extend_from_slice(r);
            row_ptr.push(cols.len());
        }
        let vals = vec![0.0; cols.len()];
        Self { n, row_ptr, cols, vals }
    }

    pub fn identity(n: usize) -> Self {
        Self { n, row_ptr: (0..=n).collect(), cols: (0..n).collect(), vals: vec![1.0; n] }
    }

    /// Builds from a dense row-major matrix, keeping nonzero entries.
    pub fn from_dense(n: usize, dense: &[f64]) -> Self {
        let rows: Vec<Vec<usize>> = (0..n).map(|r| (0..n).filter(|&c| dense[r * n + c] != 0.0).collect()).collect();
        let mut m = Self::from_rows(n, rows);
        for r in 0..n {
            for k in m.row_ptr[r]..m.row_ptr[r + 1] {
                m.vals[k] = dense[r * n + m.cols[k]];
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    fn position(&self, r: usize, c: usize) -> Option<usize> {
        let lo = self.row_ptr[r];
        self.cols[lo..self.row_ptr[r + 1]].binary_search(&c).ok().map(|k| lo + k)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.position(r, c).map_or(0.0, |k| self.vals[k])
    }

    /// Adds `v` to entry `(r, c)`, which must be in the pattern.
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let k = self.position(r, c).expect("entry outside sparsity pattern");
        self.vals[k] += v;
    }

    /// Scatters a dense element matrix (row-major, `dofs.len()` squared).
    pub fn add_element(&mut self, dofs: &[usize], local: &[f64]) {
        let n = dofs.len();
        for (a, &r) in dofs.iter().enumerate() {
            for (b, &c) in dofs.iter().enumerate() {
                self.add(r, c, local[a * n + b]);
            }
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    /// `y = A x`
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        par::fill(y, |r| self.row(r).map(|(c, v)| v * x[c]).sum());
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// `alpha * self + beta * other`; both must share the pattern.
    pub fn linear_combination(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> CsrMatrix {
        assert!(self.row_ptr == other.row_ptr && self.cols == other.cols, "pattern mismatch");
        let vals = self.vals.iter().zip(&other.vals).map(|(a, b)| alpha * a + beta * b).collect();
        CsrMatrix { n: self.n, row_ptr: self.row_ptr.clone(), cols: self.cols.clone(), vals }
    }

    /// `x^T A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        par::sum_range(self.n, |r| x[r] * self.row(r).map(|(c, v)| v * y[c]).sum::<f64>())
    }

    /// Largest `|a_rc - a_cr|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst / scale
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                d[r * self.n + c] = v;
            }
        }
        d
    }
}
