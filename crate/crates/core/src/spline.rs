//! Univariate and tensor-product B-spline machinery.
//!
//! Knot vectors are open (end knots repeated `p+1` times) with simple
//! interior knots, on the parametric interval `[0, 1]`. Levels of a hierarchy
//! are related by dyadic refinement, and [`TwoScale`] stores the refinement
//! relation expressing every coarse B-spline in the finer basis.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Open knot vector with simple interior knots.
#[derive(Clone, Debug, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

/// Nonzero basis functions at a point: `values[k][r]` is the `k`-th
/// derivative of function `first + r`.
#[derive(Clone, Debug)]
pub struct BasisValues {
    pub span: usize,
    pub first: usize,
    pub values: Vec<[f64; 3]>,
}

impl KnotVector {
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        if degree < 1 {
            return Err(Error::Structural("degree must be at least 1".into()));
        }
        if knots.len() < 2 * (degree + 1) {
            return Err(Error::Structural(format!(
                "{} knots cannot hold an open knot vector of degree {degree}",
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Structural("knots must be nondecreasing".into()));
        }
        let (lo, hi) = (knots[0], knots[knots.len() - 1]);
        if lo < 0.0 || hi > 1.0 || lo >= hi {
            return Err(Error::Structural(format!("knot range [{lo}, {hi}] not inside [0, 1]")));
        }
        let mult = |v: f64| knots.iter().filter(|&&k| k == v).count();
        if mult(lo) != degree + 1 || mult(hi) != degree + 1 {
            return Err(Error::Structural("end knots must be repeated exactly p+1 times".into()));
        }
        let interior = &knots[degree + 1..knots.len() - degree - 1];
        if interior.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Structural("interior knots must be simple".into()));
        }
        Ok(Self { degree, knots })
    }

    /// Open knot vector on `[0, 1]` with `n_cells` equal spans.
    pub fn uniform(degree: usize, n_cells: usize) -> Self {
        assert!(degree >= 1 && n_cells >= 1);
        let mut knots = vec![0.0; degree + 1];
        knots.extend((1..n_cells).map(|i| i as f64 / n_cells as f64));
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self { degree, knots }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn n_functions(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Number of nonempty knot spans (cells).
    pub fn n_cells(&self) -> usize {
        self.n_functions() - self.degree
    }

    /// Parametric interval of cell `c` (the `c`-th nonempty span).
    pub fn cell_bounds(&self, c: usize) -> (f64, f64) {
        (self.knots[c + self.degree], self.knots[c + self.degree + 1])
    }

    /// Index `k` with `knots[k] <= x < knots[k+1]`; `x` at the right end maps
    /// to the last nonempty span.
    pub fn find_span(&self, x: f64) -> Result<usize> {
        let p = self.degree;
        let n = self.n_functions();
        let (lo, hi) = (self.knots[p], self.knots[n]);
        if !(lo..=hi).contains(&x) {
            return Err(Error::Domain(format!("parameter {x} outside [{lo}, {hi}]")));
        }
        if x >= hi {
            return Ok(n - 1);
        }
        // first index in p+1..=n whose knot exceeds x, minus one
        let upper = self.knots[p + 1..=n].partition_point(|&k| k <= x);
        Ok(p + upper)
    }

    /// Values and up to second derivatives of the `p+1` functions nonzero at
    /// `x`. Derivatives above `deriv_order` (or above `p`) are returned as 0.
    pub fn eval_basis(&self, x: f64, deriv_order: usize) -> Result<BasisValues> {
        let span = self.find_span(x)?;
        let n_ders = deriv_order.min(2).min(self.degree);
        let ders = ders_basis(&self.knots, self.degree, span, x, n_ders);
        let values = (0..=self.degree)
            .map(|r| {
                let mut v = [0.0; 3];
                for (k, slot) in v.iter_mut().enumerate().take(n_ders + 1) {
                    *slot = ders[k][r];
                }
                v
            })
            .collect();
        Ok(BasisValues { span, first: span - self.degree, values })
    }

    /// Polynomial pieces of the functions `c..=c+p` on cell `c`, evaluated at
    /// `x` (which may lie on, or slightly beyond, the cell boundary).
    pub fn eval_in_cell(&self, c: usize, x: f64, deriv_order: usize) -> Vec<[f64; 3]> {
        let n_ders = deriv_order.min(2).min(self.degree);
        let ders = ders_basis(&self.knots, self.degree, c + self.degree, x, n_ders);
        (0..=self.degree)
            .map(|r| {
                let mut v = [0.0; 3];
                for (k, slot) in v.iter_mut().enumerate().take(n_ders + 1) {
                    *slot = ders[k][r];
                }
                v
            })
            .collect()
    }

    /// Inserts the midpoint of every nonempty span.
    pub fn dyadic_refine(&self) -> Self {
        let p = self.degree;
        let n = self.n_functions();
        let mut knots = Vec::with_capacity(self.knots.len() + self.n_cells());
        knots.extend_from_slice(&self.knots[..=p]);
        for k in p..n {
            let (a, b) = (self.knots[k], self.knots[k + 1]);
            knots.push(0.5 * (a + b));
            knots.push(b);
        }
        knots.extend(std::iter::repeat_n(self.knots[n], p));
        Self { degree: p, knots }
    }

    /// Cells `[lo, hi]` (inclusive) on which function `a` is nonzero.
    pub fn support_cells(&self, a: usize) -> (usize, usize) {
        let lo = a.saturating_sub(self.degree);
        let hi = a.min(self.n_cells() - 1);
        (lo, hi)
    }

    /// Functions `[lo, hi]` (inclusive) nonzero on cell `c`.
    pub fn cell_functions(&self, c: usize) -> (usize, usize) {
        (c, c + self.degree)
    }
}

/// Cox-de Boor recurrence with derivatives (`ders[k][r]`, `k <= n_ders`).
fn ders_basis(knots: &[f64], p: usize, span: usize, x: f64, n_ders: usize) -> Vec<Vec<f64>> {
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = vec![vec![0.0; p + 1]; n_ders + 1];
    for (r, d) in ders[0].iter_mut().enumerate() {
        *d = ndu[r][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=n_ders {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for k in 1..=n_ders {
        for d in ders[k].iter_mut() {
            *d *= factor;
        }
        factor *= (p - k) as f64;
    }
    ders
}

/// Refinement relation between two nested knot vectors: row `i` lists the
/// fine functions (with coefficients) whose combination equals coarse
/// function `i`.
#[derive(Clone, Debug)]
pub struct TwoScale {
    rows: Vec<Vec<(usize, f64)>>,
    n_fine: usize,
}

impl TwoScale {
    pub fn row(&self, coarse: usize) -> &[(usize, f64)] {
        &self.rows[coarse]
    }

    pub fn n_coarse(&self) -> usize {
        self.rows.len()
    }

    pub fn n_fine(&self) -> usize {
        self.n_fine
    }

    /// Coefficient of fine function `fine` in the expansion of `coarse`.
    pub fn coefficient(&self, coarse: usize, fine: usize) -> f64 {
        self.rows[coarse].iter().find(|(f, _)| *f == fine).map_or(0.0, |&(_, c)| c)
    }

    /// Maps coarse coefficients to fine coefficients of the same function.
    pub fn prolong(&self, coarse: &[f64]) -> Vec<f64> {
        let mut fine = vec![0.0; self.n_fine];
        for (row, &c) in self.rows.iter().zip(coarse) {
            for &(f, w) in row {
                fine[f] += w * c;
            }
        }
        fine
    }
}

/// Builds the two-scale relation by repeated single-knot insertion on the
/// local knot vector of every coarse function.
pub fn two_scale_matrix(coarse: &KnotVector, fine: &KnotVector) -> Result<TwoScale> {
    let p = coarse.degree;
    if fine.degree != p {
        return Err(Error::Structural("degree mismatch between knot vectors".into()));
    }
    for &k in &coarse.knots {
        let mc = coarse.knots.iter().filter(|&&v| v == k).count();
        let mf = fine.knots.iter().filter(|&&v| v == k).count();
        if mf < mc {
            return Err(Error::Structural(format!("knot {k} of the coarse vector is missing in the fine one")));
        }
    }

    let u = &coarse.knots;
    let mut rows = Vec::with_capacity(coarse.n_functions());
    for i in 0..coarse.n_functions() {
        let local = &u[i..=i + p + 1];
        let (lo, hi) = (local[0], local[p + 1]);
        let mut knots = local.to_vec();
        let mut coefs = vec![1.0];
        let inserted: Vec<f64> =
            fine.knots.iter().copied().filter(|&k| k > lo && k < hi && !local.contains(&k)).collect();
        for x in inserted {
            insert_knot(&mut knots, &mut coefs, p, x);
        }

        let first_equal = u.iter().position(|&k| k == lo).unwrap_or(0);
        let offset = fine.knots.partition_point(|&k| k < lo) + (i - first_equal);
        let row = coefs.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(j, &c)| (offset + j, c)).collect();
        rows.push(row);
    }
    Ok(TwoScale { rows, n_fine: fine.n_functions() })
}

/// Boehm insertion of `x` into a (possibly partial) knot sequence; missing
/// neighbor coefficients are treated as zero.
fn insert_knot(knots: &mut Vec<f64>, coefs: &mut Vec<f64>, p: usize, x: f64) {
    let n = coefs.len();
    let k = knots.partition_point(|&t| t <= x) - 1;
    let get = |j: isize| -> f64 {
        if j >= 0 && (j as usize) < n {
            coefs[j as usize]
        } else {
            0.0
        }
    };
    let mut out = vec![0.0; n + 1];
    for (j, o) in out.iter_mut().enumerate() {
        let ji = j as isize;
        *o = if ji <= k as isize - p as isize {
            get(ji)
        } else if j > k {
            get(ji - 1)
        } else {
            let alpha = (x - knots[j]) / (knots[j + p] - knots[j]);
            alpha * get(ji) + (1.0 - alpha) * get(ji - 1)
        };
    }
    knots.insert(k + 1, x);
    *coefs = out;
}

/// Identity of a cell of the level-`level` tensor grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub level: usize,
    pub i: usize,
    pub j: usize,
}

impl CellIndex {
    pub fn new(level: usize, i: usize, j: usize) -> Self {
        Self { level, i, j }
    }

    pub fn parent(&self) -> Option<CellIndex> {
        (self.level > 0).then(|| CellIndex::new(self.level - 1, self.i / 2, self.j / 2))
    }

    pub fn children(&self) -> [CellIndex; 4] {
        let (l, i, j) = (self.level + 1, 2 * self.i, 2 * self.j);
        [
            CellIndex::new(l, i, j),
            CellIndex::new(l, i, j + 1),
            CellIndex::new(l, i + 1, j),
            CellIndex::new(l, i + 1, j + 1),
        ]
    }

    /// Ancestor at level `k <= self.level`.
    pub fn ancestor(&self, k: usize) -> CellIndex {
        debug_assert!(k <= self.level);
        let s = self.level - k;
        CellIndex::new(k, self.i >> s, self.j >> s)
    }
}

/// Identity of a tensor-product B-spline of level `level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FunctionIndex {
    pub level: usize,
    pub a: usize,
    pub b: usize,
}

impl FunctionIndex {
    pub fn new(level: usize, a: usize, b: usize) -> Self {
        Self { level, a, b }
    }
}

/// Tensor-product spline space of one level.
#[derive(Clone, Debug)]
pub struct TensorSpace {
    level: usize,
    kv: [KnotVector; 2],
}

impl TensorSpace {
    pub fn new(level: usize, kv_x: KnotVector, kv_y: KnotVector) -> Result<Self> {
        if kv_x.degree != kv_y.degree {
            return Err(Error::Structural("both directions must share the degree".into()));
        }
        Ok(Self { level, kv: [kv_x, kv_y] })
    }

    /// Level-0 space with `nx` by `ny` uniform cells.
    pub fn uniform(degree: usize, nx: usize, ny: usize) -> Self {
        Self { level: 0, kv: [KnotVector::uniform(degree, nx), KnotVector::uniform(degree, ny)] }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn degree(&self) -> usize {
        self.kv[0].degree
    }

    pub fn knots(&self, dir: usize) -> &KnotVector {
        &self.kv[dir]
    }

    pub fn cells_per_dir(&self) -> [usize; 2] {
        [self.kv[0].n_cells(), self.kv[1].n_cells()]
    }

    pub fn functions_per_dir(&self) -> [usize; 2] {
        [self.kv[0].n_functions(), self.kv[1].n_functions()]
    }

    pub fn dyadic_refine(&self) -> Self {
        Self { level: self.level + 1, kv: [self.kv[0].dyadic_refine(), self.kv[1].dyadic_refine()] }
    }

    fn check_cell(&self, cell: &CellIndex) -> Result<()> {
        let [nx, ny] = self.cells_per_dir();
        if cell.level != self.level {
            return Err(Error::Structural(format!("cell of level {} queried on level {}", cell.level, self.level)));
        }
        if cell.i >= nx || cell.j >= ny {
            return Err(Error::Domain(format!("cell ({}, {}) outside {nx}x{ny} grid", cell.i, cell.j)));
        }
        Ok(())
    }

    pub fn functions_on_cell(&self, cell: &CellIndex) -> Result<Vec<FunctionIndex>> {
        self.check_cell(cell)?;
        let (a0, a1) = self.kv[0].cell_functions(cell.i);
        let (b0, b1) = self.kv[1].cell_functions(cell.j);
        Ok((a0..=a1).flat_map(|a| (b0..=b1).map(move |b| FunctionIndex::new(self.level, a, b))).collect())
    }

    pub fn cells_in_support(&self, f: &FunctionIndex) -> Result<Vec<CellIndex>> {
        let [nfx, nfy] = self.functions_per_dir();
        if f.level != self.level {
            return Err(Error::Structural(format!("function of level {} queried on level {}", f.level, self.level)));
        }
        if f.a >= nfx || f.b >= nfy {
            return Err(Error::Domain(format!("function ({}, {}) outside {nfx}x{nfy} basis", f.a, f.b)));
        }
        let (i0, i1) = self.kv[0].support_cells(f.a);
        let (j0, j1) = self.kv[1].support_cells(f.b);
        Ok((i0..=i1).flat_map(|i| (j0..=j1).map(move |j| CellIndex::new(self.level, i, j))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn kv(p: usize, k: &[f64]) -> KnotVector {
        KnotVector::new(p, k.to_vec()).unwrap()
    }

    #[test]
    fn find_span_examples() {
        assert_eq!(kv(1, &[0., 0., 1., 1.]).find_span(0.5).unwrap(), 1);
        assert_eq!(kv(2, &[0., 0., 0., 0.5, 1., 1., 1.]).find_span(1.0).unwrap(), 3);
        let k = kv(2, &[0., 0., 0., 0.25, 0.5, 0.75, 1., 1., 1.]);
        assert_eq!(k.find_span(0.6).unwrap(), 4);
        // linear scan oracle
        for s in 0..=100 {
            let x = s as f64 / 100.0;
            let scan = (0..k.knots.len() - 1).rfind(|&i| k.knots[i] <= x && x < k.knots[i + 1]).unwrap_or(5);
            assert_eq!(k.find_span(x).unwrap(), scan, "x = {x}");
        }
    }

    #[test]
    fn find_span_rejects_outside() {
        let k = kv(1, &[0., 0., 1., 1.]);
        assert!(matches!(k.find_span(-0.1), Err(Error::Domain(_))));
        assert!(matches!(k.find_span(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_knot_vectors_rejected() {
        assert!(KnotVector::new(2, vec![0., 0., 1., 1.]).is_err());
        assert!(KnotVector::new(1, vec![0., 0., 0.5, 0.5, 1., 1.]).is_err());
        assert!(KnotVector::new(1, vec![0., 0., 0.7, 0.5, 1., 1.]).is_err());
        assert!(KnotVector::new(1, vec![0., 0., 0., 1., 1.]).is_err());
    }

    #[test]
    fn eval_basis_examples() {
        let b = kv(1, &[0., 0., 1., 1.]).eval_basis(0.5, 0).unwrap();
        assert_eq!(b.values.iter().map(|v| v[0]).collect::<Vec<_>>(), vec![0.5, 0.5]);

        let q = kv(2, &[0., 0., 0., 0.5, 1., 1., 1.]);
        let b = q.eval_basis(0.0, 0).unwrap();
        assert_eq!(b.first, 0);
        assert_eq!(b.values.iter().map(|v| v[0]).collect::<Vec<_>>(), vec![1.0, 0.0, 0.0]);

        let b = q.eval_basis(0.25, 0).unwrap();
        let vals: Vec<f64> = b.values.iter().map(|v| v[0]).collect();
        for (v, e) in vals.iter().zip([0.25, 0.625, 0.125]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn derivatives_above_degree_are_zero() {
        let b = kv(1, &[0., 0., 0.5, 1., 1.]).eval_basis(0.3, 2).unwrap();
        assert!(b.values.iter().all(|v| v[2] == 0.0));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let k = KnotVector::uniform(3, 5);
        let h = 1e-5;
        for &x in &[0.13, 0.37, 0.51, 0.88] {
            let b = k.eval_basis(x, 2).unwrap();
            let bp = k.eval_basis(x + h, 0).unwrap();
            let bm = k.eval_basis(x - h, 0).unwrap();
            assert_eq!(bp.first, b.first);
            assert_eq!(bm.first, b.first);
            for r in 0..4 {
                let fd1 = (bp.values[r][0] - bm.values[r][0]) / (2.0 * h);
                let fd2 = (bp.values[r][0] - 2.0 * b.values[r][0] + bm.values[r][0]) / (h * h);
                assert_abs_diff_eq!(b.values[r][1], fd1, epsilon = 1e-6);
                assert_abs_diff_eq!(b.values[r][2], fd2, epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn dyadic_refine_examples() {
        assert_eq!(kv(1, &[0., 0., 1., 1.]).dyadic_refine().knots, vec![0., 0., 0.5, 1., 1.]);
        assert_eq!(
            kv(2, &[0., 0., 0., 0.5, 1., 1., 1.]).dyadic_refine().knots,
            vec![0., 0., 0., 0.25, 0.5, 0.75, 1., 1., 1.]
        );
        let twice = kv(1, &[0., 0., 1., 1.]).dyadic_refine().dyadic_refine();
        assert_eq!(twice.n_cells(), 4);
        for c in 0..4 {
            let (a, b) = twice.cell_bounds(c);
            assert_eq!(b - a, 0.25);
        }
    }

    /// Interior row of the two-scale relation, frozen from the pointwise
    /// oracle in `two_scale_rows_reproduce_coarse_functions`.
    #[test]
    fn two_scale_interior_rows() {
        let cases: [(usize, &[f64]); 3] =
            [(1, &[0.5, 1.0, 0.5]), (2, &[0.25, 0.75, 0.75, 0.25]), (3, &[0.125, 0.5, 0.75, 0.5, 0.125])];
        for (p, expect) in cases {
            let coarse = KnotVector::uniform(p, 8);
            let fine = coarse.dyadic_refine();
            let ts = two_scale_matrix(&coarse, &fine).unwrap();
            let row: Vec<f64> = ts.row(p + 2).iter().map(|&(_, c)| c).collect();
            assert_eq!(row, expect, "p = {p}");
            assert!(ts.rows.iter().all(|r| r.len() <= p + 2));
        }
    }

    #[test]
    fn two_scale_rows_reproduce_coarse_functions() {
        for p in 1..=4 {
            let coarse = KnotVector::uniform(p, 3);
            let fine = coarse.dyadic_refine();
            let ts = two_scale_matrix(&coarse, &fine).unwrap();
            for s in 0..100 {
                let x = (s as f64 + 0.5) / 100.0;
                let cb = coarse.eval_basis(x, 0).unwrap();
                let fb = fine.eval_basis(x, 0).unwrap();
                for i in 0..coarse.n_functions() {
                    let cv = if (cb.first..=cb.first + p).contains(&i) { cb.values[i - cb.first][0] } else { 0.0 };
                    let fv: f64 = ts
                        .row(i)
                        .iter()
                        .filter(|(f, _)| (fb.first..=fb.first + p).contains(f))
                        .map(|&(f, c)| c * fb.values[f - fb.first][0])
                        .sum();
                    assert_abs_diff_eq!(cv, fv, epsilon = 1e-13);
                }
                assert!(ts.rows.iter().flatten().all(|&(_, c)| c > 0.0));
            }
        }
    }

    #[test]
    fn two_scale_rejects_non_nested() {
        let a = kv(1, &[0., 0., 0.5, 1., 1.]);
        let b = kv(1, &[0., 0., 0.25, 0.75, 1., 1.]);
        assert!(matches!(two_scale_matrix(&a, &b), Err(Error::Structural(_))));
    }

    #[test]
    fn cell_function_queries() {
        let s = TensorSpace::uniform(2, 4, 4);
        let c = CellIndex::new(0, 1, 2);
        assert_eq!(s.functions_on_cell(&c).unwrap().len(), 9);
        let corner = s.functions_on_cell(&CellIndex::new(0, 0, 0)).unwrap();
        assert_eq!(corner.len(), 9);
        assert!(corner.iter().all(|f| f.a <= 2 && f.b <= 2));

        let interior = FunctionIndex::new(0, 2, 3);
        assert_eq!(s.cells_in_support(&interior).unwrap().len(), 9);
        let edge = FunctionIndex::new(0, 0, 3);
        assert_eq!(s.cells_in_support(&edge).unwrap().len(), 3);

        // brute-force oracle: spans where the function is nonzero
        let k = s.knots(0);
        for a in 0..k.n_functions() {
            let (lo, hi) = k.support_cells(a);
            for c in 0..k.n_cells() {
                let (x0, x1) = k.cell_bounds(c);
                let b = k.eval_basis(0.5 * (x0 + x1), 0).unwrap();
                let nonzero = (b.first..=b.first + 2).contains(&a) && b.values[a - b.first][0] > 0.0;
                assert_eq!(nonzero, (lo..=hi).contains(&c));
            }
        }

        assert!(matches!(s.functions_on_cell(&CellIndex::new(1, 0, 0)), Err(Error::Structural(_))));
    }
}
