use crate::error::{Error, Result};
use crate::solver::Estimate;
use crate::spline::CellIndex;
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkKind {
    Refine,
    Coarsen,
}

/// Cells selected by a Dörfler criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkedSet {
    pub cells: BTreeSet<CellIndex>,
    pub kind: MarkKind,
    pub alpha: f64,
}

impl MarkedSet {
    pub fn new(cells: BTreeSet<CellIndex>, kind: MarkKind, alpha: f64) -> Self {
        Self { cells, kind, alpha }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: &CellIndex) -> bool {
        self.cells.contains(c)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("marking parameter must lie in (0, 1], got {alpha}")))
    }
}

/// Indicators sorted by value (descending when `largest_first`), ties by cell.
fn sorted(est: &Estimate, largest_first: bool) -> Vec<(CellIndex, f64)> {
    let mut v: Vec<(CellIndex, f64)> = est.per_cell.iter().map(|(c, e)| (*c, *e)).collect();
    v.sort_by(|a, b| {
        let by_value = if largest_first { b.1.total_cmp(&a.1) } else { a.1.total_cmp(&b.1) };
        by_value.then(a.0.cmp(&b.0))
    });
    v
}

/// Smallest greedy set of largest indicators with `eps(M)^2 >= alpha^2 eps^2`.
pub fn mark_max(est: &Estimate, alpha: f64) -> Result<MarkedSet> {
    check_alpha(alpha)?;
    let order = sorted(est, true);
    if alpha == 1.0 {
        // in exact arithmetic only the full positive set reaches the total
        let cells = order.into_iter().filter(|(_, e)| *e > 0.0).map(|(c, _)| c).collect();
        return Ok(MarkedSet::new(cells, MarkKind::Refine, alpha));
    }
    let total: f64 = order.iter().map(|(_, e)| e * e).sum();
    let threshold = alpha * alpha * total;
    let mut acc = 0.0;
    let mut cells = BTreeSet::new();
    for (c, e) in order {
        if acc >= threshold {
            break;
        }
        acc += e * e;
        cells.insert(c);
    }
    Ok(MarkedSet::new(cells, MarkKind::Refine, alpha))
}

/// Largest greedy set of smallest indicators with `eps(M)^2 <= alpha^2 eps^2`.
pub fn mark_min(est: &Estimate, alpha: f64) -> Result<MarkedSet> {
    check_alpha(alpha)?;
    let order = sorted(est, false);
    let total: f64 = order.iter().map(|(_, e)| e * e).sum();
    let threshold = alpha * alpha * total;
    let mut acc = 0.0;
    let mut cells = BTreeSet::new();
    for (c, e) in order {
        if acc + e * e > threshold {
            break;
        }
        acc += e * e;
        cells.insert(c);
    }
    Ok(MarkedSet::new(cells, MarkKind::Coarsen, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn est(values: &[f64]) -> Estimate {
        let per_cell: BTreeMap<_, _> = values.iter().enumerate().map(|(k, v)| (CellIndex::new(0, k, 0), *v)).collect();
        Estimate::from_cells(per_cell, 0)
    }

    fn ids(m: &MarkedSet) -> Vec<usize> {
        m.cells.iter().map(|c| c.i).collect()
    }

    #[test]
    fn mark_max_takes_the_largest() {
        let m = mark_max(&est(&[1.0, 3.0, 2.0]), 0.5).unwrap();
        assert_eq!(ids(&m), vec![1]);
        assert_eq!(m.kind, MarkKind::Refine);
    }

    #[test]
    fn mark_max_full_fraction_marks_all_positive() {
        let m = mark_max(&est(&[1.0, 0.0, 2.0, 1e-100]), 1.0).unwrap();
        assert_eq!(ids(&m), vec![0, 2, 3]);
    }

    #[test]
    fn mark_max_equal_indicators() {
        for n in 1..40 {
            let m = mark_max(&est(&vec![0.5; n]), 0.5).unwrap();
            assert_eq!(m.len(), (n as f64 * 0.25).ceil() as usize, "n = {n}");
        }
    }

    #[test]
    fn mark_max_breaks_ties_by_cell() {
        let m = mark_max(&est(&[2.0, 2.0, 2.0, 2.0]), 0.5).unwrap();
        assert_eq!(ids(&m), vec![0]);
    }

    #[test]
    fn mark_min_examples() {
        assert!(mark_min(&est(&[3.0, 2.0, 1.0]), 0.25).unwrap().is_empty());
        assert_eq!(ids(&mark_min(&est(&[3.0, 2.0, 0.5]), 0.25).unwrap()), vec![2]);
        assert_eq!(mark_min(&est(&[3.0, 2.0, 0.5]), 1.0).unwrap().len(), 3);
    }

    #[test]
    fn empty_estimate_marks_nothing() {
        assert!(mark_max(&est(&[]), 0.3).unwrap().is_empty());
        assert!(mark_min(&est(&[]), 0.3).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(mark_max(&est(&[1.0]), 0.0).is_err());
        assert!(mark_min(&est(&[1.0]), 1.5).is_err());
    }
}
