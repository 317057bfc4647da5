use crate::error::{Error, Result};
use crate::spline::{two_scale_matrix, CellIndex, TensorSpace, TwoScale};
use serde::Serialize;
use std::io::Write;
use std::sync::Arc;

/// Dense per-level grid, row-major in `(i, j)`.
#[derive(Clone, Debug)]
pub(crate) struct LevelGrid<T> {
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<T>,
}

impl<T: Clone> LevelGrid<T> {
    pub fn new(nx: usize, ny: usize, fill: T) -> Self {
        Self { nx, ny, data: vec![fill; nx * ny] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.ny + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.ny + j] = v;
    }
}

/// Immutable per-level data shared by every generation of a hierarchy.
#[derive(Debug)]
pub struct Levels {
    spaces: Vec<TensorSpace>,
    /// `two_scale[k][dir]` relates level `k` to level `k + 1`.
    two_scale: Vec<[TwoScale; 2]>,
}

impl Levels {
    pub fn new(base: TensorSpace, max_levels: usize) -> Result<Self> {
        if max_levels < 1 {
            return Err(Error::Precondition("max_levels must be at least 1".into()));
        }
        if base.level() != 0 {
            return Err(Error::Structural("base space must be level 0".into()));
        }
        let mut spaces = vec![base];
        let mut two_scale = Vec::new();
        for _ in 1..max_levels {
            let coarse = spaces.last().unwrap();
            let fine = coarse.dyadic_refine();
            two_scale.push([
                two_scale_matrix(coarse.knots(0), fine.knots(0))?,
                two_scale_matrix(coarse.knots(1), fine.knots(1))?,
            ]);
            spaces.push(fine);
        }
        Ok(Self { spaces, two_scale })
    }

    pub fn n_levels(&self) -> usize {
        self.spaces.len()
    }

    pub fn space(&self, level: usize) -> &TensorSpace {
        &self.spaces[level]
    }

    pub fn two_scale(&self, level: usize, dir: usize) -> &TwoScale {
        &self.two_scale[level][dir]
    }

    pub fn degree(&self) -> usize {
        self.spaces[0].degree()
    }
}

/// State of a cell of the full tensor grid of its level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellState {
    /// Not part of the level's domain (covered by a coarser active cell).
    Outside,
    Active,
    /// Subdivided: its children belong to the next level's domain.
    Refined,
}

/// Active cells of every level of a dyadic hierarchy.
#[derive(Clone, Debug)]
pub struct HierarchicalMesh {
    levels: Arc<Levels>,
    state: Vec<LevelGrid<CellState>>,
    n_active: Vec<usize>,
}

#[derive(Serialize)]
struct CellRecord {
    level: usize,
    i: usize,
    j: usize,
}

impl HierarchicalMesh {
    pub(crate) fn new(levels: Arc<Levels>) -> Self {
        let state: Vec<_> = (0..levels.n_levels())
            .map(|l| {
                let [nx, ny] = levels.space(l).cells_per_dir();
                let fill = if l == 0 { CellState::Active } else { CellState::Outside };
                LevelGrid::new(nx, ny, fill)
            })
            .collect();
        let mut n_active = vec![0; levels.n_levels()];
        n_active[0] = state[0].data.len();
        Self { levels, state, n_active }
    }

    pub fn levels(&self) -> &Arc<Levels> {
        &self.levels
    }

    pub fn max_levels(&self) -> usize {
        self.levels.n_levels()
    }

    pub fn degree(&self) -> usize {
        self.levels.degree()
    }

    pub fn cells_per_dir(&self, level: usize) -> [usize; 2] {
        [self.state[level].nx, self.state[level].ny]
    }

    pub fn contains(&self, c: &CellIndex) -> bool {
        c.level < self.state.len() && c.i < self.state[c.level].nx && c.j < self.state[c.level].ny
    }

    pub fn state(&self, c: &CellIndex) -> CellState {
        *self.state[c.level].get(c.i, c.j)
    }

    pub fn is_active(&self, c: &CellIndex) -> bool {
        self.contains(c) && self.state(c) == CellState::Active
    }

    /// Whether the cell lies in the level's domain (active or subdivided).
    pub fn in_domain(&self, c: &CellIndex) -> bool {
        self.state(c) != CellState::Outside
    }

    pub fn n_active(&self) -> usize {
        self.n_active.iter().sum()
    }

    /// Active cell counts per level `0..max_levels`.
    pub fn active_per_level(&self) -> &[usize] {
        &self.n_active
    }

    /// Deepest level holding active cells.
    pub fn max_active_level(&self) -> usize {
        self.n_active.iter().rposition(|&n| n > 0).unwrap_or(0)
    }

    /// Active cells in `(level, i, j)` order.
    pub fn active_cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        self.state.iter().enumerate().flat_map(|(l, g)| {
            g.data
                .iter()
                .enumerate()
                .filter(|(_, s)| **s == CellState::Active)
                .map(move |(k, _)| CellIndex::new(l, k / g.ny, k % g.ny))
        })
    }

    /// Active cells of one level in `(i, j)` order.
    pub fn active_cells_of_level(&self, level: usize) -> impl Iterator<Item = CellIndex> + '_ {
        let g = &self.state[level];
        g.data
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == CellState::Active)
            .map(move |(k, _)| CellIndex::new(level, k / g.ny, k % g.ny))
    }

    /// Parametric bounds `([x0, x1], [y0, y1])` of a cell.
    pub fn cell_bounds(&self, c: &CellIndex) -> ([f64; 2], [f64; 2]) {
        let s = self.levels.space(c.level);
        let (x0, x1) = s.knots(0).cell_bounds(c.i);
        let (y0, y1) = s.knots(1).cell_bounds(c.j);
        ([x0, x1], [y0, y1])
    }

    /// Cell of `level` containing the parametric point (closed at the upper end).
    pub fn cell_at_level(&self, level: usize, x: [f64; 2]) -> Result<CellIndex> {
        let s = self.levels.space(level);
        let p = s.degree();
        let i = s.knots(0).find_span(x[0])? - p;
        let j = s.knots(1).find_span(x[1])? - p;
        Ok(CellIndex::new(level, i, j))
    }

    /// Active cell containing a parametric point.
    pub fn locate(&self, x: [f64; 2]) -> Result<CellIndex> {
        let mut c = self.cell_at_level(0, x)?;
        while self.state(&c) == CellState::Refined {
            c = self.cell_at_level(c.level + 1, x)?;
        }
        Ok(c)
    }

    pub(crate) fn subdivide(&mut self, c: &CellIndex) -> Result<()> {
        if !self.is_active(c) {
            return Err(Error::Precondition(format!("cannot subdivide inactive cell {c:?}")));
        }
        if c.level + 1 >= self.max_levels() {
            return Err(Error::Capacity(format!("cell {c:?} is at the deepest level")));
        }
        self.state[c.level].set(c.i, c.j, CellState::Refined);
        self.n_active[c.level] -= 1;
        for ch in c.children() {
            self.state[ch.level].set(ch.i, ch.j, CellState::Active);
        }
        self.n_active[c.level + 1] += 4;
        Ok(())
    }

    pub(crate) fn reactivate(&mut self, c: &CellIndex) -> Result<()> {
        if !self.contains(c) || self.state(c) != CellState::Refined || c.level + 1 >= self.max_levels() {
            return Err(Error::Precondition(format!("cell {c:?} is not a subdivided cell")));
        }
        if let Some(ch) = c.children().iter().find(|ch| !self.is_active(ch)) {
            return Err(Error::Precondition(format!("child {ch:?} of {c:?} is not active")));
        }
        for ch in c.children() {
            self.state[ch.level].set(ch.i, ch.j, CellState::Outside);
        }
        self.n_active[c.level + 1] -= 4;
        self.state[c.level].set(c.i, c.j, CellState::Active);
        self.n_active[c.level] += 1;
        Ok(())
    }

    /// Writes one JSON object per active cell, in `(level, i, j)` order.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for c in self.active_cells() {
            serde_json::to_writer(&mut w, &CellRecord { level: c.level, i: c.i, j: c.j })?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}
