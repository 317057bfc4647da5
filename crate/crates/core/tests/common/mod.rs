//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;
use std::collections::{BTreeSet, HashMap};
use thbheat::adaptivity::{coarsen, refine, MarkKind, MarkedSet};
use thbheat::hierarchy::{HierarchicalSpace, Levels};
use thbheat::spline::{CellIndex, FunctionIndex, KnotVector, TensorSpace};

/// Parametric bounds of a cell from the knot vectors of its level.
pub fn bounds(levels: &Levels, c: &CellIndex) -> ([f64; 2], [f64; 2]) {
    let s = levels.space(c.level);
    let (x0, x1) = s.knots(0).cell_bounds(c.i);
    let (y0, y1) = s.knots(1).cell_bounds(c.j);
    ([x0, x1], [y0, y1])
}

/// Support interval `[t_a, t_{a+p+1}]` of a univariate B-spline.
pub fn support_interval(kv: &KnotVector, a: usize) -> [f64; 2] {
    let t = kv.knots();
    [t[a], t[a + kv.degree() + 1]]
}

fn overlaps(a: [f64; 2], b: [f64; 2]) -> bool {
    a[0].max(b[0]) < a[1].min(b[1])
}

fn inside(inner: [f64; 2], outer: [f64; 2]) -> bool {
    outer[0] <= inner[0] && inner[1] <= outer[1]
}

/// Level-`l` cells on which the function is not identically zero.
pub fn support_cells(levels: &Levels, f: &FunctionIndex) -> Vec<CellIndex> {
    let s = levels.space(f.level);
    let sx = support_interval(s.knots(0), f.a);
    let sy = support_interval(s.knots(1), f.b);
    let [nx, ny] = s.cells_per_dir();
    let mut out = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let c = CellIndex::new(f.level, i, j);
            let (bx, by) = bounds(levels, &c);
            if overlaps(bx, sx) && overlaps(by, sy) {
                out.push(c);
            }
        }
    }
    out
}

/// Whether the region of cell `c` lies in `Omega^k`, i.e. is covered by
/// level-`k` cells that are in the domain of that level.
pub fn cell_in_omega(space: &HierarchicalSpace, c: &CellIndex, k: usize) -> bool {
    if k == 0 {
        return true;
    }
    if k >= space.mesh().max_levels() {
        return false;
    }
    if c.level >= k {
        return space.mesh().in_domain(&c.ancestor(k));
    }
    c.children().iter().all(|ch| cell_in_omega(space, ch, k))
}

/// Active functions from the definition: support in `Omega^l`, not in `Omega^{l+1}`.
pub fn hb_oracle(space: &HierarchicalSpace) -> BTreeSet<FunctionIndex> {
    let levels = space.levels();
    let mut out = BTreeSet::new();
    for l in 0..levels.n_levels() {
        let [na, nb] = levels.space(l).functions_per_dir();
        for a in 0..na {
            for b in 0..nb {
                let f = FunctionIndex::new(l, a, b);
                let cells = support_cells(levels, &f);
                if cells.iter().all(|c| cell_in_omega(space, c, l))
                    && !cells.iter().all(|c| cell_in_omega(space, c, l + 1))
                {
                    out.insert(f);
                }
            }
        }
    }
    out
}

/// Dense coefficients over the tensor B-splines of `level`, indexed `a * nb + b`.
pub type Expansion = Vec<f64>;

/// Prolongs a level-`k` expansion to level `k + 1`.
pub fn prolong(levels: &Levels, k: usize, coarse: &Expansion) -> Expansion {
    let [_, nb] = levels.space(k).functions_per_dir();
    let [fa_n, fb_n] = levels.space(k + 1).functions_per_dir();
    let sx = levels.two_scale(k, 0);
    let sy = levels.two_scale(k, 1);
    let mut fine = vec![0.0; fa_n * fb_n];
    for (idx, &c) in coarse.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let (a, b) = (idx / nb, idx % nb);
        for &(fa, wx) in sx.row(a) {
            for &(fb, wy) in sy.row(b) {
                fine[fa * fb_n + fb] += c * wx * wy;
            }
        }
    }
    fine
}

/// Per level, the functions whose support lies in `Omega^k`.
pub fn covered_functions(space: &HierarchicalSpace) -> Vec<BTreeSet<FunctionIndex>> {
    let levels = space.levels();
    (0..levels.n_levels())
        .map(|k| {
            let [na, nb] = levels.space(k).functions_per_dir();
            (0..na)
                .flat_map(|a| (0..nb).map(move |b| FunctionIndex::new(k, a, b)))
                .filter(|f| support_cells(levels, f).iter().all(|c| cell_in_omega(space, c, k)))
                .collect()
        })
        .collect()
}

/// Expansion of a single function in the B-splines of `target`, optionally
/// truncated at every intermediate level (global definition of truncation).
pub fn expand(
    space: &HierarchicalSpace,
    covered: Option<&[BTreeSet<FunctionIndex>]>,
    f: &FunctionIndex,
    target: usize,
) -> Expansion {
    let levels = space.levels();
    let [na, nb] = levels.space(f.level).functions_per_dir();
    let mut e = vec![0.0; na * nb];
    e[f.a * nb + f.b] = 1.0;
    for k in f.level..target {
        e = prolong(levels, k, &e);
        if let Some(covered) = covered {
            let [_, fb_n] = levels.space(k + 1).functions_per_dir();
            for g in &covered[k + 1] {
                e[g.a * fb_n + g.b] = 0.0;
            }
        }
    }
    e
}

/// Evaluates an expansion over the tensor B-splines of `level` at `x`.
pub fn eval_expansion(levels: &Levels, level: usize, e: &Expansion, x: [f64; 2]) -> f64 {
    let s = levels.space(level);
    let [_, nb] = s.functions_per_dir();
    let bx = s.knots(0).eval_basis(x[0], 0).unwrap();
    let by = s.knots(1).eval_basis(x[1], 0).unwrap();
    let mut v = 0.0;
    for (u, vx) in bx.values.iter().enumerate() {
        for (w, vy) in by.values.iter().enumerate() {
            v += e[(bx.first + u) * nb + by.first + w] * vx[0] * vy[0];
        }
    }
    v
}

/// Truncated expansions of every active function at the finest level.
pub fn thb_expansions(space: &HierarchicalSpace) -> (usize, HashMap<FunctionIndex, Expansion>) {
    let finest = space.mesh().max_levels() - 1;
    let covered = covered_functions(space);
    let map = space.dof_map().functions().iter().map(|f| (*f, expand(space, Some(&covered), f, finest))).collect();
    (finest, map)
}

/// Random mesh reached through the public refinement and coarsening calls.
pub fn random_space<R: Rng>(rng: &mut R, p: usize, m: usize, max_levels: usize, rounds: usize) -> HierarchicalSpace {
    let base_cells = rng.random_range(1..=2);
    let mut space =
        HierarchicalSpace::build_initial(TensorSpace::uniform(p, base_cells, base_cells), max_levels).unwrap();
    for _ in 0..rounds {
        random_refine(rng, &mut space, m);
        if rng.random_bool(0.3) {
            random_coarsen(rng, &mut space, m);
        }
    }
    space
}

pub fn random_refine<R: Rng>(rng: &mut R, space: &mut HierarchicalSpace, m: usize) {
    let active: Vec<CellIndex> = space.mesh().active_cells().collect();
    let k = rng.random_range(1..=2.min(active.len()));
    let cells: BTreeSet<CellIndex> = active.choose_multiple(rng, k).copied().collect();
    refine(space, &MarkedSet::new(cells, MarkKind::Refine, 1.0), m).unwrap();
}

pub fn random_coarsen<R: Rng>(rng: &mut R, space: &mut HierarchicalSpace, m: usize) {
    let cells: BTreeSet<CellIndex> = space.mesh().active_cells().filter(|_| rng.random_bool(0.7)).collect();
    coarsen(space, &MarkedSet::new(cells, MarkKind::Coarsen, 1.0), m).unwrap();
}

/// Uniformly random parametric point.
pub fn random_point<R: Rng>(rng: &mut R) -> [f64; 2] {
    [rng.random::<f64>(), rng.random::<f64>()]
}

use std::f64::consts::PI;
use thbheat::adaptivity::{project_l2, FnField};
use thbheat::assembly::{assemble_matrices, assemble_rhs, Geometry, Material, QuadratureCache};
use thbheat::solver::{backward_euler_solve, linear_solve, SolverOptions};

pub fn material(k: f64, cp_rho: f64) -> Material {
    Material { conductivity: k, specific_heat: cp_rho, density: 1.0, theta0: 1.0 }
}

/// `cos(pi x) cos(pi y)`: zero normal flux on the unit square, zero mean.
pub fn cos_mode(x: [f64; 2]) -> f64 {
    (PI * x[0]).cos() * (PI * x[1]).cos()
}

/// L2 distance between a discrete field and `exact` (physical coordinates).
pub fn l2_error(cache: &QuadratureCache, coeffs: &[f64], exact: impl Fn([f64; 2]) -> f64) -> f64 {
    cache
        .cells()
        .iter()
        .map(|c| {
            (0..c.n_points()).map(|q| c.weights[q] * (c.field(coeffs, q).0 - exact(c.points[q])).powi(2)).sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// Backward Euler for `u_t - lap u = f` with exact solution `exp(-t) cos(pi x) cos(pi y)`
/// on a uniform `n x n` mesh; returns the L2 error at `t_end`.
pub fn transient_error(p: usize, n: usize, dt: f64, t_end: f64) -> f64 {
    let space = HierarchicalSpace::uniform(TensorSpace::uniform(p, n, n), 0).unwrap();
    let geom = Geometry::new(1.0).unwrap();
    let cache = QuadratureCache::new(&space, geom, p + 1).unwrap();
    let (m, k) = assemble_matrices(&cache, &material(1.0, 1.0));
    let mut theta = project_l2(&space, &FnField(cos_mode), 0.0).unwrap().theta.coeffs;
    let steps = (t_end / dt).round() as usize;
    let opts = SolverOptions { rel_tol: 1e-13, max_iter: 10_000 };
    for s in 1..=steps {
        let t = s as f64 * dt;
        let f = assemble_rhs(&cache, |x| (2.0 * PI * PI - 1.0) * (-t).exp() * cos_mode(x));
        let (delta, _) = backward_euler_solve(&m, &k, &f, &theta, dt, opts).unwrap();
        theta.iter_mut().zip(&delta).for_each(|(a, d)| *a += d);
    }
    let fine = QuadratureCache::new(&space, geom, p + 3).unwrap();
    l2_error(&fine, &theta, |x| (-t_end).exp() * cos_mode(x))
}

/// Steady `-lap u = f` with pure Neumann data and exact solution `cos(pi x) cos(pi y)`
/// on a uniform `n x n` mesh; returns the L2 error of the zero-mean discrete solution.
pub fn steady_error(p: usize, n: usize) -> f64 {
    let space = HierarchicalSpace::uniform(TensorSpace::uniform(p, n, n), 0).unwrap();
    let geom = Geometry::new(1.0).unwrap();
    let cache = QuadratureCache::new(&space, geom, p + 1).unwrap();
    let (m, k) = assemble_matrices(&cache, &material(1.0, 1.0));
    let mut f = assemble_rhs(&cache, |x| 2.0 * PI * PI * cos_mode(x));
    // remove the quadrature-induced constant component so the singular system is consistent
    let ones = vec![1.0; f.len()];
    let m1 = m.matvec(&ones);
    let area: f64 = m1.iter().sum();
    let mean_f = f.iter().sum::<f64>() / area;
    f.iter_mut().zip(&m1).for_each(|(a, b)| *a -= mean_f * b);
    let (mut u, _) = linear_solve(&k, &f, None, SolverOptions { rel_tol: 1e-13, max_iter: 50_000 }).unwrap();
    let mean_u = m.bilinear(&ones, &u) / area;
    u.iter_mut().for_each(|a| *a -= mean_u);
    let fine = QuadratureCache::new(&space, geom, p + 3).unwrap();
    l2_error(&fine, &u, cos_mode)
}

/// Greville abscissa of a univariate B-spline.
pub fn greville(kv: &KnotVector, a: usize) -> f64 {
    let p = kv.degree();
    kv.knots()[a + 1..=a + p].iter().sum::<f64>() / p as f64
}
