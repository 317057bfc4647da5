mod common;

use common::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thbheat::adaptivity::transfer_refine;
use thbheat::assembly::{
    assemble, assemble_matrices, assemble_rhs, sample_field, Geometry, HeatSource, QuadratureCache, ScanPath,
};
use thbheat::hierarchy::HierarchicalSpace;
use thbheat::solver::StateVector;
use thbheat::spline::TensorSpace;
use thbheat::Error;

fn wide_source(power: f64) -> HeatSource {
    let path =
        ScanPath::CircularArc { center: [0.5, 0.5], radius: 0.1, start_angle: 0.0, angular_speed: 1.0, sweep: 1.0 };
    HeatSource { power, absorptivity: 1.0, radius: 1e8, path }
}

/// Coefficients of the physical coordinate `x` (Greville interpolation).
fn linear_x(s: &HierarchicalSpace, side: f64) -> StateVector {
    let c = s.dof_map().functions().iter().map(|f| side * greville(s.levels().space(f.level).knots(0), f.a)).collect();
    StateVector::new(s, c, 0.0)
}

#[test]
fn mass_and_load_totals() {
    for seed in 0..6 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rng.random_range(1..=3);
        let s = random_space(&mut rng, p, 2, 5, 5);
        let side = 2.5;
        let mat = material(0.7, 3.0);
        let sys = assemble(&s, Geometry::new(side).unwrap(), &mat, &wide_source(4.0), 0.5, p + 1).unwrap();
        let ones = vec![1.0; s.n_dofs()];
        let area = side * side;
        assert!((sys.mass.bilinear(&ones, &ones) - 3.0 * area).abs() < 1e-12 * area * 3.0);
        assert!(sys.stiffness.matvec(&ones).iter().all(|v| v.abs() < 1e-11));
        assert!((sys.load.iter().sum::<f64>() - 4.0 * area).abs() < 1e-9 * area);
        let g = assemble_rhs(&sys.quadrature, |_| -2.0);
        assert!((g.iter().sum::<f64>() + 2.0 * area).abs() < 1e-12 * area);
        assert!(sys.mass.asymmetry() < 1e-12 && sys.stiffness.asymmetry() < 1e-12);
    }
}

#[test]
fn bilinear_element_stiffness() {
    let s = HierarchicalSpace::build_initial(TensorSpace::uniform(1, 1, 1), 1).unwrap();
    let cache = QuadratureCache::new(&s, Geometry::new(1.0).unwrap(), 2).unwrap();
    let (m, k) = assemble_matrices(&cache, &material(1.0, 1.0));
    // dofs ordered (a, b) with b fastest: (0,0), (0,1), (1,0), (1,1)
    let want_k = [[4.0, -1.0, -1.0, -2.0], [-1.0, 4.0, -2.0, -1.0], [-1.0, -2.0, 4.0, -1.0], [-2.0, -1.0, -1.0, 4.0]];
    let want_m = [[4.0, 2.0, 2.0, 1.0], [2.0, 4.0, 1.0, 2.0], [2.0, 1.0, 4.0, 2.0], [1.0, 2.0, 2.0, 4.0]];
    for r in 0..4 {
        for c in 0..4 {
            assert!((k.get(r, c) - want_k[r][c] / 6.0).abs() < 1e-14);
            assert!((m.get(r, c) - want_m[r][c] / 36.0).abs() < 1e-14);
        }
    }
}

#[test]
fn mass_matrix_is_positive_definite() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(20 + seed);
        let p = rng.random_range(2..=3);
        let s = random_space(&mut rng, p, 2, 6, 8);
        let cache = QuadratureCache::new(&s, Geometry::new(10.0).unwrap(), p + 1).unwrap();
        let (m, _) = assemble_matrices(&cache, &material(1.0, 1.0));
        let n = m.n();
        let dense = DMatrix::from_row_slice(n, n, &m.to_dense());
        assert!(dense.cholesky().is_some(), "seed {seed}");
    }
}

#[test]
fn too_few_gauss_points_rejected() {
    let s = HierarchicalSpace::build_initial(TensorSpace::uniform(3, 2, 2), 2).unwrap();
    assert!(matches!(QuadratureCache::new(&s, Geometry::new(1.0).unwrap(), 3), Err(Error::Precondition(_))));
}

#[test]
fn stale_state_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = random_space(&mut rng, 2, 2, 4, 2);
    let mut t = s.clone();
    random_refine(&mut rng, &mut t, 2);
    let theta = StateVector::constant(&s, 1.0, 0.0);
    assert!(matches!(sample_field(&t, &theta, Geometry::new(1.0).unwrap(), 4), Err(Error::Stale { .. })));
    let sys = assemble(&t, Geometry::new(1.0).unwrap(), &material(1.0, 1.0), &wide_source(1.0), 0.0, 3).unwrap();
    assert!(sys.check(&theta).is_err());
}

#[test]
fn sampling_reproduces_constant_and_linear_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = random_space(&mut rng, 3, 2, 5, 5);
    let geom = Geometry::new(10.0).unwrap();
    let c = sample_field(&s, &StateVector::constant(&s, 21.5, 0.0), geom, 17).unwrap();
    assert!(c.values.iter().all(|v| (v - 21.5).abs() < 1e-12));
    let lin = sample_field(&s, &linear_x(&s, 10.0), geom, 17).unwrap();
    for (k, v) in lin.values.iter().enumerate() {
        assert!((v - lin.point(k)[0]).abs() < 1e-12);
    }
}

#[test]
fn sampling_invariant_under_transfer() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = random_space(&mut rng, 2, 2, 5, 3);
    let mut t = s.clone();
    random_refine(&mut rng, &mut t, 2);
    let c = (0..s.n_dofs()).map(|_| rng.random::<f64>()).collect();
    let theta = StateVector::new(&s, c, 0.0);
    let moved = transfer_refine(&s, &t, &theta).unwrap();
    let geom = Geometry::new(1.0).unwrap();
    let a = sample_field(&s, &theta, geom, 21).unwrap();
    let b = sample_field(&t, &moved, geom, 21).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn stiffness_energy_is_nested() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let s = random_space(&mut rng, 3, 2, 5, 3);
    let mut t = s.clone();
    random_refine(&mut rng, &mut t, 2);
    random_refine(&mut rng, &mut t, 2);
    let c = (0..s.n_dofs()).map(|_| rng.random::<f64>()).collect();
    let theta = StateVector::new(&s, c, 0.0);
    let moved = transfer_refine(&s, &t, &theta).unwrap();
    let geom = Geometry::new(1.0).unwrap();
    let mat = material(1.0, 1.0);
    let ks = assemble_matrices(&QuadratureCache::new(&s, geom, 4).unwrap(), &mat).1;
    let kt = assemble_matrices(&QuadratureCache::new(&t, geom, 4).unwrap(), &mat).1;
    let a = ks.bilinear(&theta.coeffs, &theta.coeffs);
    let b = kt.bilinear(&moved.coeffs, &moved.coeffs);
    assert!((a - b).abs() <= 1e-11 * a);
}

#[test]
fn vtk_and_csv_output() {
    let s = HierarchicalSpace::build_initial(TensorSpace::uniform(2, 2, 2), 2).unwrap();
    let field = sample_field(&s, &StateVector::constant(&s, 3.0, 0.0), Geometry::new(2.0).unwrap(), 3).unwrap();
    let mut vtk = Vec::new();
    field.write_vtk(&mut vtk).unwrap();
    let vtk = String::from_utf8(vtk).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version"));
    assert!(vtk.contains("DATASET STRUCTURED_POINTS"));
    assert!(vtk.contains("DIMENSIONS 3 3 1"));
    assert!(vtk.contains("SCALARS temperature"));
    let mut csv = Vec::new();
    field.write_csv(&mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "x,y,value");
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[2], "1,0,3");
}
