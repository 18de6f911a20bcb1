use std::f64::consts::PI;

use nles::init::{random_band_limited, random_solenoidal};
use nles::spectral::{
    dealias_23, derivative, divergence, energy_spectrum, gradient, leray_project, Grid,
    SpectralField, VectorField,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid_for(dim: usize) -> Grid {
    Grid::new(dim, if dim == 2 { 32 } else { 16 }).unwrap()
}

fn random_vector(grid: Grid, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = grid.n() as i64 / 2 - 1;
    let comps = (0..grid.dim())
        .map(|_| random_band_limited(grid, kmax, &mut rng))
        .collect();
    VectorField::new(comps).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn physical_round_trip(seed in any::<u64>(), dim in 2usize..=3) {
        let grid = grid_for(dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_band_limited(grid, grid.n() as i64 / 2 - 1, &mut rng);
        let values = f.to_physical();
        let back = SpectralField::from_physical(grid, &values).unwrap();
        let again = back.to_physical();
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max_diff(&values, &again) <= 1e-13 * scale.max(1.0));
    }

    #[test]
    fn leray_is_idempotent_and_self_adjoint(seed in any::<u64>(), dim in 2usize..=3) {
        let grid = grid_for(dim);
        let u = random_vector(grid, seed);
        let v = random_vector(grid, seed.wrapping_add(1));
        let pu = leray_project(&u);
        let ppu = leray_project(&pu);
        prop_assert!(pu.difference(&ppu).l2_norm() <= 1e-14 * pu.l2_norm());
        let lhs = pu.inner(&v);
        let rhs = u.inner(&leray_project(&v));
        prop_assert!((lhs - rhs).abs() <= 1e-13 * u.l2_norm() * v.l2_norm());
        prop_assert!(divergence(&pu).l2_norm() <= 1e-12 * pu.h1_seminorm());
        prop_assert!(pu.l2_norm() <= u.l2_norm() * (1.0 + 1e-14));
    }

    #[test]
    fn dealias_is_a_contraction(seed in any::<u64>(), dim in 2usize..=3) {
        let grid = grid_for(dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_band_limited(grid, grid.n() as i64 / 2 - 1, &mut rng);
        let d = dealias_23(&f);
        prop_assert!(d.l2_norm() <= f.l2_norm());
        prop_assert_eq!(dealias_23(&d), d.clone());
        for (idx, c) in d.coeffs().iter().enumerate() {
            let k = grid.mode(idx);
            if k.iter().take(dim).any(|kj| 3 * kj.abs() >= grid.n() as i64) {
                prop_assert_eq!(c.norm(), 0.0);
            }
        }
    }

    #[test]
    fn parseval_matches_quadrature(seed in any::<u64>(), dim in 2usize..=3) {
        let grid = grid_for(dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_band_limited(grid, grid.n() as i64 / 2 - 1, &mut rng);
        let g = random_band_limited(grid, 3, &mut rng);
        let (pf, pg) = (f.to_physical(), g.to_physical());
        let quad_norm = (pf.iter().map(|v| v * v).sum::<f64>() / pf.len() as f64).sqrt();
        let quad_inner = pf.iter().zip(&pg).map(|(a, b)| a * b).sum::<f64>() / pf.len() as f64;
        prop_assert!((f.l2_norm() - quad_norm).abs() <= 1e-13 * quad_norm);
        prop_assert!((f.inner(&g) - quad_inner).abs() <= 1e-13 * f.l2_norm() * g.l2_norm());
    }

    #[test]
    fn spectrum_shells_sum_to_energy(seed in any::<u64>(), dim in 2usize..=3) {
        let grid = grid_for(dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_solenoidal(grid, 3.0, 0.8, &mut rng);
        let total: f64 = energy_spectrum(&v).iter().map(|(_, e)| e).sum();
        prop_assert!((total - 0.5 * v.l2_norm().powi(2)).abs() <= 1e-14);
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let grid = Grid::new(2, 64).unwrap();
    let f = SpectralField::from_fn(grid, |x| {
        (2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).cos() + 0.3 * (6.0 * PI * (x[0] + x[1])).sin()
    });
    let values = f.to_physical();
    let n = grid.n();
    let h = grid.dx();
    let at = |i: usize, j: usize| values[(i % n) * n + (j % n)];
    let grad = gradient(&f);
    let gx = grad.component(0).to_physical();
    let gy = grad.component(1).to_physical();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            // fourth-order central differences
            let dx = (-at(i + 2, j) + 8.0 * at(i + 1, j) - 8.0 * at(i + n - 1, j) + at(i + n - 2, j))
                / (12.0 * h);
            let dy = (-at(i, j + 2) + 8.0 * at(i, j + 1) - 8.0 * at(i, j + n - 1) + at(i, j + n - 2))
                / (12.0 * h);
            worst = worst.max((dx - gx[i * n + j]).abs()).max((dy - gy[i * n + j]).abs());
        }
    }
    // leading FD error is (2π·3)^5 h^4 / 30 for the highest mode
    let bound = (6.0 * PI).powi(5) * h.powi(4) / 30.0 * 2.0;
    assert!(worst < bound, "worst = {worst:e}, bound = {bound:e}");
}

#[test]
fn derivative_of_single_mode_is_exact() {
    for dim in [2, 3] {
        let grid = grid_for(dim);
        let f = SpectralField::from_fn(grid, |x| (2.0 * PI * 3.0 * x[dim - 1]).sin());
        let d = derivative(&f, dim - 1).to_physical();
        let exact = SpectralField::from_fn(grid, |x| 6.0 * PI * (6.0 * PI * x[dim - 1]).cos()).to_physical();
        assert!(max_diff(&d, &exact) < 1e-12);
        let other = derivative(&f, 0).l2_norm();
        assert!(other < 1e-14);
    }
}

#[test]
fn normalization_conventions() {
    let grid = Grid::new(2, 16).unwrap();
    let c = SpectralField::from_fn(grid, |_| 2.5);
    assert!((c.coeff([0, 0, 0]).re - 2.5).abs() < 1e-15);
    let s = SpectralField::from_fn(grid, |x| (2.0 * PI * x[1]).sin());
    assert!((s.coeff([0, 1, 0]).norm() - 0.5).abs() < 1e-15);
    assert!((s.coeff([0, -1, 0]).norm() - 0.5).abs() < 1e-15);
    assert!((s.l2_norm() - 0.5f64.sqrt()).abs() < 1e-15);
}
