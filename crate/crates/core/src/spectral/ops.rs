use num_complex::Complex64;

use super::{Grid, SpectralField, VectorField};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn to_physical(f: &SpectralField) -> Vec<f64> {
    f.to_physical()
}

pub fn to_spectral(values: &[f64], grid: Grid) -> Result<SpectralField> {
    SpectralField::from_physical(grid, values)
}

/// Partial derivative `∂f/∂x_axis`, i.e. multiplication by `iκ_axis`.
pub fn derivative(f: &SpectralField, axis: usize) -> SpectralField {
    let grid = f.grid();
    let mut out = f.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        let k = grid.mode(idx);
        *c = if grid.is_nyquist(k) {
            Complex64::new(0.0, 0.0)
        } else {
            *c * I * grid.wavevector(k)[axis]
        };
    }
    out
}

/// Spectral gradient. The result is a vector of derivatives, not a velocity,
/// so it carries no divergence-free flag.
pub fn gradient(f: &SpectralField) -> VectorField {
    let grid = f.grid();
    let comps = (0..grid.dim()).map(|j| derivative(f, j)).collect();
    VectorField::from_parts(grid, comps, false)
}

pub fn divergence(v: &VectorField) -> SpectralField {
    let grid = v.grid();
    let mut out = SpectralField::zeros(grid);
    for (j, comp) in v.components().iter().enumerate() {
        out.axpy(1.0, &derivative(comp, j));
    }
    out
}

/// Leray projection `v̂ ← v̂ − κ(κ·v̂)/|κ|²`; the zero mode is left untouched.
pub fn leray_project(v: &VectorField) -> VectorField {
    let grid = v.grid();
    let d = grid.dim();
    let mut comps: Vec<SpectralField> = v.components().to_vec();
    for idx in 1..grid.spectral_len() {
        let kv = grid.wavevector(grid.mode(idx));
        let k2: f64 = kv[..d].iter().map(|x| x * x).sum();
        let mut dot = Complex64::new(0.0, 0.0);
        for (j, c) in comps.iter().enumerate() {
            dot += c.coeffs()[idx] * kv[j];
        }
        let factor = dot / k2;
        for (j, c) in comps.iter_mut().enumerate() {
            c.coeffs_mut()[idx] -= factor * kv[j];
        }
    }
    VectorField::from_parts(grid, comps, true)
}

/// Zero every mode with some `|k_j| >= n/3`.
pub fn dealias_23(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub(crate) fn dealias_in_place(f: &mut SpectralField) {
    let grid = f.grid();
    for (idx, c) in f.coeffs_mut().iter_mut().enumerate() {
        if !grid.is_retained(grid.mode(idx)) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Componentwise 2/3 dealiasing; the divergence-free flag survives since the
/// mask is applied mode by mode.
pub fn dealias_vector(v: &VectorField) -> VectorField {
    let comps = v.components().iter().map(dealias_23).collect();
    VectorField::from_parts(v.grid(), comps, v.is_solenoidal())
}

pub fn l2_norm(f: &SpectralField) -> f64 {
    f.l2_norm()
}

pub fn h1_seminorm(f: &SpectralField) -> f64 {
    f.h1_seminorm()
}

/// Physical values of the velocity gradient tensor, `out[i * d + j] = ∂_j v_i`.
pub fn gradient_tensor(v: &VectorField) -> Vec<Vec<f64>> {
    let d = v.grid().dim();
    let mut out = Vec::with_capacity(d * d);
    for comp in v.components() {
        for j in 0..d {
            out.push(derivative(comp, j).to_physical());
        }
    }
    out
}

/// Pointwise Frobenius norm `|∇v(x)|_F` from a gradient tensor.
pub fn frobenius(tensor: &[Vec<f64>]) -> Vec<f64> {
    let len = tensor[0].len();
    (0..len)
        .map(|i| tensor.iter().map(|g| g[i] * g[i]).sum::<f64>().sqrt())
        .collect()
}

/// `‖∇v‖_{L^p} = (∫ |∇v|_F^p dx)^{1/p}` by the uniform-grid rule.
pub fn lp_gradient_norm(v: &VectorField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent { p, min: 1.0 });
    }
    let frob = frobenius(&gradient_tensor(&dealias_vector(v)));
    let mean = frob.iter().map(|g| g.powf(p)).sum::<f64>() / frob.len() as f64;
    Ok(mean.powf(1.0 / p))
}

/// Shell energies `E(s) = ½ Σ_{s-½ < |k| <= s+½} |v̂(k)|²` for `s = 0..`.
pub fn energy_spectrum(v: &VectorField) -> Vec<(usize, f64)> {
    let grid = v.grid();
    let d = grid.dim();
    let kmax = ((d as f64).sqrt() * (grid.n() / 2) as f64).ceil() as usize + 1;
    let mut shells = vec![0.0; kmax + 1];
    for idx in 0..grid.spectral_len() {
        let k = grid.mode(idx);
        let kmag = (k.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt();
        let shell = (kmag - 0.5).ceil().max(0.0) as usize;
        let w = grid.hermitian_weight(k);
        let e: f64 = v
            .components()
            .iter()
            .map(|c| c.coeffs()[idx].norm_sqr())
            .sum();
        shells[shell] += 0.5 * w * e;
    }
    shells.into_iter().enumerate().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid2(n: usize) -> Grid {
        Grid::new(2, n).unwrap()
    }

    #[test]
    fn constant_field_has_only_mean() {
        let g = grid2(8);
        let f = SpectralField::from_fn(g, |_| 2.5);
        assert!((f.coeffs()[0].re - 2.5).abs() < 1e-15);
        assert!(f.coeffs()[1..].iter().all(|c| c.norm() < 1e-15));
        assert!(gradient(&f).components().iter().all(|c| c.max_abs_coeff() < 1e-14));
    }

    #[test]
    fn single_sine_mode() {
        let g = grid2(8);
        let f = SpectralField::from_fn(g, |x| (2.0 * PI * x[0]).sin());
        for idx in 0..g.spectral_len() {
            let k = g.mode(idx);
            let c = f.coeffs()[idx];
            if k == [1, 0, 0] || k == [-1, 0, 0] {
                assert!((c.norm() - 0.5).abs() < 1e-14);
            } else {
                assert!(c.norm() < 1e-14, "mode {k:?} = {c}");
            }
        }
        assert!((f.l2_norm() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn derivative_of_sine() {
        let g = grid2(16);
        let f = SpectralField::from_fn(g, |x| (2.0 * PI * x[0]).sin());
        let df = derivative(&f, 0).to_physical();
        for (i, v) in df.iter().enumerate() {
            let x = g.point(i);
            assert!((v - 2.0 * PI * (2.0 * PI * x[0]).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn dealias_band() {
        let g = grid2(16);
        let mut f = SpectralField::zeros(g);
        f.set_coeff([7, 0, 0], Complex64::new(1.0, 0.0));
        assert!(dealias_23(&f).max_abs_coeff() == 0.0);
        let mut h = SpectralField::zeros(g);
        h.set_coeff([5, -3, 0], Complex64::new(0.3, 0.1));
        assert_eq!(dealias_23(&h), h);
    }

    #[test]
    fn gradient_field_projects_to_zero() {
        let g = grid2(16);
        let phi = SpectralField::from_fn(g, |x| {
            (2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).cos() + (6.0 * PI * x[1]).sin()
        });
        let p = leray_project(&gradient(&phi));
        assert!(p.components().iter().all(|c| c.max_abs_coeff() < 1e-15));
    }

    #[test]
    fn lp_norm_rejects_small_p() {
        let g = grid2(8);
        assert!(lp_gradient_norm(&VectorField::zeros(g), 0.5).is_err());
        assert_eq!(lp_gradient_norm(&VectorField::zeros(g), 3.0).unwrap(), 0.0);
    }

    #[test]
    fn single_mode_spectrum() {
        let g = grid2(16);
        let mut c0 = SpectralField::zeros(g);
        let mut c1 = SpectralField::zeros(g);
        // k = (0, 3): velocity along x is divergence-free
        c0.set_coeff([0, 3, 0], Complex64::new(0.2, -0.1));
        let _ = &mut c1;
        let v = VectorField::new(vec![c0, c1]).unwrap();
        assert!(v.is_solenoidal());
        let spec = energy_spectrum(&v);
        let total: f64 = spec.iter().map(|s| s.1).sum();
        assert!((spec[3].1 - total).abs() < 1e-16);
        assert!((total - 0.5 * v.l2_norm().powi(2)).abs() < 1e-15);
        assert!(energy_spectrum(&VectorField::zeros(g)).iter().all(|s| s.1 == 0.0));
    }
}
