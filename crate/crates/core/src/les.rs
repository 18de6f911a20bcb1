//! Nonlinear terms: advection, the Ladyzhenskaya p-Laplacian stress, forcing.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{self, dealias_in_place, Grid, SpectralField, VectorField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(v·∇)v` in divergence form `∇·(v⊗v)`, pseudospectral and 2/3-dealiased.
///
/// The result is not projected; callers apply [`spectral::leray_project`].
pub fn advection(v: &VectorField) -> Result<VectorField> {
    if !v.is_solenoidal() {
        return Err(Error::NotSolenoidal);
    }
    let grid = v.grid();
    let d = grid.dim();
    let phys = v.to_physical();

    let mut products = vec![vec![]; d * d];
    for i in 0..d {
        for j in i..d {
            let prod: Vec<f64> = phys[i].iter().zip(&phys[j]).map(|(a, b)| a * b).collect();
            products[i * d + j] = SpectralField::from_physical(grid, &prod)?.into_coeffs();
        }
    }

    let mut comps = Vec::with_capacity(d);
    for i in 0..d {
        let mut out = SpectralField::zeros(grid);
        for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
            let k = grid.mode(idx);
            if !grid.is_retained(k) {
                continue;
            }
            let kv = grid.wavevector(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, kj) in kv.iter().enumerate().take(d) {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                acc += products[a * d + b][idx] * *kj;
            }
            *c = acc * I;
        }
        comps.push(out);
    }
    Ok(VectorField::from_parts(grid, comps, false))
}

/// `a(x) = |∇v(x)|_F^{p-2}`, with `a = 0` where `∇v = 0` and `p > 2`.
pub fn lagged_les_coefficient(v_old: &VectorField, p: f64) -> Result<Vec<f64>> {
    if !(p >= 2.0) {
        return Err(Error::InvalidExponent { p, min: 2.0 });
    }
    let frob = spectral::frobenius(&spectral::gradient_tensor(v_old));
    Ok(frob.into_iter().map(|g| coefficient_power(g, p)).collect())
}

fn coefficient_power(g: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if g == 0.0 {
        0.0
    } else {
        g.powf(p - 2.0)
    }
}

/// `∇·(scale · a(x) ∇v)` with `a` given on grid nodes; dealiased.
pub fn variable_coefficient_divergence(v: &VectorField, a: &[f64], scale: f64) -> VectorField {
    let grid = v.grid();
    let d = grid.dim();
    debug_assert_eq!(a.len(), grid.physical_len());
    let mut comps = Vec::with_capacity(d);
    for comp in v.components() {
        let mut out = SpectralField::zeros(grid);
        for j in 0..d {
            let g = spectral::derivative(comp, j).to_physical();
            let flux: Vec<f64> = g.iter().zip(a).map(|(g, a)| scale * a * g).collect();
            let flux = SpectralField::from_physical(grid, &flux).expect("grid-sized buffer");
            out.axpy(1.0, &spectral::derivative(&flux, j));
        }
        dealias_in_place(&mut out);
        comps.push(out);
    }
    VectorField::from_parts(grid, comps, false)
}

/// `∇·(ν̄ |∇v|_F^{p-2} ∇v)`, evaluated in physical space and dealiased.
pub fn ladyzhenskaya_divergence(v: &VectorField, p: f64, nu_bar: f64) -> Result<VectorField> {
    if !(p >= 2.0) {
        return Err(Error::InvalidExponent { p, min: 2.0 });
    }
    if !(nu_bar >= 0.0) {
        return Err(Error::param("nu_bar", format!("must be >= 0, got {nu_bar}")));
    }
    if nu_bar == 0.0 {
        return Ok(VectorField::zeros(v.grid()));
    }
    let a = lagged_les_coefficient(v, p)?;
    Ok(variable_coefficient_divergence(v, &a, nu_bar))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForcingKind {
    #[serde(rename = "taylor_green_3d")]
    TaylorGreen3d,
    #[serde(rename = "kolmogorov_2d")]
    Kolmogorov2d,
    #[serde(rename = "zero")]
    Zero,
}

impl ForcingKind {
    pub fn name(&self) -> &'static str {
        match self {
            ForcingKind::TaylorGreen3d => "taylor_green_3d",
            ForcingKind::Kolmogorov2d => "kolmogorov_2d",
            ForcingKind::Zero => "zero",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForcingSpec {
    pub kind: ForcingKind,
    pub amplitude: f64,
    /// Kolmogorov wavenumber `k_f`; ignored by the other kinds.
    pub wavenumber: u32,
}

impl ForcingSpec {
    pub fn zero() -> Self {
        ForcingSpec {
            kind: ForcingKind::Zero,
            amplitude: 0.0,
            wavenumber: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(Error::param("forcing_amplitude", "must be finite"));
        }
        if self.wavenumber < 1 {
            return Err(Error::param("forcing_wavenumber", "must be >= 1"));
        }
        Ok(())
    }
}

/// Divergence-free, mean-free body force on `grid`.
pub fn make_forcing(spec: &ForcingSpec, grid: Grid) -> Result<VectorField> {
    spec.validate()?;
    let amp = spec.amplitude;
    let comps = match spec.kind {
        ForcingKind::Zero => return Ok(VectorField::zeros(grid)),
        ForcingKind::TaylorGreen3d => {
            if grid.dim() != 3 {
                return Err(Error::param(
                    "forcing",
                    "taylor_green_3d needs a 3D grid",
                ));
            }
            let s = |t: f64| (2.0 * PI * t).sin();
            let c = |t: f64| (2.0 * PI * t).cos();
            vec![
                SpectralField::from_fn(grid, |x| amp * s(x[0]) * c(x[1]) * c(x[2])),
                SpectralField::from_fn(grid, |x| -amp * c(x[0]) * s(x[1]) * c(x[2])),
                SpectralField::zeros(grid),
            ]
        }
        ForcingKind::Kolmogorov2d => {
            if grid.dim() != 2 {
                return Err(Error::param("forcing", "kolmogorov_2d needs a 2D grid"));
            }
            let kf = spec.wavenumber as f64;
            if 3 * spec.wavenumber as usize >= grid.n() {
                return Err(Error::param(
                    "forcing_wavenumber",
                    format!("k_f = {} is outside the dealiased band of n = {}", kf, grid.n()),
                ));
            }
            vec![
                SpectralField::from_fn(grid, |x| amp * (2.0 * PI * kf * x[1]).sin()),
                SpectralField::zeros(grid),
            ]
        }
    };
    VectorField::new(comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{divergence, leray_project};

    #[test]
    fn zero_field_has_zero_advection() {
        let g = Grid::new(2, 16).unwrap();
        let a = advection(&VectorField::zeros(g)).unwrap();
        assert!(a.l2_norm() == 0.0);
    }

    #[test]
    fn rejects_non_solenoidal() {
        let g = Grid::new(2, 16).unwrap();
        let v = VectorField::new(vec![
            SpectralField::from_fn(g, |x| (2.0 * PI * x[0]).sin()),
            SpectralField::zeros(g),
        ])
        .unwrap();
        assert!(matches!(advection(&v), Err(Error::NotSolenoidal)));
    }

    #[test]
    fn taylor_green_advection_is_a_gradient() {
        let g = Grid::new(2, 32).unwrap();
        let s = |t: f64| (2.0 * PI * t).sin();
        let c = |t: f64| (2.0 * PI * t).cos();
        let v = VectorField::new(vec![
            SpectralField::from_fn(g, |x| s(x[0]) * c(x[1])),
            SpectralField::from_fn(g, |x| -c(x[0]) * s(x[1])),
        ])
        .unwrap();
        assert!(v.is_solenoidal());
        let adv = advection(&v).unwrap();
        assert!(adv.l2_norm() > 0.1);
        assert!(leray_project(&adv).l2_norm() < 1e-10);
    }

    #[test]
    fn coefficient_edge_cases() {
        let g = Grid::new(2, 16).unwrap();
        let zero = VectorField::zeros(g);
        assert!(lagged_les_coefficient(&zero, 3.0).unwrap().iter().all(|&a| a == 0.0));
        assert!(lagged_les_coefficient(&zero, 2.0).unwrap().iter().all(|&a| a == 1.0));
        assert!(lagged_les_coefficient(&zero, 1.5).is_err());
    }

    #[test]
    fn lagged_coefficient_of_shear() {
        // v = (sin 2πy, 0): |∇v|_F = 2π|cos 2πy|
        let g = Grid::new(2, 16).unwrap();
        let v = VectorField::new(vec![
            SpectralField::from_fn(g, |x| (2.0 * PI * x[1]).sin()),
            SpectralField::zeros(g),
        ])
        .unwrap();
        let a = lagged_les_coefficient(&v, 3.0).unwrap();
        for (i, ai) in a.iter().enumerate() {
            let y = g.point(i)[1];
            assert!((ai - 2.0 * PI * (2.0 * PI * y).cos().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_nu_bar_gives_zero() {
        let g = Grid::new(2, 16).unwrap();
        let v = make_forcing(
            &ForcingSpec {
                kind: ForcingKind::Kolmogorov2d,
                amplitude: 1.0,
                wavenumber: 2,
            },
            g,
        )
        .unwrap();
        assert_eq!(ladyzhenskaya_divergence(&v, 3.0, 0.0).unwrap().l2_norm(), 0.0);
        assert!(ladyzhenskaya_divergence(&v, 1.0, 1.0).is_err());
    }

    #[test]
    fn taylor_green_forcing() {
        let g = Grid::new(3, 16).unwrap();
        let spec = ForcingSpec {
            kind: ForcingKind::TaylorGreen3d,
            amplitude: 1.0,
            wavenumber: 1,
        };
        let f = make_forcing(&spec, g).unwrap();
        assert!(f.is_solenoidal());
        assert_eq!(f.component(2).max_abs_coeff(), 0.0);
        assert!(divergence(&f).max_abs_coeff() < 1e-12);
        assert!(f.mean_magnitude() < 1e-15);
        // f1(1/4, 0, 0) = 1; node (4, 0, 0) on n = 16
        let f1 = f.component(0).to_physical();
        assert!((f1[4 * 16 * 16] - 1.0).abs() < 1e-13);
        assert!(make_forcing(&spec, Grid::new(2, 16).unwrap()).is_err());
    }
}
