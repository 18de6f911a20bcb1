//! Seeded random fields for initial data and test corpora.

use num_complex::Complex64;
use rand::Rng;

use crate::spectral::{leray_project, Grid, SpectralField, VectorField};

/// Real mean-free field with independent Gaussian-like coefficients on the
/// cube `|k_j| <= kmax`.
pub fn random_band_limited<R: Rng>(grid: Grid, kmax: i64, rng: &mut R) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    for idx in 1..grid.spectral_len() {
        let k = grid.mode(idx);
        if grid.is_nyquist(k) || k.iter().any(|kj| kj.abs() > kmax) {
            continue;
        }
        let re: f64 = rng.random_range(-1.0..1.0);
        let im: f64 = rng.random_range(-1.0..1.0);
        f.coeffs_mut()[idx] = Complex64::new(re, im);
    }
    symmetrize(&mut f);
    f
}

/// Restores `coeff(-k) = conj(coeff(k))` on the self-conjugate plane of the
/// last axis by keeping the lexicographically positive member of each pair.
pub fn symmetrize(f: &mut SpectralField) {
    let grid = f.grid();
    let d = grid.dim();
    for idx in 0..grid.spectral_len() {
        let k = grid.mode(idx);
        if k[d - 1] != 0 {
            continue;
        }
        let first_nonzero = k.iter().take(d).find(|&&x| x != 0).copied().unwrap_or(0);
        if first_nonzero > 0 {
            let c = f.coeffs()[idx];
            f.set_coeff(k, c);
        } else if first_nonzero == 0 {
            f.coeffs_mut()[idx].im = 0.0;
        }
    }
}

/// Divergence-free, mean-free random field with energy concentrated around
/// shell `k_peak` and total `‖v‖_{L²} = amplitude`.
pub fn random_solenoidal<R: Rng>(
    grid: Grid,
    k_peak: f64,
    amplitude: f64,
    rng: &mut R,
) -> VectorField {
    let kmax = ((grid.n() as i64) - 1) / 3;
    let comps: Vec<SpectralField> = (0..grid.dim())
        .map(|_| {
            let mut f = SpectralField::zeros(grid);
            for idx in 1..grid.spectral_len() {
                let k = grid.mode(idx);
                if !grid.is_retained(k) || k.iter().any(|kj| kj.abs() > kmax) {
                    continue;
                }
                let kmag = (k.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt();
                // E(k) ~ k^4 exp(-2 (k/k_peak)^2), spread over the shell area
                let shell = kmag.powf(grid.dim() as f64 - 1.0);
                let energy = kmag.powi(4) * (-2.0 * (kmag / k_peak).powi(2)).exp() / shell;
                let amp = energy.sqrt();
                let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let mag: f64 = rng.random_range(0.5..1.5);
                f.coeffs_mut()[idx] = Complex64::from_polar(amp * mag, phase);
            }
            symmetrize(&mut f);
            f
        })
        .collect();
    let mut v = leray_project(&VectorField::new(comps).expect("components share one grid"));
    let norm = v.l2_norm();
    if norm > 0.0 {
        v.scale(amplitude / norm);
    }
    v
}
