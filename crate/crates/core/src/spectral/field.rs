use num_complex::Complex64;

use super::{fft, Grid};
use crate::error::{Error, Result};

/// Relative tolerance of the discrete divergence-free test.
pub const SOLENOIDAL_TOL: f64 = 1e-12;

/// Fourier coefficients of a real scalar field, real-to-complex layout.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.spectral_len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.spectral_len() {
            return Err(Error::ShapeMismatch {
                expected: grid.spectral_len(),
                actual: coeffs.len(),
            });
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// Forward transform of physical values; the Nyquist modes are dropped.
    pub fn from_physical(grid: Grid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.physical_len() {
            return Err(Error::ShapeMismatch {
                expected: grid.physical_len(),
                actual: values.len(),
            });
        }
        let mut f = SpectralField {
            grid,
            coeffs: fft::forward(&grid, values),
        };
        f.zero_nyquist();
        Ok(f)
    }

    /// Sample a function of position `(x, y, z)` on the grid nodes.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.physical_len()).map(|i| f(grid.point(i))).collect();
        Self::from_physical(grid, &values).expect("length matches by construction")
    }

    pub fn to_physical(&self) -> Vec<f64> {
        fft::inverse(&self.grid, &self.coeffs)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of integer wave vector `k`, using Hermitian symmetry for the
    /// unstored half. Zero outside the representable band.
    pub fn coeff(&self, k: [i64; 3]) -> Complex64 {
        match self.grid.index_of(k) {
            Some((idx, false)) => self.coeffs[idx],
            Some((idx, true)) => self.coeffs[idx].conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Sets `coeff(k) = value` together with its conjugate partner whenever the
    /// partner is also stored, so the field stays real.
    pub fn set_coeff(&mut self, k: [i64; 3], value: Complex64) {
        let d = self.grid.dim();
        let neg = [-k[0], -k[1], -k[2]];
        let Some((idx, conj)) = self.grid.index_of(k) else {
            return;
        };
        self.coeffs[idx] = if conj { value.conj() } else { value };
        if k[d - 1] == 0 {
            if let Some((pidx, _)) = self.grid.index_of(neg) {
                if pidx == idx {
                    self.coeffs[idx].im = 0.0;
                } else {
                    self.coeffs[pidx] = value.conj();
                }
            }
        }
    }

    /// Mean value (the zero mode).
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn zero_nyquist(&mut self) {
        let grid = self.grid;
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            if grid.is_nyquist(grid.mode(idx)) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// L² inner product `∫ f g dx` evaluated by Parseval.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let grid = self.grid;
        let mut sum = 0.0;
        for (idx, (a, b)) in self.coeffs.iter().zip(&other.coeffs).enumerate() {
            let w = grid.hermitian_weight(grid.mode(idx));
            sum += w * (a * b.conj()).re;
        }
        sum
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// `‖∇f‖_{L²}`.
    pub fn h1_seminorm(&self) -> f64 {
        let grid = self.grid;
        let mut sum = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let k = grid.mode(idx);
            let kv = grid.wavevector(k);
            let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
            sum += grid.hermitian_weight(k) * k2 * c.norm_sqr();
        }
        sum.sqrt()
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= a);
    }

    /// `self += a · x`.
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        debug_assert_eq!(self.grid, x.grid);
        for (s, xi) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += xi * a;
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `dim` spectral components on one grid plus a divergence-free flag.
///
/// The flag is only ever `true` when the discrete divergence passes the
/// relative test of [`SOLENOIDAL_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<SpectralField>,
    solenoidal: bool,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            grid,
            components: vec![SpectralField::zeros(grid); grid.dim()],
            solenoidal: true,
        }
    }

    /// Builds a vector field, measuring its divergence to set the flag.
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        let grid = components
            .first()
            .map(|c| c.grid())
            .ok_or_else(|| Error::InvalidGrid("vector field needs components".into()))?;
        if components.len() != grid.dim() {
            return Err(Error::ShapeMismatch {
                expected: grid.dim(),
                actual: components.len(),
            });
        }
        if let Some(bad) = components.iter().find(|c| c.grid() != grid) {
            return Err(Error::GridMismatch(grid, bad.grid()));
        }
        let mut v = VectorField {
            grid,
            components,
            solenoidal: false,
        };
        v.solenoidal = v.divergence_ratio() <= SOLENOIDAL_TOL;
        Ok(v)
    }

    pub(crate) fn from_parts(grid: Grid, components: Vec<SpectralField>, solenoidal: bool) -> Self {
        debug_assert_eq!(components.len(), grid.dim());
        VectorField {
            grid,
            components,
            solenoidal,
        }
    }

    pub fn from_physical(grid: Grid, components: &[Vec<f64>]) -> Result<Self> {
        let comps = components
            .iter()
            .map(|c| SpectralField::from_physical(grid, c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        self.components.iter().map(|c| c.to_physical()).collect()
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &SpectralField {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<SpectralField> {
        self.components
    }

    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    /// `max_k |κ·v̂(k)| / max_k |κ||v̂(k)|`, zero for the zero field.
    pub fn divergence_ratio(&self) -> f64 {
        let grid = self.grid;
        let d = grid.dim();
        let mut max_div = 0.0f64;
        let mut max_grad = 0.0f64;
        for idx in 0..grid.spectral_len() {
            let kv = grid.wavevector(grid.mode(idx));
            let mut div = Complex64::new(0.0, 0.0);
            let mut amp2 = 0.0;
            for j in 0..d {
                let c = self.components[j].coeffs[idx];
                div += c * kv[j];
                amp2 += c.norm_sqr();
            }
            let kmag = (kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2]).sqrt();
            max_div = max_div.max(div.norm());
            max_grad = max_grad.max(kmag * amp2.sqrt());
        }
        if max_grad == 0.0 {
            0.0
        } else {
            max_div / max_grad
        }
    }

    pub fn inner(&self, other: &VectorField) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.inner(b))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn h1_seminorm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.h1_seminorm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, a: f64) {
        self.components.iter_mut().for_each(|c| c.scale(a));
    }

    /// `self += a · x`; the result is flagged divergence-free only if both were.
    pub fn axpy(&mut self, a: f64, x: &VectorField) {
        for (s, xi) in self.components.iter_mut().zip(&x.components) {
            s.axpy(a, xi);
        }
        self.solenoidal = self.solenoidal && x.solenoidal;
    }

    pub fn difference(&self, other: &VectorField) -> VectorField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Largest pointwise speed `max_x |v(x)|`.
    pub fn max_speed(&self) -> f64 {
        let phys = self.to_physical();
        let mut m = 0.0f64;
        for i in 0..self.grid.physical_len() {
            let s: f64 = phys.iter().map(|c| c[i] * c[i]).sum();
            m = m.max(s);
        }
        m.sqrt()
    }

    /// Zero-mode magnitude over all components.
    pub fn mean_magnitude(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.coeffs[0].norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}
