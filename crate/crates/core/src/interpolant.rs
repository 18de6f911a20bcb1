//! Observation operators `I_h`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolantKind {
    FourierTruncation,
    VolumeAverage,
}

impl InterpolantKind {
    pub fn name(&self) -> &'static str {
        match self {
            InterpolantKind::FourierTruncation => "fourier_truncation",
            InterpolantKind::VolumeAverage => "volume_average",
        }
    }
}

/// An interpolant and its observation scale `h`.
///
/// For Fourier truncation `h = 1/k_c` and the modes with `|k| < k_c` are
/// observed. For volume averages `h` is the box edge, so `1/h` boxes tile each
/// axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpolantSpec {
    pub kind: InterpolantKind,
    pub h: f64,
}

impl InterpolantSpec {
    pub fn fourier(cutoff: u32) -> Self {
        InterpolantSpec {
            kind: InterpolantKind::FourierTruncation,
            h: 1.0 / cutoff as f64,
        }
    }

    pub fn volume(boxes_per_axis: u32) -> Self {
        InterpolantSpec {
            kind: InterpolantKind::VolumeAverage,
            h: 1.0 / boxes_per_axis as f64,
        }
    }

    /// `k_c = round(1/h)`.
    pub fn cutoff(&self) -> u32 {
        (1.0 / self.h).round() as u32
    }

    /// Approximation constant `c_0` when it is known analytically.
    pub fn known_c0(&self) -> Option<f64> {
        match self.kind {
            InterpolantKind::FourierTruncation => Some(1.0),
            InterpolantKind::VolumeAverage => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::param("h", format!("must be positive, got {}", self.h)));
        }
        if self.cutoff() < 1 {
            return Err(Error::param("h", format!("1/h must round to >= 1, got {}", self.h)));
        }
        Ok(())
    }

    pub fn validate_for(&self, grid: Grid) -> Result<()> {
        self.validate()?;
        if self.kind == InterpolantKind::VolumeAverage {
            let boxes = 1.0 / self.h;
            if (boxes - boxes.round()).abs() > 1e-9 {
                return Err(Error::IncompatibleInterpolant(format!(
                    "1/h = {boxes} is not an integer box count"
                )));
            }
            if grid.n() % boxes.round() as usize != 0 {
                return Err(Error::IncompatibleInterpolant(format!(
                    "{} boxes per axis do not divide n = {}",
                    boxes.round(),
                    grid.n()
                )));
            }
        }
        Ok(())
    }

    /// Whether Fourier mode `k` is observed by a truncation with this cutoff.
    pub fn observes(&self, k: [i64; 3]) -> bool {
        let kc = self.cutoff() as i64;
        let k2: i64 = k.iter().map(|x| x * x).sum();
        k2 < kc * kc
    }

    /// Per-mode observation mask in storage order; `None` for interpolants
    /// that are not diagonal in Fourier space.
    pub fn fourier_mask(&self, grid: Grid) -> Option<Vec<bool>> {
        match self.kind {
            InterpolantKind::FourierTruncation => {
                Some(grid.modes().map(|k| self.observes(k)).collect())
            }
            InterpolantKind::VolumeAverage => None,
        }
    }

    /// Number of observed nonzero wave vectors, counting `k` and `-k`
    /// separately, inside the dealiased band.
    pub fn observed_mode_count(&self, grid: Grid) -> usize {
        let mut count = 0;
        for k in grid.modes() {
            if k == [0, 0, 0] || !grid.is_retained(k) || !self.observes(k) {
                continue;
            }
            count += grid.hermitian_weight(k) as usize;
        }
        count
    }
}

pub fn apply(spec: &InterpolantSpec, f: &SpectralField) -> Result<SpectralField> {
    let grid = f.grid();
    spec.validate_for(grid)?;
    match spec.kind {
        InterpolantKind::FourierTruncation => {
            let mut out = f.clone();
            for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
                if !spec.observes(grid.mode(idx)) {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
            Ok(out)
        }
        InterpolantKind::VolumeAverage => {
            let boxes = spec.cutoff() as usize;
            let values = f.to_physical();
            let averaged = box_average(grid, &values, boxes);
            SpectralField::from_physical(grid, &averaged)
        }
    }
}

/// Componentwise `I_h`. Truncation keeps the divergence-free flag since it
/// commutes with the Leray projection; box averaging does not.
pub fn apply_vector(spec: &InterpolantSpec, v: &VectorField) -> Result<VectorField> {
    let comps = v
        .components()
        .iter()
        .map(|c| apply(spec, c))
        .collect::<Result<Vec<_>>>()?;
    match spec.kind {
        InterpolantKind::FourierTruncation => Ok(VectorField::from_parts(
            v.grid(),
            comps,
            v.is_solenoidal(),
        )),
        InterpolantKind::VolumeAverage => VectorField::new(comps),
    }
}

fn box_average(grid: Grid, values: &[f64], boxes: usize) -> Vec<f64> {
    let n = grid.n();
    let d = grid.dim();
    let m = n / boxes;
    let box_of = |idx: usize| -> usize {
        let mut rest = idx;
        let mut b = 0;
        let mut stride = 1;
        for _ in 0..d {
            b += (rest % n / m) * stride;
            stride *= boxes;
            rest /= n;
        }
        b
    };
    let nboxes = boxes.pow(d as u32);
    let mut sums = vec![0.0; nboxes];
    for (idx, v) in values.iter().enumerate() {
        sums[box_of(idx)] += v;
    }
    let per_box = m.pow(d as u32) as f64;
    (0..values.len())
        .map(|idx| sums[box_of(idx)] / per_box)
        .collect()
}

/// Empirical interpolant constants over a sample set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpolantConstants {
    /// `max ‖I_h φ‖ / ‖φ‖`
    pub c_i: f64,
    /// `max ‖φ − I_h φ‖ / (h ‖∇φ‖)`
    pub c0: f64,
}

pub fn estimate_constants(
    spec: &InterpolantSpec,
    samples: &[SpectralField],
) -> Result<InterpolantConstants> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut c_i = 0.0f64;
    let mut c0 = 0.0f64;
    for (i, phi) in samples.iter().enumerate() {
        let norm = phi.l2_norm();
        let grad = phi.h1_seminorm();
        if norm == 0.0 || grad == 0.0 {
            return Err(Error::param(
                "samples",
                format!("sample {i} has zero norm or zero gradient"),
            ));
        }
        let observed = apply(spec, phi)?;
        let mut residual = phi.clone();
        residual.axpy(-1.0, &observed);
        c_i = c_i.max(observed.l2_norm() / norm);
        c0 = c0.max(residual.l2_norm() / (spec.h * grad));
    }
    Ok(InterpolantConstants { c_i, c0 })
}
