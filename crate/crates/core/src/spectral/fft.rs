//! Multi-dimensional real transforms built from `realfft` along the contiguous
//! axis and `rustfft` along the others. Every line is transformed
//! independently, so results do not depend on the number of worker threads.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use super::Grid;

struct Plans {
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut real = RealFftPlanner::<f64>::new();
            let mut complex = FftPlanner::<f64>::new();
            Arc::new(Plans {
                r2c: real.plan_fft_forward(n),
                c2r: real.plan_fft_inverse(n),
                forward: complex.plan_fft_forward(n),
                inverse: complex.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Transforms `data` (spectral layout) along a non-contiguous `axis`.
fn complex_axis(data: &mut [Complex64], shape: &[usize], axis: usize, fft: &Arc<dyn Fft<f64>>) {
    let len = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();

    let mut lines = vec![Complex64::new(0.0, 0.0); data.len()];
    {
        let src: &[Complex64] = data;
        lines
            .par_chunks_mut(len)
            .enumerate()
            .for_each(|(line, buf)| {
                let (o, r) = (line / inner, line % inner);
                for (i, b) in buf.iter_mut().enumerate() {
                    *b = src[(o * len + i) * inner + r];
                }
            });
    }
    lines.par_chunks_mut(len * 16).for_each_init(
        || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
        |scratch, chunk| fft.process_with_scratch(chunk, scratch),
    );
    data.par_chunks_mut(len * inner)
        .enumerate()
        .for_each(|(o, block)| {
            for i in 0..len {
                for r in 0..inner {
                    block[i * inner + r] = lines[(o * inner + r) * len + i];
                }
            }
        });
}

/// Forward transform normalized so that `coeff(k) = mean(f · e^{-iκ·x})`.
pub(crate) fn forward(grid: &Grid, real: &[f64]) -> Vec<Complex64> {
    let n = grid.n();
    let nh = grid.half_n();
    let plans = plans(n);
    let mut out = vec![Complex64::new(0.0, 0.0); grid.spectral_len()];
    let scale = 1.0 / grid.physical_len() as f64;

    out.par_chunks_mut(nh)
        .zip(real.par_chunks(n))
        .for_each_init(
            || {
                (
                    vec![0.0; n],
                    vec![Complex64::new(0.0, 0.0); plans.r2c.get_scratch_len()],
                )
            },
            |(input, scratch), (dst, src)| {
                input.copy_from_slice(src);
                plans
                    .r2c
                    .process_with_scratch(input, dst, scratch)
                    .expect("r2c length mismatch");
            },
        );

    let shape = grid.spectral_shape();
    for axis in (0..grid.dim() - 1).rev() {
        complex_axis(&mut out, &shape, axis, &plans.forward);
    }
    out.par_iter_mut().for_each(|c| *c *= scale);
    out
}

/// Inverse of [`forward`]. The imaginary parts of the self-conjugate bins of
/// each contiguous line are discarded, which is the projection onto real fields.
pub(crate) fn inverse(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    let n = grid.n();
    let nh = grid.half_n();
    let plans = plans(n);
    let mut work = coeffs.to_vec();
    let shape = grid.spectral_shape();
    for axis in 0..grid.dim() - 1 {
        complex_axis(&mut work, &shape, axis, &plans.inverse);
    }

    let mut out = vec![0.0; grid.physical_len()];
    out.par_chunks_mut(n)
        .zip(work.par_chunks_mut(nh))
        .for_each_init(
            || vec![Complex64::new(0.0, 0.0); plans.c2r.get_scratch_len()],
            |scratch, (dst, src)| {
                src[0].im = 0.0;
                src[nh - 1].im = 0.0;
                plans
                    .c2r
                    .process_with_scratch(src, dst, scratch)
                    .expect("c2r length mismatch");
            },
        );
    out
}
