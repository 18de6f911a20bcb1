//! Brute-force reference computations that share no code path with the
//! pseudospectral kernels they check.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::init::{random_band_limited, random_solenoidal};
use crate::interpolant::{self, InterpolantSpec};
use crate::les::{self, ForcingSpec};
use crate::solver::{Model, SimState, SolverConfig, Stepper};
use crate::spectral::{Grid, SpectralField, VectorField};

pub const CONVOLUTION_TOL: f64 = 1e-12;
pub const ORDER_RANGE: (f64, f64) = (0.8, 1.2);
pub const TAIL_SUM_SLACK: f64 = 1e-10;

pub const SUITES: &[&str] = &["convolution", "taylor_green", "tail_sum"];

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub suite: &'static str,
    pub check: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
}

/// Coefficients on the full lattice `[-n/2, n/2)^d`, row-major.
fn full_lattice(f: &SpectralField) -> Vec<Complex64> {
    let grid = f.grid();
    let n = grid.n() as i64;
    let d = grid.dim();
    let total = (n as usize).pow(d as u32);
    (0..total)
        .map(|flat| f.coeff(lattice_point(flat, n, d)))
        .collect()
}

fn lattice_point(flat: usize, n: i64, d: usize) -> [i64; 3] {
    let mut k = [0i64; 3];
    let mut rest = flat as i64;
    for axis in (0..d).rev() {
        k[axis] = rest % n - n / 2;
        rest /= n;
    }
    k
}

fn lattice_index(k: [i64; 3], n: i64, d: usize) -> Option<usize> {
    let mut flat = 0i64;
    for &kj in k.iter().take(d) {
        if kj < -n / 2 || kj >= n / 2 {
            return None;
        }
        flat = flat * n + kj + n / 2;
    }
    Some(flat as usize)
}

/// `∇·(v⊗v)` by direct summation over all wave-vector pairs `p + q = k`
/// (no wrap-around), evaluated on each retained stored mode.
pub fn brute_force_advection(v: &VectorField) -> Vec<Vec<Complex64>> {
    let grid = v.grid();
    let n = grid.n() as i64;
    let d = grid.dim();
    let lattices: Vec<Vec<Complex64>> = v.components().iter().map(full_lattice).collect();
    let total = lattices[0].len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); grid.spectral_len()]; d];
    for idx in 0..grid.spectral_len() {
        let k = grid.mode(idx);
        if !grid.is_retained(k) {
            continue;
        }
        let mut conv = vec![Complex64::new(0.0, 0.0); d * d];
        for pf in 0..total {
            let p = lattice_point(pf, n, d);
            let q = [k[0] - p[0], k[1] - p[1], k[2] - p[2]];
            let Some(qf) = lattice_index(q, n, d) else {
                continue;
            };
            for i in 0..d {
                for j in 0..d {
                    conv[i * d + j] += lattices[i][pf] * lattices[j][qf];
                }
            }
        }
        for (i, comp) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..d {
                acc += conv[i * d + j] * Complex64::new(0.0, 2.0 * PI * k[j] as f64);
            }
            comp[idx] = acc;
        }
    }
    out
}

/// Largest coefficient difference between [`les::advection`] and
/// [`brute_force_advection`], relative to the largest brute-force coefficient.
pub fn advection_discrepancy(v: &VectorField) -> Result<f64> {
    let fast = les::advection(v)?;
    let slow = brute_force_advection(v);
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for (a, b) in fast.components().iter().zip(&slow) {
        for (x, y) in a.coeffs().iter().zip(b) {
            diff = diff.max((x - y).norm());
            scale = scale.max(y.norm());
        }
    }
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

pub fn convolution_suite() -> Result<Vec<OracleReport>> {
    let mut reports = Vec::new();
    for (dim, seed) in [(2usize, 21u64), (3, 22)] {
        let grid = Grid::new(dim, 8)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..4 {
            let v = random_solenoidal(grid, 2.0, 1.0, &mut rng);
            worst = worst.max(advection_discrepancy(&v)?);
        }
        reports.push(OracleReport {
            suite: "convolution",
            check: format!("advection vs direct convolution on {grid}"),
            passed: worst <= CONVOLUTION_TOL,
            measured: worst,
            bound: CONVOLUTION_TOL,
        });
    }
    Ok(reports)
}

/// 2D Taylor–Green vortex `(sin 2πx cos 2πy, −cos 2πx sin 2πy)`; its
/// advection is a pure gradient, so the exact solution decays as `e^{−8π²νt}`.
pub fn taylor_green_vortex(grid: Grid, amplitude: f64) -> Result<VectorField> {
    if grid.dim() != 2 {
        return Err(Error::param("grid", "Taylor–Green vortex oracle is 2D"));
    }
    let s = |t: f64| (2.0 * PI * t).sin();
    let c = |t: f64| (2.0 * PI * t).cos();
    VectorField::new(vec![
        SpectralField::from_fn(grid, |x| amplitude * s(x[0]) * c(x[1])),
        SpectralField::from_fn(grid, |x| -amplitude * c(x[0]) * s(x[1])),
    ])
}

fn free_decay_config(nu: f64) -> SolverConfig {
    SolverConfig {
        model: Model::Nse,
        nu,
        nu_bar: 0.0,
        p: 3.0,
        mu: 0.0,
        interpolant: InterpolantSpec::fourier(1),
        forcing: ForcingSpec::zero(),
        cfl: 1.0,
        dt_max: 1.0,
        dt_min: 1e-12,
        t_end: 1.0,
        picard_sweeps: 1,
        picard_tol: 0.0,
    }
}

/// Relative L² error against the exact decay after `steps` fixed steps to `t_end`.
pub fn taylor_green_error(nu: f64, t_end: f64, steps: usize) -> Result<f64> {
    let grid = Grid::new(2, 16)?;
    let u0 = taylor_green_vortex(grid, 1.0)?;
    let stepper = Stepper::new(free_decay_config(nu), grid)?;
    let dt = t_end / steps as f64;
    let mut state = SimState::new(u0.clone(), 0.0);
    for _ in 0..steps {
        state = stepper.step(&state, dt, None)?;
    }
    let mut exact = u0;
    exact.scale((-8.0 * PI * PI * nu * t_end).exp());
    Ok(state.v.difference(&exact).l2_norm() / exact.l2_norm())
}

/// Observed orders `log2(e(dt)/e(dt/2))` over successive halvings.
pub fn taylor_green_orders(nu: f64, t_end: f64, base_steps: usize, levels: usize) -> Result<Vec<f64>> {
    let errors = (0..levels)
        .map(|l| taylor_green_error(nu, t_end, base_steps << l))
        .collect::<Result<Vec<_>>>()?;
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

pub fn taylor_green_suite() -> Result<Vec<OracleReport>> {
    let orders = taylor_green_orders(0.01, 1.0, 10, 4)?;
    let last = *orders.last().expect("at least two levels");
    let mut reports = vec![OracleReport {
        suite: "taylor_green",
        check: format!("observed order under step halving {orders:?}"),
        passed: (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&last),
        measured: last,
        bound: 1.0,
    }];
    let fine = taylor_green_error(0.01, 1.0, 640)?;
    reports.push(OracleReport {
        suite: "taylor_green",
        check: "relative error at dt = 1/640".to_string(),
        passed: fine < 1e-3,
        measured: fine,
        bound: 1e-3,
    });
    Ok(reports)
}

/// `‖φ − P_{k_c} φ‖²` summed directly over the modes with `|k| ≥ k_c`.
pub fn tail_sum(f: &SpectralField, cutoff: u32) -> f64 {
    let grid = f.grid();
    let kc2 = (cutoff as i64).pow(2);
    let mut sum = 0.0;
    for (idx, c) in f.coeffs().iter().enumerate() {
        let k = grid.mode(idx);
        let k2: i64 = k.iter().map(|x| x * x).sum();
        if k2 >= kc2 {
            sum += grid.hermitian_weight(k) * c.norm_sqr();
        }
    }
    sum
}

/// Worst cases over all fields and cutoffs of the tail ratio
/// `‖φ − I_hφ‖ / (h‖∇φ‖)` and of `‖I_hφ‖ / ‖φ‖`, plus the largest gap between
/// the interpolant residual and the directly summed tail.
#[derive(Clone, Debug, PartialEq)]
pub struct TailSumOutcome {
    pub samples: usize,
    pub max_ratio: f64,
    pub max_stability: f64,
    pub c0_violations: usize,
    pub stability_violations: usize,
    pub max_tail_mismatch: f64,
}

pub fn tail_sum_check(samples: &[SpectralField], cutoffs: &[u32]) -> Result<TailSumOutcome> {
    let mut out = TailSumOutcome {
        samples: 0,
        max_ratio: 0.0,
        max_stability: 0.0,
        c0_violations: 0,
        stability_violations: 0,
        max_tail_mismatch: 0.0,
    };
    for &kc in cutoffs {
        let spec = InterpolantSpec::fourier(kc);
        for phi in samples {
            let observed = interpolant::apply(&spec, phi)?;
            let mut rest = phi.clone();
            rest.axpy(-1.0, &observed);
            let residual = rest.l2_norm();
            let grad = phi.h1_seminorm();
            let norm = phi.l2_norm();
            let direct = tail_sum(phi, kc).sqrt();
            out.max_tail_mismatch = out
                .max_tail_mismatch
                .max((residual - direct).abs() / norm.max(f64::MIN_POSITIVE));
            let ratio = residual / (spec.h * grad);
            let stability = observed.l2_norm() / norm;
            out.max_ratio = out.max_ratio.max(ratio);
            out.max_stability = out.max_stability.max(stability);
            if residual > spec.h * grad {
                out.c0_violations += 1;
            }
            if observed.l2_norm() > norm {
                out.stability_violations += 1;
            }
            out.samples += 1;
        }
    }
    Ok(out)
}

pub fn tail_sum_suite() -> Result<Vec<OracleReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut samples = Vec::new();
    for (dim, n, kmax) in [(2usize, 32usize, 10i64), (3, 16, 5)] {
        let grid = Grid::new(dim, n)?;
        for _ in 0..60 {
            samples.push(random_band_limited(grid, kmax, &mut rng));
        }
    }
    let outcome = tail_sum_check(&samples, &[1, 2, 3, 5])?;
    let bound = 1.0 / (2.0 * PI) + TAIL_SUM_SLACK;
    Ok(vec![
        OracleReport {
            suite: "tail_sum",
            check: format!("violations of ||phi - I_h phi|| <= h ||grad phi|| over {} samples", outcome.samples),
            passed: outcome.c0_violations == 0,
            measured: outcome.c0_violations as f64,
            bound: 0.0,
        },
        OracleReport {
            suite: "tail_sum",
            check: "violations of ||I_h phi|| <= ||phi||".to_string(),
            passed: outcome.stability_violations == 0,
            measured: outcome.stability_violations as f64,
            bound: 0.0,
        },
        OracleReport {
            suite: "tail_sum",
            check: "max ||phi - I_h phi|| / (h ||grad phi||) vs 1/(2 pi)".to_string(),
            passed: outcome.max_ratio <= bound,
            measured: outcome.max_ratio,
            bound,
        },
        OracleReport {
            suite: "tail_sum",
            check: "interpolant residual vs directly summed tail".to_string(),
            passed: outcome.max_tail_mismatch <= 1e-12,
            measured: outcome.max_tail_mismatch,
            bound: 1e-12,
        },
    ])
}

/// Runs one named suite, or all of them for `"all"`.
pub fn run_suite(name: &str) -> Result<Vec<OracleReport>> {
    match name {
        "convolution" => convolution_suite(),
        "taylor_green" => taylor_green_suite(),
        "tail_sum" => tail_sum_suite(),
        "all" => {
            let mut all = Vec::new();
            for s in SUITES {
                all.extend(run_suite(s)?);
            }
            Ok(all)
        }
        other => Err(Error::param(
            "suite",
            format!("unknown suite `{other}`; expected one of {SUITES:?} or `all`"),
        )),
    }
}
