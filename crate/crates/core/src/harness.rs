//! Twin experiments: a reference run observed through `I_h` drives a nudged run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::init::random_solenoidal;
use crate::solver::{self, SimState, SolverConfig, Stepper};
use crate::spectral::{Grid, VectorField};

/// Default fraction of the recorded window averaged by [`plateau_estimate`].
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;

/// Tail slope (per unit time, natural log) above which a plateau run is extended.
pub const PLATEAU_SLOPE_TOL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NudgedStart {
    /// `v₀ ≡ 0`.
    Zero,
    /// `v₀ = u₀`, the spun-up reference state.
    Reference,
}

impl NudgedStart {
    pub fn name(&self) -> &'static str {
        match self {
            NudgedStart::Zero => "zero",
            NudgedStart::Reference => "reference",
        }
    }
}

/// Random solenoidal data the reference spin-up starts from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialSpec {
    pub k_peak: f64,
    /// `‖u₀‖_{L²}` before spin-up.
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwinExperiment {
    pub grid: Grid,
    pub reference: SolverConfig,
    pub nudged: SolverConfig,
    pub initial: InitialSpec,
    pub spinup_time: f64,
    pub record_interval: f64,
    pub seed: u64,
    pub nudged_start: NudgedStart,
    pub tail_fraction: f64,
    /// Extra simulated time allowed when the error has not levelled off; 0 disables.
    pub extend_max_time: f64,
}

impl TwinExperiment {
    pub fn validate(&self) -> Result<()> {
        self.reference.validate()?;
        self.nudged.validate()?;
        self.nudged.interpolant.validate_for(self.grid)?;
        if !(self.record_interval > 0.0) {
            return Err(Error::param("record_interval", "must be > 0"));
        }
        if !(self.spinup_time >= 0.0) {
            return Err(Error::param("spinup_time", "must be >= 0"));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(Error::param("tail_fraction", "must be in (0,1]"));
        }
        if !(self.extend_max_time >= 0.0) {
            return Err(Error::param("extend_max_time", "must be >= 0"));
        }
        // TOML integers are signed
        if self.seed > i64::MAX as u64 {
            return Err(Error::param("seed", "must be at most 2^63 - 1"));
        }
        if !(self.initial.amplitude >= 0.0) || !(self.initial.k_peak > 0.0) {
            return Err(Error::param(
                "initial",
                "need initial_amplitude >= 0 and initial_k_peak > 0",
            ));
        }
        Ok(())
    }

    /// Reference state at the end of spin-up (time reset to 0).
    pub fn spin_up(&self) -> Result<VectorField> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let u0 = random_solenoidal(self.grid, self.initial.k_peak, self.initial.amplitude, &mut rng);
        let stepper = Stepper::new(self.reference, self.grid)?;
        let state = stepper.run_free(SimState::new(u0, 0.0), self.spinup_time)?;
        Ok(state.v)
    }
}

/// Error time series of a twin run.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    pub l2_abs: Vec<f64>,
    pub l2_rel: Vec<f64>,
    pub h1_rel: Vec<f64>,
    pub energy_residuals: Vec<f64>,
    /// `(key, value)` pairs echoed into output comments.
    pub metadata: Vec<(String, String)>,
}

impl ErrorSeries {
    pub fn new(metadata: Vec<(String, String)>) -> Self {
        ErrorSeries {
            times: vec![],
            l2_abs: vec![],
            l2_rel: vec![],
            h1_rel: vec![],
            energy_residuals: vec![],
            metadata,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, u: &VectorField, v: &VectorField, residual: f64) {
        let w = u.difference(v);
        let l2 = w.l2_norm();
        let un = u.l2_norm();
        let uh = u.h1_seminorm();
        self.times.push(t);
        self.l2_abs.push(l2);
        self.l2_rel.push(if un > 0.0 { l2 / un } else { l2 });
        self.h1_rel.push(if uh > 0.0 { w.h1_seminorm() / uh } else { w.h1_seminorm() });
        self.energy_residuals.push(residual);
    }

    pub fn metric(&self, metric: ErrorMetric) -> &[f64] {
        match metric {
            ErrorMetric::L2Abs => &self.l2_abs,
            ErrorMetric::L2Rel => &self.l2_rel,
            ErrorMetric::H1Rel => &self.h1_rel,
        }
    }

    pub fn last(&self, metric: ErrorMetric) -> Option<f64> {
        self.metric(metric).last().copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorMetric {
    L2Abs,
    L2Rel,
    H1Rel,
}

pub fn run_twin(exp: &TwinExperiment) -> Result<ErrorSeries> {
    exp.validate()?;
    let u0 = exp.spin_up()?;
    run_twin_from(exp, u0)
}

/// Twin run from an already spun-up reference state.
pub fn run_twin_from(exp: &TwinExperiment, u0: VectorField) -> Result<ErrorSeries> {
    exp.validate()?;
    if u0.grid() != exp.grid {
        return Err(Error::GridMismatch(exp.grid, u0.grid()));
    }
    let reference = Stepper::new(exp.reference, exp.grid)?;
    let nudged = Stepper::new(exp.nudged, exp.grid)?;
    let v0 = match exp.nudged_start {
        NudgedStart::Zero => VectorField::zeros(exp.grid),
        NudgedStart::Reference => u0.clone(),
    };
    let mut u = SimState::new(u0, 0.0);
    let mut v = SimState::new(v0, 0.0);
    let mut series = ErrorSeries::new(experiment_metadata(exp));
    series.push(0.0, &u.v, &v.v, 0.0);

    let mut t_end = exp.nudged.t_end;
    let t_cap = exp.nudged.t_end + exp.extend_max_time;
    let mut next_record = exp.record_interval.min(t_end);
    loop {
        while v.t < t_end - 1e-12 {
            let mut dt = reference.compute_dt(&u).min(nudged.compute_dt(&v));
            let target = next_record.min(t_end);
            if v.t + dt > target - 1e-12 {
                dt = target - v.t;
            }
            let u_next = reference.step(&u, dt, None)?;
            let obs = nudged.observe(&u_next.v)?;
            let v_prev = v.clone();
            v = nudged.step(&v, dt, Some(&obs))?;
            u = u_next;
            if v.t >= target - 1e-12 {
                let residual = solver::energy_balance_residual(&v_prev, &v, &exp.nudged, Some(&obs))?;
                series.push(v.t, &u.v, &v.v, residual);
                let l2 = *series.l2_abs.last().expect("just pushed");
                if !l2.is_finite() {
                    return Err(Error::Divergence {
                        t: v.t,
                        what: "non-finite twin error".into(),
                    });
                }
                next_record = v.t + exp.record_interval;
            }
        }
        if t_end >= t_cap - 1e-12 {
            break;
        }
        match tail_slope(&series, exp.tail_fraction) {
            Some(slope) if slope.abs() > PLATEAU_SLOPE_TOL => {
                t_end = (t_end + 0.5 * exp.nudged.t_end).min(t_cap);
                next_record = next_record.min(t_end);
            }
            _ => break,
        }
    }
    Ok(series)
}

fn experiment_metadata(exp: &TwinExperiment) -> Vec<(String, String)> {
    let mut meta = vec![
        ("code_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("grid".to_string(), format!("{}", exp.grid)),
        ("seed".to_string(), exp.seed.to_string()),
        ("spinup_time".to_string(), exp.spinup_time.to_string()),
        ("record_interval".to_string(), exp.record_interval.to_string()),
        ("nudged_start".to_string(), exp.nudged_start.name().to_string()),
    ];
    for (prefix, cfg) in [("reference", &exp.reference), ("nudged", &exp.nudged)] {
        meta.push((format!("{prefix}.model"), cfg.model.name().to_string()));
        meta.push((format!("{prefix}.nu"), cfg.nu.to_string()));
        meta.push((format!("{prefix}.nu_bar"), cfg.nu_bar.to_string()));
        meta.push((format!("{prefix}.p"), cfg.p.to_string()));
        meta.push((format!("{prefix}.mu"), cfg.mu.to_string()));
        meta.push((format!("{prefix}.cfl"), cfg.cfl.to_string()));
        meta.push((format!("{prefix}.t_end"), cfg.t_end.to_string()));
        meta.push((
            format!("{prefix}.forcing"),
            format!(
                "{} amplitude={} k_f={}",
                cfg.forcing.kind.name(),
                cfg.forcing.amplitude,
                cfg.forcing.wavenumber
            ),
        ));
    }
    meta.push((
        "observation".to_string(),
        format!(
            "{} h={}",
            exp.nudged.interpolant.kind.name(),
            exp.nudged.interpolant.h
        ),
    ));
    meta
}

/// Slope of `ln(value)` against `t` over the final `tail_fraction` of the run.
fn tail_slope(series: &ErrorSeries, tail_fraction: f64) -> Option<f64> {
    let (times, values) = tail_window(&series.times, &series.l2_abs, tail_fraction);
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    least_squares_slope(&pts)
}

fn tail_window<'a>(times: &'a [f64], values: &'a [f64], frac: f64) -> (&'a [f64], &'a [f64]) {
    let t0 = times[0];
    let t1 = *times.last().expect("non-empty");
    let cut = t1 - frac * (t1 - t0);
    let start = times
        .iter()
        .position(|&t| t >= cut - 1e-12 * (1.0 + cut.abs()))
        .unwrap_or(times.len() - 1);
    (&times[start..], &values[start..])
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Time average of `l2_abs` over the final `tail_fraction` of the recorded window.
pub fn plateau_estimate(series: &ErrorSeries, tail_fraction: f64) -> Result<f64> {
    plateau_of(&series.times, &series.l2_abs, tail_fraction)
}

pub fn plateau_of(times: &[f64], values: &[f64], tail_fraction: f64) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::param("tail_fraction", "must be in (0,1]"));
    }
    let (t, v) = tail_window(times, values, tail_fraction);
    if t.len() == 1 {
        return Ok(v[0]);
    }
    let mut integral = 0.0;
    for i in 1..t.len() {
        integral += 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
    }
    let span = t[t.len() - 1] - t[0];
    if span > 0.0 {
        Ok(integral / span)
    } else {
        Ok(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Minimum number of points in a decay fit.
pub const MIN_DECAY_POINTS: usize = 5;

/// Exponential rate of the `l2_abs` transient: least-squares slope of
/// `ln(error)` over the leading stretch of `window` that stays above ten
/// times the plateau.
pub fn decay_rate_fit(series: &ErrorSeries, window: Option<(f64, f64)>) -> Result<f64> {
    decay_rate_of(&series.times, &series.l2_abs, window)
}

pub fn decay_rate_of(times: &[f64], values: &[f64], window: Option<(f64, f64)>) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::EmptySamples);
    }
    let floor = plateau_of(times, values, DEFAULT_TAIL_FRACTION)?;
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let mut pts = Vec::new();
    let mut started = false;
    for (&t, &v) in times.iter().zip(values) {
        if t < lo {
            continue;
        }
        if t > hi {
            break;
        }
        if v > 10.0 * floor && v > 0.0 {
            started = true;
            pts.push((t, v.ln()));
        } else if started {
            break;
        }
    }
    if pts.is_empty() {
        return Err(Error::NoDecayingWindow);
    }
    if pts.len() < MIN_DECAY_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_DECAY_POINTS,
            got: pts.len(),
        });
    }
    match least_squares_slope(&pts) {
        Some(s) if s < 0.0 => Ok(s),
        _ => Err(Error::NoDecayingWindow),
    }
}

/// Slope of `log(plateau)` against `log(ν̄)`.
pub fn fit_power_law(nu_bars: &[f64], plateaus: &[f64]) -> Result<f64> {
    if nu_bars.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need >= 3 values, got {}",
            nu_bars.len()
        )));
    }
    if nu_bars.iter().any(|&x| !(x > 0.0)) || plateaus.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::DegenerateFit(
            "values and plateaus must be positive".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = nu_bars
        .iter()
        .zip(plateaus)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    least_squares_slope(&pts).ok_or_else(|| Error::DegenerateFit("all nu_bar values are equal".into()))
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub nu_bars: Vec<f64>,
    pub plateaus: Vec<f64>,
    pub slope: f64,
    pub series: Vec<ErrorSeries>,
}

/// Checks that a ν̄ list can support a power-law fit.
pub fn validate_sweep_values(nu_bar_values: &[f64]) -> Result<()> {
    if nu_bar_values.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need >= 3 values, got {}",
            nu_bar_values.len()
        )));
    }
    if nu_bar_values.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::DegenerateFit("nu_bar values must be positive".into()));
    }
    let lo = nu_bar_values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nu_bar_values.iter().copied().fold(0.0, f64::max);
    if lo == hi {
        return Err(Error::DegenerateFit("all nu_bar values are equal".into()));
    }
    if hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(Error::DegenerateFit(format!(
            "values must span >= 2 decades, got {lo:e}..{hi:e}"
        )));
    }
    Ok(())
}

/// Runs one twin per ν̄ (in parallel, sharing the reference spin-up) and fits
/// the plateau exponent.
pub fn nu_bar_sweep(base: &TwinExperiment, nu_bar_values: &[f64]) -> Result<SweepResult> {
    validate_sweep_values(nu_bar_values)?;
    base.validate()?;
    let u0 = base.spin_up()?;
    let series: Vec<ErrorSeries> = nu_bar_values
        .par_iter()
        .map(|&nu_bar| {
            let mut exp = base.clone();
            exp.nudged.nu_bar = nu_bar;
            run_twin_from(&exp, u0.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let plateaus = series
        .iter()
        .map(|s| plateau_estimate(s, base.tail_fraction))
        .collect::<Result<Vec<_>>>()?;
    let slope = fit_power_law(nu_bar_values, &plateaus)?;
    Ok(SweepResult {
        nu_bars: nu_bar_values.to_vec(),
        plateaus,
        slope,
        series,
    })
}
