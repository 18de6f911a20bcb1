//! Linearly implicit backward-Euler stepping of the reference and nudged models.
//!
//! One step solves, mode by mode where possible,
//!
//! ```text
//! (v' - v)/dt + P[∇·(v⊗v)] + νA v' + μ I_h v' - P∇·(ν̄ a ∇v') = P f + μ I_h u'
//! ```
//!
//! with `a = |∇v|_F^{p-2}` frozen at the old level. Viscosity and Fourier
//! nudging are diagonal and solved exactly. The variable-coefficient term is
//! split as `a = ā + (a - ā)` with `ā = max a`: the constant part joins the
//! diagonal, the remainder is iterated by Picard sweeps. The sweep map is a
//! contraction, so enough sweeps reach the fully implicit solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interpolant::{self, InterpolantKind, InterpolantSpec};
use crate::les::{self, ForcingSpec};
use crate::spectral::{self, Grid, VectorField, LAMBDA1};

/// Floor on the speed used by the CFL rule, so a quiescent state gets `dt_max`.
pub const CFL_SPEED_FLOOR: f64 = 1e-8;

/// Successive-iterate tolerance above which an unconverged LES solve is reported.
pub const PICARD_WARN_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Nse,
    Ladyzhenskaya,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Nse => "nse",
            Model::Ladyzhenskaya => "ladyzhenskaya",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub model: Model,
    pub nu: f64,
    pub nu_bar: f64,
    pub p: f64,
    pub mu: f64,
    pub interpolant: InterpolantSpec,
    pub forcing: ForcingSpec,
    pub cfl: f64,
    pub dt_max: f64,
    pub dt_min: f64,
    pub t_end: f64,
    /// Upper bound on Picard sweeps for the LES term.
    pub picard_sweeps: u32,
    /// Sweeps stop early once the relative successive difference drops below this.
    pub picard_tol: f64,
}

impl SolverConfig {
    /// Turbulence viscosity actually applied: zero for the Navier–Stokes model.
    pub fn effective_nu_bar(&self) -> f64 {
        match self.model {
            Model::Nse => 0.0,
            Model::Ladyzhenskaya => self.nu_bar,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, name: &str, reason: String) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::param(name, reason))
            }
        }
        check(self.nu > 0.0, "nu", format!("must be > 0, got {}", self.nu))?;
        check(
            self.nu_bar >= 0.0,
            "nu_bar",
            format!("must be >= 0, got {}", self.nu_bar),
        )?;
        check(self.p >= 2.0, "p", format!("must be >= 2, got {}", self.p))?;
        check(self.mu >= 0.0, "mu", format!("must be >= 0, got {}", self.mu))?;
        check(
            self.cfl > 0.0 && self.cfl <= 1.0,
            "cfl",
            "cfl must be in (0,1]".to_string(),
        )?;
        check(
            self.dt_min > 0.0,
            "dt_min",
            format!("must be > 0, got {}", self.dt_min),
        )?;
        check(
            self.dt_min <= self.dt_max,
            "dt_max",
            format!("dt_min = {} exceeds dt_max = {}", self.dt_min, self.dt_max),
        )?;
        check(
            self.t_end >= 0.0,
            "t_end",
            format!("must be >= 0, got {}", self.t_end),
        )?;
        check(self.picard_sweeps >= 1, "picard_sweeps", "must be >= 1".into())?;
        check(
            self.picard_tol >= 0.0,
            "picard_tol",
            format!("must be >= 0, got {}", self.picard_tol),
        )?;
        self.interpolant.validate()?;
        self.forcing.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub v: VectorField,
    pub t: f64,
    pub step_count: u64,
    pub last_dt: f64,
}

impl SimState {
    pub fn new(v: VectorField, t: f64) -> Self {
        SimState {
            v,
            t,
            step_count: 0,
            last_dt: 0.0,
        }
    }
}

/// Diagnostics of one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    pub picard_sweeps: u32,
    /// Relative L² difference of the last two Picard iterates (0 without LES).
    pub picard_residual: f64,
}

impl StepReport {
    pub fn converged(&self) -> bool {
        self.picard_residual <= PICARD_WARN_TOL
    }
}

/// `dt = clamp(cfl · Δx / max(‖v‖_∞, ε), dt_min, dt_max)`, further capped at
/// `1/(2μ)` when nudging through a volume-average interpolant.
pub fn compute_dt(state: &SimState, config: &SolverConfig) -> f64 {
    let speed = state.v.max_speed().max(CFL_SPEED_FLOOR);
    let dx = state.v.grid().dx();
    let mut dt = (config.cfl * dx / speed).clamp(config.dt_min, config.dt_max);
    if config.mu > 0.0 && config.interpolant.kind == InterpolantKind::VolumeAverage {
        dt = dt.min(0.5 / config.mu);
    }
    dt
}

/// Grashof number `G = ‖f‖ / (ν² λ₁)`.
pub fn grashof(f: &VectorField, nu: f64, lambda1: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::param("nu", format!("must be > 0, got {nu}")));
    }
    Ok(f.l2_norm() / (nu * nu * lambda1))
}

/// Per-run stepping context with precomputed forcing and mode tables.
pub struct Stepper {
    config: SolverConfig,
    grid: Grid,
    forcing: VectorField,
    k2: Vec<f64>,
    observed: Option<Vec<bool>>,
}

impl Stepper {
    pub fn new(config: SolverConfig, grid: Grid) -> Result<Self> {
        config.validate()?;
        config.interpolant.validate_for(grid)?;
        let forcing = spectral::dealias_vector(&spectral::leray_project(&les::make_forcing(
            &config.forcing,
            grid,
        )?));
        let k2 = grid
            .modes()
            .map(|k| {
                let kv = grid.wavevector(k);
                kv.iter().map(|x| x * x).sum()
            })
            .collect();
        Ok(Stepper {
            config,
            grid,
            forcing,
            k2,
            observed: config.interpolant.fourier_mask(grid),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn forcing(&self) -> &VectorField {
        &self.forcing
    }

    /// Observation `I_h(u)` in the form `step` expects.
    pub fn observe(&self, u: &VectorField) -> Result<VectorField> {
        interpolant::apply_vector(&self.config.interpolant, u)
    }

    pub fn step(
        &self,
        state: &SimState,
        dt: f64,
        observation: Option<&VectorField>,
    ) -> Result<SimState> {
        self.step_with_report(state, dt, observation).map(|(s, _)| s)
    }

    pub fn step_with_report(
        &self,
        state: &SimState,
        dt: f64,
        observation: Option<&VectorField>,
    ) -> Result<(SimState, StepReport)> {
        let cfg = &self.config;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidTimeStep(dt));
        }
        let grid = self.grid;
        if state.v.grid() != grid {
            return Err(Error::GridMismatch(grid, state.v.grid()));
        }
        let nudging = cfg.mu > 0.0;
        let obs = match (nudging, observation) {
            (true, None) => return Err(Error::MissingObservation(cfg.mu)),
            (true, Some(o)) => {
                if o.grid() != grid {
                    return Err(Error::GridMismatch(grid, o.grid()));
                }
                Some(o)
            }
            (false, _) => None,
        };
        let volume_nudging = nudging && self.observed.is_none();
        if volume_nudging && dt > 0.5 / cfg.mu * (1.0 + 1e-12) {
            return Err(Error::param(
                "dt",
                format!(
                    "explicit volume-average nudging needs dt <= 1/(2 mu) = {}, got {dt}",
                    0.5 / cfg.mu
                ),
            ));
        }

        let v = &state.v;
        let adv = les::advection(v)?;
        let mut rhs = v.clone();
        rhs.axpy(dt, &self.forcing);
        rhs.axpy(-dt, &adv);
        if let Some(o) = obs {
            if volume_nudging {
                let own = self.observe(v)?;
                rhs.axpy(dt * cfg.mu, o);
                rhs.axpy(-dt * cfg.mu, &own);
            } else {
                rhs.axpy(dt * cfg.mu, o);
            }
        }
        let rhs = spectral::dealias_vector(&spectral::leray_project(&rhs));

        let nu_bar = cfg.effective_nu_bar();
        let mu_diag = if nudging && !volume_nudging { cfg.mu } else { 0.0 };

        let (next, report) = if nu_bar == 0.0 {
            let diag = self.diagonal(dt, cfg.nu, mu_diag);
            (self.solve_diag(&rhs, &diag), StepReport::default())
        } else {
            let a = les::lagged_les_coefficient(v, cfg.p)?;
            let a_max = a.iter().copied().fold(0.0, f64::max);
            let off: Vec<f64> = a.iter().map(|ai| ai - a_max).collect();
            let diag = self.diagonal(dt, cfg.nu + nu_bar * a_max, mu_diag);
            let mut iterate = v.clone();
            let mut report = StepReport::default();
            for sweep in 1..=cfg.picard_sweeps {
                let mut src = rhs.clone();
                src.axpy(
                    dt,
                    &les::variable_coefficient_divergence(&iterate, &off, nu_bar),
                );
                let new = self.solve_diag(&spectral::leray_project(&src), &diag);
                let diff = new.difference(&iterate).l2_norm();
                let scale = new.l2_norm().max(f64::MIN_POSITIVE);
                report = StepReport {
                    picard_sweeps: sweep,
                    picard_residual: diff / scale,
                };
                iterate = new;
                if report.picard_residual <= cfg.picard_tol {
                    break;
                }
            }
            (iterate, report)
        };

        let t = state.t + dt;
        if !next.is_finite() {
            return Err(Error::Divergence {
                t,
                what: "non-finite velocity coefficients".into(),
            });
        }
        Ok((
            SimState {
                v: next,
                t,
                step_count: state.step_count + 1,
                last_dt: dt,
            },
            report,
        ))
    }

    /// `1 + dt (ν κ² + μ χ_obs)` per stored mode.
    fn diagonal(&self, dt: f64, viscosity: f64, mu: f64) -> Vec<f64> {
        self.k2
            .iter()
            .enumerate()
            .map(|(idx, k2)| {
                let obs = match &self.observed {
                    Some(mask) if mask[idx] => mu,
                    _ => 0.0,
                };
                1.0 + dt * (viscosity * k2 + obs)
            })
            .collect()
    }

    /// Divides by the diagonal and keeps only divergence-free, dealiased modes.
    fn solve_diag(&self, rhs: &VectorField, diag: &[f64]) -> VectorField {
        let mut comps = rhs.components().to_vec();
        for c in comps.iter_mut() {
            for (z, d) in c.coeffs_mut().iter_mut().zip(diag) {
                *z /= *d;
            }
        }
        let out = VectorField::from_parts(self.grid, comps, rhs.is_solenoidal());
        spectral::dealias_vector(&spectral::leray_project(&out))
    }

    /// CFL step for `state` under this stepper's configuration.
    pub fn compute_dt(&self, state: &SimState) -> f64 {
        compute_dt(state, &self.config)
    }

    /// Advances without observations until `t_end`, landing exactly on it.
    pub fn run_free(&self, state: SimState, t_end: f64) -> Result<SimState> {
        let mut state = state;
        while state.t < t_end - 1e-12 {
            let dt = self.compute_dt(&state).min(t_end - state.t);
            state = self.step(&state, dt, None)?;
        }
        Ok(state)
    }
}

/// Relative defect of the discrete energy identity
/// `½ d‖v‖²/dt + ν‖∇v‖² + ν̄ ∫ a |∇v|² = (f, v) + μ(I_h u − I_h v, v)`
/// across one step, evaluated at the new level with the lagged coefficient.
pub fn energy_balance_residual(
    before: &SimState,
    after: &SimState,
    config: &SolverConfig,
    observation: Option<&VectorField>,
) -> Result<f64> {
    let grid = after.v.grid();
    let dt = after.t - before.t;
    if !(dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    let v0 = &before.v;
    let v1 = &after.v;
    let e0 = v0.l2_norm().powi(2);
    let e1 = v1.l2_norm().powi(2);
    let mut lhs = 0.5 * (e1 - e0) / dt + config.nu * v1.h1_seminorm().powi(2);
    let nu_bar = config.effective_nu_bar();
    if nu_bar > 0.0 {
        let a = les::lagged_les_coefficient(v0, config.p)?;
        let g = spectral::frobenius(&spectral::gradient_tensor(v1));
        let integral: f64 = a.iter().zip(&g).map(|(a, g)| a * g * g).sum::<f64>()
            / grid.physical_len() as f64;
        lhs += nu_bar * integral;
    }

    let f = spectral::dealias_vector(&spectral::leray_project(&les::make_forcing(
        &config.forcing,
        grid,
    )?));
    let mut rhs = f.inner(v1);
    if config.mu > 0.0 {
        let obs = observation.ok_or(Error::MissingObservation(config.mu))?;
        let own = interpolant::apply_vector(&config.interpolant, v1)?;
        rhs += config.mu * (obs.inner(v1) - own.inner(v1));
    }
    let defect = (lhs - rhs).abs();
    let scale = if e1 > 0.0 { e1 } else { e0 };
    Ok(if scale > 0.0 { defect / scale } else { defect })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionStatus {
    Satisfied,
    Warn,
    NotApplicable,
    Unknown,
}

impl ConditionStatus {
    pub fn label(&self) -> &'static str {
        match self {
            ConditionStatus::Satisfied => "OK",
            ConditionStatus::Warn => "WARN",
            ConditionStatus::NotApplicable => "N/A",
            ConditionStatus::Unknown => "UNKNOWN",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub status: ConditionStatus,
}

/// Classification of a nudged configuration against the sufficient conditions
/// for well-posedness and synchronization. Violations are warnings.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub grashof: f64,
    pub c0: Option<f64>,
    pub checks: Vec<ConditionCheck>,
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn check(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn has_warnings(&self) -> bool {
        self.checks.iter().any(|c| c.status == ConditionStatus::Warn)
    }
}

pub const COND_MU_GRASHOF: &str = "mu >= 8 nu lambda1 G^2";
pub const COND_SYNC_H: &str = "2 mu c0 h^2 <= nu";
pub const COND_WELL_POSED_H: &str = "c0 mu h^2 <= nu";
pub const COND_EXPONENT: &str = "p >= 5/2";

/// `c0` defaults to the analytic constant of the interpolant when known.
pub fn validate_da_conditions(
    config: &SolverConfig,
    dim: usize,
    g: f64,
    c0: Option<f64>,
) -> ConditionReport {
    let c0 = c0.or(config.interpolant.known_c0());
    let h = config.interpolant.h;
    let mu = config.mu;
    let nu = config.nu;
    let mut checks = Vec::new();

    let mu_threshold = 8.0 * nu * LAMBDA1 * g * g;
    let nudged = mu > 0.0;
    let status = |ok: bool| {
        if ok {
            ConditionStatus::Satisfied
        } else {
            ConditionStatus::Warn
        }
    };
    checks.push(ConditionCheck {
        name: COND_MU_GRASHOF,
        lhs: mu,
        rhs: mu_threshold,
        status: if nudged {
            status(mu >= mu_threshold)
        } else {
            ConditionStatus::NotApplicable
        },
    });
    for (name, factor) in [(COND_SYNC_H, 2.0), (COND_WELL_POSED_H, 1.0)] {
        let (lhs, st) = match c0 {
            _ if !nudged => (f64::NAN, ConditionStatus::NotApplicable),
            None => (f64::NAN, ConditionStatus::Unknown),
            Some(c0) => {
                let lhs = factor * mu * c0 * h * h;
                (lhs, status(lhs <= nu))
            }
        };
        checks.push(ConditionCheck {
            name,
            lhs,
            rhs: nu,
            status: st,
        });
    }
    checks.push(ConditionCheck {
        name: COND_EXPONENT,
        lhs: config.p,
        rhs: 2.5,
        status: if config.model == Model::Ladyzhenskaya {
            status(config.p >= 2.5)
        } else {
            ConditionStatus::NotApplicable
        },
    });

    let mut notes = Vec::new();
    if !nudged {
        notes.push("mu = 0: nudging disabled, conditions not applicable".to_string());
    }
    if dim == 3 {
        notes.push("dim = 3 is beyond the proved (2D) regime".to_string());
    }
    ConditionReport {
        grashof: g,
        c0,
        checks,
        notes,
    }
}
