//! Experiment files.
//!
//! An experiment is a TOML document with the sections `[grid]`, `[reference]`,
//! `[nudged]`, `[observation]` and `[harness]`. Missing keys take the defaults
//! below; unknown keys are rejected with the closest known key as a hint.
//!
//! ```toml
//! [grid]
//! dim = 2
//! n = 128
//!
//! [reference]
//! model = "nse"
//! nu = 2.75e-3
//!
//! [nudged]
//! model = "ladyzhenskaya"
//! c_s = 0.17        # nu_bar = (c_s * delta)^2, delta = 1/n unless given
//! mu = 30.0
//!
//! [observation]
//! kind = "fourier_truncation"
//! k_c = 9
//!
//! [harness]
//! t_end = 20.0
//! seed = 1
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{InitialSpec, NudgedStart, TwinExperiment, DEFAULT_TAIL_FRACTION};
use crate::interpolant::{InterpolantKind, InterpolantSpec};
use crate::les::{ForcingKind, ForcingSpec};
use crate::solver::{Model, SolverConfig};
use crate::spectral::Grid;

pub const DEFAULT_DIM: usize = 2;
pub const DEFAULT_N: usize = 128;
pub const DEFAULT_NU: f64 = 2.75e-3;
pub const DEFAULT_C_S: f64 = 0.17;
pub const DEFAULT_P: f64 = 3.0;
pub const DEFAULT_MU: f64 = 30.0;
pub const DEFAULT_K_C: u32 = 9;
pub const DEFAULT_CFL: f64 = 0.5;
pub const DEFAULT_DT_MAX: f64 = 1e-2;
pub const DEFAULT_DT_MIN: f64 = 1e-9;
pub const DEFAULT_PICARD_SWEEPS: u32 = 1;
pub const DEFAULT_PICARD_TOL: f64 = 1e-8;
pub const DEFAULT_KOLMOGOROV_AMPLITUDE: f64 = 0.3;
pub const DEFAULT_KOLMOGOROV_WAVENUMBER: u32 = 2;
pub const DEFAULT_TAYLOR_GREEN_AMPLITUDE: f64 = 1.0;
pub const DEFAULT_T_END: f64 = 20.0;
pub const DEFAULT_SPINUP_TIME: f64 = 10.0;
pub const DEFAULT_RECORD_INTERVAL: f64 = 0.1;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_INITIAL_K_PEAK: f64 = 4.0;
pub const DEFAULT_INITIAL_AMPLITUDE: f64 = 0.5;

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    dim: Option<usize>,
    n: Option<usize>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    model: Option<Model>,
    nu: Option<f64>,
    nu_bar: Option<f64>,
    c_s: Option<f64>,
    delta: Option<f64>,
    p: Option<f64>,
    mu: Option<f64>,
    forcing: Option<ForcingKind>,
    forcing_amplitude: Option<f64>,
    forcing_wavenumber: Option<u32>,
    cfl: Option<f64>,
    dt_max: Option<f64>,
    dt_min: Option<f64>,
    picard_sweeps: Option<u32>,
    picard_tol: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservationSection {
    kind: Option<InterpolantKind>,
    h: Option<f64>,
    k_c: Option<u32>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HarnessSection {
    t_end: Option<f64>,
    spinup_time: Option<f64>,
    record_interval: Option<f64>,
    seed: Option<u64>,
    nudged_start: Option<NudgedStart>,
    initial_k_peak: Option<f64>,
    initial_amplitude: Option<f64>,
    tail_fraction: Option<f64>,
    extend_max_time: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    reference: ModelSection,
    #[serde(default)]
    nudged: ModelSection,
    #[serde(default)]
    observation: ObservationSection,
    #[serde(default)]
    harness: HarnessSection,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("grid", &["dim", "n"]),
    ("reference", MODEL_KEYS),
    ("nudged", MODEL_KEYS),
    ("observation", &["kind", "h", "k_c"]),
    (
        "harness",
        &[
            "t_end",
            "spinup_time",
            "record_interval",
            "seed",
            "nudged_start",
            "initial_k_peak",
            "initial_amplitude",
            "tail_fraction",
            "extend_max_time",
        ],
    ),
];

const MODEL_KEYS: &[&str] = &[
    "model",
    "nu",
    "nu_bar",
    "c_s",
    "delta",
    "p",
    "mu",
    "forcing",
    "forcing_amplitude",
    "forcing_wavenumber",
    "cfl",
    "dt_max",
    "dt_min",
    "picard_sweeps",
    "picard_tol",
];

fn suggestion(key: &str, known: &[&str]) -> String {
    known
        .iter()
        .map(|k| (strsim::jaro_winkler(key, k), *k))
        .filter(|(score, _)| *score > 0.7)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| format!(" (did you mean `{k}`?)"))
        .unwrap_or_default()
}

/// Rejects unknown sections and keys before typed deserialization, so the
/// message can carry a suggestion.
fn check_keys(table: &toml::Table) -> Result<()> {
    let names: Vec<&str> = SECTIONS.iter().map(|(s, _)| *s).collect();
    for (section, value) in table {
        let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| s == section) else {
            return Err(Error::Config(format!(
                "unknown section [{section}]{}",
                suggestion(section, &names)
            )));
        };
        let Some(inner) = value.as_table() else {
            return Err(Error::Config(format!("[{section}] must be a table")));
        };
        for key in inner.keys() {
            if !keys.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "unknown key `{section}.{key}`{}",
                    suggestion(key, keys)
                )));
            }
        }
    }
    Ok(())
}

fn default_forcing(dim: usize) -> ForcingKind {
    if dim == 3 {
        ForcingKind::TaylorGreen3d
    } else {
        ForcingKind::Kolmogorov2d
    }
}

fn resolve_forcing(
    section: &ModelSection,
    fallback: Option<ForcingSpec>,
    dim: usize,
) -> ForcingSpec {
    let kind = section
        .forcing
        .or(fallback.map(|f| f.kind))
        .unwrap_or_else(|| default_forcing(dim));
    let same_kind = fallback.filter(|f| f.kind == kind);
    let amplitude = section
        .forcing_amplitude
        .or(same_kind.map(|f| f.amplitude))
        .unwrap_or(match kind {
            ForcingKind::TaylorGreen3d => DEFAULT_TAYLOR_GREEN_AMPLITUDE,
            ForcingKind::Kolmogorov2d => DEFAULT_KOLMOGOROV_AMPLITUDE,
            ForcingKind::Zero => 0.0,
        });
    let wavenumber = section
        .forcing_wavenumber
        .or(same_kind.map(|f| f.wavenumber))
        .unwrap_or(DEFAULT_KOLMOGOROV_WAVENUMBER);
    ForcingSpec {
        kind,
        amplitude,
        wavenumber,
    }
}

fn resolve_nu_bar(prefix: &str, section: &ModelSection, n: usize) -> Result<f64> {
    match (section.nu_bar, section.c_s) {
        (Some(_), Some(_)) => Err(Error::Config(format!(
            "`{prefix}.nu_bar` and `{prefix}.c_s` are mutually exclusive"
        ))),
        (Some(nu_bar), None) => {
            if section.delta.is_some() {
                return Err(Error::Config(format!(
                    "`{prefix}.delta` only applies together with `{prefix}.c_s`"
                )));
            }
            Ok(nu_bar)
        }
        (None, c_s) => {
            let c_s = c_s.unwrap_or(DEFAULT_C_S);
            let delta = section.delta.unwrap_or(1.0 / n as f64);
            if !(delta > 0.0) {
                return Err(Error::param(format!("{prefix}.delta"), "must be > 0"));
            }
            Ok((c_s * delta).powi(2))
        }
    }
}

struct Resolver {
    grid: Grid,
    interpolant: InterpolantSpec,
    t_end: f64,
}

impl Resolver {
    fn solver(
        &self,
        prefix: &str,
        section: &ModelSection,
        default_model: Model,
        default_mu: f64,
        inherit: Option<&SolverConfig>,
    ) -> Result<SolverConfig> {
        let model = section.model.unwrap_or(default_model);
        let nu_bar = match model {
            Model::Ladyzhenskaya => resolve_nu_bar(prefix, section, self.grid.n())?,
            Model::Nse => {
                if section.c_s.is_some() || section.delta.is_some() {
                    return Err(Error::Config(format!(
                        "`{prefix}.c_s`/`{prefix}.delta` need model = \"ladyzhenskaya\""
                    )));
                }
                section.nu_bar.unwrap_or(0.0)
            }
        };
        let pick = |own: Option<f64>, inherited: Option<f64>, default: f64| {
            own.or(inherited).unwrap_or(default)
        };
        let cfg = SolverConfig {
            model,
            nu: pick(section.nu, inherit.map(|c| c.nu), DEFAULT_NU),
            nu_bar,
            p: pick(section.p, None, DEFAULT_P),
            mu: section.mu.unwrap_or(default_mu),
            interpolant: self.interpolant,
            forcing: resolve_forcing(section, inherit.map(|c| c.forcing), self.grid.dim()),
            cfl: pick(section.cfl, inherit.map(|c| c.cfl), DEFAULT_CFL),
            dt_max: pick(section.dt_max, inherit.map(|c| c.dt_max), DEFAULT_DT_MAX),
            dt_min: pick(section.dt_min, inherit.map(|c| c.dt_min), DEFAULT_DT_MIN),
            t_end: self.t_end,
            picard_sweeps: section
                .picard_sweeps
                .or(inherit.map(|c| c.picard_sweeps))
                .unwrap_or(DEFAULT_PICARD_SWEEPS),
            picard_tol: pick(
                section.picard_tol,
                inherit.map(|c| c.picard_tol),
                DEFAULT_PICARD_TOL,
            ),
        };
        cfg.validate().map_err(|e| prefixed(prefix, e))?;
        Ok(cfg)
    }
}

fn prefixed(prefix: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => Error::InvalidParameter {
            name: format!("{prefix}.{name}"),
            reason,
        },
        other => other,
    }
}

fn resolve_interpolant(section: &ObservationSection) -> Result<InterpolantSpec> {
    let kind = section.kind.unwrap_or(InterpolantKind::FourierTruncation);
    let h = match (section.h, section.k_c) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "`observation.h` and `observation.k_c` are mutually exclusive".into(),
            ))
        }
        (Some(h), None) => h,
        (None, Some(kc)) => {
            if kc == 0 {
                return Err(Error::param("observation.k_c", "must be >= 1"));
            }
            1.0 / kc as f64
        }
        (None, None) => 1.0 / DEFAULT_K_C as f64,
    };
    let spec = InterpolantSpec { kind, h };
    spec.validate().map_err(|e| prefixed("observation", e))?;
    Ok(spec)
}

/// Parses and validates an experiment document, applying defaults.
pub fn parse_experiment(text: &str) -> Result<TwinExperiment> {
    resolve(&read_file(text)?)
}

/// Like [`parse_experiment`], with command-line overrides taking precedence
/// over file keys. Returns the `(key, value)` pairs that were overridden.
pub fn parse_with_overrides(
    text: &str,
    overrides: &Overrides,
) -> Result<(TwinExperiment, Vec<(String, String)>)> {
    let mut file = read_file(text)?;
    let applied = overrides.apply_to(&mut file);
    Ok((resolve(&file)?, applied))
}

fn read_file(text: &str) -> Result<ExperimentFile> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    check_keys(&table)?;
    table
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
}

fn resolve(file: &ExperimentFile) -> Result<TwinExperiment> {
    let grid = Grid::new(
        file.grid.dim.unwrap_or(DEFAULT_DIM),
        file.grid.n.unwrap_or(DEFAULT_N),
    )?;
    let interpolant = resolve_interpolant(&file.observation)?;
    interpolant
        .validate_for(grid)
        .map_err(|e| prefixed("observation", e))?;
    let h = &file.harness;
    let resolver = Resolver {
        grid,
        interpolant,
        t_end: h.t_end.unwrap_or(DEFAULT_T_END),
    };
    if file.reference.mu.is_some_and(|mu| mu != 0.0) {
        return Err(Error::param(
            "reference.mu",
            "the reference run is not nudged; mu must be 0",
        ));
    }
    let reference = resolver.solver("reference", &file.reference, Model::Nse, 0.0, None)?;
    let nudged = resolver.solver(
        "nudged",
        &file.nudged,
        Model::Ladyzhenskaya,
        DEFAULT_MU,
        Some(&reference),
    )?;
    let exp = TwinExperiment {
        grid,
        reference,
        nudged,
        initial: InitialSpec {
            k_peak: h.initial_k_peak.unwrap_or(DEFAULT_INITIAL_K_PEAK),
            amplitude: h.initial_amplitude.unwrap_or(DEFAULT_INITIAL_AMPLITUDE),
        },
        spinup_time: h.spinup_time.unwrap_or(DEFAULT_SPINUP_TIME),
        record_interval: h.record_interval.unwrap_or(DEFAULT_RECORD_INTERVAL),
        seed: h.seed.unwrap_or(DEFAULT_SEED),
        nudged_start: h.nudged_start.unwrap_or(NudgedStart::Zero),
        tail_fraction: h.tail_fraction.unwrap_or(DEFAULT_TAIL_FRACTION),
        extend_max_time: h.extend_max_time.unwrap_or(0.0),
    };
    exp.validate().map_err(|e| prefixed("harness", e))?;
    Ok(exp)
}

fn canonical_section(cfg: &SolverConfig, nudged: bool) -> ModelSection {
    ModelSection {
        model: Some(cfg.model),
        nu: Some(cfg.nu),
        nu_bar: Some(cfg.nu_bar),
        c_s: None,
        delta: None,
        p: Some(cfg.p),
        mu: nudged.then_some(cfg.mu),
        forcing: Some(cfg.forcing.kind),
        forcing_amplitude: Some(cfg.forcing.amplitude),
        forcing_wavenumber: Some(cfg.forcing.wavenumber),
        cfl: Some(cfg.cfl),
        dt_max: Some(cfg.dt_max),
        dt_min: Some(cfg.dt_min),
        picard_sweeps: Some(cfg.picard_sweeps),
        picard_tol: Some(cfg.picard_tol),
    }
}

/// Canonical document with every key spelled out; `nu_bar` replaces `c_s`.
pub fn serialize_experiment(exp: &TwinExperiment) -> Result<String> {
    let file = ExperimentFile {
        grid: GridSection {
            dim: Some(exp.grid.dim()),
            n: Some(exp.grid.n()),
        },
        reference: canonical_section(&exp.reference, false),
        nudged: canonical_section(&exp.nudged, true),
        observation: ObservationSection {
            kind: Some(exp.nudged.interpolant.kind),
            h: Some(exp.nudged.interpolant.h),
            k_c: None,
        },
        harness: HarnessSection {
            t_end: Some(exp.nudged.t_end),
            spinup_time: Some(exp.spinup_time),
            record_interval: Some(exp.record_interval),
            seed: Some(exp.seed),
            nudged_start: Some(exp.nudged_start),
            initial_k_peak: Some(exp.initial.k_peak),
            initial_amplitude: Some(exp.initial.amplitude),
            tail_fraction: Some(exp.tail_fraction),
            extend_max_time: Some(exp.extend_max_time),
        },
    };
    toml::to_string(&file).map_err(|e| Error::Config(e.to_string()))
}

/// Command-line overrides applied on top of the file keys.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub t_end: Option<f64>,
    pub resolution: Option<usize>,
    pub nu_bar: Option<f64>,
}

impl Overrides {
    fn apply_to(&self, file: &mut ExperimentFile) -> Vec<(String, String)> {
        let mut applied = Vec::new();
        if let Some(seed) = self.seed {
            file.harness.seed = Some(seed);
            applied.push(("harness.seed".to_string(), seed.to_string()));
        }
        if let Some(t_end) = self.t_end {
            file.harness.t_end = Some(t_end);
            applied.push(("harness.t_end".to_string(), t_end.to_string()));
        }
        if let Some(n) = self.resolution {
            file.grid.n = Some(n);
            applied.push(("grid.n".to_string(), n.to_string()));
        }
        if let Some(nu_bar) = self.nu_bar {
            file.nudged.nu_bar = Some(nu_bar);
            file.nudged.c_s = None;
            file.nudged.delta = None;
            applied.push(("nudged.nu_bar".to_string(), nu_bar.to_string()));
        }
        applied
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gets_defaults() {
        let exp = parse_experiment("").unwrap();
        assert_eq!(exp.grid, Grid::new(2, 128).unwrap());
        assert_eq!(exp.nudged.model, Model::Ladyzhenskaya);
        assert_eq!(exp.nudged.mu, 30.0);
        assert_eq!(exp.nudged.p, 3.0);
        assert!((exp.nudged.nu_bar - (0.17f64 / 128.0).powi(2)).abs() < 1e-20);
        assert_eq!(exp.reference.model, Model::Nse);
        assert_eq!(exp.reference.mu, 0.0);
        assert_eq!(exp.nudged.interpolant.cutoff(), 9);
        assert_eq!(exp.nudged_start, NudgedStart::Zero);
    }

    #[test]
    fn empty_nudged_section_uses_smagorinsky_defaults() {
        let exp = parse_experiment("[grid]\ndim = 3\nn = 256\n[nudged]\n").unwrap();
        assert!((exp.nudged.nu_bar - 4.41e-7).abs() < 1e-9);
        assert_eq!(exp.nudged.forcing.kind, ForcingKind::TaylorGreen3d);
        assert_eq!(exp.nudged.mu, 30.0);
    }

    #[test]
    fn bad_cfl_names_the_constraint() {
        let err = parse_experiment("[nudged]\ncfl = 1.5\n").unwrap_err().to_string();
        assert!(err.contains("cfl must be in (0,1]"), "{err}");
        assert!(err.contains("nudged.cfl"), "{err}");
    }

    #[test]
    fn unknown_key_gets_suggestion() {
        let err = parse_experiment("[nudged]\nnu_barr = 1e-6\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("nudged.nu_barr"), "{err}");
        assert!(err.contains("did you mean `nu_bar`"), "{err}");
        let err = parse_experiment("[harnes]\n").unwrap_err().to_string();
        assert!(err.contains("did you mean `harness`"), "{err}");
    }

    #[test]
    fn conflicting_keys_rejected() {
        assert!(parse_experiment("[nudged]\nnu_bar = 1e-6\nc_s = 0.1\n").is_err());
        assert!(parse_experiment("[observation]\nh = 0.1\nk_c = 9\n").is_err());
        assert!(parse_experiment("[reference]\nmu = 1.0\n").is_err());
        assert!(parse_experiment("[reference]\nc_s = 0.1\n").is_err());
    }

    #[test]
    fn canonical_round_trip() {
        let doc = "[grid]\nn = 64\n[nudged]\nc_s = 0.5\nnu = 2.75e-2\n[observation]\nkind = \"volume_average\"\nh = 0.125\n[harness]\nnudged_start = \"reference\"\nseed = 7\n";
        let exp = parse_experiment(doc).unwrap();
        let text = serialize_experiment(&exp).unwrap();
        let again = parse_experiment(&text).unwrap();
        assert_eq!(exp, again);
        assert_eq!(serialize_experiment(&again).unwrap(), text);
    }

    #[test]
    fn nudged_inherits_reference_physics() {
        let exp = parse_experiment(
            "[reference]\nnu = 1e-3\nforcing_amplitude = 0.7\nforcing_wavenumber = 3\n",
        )
        .unwrap();
        assert_eq!(exp.nudged.nu, 1e-3);
        assert_eq!(exp.nudged.forcing, exp.reference.forcing);
        assert_eq!(exp.nudged.forcing.wavenumber, 3);
    }

    #[test]
    fn overrides_win_over_file_keys() {
        let ov = Overrides {
            seed: Some(9),
            t_end: Some(2.0),
            resolution: Some(64),
            nu_bar: None,
        };
        let (out, applied) =
            parse_with_overrides("[harness]\nseed = 3\n", &ov).unwrap();
        assert_eq!(out.seed, 9);
        assert_eq!(out.nudged.t_end, 2.0);
        assert!((out.nudged.nu_bar - (0.17f64 / 64.0).powi(2)).abs() < 1e-20);
        assert_eq!(applied.len(), 3);
        let ov = Overrides {
            nu_bar: Some(1e-5),
            ..Default::default()
        };
        let (out, _) = parse_with_overrides("[nudged]\nc_s = 0.3\n", &ov).unwrap();
        assert_eq!(out.nudged.nu_bar, 1e-5);
    }
}
