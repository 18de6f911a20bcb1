use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nles::config::{self, Overrides};
use nles::harness::{self, ErrorMetric, TwinExperiment};
use nles::init::random_band_limited;
use nles::interpolant;
use nles::output;
use nles::solver::{self, SimState, Stepper};
use nles::spectral::{self, read_checkpoint, write_checkpoint, Checkpoint, LAMBDA1};
use nles::Error;

#[derive(Parser)]
#[command(name = "nles", version, about = "Nudged LES twin experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment file (TOML).
    experiment: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    resolution: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Reference run only; writes checkpoints and energy spectra.
    Dns {
        #[command(flatten)]
        common: Common,
        /// Continue from a checkpoint instead of the seeded initial state.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Simulated time between checkpoints (defaults to the record interval).
        #[arg(long)]
        checkpoint_interval: Option<f64>,
    },
    /// Full twin experiment; writes the error series.
    Twin {
        #[command(flatten)]
        common: Common,
    },
    /// One twin run per nu_bar value, then a power-law fit of the plateaus.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long = "nu-bar", value_delimiter = ',', required = true)]
        nu_bar: Vec<f64>,
        /// Concurrent runs.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Report the synchronization conditions and interpolant constants.
    Validate {
        experiment: PathBuf,
        #[arg(long)]
        resolution: Option<usize>,
        /// Random fields used to estimate interpolant constants.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Brute-force oracle suites.
    Oracle {
        /// convolution, taylor_green, tail_sum or all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

/// Failure that maps to a specific exit code.
#[derive(Debug)]
struct Exit(u8);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "exit {}", self.0)
    }
}

impl std::error::Error for Exit {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Ok(threads) = std::env::var("NLES_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    warn!("NLES_THREADS ignored: {e}");
                }
            }
            _ => warn!("NLES_THREADS must be a positive integer, got `{threads}`"),
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(Exit(code)) = e.downcast_ref::<Exit>() {
                return ExitCode::from(*code);
            }
            eprintln!("error: {e:#}");
            let divergence = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::Divergence { .. })));
            ExitCode::from(if divergence { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Dns {
            common,
            resume,
            checkpoint_interval,
        } => cmd_dns(&common, resume.as_deref(), checkpoint_interval),
        Command::Twin { common } => cmd_twin(&common),
        Command::Sweep {
            common,
            nu_bar,
            jobs,
        } => cmd_sweep(&common, &nu_bar, jobs),
        Command::Validate {
            experiment,
            resolution,
            samples,
            seed,
        } => cmd_validate(&experiment, resolution, samples, seed),
        Command::Oracle { suite } => cmd_oracle(&suite),
    }
}

fn load(
    path: &Path,
    overrides: &Overrides,
) -> anyhow::Result<(TwinExperiment, Vec<(String, String)>)> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    config::parse_with_overrides(&text, overrides)
        .with_context(|| format!("in experiment file {}", path.display()))
}

fn load_common(common: &Common, nu_bar: Option<f64>) -> anyhow::Result<(TwinExperiment, Vec<(String, String)>)> {
    let overrides = Overrides {
        seed: common.seed,
        t_end: common.t_end,
        resolution: common.resolution,
        nu_bar,
    };
    let (exp, applied) = load(&common.experiment, &overrides)?;
    fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    let mut echo = vec![(
        "experiment".to_string(),
        common.experiment.display().to_string(),
    )];
    echo.extend(applied.into_iter().map(|(k, v)| (format!("override.{k}"), v)));
    Ok((exp, echo))
}

fn cmd_dns(common: &Common, resume: Option<&Path>, interval: Option<f64>) -> anyhow::Result<()> {
    let (exp, echo) = load_common(common, None)?;
    let stepper = Stepper::new(exp.reference, exp.grid)?;
    let t_final = exp.spinup_time + exp.reference.t_end;
    let mut state = match resume {
        Some(path) => {
            let file =
                File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let ckpt = read_checkpoint(BufReader::new(file))
                .with_context(|| format!("reading checkpoint {}", path.display()))?;
            let t = ckpt.time;
            SimState::new(ckpt.into_vector()?, t)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
            let u0 = nles::init::random_solenoidal(
                exp.grid,
                exp.initial.k_peak,
                exp.initial.amplitude,
                &mut rng,
            );
            SimState::new(u0, 0.0)
        }
    };
    let interval = interval.unwrap_or(exp.record_interval);
    if !(interval > 0.0) {
        bail!("--checkpoint-interval must be > 0");
    }
    let mut meta = echo;
    meta.push(("grid".into(), exp.grid.to_string()));
    meta.push(("seed".into(), exp.seed.to_string()));
    meta.push(("nu".into(), exp.reference.nu.to_string()));
    meta.push(("model".into(), exp.reference.model.name().into()));
    let mut index = (state.t / interval).round() as u64;
    while state.t < t_final - 1e-12 {
        let target = ((index + 1) as f64 * interval).min(t_final);
        state = stepper.run_free(state, target)?;
        index += 1;
        let ckpt_path = common.out.join(format!("checkpoint_{index:05}.bin"));
        let file = File::create(&ckpt_path)
            .with_context(|| format!("creating {}", ckpt_path.display()))?;
        write_checkpoint(
            BufWriter::new(file),
            &Checkpoint::from_vector(state.t, &state.v),
        )?;
        let mut m = meta.clone();
        m.push(("t".into(), state.t.to_string()));
        let spec_path = common.out.join(format!("spectrum_{index:05}.csv"));
        output::write_spectrum(&spectral::energy_spectrum(&state.v), &m, &spec_path)?;
        info!(
            "t = {:.4}  |u| = {:.6e}  max|u| = {:.4}",
            state.t,
            state.v.l2_norm(),
            state.v.max_speed()
        );
    }
    println!("dns finished at t = {} ({} steps)", state.t, state.step_count);
    Ok(())
}

fn cmd_twin(common: &Common) -> anyhow::Result<()> {
    let (exp, echo) = load_common(common, None)?;
    let mut series = harness::run_twin(&exp)?;
    series.metadata.splice(0..0, echo);
    let path = common.out.join("series.csv");
    output::write_series(&series, &path)?;
    println!(
        "final t = {}  l2_rel = {:e}  h1_rel = {:e}  -> {}",
        series.times.last().copied().unwrap_or(0.0),
        series.last(ErrorMetric::L2Rel).unwrap_or(f64::NAN),
        series.last(ErrorMetric::H1Rel).unwrap_or(f64::NAN),
        path.display()
    );
    Ok(())
}

fn cmd_sweep(common: &Common, nu_bars: &[f64], jobs: Option<usize>) -> anyhow::Result<()> {
    harness::validate_sweep_values(nu_bars)?;
    let (exp, echo) = load_common(common, None)?;
    let result = match jobs {
        Some(0) => bail!("--jobs must be >= 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| harness::nu_bar_sweep(&exp, nu_bars))?,
        None => harness::nu_bar_sweep(&exp, nu_bars)?,
    };
    let mut summary = String::new();
    for (k, v) in &echo {
        summary.push_str(&format!("# {k} = {v}\n"));
    }
    summary.push_str(&format!("# slope = {:e}\n", result.slope));
    summary.push_str("nu_bar,plateau\n");
    for (i, (nu_bar, series)) in result.nu_bars.iter().zip(&result.series).enumerate() {
        let mut s = series.clone();
        s.metadata.splice(0..0, echo.clone());
        output::write_series(&s, &common.out.join(format!("series_{i:02}.csv")))?;
        summary.push_str(&format!("{nu_bar:e},{:e}\n", result.plateaus[i]));
        println!("nu_bar = {nu_bar:e}  plateau = {:e}", result.plateaus[i]);
    }
    let path = common.out.join("sweep_summary.csv");
    fs::write(&path, summary).with_context(|| format!("writing {}", path.display()))?;
    println!("slope of log(plateau) vs log(nu_bar) = {:.4}", result.slope);
    Ok(())
}

fn cmd_validate(
    path: &Path,
    resolution: Option<usize>,
    samples: usize,
    seed: u64,
) -> anyhow::Result<()> {
    let overrides = Overrides {
        resolution,
        ..Default::default()
    };
    let (exp, _) = load(path, &overrides)?;
    let cfg = &exp.nudged;
    let stepper = Stepper::new(*cfg, exp.grid)?;
    let g = solver::grashof(stepper.forcing(), cfg.nu, LAMBDA1)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = (exp.grid.n() as i64 - 1) / 3;
    let fields: Vec<_> = (0..samples.max(1))
        .map(|_| random_band_limited(exp.grid, kmax, &mut rng))
        .collect();
    let constants = interpolant::estimate_constants(&cfg.interpolant, &fields)?;
    let c0 = cfg.interpolant.known_c0().or(Some(constants.c0));
    let report = solver::validate_da_conditions(cfg, exp.grid.dim(), g, c0);

    println!("grid {}  model {}  nu = {}  nu_bar = {:e}  p = {}  mu = {}", exp.grid, cfg.model.name(), cfg.nu, cfg.effective_nu_bar(), cfg.p, cfg.mu);
    println!(
        "interpolant {} h = {}  observed modes = {}",
        cfg.interpolant.kind.name(),
        cfg.interpolant.h,
        cfg.interpolant.observed_mode_count(exp.grid)
    );
    println!("Grashof G = {:e}", report.grashof);
    println!(
        "empirical constants over {} fields: c_I = {:.6}  c0 = {:.6}",
        fields.len(),
        constants.c_i,
        constants.c0
    );
    for check in &report.checks {
        println!(
            "[{:>4}] {:<26} lhs = {:<12.6e} rhs = {:.6e}",
            check.status.label(),
            check.name,
            check.lhs,
            check.rhs
        );
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    Ok(())
}

fn cmd_oracle(suite: &str) -> anyhow::Result<()> {
    let reports = nles::oracle::run_suite(suite)?;
    let mut failed = 0;
    for r in &reports {
        println!(
            "{} [{}] {}: measured {:e}, bound {:e}",
            if r.passed { "PASS" } else { "FAIL" },
            r.suite,
            r.check,
            r.measured,
            r.bound
        );
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} oracle check(s) failed");
        return Err(Exit(1).into());
    }
    Ok(())
}
