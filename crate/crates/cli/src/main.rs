//! `ncl`: run simulations, studies and the verification suite.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ncl_core::diagnostics::{emit_outputs, RunArtifacts};
use ncl_core::runner::{
    emit_config, run_study, verify_suite, Outcome, Study, VerifyOptions, DEFAULT_DELTAS, DEFAULT_EPSILONS,
};
use ncl_core::{parse_config, Background, Error, RunConfig, SpectralGrid};

const OUT_DIR_ENV: &str = "NCL_OUT_DIR";
const DEFAULT_OUT_ROOT: &str = "ncl-out";

#[derive(Parser)]
#[command(name = "ncl", version, about = "Pseudospectral needle-crystal laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir` and $NCL_OUT_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured initial data and write norms and snapshots.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Run the operator and solver verification suite.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Build grids with the wrong Hilbert sign.
        #[arg(long, hide = true)]
        flip_hilbert: bool,
    },
    /// Smoothing functional and its stability under refinement.
    Smoothing {
        #[command(flatten)]
        common: Common,
    },
    /// Richardson ratios along a decreasing list of viscosities.
    ViscosityLimit {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPSILONS)]
        eps: Vec<f64>,
    },
    /// Stability constant for perturbed initial data.
    Lipschitz {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_DELTAS)]
        deltas: Vec<f64>,
    },
    /// Successive Picard distance ratios on the first slab.
    Contraction {
        #[command(flatten)]
        common: Common,
        /// Force the slab length (in time units) instead of adapting it.
        #[arg(long, value_name = "T")]
        slab_dt: Option<f64>,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Error> {
    match path {
        None => parse_config(""),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.to_path_buf(),
                source: e,
            })?;
            parse_config(&text)
        }
    }
}

fn out_dir(common: &Common, cfg: Option<&RunConfig>, name: &str) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.and_then(|c| c.out_dir.clone()))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| Path::new(DEFAULT_OUT_ROOT).join(name))
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_numerical_abort() { 2 } else { 1 })
}

fn verify(common: &Common, n: usize, seed: Option<u64>, flip_hilbert: bool) -> Result<Outcome, Error> {
    let cfg = match &common.config {
        Some(p) => Some(load_config(Some(p))?),
        None => None,
    };
    let start = Instant::now();
    let opts = VerifyOptions {
        n,
        seed: seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(VerifyOptions::default().seed),
        flip_hilbert,
        ..VerifyOptions::default()
    };
    let report = verify_suite(opts);
    println!("{report}");
    let grid = SpectralGrid::new(opts.n, opts.length)?;
    let config_text = cfg.as_ref().map(emit_config).unwrap_or_default();
    let dir = out_dir(common, cfg.as_ref(), "verify");
    emit_outputs(
        &RunArtifacts {
            config_text: &config_text,
            background: &Background::flat(&grid),
            trajectory: None,
            report: &report,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
        &dir,
    )?;
    println!("wrote {}", dir.display());
    Ok(if report.passed() { Outcome::Success } else { Outcome::ThresholdFailure })
}

fn study(common: &Common, study: Study) -> Result<Outcome, Error> {
    let cfg = load_config(common.config.as_deref())?;
    let start = Instant::now();
    let run = run_study(&cfg, &study)?;
    println!("{}", run.report);
    if let Some(a) = run.trajectory.as_ref().and_then(|t| t.abort.as_ref()) {
        eprintln!("run aborted at t = {}: {}", a.t, a.reason);
    }
    let dir = out_dir(common, Some(&cfg), study.name());
    emit_outputs(
        &RunArtifacts {
            config_text: &run.config_text,
            background: &run.background,
            trajectory: run.trajectory.as_ref(),
            report: &run.report,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
        &dir,
    )?;
    println!("wrote {}", dir.display());
    Ok(run.outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate { common } => study(&common, Study::Simulate),
        Command::Verify {
            common,
            n,
            seed,
            flip_hilbert,
        } => verify(&common, n, seed, flip_hilbert),
        Command::Smoothing { common } => study(&common, Study::Smoothing),
        Command::ViscosityLimit { common, eps } => study(&common, Study::ViscosityLimit { epsilons: eps }),
        Command::Lipschitz { common, deltas } => study(&common, Study::Lipschitz { deltas }),
        Command::Contraction { common, slab_dt } => study(&common, Study::Contraction { slab_dt }),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => fail(&e),
    }
}
