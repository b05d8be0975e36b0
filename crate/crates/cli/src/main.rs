//! `holonomy` — connection, curvature, holonomy gates and holonomy-algebra
//! rank probes for the optical qubit models.
//!
//! Exit codes: 0 success, 2 invalid input, 3 tolerance or accuracy
//! failure, 4 resource budget exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holonomy_core::optics::ModelKind;
use holonomy_core::runner::{self, JobConfig, JobOutcome};
use holonomy_core::Error;

#[derive(Parser, Debug)]
#[command(name = "holonomy", version, about = "Holonomic gates of optical qubit models")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// two_qubit, n_qubit:N or single_mode (default: the loop file's model, else two_qubit)
    #[arg(long, global = true)]
    model: Option<String>,
    /// Fock levels kept per mode
    #[arg(long, global = true, default_value_t = 16)]
    cutoff: usize,
    /// Path pieces for holonomies
    #[arg(long, global = true, default_value_t = 4096)]
    segments: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Report file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override, e.g. `--tol unitarity=1e-9` (repeatable)
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Largest allowed |parameter|
    #[arg(long, global = true)]
    param_limit: Option<f64>,
    /// Largest allowed Fock-space dimension
    #[arg(long, global = true)]
    budget: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Connection components A_μ at a point
    Connection {
        /// Coordinate assignment, e.g. `--point alpha1_re=0.1` (repeatable; others are 0)
        #[arg(long = "point", value_name = "NAME=VALUE")]
        point: Vec<String>,
    },
    /// Path-ordered holonomy around a loop file
    Holonomy {
        #[arg(long = "loop", value_name = "FILE")]
        loop_file: PathBuf,
    },
    /// Curvature component F_{μν} at a point
    Curvature {
        #[arg(long = "point", value_name = "NAME=VALUE")]
        point: Vec<String>,
        /// Coordinate pair, e.g. `--pair alpha1_re,alpha1_im`
        #[arg(long, value_name = "MU,NU")]
        pair: String,
    },
    /// Estimate the dimension of the holonomy Lie algebra
    RankProbe {
        /// Base point of the sampling ball
        #[arg(long = "point", value_name = "NAME=VALUE")]
        point: Vec<String>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Plaquette size
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Gate convergence over increasing cutoffs
    Sweep {
        #[arg(long = "loop", value_name = "FILE")]
        loop_file: PathBuf,
        /// Ascending cutoffs
        #[arg(long, value_delimiter = ',', default_value = "8,12,16,24")]
        cutoffs: Vec<usize>,
    },
}

fn config(common: &Common, model: ModelKind) -> Result<JobConfig, Error> {
    let mut c = JobConfig {
        model,
        cutoff: common.cutoff,
        n_segments: common.segments,
        out: common.out.clone(),
        seed: common.seed,
        ..JobConfig::default()
    };
    if let Some(l) = common.param_limit {
        c.param_limit = l;
    }
    if let Some(b) = common.budget {
        c.dim_budget = b;
    }
    for t in &common.tol {
        c.tolerances.apply_override(t)?;
    }
    c.validate()?;
    Ok(c)
}

fn model(common: &Common, fallback: Option<ModelKind>) -> Result<ModelKind, Error> {
    match &common.model {
        Some(m) => m.parse(),
        None => Ok(fallback.unwrap_or(ModelKind::TwoQubit)),
    }
}

fn run(cli: &Cli) -> Result<JobOutcome, Error> {
    let common = &cli.common;
    match &cli.command {
        Command::Connection { point } => {
            let c = config(common, model(common, None)?)?;
            runner::run_connection_report(&c, &runner::parse_point(c.model, point)?)
        }
        Command::Holonomy { loop_file } => {
            let path = runner::parse_loop_file(loop_file)?;
            let c = config(common, model(common, Some(path.model()))?)?;
            runner::run_holonomy_job(&c, &path)
        }
        Command::Curvature { point, pair } => {
            let c = config(common, model(common, None)?)?;
            let (mu, nu) = pair
                .split_once(',')
                .ok_or_else(|| Error::Validation(format!("--pair expects MU,NU, got `{pair}`")))?;
            runner::run_curvature_report(&c, &runner::parse_point(c.model, point)?, mu.trim(), nu.trim())
        }
        Command::RankProbe { point, samples, eps } => {
            let mut c = config(common, model(common, None)?)?;
            c.samples = *samples;
            if let Some(e) = eps {
                c.eps = *e;
            }
            c.validate()?;
            runner::run_rank_probe(&c, &runner::parse_point(c.model, point)?)
        }
        Command::Sweep { loop_file, cutoffs } => {
            let path = runner::parse_loop_file(loop_file)?;
            let c = config(common, model(common, Some(path.model()))?)?;
            runner::run_convergence_sweep(&c, &path, cutoffs)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|o| {
        o.write(cli.common.out.as_deref())?;
        Ok(o)
    });
    match outcome {
        Ok(o) if o.passed() => ExitCode::SUCCESS,
        Ok(o) => {
            for c in o.failures() {
                eprintln!("tolerance check failed: {c}");
            }
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
