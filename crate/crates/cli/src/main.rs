use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use reeb4::num::{parse_rat, Rat};
use reeb4::Error;

mod commands;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Face counts, symplectic verdict, 1-face census, volume, recentering.
    Analyze,
    /// Closed orbits within the given caps.
    Orbits,
    /// EHZ capacity with its minimizing orbits.
    Ehz,
    /// Systolic ratio.
    Sys,
    /// Capacities A_k below the action bound given by --action-max.
    Ak,
    /// Certify that every 2-face is tiled by orbits of minimal action.
    Zoll,
    /// Hill climbing for large systolic ratio.
    Search,
    /// Flow graph as JSON.
    Graph,
}

fn rational(s: &str) -> Result<Rat, String> {
    parse_rat(s).map_err(|e| format!("not a rational number: {}", e.0))
}

#[derive(Debug, Parser)]
#[command(name = "reeb4", version, about = "Closed Reeb orbits and symplectic capacities of polytopes in R⁴")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Polytope as JSON: {"vertices": [[..4 rationals..], ..]} or {"halfspaces": [{"normal": [..], "offset": q}, ..]}.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long = "action-max", global = true, value_parser = rational)]
    pub action_cap: Option<Rat>,
    #[arg(long = "rho-max", global = true, value_parser = rational)]
    pub rho_cap: Option<Rat>,
    #[arg(long = "max-segments", global = true)]
    pub max_segments: Option<usize>,
    #[arg(long = "per-3face-cap", global = true)]
    pub per_threeface_cap: Option<usize>,
    /// Largest k reported by `ak`.
    #[arg(long, global = true, default_value_t = 2)]
    pub k: i64,
    #[arg(long, global = true, default_value_t = reeb4::sp2::DEFAULT_TOL)]
    pub tol: f64,
    /// Perturb vertices by up to this amount until the polytope is symplectic.
    #[arg(long, global = true, value_parser = rational)]
    pub perturb: Option<Rat>,
    /// Denominator of perturbation offsets, and the coordinate grid of `search`.
    #[arg(long, global = true, default_value_t = 1000)]
    pub denominator: i64,
    /// Accept Lagrangian 2-faces and restrict to orbits avoiding them.
    #[arg(long = "avoid-lagrangian", global = true)]
    pub avoid_lagrangian: bool,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1000)]
    pub iters: usize,
    #[arg(long, global = true, value_parser = rational, default_value = "1/100")]
    pub step: Rat,
    #[arg(long, global = true, default_value_t = 1)]
    pub restarts: usize,
    /// Vertex count of random starting polytopes for `search` without --input.
    #[arg(long, global = true, default_value_t = 6)]
    pub vertices: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

pub mod exit {
    pub const OTHER: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const NON_SYMPLECTIC: u8 = 3;
    pub const DEGENERATE: u8 = 4;
    pub const POISONED: u8 = 5;
}

pub enum Failure {
    Usage(String),
    Run(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn code(f: &Failure) -> u8 {
    match f {
        Failure::Usage(_) => exit::USAGE,
        Failure::Run(Error::NonSymplectic(_) | Error::LagrangianFace(_)) => exit::NON_SYMPLECTIC,
        Failure::Run(Error::DegenerateInput(_) | Error::OriginOnBoundary | Error::Unbounded) => exit::DEGENERATE,
        Failure::Run(Error::AmbiguousClassification { .. }) => exit::POISONED,
        Failure::Run(_) | Failure::Io(_) => exit::OTHER,
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), Failure> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    let result = commands::run(&cfg).and_then(|out| {
        let rendered = match cfg.format {
            Format::Json => serde_json::to_string_pretty(&out.report).expect("serializable") + "\n",
            Format::Text => commands::render_text(&out.report),
        };
        emit(&cfg, &rendered)?;
        Ok(out.poisoned)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("warning: some orbits have undetermined rotation data");
            ExitCode::from(exit::POISONED)
        }
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Io(m) => eprintln!("error: {m}"),
                Failure::Run(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(code(&f))
        }
    }
}
