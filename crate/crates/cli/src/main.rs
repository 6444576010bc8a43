//! `centromesh` — build symmetry-aware meshes, assemble centrosymmetric
//! Poisson systems, verify their structure, and solve them at half cost.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use config::{resolve_seed, RunConfig, SolverChoice};

/// Exit codes: 0 success, 1 verification failure, 2 configuration error,
/// 3 numerical failure (singularity).
#[derive(Debug)]
pub enum CliError {
    Core(centromesh::Error),
    Config(String),
    Io(std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                centromesh::Error::NotCentrosymmetric(_) => 1,
                centromesh::Error::Singular(_)
                | centromesh::Error::SingularFactor { .. }
                | centromesh::Error::NonConvergence(_) => 3,
                _ => 2,
            },
            CliError::Config(_) => 2,
            CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<centromesh::Error> for CliError {
    fn from(e: centromesh::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DumpRows {
    /// Only fold-free stencil rows.
    Interior,
    /// Every row.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Centro,
    Dense,
}

impl SolverArg {
    fn choice(self) -> SolverChoice {
        match self {
            SolverArg::Centro => SolverChoice::Centro,
            SolverArg::Dense => SolverChoice::Dense,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "centromesh",
    version,
    about = "Centrosymmetric finite-difference Poisson toolkit: mesh numbering, assembly, \
             structure checks, and half-size block solves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the 3x3x4 worked example under both numberings and verify that
    /// only the centrosymmetric one yields a centrosymmetric matrix
    PaperExample {
        /// Output directory for matrices (MatrixMarket + CSV) and verdicts
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Print assembled rows of the centrosymmetric system
        #[arg(long, value_enum)]
        dump_rows: Option<DumpRows>,
    },
    /// Assemble the configured system and solve it
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured solver
        #[arg(long, value_enum)]
        solver: Option<SolverArg>,
        /// Override the configured output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the seed (beats CENTROMESH_SEED and the config)
        #[arg(long)]
        seed: Option<u64>,
        /// Also export the (B, C) blocks as A.B.mtx / A.C.mtx
        #[arg(long)]
        export_blocks: bool,
    },
    /// Check a MatrixMarket file for centrosymmetry
    Check {
        #[arg(long)]
        matrix: PathBuf,
        /// Absolute tolerance on mirrored entry pairs
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Time the dense solver against the split solver over the configured sizes
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the seed (beats CENTROMESH_SEED and the config)
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured size list, e.g. --sizes 256,512,1024
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
    /// Write the node table (index, coordinates, position, mirror index)
    MeshDump {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::PaperExample { out, dump_rows } => commands::paper_example(&out, dump_rows),
        Command::Solve {
            config,
            solver,
            out,
            seed,
            export_blocks,
        } => {
            let cfg = RunConfig::load(&config)?;
            let seed = resolve_seed(seed, cfg.seed)?;
            let mut resolved = cfg.resolve(seed)?;
            if let Some(choice) = solver {
                resolved.solver = choice.choice();
            }
            if let Some(dir) = out {
                resolved.out_dir = dir;
            }
            resolved.export_blocks |= export_blocks;
            commands::solve(&resolved)
        }
        Command::Check { matrix, tol } => commands::check(&matrix, tol),
        Command::Bench {
            config,
            out,
            seed,
            sizes,
        } => {
            let cfg = RunConfig::load(&config)?;
            let seed = resolve_seed(seed, cfg.seed)?;
            let sizes = sizes.unwrap_or_else(|| cfg.bench_sizes.clone());
            if sizes.is_empty() {
                return Err(CliError::Config(
                    "bench needs at least one size".to_string(),
                ));
            }
            let out_dir = out.unwrap_or_else(|| cfg.out_dir.clone());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            commands::bench(&sizes, seed, &out_dir, &mut rng)
        }
        Command::MeshDump { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let seed = resolve_seed(None, cfg.seed)?;
            let resolved = cfg.resolve(seed)?;
            commands::mesh_dump(&resolved, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
