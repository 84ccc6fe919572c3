//! `greensep`: constants tables, kernel builds, minimization runs and mesh studies.
//!
//! Exit codes: 0 when every check passes, 2 when a mathematical property check
//! fails, 1 on operational errors (bad input, I/O, solver failure).

mod mesh_cmd;
mod output;
mod points_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "greensep", version, about = "Green-energy separation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Table of C_M, the bound C_M (N-1)^(-1/n) and r_N.
    Constants(ConstantsArgs),
    /// Minimize the Green energy of N points and check the separation bounds.
    Minimize(MinimizeArgs),
    /// Build a kernel table and dump it on its grid.
    Kernel(KernelArgs),
    /// Harmonic balls on a triangle mesh: volume, MVP, nesting, connectedness, exclusion.
    MeshStudy(MeshStudyArgs),
    /// Write an icosphere or ellipsoid mesh as OFF.
    MeshGen(MeshGenArgs),
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Manifolds such as S^2, RP^3, CP^2, HP^1, OP^2 (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "S^2,S^3,RP^2,CP^2,HP^1,OP^2")]
    pub manifold: Vec<String>,
    /// Point counts: comma-separated values or inclusive ranges like 2..32.
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,10")]
    pub n: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    #[arg(long)]
    pub manifold: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// Kernel grid size; the manifold's default when omitted.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Gradient tolerance per point.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Output directory for the report, configuration and energy trace.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub manifold: String,
    #[arg(long)]
    pub grid: Option<usize>,
    /// Quadrature tolerance of the table construction.
    #[arg(long, default_value_t = greensep::kernel::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Output directory for kernel.json and kernel.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeshStudyArgs {
    /// OFF or OBJ file, or a generated mesh: icosphere:K or ellipsoid:A,B,C:K.
    #[arg(long)]
    pub mesh: String,
    /// Source vertex index.
    #[arg(long, default_value_t = 0)]
    pub p: usize,
    /// Ball volumes as fractions of the total area.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2,0.4")]
    pub a: Vec<f64>,
    /// Also minimize the discrete energy of N vertices and check exclusion.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// Obstacle solver tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Output directory for the report and per-ball vertex data.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeshGenArgs {
    /// icosphere or ellipsoid
    #[arg(long, default_value = "icosphere")]
    pub kind: String,
    #[arg(long, default_value_t = 3)]
    pub subdiv: u32,
    /// Semi-axes of the ellipsoid.
    #[arg(long, value_delimiter = ',', default_value = "1,1,0.6")]
    pub axes: Vec<f64>,
    /// OFF file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Whether every mathematical check of a command passed.
pub struct Outcome {
    pub checks_pass: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Constants(a) => points_cmd::constants(&a),
        Command::Minimize(a) => points_cmd::minimize(&a),
        Command::Kernel(a) => points_cmd::kernel(&a),
        Command::MeshStudy(a) => mesh_cmd::study(&a),
        Command::MeshGen(a) => mesh_cmd::generate(&a),
    };
    match result {
        Ok(Outcome { checks_pass: true }) => ExitCode::SUCCESS,
        Ok(Outcome { checks_pass: false }) => {
            eprintln!("greensep: a property check failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
