//! Batch driver for the trace-set toolkit: configuration ingestion,
//! subcommand dispatch, and deterministic report emission.
//!
//! Exit codes: 0 success, 1 verification failure (a checked property did
//! not hold) or runtime error, 2 usage/configuration error, 3 resource cap.

mod commands;
mod formats;
mod reports;
mod sieve_cache;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "sl2trace", version, about = "Exact trace-set statistics for subgroups of SL(2,R)")]
struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for randomized solves and fixtures (recorded in every report).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate a word ball, build the trace set, and report f(n).
    TraceGrowth(TraceGrowthArgs),
    /// Check the reduced-form and GCD plateau properties of a QRS.
    QrsVerify(QrsVerifyArgs),
    /// Density, counting, and intersection of Z-affine subspaces.
    ZaffineDensity(ZaffineDensityArgs),
    /// Centered prime-reciprocal sums S(x, a, m).
    Dirichlet(DirichletArgs),
    /// Build the A(n, l) trace family for a rational matrix.
    FamilyBuild(FamilyBuildArgs),
    /// Takeuchi, structure, and square-free-class diagnostics on a spec.
    ArithCheck(ArithCheckArgs),
    /// Fricke embedding, tail solve, orbit counts, and collision scan.
    Fricke(FrickeArgs),
}

#[derive(Args, Clone)]
pub struct TraceGrowthArgs {
    /// Group specification JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Word-length cutoff.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Largest n for the f(n) table.
    #[arg(long)]
    nmax: Option<u64>,
    /// Cap on distinct projective elements.
    #[arg(long)]
    cap: Option<usize>,
    /// csv (default) or json.
    #[arg(long)]
    format: Option<String>,
    /// Output path (stdout when omitted; CSV metadata lands in
    /// <out>.meta.json, or on stderr in stdout mode).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct QrsVerifyArgs {
    /// JSON input {a, F0, F1, horizon, pair:{G0,G1}?}.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Verification horizon (default 120).
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct ZaffineDensityArgs {
    /// Offset of the first space, "p/q".
    #[arg(long)]
    x: Option<String>,
    /// Period of the first space, "p/q" or "inf".
    #[arg(long)]
    y: Option<String>,
    /// Offset of an optional second space (enables intersection).
    #[arg(long)]
    x2: Option<String>,
    /// Period of the optional second space.
    #[arg(long)]
    y2: Option<String>,
    /// Interval for exact counting.
    #[arg(long)]
    lo: Option<i64>,
    #[arg(long)]
    hi: Option<i64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct DirichletArgs {
    /// One or more x values (comma separated).
    #[arg(long, value_delimiter = ',')]
    x: Option<Vec<u64>>,
    /// Residue a with gcd(a, m) = 1.
    #[arg(long)]
    a: Option<u64>,
    /// Modulus m ≥ 1.
    #[arg(long)]
    m: Option<u64>,
    /// Write CSV rows (x,a,m,s) to this path instead of the JSON report.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct FamilyBuildArgs {
    /// Spec JSON file; the first generator is the matrix A.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// β² (defaults to the spec's N, then 1).
    #[arg(long)]
    beta2: Option<u64>,
    /// First power index.
    #[arg(long)]
    nmin: Option<usize>,
    /// Last power index.
    #[arg(long)]
    nmax: Option<usize>,
    /// Upper bound on the prime witness l·S + T.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct ArithCheckArgs {
    /// Group specification JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Field for the integrality check: "rational" or "quadratic:D"
    /// (defaults to the spec's field).
    #[arg(long)]
    field: Option<String>,
    /// Word-length cutoff for the trace sample.
    #[arg(long = "ball-length")]
    ball_length: Option<usize>,
    /// Structure-check denominator (defaults to the spec's N).
    #[arg(long = "N")]
    n: Option<u64>,
    /// Cap on distinct projective elements.
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct FrickeArgs {
    /// Fricke coordinates JSON file {g, triples, tail?}.
    #[arg(long)]
    coords: Option<PathBuf>,
    /// Orbit radius.
    #[arg(long)]
    rmax: Option<f64>,
    /// Element cap for the trace collision scan.
    #[arg(long)]
    cap: Option<usize>,
    /// Number of count radii between 0 and rmax.
    #[arg(long)]
    radii: Option<usize>,
    /// Collision / dedup tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Write the (R, N) table as CSV to this path.
    #[arg(long = "out-csv")]
    out_csv: Option<PathBuf>,
    /// Write the JSON summary to this path (stdout when omitted).
    #[arg(long = "out-json")]
    out_json: Option<PathBuf>,
}

/// Config-file schema: the union of the numeric/path knobs of all
/// subcommands. Unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub spec: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub coords: Option<PathBuf>,
    pub l: Option<usize>,
    pub nmax: Option<u64>,
    pub nmin: Option<usize>,
    pub cap: Option<usize>,
    pub horizon: Option<usize>,
    pub budget: Option<u64>,
    pub beta2: Option<u64>,
    pub x: Option<Vec<u64>>,
    pub a: Option<u64>,
    pub m: Option<u64>,
    pub rmax: Option<f64>,
    pub radii: Option<usize>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub ball_length: Option<usize>,
    pub n: Option<u64>,
    pub field: Option<String>,
}

/// A failure carrying its process exit code.
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: anyhow::Error) -> Failure {
        Failure { code: 2, error }
    }

    pub fn verification(msg: String) -> Failure {
        Failure { code: 1, error: anyhow::anyhow!(msg) }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Failure {
        let error: anyhow::Error = e.into();
        let code = match error.downcast_ref::<sl2trace_core::Error>() {
            Some(sl2trace_core::Error::ResourceCap { .. }) => 3,
            _ => 1,
        };
        Failure { code, error }
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<ConfigFile, Failure> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                Failure::usage(anyhow::anyhow!("cannot read config {}: {e}", p.display()))
            })?;
            serde_json::from_str(&text).map_err(|e| {
                Failure::usage(anyhow::anyhow!("invalid config {}: {e}", p.display()))
            })
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let config = match load_config(cli.config.as_ref()) {
        Ok(c) => c,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            std::process::exit(f.code);
        }
    };
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let result = match cli.command {
        Command::TraceGrowth(args) => commands::trace_growth(args, &config, seed),
        Command::QrsVerify(args) => commands::qrs_verify(args, &config, seed),
        Command::ZaffineDensity(args) => commands::zaffine_density(args, &config, seed),
        Command::Dirichlet(args) => commands::dirichlet(args, &config, seed),
        Command::FamilyBuild(args) => commands::family_build(args, &config, seed),
        Command::ArithCheck(args) => commands::arith_check(args, &config, seed),
        Command::Fricke(args) => commands::fricke(args, &config, seed),
    };
    if let Err(f) = result {
        eprintln!("error: {:#}", f.error);
        std::process::exit(f.code);
    }
}
