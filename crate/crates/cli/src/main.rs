//! `pqhyper`: command-line front end.
//!
//! Exit codes: 0 pass, 1 the checked condition fails, 2 usage or parse
//! error, 3 numeric failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;

#[derive(Parser)]
#[command(name = "pqhyper", version, about = "Check (P,Q) hypercontractivity conditions for the Mahler transform")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum of the local condition margin over t.
    CheckLocal {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        z: ZArg,
        #[command(flatten)]
        grid: GridArgs,
        /// Admissibility tolerance on the minimum margin.
        #[arg(long, default_value_t = pqhyper::conditions::ADMISSIBLE_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Local condition over a polar grid on the unit disk.
    ScanRegion {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Radial and angular resolution.
        #[arg(long = "grid", default_value_t = 100)]
        n: usize,
        /// Also write the cell table to this CSV file.
        #[arg(long)]
        csv_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Global margins for seeded random polynomials.
    VerifyGlobal {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        z: ZArg,
        #[arg(long, default_value_t = 4)]
        degree: u32,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Quadrature order per coordinate.
        #[arg(long, default_value_t = 64)]
        order: usize,
        /// Use perturbations `1 + eps·g` of the constant function.
        #[arg(long)]
        probe: bool,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monotonicity of the interpolating flow C(s).
    Flow {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        z: ZArg,
        #[command(flatten)]
        poly: PolyArg,
        /// Quadrature order per coordinate (default 64, or 24 in two dimensions).
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = pqhyper::flow::DEFAULT_S_POINTS)]
        spoints: usize,
        /// Relative tolerance on decreasing steps.
        #[arg(long, default_value_t = pqhyper::flow::FLOW_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The Hamming-cube map phi(k) beside the flow.
    Discrete {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        z: ZArg,
        #[command(flatten)]
        poly: PolyArg,
        /// Cube dimension.
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Largest radius of admissible imaginary z.
    Rstar {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The lens domain for Q = P.
    Lens {
        #[arg(long = "P", value_name = "SPEC")]
        p: String,
        /// Extra points to test, `re,im`.
        #[arg(long = "z", value_name = "RE,IM", allow_hyphen_values = true)]
        z: Vec<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct PairArgs {
    /// Function spec for P, e.g. `power(2)`, or `gen(h=...,phi=...)` for a
    /// generated pair.
    #[arg(long = "P", value_name = "SPEC")]
    p: String,
    /// Function spec for Q (omit with `gen`).
    #[arg(long = "Q", value_name = "SPEC")]
    q: Option<String>,
}

#[derive(Args)]
struct ZArg {
    /// The parameter z as `re,im`.
    #[arg(long = "z", value_name = "RE,IM", allow_hyphen_values = true)]
    z: String,
}

#[derive(Args)]
struct PolyArg {
    /// Polynomial, e.g. `1 + 0.5*H1` or `(1,0.2)*H{1,0} + x2^2`.
    #[arg(long, value_name = "POLY", allow_hyphen_values = true)]
    poly: String,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 1e-6)]
    tmin: f64,
    #[arg(long, default_value_t = 1e6)]
    tmax: f64,
    #[arg(long, default_value_t = 2000)]
    tpoints: usize,
}

#[derive(Args)]
struct OutArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report (the default).
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// CSV table instead of JSON, where the command has one.
    #[arg(long)]
    csv: bool,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    use commands as c;
    match cli.command {
        Command::CheckLocal { pair, z, grid, tol, out } => c::check_local(&pair, &z.z, &grid, tol, &out),
        Command::ScanRegion { pair, grid, n, csv_out, out } => c::scan_region(&pair, &grid, n, csv_out.as_deref(), &out),
        Command::VerifyGlobal {
            pair,
            z,
            degree,
            dim,
            trials,
            seed,
            order,
            probe,
            eps,
            tol,
            out,
        } => c::verify_global(
            &pair,
            &z.z,
            c::GlobalOptions {
                degree,
                dim,
                trials,
                seed,
                order,
                probe,
                eps,
                tol,
            },
            &out,
        ),
        Command::Flow {
            pair,
            z,
            poly,
            order,
            spoints,
            tol,
            out,
        } => c::flow(&pair, &z.z, &poly.poly, order, spoints, tol, &out),
        Command::Discrete {
            pair,
            z,
            poly,
            m,
            order,
            tol,
            out,
        } => c::discrete(&pair, &z.z, &poly.poly, m, order, tol, &out),
        Command::Rstar { pair, grid, out } => c::rstar(&pair, &grid, &out),
        Command::Lens { p, z, grid, out } => c::lens(&p, &z, &grid, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
