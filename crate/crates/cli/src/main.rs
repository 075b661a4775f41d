mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Spectral probes for radial magnetic Dirac operators with a potential.
#[derive(Parser, Debug)]
#[command(name = "magdirac", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for CSV files and manifest.json; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Truncation radius R.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Number of cells N on [0, R].
    #[arg(long)]
    pub cells: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ProbeArgs {
    /// Radii for the accumulation probe.
    #[arg(long, value_delimiter = ',', default_value = "8,12,16,20")]
    pub radii: Vec<f64>,
    /// Half-width E of the counting window (-E, E).
    #[arg(long, default_value_t = 1.0)]
    pub energy: f64,
    /// Cells per unit radius.
    #[arg(long, default_value_t = 40.0)]
    pub density: f64,
    /// Fixed sector range `a..b`; adaptive scan when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub sectors: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Regime label of a power-law spec, optionally with the accumulation probe.
    Classify {
        #[arg(long)]
        spec: PathBuf,
        /// Also count eigenvalues in (-E, E) for growing radii.
        #[arg(long)]
        probe: bool,
        #[command(flatten)]
        probe_args: ProbeArgs,
    },
    /// Eigenvalues of the sector operators in a window.
    Spectrum {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, allow_hyphen_values = true, default_value = "-5..5")]
        sectors: String,
        /// Window `lo,hi`.
        #[arg(long, allow_hyphen_values = true, default_value = "-3,3")]
        window: String,
        /// Bisection tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Report the half-gap around zero instead of a window listing.
        #[arg(long)]
        gap: bool,
    },
    /// Residuals of the localized Landau-level sequence.
    Quasimode {
        /// Field spec; not needed with --ladder.
        #[arg(long, required_unless_present = "ladder")]
        spec: Option<PathBuf>,
        /// Norm check of the ladder state for `p,B,V` instead of residuals; repeatable.
        #[arg(long, conflicts_with_all = ["centers", "count"])]
        ladder: Vec<String>,
        /// `thm3a` (fixed ladder index k) or `thm3` (index n at the n-th center).
        #[arg(long, default_value = "thm3a")]
        variant: String,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long)]
        eps: Option<f64>,
        /// Number of centers searched on the ray.
        #[arg(long, default_value_t = 4)]
        count: usize,
        /// Explicit distances of the centers along the ray instead of a search.
        #[arg(long, value_delimiter = ',')]
        centers: Option<Vec<f64>>,
        /// Ray direction `x,y`.
        #[arg(long, allow_hyphen_values = true, default_value = "1,0")]
        direction: String,
    },
    /// Zero-mode identities and, with --bound, the bounded-subspace check.
    Zeromode {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 10)]
        max_degree: u32,
        /// Finite-difference step for ‖dΩ‖.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long)]
        bound: bool,
    },
    /// Coercivity ratio min ‖h_j ψ‖ / ‖v ψ‖ per sector.
    Coercivity {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, allow_hyphen_values = true, default_value = "-3..3")]
        sectors: String,
    },
    /// Regime labels over a (t, s) lattice or a list of points.
    Sweep {
        #[arg(long, default_value_t = 1.0)]
        v0: f64,
        #[arg(long, default_value_t = 1.0)]
        b0: f64,
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
        /// Point `V0,B0,t,s`; repeatable, replaces the lattice.
        #[arg(long = "point")]
        points: Vec<String>,
        /// Run the accumulation probe at each point.
        #[arg(long)]
        probe: bool,
        #[command(flatten)]
        probe_args: ProbeArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            eprintln!("code=E_USAGE");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(u) = e.downcast_ref::<commands::UserError>() {
                eprintln!("code={} {}", u.code, u.message);
                ExitCode::from(2)
            } else if let Some(lib) = e.downcast_ref::<magdirac::Error>() {
                eprintln!("code={} {lib}", lib.code());
                ExitCode::from(2)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}
