use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod figures;
mod svg;
mod table;

use config::{merge, ConfigFile, Format, Grid, IntList, Params, PrecisionArg};
use figures::FigureId;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Compute(raney_spectra::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("acceptance suite failed")]
    Acceptance,
}

impl From<raney_spectra::Error> for CliError {
    fn from(e: raney_spectra::Error) -> Self {
        use raney_spectra::Error as E;
        match e {
            // precondition violations are usage errors
            E::Domain(m) | E::Validation(m) | E::UnsupportedRange(m) => CliError::Usage(m),
            other => CliError::Compute(other),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Compute(_) | CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Acceptance => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "raney-spectra", version, about = "Raney numbers, weighted Gram spectra and hypergeometric continuation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Args, Default)]
struct Common {
    /// Symmetry order: 3, 2..6 or 2,3,5.
    #[arg(long, global = true)]
    s: Option<IntList>,
    /// Index p, same list syntax as --s.
    #[arg(long, global = true)]
    p: Option<IntList>,
    /// Sector 1 ≤ q ≤ s.
    #[arg(long, global = true)]
    q: Option<u32>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Truncation size (block dimension, series length or Jacobi depth).
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    zeta: Option<f64>,
    /// ζ/ζ_c.
    #[arg(long, global = true)]
    zeta_ratio: Option<f64>,
    /// a:b:n with optional ,log or ,log1m spacing.
    #[arg(long, global = true)]
    grid: Option<Grid>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file (figure: directory). Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, value_enum)]
    precision: Option<PrecisionArg>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// key=value file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Above,
    Below,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Args, Clone, Copy, Default)]
pub struct Point {
    /// Real part of u = ζ².
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<f64>,
    /// Imaginary part of u.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub im: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ζ_c, ζ_univ and their ratio as exact rationals.
    Thresholds,
    /// Raney numbers R_{s,p}(n) for n ≤ N.
    Raney,
    /// Gram weights σ_p(ζ).
    Sigma,
    /// Hessian coefficients for m, n ≤ N.
    Hessian,
    /// Entries of the weighted Gram block G̃.
    Block,
    /// Leading eigenvalues along a ζ/ζ_c grid.
    Spectrum {
        #[arg(long, default_value_t = 6)]
        k: usize,
    },
    /// Affine fit of μ_1 against L.
    StiffFit,
    /// Soft spectrum after removing the stiff direction.
    Soft {
        #[arg(long, default_value_t = 6)]
        k: usize,
    },
    /// Alignment of the top eigenvector with the spike direction.
    Align,
    /// Continues 𝒢_p to a point u of the cut plane.
    Continue {
        #[command(flatten)]
        point: Point,
        #[arg(long, value_enum, default_value_t = SideArg::None)]
        side: SideArg,
    },
    /// Discontinuity density ρ_p on a grid of u/ζ_c² > 1.
    Rho,
    /// Fits the resonant coefficient B at the branch point.
    ResonantFit,
    /// Exact Jacobi coefficients from the moments.
    Jacobi,
    /// Weyl function of the truncated Jacobi operator.
    Weyl {
        #[command(flatten)]
        point: Point,
    },
    /// Perron density on a grid of t·ζ_c² in (0, 1).
    Density,
    /// Writes the data (and optionally SVG) behind a figure.
    Figure {
        #[arg(value_enum)]
        id: FigureId,
    },
    /// Runs the acceptance suite.
    Selftest {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
    },
}

fn resolve(c: Common) -> Result<Params, CliError> {
    let cfg = match &c.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    Ok(Params {
        s: merge(c.s, &cfg, "s")?.map(|l: IntList| l.0),
        p: merge(c.p, &cfg, "p")?.map(|l: IntList| l.0),
        q: merge(c.q, &cfg, "q")?,
        beta: merge(c.beta, &cfg, "beta")?,
        n: merge(c.n, &cfg, "n")?,
        zeta: merge(c.zeta, &cfg, "zeta")?,
        zeta_ratio: merge(c.zeta_ratio, &cfg, "zeta-ratio")?,
        grid: merge(c.grid, &cfg, "grid")?,
        tol: merge(c.tol, &cfg, "tol")?,
        out: merge(c.out.map(|p| p.display().to_string()), &cfg, "out")?.map(PathBuf::from),
        format: merge(c.format, &cfg, "format")?.unwrap_or(Format::Csv),
        precision: merge(c.precision, &cfg, "precision")?,
        threads: merge(c.threads, &cfg, "threads")?,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let params = resolve(cli.common)?;
    if let Some(t) = params.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    commands::dispatch(&cli.cmd, &params)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help and version exit 0, parse errors exit 2
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
