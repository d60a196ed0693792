//! Command-line front door: parse inputs, orchestrate the measure
//! pipelines, and emit machine-readable reports.
//!
//! Exit codes: 0 when every check in the run passed, 1 when a check failed
//! (the itemized report is still emitted), 2 on input errors.

mod cmd_cex;
mod cmd_measure;
mod cmd_shift;
mod config;
mod io;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "psfm",
    about = "Discrete positive sesquilinear form measures: dilations, decompositions, densities, shifts, and spectral expansions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Rank tolerance for the Gram–Schmidt zero test.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,

    /// Positivity tolerance for form validation.
    #[arg(long, global = true)]
    tol_psd: Option<f64>,

    /// Verification tolerance (env PSFM_TOL overrides).
    #[arg(long, global = true)]
    tol_verify: Option<f64>,

    /// Weight sequence: "dyadic" or an explicit comma list.
    #[arg(long, global = true)]
    alphas: Option<String>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Seed echoed into reports for reproducibility.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Defer atom positivity validation to the verify stage.
    #[arg(long, global = true)]
    no_validate: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify the Naimark dilation of a measure file.
    Dilate { file: PathBuf },
    /// Pointwise rank decomposition of a measure file.
    Diagonalize { file: PathBuf },
    /// Full pipeline verification: dilation, direct integral, densities.
    Verify { file: PathBuf },
    /// Spectral-vs-semispectral detection for a normalized measure.
    SpectralDetect { file: PathBuf },
    /// Weighted-shift moment machinery.
    Shift {
        #[command(subcommand)]
        cmd: ShiftCommand,
    },
    /// Normal-matrix expansions.
    Normal {
        #[command(subcommand)]
        cmd: NormalCommand,
    },
    /// Generalized eigenvector of the simple shift at a point.
    ShiftEigen {
        /// Eigenvalue as RE or RE,IM.
        #[arg(long)]
        lambda: String,
        /// Window half-width J for the index range [-J, J].
        #[arg(long)]
        window: usize,
    },
    /// Haar-measure recovery on an equispaced circle grid.
    Haar {
        /// Window half-width J.
        #[arg(long)]
        window: usize,
        /// Number of grid points (must exceed 2J).
        #[arg(long)]
        grid: usize,
        /// Grid-aligned arcs FROM:TO[,FROM:TO...] in grid indices.
        #[arg(long)]
        arcs: Option<String>,
    },
    /// Counterexample matrix: build, section spectra, eigencheck.
    Cex {
        #[command(subcommand)]
        cmd: CexCommand,
    },
}

#[derive(Subcommand)]
enum ShiftCommand {
    /// NotPositive / Semispectral / Spectral classification.
    Classify {
        /// Comma list of weights, cycled onto the window left to right.
        #[arg(long)]
        weights: String,
        /// Window half-width L (default: inferred from the weight count).
        #[arg(long)]
        window: Option<usize>,
    },
    /// Principal minor determinant vs the closed product formula.
    Minor {
        #[arg(long)]
        weights: String,
        #[arg(long)]
        window: Option<usize>,
        /// Window indices k1,k2,... (default: every principal subset).
        #[arg(long)]
        indices: Option<String>,
    },
    /// Closed-form arc integral of the shift form measure.
    Arc {
        #[arg(long)]
        weights: String,
        #[arg(long)]
        window: Option<usize>,
        /// Arc start in radians.
        #[arg(long)]
        from: f64,
        /// Arc end in radians.
        #[arg(long)]
        to: f64,
    },
}

#[derive(Subcommand)]
enum NormalCommand {
    /// Generalized eigenvalue expansion of a normal matrix file.
    Expand { file: PathBuf },
}

#[derive(Subcommand)]
enum CexCommand {
    /// Build the truncated matrix and verify its construction properties.
    Build {
        /// Growth spec: geom:BASE,RATIO or an explicit list A0,A1,...
        #[arg(long = "a")]
        growth: String,
        #[arg(long)]
        size: usize,
        /// Include the sparse entries in the report.
        #[arg(long)]
        emit_entries: bool,
    },
    /// Extreme eigenvalues of leading sections.
    Spectrum {
        #[arg(long = "a")]
        growth: String,
        /// Comma list of section sizes.
        #[arg(long)]
        sizes: String,
        /// Cross-check each section against the dense eigensolver (≤ 4096).
        #[arg(long)]
        dense: bool,
    },
    /// Complete-row eigencheck of the all-ones sequence.
    Eigencheck {
        #[arg(long = "a")]
        growth: String,
        #[arg(long)]
        size: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match RunConfig::resolve(
        cli.tol_rank,
        cli.tol_psd,
        cli.tol_verify,
        cli.alphas.as_deref(),
        cli.seed,
        cli.no_validate,
    ) {
        Ok(c) => c,
        Err(message) => {
            eprintln!("input error: {message}");
            return ExitCode::from(2);
        }
    };

    let (name, outcome) = match &cli.command {
        Command::Dilate { file } => ("dilate", cmd_measure::dilate(file, &config)),
        Command::Diagonalize { file } => ("diagonalize", cmd_measure::diagonalize(file, &config)),
        Command::Verify { file } => ("verify", cmd_measure::verify(file, &config)),
        Command::SpectralDetect { file } => {
            ("spectral-detect", cmd_measure::spectral_detect(file, &config))
        }
        Command::Shift { cmd } => match cmd {
            ShiftCommand::Classify { weights, window } => (
                "shift classify",
                cmd_shift::classify(weights, *window, &config),
            ),
            ShiftCommand::Minor {
                weights,
                window,
                indices,
            } => (
                "shift minor",
                cmd_shift::minor(weights, *window, indices.as_deref(), &config),
            ),
            ShiftCommand::Arc {
                weights,
                window,
                from,
                to,
            } => (
                "shift arc",
                cmd_shift::arc(weights, *window, *from, *to, &config),
            ),
        },
        Command::Normal { cmd } => match cmd {
            NormalCommand::Expand { file } => {
                ("normal expand", cmd_measure::normal_expand(file, &config))
            }
        },
        Command::ShiftEigen { lambda, window } => (
            "shift-eigen",
            cmd_shift::shift_eigen(lambda, *window, &config),
        ),
        Command::Haar { window, grid, arcs } => (
            "haar",
            cmd_shift::haar(*window, *grid, arcs.as_deref(), &config),
        ),
        Command::Cex { cmd } => match cmd {
            CexCommand::Build {
                growth,
                size,
                emit_entries,
            } => (
                "cex build",
                cmd_cex::build(growth, *size, *emit_entries, &config),
            ),
            CexCommand::Spectrum {
                growth,
                sizes,
                dense,
            } => (
                "cex spectrum",
                cmd_cex::spectrum(growth, sizes, *dense, &config),
            ),
            CexCommand::Eigencheck { growth, size } => {
                ("cex eigencheck", cmd_cex::eigencheck(growth, *size, &config))
            }
        },
    };

    match outcome {
        Ok((payload, passed, alphas)) => {
            let echo = config.echo(alphas.as_ref());
            let text = report::render(name, &echo, passed, payload);
            if let Err(e) = report::emit(cli.output.as_deref(), &text) {
                eprintln!("cannot write report: {e}");
                return ExitCode::from(2);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("input error: {err}");
            ExitCode::from(2)
        }
    }
}
