use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qmix_cli::commands::{
    cmd_bound, cmd_reproduce, cmd_simulate, PovmSource, ReproduceCase, DEFAULT_RESOLUTION,
    DEFAULT_SEED, DEFAULT_TRIALS, UNIDENTIFIABLE_RESOLUTION,
};
use qmix_cli::format::{parse_mixture, parse_povm};
use qmix_cli::report::RunReport;

/// Error bounds and optimal measurements for the weights of quantum finite
/// mixtures.
#[derive(Parser)]
#[command(name = "qmix", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorKind {
    Flat,
}

#[derive(Args)]
struct OutputFlags {
    /// Output format: structured JSON (default) or flat CSV rows.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report to a file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Re-run one of the built-in benchmark cases and compare against its
    /// reference values.
    Reproduce {
        /// orthogonal | two-pure | tetrahedron | unidentifiable | commuting | adaptive
        case: String,
        /// Number of mixture components (orthogonal case).
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Number of independent copies.
        #[arg(long = "n", alias = "n-copies", default_value_t = 0)]
        n_copies: u32,
        /// State overlap tr(rho1 rho2) for the two-pure case.
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
        /// Mixing weight of the commuting pair's mixed component.
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// Half-angle between the adaptive case's pure states (radians).
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_3)]
        theta: f64,
        /// True weight for the adaptive protocol.
        #[arg(long = "lambda-true", default_value_t = 0.3)]
        lambda_true: f64,
        /// Simplex quadrature resolution (cells per edge); the
        /// unidentifiable case defaults to 48 because it minimizes the
        /// Holevo functional at every node.
        #[arg(long)]
        resolution: Option<usize>,
        /// Monte Carlo trials (adaptive case).
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        /// Random seed (adaptive case).
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Analytic error bounds for a mixture definition file.
    Bound {
        /// Mixture definition (JSON; see the repository README).
        mixture: PathBuf,
        /// Prior over the weights (only the flat prior is built in).
        #[arg(long, value_enum, default_value = "flat")]
        prior: PriorKind,
        #[arg(long = "n-copies", default_value_t = 1)]
        n_copies: u32,
        /// Also evaluate the Holevo bound (pointwise at the prior mean and
        /// prior-averaged).
        #[arg(long)]
        holevo: bool,
        /// Simplex quadrature resolution for the averaged bounds.
        #[arg(long)]
        resolution: Option<usize>,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Monte Carlo validation of a measurement against the analytic error.
    Simulate {
        /// Mixture definition (JSON).
        mixture: PathBuf,
        /// POVM definition (JSON); omit together with --optimal.
        povm: Option<PathBuf>,
        /// Build the optimal projective measurement instead of reading one.
        #[arg(long)]
        optimal: bool,
        #[arg(long = "n-copies", default_value_t = 1)]
        n_copies: u32,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputFlags,
    },
}

fn run() -> anyhow::Result<(RunReport, OutputFlags)> {
    let cli = Cli::parse();
    match cli.command {
        Command::Reproduce {
            case,
            m,
            n_copies,
            overlap,
            epsilon,
            theta,
            lambda_true,
            resolution,
            trials,
            seed,
            output,
        } => {
            let case = match case.as_str() {
                "orthogonal" => ReproduceCase::Orthogonal {
                    m,
                    n_copies: if n_copies == 0 { 1 } else { n_copies },
                },
                "two-pure" => ReproduceCase::TwoPure { overlap },
                "tetrahedron" => ReproduceCase::Tetrahedron {
                    resolution: resolution.unwrap_or(DEFAULT_RESOLUTION),
                },
                "unidentifiable" => ReproduceCase::Unidentifiable {
                    n_copies: if n_copies == 0 { 1 } else { n_copies },
                    resolution: resolution.unwrap_or(UNIDENTIFIABLE_RESOLUTION),
                },
                "commuting" => ReproduceCase::Commuting {
                    epsilon,
                    n_copies: if n_copies == 0 { 256 } else { n_copies },
                },
                "adaptive" => ReproduceCase::Adaptive {
                    theta,
                    lambda_true,
                    n_copies: if n_copies == 0 { 4096 } else { n_copies },
                    trials,
                    seed,
                },
                other => anyhow::bail!(
                    "unknown case {other:?}; expected orthogonal, two-pure, tetrahedron, \
                     unidentifiable, commuting or adaptive"
                ),
            };
            Ok((cmd_reproduce(&case)?, output))
        }
        Command::Bound {
            mixture,
            prior: PriorKind::Flat,
            n_copies,
            holevo,
            resolution,
            output,
        } => {
            let text = std::fs::read_to_string(&mixture)
                .map_err(|e| anyhow::anyhow!("{}: {e}", mixture.display()))?;
            let (mix, _labels) = parse_mixture(&text)?;
            Ok((cmd_bound(&mix, n_copies, holevo, resolution)?, output))
        }
        Command::Simulate {
            mixture,
            povm,
            optimal,
            n_copies,
            trials,
            seed,
            output,
        } => {
            let text = std::fs::read_to_string(&mixture)
                .map_err(|e| anyhow::anyhow!("{}: {e}", mixture.display()))?;
            let (mix, _labels) = parse_mixture(&text)?;
            let source = match (povm, optimal) {
                (Some(path), false) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
                    PovmSource::File(parse_povm(&text)?)
                }
                (None, true) => PovmSource::Optimal,
                (Some(_), true) => {
                    anyhow::bail!("give either a POVM file or --optimal, not both")
                }
                (None, false) => {
                    anyhow::bail!("a POVM file or --optimal is required")
                }
            };
            Ok((cmd_simulate(&mix, source, n_copies, trials, seed)?, output))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok((report, output)) => {
            let rendered = match output.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            match &output.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, rendered) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    let _ = stdout.write_all(rendered.as_bytes());
                }
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
