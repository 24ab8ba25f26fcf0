use std::path::{Path, PathBuf};
use std::process::ExitCode as ProcessExit;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hiddenobs_cli::{CliError, ExitCode, GammaKind, Input, RunConfig};

#[derive(Parser)]
#[command(name = "hiddenobs", version, about = "Verify hidden observable and hidden mixed state identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct ConfigArgs {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo / sampled evaluation count.
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: usize,
    /// Tolerance for exact comparisons.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Gamma::Uniform)]
    gamma: Gamma,
    /// Write the report or CSV here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs). Output does not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gamma {
    Uniform,
    Arg,
}

#[derive(Subcommand)]
enum Command {
    /// Compare Trace[b(T) D] with the exact and Monte Carlo classical means.
    VerifyTrace {
        operator: PathBuf,
        density: PathBuf,
        /// Expression b in the variable x.
        #[arg(long = "expr", default_value = "x")]
        expr: String,
    },
    /// Check that sampled hidden values lie in the spectrum.
    Support {
        operator: PathBuf,
        /// Number of random rays.
        #[arg(long, default_value_t = 100)]
        rays: usize,
    },
    /// Build a commutative context and check the homomorphism property.
    Context {
        #[arg(required = true)]
        operators: Vec<PathBuf>,
        /// Random combination trials.
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Context for a commuting pair, second-moment witness otherwise.
    Nogo {
        a: PathBuf,
        b: PathBuf,
        /// Random rays searched before refinement.
        #[arg(long, default_value_t = hiddenobs::contexts::DEFAULT_WITNESS_SEARCH)]
        search: usize,
    },
    /// Dump hidden samples as CSV.
    Sample {
        #[arg(long)]
        observable: Option<PathBuf>,
        #[arg(long)]
        density: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<Input, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(Input::new(path.display().to_string(), bytes))
}

fn run(cli: Cli) -> Result<(String, ExitCode), CliError> {
    let mut config = RunConfig {
        seed: cli.config.seed,
        samples: cli.config.samples,
        tol: cli.config.tol,
        gamma: match cli.config.gamma {
            Gamma::Uniform => GammaKind::Uniform,
            Gamma::Arg => GammaKind::Arg,
        },
        ..RunConfig::default()
    };
    let report = match cli.command {
        Command::VerifyTrace { operator, density, expr } => {
            hiddenobs_cli::verify_trace(&read(&operator)?, &read(&density)?, &expr, &config)?
        }
        Command::Support { operator, rays } => {
            config.rays = rays;
            hiddenobs_cli::support(&read(&operator)?, &config)?
        }
        Command::Context { operators, trials } => {
            config.trials = trials;
            let inputs = operators.iter().map(|p| read(p)).collect::<Result<Vec<_>, _>>()?;
            hiddenobs_cli::context(&inputs, &config)?
        }
        Command::Nogo { a, b, search } => {
            config.search = search;
            hiddenobs_cli::nogo(&read(&a)?, &read(&b)?, &config)?
        }
        Command::Sample { observable, density } => {
            let t = observable.as_deref().map(read).transpose()?;
            let d = density.as_deref().map(read).transpose()?;
            return Ok((hiddenobs_cli::sample(t.as_ref(), d.as_ref(), &config)?, ExitCode::Pass));
        }
    };
    Ok((report.to_json(), report.exit_code()))
}

fn main() -> ProcessExit {
    let cli = Cli::parse();
    let out = cli.config.out.clone();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.config.workers.unwrap_or(0))
        .build();
    let result = match pool {
        Ok(pool) => pool.install(|| run(cli)),
        Err(e) => Err(CliError::input(format!("thread pool: {e}"))),
    };
    let code = match result {
        Ok((text, code)) => {
            let written = match &out {
                Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    eprintln!("hiddenobs: {e}");
                    ExitCode::InputError
                }
            }
        }
        Err(e) => {
            eprintln!("hiddenobs: {e}");
            e.code
        }
    };
    ProcessExit::from(code.code() as u8)
}
