use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netplace::{Horizon, Method, SolverMode};
use netplace_cli::{
    backup_cmd, check, metric_cmd, place_cmd, CliError, Input, MetricKind, MetricOverrides,
    PlaceOptions, Report,
};

/// Actuator placement and backup planning for structurally controllable
/// networks.
#[derive(Parser)]
#[command(name = "netplace", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Accessibility, matching and SCC diagnosis of an actuator set.
    Check {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        actuators: Actuators,
    },
    /// Choose K actuators by forward or long-horizon greedy.
    Place {
        #[command(flatten)]
        common: Common,
        /// Actuator budget.
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Lhfg)]
        method: MethodArg,
        /// Rollout depth for lhfg: `full` or a number of steps.
        #[arg(long, default_value = "full", value_parser = parse_horizon)]
        horizon: Horizon,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Backup positions for every essential actuator.
    Backup {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        actuators: Actuators,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
    },
    /// Evaluate the placement metric on an actuator set.
    Metric {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        actuators: Actuators,
        #[command(flatten)]
        metric: MetricArgs,
    },
}

#[derive(Args)]
struct Common {
    /// System file (TOML).
    system: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recorded in the report; the computations are deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Actuators {
    /// Comma-separated 1-based actuator ids.
    #[arg(long, short = 's', value_delimiter = ',', num_args = 0..)]
    actuators: Vec<usize>,
}

#[derive(Args)]
struct MetricArgs {
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Gramian horizon.
    #[arg(long = "T")]
    t: Option<f64>,
    /// Gramian regularization.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated modular weights, one per node.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
}

impl From<MetricArgs> for MetricOverrides {
    fn from(m: MetricArgs) -> Self {
        MetricOverrides {
            kind: m.metric.map(|k| match k {
                MetricArg::Gramian => MetricKind::Gramian,
                MetricArg::Modular => MetricKind::Modular,
            }),
            horizon: m.t,
            epsilon: m.epsilon,
            weights: m.weights,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Fg,
    Lhfg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Greedy,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Gramian,
    Modular,
}

fn parse_horizon(s: &str) -> Result<Horizon, String> {
    if s == "full" {
        return Ok(Horizon::Full);
    }
    s.parse()
        .map(Horizon::Steps)
        .map_err(|_| format!("expected `full` or a step count, got {s:?}"))
}

/// `NETPLACE_THREADS`, or every available core when unset.
fn threads() -> Result<usize, CliError> {
    match std::env::var("NETPLACE_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("NETPLACE_THREADS={v:?} is not a thread count"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn run(cli: Cli) -> Result<(Report, Option<PathBuf>), CliError> {
    match cli.command {
        Command::Check { common, actuators } => {
            let input = Input::read(&common.system)?;
            Ok((
                check(&input, &actuators.actuators, common.seed)?,
                common.out,
            ))
        }
        Command::Place {
            common,
            k,
            method,
            horizon,
            metric,
        } => {
            let input = Input::read(&common.system)?;
            let opts = PlaceOptions {
                k,
                method: match method {
                    MethodArg::Fg => Method::ForwardGreedy,
                    MethodArg::Lhfg => Method::LongHorizon,
                },
                horizon,
                metric: metric.into(),
                threads: threads()?,
                seed: common.seed,
            };
            Ok((place_cmd(&input, &opts)?, common.out))
        }
        Command::Backup {
            common,
            actuators,
            mode,
        } => {
            let input = Input::read(&common.system)?;
            let mode = match mode {
                ModeArg::Exact => SolverMode::Exact,
                ModeArg::Greedy => SolverMode::Greedy,
                ModeArg::Auto => SolverMode::Auto,
            };
            Ok((
                backup_cmd(&input, &actuators.actuators, mode, common.seed)?,
                common.out,
            ))
        }
        Command::Metric {
            common,
            actuators,
            metric,
        } => {
            let input = Input::read(&common.system)?;
            Ok((
                metric_cmd(&input, &actuators.actuators, &metric.into(), common.seed)?,
                common.out,
            ))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = run(cli).and_then(|(report, out)| {
        let json = report.to_json();
        match out {
            Some(path) => {
                std::fs::write(&path, json).map_err(|source| CliError::Write { path, source })
            }
            None => {
                print!("{json}");
                Ok(())
            }
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
