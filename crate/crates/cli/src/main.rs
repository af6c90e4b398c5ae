use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use d2d_cli::commands::dump_realization;
use d2d_cli::metrics::parse_metric_list;
use d2d_cli::{
    cmd_analyze, cmd_sweep, cmd_validate, load_params, write_output, CliError, Grid, OutputFormat,
    RateUnit, Spacing, SweepParameter, SweepSpec,
};
use d2d_core::SimulationConfig;

#[derive(Parser)]
#[command(
    name = "d2d",
    version,
    about = "Mode selection, power control and outage in D2D-enabled uplink cellular networks"
)]
struct Cli {
    /// Parameter file (`key = value unit` lines); defaults when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    params: Option<PathBuf>,
    /// Override one parameter, e.g. `--set rho_o=-80dBm`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, global = true, default_value = "csv")]
    format: OutputFormat,
    /// Output path; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Report rates in bits/s/Hz instead of nats/s/Hz.
    #[arg(long, global = true)]
    bits: bool,
    /// Print wall-clock time to stderr.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every analytical metric at one operating point.
    Analyze,
    /// Analytical versus simulated outage over the SINR threshold grid.
    Validate(ValidateArgs),
    /// Analytical metrics over a one-parameter grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    realizations: usize,
    #[arg(long = "window-km2", default_value_t = 100.0)]
    window_km2: f64,
    /// Border fraction excluded from measurement on each side.
    #[arg(long, default_value_t = 0.2)]
    guard: f64,
    /// Skip filling idle base stations.
    #[arg(long)]
    no_saturation: bool,
    /// Also write realization 0 as a tab-separated UE table.
    #[arg(long, value_name = "PATH")]
    dump_realization: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// T_d, rho_o, theta or lambda.
    #[arg(long)]
    param: String,
    /// Explicit grid values in the parameter's input unit, comma-separated.
    #[arg(
        long,
        conflicts_with = "range",
        required_unless_present = "range",
        allow_hyphen_values = true
    )]
    values: Option<String>,
    /// START:STOP:COUNT in the parameter's input unit.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    /// linear, log or dB.
    #[arg(long, default_value = "linear")]
    spacing: String,
    /// Comma-separated metric names, or `all`.
    #[arg(long, default_value = "all")]
    metrics: String,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let params = load_params(cli.params.as_deref(), &cli.overrides)?;
    let unit = if cli.bits {
        RateUnit::Bits
    } else {
        RateUnit::Nats
    };
    let table = match cli.command {
        Command::Analyze => cmd_analyze(&params, unit)?,
        Command::Validate(args) => {
            let config = SimulationConfig {
                num_realizations: args.realizations,
                rng_seed: args.seed,
                guard_fraction: args.guard,
                saturation_enabled: !args.no_saturation,
                ..SimulationConfig::default()
            }
            .with_window_km2(args.window_km2);
            if let Some(path) = &args.dump_realization {
                dump_realization(&params, &config, path)?;
            }
            cmd_validate(&params, &config)?
        }
        Command::Sweep(args) => {
            let parameter: SweepParameter = args.param.parse()?;
            let grid = match (&args.values, &args.range) {
                (Some(v), _) => Grid::parse_values(v)?,
                (None, Some(r)) => Grid::parse_range(r, args.spacing.parse::<Spacing>()?)?,
                (None, None) => unreachable!("clap requires one of --values/--range"),
            };
            let metrics = parse_metric_list(&args.metrics).map_err(CliError::Sweep)?;
            cmd_sweep(
                &params,
                &SweepSpec {
                    parameter,
                    grid,
                    metrics,
                },
                unit,
            )?
        }
    };
    write_output(&table, cli.format, cli.out.as_deref())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let timing = cli.timing;
    let start = Instant::now();
    let result = run(cli);
    if timing {
        eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
