use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use epr_optomech::commands::{
    default_sweep_values, execute, sweep_for, sweep_spectra_table, sweep_table, Command, DEFAULT_BRACKET,
};
use epr_optomech::config::{parse_config, RunConfig};
use epr_optomech::oracle::Model;
use epr_optomech::output::{emit_rows, OutputError, Table};
use epr_optomech::sweep::SweepAxis;
use epr_optomech::PhysicsError;

const EXIT_CONFIG: u8 = 2;
const EXIT_PHYSICS: u8 = 3;
const EXIT_IO: u8 = 4;

/// Output-field entanglement of a two-mode optomechanical cavity.
///
/// Without --config the room-temperature defaults are used.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// Configuration file (flat `key = value`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set temperature_k=77`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output file; stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or jsonlines.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Lower end of the sideband grid, in units of gamma.
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega_min: Option<f64>,
    /// Upper end of the sideband grid, in units of gamma.
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega_max: Option<f64>,
    #[arg(long, global = true)]
    omega_points: Option<usize>,
    /// adiabatic, adiabatic_assembled, rwa3 or full6.
    #[arg(long, global = true)]
    model: Option<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Steady state, derived rates and the validity-regime report.
    Derive,
    /// Entanglement spectrum over the sideband grid.
    Spectrum,
    /// Peak statistics over a parameter axis.
    Sweep {
        /// T, alpha, d, Q, power_fluct or d_fluct.
        #[arg(long)]
        axis: String,
        /// Comma-separated values (K, |alpha|, d/gamma, Q, fraction, d/gamma).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Also write every row's spectrum here.
        #[arg(long)]
        spectra: Option<PathBuf>,
    },
    /// Closed-form and numeric optimum of the common detuning d.
    Optimum {
        #[arg(long, default_value_t = DEFAULT_BRACKET.0)]
        bracket_min: f64,
        #[arg(long, default_value_t = DEFAULT_BRACKET.1)]
        bracket_max: f64,
    },
    /// Compares the closed form against the exact solvers.
    Verify {
        #[arg(long, value_delimiter = ',', default_value = "adiabatic,rwa3,full6")]
        models: Vec<String>,
    },
    /// Intracavity occupation of the first optical mode.
    Occupation,
}

enum Failure {
    Config(String),
    Physics(PhysicsError),
    Io(OutputError),
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (code, msg) = match self {
            Failure::Config(m) => (EXIT_CONFIG, format!("config error: {m}")),
            Failure::Physics(e) => (EXIT_PHYSICS, format!("{}: {e}", e.code())),
            Failure::Io(e) => (EXIT_IO, e.to_string()),
        };
        eprintln!("error: {msg}");
        ExitCode::from(code)
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?,
        None => "defaults: baseline\n".to_string(),
    };
    let mut overrides = cli.overrides.clone();
    let mut flag = |key: &str, v: Option<String>| {
        if let Some(v) = v {
            overrides.push(format!("{key}={v}"));
        }
    };
    flag("out", cli.out.as_ref().map(|p| p.display().to_string()));
    flag("format", cli.format.clone());
    flag("omega_min_over_gamma", cli.omega_min.map(|x| x.to_string()));
    flag("omega_max_over_gamma", cli.omega_max.map(|x| x.to_string()));
    flag("omega_points", cli.omega_points.map(|x| x.to_string()));
    flag("model", cli.model.clone());
    parse_config(&text, &overrides).map_err(|e| Failure::Config(e.to_string()))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let command = match &cli.command {
        Cmd::Derive => Command::Derive,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Sweep { axis, values, .. } => {
            let axis: SweepAxis = axis.parse().map_err(Failure::Config)?;
            let values = if values.is_empty() {
                default_sweep_values(axis)
            } else {
                values.clone()
            };
            Command::Sweep { axis, values }
        }
        Cmd::Optimum {
            bracket_min,
            bracket_max,
        } => Command::Optimum {
            bracket: (*bracket_min, *bracket_max),
        },
        Cmd::Verify { models } => Command::Verify {
            models: models
                .iter()
                .map(|m| m.trim().parse::<Model>())
                .collect::<Result<_, _>>()
                .map_err(Failure::Config)?,
        },
        Cmd::Occupation => Command::Occupation,
    };
    log::info!("running {command:?}");

    let write = |table: &Table, path: Option<&std::path::Path>| emit_rows(table, cfg.format, path).map_err(Failure::Io);
    match (&cli.command, &command) {
        (
            Cmd::Sweep {
                spectra: Some(path), ..
            },
            Command::Sweep { axis, values },
        ) => {
            let result = sweep_for(&cfg, *axis, values).map_err(Failure::Physics)?;
            let gamma = cfg.device.gamma;
            write(&sweep_table(&result, gamma), cfg.out.as_deref())?;
            write(&sweep_spectra_table(&result), Some(path))
        }
        _ => {
            let table = execute(&command, &cfg).map_err(Failure::Physics)?;
            write(&table, cfg.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}
