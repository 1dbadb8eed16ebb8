//! `springhop`: simulate, analyze, and design-search a spring-assisted
//! five-bar jumping biped.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use springhop_core::optimizer::{DesignSpace, DEFAULT_K_WINDOW, DEFAULT_TORQUE_HEADROOM};
use springhop_core::{EARTH_GRAVITY, MARS_GRAVITY};

use springhop::config::{
    load_config, parse_config_file, parse_gravity, ConfigError, ConfigFile, LoadedConfig,
};
use springhop::run::{self, CliError};
use springhop::scenarios::{RunManifest, SuiteName};

/// The reference robot build shipped with the repository; used when no
/// config file is given and the default path does not exist.
const BUILTIN_CONFIG: &str = include_str!("../../../configs/paper_biped.toml");
const DEFAULT_CONFIG_PATH: &str = "configs/paper_biped.toml";

#[derive(Parser)]
#[command(
    name = "springhop",
    version,
    about = "Five-bar jumping biped: jump simulation, statics, workspace, and design search"
)]
struct Cli {
    /// Config file (default: configs/paper_biped.toml, falling back to the
    /// built-in copy of it).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV/SVG files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Gravity: "earth", "mars", or a value in m/s^2. For `sim` it overrides
    /// the scenario; for `suite` it filters the matrix; for `optimize` and
    /// `statics` it sets the run gravity.
    #[arg(long, global = true)]
    gravity: Option<String>,

    /// Write CSVs only; skip chart rendering.
    #[arg(long, global = true)]
    csv_only: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured scenario; writes trajectory and events CSVs.
    Sim {
        /// Scenario name from the config (default: the first one).
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Run a figure-reproduction suite (parallel, deterministic outputs).
    Suite {
        /// Which suite to run.
        #[arg(value_enum)]
        name: SuiteName,
    },
    /// Grid-search link lengths and spring stiffness, then select a design.
    Optimize {
        /// Stiffness robustness window (N/m) for design selection.
        #[arg(long, default_value_t = DEFAULT_K_WINDOW)]
        window: f64,
        /// Fraction of torque saturation kept in reserve by the selection.
        #[arg(long, default_value_t = DEFAULT_TORQUE_HEADROOM)]
        headroom: f64,
        /// Use a coarse 5x5x5 grid instead of the default resolution.
        #[arg(long)]
        coarse: bool,
    },
    /// Sweep the reachable paw workspace under the hardware motor limits.
    Workspace {
        /// Emit every reachable sample instead of the boundary only.
        #[arg(long)]
        full_cloud: bool,
        /// Planar motor-grid increment in degrees.
        #[arg(long, default_value_t = 1.0)]
        increment_deg: f64,
    },
    /// Sweep static hold torques over symmetric poses; reports resting poses.
    Statics,
    /// Tune motor viscous damping so the reference jump hits the target apex.
    Calibrate {
        /// Target body apex (m) for the 18 Nm / 115 deg / Earth reference.
        #[arg(long, default_value_t = 1.141)]
        target: f64,
    },
}

fn resolve_config(
    flag: Option<&Path>,
) -> Result<(ConfigFile, LoadedConfig, String), ConfigError> {
    match flag {
        Some(path) => {
            let (file, cfg) = load_config(path)?;
            Ok((file, cfg, path.display().to_string()))
        }
        None => {
            let default = Path::new(DEFAULT_CONFIG_PATH);
            if default.exists() {
                let (file, cfg) = load_config(default)?;
                Ok((file, cfg, DEFAULT_CONFIG_PATH.to_string()))
            } else {
                let file = parse_config_file(BUILTIN_CONFIG)?;
                let cfg = file.validate()?;
                Ok((file, cfg, "builtin".to_string()))
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let (file, cfg, reference) = resolve_config(cli.config.as_deref())?;
    let gravity_override = cli
        .gravity
        .as_deref()
        .map(parse_gravity)
        .transpose()
        .map_err(CliError::Config)?;

    match &cli.command {
        Command::Sim { scenario } => run::cmd_sim(
            &cfg,
            scenario.as_deref(),
            gravity_override,
            &cli.out,
            cli.csv_only,
        ),
        Command::Suite { name } => {
            let manifest = RunManifest {
                suite: *name,
                design_reference: reference,
                out_dir: cli.out.clone(),
                gravity_filter: gravity_override,
                deterministic: true,
            };
            run::cmd_suite(&cfg, &manifest, cli.csv_only)
        }
        Command::Optimize {
            window,
            headroom,
            coarse,
        } => {
            let space = if *coarse {
                run::coarse_space()
            } else {
                DesignSpace::default()
            };
            run::cmd_optimize(
                &cfg,
                gravity_override.unwrap_or(MARS_GRAVITY),
                &space,
                *window,
                *headroom,
                &cli.out,
            )
        }
        Command::Workspace {
            full_cloud,
            increment_deg,
        } => run::cmd_workspace(&cfg, *full_cloud, *increment_deg, &cli.out),
        Command::Statics => run::cmd_statics(
            &cfg,
            gravity_override.unwrap_or(EARTH_GRAVITY),
            &cli.out,
        ),
        Command::Calibrate { target } => run::cmd_calibrate(&cfg, &file, *target, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
