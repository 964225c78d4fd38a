use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use walkoff_core::{SweepParam, SweepRange};

mod commands;
mod manifest;

use commands::CliError;

#[derive(Debug, Parser)]
#[command(name = "walkoff", version, about = "Spatial two-photon states of walk-off affected down-conversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Configuration file (`key = value` lines)
    #[arg(long)]
    pub config: PathBuf,

    /// Prefix of every output file
    #[arg(long)]
    pub out: Option<String>,

    /// Samples per momentum axis (odd). Images default to `grid.samples`,
    /// kernel commands to 33.
    #[arg(long)]
    pub grid_samples: Option<usize>,

    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,

    /// Override the pump waist w0, µm
    #[arg(long)]
    pub w0: Option<f64>,

    /// Override the collection-mode width ws, µm
    #[arg(long)]
    pub ws: Option<f64>,

    /// Override the crystal length, mm
    #[arg(long)]
    pub length_mm: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Parameter to sweep
    #[arg(long, value_parser = parse_sweep)]
    pub sweep: Option<SweepParam>,

    /// START:STOP:STEP (inclusive) or a single value; defaults to the
    /// configured value of the swept parameter
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub range: Option<SweepRange>,
}

fn parse_sweep(s: &str) -> Result<SweepParam, String> {
    s.parse().map_err(|e: walkoff_core::Error| e.to_string())
}

fn parse_range(s: &str) -> Result<SweepRange, String> {
    s.parse().map_err(|e: walkoff_core::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coincidence image R_c(x1, x2 = 0) as PGM and CSV
    Image {
        #[command(flatten)]
        common: CommonArgs,
        /// Azimuth α in degrees (default: `crystal.alpha_deg`)
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
    },
    /// Numbered PGM frames over a range of azimuths
    Movie {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha_start: f64,
        #[arg(long, default_value_t = 360.0, allow_negative_numbers = true)]
        alpha_stop: f64,
        #[arg(long, default_value_t = 15.0)]
        alpha_step: f64,
    },
    /// Spiral-harmonic weights C_m against α
    Oam {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Harmonic window |m| <= M
        #[arg(long, default_value_t = walkoff_core::oam::DEFAULT_M_MAX)]
        m_max: usize,
    },
    /// Schmidt number K along a parameter sweep
    Schmidt {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Largest kernel grid (samples per axis) allowed
        #[arg(long, default_value_t = walkoff_core::schmidt::DEFAULT_KERNEL_CAP)]
        kernel_cap: usize,
        /// Also write the 16 leading signal modes of each point as PGM
        #[arg(long)]
        modes: bool,
    },
    /// Two-crystal overlap, purity and concurrence along a sweep
    Concurrence {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Signal walk-off in the second crystal, degrees (default: ρ0)
        #[arg(long)]
        rho_s_deg: Option<f64>,
        /// Idler walk-off in the second crystal, degrees (default: ρ0)
        #[arg(long)]
        rho_i_deg: Option<f64>,
        #[arg(long, default_value_t = walkoff_core::schmidt::DEFAULT_KERNEL_CAP)]
        kernel_cap: usize,
    },
    /// Run the built-in closed-form checks
    Selftest {
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Image { common, alpha } => {
            init_threads(common.threads)?;
            commands::image(&common, alpha)
        }
        Command::Movie {
            common,
            alpha_start,
            alpha_stop,
            alpha_step,
        } => {
            init_threads(common.threads)?;
            commands::movie(&common, alpha_start, alpha_stop, alpha_step)
        }
        Command::Oam { common, sweep, m_max } => {
            init_threads(common.threads)?;
            commands::oam(&common, &sweep, m_max)
        }
        Command::Schmidt {
            common,
            sweep,
            kernel_cap,
            modes,
        } => {
            init_threads(common.threads)?;
            commands::schmidt(&common, &sweep, kernel_cap, modes)
        }
        Command::Concurrence {
            common,
            sweep,
            rho_s_deg,
            rho_i_deg,
            kernel_cap,
        } => {
            init_threads(common.threads)?;
            commands::concurrence(&common, &sweep, rho_s_deg, rho_i_deg, kernel_cap)
        }
        Command::Selftest { threads } => {
            init_threads(threads)?;
            commands::selftest()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("walkoff: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
