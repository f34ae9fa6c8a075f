//! `leafrf`: every pipeline stage from the shell.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 computation error.

mod commands;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "leafrf", version, about = "Impedance matching and leaf-antenna design workbench")]
pub struct Cli {
    /// Reference impedance in ohms.
    #[arg(long, global = true, default_value = "50")]
    pub z0: String,
    /// Design frequency, e.g. 915MHz.
    #[arg(long, global = true, default_value = "915MHz")]
    pub f0: String,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Seed for Monte-Carlo tolerance runs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Exactly one load source.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct LoadArgs {
    /// Constant impedance, e.g. 25-10j.
    #[arg(long, allow_hyphen_values = true)]
    pub load: Option<String>,
    /// Touchstone v1.0 one-port file.
    #[arg(long)]
    pub s1p: Option<PathBuf>,
    /// Series R-L-C, e.g. 10ohm,18nH,1.2pF.
    #[arg(long)]
    pub resonator: Option<String>,
}

/// Where the network comes from; defaults to the top-ranked ideal L-match.
#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// JSON file holding {"elements": [...]}.
    #[arg(long, conflicts_with = "elements")]
    pub network: Option<PathBuf>,
    /// Inline ladder, load side first: series:L:10nH,shunt:C:6.8pF (`;` also separates).
    #[arg(long)]
    pub elements: Option<String>,
    /// Which ideal solution to start from when no network is given.
    #[arg(long, default_value_t = 0)]
    pub solution: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "700MHz")]
    pub from: String,
    #[arg(long, default_value = "1100MHz")]
    pub to: String,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize every L-match for the load at f0.
    Match {
        #[command(flatten)]
        load: LoadArgs,
    },
    /// S11 curve of a network over a frequency range, with the dip.
    Sweep {
        #[command(flatten)]
        load: LoadArgs,
        #[command(flatten)]
        network: NetworkArgs,
        #[command(flatten)]
        range: SweepArgs,
    },
    /// Snap every value to the nearest catalog part and report the dip shift.
    Snap {
        #[command(flatten)]
        load: LoadArgs,
        #[command(flatten)]
        network: NetworkArgs,
        #[arg(long, default_value = "E24")]
        series: String,
        #[command(flatten)]
        range: SweepArgs,
    },
    /// Search catalog neighbourhoods for the best discrete network.
    Optimize {
        #[command(flatten)]
        load: LoadArgs,
        #[command(flatten)]
        network: NetworkArgs,
        #[arg(long, default_value = "E24")]
        series: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        runner_ups: usize,
        /// Component tolerance in percent for a Monte-Carlo study.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Build the leaf pair outline; optionally export DXF.
    Leaf {
        /// Profile JSON; the built-in default profile when omitted.
        profile: Option<PathBuf>,
        #[arg(long)]
        dxf: Option<PathBuf>,
    },
    /// Charge time versus distance.
    Link {
        /// Link budget JSON; a unity-gain 1 W fixture when omitted.
        budget: Option<PathBuf>,
        #[arg(long, default_value = "100uF")]
        capacitance: String,
        #[arg(long, default_value_t = 4.0)]
        threshold: f64,
        #[arg(long, default_value_t = 0.0)]
        initial: f64,
        #[arg(long, default_value_t = 0.5)]
        from: f64,
        #[arg(long, default_value_t = 2.0)]
        to: f64,
        #[arg(long, default_value_t = 0.25)]
        step: f64,
    },
    /// Skin depth of a conductor.
    Skin {
        /// copper, aluminum, gold, silver, or custom (needs --rho).
        #[arg(long, default_value = "copper")]
        material: String,
        /// Resistivity in ohm·m for a custom material.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        mu_r: f64,
        /// Frequency; defaults to --f0.
        #[arg(long)]
        freq: Option<String>,
    },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Listen on all interfaces instead of loopback.
        #[arg(long)]
        expose: bool,
        /// Append-only session journal for crash recovery.
        #[arg(long)]
        journal: Option<PathBuf>,
        #[arg(long, default_value_t = 24.0)]
        ttl_hours: f64,
        /// Allowed CORS origin; any when omitted.
        #[arg(long)]
        cors_origin: Option<String>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Compute(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("leafrf: {e}");
            ExitCode::from(e.code())
        }
    }
}
