mod commands;
mod exit;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "sharpwave",
    version,
    about = "Sharp waves and convergence certificates for degenerate periodic reaction-diffusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file, or `demo:NAME` for a bundled one (barenblatt, logistic, hetmono, hetbi)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<String>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Cells per period, overriding the scenario
    #[arg(long, global = true, value_name = "N")]
    resolution: Option<usize>,

    /// Validate the scenario and print the report without running anything
    #[arg(long, global = true)]
    dry_run: bool,

    /// Seed recorded in every summary
    #[arg(long, global = true, value_name = "K", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Evolve the Cauchy problem and write snapshots, trace and summary
    Run,
    /// Minimal and maximal periodic stationary states
    Stationary,
    /// Sharp traveling wave of the homogeneous lower-bound problem by shooting
    Shoot,
    /// Periodic traveling sharp wave by renormalizing the Heaviside solution
    Wave,
    /// Convergence certificate from a stored wave and spreading run
    Certify,
    /// Waves over a parameter axis
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Stationary => "stationary",
            Command::Shoot => "shoot",
            Command::Wave => "wave",
            Command::Certify => "certify",
            Command::Sweep => "sweep",
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    let source = cli
        .config
        .as_deref()
        .ok_or_else(|| exit::Failure::Config("--config PATH is required".into()))?;
    let sc = Scenario::load(source, &cli.out, cli.resolution, cli.seed)?;
    if cli.dry_run {
        return commands::dry_run(&sc, cli.command.name());
    }
    match cli.command {
        Command::Run => commands::run(&sc),
        Command::Stationary => commands::stationary_cmd(&sc),
        Command::Shoot => commands::shoot(&sc),
        Command::Wave => commands::wave(&sc),
        Command::Certify => commands::certify_cmd(&sc),
        Command::Sweep => commands::sweep(&sc),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code(&e) as u8)
        }
    }
}
