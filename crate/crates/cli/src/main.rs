use clap::{Args, Parser, Subcommand};
use femu_cli::commands::{self, Overrides};
use femu_cli::{CliError, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Finite element model updating: recover patchwise elastic moduli from
/// surface strain fields.
#[derive(Parser)]
#[command(name = "femu", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured model and write displacement, strain and modulus fields.
    Forward(RunArgs),
    /// Write a synthetic measurement CSV from the configured truth.
    Synth(RunArgs),
    /// Identify patch moduli from a measurement CSV.
    Invert {
        #[command(flatten)]
        run: RunArgs,
        /// Measurement CSV (default: measurement.csv in the output directory).
        #[arg(long)]
        measurement: Option<PathBuf>,
    },
    /// Print the summary of a saved inversion report.
    Report {
        /// report.json or the directory containing it.
        path: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Noise seed for `synth`, GA seed for `invert`.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> Result<(RunConfig, Overrides), CliError> {
        Ok((RunConfig::load(&self.config)?, Overrides { out: self.out.clone(), seed: self.seed }))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Forward(args) => {
            let (config, overrides) = args.load()?;
            for path in commands::forward(&config, &overrides)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Synth(args) => {
            let (config, overrides) = args.load()?;
            println!("wrote {}", commands::synth(&config, &overrides)?.display());
        }
        Command::Invert { run, measurement } => {
            let (config, overrides) = run.load()?;
            let report = commands::invert(&config, measurement.as_deref(), &overrides)?;
            print!("{}", report.summary());
        }
        Command::Report { path } => print!("{}", commands::report(&path)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("femu: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
