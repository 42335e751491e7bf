use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use polariton::spectra::Transform;
use polariton::Execution;
use polariton_cli::commands::{cmd_eigens, cmd_signal, cmd_spectrum, cmd_validate, Outcome};
use polariton_cli::{CliError, CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "polariton2d", version, about = "Two-dimensional spectroscopy of trapped-ion polaritons")]
struct Cli {
    /// TOML run configuration
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in parameter set
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,

    /// Output directory (overrides output.dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; 1 runs sequentially
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Fig3,
    Fig4,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    S13,
    S23,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the excitation sector across a detuning sweep
    Eigens,
    /// Scan the three-pulse signal over two delays
    Signal,
    /// Scan, transform, pick peaks and assign them to the stick spectrum
    Spectrum {
        /// Transform pair; defaults to spectrum.transform
        #[arg(value_enum)]
        which: Option<Which>,
    },
    /// Run the invariant suite and write a pass/fail report
    Validate,
}

fn load(cli: &Cli) -> CliResult<RunConfig> {
    match (&cli.config, cli.preset) {
        (Some(path), _) => RunConfig::load(path),
        (None, Some(Preset::Fig3)) => RunConfig::preset("fig3"),
        (None, Some(Preset::Fig4)) => RunConfig::preset("fig4"),
        (None, None) => Ok(RunConfig::default()),
    }
}

fn execution(threads: Option<usize>) -> CliResult<Execution> {
    match threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        Some(k) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            #[cfg(not(feature = "parallel"))]
            let _ = k;
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    let config = load(cli)?;
    for w in config.validate()? {
        eprintln!("warning: {w}");
    }
    let exec = execution(cli.threads)?;
    let out = cli.out.clone().unwrap_or_else(|| config.output.dir.clone());
    match &cli.command {
        Command::Eigens => cmd_eigens(&config, &out, exec),
        Command::Signal => cmd_signal(&config, &out, exec),
        Command::Spectrum { which } => {
            let which = which.map(|w| match w {
                Which::S13 => Transform::S13,
                Which::S23 => Transform::S23,
            });
            cmd_spectrum(&config, which, &out, exec)
        }
        Command::Validate => cmd_validate(&config, &out, exec),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("  {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
