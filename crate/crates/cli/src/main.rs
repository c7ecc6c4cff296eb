use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use r2tr_cli::commands::{self, Format, Report};
use r2tr_cli::{ConfigError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "r2tr", version, about = "Tilted-frame rotational resonance gate simulator")]
struct Cli {
    /// Directory for data files; without it the primary file goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Overrides integrator.steps_per_period.
    #[arg(long, global = true)]
    steps_per_period: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the recoupling conditions for the RF amplitude.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Propagate the sequence and report the exchange period.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Extract the sequence unitary and classify it.
    Gate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Read out the state left by the sequence.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
    },
    /// Reproduce a glycine experiment.
    Repro {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig3a,
    Fig3b,
    Fig4,
}

fn load(path: &Path, steps: Option<usize>) -> Result<r2tr_cli::Experiment, ConfigError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(n) = steps {
        cfg.integrator.steps_per_period = n;
    }
    cfg.build(&path.display().to_string())
}

fn run(cli: Cli) -> Result<Report> {
    let format = match cli.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    };
    let steps = cli.steps_per_period;
    Ok(match cli.command {
        Command::Solve { config } => commands::cmd_solve(&load(&config, steps)?, format)?,
        Command::Simulate { config } => commands::cmd_simulate(&load(&config, steps)?, format)?,
        Command::Gate { config } => commands::cmd_gate(&load(&config, steps)?)?,
        Command::Spectrum { config } => commands::cmd_spectrum(&load(&config, steps)?, format)?,
        Command::Repro { figure: Figure::Fig3a } => commands::repro_fig3a(format, steps)?,
        Command::Repro { figure: Figure::Fig3b } => commands::repro_fig3b(format, steps)?,
        Command::Repro { figure: Figure::Fig4 } => commands::repro_fig4(steps)?,
    })
}

fn emit(report: &Report, out: Option<&Path>) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for a in &report.artifacts {
                let path = dir.join(&a.name);
                std::fs::write(&path, &a.contents).with_context(|| format!("writing {}", path.display()))?;
            }
            print!("{}", report.summary);
        }
        None => {
            if let Some(primary) = report.artifacts.first() {
                print!("{}", primary.contents);
            }
            eprint!("{}", report.summary);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match run(cli).and_then(|r| emit(&r, out.as_deref())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
