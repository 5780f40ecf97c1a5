use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use exchange_cli::{
    emit_csv, emit_detail, generate_ising_data, load_config, run_experiment, write_csv,
    HarnessError, RunOptions,
};

#[derive(Parser)]
#[command(
    name = "exchange-mcmc",
    version,
    about = "Run MCMC sweeps over doubly-intractable posteriors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every sweep point and replicate in a config and write the CSV table.
    Run {
        config: PathBuf,
        /// Override a config field, e.g. `--set sampler.iterations=1000`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Maximum concurrent chains (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check a config without running it.
    Validate {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Draw one exact Ising sample and write it in lattice text format.
    GenerateIsing {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long, allow_hyphen_values = true)]
        theta_j: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta_h: f64,
        #[arg(long)]
        seed: u64,
        /// Standard output when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            config,
            overrides,
            jobs,
        } => {
            let config = load_config(&config, &overrides)?;
            let result = run_experiment(&config, &RunOptions { jobs })?;
            let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                eprintln!(
                    "warning: {failed} of {} rows failed; see the error column",
                    result.rows.len()
                );
            }
            match &config.output.csv {
                Some(path) => {
                    emit_csv(&result, path)?;
                    eprintln!("wrote {} rows to {}", result.rows.len(), path.display());
                    if config.output.detail {
                        let dir = emit_detail(&result, path)?;
                        eprintln!("wrote traces to {}", dir.display());
                    }
                }
                None => {
                    if config.output.detail {
                        return Err(HarnessError::Validation(
                            "output.detail: requires output.csv".into(),
                        ));
                    }
                    write_csv(&result, std::io::stdout().lock()).map_err(|source| {
                        HarnessError::Csv {
                            path: "<stdout>".into(),
                            source,
                        }
                    })?;
                }
            }
        }
        Command::Validate { config, overrides } => {
            load_config(&config, &overrides)?;
            eprintln!("{}: ok", config.display());
        }
        Command::GenerateIsing {
            width,
            height,
            theta_j,
            theta_h,
            seed,
            output,
        } => {
            let text = generate_ising_data(width, height, theta_j, theta_h, seed)?.to_text();
            match output {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|source| HarnessError::Io { path, source })?,
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|source| HarnessError::Io {
                        path: "<stdout>".into(),
                        source,
                    })?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
