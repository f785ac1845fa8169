use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use privfunnel_core::experiments::{
    example1_default_grid, format_joint, generate_joint, instance_rng, parse_float_list, run_sweep,
    validate_example1, ExperimentConfig,
};

const EXIT_VALIDATION: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "privfunnel",
    version,
    about = "Lift-constrained privacy mechanisms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded epsilon sweep and write per-instance and mean CSV files.
    Sweep {
        /// Flat `key = value` configuration file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare the chi-square heuristic against the closed-form two-symbol
    /// mechanism. Exits with 1 if any utility differs by more than 1e-3 nats.
    #[command(name = "validate-example1")]
    ValidateExample1 {
        /// Comma-separated budgets in (0, 0.07].
        #[arg(long)]
        eps: Option<String>,
    },
    /// Draw a random joint distribution and write it as a text matrix.
    Gen {
        #[arg(long = "s", default_value_t = 4)]
        s_size: usize,
        #[arg(long = "x", default_value_t = 7)]
        x_size: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(command: Command) -> privfunnel_core::Result<u8> {
    match command {
        Command::Sweep { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let outcome = run_sweep(&cfg)?;
            eprintln!(
                "wrote {} rows to {} and {} rows to {}",
                outcome.rows.len(),
                outcome.rows_path.display(),
                outcome.aggregate.len(),
                outcome.aggregate_path.display()
            );
            Ok(0)
        }
        Command::ValidateExample1 { eps } => {
            let grid = match eps {
                Some(text) => parse_float_list(&text).map_err(|e| {
                    privfunnel_core::Error::Config(format!("invalid --eps list: {e}"))
                })?,
                None => example1_default_grid(),
            };
            let report = validate_example1(&grid)?;
            report.write_csv(std::io::stdout().lock())?;
            if report.passed() {
                Ok(0)
            } else {
                for r in report.rows.iter().filter(|r| r.flagged()) {
                    eprintln!(
                        "mismatch at eps {}: utility differs by {:.3e} nats",
                        r.epsilon,
                        r.utility_diff()
                    );
                }
                Ok(EXIT_VALIDATION)
            }
        }
        Command::Gen {
            s_size,
            x_size,
            seed,
            out,
        } => {
            let joint = generate_joint(s_size, x_size, &mut instance_rng(seed, 0))?;
            fs::write(&out, format_joint(&joint)).map_err(|source| privfunnel_core::Error::Io {
                path: out.clone(),
                source,
            })?;
            Ok(0)
        }
    }
}
