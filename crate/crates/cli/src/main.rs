use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use joindeg_core::commands::{
    cmd_analyze, cmd_crosscheck, cmd_oracle, parse_field, AnalyzeFlags, CrosscheckFlags, OracleFlags, Outcome,
    SeedFlags, DEFAULT_POINTS, EXIT_INPUT,
};
use joindeg_core::field::FieldSpec;
use joindeg_core::instance::InstanceFile;
use serde::Serialize;

/// Degrees and fibre counts of joins of parametrized projective varieties.
#[derive(Parser)]
#[command(name = "joindeg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every analysis section on an instance file.
    Analyze {
        file: PathBuf,
        /// Overrides the file seed and JOINDEG_SEED.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Read the instance over another field: `Q` or a prime.
        #[arg(long, value_parser = field_arg)]
        field_override: Option<FieldSpec>,
        /// Also write the report here.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Brute-force counts over a prime field.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        budget: Option<u64>,
        /// Join points at which to take a census.
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Compare the exact census with the finite-field census.
    Crosscheck {
        file: PathBuf,
        /// Prime for rational instances (default 31).
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
}

fn field_arg(s: &str) -> Result<FieldSpec, String> {
    parse_field(s).map_err(|e| e.to_string())
}

fn seeds(seed: Option<u64>) -> SeedFlags {
    SeedFlags {
        seed,
        env: std::env::var("JOINDEG_SEED").ok(),
    }
}

fn emit<T: Serialize>(out: Outcome<T>, json_out: Option<&Path>) -> u8 {
    let text = out.to_json();
    if let Some(p) = json_out {
        if let Err(e) = std::fs::write(p, &text) {
            eprintln!("error: cannot write {}: {e}", p.display());
            return EXIT_INPUT;
        }
    }
    // a closed stdout is not worth a panic
    let _ = std::io::stdout().write_all(text.as_bytes());
    out.exit
}

fn run(cli: Cli) -> Result<u8, String> {
    let load = |p: &Path| InstanceFile::load(p).map_err(|e| e.to_string());
    let code = match cli.command {
        Command::Analyze {
            file,
            seed,
            trials,
            field_override,
            json_out,
        } => {
            let flags = AnalyzeFlags {
                seeds: seeds(seed),
                trials,
                field: field_override,
            };
            let out = cmd_analyze(&load(&file)?, &flags).map_err(|e| e.to_string())?;
            emit(out, json_out.as_deref())
        }
        Command::Oracle {
            file,
            prime,
            budget,
            points,
            seed,
            json_out,
        } => {
            let flags = OracleFlags {
                seeds: seeds(seed),
                prime,
                budget,
                points,
            };
            let out = cmd_oracle(&load(&file)?, &flags).map_err(|e| e.to_string())?;
            emit(out, json_out.as_deref())
        }
        Command::Crosscheck {
            file,
            prime,
            points,
            seed,
            json_out,
        } => {
            let flags = CrosscheckFlags {
                seeds: seeds(seed),
                prime,
                points,
            };
            let out = cmd_crosscheck(&load(&file)?, &flags).map_err(|e| e.to_string())?;
            emit(out, json_out.as_deref())
        }
    };
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are input errors; clap's own code would read as a section error
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
