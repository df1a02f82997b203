//! `n2`: runs `.n2` problem files.
//!
//! Exit status 0 when every verdict is zero and every expectation matches,
//! 1 on a nonzero or inconclusive verdict or a mismatch, 2 on usage or
//! parse errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noether2::io::{parse, run_pipeline, Options, Stage};
use noether2::ZeroTestConfig;

#[derive(Parser)]
#[command(name = "n2", version, about = "Noether's second theorem, symbolically")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Euler–Lagrange expressions.
    El(Run),
    /// Relations between the Euler–Lagrange expressions, or residuals
    /// against the multipliers when constraints are present.
    Relation(Run),
    /// Conservation law and its specializations.
    Claw(Run),
    /// Everything, checked against the file's `expect` sections.
    Verify(Run),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Run {
    file: PathBuf,
    /// Random evaluation points per zero test.
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(1..))]
    trials: u32,
    /// Relative tolerance for floating-point zero tests.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Compare expected fluxes component by component.
    #[arg(long)]
    expect_strict: bool,
    /// Include per-step timings in the output.
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, run) = match cli.command {
        Command::El(r) => (Stage::El, r),
        Command::Relation(r) => (Stage::Relation, r),
        Command::Claw(r) => (Stage::Claw, r),
        Command::Verify(r) => (Stage::Verify, r),
    };
    if !(run.tol > 0.0 && run.tol.is_finite()) {
        eprintln!("n2: --tol must be a positive number");
        return ExitCode::from(2);
    }
    let text = match std::fs::read_to_string(&run.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("n2: {}: {e}", run.file.display());
            return ExitCode::from(2);
        }
    };
    let problem = match parse(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("n2: {}: {e}", run.file.display());
            return ExitCode::from(2);
        }
    };
    let options = Options {
        config: ZeroTestConfig {
            trials: run.trials as usize,
            tol: run.tol,
            seed: run.seed,
        },
        expect_strict: run.expect_strict,
        timing: run.timing,
        stage,
    };
    let doc = run_pipeline(&problem, &options);
    match run.format {
        Format::Text => print!("{}", doc.to_text()),
        Format::Json => println!("{}", doc.to_json()),
    }
    if doc.check().is_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
