use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use prequant_cli::{run, CliError, Command, Options, EXIT_OK, EXIT_VALIDATION};

/// Run a prequantization scene described by a TOML config and print a JSON report.
#[derive(Debug, Parser)]
#[command(name = "prequant", version)]
struct Args {
    /// Which computation to run.
    #[arg(value_enum)]
    command: Command,
    /// Scene config (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write a phase-portrait SVG (`flow` only).
    #[arg(long)]
    plot: bool,
    /// Seed for every random choice; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Multiply every residual tolerance by this factor.
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
    /// Record wall time in the report (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

fn svg_path(out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => p.with_extension("svg"),
        None => PathBuf::from("phase-portrait.svg"),
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", args.config.display())))?;
    let options = Options {
        seed: args.seed,
        tolerance_scale: args.tolerance_scale,
        plot: args.plot,
        timing: args.timing,
    };
    let output = run(args.command, &text, &options)?;
    let write = |path: &Path, body: &str| {
        fs::write(path, body).map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))
    };
    if let Some(svg) = &output.svg {
        write(&svg_path(args.out.as_deref()), svg)?;
    }
    match &args.out {
        Some(path) => write(path, &output.json)?,
        None => print!("{}", output.json),
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_OK as u8);
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("prequant: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
