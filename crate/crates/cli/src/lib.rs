//! Command-line driver: declarative scene configs in, JSON reports out.

pub mod commands;
pub mod config;
pub mod rational;
pub mod report;
pub mod svg;

use std::time::Instant;

use config::SceneConfig;
use report::Report;

/// Exit status for reports produced without error.
pub const EXIT_OK: i32 = 0;
/// Exit status when the config or a precondition is rejected.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status when numerical work fails (singularity, divergence).
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<prequant_core::Error> for CliError {
    fn from(e: prequant_core::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<prequant_diffcoh::Error> for CliError {
    fn from(e: prequant_diffcoh::Error) -> Self {
        use prequant_diffcoh::Error as D;
        match e {
            D::Sampling(_) | D::Overflow => CliError::Numeric(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Flow,
    PoissonCheck,
    Prequantize,
    Holonomy,
    PolarizedCheck,
    IntegrateDensity,
    Cocycle,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Flow,
        Command::PoissonCheck,
        Command::Prequantize,
        Command::Holonomy,
        Command::PolarizedCheck,
        Command::IntegrateDensity,
        Command::Cocycle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Flow => "flow",
            Command::PoissonCheck => "poisson-check",
            Command::Prequantize => "prequantize",
            Command::Holonomy => "holonomy",
            Command::PolarizedCheck => "polarized-check",
            Command::IntegrateDensity => "integrate-density",
            Command::Cocycle => "cocycle",
        }
    }
}

/// Settings shared by every command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Context {
    pub seed: u64,
    pub tolerance_scale: f64,
    pub plot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub seed: Option<u64>,
    pub tolerance_scale: f64,
    pub plot: bool,
    pub timing: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: None,
            tolerance_scale: 1.0,
            plot: false,
            timing: false,
        }
    }
}

/// A finished run: the JSON report and, with `--plot`, an SVG document.
#[derive(Debug, Clone)]
pub struct Output {
    pub report: Report,
    pub json: String,
    pub svg: Option<String>,
}

/// Parses `config_text`, runs `command` and renders the report.
pub fn run(command: Command, config_text: &str, options: &Options) -> Result<Output, CliError> {
    let start = Instant::now();
    if !(options.tolerance_scale.is_finite() && options.tolerance_scale > 0.0) {
        return Err(CliError::validation(format!(
            "--tolerance-scale must be positive and finite, got {}",
            options.tolerance_scale
        )));
    }
    let config = SceneConfig::parse(config_text)?;
    let ctx = Context {
        seed: options.seed.or(config.seed).unwrap_or(0),
        tolerance_scale: options.tolerance_scale,
        plot: options.plot,
    };
    let out = commands::dispatch(command, &config, &ctx)?;
    let wall_time = options.timing.then(|| start.elapsed().as_secs_f64());
    let report = Report::new(command.name(), &config, &ctx, out.result, out.checks, wall_time)?;
    let json = report.to_json()?;
    Ok(Output {
        report,
        json,
        svg: out.svg,
    })
}
