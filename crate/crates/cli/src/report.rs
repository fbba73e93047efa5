//! The JSON report written by every command.

use serde::Serialize;
use serde_json::Value;

use crate::config::SceneConfig;
use crate::{CliError, Context};

/// Bumped whenever a field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Equals,
}

/// A residual compared against a (scaled) tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// `value <= tolerance * scale`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64, ctx: &Context) -> Check {
        let threshold = tolerance * ctx.tolerance_scale;
        Check {
            name: name.into(),
            value,
            comparison: Comparison::AtMost,
            threshold,
            pass: value <= threshold,
        }
    }

    /// `value >= bound` (not scaled: these are lower bounds on ratios).
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            value,
            comparison: Comparison::AtLeast,
            threshold: bound,
            pass: value >= bound,
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Check {
        Check {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            comparison: Comparison::Equals,
            threshold: 1.0,
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub config: Value,
    pub result: Value,
    pub residuals: Vec<Check>,
    pub all_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Report {
    pub fn new(
        command: &str,
        config: &SceneConfig,
        ctx: &Context,
        result: Value,
        residuals: Vec<Check>,
        wall_time_s: Option<f64>,
    ) -> Result<Report, CliError> {
        let config = serde_json::to_value(config).map_err(|e| CliError::validation(format!("config echo: {e}")))?;
        Ok(Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            seed: ctx.seed,
            tolerance_scale: ctx.tolerance_scale,
            config,
            all_passed: residuals.iter().all(|c| c.pass),
            result,
            residuals,
            wall_time_s,
        })
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Numeric(format!("report: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.residuals.iter().find(|c| c.name == name)
    }
}
