//! One module per subcommand; each turns a validated config into a result
//! payload plus residual checks.

mod cocycle;
mod density;
mod flow;
mod holonomy;
mod poisson;
mod polarized;
mod prequantize;

use std::sync::Arc;

use prequant_core::expr::{ComplexExpr, Expression};
use prequant_core::geometry::{
    canonical_symplectic_on, twisted_cotangent_on, Chart, SignConvention, SymplecticStructure, TwoForm,
};
use prequant_core::prequantum::Section;
use prequant_core::Complex64;
use serde_json::{json, Value};

use crate::config::{Convention, FormKind, SceneConfig, SectionConfig};
use crate::report::Check;
use crate::{CliError, Command, Context};

pub struct CommandOutput {
    pub result: Value,
    pub checks: Vec<Check>,
    pub svg: Option<String>,
}

pub fn dispatch(command: Command, cfg: &SceneConfig, ctx: &Context) -> Result<CommandOutput, CliError> {
    if ctx.plot && command != Command::Flow {
        return Err(CliError::validation(format!(
            "--plot draws phase portraits and is only available for `flow`, not `{}`",
            command.name()
        )));
    }
    match command {
        Command::Flow => flow::run(cfg, ctx),
        Command::PoissonCheck => poisson::run(cfg, ctx),
        Command::Prequantize => prequantize::run(cfg, ctx),
        Command::Holonomy => holonomy::run(cfg, ctx),
        Command::PolarizedCheck => polarized::run(cfg, ctx),
        Command::IntegrateDensity => density::run(cfg, ctx),
        Command::Cocycle => cocycle::run(cfg, ctx),
    }
}

const DEFAULT_BOUND: f64 = 2.0;

/// The symplectic structure described by `[phase_space]` (canonical
/// `T*R` on `[-2, 2]^2` when the table is absent).
pub(crate) fn phase_space(cfg: &SceneConfig) -> Result<Arc<SymplecticStructure>, CliError> {
    let (n, bound, form, twist, convention) = match &cfg.phase_space {
        None => (1, DEFAULT_BOUND, FormKind::Canonical, &[][..], Convention::Standard),
        Some(ps) => {
            let bound = match &ps.bound {
                Some(b) => b.value("phase_space.bound")?,
                None => DEFAULT_BOUND,
            };
            (ps.degrees, bound, ps.form, &ps.twist[..], ps.convention)
        }
    };
    if n == 0 || n > 4 {
        return Err(CliError::validation(format!("phase_space.degrees must be 1..=4, got {n}")));
    }
    if bound <= 0.0 {
        return Err(CliError::validation(format!("phase_space.bound must be positive, got {bound}")));
    }
    let chart = Arc::new(Chart::phase_space(n, bound));
    let omega = match form {
        FormKind::Canonical => {
            if !twist.is_empty() {
                return Err(CliError::validation("phase_space.twist needs form = \"twisted\""));
            }
            canonical_symplectic_on(&chart)?
        }
        FormKind::Twisted => {
            let names: Vec<String> = chart.variables()[..n].to_vec();
            let base = Arc::new(Chart::new("base", &names, vec![-bound; n], vec![bound; n])?);
            let entries = twist
                .iter()
                .enumerate()
                .map(|(k, t)| Ok((t.i, t.j, parse_on(&base, &t.coefficient, &format!("phase_space.twist[{k}]"))?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            let tau = TwoForm::from_upper(&base, entries)?;
            twisted_cotangent_on(&chart, &tau)?
        }
    };
    let omega = match convention {
        Convention::Standard => omega,
        Convention::Flipped => omega.with_convention(SignConvention::Flipped),
    };
    Ok(Arc::new(omega))
}

pub(crate) fn parse_on(chart: &Chart, source: &str, field: &str) -> Result<Expression, CliError> {
    chart
        .parse(source)
        .map_err(|e| CliError::validation(format!("{field}: `{source}`: {e}")))
}

pub(crate) fn section_on(chart: &Arc<Chart>, s: &SectionConfig, field: &str) -> Result<Section, CliError> {
    let re = parse_on(chart, &s.re, &format!("{field}.re"))?;
    let im = parse_on(chart, &s.im, &format!("{field}.im"))?;
    Ok(Section::symbolic(chart, ComplexExpr::new(re, im))?)
}

pub(crate) fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub(crate) fn section_json(s: &Section) -> Value {
    match s.as_symbolic() {
        Some(e) => json!({ "re": e.re.to_string(), "im": e.im.to_string() }),
        None => Value::Null,
    }
}

pub(crate) fn count(value: Option<usize>, default: usize, field: &str, max: usize) -> Result<usize, CliError> {
    let v = value.unwrap_or(default);
    if v > max {
        return Err(CliError::validation(format!("{field} = {v} exceeds the limit {max}")));
    }
    Ok(v)
}
