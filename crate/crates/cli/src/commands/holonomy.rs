use prequant_core::polarization::{holonomy_report, leaf_section_check, Polarization};
use prequant_core::prequantum::PrequantumBundle;
use serde_json::json;

use super::{complex, CommandOutput};
use crate::config::{require, values, SceneConfig};
use crate::report::Check;
use crate::{CliError, Context};

const LEAF_SAMPLES: usize = 64;

pub fn run(cfg: &SceneConfig, ctx: &Context) -> Result<CommandOutput, CliError> {
    let hc = require(&cfg.holonomy, "holonomy")?;
    let r2 = values(&hc.r_squared, "holonomy.r_squared")?;
    if r2.is_empty() {
        return Err(CliError::validation("holonomy.r_squared is empty"));
    }
    if let Some(bad) = r2.iter().find(|v| **v <= 0.0) {
        return Err(CliError::validation(format!("holonomy.r_squared entries must be positive, got {bad}")));
    }
    let largest = r2.iter().cloned().fold(0.0, f64::max).sqrt();
    let r_max = match &hc.r_max {
        Some(r) => r.value("holonomy.r_max")?,
        None => largest + 0.5,
    };
    if r_max <= largest {
        return Err(CliError::validation(format!("holonomy.r_max = {r_max} does not contain the leaf r = {largest}")));
    }
    let tolerance = match &hc.tolerance {
        Some(t) => t.value("holonomy.tolerance")?,
        None => 1e-8,
    };
    let b = PrequantumBundle::punctured_plane(r_max);
    let pol = Polarization::circles(b.symplectic().clone())?;

    let mut checks = Vec::new();
    let mut leaves = Vec::new();
    for &v in &r2 {
        let rep = holonomy_report(&b, v.sqrt())?;
        let leaf = leaf_section_check(&b, &pol, v.sqrt(), LEAF_SAMPLES)?;
        let integral = (v - v.round()).abs() <= 1e-12;
        checks.push(Check::at_most(
            format!("closed_form_mismatch[r2={v}]"),
            (rep.numeric - rep.closed_form).norm(),
            tolerance,
            ctx,
        ));
        checks.push(Check::holds(format!("existence_matches_integrality[r2={v}]"), rep.polarized_exists == integral));
        leaves.push(json!({
            "r_squared": v,
            "r": rep.r,
            "holonomy": complex(rep.numeric),
            "closed_form": complex(rep.closed_form),
            "mismatch": rep.mismatch,
            "polarized_exists": rep.polarized_exists,
            "leaf_section_residual": leaf.residual,
            "leaf_section_jump": leaf.jump,
        }));
    }
    let result = json!({ "kappa": b.kappa(), "r_max": r_max, "leaves": leaves });
    Ok(CommandOutput { result, checks, svg: None })
}
