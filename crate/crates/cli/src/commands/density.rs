use std::sync::Arc;

use prequant_core::densities::{integrate_one_density, split_signed_density, Atlas, DensityIntegral, ManifoldDensity};
use prequant_core::Complex64;
use serde_json::{json, Value};

use super::{complex, CommandOutput};
use crate::config::{require, values, AtlasKind, SceneConfig};
use crate::report::Check;
use crate::{CliError, Context};

fn integral_json(r: &DensityIntegral) -> Value {
    json!({
        "per_chart": r.per_chart.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
        "total": complex(r.total),
        "converged": r.converged,
        "nodes": r.nodes,
    })
}

pub fn run(cfg: &SceneConfig, ctx: &Context) -> Result<CommandOutput, CliError> {
    let dc = require(&cfg.density, "density")?;
    let starts = values(&dc.starts, "density.starts")?;
    let scales = values(&dc.scales, "density.scales")?;
    let blend = dc.blend.value("density.blend")?;
    let atlas = match dc.atlas {
        AtlasKind::Circle => {
            if dc.r_inner.is_some() || dc.r_outer.is_some() {
                return Err(CliError::validation("density.r_inner and density.r_outer only apply to atlas = \"annulus\""));
            }
            Atlas::circle(&starts, &scales, blend)?
        }
        AtlasKind::Annulus => {
            let (Some(lo), Some(hi)) = (&dc.r_inner, &dc.r_outer) else {
                return Err(CliError::validation("atlas = \"annulus\" needs density.r_inner and density.r_outer"));
            };
            Atlas::annulus(lo.value("density.r_inner")?, hi.value("density.r_outer")?, &starts, &scales, blend)?
        }
    };
    let atlas = Arc::new(atlas);
    let tau = ManifoldDensity::parse_reference(&atlas, &dc.coefficient.re, &dc.coefficient.im, Complex64::new(1.0, 0.0))
        .map_err(|e| CliError::validation(format!("density.coefficient: {e}")))?;
    let integral = integrate_one_density(&tau)?;
    let partition = atlas.partition_deviation();
    let transition = tau.transition_residual();

    let mut checks = vec![
        Check::holds("converged", integral.converged),
        Check::at_most("partition_deviation", partition, 1e-10, ctx),
        Check::at_most("transition_residual", transition, 1e-8, ctx),
    ];
    let split = if dc.split {
        let (pos, neg) = split_signed_density(&tau)?;
        let p = integrate_one_density(&pos)?;
        let n = integrate_one_density(&neg)?;
        let recombined = (p.total - n.total - integral.total).norm();
        checks.push(Check::holds("split_converged", p.converged && n.converged));
        checks.push(Check::at_most("split_recombination", recombined, 1e-9, ctx));
        Some(json!({ "positive": integral_json(&p), "negative": integral_json(&n), "recombination_error": recombined }))
    } else {
        None
    };

    let mut result = integral_json(&integral);
    let obj = result.as_object_mut().expect("object");
    obj.insert("charts".into(), json!(atlas.charts().len()));
    obj.insert("partition_deviation".into(), json!(partition));
    obj.insert("transition_residual".into(), json!(transition));
    obj.insert("split".into(), split.unwrap_or(Value::Null));
    Ok(CommandOutput { result, checks, svg: None })
}
