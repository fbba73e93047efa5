use std::f64::consts::PI;
use std::sync::Arc;

use prequant_core::geometry::tautological_one_form_on;
use prequant_core::polarization::{
    bracket_closure_check, four_term_check, is_polarization_preserving, polarized_residual, qf_preserves_polarized_check,
    Polarization, MEMBERSHIP_TOLERANCE,
};
use prequant_core::prequantum::PrequantumBundle;
use serde_json::json;

use super::{count, parse_on, phase_space, section_json, section_on, CommandOutput};
use crate::config::{require, PolarizationKind, SceneConfig};
use crate::report::Check;
use crate::{CliError, Context};

/// Residual below which a function counts as preserving the polarization.
const PRESERVING: f64 = 1e-9;

pub fn run(cfg: &SceneConfig, ctx: &Context) -> Result<CommandOutput, CliError> {
    let pc = require(&cfg.polarized, "polarized")?;
    let (bundle, pol) = match pc.polarization {
        PolarizationKind::Vertical => {
            if pc.r_max.is_some() {
                return Err(CliError::validation("polarized.r_max only applies to polarization = \"circles\""));
            }
            let omega = phase_space(cfg)?;
            let theta = tautological_one_form_on(omega.chart());
            let b = PrequantumBundle::new(omega.clone(), theta, 2.0 * PI)?;
            (b, Polarization::vertical_on(omega)?)
        }
        PolarizationKind::Circles => {
            if cfg.phase_space.is_some() {
                return Err(CliError::validation("the circle polarization lives on the punctured plane; drop [phase_space]"));
            }
            let r_max = match &pc.r_max {
                Some(r) => r.value("polarized.r_max")?,
                None => 2.0,
            };
            if r_max <= 0.0 {
                return Err(CliError::validation(format!("polarized.r_max must be positive, got {r_max}")));
            }
            let b = PrequantumBundle::punctured_plane(r_max);
            let pol = Polarization::circles(Arc::clone(b.symplectic()))?;
            (b, pol)
        }
    };
    let chart = bundle.chart().clone();
    let points = chart.sample(count(pc.points, 200, "polarized.points", 10_000)?, ctx.seed);
    let cert = pol.certificate();
    let mut checks = vec![
        Check::at_most("polarization_isotropy", cert.isotropy, MEMBERSHIP_TOLERANCE, ctx),
        Check::at_most("polarization_involutivity", cert.involutivity, MEMBERSHIP_TOLERANCE, ctx),
    ];

    let mut sections = Vec::new();
    let mut polarized = Vec::new();
    for (i, sc) in pc.sections.iter().enumerate() {
        let s = section_on(&chart, sc, &format!("polarized.sections[{i}]"))?;
        let r = polarized_residual(&bundle, &s, &pol, &points)?;
        let ok = r <= MEMBERSHIP_TOLERANCE;
        sections.push(json!({ "section": section_json(&s), "residual": r, "polarized": ok }));
        if ok {
            polarized.push(s);
        }
    }

    let mut functions = Vec::new();
    let mut preserving = Vec::new();
    for (i, src) in pc.functions.iter().enumerate() {
        let f = parse_on(&chart, src, &format!("polarized.functions[{i}]"))?;
        let r = is_polarization_preserving(&f, &pol, &points)?;
        let ok = r <= PRESERVING;
        functions.push(json!({ "f": f.to_string(), "residual": r, "preserving": ok }));
        if ok {
            preserving.push(f);
        }
    }

    let mut qf: f64 = 0.0;
    let mut four_terms: f64 = 0.0;
    let mut expansion: f64 = 0.0;
    for f in &preserving {
        for s in &polarized {
            qf = qf.max(qf_preserves_polarized_check(&bundle, &pol, f, s, &points)?);
            let r = four_term_check(&bundle, &pol, f, s, &points)?;
            four_terms = r.terms.iter().fold(four_terms, |m, t| m.max(*t));
            expansion = expansion.max(r.expansion / r.total.max(1.0));
        }
    }
    let mut closure: f64 = 0.0;
    for f in &preserving {
        for g in &preserving {
            closure = closure.max(bracket_closure_check(f, g, &pol, &points)?);
        }
    }
    if !preserving.is_empty() && !polarized.is_empty() {
        checks.push(Check::at_most("qf_preserves_polarized", qf, 1e-7, ctx));
        checks.push(Check::at_most("four_term_terms", four_terms, 1e-7, ctx));
        checks.push(Check::at_most("four_term_expansion", expansion, 1e-7, ctx));
    }
    if !preserving.is_empty() {
        checks.push(Check::at_most("bracket_closure", closure, 1e-7, ctx));
    }

    let result = json!({
        "polarization": match pc.polarization { PolarizationKind::Vertical => "vertical", PolarizationKind::Circles => "circles" },
        "chart": chart.variables().to_vec(),
        "certificate": {
            "min_singular_value": cert.min_singular_value,
            "isotropy": cert.isotropy,
            "involutivity": cert.involutivity,
        },
        "sections": sections,
        "functions": functions,
        "qf_preserves_residual": qf,
        "four_term_max": four_terms,
        "four_term_expansion": expansion,
        "bracket_closure_residual": closure,
    });
    Ok(CommandOutput { result, checks, svg: None })
}
