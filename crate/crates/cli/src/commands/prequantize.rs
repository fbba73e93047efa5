use std::f64::consts::PI;
use std::sync::Arc;

use prequant_core::corpus::Corpus;
use prequant_core::expr::ComplexExpr;
use prequant_core::geometry::{punctured_plane, tautological_one_form_on, OneForm};
use prequant_core::hamilton::poisson_bracket;
use prequant_core::prequantum::{PrequantumBundle, Section};
use prequant_core::quadrature::QuadratureGrid;
use serde_json::json;

use super::{count, parse_on, phase_space, section_json, section_on, CommandOutput};
use crate::config::{require, BundleKind, PrequantizeConfig, SceneConfig};
use crate::report::Check;
use crate::{CliError, Context};

const SKEW_BOX: f64 = 2.0;

fn bundle(cfg: &SceneConfig, pc: &PrequantizeConfig) -> Result<PrequantumBundle, CliError> {
    let kappa = pc.kappa.as_ref().map(|k| k.value("prequantize.kappa")).transpose()?;
    match pc.bundle {
        BundleKind::Standard => {
            if pc.r_max.is_some() {
                return Err(CliError::validation("prequantize.r_max only applies to bundle = \"punctured-plane\""));
            }
            let omega = phase_space(cfg)?;
            let chart = omega.chart().clone();
            let potential = match &pc.potential {
                None => tautological_one_form_on(&chart),
                Some(coeffs) => {
                    if coeffs.len() != chart.dimension() {
                        return Err(CliError::validation(format!(
                            "prequantize.potential has {} coefficients, the chart has {}",
                            coeffs.len(),
                            chart.dimension()
                        )));
                    }
                    let exprs = coeffs
                        .iter()
                        .enumerate()
                        .map(|(i, s)| parse_on(&chart, s, &format!("prequantize.potential[{i}]")))
                        .collect::<Result<Vec<_>, _>>()?;
                    OneForm::new(&chart, exprs)?
                }
            };
            Ok(PrequantumBundle::new(omega, potential, kappa.unwrap_or(2.0 * PI))?)
        }
        BundleKind::PuncturedPlane => {
            if cfg.phase_space.is_some() || pc.potential.is_some() {
                return Err(CliError::validation(
                    "the punctured-plane bundle fixes its chart and potential; drop [phase_space] and prequantize.potential",
                ));
            }
            let r_max = match &pc.r_max {
                Some(r) => r.value("prequantize.r_max")?,
                None => 2.0,
            };
            if r_max <= 0.0 {
                return Err(CliError::validation(format!("prequantize.r_max must be positive, got {r_max}")));
            }
            let (omega, alpha) = punctured_plane(r_max);
            Ok(PrequantumBundle::new(Arc::new(omega), alpha, kappa.unwrap_or(1.0))?)
        }
    }
}

pub fn run(cfg: &SceneConfig, ctx: &Context) -> Result<CommandOutput, CliError> {
    let pc = require(&cfg.prequantize, "prequantize")?;
    let b = bundle(cfg, pc)?;
    let chart = b.chart().clone();
    let vars = chart.variables().clone();
    let points = chart.sample(count(pc.points, 100, "prequantize.points", 10_000)?, ctx.seed);
    let mut corpus = Corpus::new(ctx.seed);
    let mut checks = Vec::new();

    let mut operators = Vec::new();
    for (i, op) in pc.operators.iter().enumerate() {
        let f = parse_on(&chart, &op.f, &format!("prequantize.operators[{i}].f"))?;
        let s = section_on(&chart, &op.section, &format!("prequantize.operators[{i}].section"))?;
        let qs = b.prequantum_operator(&f, &s)?;
        operators.push(json!({ "f": f.to_string(), "section": section_json(&s), "result": section_json(&qs) }));
    }

    let probe = corpus.section(&chart);
    let mut pairs = Vec::new();
    let mut explicit = (0.0f64, 0.0f64);
    for (i, [a, c]) in pc.pairs.iter().enumerate() {
        let f = parse_on(&chart, a, &format!("prequantize.pairs[{i}][0]"))?;
        let g = parse_on(&chart, c, &format!("prequantize.pairs[{i}][1]"))?;
        let r = b.commutator_check(&f, &g, &probe, &points)?;
        explicit = (explicit.0.max(r.operator), explicit.1.max(r.connection));
        pairs.push(json!({
            "f": f.to_string(),
            "g": g.to_string(),
            "bracket": poisson_bracket(&f, &g, b.symplectic()).to_string(),
            "operator_residual": r.operator,
            "connection_residual": r.connection,
        }));
    }
    if !pc.pairs.is_empty() {
        checks.push(Check::at_most("commutator", explicit.0, 1e-7, ctx));
        checks.push(Check::at_most("connection_commutator", explicit.1, 1e-7, ctx));
    }

    let random_pairs = count(pc.random_pairs, 20, "prequantize.random_pairs", 1000)?;
    let mut random = (0.0f64, 0.0f64);
    for _ in 0..random_pairs {
        let f = corpus.polynomial(&vars, 3, 3);
        let g = corpus.polynomial(&vars, 3, 3);
        let s = corpus.section(&chart);
        let r = b.commutator_check(&f, &g, &s, &points)?;
        random = (random.0.max(r.operator), random.1.max(r.connection));
    }
    if random_pairs > 0 {
        checks.push(Check::at_most("random_commutator", random.0, 1e-7, ctx));
        checks.push(Check::at_most("random_connection_commutator", random.1, 1e-7, ctx));
    }

    let curvature_samples = count(pc.curvature_samples, 20, "prequantize.curvature_samples", 1000)?;
    let mut curvature: f64 = 0.0;
    for _ in 0..curvature_samples {
        let x = corpus.vector_field(&chart, 2);
        let y = corpus.vector_field(&chart, 2);
        let s = corpus.section(&chart);
        curvature = curvature.max(b.curvature_residual(&x, &y, &s, &points)?);
    }
    if curvature_samples > 0 {
        checks.push(Check::at_most("curvature", curvature, 1e-8, ctx));
    }

    let skew = match &pc.skew {
        None => None,
        Some(sk) => {
            if pc.bundle != BundleKind::Standard || chart.dimension() != 2 {
                return Err(CliError::validation("prequantize.skew needs the standard bundle on a 2-dimensional phase space"));
            }
            let f = parse_on(&chart, &sk.f, "prequantize.skew.f")?;
            let nodes = count(sk.nodes, 201, "prequantize.skew.nodes", 2001)?;
            if nodes < 3 || nodes % 2 == 0 {
                return Err(CliError::validation(format!("prequantize.skew.nodes must be odd and at least 3, got {nodes}")));
            }
            let grid = QuadratureGrid::uniform(vec![-SKEW_BOX; 2], vec![SKEW_BOX; 2], nodes)?;
            let (s, t) = skew_pair(&chart)?;
            let coarse = b.skew_hermiticity_check(&f, &s, &t, &grid)?;
            let fine = b.skew_hermiticity_check(&f, &s, &t, &grid.refined())?;
            let ratio = if fine > 0.0 { coarse / fine } else { f64::INFINITY };
            checks.push(Check::at_most("skew_hermiticity", coarse, 1e-6, ctx));
            // an exact identity shows up as a residual that shrinks with the grid
            if coarse > 1e-13 {
                checks.push(Check::at_least("skew_refinement_ratio", ratio, 4.0));
            }
            Some(json!({ "f": f.to_string(), "nodes": nodes, "coarse": coarse, "fine": fine, "ratio": if ratio.is_finite() { json!(ratio) } else { json!(null) } }))
        }
    };

    let result = json!({
        "bundle": match pc.bundle { BundleKind::Standard => "standard", BundleKind::PuncturedPlane => "punctured-plane" },
        "chart": chart.variables().to_vec(),
        "kappa": b.kappa(),
        "potential": b.potential().coefficients().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        "potential_residual": b.potential_residual(),
        "operators": operators,
        "pairs": pairs,
        "random_pairs": random_pairs,
        "random_commutator": { "operator": random.0, "connection": random.1 },
        "curvature_samples": curvature_samples,
        "curvature_residual": curvature,
        "skew": skew,
    });
    Ok(CommandOutput { result, checks, svg: None })
}

/// Two smooth compactly supported sections inside `[-2, 2]^2`.
fn skew_pair(chart: &Arc<prequant_core::geometry::Chart>) -> Result<(Section, Section), CliError> {
    let (q, p) = (chart.coordinate(0), chart.coordinate(1));
    let s = Section::bump(chart, &[0.1, -0.2], &[1.2, 1.0], 4)?;
    let wave = Section::symbolic(chart, ComplexExpr::new(q.scale(2.0).cos(), p.sin() + q))?;
    let t = Section::bump(chart, &[-0.3, 0.4], &[1.0, 1.3], 4)?.mul(&wave)?;
    Ok((s, t))
}
