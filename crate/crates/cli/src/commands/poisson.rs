use prequant_core::corpus::Corpus;
use prequant_core::hamilton::{liouville_residual, poisson_bracket, poisson_residuals, PoissonResiduals};
use serde_json::json;

use super::{count, parse_on, phase_space, CommandOutput};
use crate::config::require;
use crate::report::Check;
use crate::{CliError, Context};

pub fn run(cfg: &crate::config::SceneConfig, ctx: &Context) -> Result<CommandOutput, CliError> {
    let pc = require(&cfg.poisson, "poisson")?;
    let omega = phase_space(cfg)?;
    let chart = omega.chart().clone();
    let vars = chart.variables().clone();
    let points = chart.sample(count(pc.points, 100, "poisson.points", 10_000)?, ctx.seed);
    let explicit = pc
        .functions
        .iter()
        .enumerate()
        .map(|(i, s)| parse_on(&chart, s, &format!("poisson.functions[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    if explicit.len() > 8 {
        return Err(CliError::validation("poisson.functions: at most 8 functions (all ordered triples are checked)"));
    }

    let mut total = PoissonResiduals::default();
    let mut triples = 0;
    for f in &explicit {
        for g in &explicit {
            for h in &explicit {
                total = total.merge(&poisson_residuals(&omega, f, g, h, &points)?);
                triples += 1;
            }
        }
    }
    let mut corpus = Corpus::new(ctx.seed);
    for _ in 0..count(pc.random_triples, 50, "poisson.random_triples", 10_000)? {
        let f = corpus.polynomial(&vars, 3, 3);
        let g = corpus.polynomial(&vars, 3, 3);
        let h = corpus.polynomial(&vars, 3, 3);
        total = total.merge(&poisson_residuals(&omega, &f, &g, &h, &points)?);
        triples += 1;
    }
    let liouville_points = chart.sample(200, ctx.seed.wrapping_add(1));
    let mut liouville: f64 = 0.0;
    let functions = count(pc.liouville_functions, 20, "poisson.liouville_functions", 10_000)?;
    for _ in 0..functions {
        let f = corpus.smooth(&vars);
        liouville = liouville.max(liouville_residual(&omega, &f, &liouville_points)?);
    }

    let brackets: Vec<_> = explicit
        .iter()
        .flat_map(|f| explicit.iter().map(move |g| (f, g)))
        .map(|(f, g)| json!({ "f": f.to_string(), "g": g.to_string(), "bracket": poisson_bracket(f, g, &omega).to_string() }))
        .collect();
    let checks = vec![
        Check::at_most("antisymmetry", total.antisymmetry, 1e-8, ctx),
        Check::at_most("leibniz", total.leibniz, 1e-8, ctx),
        Check::at_most("jacobi", total.jacobi, 1e-8, ctx),
        Check::at_most("hamiltonian_homomorphism", total.homomorphism, 1e-9, ctx),
        Check::at_most("liouville", liouville, 1e-9, ctx),
    ];
    let result = json!({
        "triples": triples,
        "points": points.len(),
        "residuals": {
            "antisymmetry": total.antisymmetry,
            "leibniz": total.leibniz,
            "jacobi": total.jacobi,
            "hamiltonian_homomorphism": total.homomorphism,
        },
        "liouville_functions": functions,
        "liouville_residual": liouville,
        "brackets": brackets,
    });
    Ok(CommandOutput { result, checks, svg: None })
}
