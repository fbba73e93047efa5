use prequant_core::hamilton::{integrate_flow_with, HamiltonianSystem, IntegratorChoice};
use serde_json::json;

use super::{count, parse_on, phase_space, CommandOutput};
use crate::config::{require, values, IntegratorName};
use crate::report::Check;
use crate::svg::phase_portrait;
use crate::{CliError, Context};

const PORTRAIT_POINTS: usize = 2000;

pub fn run(cfg: &crate::config::SceneConfig, ctx: &Context) -> Result<CommandOutput, CliError> {
    let fc = require(&cfg.flow, "flow")?;
    let omega = phase_space(cfg)?;
    let chart = omega.chart().clone();
    let h = parse_on(&chart, &fc.hamiltonian, "flow.hamiltonian")?;
    let sys = HamiltonianSystem::new(omega.clone(), h)?;
    let x0 = values(&fc.initial, "flow.initial")?;
    let duration = fc.duration.value("flow.duration")?;
    let dt = fc.dt.value("flow.dt")?;
    let choice = match fc.integrator {
        IntegratorName::Auto => IntegratorChoice::Auto,
        IntegratorName::Leapfrog => IntegratorChoice::Leapfrog,
        IntegratorName::Rk4 => IntegratorChoice::Rk4,
    };
    let traj = integrate_flow_with(&sys, &x0, duration, dt, choice)?;
    let end = traj.final_state();
    let return_error = x0.iter().zip(end).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let shown = count(fc.report_states, 101, "flow.report_states", 100_000)?.min(traj.len());
    let states: Vec<_> = (0..shown)
        .map(|k| {
            let i = if shown <= 1 { 0 } else { k * (traj.len() - 1) / (shown - 1) };
            let mut row = vec![traj.time(i)];
            row.extend_from_slice(traj.state(i));
            row
        })
        .collect();
    let field: Vec<String> = sys.vector_field().components().iter().map(|e| e.to_string()).collect();

    let mut checks = Vec::new();
    let energy_tol = match &fc.energy_tolerance {
        Some(t) => t.value("flow.energy_tolerance")?,
        None => 1e-6,
    };
    checks.push(Check::at_most("energy_drift", traj.energy_drift, energy_tol, ctx));
    if let Some(t) = &fc.return_tolerance {
        checks.push(Check::at_most("return_error", return_error, t.value("flow.return_tolerance")?, ctx));
    }
    if let Some(expected) = &fc.expected_field {
        if expected.len() != chart.dimension() {
            return Err(CliError::validation(format!(
                "flow.expected_field has {} components, the chart has {}",
                expected.len(),
                chart.dimension()
            )));
        }
        let exprs = expected
            .iter()
            .enumerate()
            .map(|(i, s)| parse_on(&chart, s, &format!("flow.expected_field[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let xi = sys.vector_field();
        let mut worst: f64 = 0.0;
        for x in chart.sample(100, ctx.seed) {
            let v = xi.evaluate(&x)?;
            for (vi, e) in v.iter().zip(&exprs) {
                worst = worst.max((vi - e.evaluate(&x).map_err(prequant_core::Error::from)?).abs());
            }
        }
        checks.push(Check::at_most("vector_field_mismatch", worst, 1e-12, ctx));
    }

    let svg = ctx.plot.then(|| {
        let n = omega.half_dimension();
        let stride = traj.len().div_ceil(PORTRAIT_POINTS).max(1);
        let pts: Vec<(f64, f64)> = traj.states().step_by(stride).map(|x| (x[0], x[n])).collect();
        let names = chart.variables();
        phase_portrait(&format!("H = {}", sys.hamiltonian()), &names[0], &names[n], &pts)
    });

    let result = json!({
        "hamiltonian": sys.hamiltonian().to_string(),
        "vector_field": field,
        "integrator": traj.integrator.name(),
        "steps": traj.len() - 1,
        "dt": dt,
        "initial_state": x0,
        "final_state": end,
        "return_error": return_error,
        "energy_drift": traj.energy_drift,
        "max_energy_error": traj.max_energy_error,
        "states": states,
    });
    Ok(CommandOutput { result, checks, svg })
}
