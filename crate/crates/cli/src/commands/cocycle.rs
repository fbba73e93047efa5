use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use prequant_core::expr::Expression;
use prequant_diffcoh::sample::torus_two_form;
use prequant_diffcoh::{
    d_tilde, integral_lift, Builtin, DifferentialCochain, IntCochain, LiftOutcome, PeriodEntry, RealCochain,
    SimplicialComplex,
};
use rand::Rng;
use serde_json::{json, Value};

use super::{count, CommandOutput};
use crate::config::{require, ComplexKind, CocycleConfig, SceneConfig};
use crate::rational::format_rational;
use crate::report::Check;
use crate::{CliError, Context};

const MAX_GRID: usize = 64;

fn build(cc: &CocycleConfig) -> Result<SimplicialComplex, CliError> {
    let builtin = match cc.complex {
        ComplexKind::Circle => {
            if cc.m.is_some() || cc.n.is_some() {
                return Err(CliError::validation("cocycle.m and cocycle.n only apply to complex = \"torus\""));
            }
            Builtin::Circle(count(cc.vertices, 6, "cocycle.vertices", 4096)?)
        }
        ComplexKind::Torus => {
            if cc.vertices.is_some() {
                return Err(CliError::validation("cocycle.vertices only applies to complex = \"circle\""));
            }
            Builtin::Torus(
                count(cc.m, 4, "cocycle.m", MAX_GRID)?,
                count(cc.n, 4, "cocycle.n", MAX_GRID)?,
            )
        }
        ComplexKind::TetraSphere => {
            if cc.vertices.is_some() || cc.m.is_some() || cc.n.is_some() {
                return Err(CliError::validation("the tetrahedral sphere takes no size parameters"));
            }
            Builtin::TetraSphere
        }
    };
    Ok(builtin.build()?)
}

fn rationals(c: &RealCochain) -> Vec<String> {
    c.values().iter().map(format_rational).collect()
}

fn integers(c: &IntCochain) -> Vec<String> {
    c.values().iter().map(BigInt::to_string).collect()
}

fn period_json(p: &PeriodEntry) -> Value {
    json!({
        "cycle": p.cycle,
        "period": format_rational(&p.period),
        "nearest_integer": p.nearest.to_string(),
        "defect": p.defect,
        "integral": p.integral(),
    })
}

/// The input 2-cochain and the complex it lives on.
fn input(cc: &CocycleConfig) -> Result<(SimplicialComplex, RealCochain), CliError> {
    let given = [cc.total.is_some(), cc.values.is_some(), cc.form.is_some()];
    if given.iter().filter(|g| **g).count() != 1 {
        return Err(CliError::validation("cocycle needs exactly one of `total`, `values` or `form`"));
    }
    if let Some(src) = &cc.form {
        if cc.complex != ComplexKind::Torus {
            return Err(CliError::validation("cocycle.form is sampled on the unit torus; set complex = \"torus\""));
        }
        let f = prequant_core::expr::parse(src, &["x", "y"])
            .map_err(|e| CliError::validation(format!("cocycle.form: `{src}` {e}")))?;
        let m = count(cc.m, 4, "cocycle.m", MAX_GRID)?;
        let n = count(cc.n, 4, "cocycle.n", MAX_GRID)?;
        return sample_form(m, n, &f);
    }
    let complex = build(cc)?;
    if complex.dimension() < 2 {
        return Err(CliError::validation(format!("`{}` has no triangles to carry a 2-cochain", complex.name())));
    }
    let count = complex.count(2);
    let values: Vec<BigRational> = if let Some(total) = &cc.total {
        let t = total.value("cocycle.total")?;
        vec![t / BigInt::from(count); count]
    } else {
        let list = cc.values.as_ref().expect("one input is present");
        if list.len() != count {
            return Err(CliError::validation(format!(
                "cocycle.values has {} entries, `{}` has {count} triangles",
                list.len(),
                complex.name()
            )));
        }
        list.iter()
            .enumerate()
            .map(|(i, v)| v.value(&format!("cocycle.values[{i}]")))
            .collect::<Result<_, _>>()?
    };
    let omega = RealCochain::new(&complex, 2, values)?;
    Ok((complex, omega))
}

fn sample_form(m: usize, n: usize, f: &Expression) -> Result<(SimplicialComplex, RealCochain), CliError> {
    // probe once so that undefined points surface as a validation error
    f.evaluate(&[0.5, 0.5])
        .map_err(|e| CliError::validation(format!("cocycle.form does not evaluate: {e}")))?;
    let tape = f.compile();
    Ok(torus_two_form(m, n, |x, y| tape.eval_scalar(&[x, y]).unwrap_or(f64::NAN))?)
}

fn random_rational<R: Rng>(rng: &mut R) -> BigRational {
    BigRational::new(rng.gen_range(-12i64..=12).into(), rng.gen_range(1i64..=4).into())
}

fn random_cochain<R: Rng>(complex: &SimplicialComplex, degree: usize, rng: &mut R) -> Result<DifferentialCochain, CliError> {
    let ints: Vec<i64> = (0..complex.count(degree)).map(|_| rng.gen_range(-3..=3)).collect();
    let c = IntCochain::from_i64s(complex, degree, &ints)?;
    let h = if degree == 0 {
        None
    } else {
        let v = (0..complex.count(degree - 1)).map(|_| random_rational(rng)).collect();
        Some(RealCochain::new(complex, degree - 1, v)?)
    };
    let omega = if degree >= 2 {
        let v = (0..complex.count(degree)).map(|_| random_rational(rng)).collect();
        RealCochain::new(complex, degree, v)?
    } else {
        RealCochain::zero(complex, degree)
    };
    Ok(DifferentialCochain::new(complex, c, h, omega)?)
}

pub fn run(cfg: &SceneConfig, ctx: &Context) -> Result<CommandOutput, CliError> {
    let cc = require(&cfg.cocycle, "cocycle")?;
    let (complex, omega) = input(cc)?;
    let complex = Arc::new(complex);
    let outcome = integral_lift(&complex, &omega)?;
    let mut checks = Vec::new();

    let periods: Vec<Value> = outcome.periods().iter().map(period_json).collect();
    let mut result = json!({
        "complex": complex.name(),
        "counts": (0..=complex.dimension()).map(|k| complex.count(k)).collect::<Vec<_>>(),
        "input": rationals(&omega),
        "input_total": format_rational(&omega.total()),
        "feasible": outcome.is_feasible(),
        "infeasible": !outcome.is_feasible(),
        "periods": periods,
    });
    let obj = result.as_object_mut().expect("object");
    match &outcome {
        LiftOutcome::Lifted { cocycle, adjustment, .. } => {
            let dz = d_tilde(&complex, cocycle.cochain())?;
            checks.push(Check::holds("cocycle_closed", dz.is_zero()));
            obj.insert("adjustment".into(), json!(adjustment));
            obj.insert(
                "cocycle".into(),
                json!({
                    "c": integers(cocycle.c()),
                    "h": rationals(cocycle.h()),
                    "omega": rationals(cocycle.omega()),
                }),
            );
        }
        LiftOutcome::Infeasible { certificate, .. } => {
            obj.insert("certificate".into(), period_json(certificate));
        }
    }

    let samples = count(cc.random_cochains, 30, "cocycle.random_cochains", 10_000)?;
    let mut rng = prequant_core::sampling::rng(ctx.seed);
    let mut all_zero = true;
    for i in 0..samples {
        let degree = i % (complex.dimension() + 1);
        let x = random_cochain(&complex, degree, &mut rng)?;
        all_zero &= d_tilde(&complex, &d_tilde(&complex, &x)?)?.is_zero();
    }
    if samples > 0 {
        checks.push(Check::holds("d_tilde_squared_zero", all_zero));
    }
    obj.insert("random_cochains".into(), json!(samples));
    Ok(CommandOutput { result, checks, svg: None })
}
