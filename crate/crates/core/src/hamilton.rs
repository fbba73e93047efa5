//! Hamiltonian vector fields, Poisson brackets and flows.
//!
//! With `omega(X, Y) = X^T Omega Y`, the condition `omega(Xi_f, .) = -df`
//! reads `Omega^T Xi = -grad f`, i.e. `Xi_f = Omega^{-1} grad f`. The flipped
//! convention negates the field.

use std::sync::Arc;

use crate::expr::{Expression, Tape};
use crate::geometry::{check_chart, SignConvention, SymplecticStructure, TwoForm, VectorField};
use crate::{Error, Result};

/// A phase space together with an energy function.
#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    symplectic: Arc<SymplecticStructure>,
    hamiltonian: Expression,
}

impl HamiltonianSystem {
    pub fn new(symplectic: Arc<SymplecticStructure>, hamiltonian: Expression) -> Result<HamiltonianSystem> {
        if hamiltonian.variables() != symplectic.chart().variables() {
            return Err(Error::Invalid(format!(
                "hamiltonian `{hamiltonian}` is not over the chart coordinates"
            )));
        }
        Ok(HamiltonianSystem {
            symplectic,
            hamiltonian,
        })
    }

    pub fn symplectic(&self) -> &Arc<SymplecticStructure> {
        &self.symplectic
    }

    pub fn hamiltonian(&self) -> &Expression {
        &self.hamiltonian
    }

    pub fn vector_field(&self) -> VectorField {
        hamiltonian_vector_field(&self.symplectic, &self.hamiltonian)
    }
}

/// The field `Xi_f` with `omega(Xi_f, .) = -df` (or `+df` when flipped).
pub fn hamiltonian_vector_field(omega: &SymplecticStructure, f: &Expression) -> VectorField {
    let grad = f.gradient();
    let sign = omega.convention().sign();
    let components = omega
        .inverse()
        .iter()
        .map(|row| {
            let mut acc = Expression::zero(f.variables());
            for (a, g) in row.iter().zip(&grad) {
                if a.as_constant() == Some(0.0) || g.as_constant() == Some(0.0) {
                    continue;
                }
                acc = acc + a * g;
            }
            if sign < 0.0 {
                -acc
            } else {
                acc
            }
        })
        .collect();
    VectorField::new(omega.chart(), components).expect("components live on the symplectic chart")
}

/// `Xi_f` at a single point by a pivoted linear solve; fails where
/// `|det Omega| <= 1e-12`.
pub fn hamiltonian_vector_at(omega: &SymplecticStructure, f: &Expression, point: &[f64]) -> Result<Vec<f64>> {
    let grad = f
        .gradient()
        .iter()
        .map(|g| g.evaluate(point))
        .collect::<Result<Vec<_>, _>>()?;
    // Omega^T Xi = -grad f  <=>  Omega Xi = grad f
    let sign = omega.convention().sign();
    let rhs: Vec<f64> = grad.iter().map(|g| sign * g).collect();
    omega.solve_at(point, &rhs)
}

/// `{f, g} = Xi_f(g)`.
pub fn poisson_bracket(f: &Expression, g: &Expression, omega: &SymplecticStructure) -> Expression {
    hamiltonian_vector_field(omega, f).apply(g)
}

pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    x.lie_bracket(y)
}

/// `L_X omega = i_X d omega + d(i_X omega)`.
pub fn lie_derivative_of_form(x: &VectorField, omega: &TwoForm) -> Result<TwoForm> {
    check_chart(x.chart(), omega.chart())?;
    let first = omega.exterior_derivative().contract(x)?;
    let second = omega.contract(x)?.exterior_derivative();
    first.add(&second)
}

/// Residuals of the Poisson-algebra laws for one triple at a set of points.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PoissonResiduals {
    pub antisymmetry: f64,
    pub leibniz: f64,
    pub jacobi: f64,
    pub homomorphism: f64,
}

impl PoissonResiduals {
    pub fn max(&self) -> f64 {
        self.antisymmetry.max(self.leibniz).max(self.jacobi).max(self.homomorphism)
    }

    pub fn merge(&self, other: &PoissonResiduals) -> PoissonResiduals {
        PoissonResiduals {
            antisymmetry: self.antisymmetry.max(other.antisymmetry),
            leibniz: self.leibniz.max(other.leibniz),
            jacobi: self.jacobi.max(other.jacobi),
            homomorphism: self.homomorphism.max(other.homomorphism),
        }
    }
}

/// Antisymmetry `{f,g} + {g,f}`, Leibniz `{f,gh} - {f,g}h - g{f,h}`, Jacobi
/// `{f,{g,h}} - {{f,g},h} - {g,{f,h}}` and `Xi_{f,g} - [Xi_f, Xi_g]`.
pub fn poisson_residuals(
    omega: &SymplecticStructure,
    f: &Expression,
    g: &Expression,
    h: &Expression,
    points: &[Vec<f64>],
) -> Result<PoissonResiduals> {
    let br = |a: &Expression, b: &Expression| poisson_bracket(a, b, omega);
    let antisymmetry = br(f, g) + br(g, f);
    let leibniz = br(f, &(g * h)) - br(f, g) * h - g * br(f, h);
    let jacobi = br(f, &br(g, h)) - br(&br(f, g), h) - br(g, &br(f, h));
    let xi = |a: &Expression| hamiltonian_vector_field(omega, a);
    let hom = xi(&br(f, g)).sub(&xi(f).lie_bracket(&xi(g))?)?;

    let mut exprs = vec![antisymmetry, leibniz, jacobi];
    exprs.extend(hom.components().iter().cloned());
    let tape = Tape::compile(&exprs);
    let mut out = vec![0.0; exprs.len()];
    let mut regs = Vec::new();
    let mut r = PoissonResiduals::default();
    for x in points {
        tape.eval_into(x, &mut regs, &mut out)?;
        r.antisymmetry = r.antisymmetry.max(out[0].abs());
        r.leibniz = r.leibniz.max(out[1].abs());
        r.jacobi = r.jacobi.max(out[2].abs());
        for v in &out[3..] {
            r.homomorphism = r.homomorphism.max(v.abs());
        }
    }
    Ok(r)
}

/// Largest coefficient of `L_{Xi_f} omega` over the points.
pub fn liouville_residual(omega: &SymplecticStructure, f: &Expression, points: &[Vec<f64>]) -> Result<f64> {
    let xi = hamiltonian_vector_field(omega, f);
    lie_derivative_of_form(&xi, omega.form())?.max_abs(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Leapfrog,
    Rk4,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Leapfrog => "leapfrog",
            Integrator::Rk4 => "rk4",
        }
    }
}

/// How to pick the one-step scheme.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum IntegratorChoice {
    /// Leapfrog when applicable, otherwise RK4.
    #[default]
    Auto,
    Leapfrog,
    Rk4,
}

/// States of a flow on a uniform time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub dim: usize,
    states: Vec<f64>,
    pub integrator: Integrator,
    /// `|H(x_end) - H(x_0)|`.
    pub energy_drift: f64,
    /// `max_t |H(x(t)) - H(x_0)|`.
    pub max_energy_error: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks(self.dim)
    }
}

/// Kinetic and potential parts `(T(p), V(q))` when the hamiltonian is a sum
/// of terms each depending only on momenta or only on positions.
pub fn separable_split(sys: &HamiltonianSystem) -> Option<(Expression, Expression)> {
    let n = sys.symplectic.half_dimension();
    let vars = sys.hamiltonian.variables();
    let mut kinetic = Expression::zero(vars);
    let mut potential = Expression::zero(vars);
    for term in sys.hamiltonian.additive_terms() {
        let free = term.free_variables();
        if free.iter().all(|&i| i >= n) && !free.is_empty() {
            kinetic = kinetic + term;
        } else if free.iter().all(|&i| i < n) {
            potential = potential + term;
        } else {
            return None;
        }
    }
    Some((kinetic, potential))
}

fn leapfrog_applicable(sys: &HamiltonianSystem) -> Option<(Expression, Expression)> {
    if sys.symplectic.convention() != SignConvention::Standard || !sys.symplectic.is_canonical() {
        return None;
    }
    separable_split(sys)
}

pub fn integrate_flow(sys: &HamiltonianSystem, x0: &[f64], duration: f64, dt: f64) -> Result<Trajectory> {
    integrate_flow_with(sys, x0, duration, dt, IntegratorChoice::Auto)
}

/// Integrate the flow of `Xi_H` from `x0` for `round(duration / dt)` steps.
pub fn integrate_flow_with(
    sys: &HamiltonianSystem,
    x0: &[f64],
    duration: f64,
    dt: f64,
    choice: IntegratorChoice,
) -> Result<Trajectory> {
    let chart = sys.symplectic.chart();
    if x0.len() != chart.dimension() {
        return Err(Error::Dimension {
            expected: chart.dimension(),
            got: x0.len(),
        });
    }
    if !chart.contains(x0) {
        return Err(Error::Invalid(format!("initial point {x0:?} is outside the chart domain")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Invalid(format!("time step must be positive, got {dt}")));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::Invalid(format!("duration must be nonnegative, got {duration}")));
    }
    let steps_f = (duration / dt).round();
    if steps_f > 1e9 {
        return Err(Error::Invalid(format!("{steps_f} steps requested; limit is 1e9")));
    }
    let steps = steps_f as usize;
    let split = match choice {
        IntegratorChoice::Rk4 => None,
        IntegratorChoice::Auto => leapfrog_applicable(sys),
        IntegratorChoice::Leapfrog => Some(leapfrog_applicable(sys).ok_or_else(|| {
            Error::Invalid("leapfrog needs the canonical form and a hamiltonian T(p) + V(q)".into())
        })?),
    };
    let dim = x0.len();
    let mut states = Vec::with_capacity((steps + 1) * dim);
    states.extend_from_slice(x0);
    let integrator = match split {
        Some((kinetic, potential)) => {
            leapfrog(chart, &kinetic, &potential, dim, steps, dt, &mut states)?;
            Integrator::Leapfrog
        }
        None => {
            rk4(chart, &sys.vector_field(), dim, steps, dt, &mut states)?;
            Integrator::Rk4
        }
    };
    let energy = sys.hamiltonian.compile();
    let mut regs = Vec::new();
    let mut out = [0.0];
    energy.eval_into(x0, &mut regs, &mut out)?;
    let h0 = out[0];
    let mut max_energy_error: f64 = 0.0;
    let mut last = h0;
    for x in states.chunks(dim) {
        energy.eval_into(x, &mut regs, &mut out)?;
        max_energy_error = max_energy_error.max((out[0] - h0).abs());
        last = out[0];
    }
    Ok(Trajectory {
        dt,
        dim,
        states,
        integrator,
        energy_drift: (last - h0).abs(),
        max_energy_error,
    })
}

fn check_inside(chart: &crate::geometry::Chart, x: &[f64], index: usize) -> Result<()> {
    if chart.contains(x) {
        Ok(())
    } else {
        Err(Error::ExitedDomain {
            index,
            point: x.to_vec(),
        })
    }
}

// Kick-drift-kick: p += -dt/2 dV/dq; q += dt dT/dp; p += -dt/2 dV/dq.
fn leapfrog(
    chart: &crate::geometry::Chart,
    kinetic: &Expression,
    potential: &Expression,
    dim: usize,
    steps: usize,
    dt: f64,
    states: &mut Vec<f64>,
) -> Result<()> {
    let n = dim / 2;
    let dv = Tape::compile(&(0..n).map(|i| potential.partial(i)).collect::<Vec<_>>());
    let dt_dp = Tape::compile(&(0..n).map(|i| kinetic.partial(n + i)).collect::<Vec<_>>());
    let mut x = states[..dim].to_vec();
    let mut force = vec![0.0; n];
    let mut vel = vec![0.0; n];
    let mut regs = Vec::new();
    dv.eval_into(&x, &mut regs, &mut force)?;
    for step in 1..=steps {
        for i in 0..n {
            x[n + i] -= 0.5 * dt * force[i];
        }
        dt_dp.eval_into(&x, &mut regs, &mut vel)?;
        for i in 0..n {
            x[i] += dt * vel[i];
        }
        dv.eval_into(&x, &mut regs, &mut force)?;
        for i in 0..n {
            x[n + i] -= 0.5 * dt * force[i];
        }
        check_inside(chart, &x, step)?;
        states.extend_from_slice(&x);
    }
    Ok(())
}

fn rk4(
    chart: &crate::geometry::Chart,
    field: &VectorField,
    dim: usize,
    steps: usize,
    dt: f64,
    states: &mut Vec<f64>,
) -> Result<()> {
    let tape = field.compile();
    let mut regs = Vec::new();
    let mut x = states[..dim].to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    for step in 1..=steps {
        tape.eval_into(&x, &mut regs, &mut k1)?;
        for i in 0..dim {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        tape.eval_into(&tmp, &mut regs, &mut k2)?;
        for i in 0..dim {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        tape.eval_into(&tmp, &mut regs, &mut k3)?;
        for i in 0..dim {
            tmp[i] = x[i] + dt * k3[i];
        }
        tape.eval_into(&tmp, &mut regs, &mut k4)?;
        for i in 0..dim {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        check_inside(chart, &x, step)?;
        states.extend_from_slice(&x);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::canonical_symplectic;

    fn oscillator() -> HamiltonianSystem {
        let w = Arc::new(canonical_symplectic(1));
        let h = w.chart().parse("p^2/2 + q^2/2").unwrap();
        HamiltonianSystem::new(w, h).unwrap()
    }

    #[test]
    fn oscillator_field() {
        let sys = oscillator();
        let xi = sys.vector_field();
        assert_eq!(xi.evaluate(&[0.7, -0.2]).unwrap(), vec![-0.2, -0.7]);
    }

    #[test]
    fn bracket_q_p() {
        let w = canonical_symplectic(1);
        let q = w.chart().parse("q").unwrap();
        let p = w.chart().parse("p").unwrap();
        assert_eq!(poisson_bracket(&q, &p, &w).as_constant(), Some(-1.0));
    }

    #[test]
    fn flipped_convention_negates_field() {
        let w = canonical_symplectic(1).with_convention(SignConvention::Flipped);
        let f = w.chart().parse("q*p").unwrap();
        let xi = hamiltonian_vector_field(&w, &f);
        assert_eq!(xi.evaluate(&[2.0, 3.0]).unwrap(), vec![-2.0, 3.0]);
        let at = hamiltonian_vector_at(&w, &f, &[2.0, 3.0]).unwrap();
        assert_eq!(at, vec![-2.0, 3.0]);
    }

    #[test]
    fn separable_detection() {
        let sys = oscillator();
        assert!(separable_split(&sys).is_some());
        let w = sys.symplectic().clone();
        let mixed = HamiltonianSystem::new(w.clone(), w.chart().parse("q*p").unwrap()).unwrap();
        assert!(separable_split(&mixed).is_none());
    }

    #[test]
    fn leaving_the_box_reports_index() {
        let w = Arc::new(canonical_symplectic(1));
        let h = w.chart().parse("-q").unwrap();
        let sys = HamiltonianSystem::new(w, h).unwrap();
        // dp/dt = 1: p = 2 after 16 steps of 1/8, outside after 17
        match integrate_flow(&sys, &[0.0, 0.0], 5.0, 0.125) {
            Err(Error::ExitedDomain { index, .. }) => assert_eq!(index, 17),
            other => panic!("unexpected {other:?}"),
        }
    }
}
