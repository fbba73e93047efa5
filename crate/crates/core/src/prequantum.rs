//! Trivialized Hermitian line bundles with connection and the operators
//! `Q_f`.
//!
//! Sections are complex functions on one chart. The connection is
//! `nabla_X s = X(s) + kappa i theta(X) s` with `d theta = omega`, so its
//! curvature is `kappa i omega`. `Q_f = nabla_{Xi_f} - kappa i f` (with the
//! sign of the `f` term following the Hamiltonian sign convention).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::expr::{ComplexExpr, Expression, Tape};
use crate::geometry::{check_chart, canonical_symplectic, tautological_one_form_on, Chart, OneForm, SymplecticStructure, VectorField};
use crate::hamilton::{hamiltonian_vector_field, poisson_bracket};
use crate::quadrature::QuadratureGrid;
use crate::sampling::{DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::{Error, Result};

pub type Callable = Arc<dyn Fn(&[f64]) -> Result<Complex64> + Send + Sync>;

/// The values of a section: exact expressions or an opaque smooth function.
#[derive(Clone)]
pub enum SectionValue {
    Symbolic(ComplexExpr),
    Opaque(Callable),
}

impl fmt::Debug for SectionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectionValue::Symbolic(e) => write!(f, "Symbolic({} + i({}))", e.re, e.im),
            SectionValue::Opaque(_) => f.write_str("Opaque(..)"),
        }
    }
}

/// Closed box outside of which a section vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SupportBox {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (a, b))| a <= v && v <= b)
    }

    fn hull(&self, other: &SupportBox) -> SupportBox {
        SupportBox {
            lower: self.lower.iter().zip(&other.lower).map(|(a, b)| a.min(*b)).collect(),
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a.max(*b)).collect(),
        }
    }
}

/// A section of the trivial line bundle over a chart.
#[derive(Debug, Clone)]
pub struct Section {
    chart: Arc<Chart>,
    value: SectionValue,
    support: Option<SupportBox>,
}

/// Step for central differences on opaque sections.
fn fd_step(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}

impl Section {
    pub fn symbolic(chart: &Arc<Chart>, value: ComplexExpr) -> Result<Section> {
        if value.variables() != chart.variables() {
            return Err(Error::Invalid("section is not over the chart coordinates".into()));
        }
        Ok(Section {
            chart: chart.clone(),
            value: SectionValue::Symbolic(value),
            support: None,
        })
    }

    pub fn parse(chart: &Arc<Chart>, re: &str, im: &str) -> Result<Section> {
        Section::symbolic(chart, ComplexExpr::new(chart.parse(re)?, chart.parse(im)?))
    }

    pub fn real(chart: &Arc<Chart>, value: Expression) -> Result<Section> {
        Section::symbolic(chart, ComplexExpr::real(value))
    }

    pub fn opaque(chart: &Arc<Chart>, f: impl Fn(&[f64]) -> Result<Complex64> + Send + Sync + 'static) -> Section {
        Section {
            chart: chart.clone(),
            value: SectionValue::Opaque(Arc::new(f)),
            support: None,
        }
    }

    /// Declare that the section vanishes outside `[lower, upper]`; the values
    /// on the box boundary must already be below `1e-12`.
    pub fn with_support(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Result<Section> {
        let n = self.chart.dimension();
        if lower.len() != n || upper.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: lower.len().min(upper.len()),
            });
        }
        if lower.iter().zip(&upper).any(|(a, b)| !(a < b)) {
            return Err(Error::Invalid("support box is empty".into()));
        }
        let support = SupportBox { lower, upper };
        let mut worst: f64 = 0.0;
        for axis in 0..n {
            for face in [&support.lower, &support.upper] {
                let mut lo = support.lower.clone();
                let mut hi = support.upper.clone();
                lo[axis] = face[axis];
                hi[axis] = face[axis];
                for x in crate::sampling::sample_box(&lo, &hi, 32, DEFAULT_SEED + axis as u64, |_| false) {
                    worst = worst.max(self.raw(&x)?.norm());
                }
            }
        }
        if worst > 1e-12 {
            return Err(Error::SupportBoundary(worst));
        }
        self.support = Some(support);
        Ok(self)
    }

    /// `prod_i (1 - ((x_i - c_i) / w_i)^2)^power`, supported on `c +- w`.
    pub fn bump(chart: &Arc<Chart>, center: &[f64], half_widths: &[f64], power: u32) -> Result<Section> {
        let n = chart.dimension();
        if center.len() != n || half_widths.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: center.len().min(half_widths.len()),
            });
        }
        if power < 1 {
            return Err(Error::Invalid("bump power must be at least 1".into()));
        }
        let mut e = Expression::one(chart.variables());
        for i in 0..n {
            let t = (chart.coordinate(i) - center[i]) / half_widths[i];
            let factor = (Expression::one(chart.variables()) - t.powf(2.0)).powf(power as f64);
            e = e * factor;
        }
        let lower = center.iter().zip(half_widths).map(|(c, w)| c - w).collect();
        let upper = center.iter().zip(half_widths).map(|(c, w)| c + w).collect();
        Section::real(chart, e)?.with_support(lower, upper)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn value(&self) -> &SectionValue {
        &self.value
    }

    pub fn support(&self) -> Option<&SupportBox> {
        self.support.as_ref()
    }

    pub fn as_symbolic(&self) -> Option<&ComplexExpr> {
        match &self.value {
            SectionValue::Symbolic(e) => Some(e),
            SectionValue::Opaque(_) => None,
        }
    }

    fn raw(&self, x: &[f64]) -> Result<Complex64> {
        match &self.value {
            SectionValue::Symbolic(e) => Ok(e.evaluate(x)?),
            SectionValue::Opaque(f) => f(x),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if let Some(s) = &self.support {
            if !s.contains(x) {
                return Ok(Complex64::new(0.0, 0.0));
            }
        }
        self.raw(x)
    }

    /// A compiled evaluator for repeated use.
    pub fn evaluator(&self) -> SectionEvaluator {
        let kind = match &self.value {
            SectionValue::Symbolic(e) => EvalKind::Tape(Tape::compile(&[e.re.clone(), e.im.clone()])),
            SectionValue::Opaque(f) => EvalKind::Opaque(f.clone()),
        };
        SectionEvaluator {
            kind,
            support: self.support.clone(),
        }
    }

    fn callable(&self) -> Callable {
        let ev = self.evaluator();
        Arc::new(move |x: &[f64]| ev.evaluate(x))
    }

    fn derived(&self, value: SectionValue, support: Option<SupportBox>) -> Section {
        Section {
            chart: self.chart.clone(),
            value,
            support,
        }
    }

    /// The derivative `X(s)`.
    pub fn directional(&self, x: &VectorField) -> Result<Section> {
        check_chart(&self.chart, x.chart())?;
        let value = match &self.value {
            SectionValue::Symbolic(e) => SectionValue::Symbolic(e.directional(x.components())),
            SectionValue::Opaque(_) => {
                let s = self.callable();
                let field = x.compile();
                SectionValue::Opaque(Arc::new(move |p: &[f64]| {
                    let v = field.eval(p)?;
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut probe = p.to_vec();
                    for (i, vi) in v.iter().enumerate() {
                        if *vi == 0.0 {
                            continue;
                        }
                        let h = fd_step(p[i]);
                        probe[i] = p[i] + h;
                        let plus = s(&probe)?;
                        probe[i] = p[i] - h;
                        let minus = s(&probe)?;
                        probe[i] = p[i];
                        acc += (plus - minus) / (2.0 * h) * *vi;
                    }
                    Ok(acc)
                }))
            }
        };
        Ok(self.derived(value, self.support.clone()))
    }

    /// Multiply by a real function.
    pub fn scale_by(&self, f: &Expression) -> Section {
        let value = match &self.value {
            SectionValue::Symbolic(e) => SectionValue::Symbolic(e.scale_by(f)),
            SectionValue::Opaque(_) => {
                let s = self.callable();
                let tape = f.compile();
                SectionValue::Opaque(Arc::new(move |p: &[f64]| Ok(s(p)? * tape.eval_scalar(p)?)))
            }
        };
        self.derived(value, self.support.clone())
    }

    /// Multiply by `i f` for a real function `f`.
    pub fn times_i(&self, f: &Expression) -> Section {
        let value = match &self.value {
            SectionValue::Symbolic(e) => SectionValue::Symbolic(e.times_i(f)),
            SectionValue::Opaque(_) => {
                let s = self.callable();
                let tape = f.compile();
                SectionValue::Opaque(Arc::new(move |p: &[f64]| {
                    Ok(s(p)? * Complex64::new(0.0, tape.eval_scalar(p)?))
                }))
            }
        };
        self.derived(value, self.support.clone())
    }

    pub fn scale_complex(&self, z: Complex64) -> Section {
        let value = match &self.value {
            SectionValue::Symbolic(e) => SectionValue::Symbolic(e.scale_complex(z)),
            SectionValue::Opaque(_) => {
                let s = self.callable();
                SectionValue::Opaque(Arc::new(move |p: &[f64]| Ok(s(p)? * z)))
            }
        };
        self.derived(value, self.support.clone())
    }

    pub fn conj(&self) -> Section {
        let value = match &self.value {
            SectionValue::Symbolic(e) => SectionValue::Symbolic(e.conj()),
            SectionValue::Opaque(_) => {
                let s = self.callable();
                SectionValue::Opaque(Arc::new(move |p: &[f64]| Ok(s(p)?.conj())))
            }
        };
        self.derived(value, self.support.clone())
    }

    fn combine(
        &self,
        other: &Section,
        sym: impl Fn(&ComplexExpr, &ComplexExpr) -> ComplexExpr,
        num: fn(Complex64, Complex64) -> Complex64,
        support: Option<SupportBox>,
    ) -> Result<Section> {
        check_chart(&self.chart, &other.chart)?;
        let value = match (&self.value, &other.value) {
            (SectionValue::Symbolic(a), SectionValue::Symbolic(b)) => SectionValue::Symbolic(sym(a, b)),
            _ => {
                let (a, b) = (self.callable(), other.callable());
                SectionValue::Opaque(Arc::new(move |p: &[f64]| Ok(num(a(p)?, b(p)?))))
            }
        };
        Ok(self.derived(value, support))
    }

    pub fn add(&self, other: &Section) -> Result<Section> {
        let support = match (&self.support, &other.support) {
            (Some(a), Some(b)) => Some(a.hull(b)),
            _ => None,
        };
        self.combine(other, |a, b| a + b, |a, b| a + b, support)
    }

    pub fn sub(&self, other: &Section) -> Result<Section> {
        let support = match (&self.support, &other.support) {
            (Some(a), Some(b)) => Some(a.hull(b)),
            _ => None,
        };
        self.combine(other, |a, b| a - b, |a, b| a - b, support)
    }

    /// Pointwise product of two sections.
    pub fn mul(&self, other: &Section) -> Result<Section> {
        let support = match (&self.support, &other.support) {
            (Some(a), Some(b)) => {
                let lower: Vec<f64> = a.lower.iter().zip(&b.lower).map(|(x, y)| x.max(*y)).collect();
                let upper: Vec<f64> = a.upper.iter().zip(&b.upper).map(|(x, y)| x.min(*y)).collect();
                if lower.iter().zip(&upper).any(|(l, u)| l > u) {
                    let z = ComplexExpr::zero(self.chart.variables());
                    return Ok(self.derived(SectionValue::Symbolic(z), None));
                }
                Some(SupportBox { lower, upper })
            }
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        self.combine(other, |a, b| a * b, |a, b| a * b, support)
    }

    /// Hermitian product `<s, s'> = conj(s) s'`.
    pub fn hermitian(&self, other: &Section) -> Result<Section> {
        self.conj().mul(other)
    }

    /// Largest `|s(x)|` over the points.
    pub fn max_abs(&self, points: &[Vec<f64>]) -> Result<f64> {
        let ev = self.evaluator();
        let mut worst: f64 = 0.0;
        for x in points {
            worst = worst.max(ev.evaluate(x)?.norm());
        }
        Ok(worst)
    }
}

enum EvalKind {
    Tape(Tape),
    Opaque(Callable),
}

/// Fast repeated evaluation of one section.
pub struct SectionEvaluator {
    kind: EvalKind,
    support: Option<SupportBox>,
}

impl SectionEvaluator {
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if let Some(s) = &self.support {
            if !s.contains(x) {
                return Ok(Complex64::new(0.0, 0.0));
            }
        }
        match &self.kind {
            EvalKind::Tape(t) => {
                let v = t.eval(x)?;
                Ok(Complex64::new(v[0], v[1]))
            }
            EvalKind::Opaque(f) => f(x),
        }
    }
}

/// Hermitian line bundle over a symplectic chart, trivialized, with
/// connection potential `theta` (`d theta = omega`) and phase constant
/// `kappa`.
#[derive(Debug, Clone)]
pub struct PrequantumBundle {
    symplectic: Arc<SymplecticStructure>,
    potential: OneForm,
    kappa: f64,
    residual: f64,
}

impl PrequantumBundle {
    pub fn new(symplectic: Arc<SymplecticStructure>, potential: OneForm, kappa: f64) -> Result<PrequantumBundle> {
        check_chart(symplectic.chart(), potential.chart())?;
        if !(kappa.is_finite() && kappa != 0.0) {
            return Err(Error::Invalid(format!("kappa must be finite and nonzero, got {kappa}")));
        }
        let points = symplectic.chart().sample(DEFAULT_SAMPLES, DEFAULT_SEED);
        let residual = potential
            .exterior_derivative()
            .sub(symplectic.form())?
            .max_abs(&points)?;
        if residual > 1e-9 {
            return Err(Error::CurvatureMismatch(residual));
        }
        Ok(PrequantumBundle {
            symplectic,
            potential,
            kappa,
            residual,
        })
    }

    /// `T*R^n` with `theta = sum p_i dq_i` and `kappa = 2 pi`.
    pub fn standard(n: usize) -> PrequantumBundle {
        let omega = Arc::new(canonical_symplectic(n));
        let theta = tautological_one_form_on(omega.chart());
        PrequantumBundle::new(omega, theta, 2.0 * std::f64::consts::PI).expect("d(p dq) = dp ^ dq")
    }

    /// Punctured plane in polar coordinates, `theta = r^2 dtheta`, `kappa = 1`.
    pub fn punctured_plane(r_max: f64) -> PrequantumBundle {
        let (omega, alpha) = crate::geometry::punctured_plane(r_max);
        PrequantumBundle::new(Arc::new(omega), alpha, 1.0).expect("alpha is a potential for omega")
    }

    pub fn symplectic(&self) -> &Arc<SymplecticStructure> {
        &self.symplectic
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.symplectic.chart()
    }

    pub fn potential(&self) -> &OneForm {
        &self.potential
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Sampled `max |d theta - omega|` recorded at construction.
    pub fn potential_residual(&self) -> f64 {
        self.residual
    }

    /// `nabla_X s = X(s) + kappa i theta(X) s`.
    pub fn covariant_derivative(&self, s: &Section, x: &VectorField) -> Result<Section> {
        check_chart(self.chart(), s.chart())?;
        let theta_x = self.potential.contract(x)?.scale(self.kappa);
        s.directional(x)?.add(&s.times_i(&theta_x))
    }

    /// `R(X, Y) s = nabla_X nabla_Y s - nabla_Y nabla_X s - nabla_[X,Y] s`.
    pub fn curvature(&self, x: &VectorField, y: &VectorField, s: &Section) -> Result<Section> {
        let xy = self.covariant_derivative(&self.covariant_derivative(s, y)?, x)?;
        let yx = self.covariant_derivative(&self.covariant_derivative(s, x)?, y)?;
        let bracket = self.covariant_derivative(s, &x.lie_bracket(y)?)?;
        xy.sub(&yx)?.sub(&bracket)
    }

    /// `max |R(X, Y) s - kappa i omega(X, Y) s|` over the points.
    pub fn curvature_residual(&self, x: &VectorField, y: &VectorField, s: &Section, points: &[Vec<f64>]) -> Result<f64> {
        let omega_xy = self.symplectic.form().apply(x, y)?.scale(self.kappa);
        let expected = s.times_i(&omega_xy);
        self.curvature(x, y, s)?.sub(&expected)?.max_abs(points)
    }

    fn f_sign(&self) -> f64 {
        self.symplectic.convention().sign()
    }

    /// `Q_f s = nabla_{Xi_f} s - kappa i f s`.
    pub fn prequantum_operator(&self, f: &Expression, s: &Section) -> Result<Section> {
        let xi = hamiltonian_vector_field(&self.symplectic, f);
        let term = s.times_i(&f.scale(self.kappa * self.f_sign()));
        self.covariant_derivative(s, &xi)?.sub(&term)
    }

    /// Compare `[Q_f, Q_g] s` with `Q_{f,g} s`, and the intermediate identity
    /// `[nabla_{Xi_f}, nabla_{Xi_g}] s = nabla_{Xi_{f,g}} s + kappa i {f,g} s`.
    pub fn commutator_check(&self, f: &Expression, g: &Expression, s: &Section, points: &[Vec<f64>]) -> Result<CommutatorReport> {
        let q = |h: &Expression, t: &Section| self.prequantum_operator(h, t);
        let fg = poisson_bracket(f, g, &self.symplectic);
        let lhs = q(f, &q(g, s)?)?.sub(&q(g, &q(f, s)?)?)?;
        let rhs = q(&fg, s)?;
        let operator = lhs.sub(&rhs)?.max_abs(points)?;

        let xf = hamiltonian_vector_field(&self.symplectic, f);
        let xg = hamiltonian_vector_field(&self.symplectic, g);
        let xfg = hamiltonian_vector_field(&self.symplectic, &fg);
        let nabla = |x: &VectorField, t: &Section| self.covariant_derivative(t, x);
        let comm = nabla(&xf, &nabla(&xg, s)?)?.sub(&nabla(&xg, &nabla(&xf, s)?)?)?;
        let expected = nabla(&xfg, s)?.add(&s.times_i(&fg.scale(self.kappa * self.f_sign())))?;
        let connection = comm.sub(&expected)?.max_abs(points)?;
        Ok(CommutatorReport { operator, connection })
    }

    /// `X<s,s'> - <nabla_X s, s'> - <s, nabla_X s'>` at the points.
    pub fn hermitian_residual(&self, x: &VectorField, s: &Section, t: &Section, points: &[Vec<f64>]) -> Result<f64> {
        let lhs = s.hermitian(t)?.directional(x)?;
        let rhs = self
            .covariant_derivative(s, x)?
            .hermitian(t)?
            .add(&s.hermitian(&self.covariant_derivative(t, x)?)?)?;
        lhs.sub(&rhs)?.max_abs(points)
    }

    /// `<<s, s'>> = int conj(s) s' |rho|` by tensor Simpson, where `rho` is
    /// the top-power coefficient of `omega`.
    pub fn l2_inner_product(&self, s: &Section, t: &Section, grid: &QuadratureGrid) -> Result<Complex64> {
        for sec in [s, t] {
            match sec.support() {
                Some(b) if grid.contains_box(&b.lower, &b.upper) => {}
                _ => return Err(Error::SupportExceedsGrid),
            }
        }
        let product = s.hermitian(t)?;
        self.integrate_density(&product, grid)
    }

    fn integrate_density(&self, s: &Section, grid: &QuadratureGrid) -> Result<Complex64> {
        if grid.lower.len() != self.chart().dimension() {
            return Err(Error::Dimension {
                expected: self.chart().dimension(),
                got: grid.lower.len(),
            });
        }
        let rho = crate::geometry::wedge_top_power(&self.symplectic).compile();
        let ev = s.evaluator();
        grid.integrate(|x| {
            let v = ev.evaluate(x)?;
            if v == Complex64::new(0.0, 0.0) {
                return Ok(v);
            }
            Ok(v * rho.eval_scalar(x)?.abs())
        })
    }

    /// `|<<Q_f s, s'>> + <<s, Q_f s'>>|`.
    pub fn skew_hermiticity_check(&self, f: &Expression, s: &Section, t: &Section, grid: &QuadratureGrid) -> Result<f64> {
        let a = self.l2_inner_product(&self.prequantum_operator(f, s)?, t, grid)?;
        let b = self.l2_inner_product(s, &self.prequantum_operator(f, t)?, grid)?;
        Ok((a + b).norm())
    }

    /// `|int Xi_f(<s, s'>) |rho||`, which vanishes for compactly supported
    /// sections because `Xi_f` preserves the Liouville volume.
    pub fn divergence_check(&self, f: &Expression, s: &Section, t: &Section, grid: &QuadratureGrid) -> Result<f64> {
        for sec in [s, t] {
            match sec.support() {
                Some(b) if grid.contains_box(&b.lower, &b.upper) => {}
                _ => return Err(Error::SupportExceedsGrid),
            }
        }
        let xi = hamiltonian_vector_field(&self.symplectic, f);
        let integrand = s.hermitian(t)?.directional(&xi)?;
        Ok(self.integrate_density(&integrand, grid)?.norm())
    }
}

/// Residuals of the commutator check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorReport {
    /// `max |[Q_f, Q_g] s - Q_{f,g} s|`.
    pub operator: f64,
    /// `max |[nabla_f, nabla_g] s - nabla_{f,g} s - kappa i {f,g} s|`.
    pub connection: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn covariant_derivative_of_unit_section() {
        let b = PrequantumBundle::standard(1);
        let chart = b.chart().clone();
        let one = Section::parse(&chart, "1", "0").unwrap();
        let dq = VectorField::coordinate(&chart, 0);
        let d = b.covariant_derivative(&one, &dq).unwrap();
        let v = d.evaluate(&[0.3, 1.5]).unwrap();
        assert!((v - Complex64::new(0.0, 2.0 * PI * 1.5)).norm() < 1e-14);
    }

    #[test]
    fn curvature_of_coordinate_fields() {
        let b = PrequantumBundle::standard(1);
        let chart = b.chart().clone();
        let one = Section::parse(&chart, "1", "0").unwrap();
        let x = VectorField::coordinate(&chart, 0);
        let y = VectorField::coordinate(&chart, 1);
        let r = b.curvature(&x, &y, &one).unwrap();
        let v = r.evaluate(&[0.1, -0.4]).unwrap();
        assert!((v - Complex64::new(0.0, -2.0 * PI)).norm() < 1e-13);
    }

    #[test]
    fn bump_rejects_box_smaller_than_support() {
        let chart = Arc::new(Chart::phase_space(1, 2.0));
        let s = Section::parse(&chart, "1 - q^2", "0").unwrap();
        assert!(matches!(s.with_support(vec![-0.5, -1.0], vec![0.5, 1.0]), Err(Error::SupportBoundary(_))));
    }

    #[test]
    fn opaque_sections_use_central_differences() {
        let chart = Arc::new(Chart::phase_space(1, 2.0));
        let s = Section::opaque(&chart, |x| Ok(Complex64::new(x[0].sin(), x[1] * x[1])));
        let x = VectorField::parse(&chart, &["1", "2"]).unwrap();
        let d = s.directional(&x).unwrap().evaluate(&[0.4, 0.7]).unwrap();
        assert!((d.re - 0.4f64.cos()).abs() < 1e-9);
        assert!((d.im - 2.0 * 2.0 * 0.7).abs() < 1e-9);
    }
}
