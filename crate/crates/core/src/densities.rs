//! Densities of complex order on vector spaces and on small explicit atlases.
//!
//! A [`VectorDensity`] is stored by its value on the standard frame, since
//! the space of `alpha`-densities is one-dimensional. A [`ManifoldDensity`]
//! holds one coefficient function per chart, meaning `c(x) |dx_1 ^ ... ^ dx_n|^alpha`;
//! on overlaps `c_a(x) = c_b(F(x)) |det dF_x|^alpha`. Order-one densities are
//! integrated as `sum_a int rho_a c_a` with a smoothstep partition of unity.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::expr::{ComplexExpr, Expression, Tape, Variables};
use crate::quadrature::{integrate_tensor, AxisRule};
use crate::sampling::{DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::{Error, Result};

const SINGULAR: f64 = 1e-12;

/// `|d|^alpha` for complex `alpha`.
pub fn abs_det_pow(det: f64, order: Complex64) -> Complex64 {
    if order == Complex64::new(0.0, 0.0) {
        return Complex64::new(1.0, 0.0);
    }
    (order * det.abs().ln()).exp()
}

/// An `alpha`-density on an n-dimensional vector space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorDensity {
    pub n: usize,
    pub order: Complex64,
    /// Value on the standard frame.
    pub value: Complex64,
}

impl VectorDensity {
    pub fn new(n: usize, order: Complex64, value: Complex64) -> VectorDensity {
        VectorDensity { n, order, value }
    }

    pub fn real_order(n: usize, order: f64, value: f64) -> VectorDensity {
        VectorDensity::new(n, Complex64::new(order, 0.0), Complex64::new(value, 0.0))
    }

    /// The order-zero density with value one.
    pub fn unit(n: usize) -> VectorDensity {
        VectorDensity::real_order(n, 0.0, 1.0)
    }

    /// `tau(frame) = tau(e) |det frame|^alpha`, the columns of `frame` being
    /// the frame vectors.
    pub fn evaluate_on_frame(&self, frame: &DMatrix<f64>) -> Result<Complex64> {
        if frame.nrows() != self.n || frame.ncols() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: frame.nrows(),
            });
        }
        let det = frame.determinant();
        if det.abs() <= SINGULAR {
            return Err(Error::SingularFrame(det.abs()));
        }
        Ok(self.value * abs_det_pow(det, self.order))
    }

    pub fn product(&self, other: &VectorDensity) -> Result<VectorDensity> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(VectorDensity {
            n: self.n,
            order: self.order + other.order,
            value: self.value * other.value,
        })
    }

    pub fn conjugate(&self) -> VectorDensity {
        VectorDensity {
            n: self.n,
            order: self.order.conj(),
            value: self.value.conj(),
        }
    }

    /// `(T^* tau)(w) = tau(T w)`.
    pub fn pullback(&self, t: &DMatrix<f64>) -> Result<VectorDensity> {
        if t.nrows() != self.n || t.ncols() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: t.nrows(),
            });
        }
        let det = t.determinant();
        if det.abs() <= SINGULAR {
            return Err(Error::SingularFrame(det.abs()));
        }
        Ok(VectorDensity {
            n: self.n,
            order: self.order,
            value: self.value * abs_det_pow(det, self.order),
        })
    }
}

/// Quintic smoothstep `6t^5 - 15t^4 + 10t^3`, clamped to `[0, 1]`.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

pub fn smoothstep_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        30.0 * t * t * (1.0 - t) * (1.0 - t)
    }
}

/// One factor of a product partition function: rises from 0 to 1 over
/// `rise` and falls back to 0 over `fall`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AxisProfile {
    pub rise: Option<(f64, f64)>,
    pub fall: Option<(f64, f64)>,
}

impl AxisProfile {
    pub fn value(&self, x: f64) -> f64 {
        let mut v = 1.0;
        if let Some((a, b)) = self.rise {
            v *= smoothstep((x - a) / (b - a));
        }
        if let Some((c, d)) = self.fall {
            v *= 1.0 - smoothstep((x - c) / (d - c));
        }
        v
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (mut r, mut dr) = (1.0, 0.0);
        if let Some((a, b)) = self.rise {
            r = smoothstep((x - a) / (b - a));
            dr = smoothstep_derivative((x - a) / (b - a)) / (b - a);
        }
        let (mut f, mut df) = (1.0, 0.0);
        if let Some((c, d)) = self.fall {
            f = 1.0 - smoothstep((x - c) / (d - c));
            df = -smoothstep_derivative((x - c) / (d - c)) / (d - c);
        }
        dr * f + r * df
    }

    fn knots(&self) -> Vec<f64> {
        let mut k = Vec::new();
        if let Some((a, b)) = self.rise {
            k.extend([a, b]);
        }
        if let Some((c, d)) = self.fall {
            k.extend([c, d]);
        }
        k
    }
}

/// A box chart of an atlas, with its partition function and a map into a
/// shared reference coordinate system.
#[derive(Debug, Clone)]
pub struct AtlasChart {
    pub name: String,
    vars: Variables,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub profile: Vec<AxisProfile>,
    reference: Vec<Expression>,
    jacobian: Vec<Vec<Expression>>,
}

impl AtlasChart {
    pub fn new<S: AsRef<str>>(
        name: &str,
        coords: &[S],
        lower: Vec<f64>,
        upper: Vec<f64>,
        profile: Vec<AxisProfile>,
        reference: &[&str],
    ) -> Result<AtlasChart> {
        let vars = crate::expr::parse("0", coords)?.variables().clone();
        let n = vars.len();
        if lower.len() != n || upper.len() != n || profile.len() != n || reference.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: lower.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(a, b)| !(a < b)) {
            return Err(Error::Invalid(format!("chart `{name}` has an empty box")));
        }
        let reference = reference
            .iter()
            .map(|s| Expression::parse_with(s, &vars))
            .collect::<Result<Vec<_>, _>>()?;
        let jacobian = reference.iter().map(|e| e.gradient()).collect();
        Ok(AtlasChart {
            name: name.to_string(),
            vars,
            lower,
            upper,
            profile,
            reference,
            jacobian,
        })
    }

    pub fn variables(&self) -> &Variables {
        &self.vars
    }

    pub fn dimension(&self) -> usize {
        self.vars.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (a, b))| a <= v && v <= b)
    }

    /// Partition function, zero outside the box.
    pub fn partition(&self, x: &[f64]) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        self.profile.iter().zip(x).map(|(p, v)| p.value(*v)).product()
    }

    pub fn to_reference(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.reference.iter().map(|e| Ok(e.evaluate(x)?)).collect()
    }

    pub fn reference_map(&self) -> &[Expression] {
        &self.reference
    }

    pub fn reference_jacobian_det(&self, x: &[f64]) -> Result<f64> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.jacobian[i][j].evaluate(x)?;
            }
        }
        Ok(m.determinant())
    }

    fn breakpoints(&self, axis: usize) -> Vec<f64> {
        let (a, b) = (self.lower[axis], self.upper[axis]);
        let mut k: Vec<f64> = vec![a, b];
        k.extend(self.profile[axis].knots().into_iter().filter(|v| *v > a && *v < b));
        k.sort_by(|x, y| x.partial_cmp(y).unwrap());
        k.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
        k
    }
}

/// A coordinate change from chart `from` to chart `to`, valid on `region`
/// (a box in `from` coordinates).
#[derive(Debug, Clone)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub region_lower: Vec<f64>,
    pub region_upper: Vec<f64>,
    map: Vec<Expression>,
    jacobian: Vec<Vec<Expression>>,
}

impl Transition {
    pub fn new(from: usize, to: usize, region_lower: Vec<f64>, region_upper: Vec<f64>, map: Vec<Expression>) -> Transition {
        let jacobian = map.iter().map(|e| e.gradient()).collect();
        Transition {
            from,
            to,
            region_lower,
            region_upper,
            map,
            jacobian,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.region_lower.iter().zip(&self.region_upper))
            .all(|(v, (a, b))| a <= v && v <= b)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.map.iter().map(|e| Ok(e.evaluate(x)?)).collect()
    }

    pub fn jacobian_det(&self, x: &[f64]) -> Result<f64> {
        let n = self.map.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.jacobian[i][j].evaluate(x)?;
            }
        }
        Ok(m.determinant())
    }
}

/// Finitely many box charts with transitions and a partition of unity.
#[derive(Debug, Clone)]
pub struct Atlas {
    pub name: String,
    pub reference_names: Vec<String>,
    charts: Vec<AtlasChart>,
    transitions: Vec<Transition>,
    partition_deviation: f64,
}

impl Atlas {
    /// Assemble and check that the partition functions sum to one within
    /// `1e-10` at sampled points of every chart.
    pub fn new(name: &str, reference_names: Vec<String>, charts: Vec<AtlasChart>, transitions: Vec<Transition>) -> Result<Atlas> {
        if charts.is_empty() {
            return Err(Error::Invalid("an atlas needs at least one chart".into()));
        }
        let n = charts[0].dimension();
        if charts.iter().any(|c| c.dimension() != n) || reference_names.len() != n {
            return Err(Error::Invalid("atlas charts must share one dimension".into()));
        }
        for t in &transitions {
            if t.from >= charts.len() || t.to >= charts.len() || t.from == t.to || t.map.len() != n {
                return Err(Error::Invalid(format!("transition {} -> {} is malformed", t.from, t.to)));
            }
        }
        let mut atlas = Atlas {
            name: name.to_string(),
            reference_names,
            charts,
            transitions,
            partition_deviation: 0.0,
        };
        atlas.partition_deviation = atlas.partition_check(DEFAULT_SAMPLES, DEFAULT_SEED)?;
        if atlas.partition_deviation > 1e-10 {
            return Err(Error::PartitionNotUnity(atlas.partition_deviation));
        }
        Ok(atlas)
    }

    pub fn charts(&self) -> &[AtlasChart] {
        &self.charts
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn dimension(&self) -> usize {
        self.charts[0].dimension()
    }

    pub fn partition_deviation(&self) -> f64 {
        self.partition_deviation
    }

    /// Sum of all partition functions at `x` in chart `a`.
    pub fn partition_sum(&self, a: usize, x: &[f64]) -> Result<f64> {
        let mut s = self.charts[a].partition(x);
        for t in self.transitions.iter().filter(|t| t.from == a && t.contains(x)) {
            let y = t.apply(x)?;
            s += self.charts[t.to].partition(&y);
        }
        Ok(s)
    }

    pub fn partition_check(&self, samples: usize, seed: u64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (a, chart) in self.charts.iter().enumerate() {
            let mut points = crate::sampling::sample_box(&chart.lower, &chart.upper, samples, seed + a as u64, |_| false);
            points.push(chart.lower.clone());
            points.push(chart.upper.clone());
            for x in points {
                if chart.profile.iter().zip(&x).any(|(p, v)| p.value(*v) < 0.0) {
                    return Err(Error::PartitionNotUnity(f64::NAN));
                }
                worst = worst.max((self.partition_sum(a, &x)? - 1.0).abs());
            }
        }
        Ok(worst)
    }

    /// A single box chart with partition function one; reference
    /// coordinates are the chart coordinates.
    pub fn single<S: AsRef<str>>(coords: &[S], lower: Vec<f64>, upper: Vec<f64>) -> Result<Atlas> {
        let names: Vec<String> = coords.iter().map(|s| s.as_ref().to_string()).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let profile = vec![AxisProfile::default(); names.len()];
        let chart = AtlasChart::new("box", &names, lower, upper, profile, &refs)?;
        Atlas::new("box", names.clone(), vec![chart], Vec::new())
    }

    /// The circle covered by arcs starting at the angles `starts` (increasing,
    /// within `[0, 2 pi)`); arc `k` runs to the next start and is extended by
    /// `blend` on each side. On arc `k` the chart coordinate is `x` with
    /// `theta = starts[k] + scales[k] x`.
    pub fn circle(starts: &[f64], scales: &[f64], blend: f64) -> Result<Atlas> {
        Atlas::circle_like(starts, scales, blend, None)
    }

    /// `[r_lo, r_hi] x circle`, the circle factor as in [`Atlas::circle`];
    /// chart coordinates `(r, x)`, reference coordinates `(r, theta)`.
    pub fn annulus(r_lo: f64, r_hi: f64, starts: &[f64], scales: &[f64], blend: f64) -> Result<Atlas> {
        if !(0.0 < r_lo && r_lo < r_hi) {
            return Err(Error::Invalid(format!("annulus radii [{r_lo}, {r_hi}] invalid")));
        }
        Atlas::circle_like(starts, scales, blend, Some((r_lo, r_hi)))
    }

    fn circle_like(starts: &[f64], scales: &[f64], blend: f64, radial: Option<(f64, f64)>) -> Result<Atlas> {
        let k = starts.len();
        if k < 2 || scales.len() != k {
            return Err(Error::Invalid("circle atlas needs at least two arcs, one scale per arc".into()));
        }
        if starts.windows(2).any(|w| w[1] <= w[0]) || starts[0] < 0.0 || starts[k - 1] >= 2.0 * PI {
            return Err(Error::Invalid("arc starts must increase within [0, 2 pi)".into()));
        }
        if scales.iter().any(|s| !(s.is_finite() && *s != 0.0)) {
            return Err(Error::Invalid("arc scales must be finite and nonzero".into()));
        }
        let ends: Vec<f64> = (0..k)
            .map(|i| if i + 1 < k { starts[i + 1] } else { starts[0] + 2.0 * PI })
            .collect();
        let shortest = (0..k).map(|i| ends[i] - starts[i]).fold(f64::INFINITY, f64::min);
        if !(blend > 0.0 && 2.0 * blend < shortest) {
            return Err(Error::Invalid(format!("blend {blend} must be positive and below half the shortest arc")));
        }
        // chart coordinate of an angle on arc i
        let coord = |i: usize, angle: f64| (angle - starts[i]) / scales[i];
        let ramp = |i: usize, a: f64, b: f64| {
            let (x, y) = (coord(i, a), coord(i, b));
            (x, y)
        };
        let mut charts = Vec::with_capacity(k);
        for i in 0..k {
            let (lo_a, hi_a) = (starts[i] - blend, ends[i] + blend);
            let (x0, x1) = (coord(i, lo_a), coord(i, hi_a));
            let profile = AxisProfile {
                rise: Some(ramp(i, starts[i] - blend, starts[i] + blend)),
                fall: Some(ramp(i, ends[i] - blend, ends[i] + blend)),
            };
            let theta = format!("{} + {}*x", fmt_num(starts[i]), fmt_num(scales[i]));
            let chart = match radial {
                None => AtlasChart::new(
                    &format!("arc{i}"),
                    &["x"],
                    vec![x0.min(x1)],
                    vec![x0.max(x1)],
                    vec![profile],
                    &[theta.as_str()],
                )?,
                Some((r0, r1)) => AtlasChart::new(
                    &format!("sector{i}"),
                    &["r", "x"],
                    vec![r0, x0.min(x1)],
                    vec![r1, x0.max(x1)],
                    vec![AxisProfile::default(), profile],
                    &["r", theta.as_str()],
                )?,
            };
            charts.push(chart);
        }
        let mut transitions = Vec::new();
        for i in 0..k {
            let j = (i + 1) % k;
            // overlap around the angle ends[i] (arc i) == starts[j] (+ 2 pi m)
            let shift = starts[j] - ends[i];
            for (from, to, center, offset) in [(i, j, ends[i], shift), (j, i, starts[j], -shift)] {
                let (a, b) = (coord(from, center - blend), coord(from, center + blend));
                let vars = charts[from].variables().clone();
                let x = Expression::coordinate(if radial.is_some() { 1 } else { 0 }, &vars);
                // angle in `from` representation, shifted into `to` representation
                let angle = x.scale(scales[from]) + (starts[from] + offset);
                let y = (angle - starts[to]) / scales[to];
                let map = match radial {
                    None => vec![y],
                    Some(_) => vec![Expression::coordinate(0, &vars), y],
                };
                let (mut lo, mut hi) = (vec![a.min(b)], vec![a.max(b)]);
                if let Some((r0, r1)) = radial {
                    lo.insert(0, r0);
                    hi.insert(0, r1);
                }
                transitions.push(Transition::new(from, to, lo, hi, map));
            }
        }
        let (name, reference) = match radial {
            None => ("circle", vec!["theta".to_string()]),
            Some(_) => ("annulus", vec!["r".to_string(), "theta".to_string()]),
        };
        Atlas::new(name, reference, charts, transitions)
    }
}

fn fmt_num(v: f64) -> String {
    if v < 0.0 {
        format!("({v})")
    } else {
        format!("{v}")
    }
}

pub type Callable = Arc<dyn Fn(&[f64]) -> Result<Complex64> + Send + Sync>;

/// A chart coefficient of a manifold density.
#[derive(Clone)]
pub enum Coefficient {
    Symbolic(ComplexExpr),
    Callable(Callable),
    /// `max(+-Re(inner), 0)`; the kinks are located before integrating.
    Clamped { inner: Callable, positive: bool },
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Symbolic(e) => write!(f, "Symbolic({} + i({}))", e.re, e.im),
            Coefficient::Callable(_) => f.write_str("Callable(..)"),
            Coefficient::Clamped { positive, .. } => write!(f, "Clamped {{ positive: {positive} }}"),
        }
    }
}

impl Coefficient {
    pub fn zero(vars: &Variables) -> Coefficient {
        Coefficient::Symbolic(ComplexExpr::zero(vars))
    }

    fn compile(&self) -> Callable {
        match self {
            Coefficient::Symbolic(e) => {
                let tape = Tape::compile(&[e.re.clone(), e.im.clone()]);
                Arc::new(move |x: &[f64]| {
                    let v = tape.eval(x)?;
                    Ok(Complex64::new(v[0], v[1]))
                })
            }
            Coefficient::Callable(f) => f.clone(),
            Coefficient::Clamped { inner, positive } => {
                let (inner, positive) = (inner.clone(), *positive);
                Arc::new(move |x: &[f64]| {
                    let v = inner(x)?.re;
                    let v = if positive { v } else { -v };
                    Ok(Complex64::new(v.max(0.0), 0.0))
                })
            }
        }
    }

    fn kink_source(&self) -> Option<Callable> {
        match self {
            Coefficient::Clamped { inner, .. } => Some(inner.clone()),
            _ => None,
        }
    }
}

/// A density of order `order` given chartwise.
#[derive(Debug, Clone)]
pub struct ManifoldDensity {
    atlas: Arc<Atlas>,
    order: Complex64,
    coefficients: Vec<Coefficient>,
    transition_residual: f64,
}

impl ManifoldDensity {
    /// Check the overlap law at sampled points of every transition region.
    pub fn new(atlas: &Arc<Atlas>, order: Complex64, coefficients: Vec<Coefficient>) -> Result<ManifoldDensity> {
        if coefficients.len() != atlas.charts.len() {
            return Err(Error::Dimension {
                expected: atlas.charts.len(),
                got: coefficients.len(),
            });
        }
        let mut d = ManifoldDensity {
            atlas: atlas.clone(),
            order,
            coefficients,
            transition_residual: 0.0,
        };
        d.transition_residual = d.transition_check(64, DEFAULT_SEED)?;
        if d.transition_residual > 1e-8 {
            return Err(Error::TransitionMismatch(d.transition_residual));
        }
        Ok(d)
    }

    /// Pull a function `g` of the reference coordinates back to every chart:
    /// `c_a(x) = g(phi_a(x)) |det dphi_a(x)|^order`.
    pub fn from_reference(atlas: &Arc<Atlas>, g: &ComplexExpr, order: Complex64) -> Result<ManifoldDensity> {
        let names: Vec<&str> = atlas.reference_names.iter().map(|s| s.as_str()).collect();
        let gvars = g.variables();
        if gvars.len() != names.len() || gvars.iter().zip(&names).any(|(a, b)| a != b) {
            return Err(Error::Invalid(format!(
                "density must be written in the reference coordinates {names:?}"
            )));
        }
        let coefficients = atlas
            .charts
            .iter()
            .map(|chart| {
                let composed = ComplexExpr::new(g.re.substitute(&chart.reference), g.im.substitute(&chart.reference));
                if order == Complex64::new(0.0, 0.0) {
                    return Coefficient::Symbolic(composed);
                }
                let value = Coefficient::Symbolic(composed).compile();
                let chart = chart.clone();
                Coefficient::Callable(Arc::new(move |x: &[f64]| {
                    Ok(value(x)? * abs_det_pow(chart.reference_jacobian_det(x)?, order))
                }))
            })
            .collect();
        ManifoldDensity::new(atlas, order, coefficients)
    }

    /// Parse `re + i im` in the reference coordinates.
    pub fn parse_reference(atlas: &Arc<Atlas>, re: &str, im: &str, order: Complex64) -> Result<ManifoldDensity> {
        let vars: Vec<&str> = atlas.reference_names.iter().map(|s| s.as_str()).collect();
        let re = crate::expr::parse(re, &vars)?;
        let im = Expression::parse_with(im, re.variables())?;
        ManifoldDensity::from_reference(atlas, &ComplexExpr::new(re, im), order)
    }

    pub fn atlas(&self) -> &Arc<Atlas> {
        &self.atlas
    }

    pub fn order(&self) -> Complex64 {
        self.order
    }

    pub fn coefficients(&self) -> &[Coefficient] {
        &self.coefficients
    }

    pub fn transition_residual(&self) -> f64 {
        self.transition_residual
    }

    /// Largest `|c_a(x) - c_b(F(x)) |det dF_x|^order|` over sampled overlap
    /// points, relative to `max(1, |c_a|)`.
    pub fn transition_check(&self, samples: usize, seed: u64) -> Result<f64> {
        let evals: Vec<Callable> = self.coefficients.iter().map(|c| c.compile()).collect();
        let mut worst: f64 = 0.0;
        for (k, t) in self.atlas.transitions.iter().enumerate() {
            let points = crate::sampling::sample_box(&t.region_lower, &t.region_upper, samples, seed + k as u64, |_| false);
            for x in points {
                let y = t.apply(&x)?;
                if !self.atlas.charts[t.to].contains(&y) {
                    continue;
                }
                let a = evals[t.from](&x)?;
                let b = evals[t.to](&y)? * abs_det_pow(t.jacobian_det(&x)?, self.order);
                worst = worst.max((a - b).norm() / a.norm().max(1.0));
            }
        }
        Ok(worst)
    }

    fn same_atlas(&self, other: &ManifoldDensity) -> Result<()> {
        if Arc::ptr_eq(&self.atlas, &other.atlas) {
            Ok(())
        } else {
            Err(Error::Invalid("densities live on different atlases".into()))
        }
    }

    fn with_coefficients(&self, order: Complex64, coefficients: Vec<Coefficient>) -> ManifoldDensity {
        ManifoldDensity {
            atlas: self.atlas.clone(),
            order,
            coefficients,
            transition_residual: self.transition_residual,
        }
    }

    /// Chartwise product; orders add.
    pub fn product(&self, other: &ManifoldDensity) -> Result<ManifoldDensity> {
        self.same_atlas(other)?;
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| match (a, b) {
                (Coefficient::Symbolic(x), Coefficient::Symbolic(y)) => Coefficient::Symbolic(x * y),
                _ => {
                    let (f, g) = (a.compile(), b.compile());
                    Coefficient::Callable(Arc::new(move |x: &[f64]| Ok(f(x)? * g(x)?)))
                }
            })
            .collect();
        let d = self.with_coefficients(self.order + other.order, coefficients);
        let r = d.transition_check(32, DEFAULT_SEED)?;
        Ok(ManifoldDensity {
            transition_residual: r,
            ..d
        })
    }

    pub fn conjugate(&self) -> ManifoldDensity {
        let coefficients = self
            .coefficients
            .iter()
            .map(|c| match c {
                Coefficient::Symbolic(e) => Coefficient::Symbolic(e.conj()),
                _ => {
                    let f = c.compile();
                    Coefficient::Callable(Arc::new(move |x: &[f64]| Ok(f(x)?.conj())))
                }
            })
            .collect();
        self.with_coefficients(self.order.conj(), coefficients)
    }

    /// Multiply chart `a`'s coefficient by `f(a, x)`, a function on the
    /// manifold expressed in chart coordinates.
    pub fn multiply_function(&self, f: impl Fn(usize, &[f64]) -> Result<Complex64> + Send + Sync + 'static) -> ManifoldDensity {
        let f = Arc::new(f);
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(a, c)| {
                let (g, f) = (c.compile(), f.clone());
                Coefficient::Callable(Arc::new(move |x: &[f64]| Ok(g(x)? * f(a, x)?)))
            })
            .collect();
        self.with_coefficients(self.order, coefficients)
    }

    fn part(&self, imaginary: bool) -> ManifoldDensity {
        let coefficients = self
            .coefficients
            .iter()
            .map(|c| {
                let f = c.compile();
                Coefficient::Callable(Arc::new(move |x: &[f64]| {
                    let v = f(x)?;
                    Ok(Complex64::new(if imaginary { v.im } else { v.re }, 0.0))
                }))
            })
            .collect();
        self.with_coefficients(self.order, coefficients)
    }

    pub fn real_part(&self) -> ManifoldDensity {
        self.part(false)
    }

    pub fn imaginary_part(&self) -> ManifoldDensity {
        self.part(true)
    }
}

/// `(tau_+, tau_-)` with `tau = tau_+ - tau_-`, both nonnegative; the
/// coefficients must be real.
pub fn split_signed_density(tau: &ManifoldDensity) -> Result<(ManifoldDensity, ManifoldDensity)> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (a, c) in tau.coefficients.iter().enumerate() {
        let f = c.compile();
        let chart = &tau.atlas.charts[a];
        for x in crate::sampling::sample_box(&chart.lower, &chart.upper, 64, DEFAULT_SEED, |_| false) {
            let v = f(&x)?;
            if v.im.abs() > 1e-12 * v.norm().max(1.0) {
                return Err(Error::Invalid("signed splitting needs a real density".into()));
            }
        }
        pos.push(Coefficient::Clamped {
            inner: f.clone(),
            positive: true,
        });
        neg.push(Coefficient::Clamped {
            inner: f,
            positive: false,
        });
    }
    Ok((
        tau.with_coefficients(tau.order, pos),
        tau.with_coefficients(tau.order, neg),
    ))
}

/// Result of integrating an order-one density.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityIntegral {
    pub per_chart: Vec<Complex64>,
    pub total: Complex64,
    /// Whether every chart reached the stopping criterion before the node cap.
    pub converged: bool,
    /// Nodes per axis used by the final rule in each chart.
    pub nodes: Vec<usize>,
}

/// Largest number of nodes per axis.
pub const MAX_NODES: usize = 1 << 14;

/// `int_M tau = sum_a int_{U_a} rho_a c_a` by composite Simpson split at the
/// partition knots, doubling the nodes until two successive values agree to
/// `1e-10` (relative to `max(1, |I|)`) or the cap of `2^14` nodes per axis is hit.
pub fn integrate_one_density(tau: &ManifoldDensity) -> Result<DensityIntegral> {
    if (tau.order - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::Invalid(format!("only densities of order 1 integrate (order {})", tau.order)));
    }
    let results: Vec<(Complex64, bool, usize)> = tau
        .atlas
        .charts
        .par_iter()
        .zip(tau.coefficients.par_iter())
        .map(|(chart, coef)| integrate_chart(chart, coef))
        .collect::<Result<Vec<_>>>()?;
    let per_chart: Vec<Complex64> = results.iter().map(|r| r.0).collect();
    let total = per_chart.iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b);
    Ok(DensityIntegral {
        total,
        converged: results.iter().all(|r| r.1),
        nodes: results.iter().map(|r| r.2).collect(),
        per_chart,
    })
}

fn sign_changes(f: &Callable, chart: &AtlasChart) -> Result<Vec<f64>> {
    let (a, b) = (chart.lower[0], chart.upper[0]);
    let scan = 2048;
    let mut roots = Vec::new();
    let val = |x: f64| -> Result<f64> { Ok(f(&[x])?.re) };
    let mut x0 = a;
    let mut v0 = val(a)?;
    for i in 1..=scan {
        let x1 = a + (b - a) * i as f64 / scan as f64;
        let v1 = val(x1)?;
        if v0 == 0.0 {
            roots.push(x0);
        } else if v0 * v1 < 0.0 {
            let (mut lo, mut hi, mut vlo) = (x0, x1, v0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let vm = val(mid)?;
                if vm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if vm * vlo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    vlo = vm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        v0 = v1;
    }
    Ok(roots)
}

fn integrate_chart(chart: &AtlasChart, coef: &Coefficient) -> Result<(Complex64, bool, usize)> {
    let f = coef.compile();
    let n = chart.dimension();
    let mut breaks: Vec<Vec<f64>> = (0..n).map(|i| chart.breakpoints(i)).collect();
    if let (Some(inner), 1) = (coef.kink_source(), n) {
        breaks[0].extend(sign_changes(&inner, chart)?);
        breaks[0].sort_by(|x, y| x.partial_cmp(y).unwrap());
        breaks[0].dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    }
    let integrand = |x: &[f64]| -> Result<Complex64> {
        let rho = chart.partition(x);
        if rho == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(f(x)? * rho)
    };
    let mut intervals = 16;
    let rules = |m: usize| -> Vec<AxisRule> { breaks.iter().map(|b| AxisRule::piecewise(b, m)).collect() };
    let mut axes = rules(intervals);
    let mut previous = integrate_tensor(&axes, integrand)?;
    loop {
        let next_intervals = intervals * 2;
        let next_axes = rules(next_intervals);
        if next_axes.iter().any(|r| r.len() > MAX_NODES + 1) {
            let nodes = axes.iter().map(|r| r.len()).max().unwrap_or(0);
            return Ok((previous, false, nodes));
        }
        let value = integrate_tensor(&next_axes, integrand)?;
        let done = (value - previous).norm() <= 1e-10 * value.norm().max(1.0);
        previous = value;
        intervals = next_intervals;
        axes = next_axes;
        if done {
            let nodes = axes.iter().map(|r| r.len()).max().unwrap_or(0);
            return Ok((previous, true, nodes));
        }
    }
}

/// `|rho|` from the top power of `omega` as a density on a single-box atlas
/// over the chart box.
pub fn liouville_density(omega: &crate::geometry::SymplecticStructure) -> Result<ManifoldDensity> {
    let chart = omega.chart();
    let names: Vec<&str> = chart.variables().iter().map(|s| s.as_str()).collect();
    let atlas = Arc::new(Atlas::single(&names, chart.lower().to_vec(), chart.upper().to_vec())?);
    let rho = crate::geometry::wedge_top_power(omega);
    let sign = rho.evaluate(&chart.sample(1, DEFAULT_SEED)[0])?.signum();
    let vars = atlas.charts[0].variables().clone();
    let rho = rho.rebind(&vars)?.scale(sign);
    ManifoldDensity::new(&atlas, Complex64::new(1.0, 0.0), vec![Coefficient::Symbolic(ComplexExpr::real(rho))])
}
