//! Charts, vector fields, 1- and 2-forms and certified symplectic structures.
//!
//! Coordinates on phase space are ordered `(q1..qn, p1..pn)` (just `q, p`
//! when `n = 1`). A 2-form is stored as its antisymmetric coefficient matrix
//! `Omega` with `omega = sum_{i<j} Omega_ij dx_i ^ dx_j`, so that
//! `omega(X, Y) = X^T Omega Y`. The canonical form `sum dp_i ^ dq_i` then has
//! `omega(d/dq_i, d/dp_j) = -delta_ij`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::expr::{Expression, Tape, Variables};
use crate::sampling::{self, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::{Error, Result};

/// A set removed from a chart's box.
#[derive(Debug, Clone, PartialEq)]
pub enum Puncture {
    Point(Vec<f64>),
    /// The hyperplane `x[axis] == value`.
    Face { axis: usize, value: f64 },
}

/// A named coordinate box, optionally with punctures.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    name: String,
    vars: Variables,
    lower: Vec<f64>,
    upper: Vec<f64>,
    punctures: Vec<Puncture>,
}

/// Coordinate names `q1..qn, p1..pn`, or `q, p` for one degree of freedom.
pub fn phase_space_names(n: usize) -> Vec<String> {
    if n == 1 {
        return vec!["q".into(), "p".into()];
    }
    (1..=n)
        .map(|i| format!("q{i}"))
        .chain((1..=n).map(|i| format!("p{i}")))
        .collect()
}

impl Chart {
    pub fn new<S: AsRef<str>>(name: &str, coords: &[S], lower: Vec<f64>, upper: Vec<f64>) -> Result<Chart> {
        if coords.is_empty() {
            return Err(Error::Invalid("a chart needs at least one coordinate".into()));
        }
        let vars = crate::expr::parse("0", coords)?.variables().clone();
        if lower.len() != coords.len() || upper.len() != coords.len() {
            return Err(Error::Dimension {
                expected: coords.len(),
                got: lower.len().min(upper.len()),
            });
        }
        for (i, (a, b)) in lower.iter().zip(&upper).enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Invalid(format!(
                    "bounds [{a}, {b}] for coordinate `{}` are empty or not finite",
                    vars[i]
                )));
            }
        }
        Ok(Chart {
            name: name.to_string(),
            vars,
            lower,
            upper,
            punctures: Vec::new(),
        })
    }

    pub fn with_puncture(mut self, puncture: Puncture) -> Result<Chart> {
        match &puncture {
            Puncture::Point(p) if p.len() != self.dimension() => {
                return Err(Error::Dimension {
                    expected: self.dimension(),
                    got: p.len(),
                })
            }
            Puncture::Face { axis, .. } if *axis >= self.dimension() => {
                return Err(Error::Invalid(format!("puncture axis {axis} out of range")))
            }
            _ => {}
        }
        self.punctures.push(puncture);
        Ok(self)
    }

    /// `T*R^n` with coordinates `(q, p)` on the box `[-bound, bound]^(2n)`.
    pub fn phase_space(n: usize, bound: f64) -> Chart {
        assert!(n >= 1);
        let names = phase_space_names(n);
        Chart::new(
            &format!("T*R^{n}"),
            &names,
            vec![-bound; 2 * n],
            vec![bound; 2 * n],
        )
        .expect("valid phase space chart")
    }

    /// Polar chart `(r, theta)` on the punctured plane, `0 < r <= r_max`,
    /// `theta` in `[0, 2 pi]`.
    pub fn polar(r_max: f64) -> Chart {
        Chart::new("punctured plane", &["r", "theta"], vec![0.0, 0.0], vec![r_max, 2.0 * PI])
            .and_then(|c| c.with_puncture(Puncture::Face { axis: 0, value: 0.0 }))
            .expect("valid polar chart")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &Variables {
        &self.vars
    }

    pub fn dimension(&self) -> usize {
        self.vars.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn punctures(&self) -> &[Puncture] {
        &self.punctures
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (a, b))| v.is_finite() && a <= v && v <= b)
            && !self.punctures.iter().any(|p| match p {
                Puncture::Point(c) => c.as_slice() == x,
                Puncture::Face { axis, value } => x[*axis] == *value,
            })
    }

    fn near_puncture(&self, x: &[f64]) -> bool {
        let widths: Vec<f64> = self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).collect();
        self.punctures.iter().any(|p| match p {
            Puncture::Point(c) => {
                let d2: f64 = c.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
                let w = widths.iter().cloned().fold(0.0, f64::max);
                d2.sqrt() < 1e-3 * w
            }
            Puncture::Face { axis, value } => (x[*axis] - value).abs() < 1e-3 * widths[*axis],
        })
    }

    /// Seeded uniform sample of domain points, keeping a small margin away
    /// from punctures.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        sampling::sample_box(&self.lower, &self.upper, count, seed, |x| self.near_puncture(x))
    }

    pub fn parse(&self, source: &str) -> Result<Expression> {
        Ok(Expression::parse_with(source, &self.vars)?)
    }

    pub fn coordinate(&self, index: usize) -> Expression {
        Expression::coordinate(index, &self.vars)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }
}

pub(crate) fn check_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::ChartMismatch(a.name.clone(), b.name.clone()))
    }
}

fn check_expressions(chart: &Chart, exprs: &[Expression]) -> Result<()> {
    if exprs.len() != chart.dimension() {
        return Err(Error::Dimension {
            expected: chart.dimension(),
            got: exprs.len(),
        });
    }
    for e in exprs {
        if e.variables() != chart.variables() {
            return Err(Error::Invalid(format!(
                "expression `{e}` is not over the coordinates of chart `{}`",
                chart.name
            )));
        }
    }
    Ok(())
}

fn eval_all(exprs: &[Expression], point: &[f64]) -> Result<Vec<f64>> {
    exprs.iter().map(|e| Ok(e.evaluate(point)?)).collect()
}

/// A vector field `sum X^i d/dx_i`.
#[derive(Debug, Clone)]
pub struct VectorField {
    chart: Arc<Chart>,
    components: Vec<Expression>,
}

impl VectorField {
    pub fn new(chart: &Arc<Chart>, components: Vec<Expression>) -> Result<VectorField> {
        check_expressions(chart, &components)?;
        Ok(VectorField {
            chart: chart.clone(),
            components,
        })
    }

    pub fn parse<S: AsRef<str>>(chart: &Arc<Chart>, components: &[S]) -> Result<VectorField> {
        let comps = components
            .iter()
            .map(|s| chart.parse(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(chart, comps)
    }

    pub fn zero(chart: &Arc<Chart>) -> VectorField {
        VectorField {
            chart: chart.clone(),
            components: vec![Expression::zero(chart.variables()); chart.dimension()],
        }
    }

    /// The coordinate field `d/dx_index`.
    pub fn coordinate(chart: &Arc<Chart>, index: usize) -> VectorField {
        let mut v = VectorField::zero(chart);
        v.components[index] = Expression::one(chart.variables());
        v
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<Vec<f64>> {
        eval_all(&self.components, point)
    }

    pub fn compile(&self) -> Tape {
        Tape::compile(&self.components)
    }

    /// The derivative `X(f)`.
    pub fn apply(&self, f: &Expression) -> Expression {
        let mut out = Expression::zero(f.variables());
        for (i, x) in self.components.iter().enumerate() {
            if x.as_constant() == Some(0.0) {
                continue;
            }
            out = out + x * f.partial(i);
        }
        out
    }

    pub fn scale_by(&self, f: &Expression) -> VectorField {
        self.map(|x| f * x)
    }

    pub fn scale(&self, k: f64) -> VectorField {
        self.map(|x| x.scale(k))
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.zip(other, |a, b| a - b)
    }

    /// `[X, Y]^i = X(Y^i) - Y(X^i)`.
    pub fn lie_bracket(&self, other: &VectorField) -> Result<VectorField> {
        check_chart(&self.chart, &other.chart)?;
        let components = (0..self.components.len())
            .map(|i| self.apply(&other.components[i]) - other.apply(&self.components[i]))
            .collect();
        Ok(VectorField {
            chart: self.chart.clone(),
            components,
        })
    }

    fn map(&self, f: impl Fn(&Expression) -> Expression) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            components: self.components.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &VectorField, f: impl Fn(&Expression, &Expression) -> Expression) -> Result<VectorField> {
        check_chart(&self.chart, &other.chart)?;
        Ok(VectorField {
            chart: self.chart.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }
}

/// A 1-form `sum a_i dx_i`.
#[derive(Debug, Clone)]
pub struct OneForm {
    chart: Arc<Chart>,
    coefficients: Vec<Expression>,
}

impl OneForm {
    pub fn new(chart: &Arc<Chart>, coefficients: Vec<Expression>) -> Result<OneForm> {
        check_expressions(chart, &coefficients)?;
        Ok(OneForm {
            chart: chart.clone(),
            coefficients,
        })
    }

    pub fn parse<S: AsRef<str>>(chart: &Arc<Chart>, coefficients: &[S]) -> Result<OneForm> {
        let c = coefficients
            .iter()
            .map(|s| chart.parse(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        OneForm::new(chart, c)
    }

    pub fn zero(chart: &Arc<Chart>) -> OneForm {
        OneForm {
            chart: chart.clone(),
            coefficients: vec![Expression::zero(chart.variables()); chart.dimension()],
        }
    }

    /// The differential `df`.
    pub fn differential(chart: &Arc<Chart>, f: &Expression) -> Result<OneForm> {
        OneForm::new(chart, f.gradient())
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coefficients(&self) -> &[Expression] {
        &self.coefficients
    }

    /// The function `alpha(X)`.
    pub fn contract(&self, x: &VectorField) -> Result<Expression> {
        check_chart(&self.chart, &x.chart)?;
        let mut out = Expression::zero(self.chart.variables());
        for (a, xi) in self.coefficients.iter().zip(&x.components) {
            if a.as_constant() == Some(0.0) || xi.as_constant() == Some(0.0) {
                continue;
            }
            out = out + a * xi;
        }
        Ok(out)
    }

    /// `alpha_x(v)` for a tangent vector `v` at `x`.
    pub fn evaluate(&self, point: &[f64], v: &[f64]) -> Result<f64> {
        let a = eval_all(&self.coefficients, point)?;
        Ok(a.iter().zip(v).map(|(a, b)| a * b).sum())
    }

    /// `(d alpha)_ij = d_i alpha_j - d_j alpha_i`.
    pub fn exterior_derivative(&self) -> TwoForm {
        let n = self.coefficients.len();
        let grads: Vec<Vec<Expression>> = self.coefficients.iter().map(|a| a.gradient()).collect();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| &grads[j][i] - &grads[i][j]).collect())
            .collect();
        TwoForm {
            chart: self.chart.clone(),
            matrix,
        }
    }

    pub fn sub(&self, other: &OneForm) -> Result<OneForm> {
        check_chart(&self.chart, &other.chart)?;
        Ok(OneForm {
            chart: self.chart.clone(),
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

/// A 2-form given by its antisymmetric coefficient matrix.
#[derive(Debug, Clone)]
pub struct TwoForm {
    chart: Arc<Chart>,
    matrix: Vec<Vec<Expression>>,
}

impl TwoForm {
    /// Build from a full matrix, checking antisymmetry at sampled points.
    pub fn new(chart: &Arc<Chart>, matrix: Vec<Vec<Expression>>) -> Result<TwoForm> {
        if matrix.len() != chart.dimension() {
            return Err(Error::Dimension {
                expected: chart.dimension(),
                got: matrix.len(),
            });
        }
        for row in &matrix {
            check_expressions(chart, row)?;
        }
        let form = TwoForm {
            chart: chart.clone(),
            matrix,
        };
        let r = form.antisymmetry_residual(&chart.sample(DEFAULT_SAMPLES, DEFAULT_SEED))?;
        if r > 1e-12 {
            return Err(Error::NotAntisymmetric(r));
        }
        Ok(form)
    }

    /// Build from upper-triangular entries `(i, j, Omega_ij)` with `i < j`;
    /// the lower triangle is filled by antisymmetry.
    pub fn from_upper(chart: &Arc<Chart>, entries: Vec<(usize, usize, Expression)>) -> Result<TwoForm> {
        let mut form = TwoForm::zero(chart);
        let n = chart.dimension();
        for (i, j, e) in entries {
            if i >= n || j >= n || i == j {
                return Err(Error::Invalid(format!("2-form entry ({i}, {j}) is not off-diagonal in range")));
            }
            if e.variables() != chart.variables() {
                return Err(Error::Invalid(format!("entry `{e}` is not over the chart coordinates")));
            }
            form.matrix[j][i] = -&e;
            form.matrix[i][j] = e;
        }
        Ok(form)
    }

    pub fn zero(chart: &Arc<Chart>) -> TwoForm {
        let n = chart.dimension();
        TwoForm {
            chart: chart.clone(),
            matrix: vec![vec![Expression::zero(chart.variables()); n]; n],
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn matrix(&self) -> &[Vec<Expression>] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expression {
        &self.matrix[i][j]
    }

    pub fn dimension(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix_at(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.matrix[i][j].evaluate(point)?;
            }
        }
        Ok(m)
    }

    /// Constant coefficient matrix, if every entry folds to a constant.
    pub fn constant_matrix(&self) -> Option<DMatrix<f64>> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.matrix[i][j].as_constant()?;
            }
        }
        Some(m)
    }

    /// `omega(X, Y) = X^T Omega Y` as a function.
    pub fn apply(&self, x: &VectorField, y: &VectorField) -> Result<Expression> {
        self.contract(x)?.contract(y)
    }

    pub fn evaluate(&self, point: &[f64], x: &[f64], y: &[f64]) -> Result<f64> {
        let m = self.matrix_at(point)?;
        let mut s = 0.0;
        for i in 0..x.len() {
            for j in 0..y.len() {
                s += x[i] * m[(i, j)] * y[j];
            }
        }
        Ok(s)
    }

    /// Interior product `(i_X omega)_j = sum_i X^i Omega_ij`.
    pub fn contract(&self, x: &VectorField) -> Result<OneForm> {
        check_chart(&self.chart, &x.chart)?;
        let n = self.dimension();
        let coefficients = (0..n)
            .map(|j| {
                let mut acc = Expression::zero(self.chart.variables());
                for i in 0..n {
                    let (xi, o) = (&x.components[i], &self.matrix[i][j]);
                    if xi.as_constant() == Some(0.0) || o.as_constant() == Some(0.0) {
                        continue;
                    }
                    acc = acc + xi * o;
                }
                acc
            })
            .collect();
        Ok(OneForm {
            chart: self.chart.clone(),
            coefficients,
        })
    }

    /// `(d omega)_ijk = d_i Omega_jk + d_j Omega_ki + d_k Omega_ij` for `i < j < k`.
    pub fn exterior_derivative(&self) -> ThreeForm {
        let n = self.dimension();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let e = self.matrix[j][k].partial(i) + self.matrix[k][i].partial(j) + self.matrix[i][j].partial(k);
                    entries.push(([i, j, k], e));
                }
            }
        }
        ThreeForm {
            chart: self.chart.clone(),
            entries,
        }
    }

    pub fn add(&self, other: &TwoForm) -> Result<TwoForm> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TwoForm) -> Result<TwoForm> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &TwoForm, f: impl Fn(&Expression, &Expression) -> Expression) -> Result<TwoForm> {
        check_chart(&self.chart, &other.chart)?;
        Ok(TwoForm {
            chart: self.chart.clone(),
            matrix: self
                .matrix
                .iter()
                .zip(&other.matrix)
                .map(|(r, s)| r.iter().zip(s).map(|(a, b)| f(a, b)).collect())
                .collect(),
        })
    }

    pub fn antisymmetry_residual(&self, points: &[Vec<f64>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in points {
            let m = self.matrix_at(x)?;
            worst = worst.max((&m + m.transpose()).abs().max());
        }
        Ok(worst)
    }

    pub fn closedness_residual(&self, points: &[Vec<f64>]) -> Result<f64> {
        self.exterior_derivative().max_abs(points)
    }

    /// Largest absolute coefficient over the points.
    pub fn max_abs(&self, points: &[Vec<f64>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in points {
            worst = worst.max(self.matrix_at(x)?.abs().max());
        }
        Ok(worst)
    }
}

/// A 3-form stored by its entries with strictly increasing indices.
#[derive(Debug, Clone)]
pub struct ThreeForm {
    chart: Arc<Chart>,
    entries: Vec<([usize; 3], Expression)>,
}

impl ThreeForm {
    pub fn entries(&self) -> &[([usize; 3], Expression)] {
        &self.entries
    }

    fn coefficient(&self, i: usize, j: usize, k: usize) -> Option<(f64, &Expression)> {
        if i == j || j == k || i == k {
            return None;
        }
        let mut idx = [i, j, k];
        let mut sign = 1.0;
        for a in 0..3 {
            for b in 0..2 - a {
                if idx[b] > idx[b + 1] {
                    idx.swap(b, b + 1);
                    sign = -sign;
                }
            }
        }
        self.entries
            .iter()
            .find(|(key, _)| *key == idx)
            .map(|(_, e)| (sign, e))
    }

    /// `(i_X eta)_jk = sum_i X^i eta_ijk`.
    pub fn contract(&self, x: &VectorField) -> Result<TwoForm> {
        check_chart(&self.chart, &x.chart)?;
        let n = self.chart.dimension();
        let mut out = TwoForm::zero(&self.chart);
        for j in 0..n {
            for k in j + 1..n {
                let mut acc = Expression::zero(self.chart.variables());
                for i in 0..n {
                    if let Some((sign, e)) = self.coefficient(i, j, k) {
                        if e.as_constant() == Some(0.0) || x.components[i].as_constant() == Some(0.0) {
                            continue;
                        }
                        acc = acc + (&x.components[i] * e).scale(sign);
                    }
                }
                out.matrix[k][j] = -&acc;
                out.matrix[j][k] = acc;
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self, points: &[Vec<f64>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in points {
            for (_, e) in &self.entries {
                worst = worst.max(e.evaluate(x)?.abs());
            }
        }
        Ok(worst)
    }
}

/// Which sign relates the Hamiltonian vector field to `df`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SignConvention {
    /// `omega(Xi_f, .) = -df`.
    #[default]
    Standard,
    /// `omega(Xi_f, .) = df`.
    Flipped,
}

impl SignConvention {
    pub fn sign(self) -> f64 {
        match self {
            SignConvention::Standard => 1.0,
            SignConvention::Flipped => -1.0,
        }
    }
}

/// Sampled evidence behind a [`SymplecticStructure`].
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub seed: u64,
    pub samples: usize,
    pub antisymmetry: f64,
    pub closedness: f64,
    pub min_abs_det: f64,
}

pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// A 2-form certified closed and nondegenerate at sampled points.
#[derive(Debug, Clone)]
pub struct SymplecticStructure {
    form: TwoForm,
    inverse: Vec<Vec<Expression>>,
    constant: bool,
    convention: SignConvention,
    certificate: Certificate,
}

impl SymplecticStructure {
    pub fn certify(form: TwoForm) -> Result<SymplecticStructure> {
        SymplecticStructure::certify_with(form, DEFAULT_SAMPLES, DEFAULT_SEED)
    }

    pub fn certify_with(form: TwoForm, samples: usize, seed: u64) -> Result<SymplecticStructure> {
        let n = form.dimension();
        if n == 0 || n % 2 != 0 {
            return Err(Error::Invalid(format!("symplectic chart must have even dimension, got {n}")));
        }
        let points = form.chart.sample(samples, seed);
        let antisymmetry = form.antisymmetry_residual(&points)?;
        if antisymmetry > 1e-12 {
            return Err(Error::NotAntisymmetric(antisymmetry));
        }
        let closedness = form.closedness_residual(&points)?;
        if closedness > 1e-9 {
            return Err(Error::NotClosed(closedness));
        }
        let mut min_abs_det = f64::INFINITY;
        for x in &points {
            let det = form.matrix_at(x)?.determinant();
            if det.abs() <= SINGULAR_THRESHOLD {
                return Err(Error::Singular {
                    point: x.clone(),
                    det: det.abs(),
                });
            }
            min_abs_det = min_abs_det.min(det.abs());
        }
        let (inverse, constant) = match form.constant_matrix() {
            Some(m) => {
                let inv = m.try_inverse().ok_or(Error::Singular {
                    point: Vec::new(),
                    det: 0.0,
                })?;
                let vars = form.chart.variables();
                let rows = (0..n)
                    .map(|i| (0..n).map(|j| Expression::constant(inv[(i, j)], vars)).collect())
                    .collect();
                (rows, true)
            }
            None => (symbolic_inverse(&form.matrix), false),
        };
        Ok(SymplecticStructure {
            form,
            inverse,
            constant,
            convention: SignConvention::Standard,
            certificate: Certificate {
                seed,
                samples,
                antisymmetry,
                closedness,
                min_abs_det,
            },
        })
    }

    pub fn with_convention(mut self, convention: SignConvention) -> SymplecticStructure {
        self.convention = convention;
        self
    }

    pub fn form(&self) -> &TwoForm {
        &self.form
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.form.chart
    }

    pub fn dimension(&self) -> usize {
        self.form.dimension()
    }

    pub fn half_dimension(&self) -> usize {
        self.form.dimension() / 2
    }

    pub fn convention(&self) -> SignConvention {
        self.convention
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    /// Symbolic entries of `Omega^{-1}`.
    pub fn inverse(&self) -> &[Vec<Expression>] {
        &self.inverse
    }

    /// Whether this is exactly `sum dp_i ^ dq_i` in the phase-space ordering.
    pub fn is_canonical(&self) -> bool {
        let n = self.half_dimension();
        match self.form.constant_matrix() {
            Some(m) => m == canonical_matrix(n),
            None => false,
        }
    }

    /// Solve `Omega(x) v = rhs` by partially pivoted elimination, rejecting
    /// points where `|det Omega| <= 1e-12`.
    pub fn solve_at(&self, point: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let m = self.form.matrix_at(point)?;
        let lu = m.lu();
        let det = lu.determinant();
        if det.abs() <= SINGULAR_THRESHOLD {
            return Err(Error::Singular {
                point: point.to_vec(),
                det: det.abs(),
            });
        }
        let b = nalgebra::DVector::from_column_slice(rhs);
        let x = lu.solve(&b).ok_or(Error::Singular {
            point: point.to_vec(),
            det: det.abs(),
        })?;
        Ok(x.iter().copied().collect())
    }
}

fn canonical_matrix(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, n + i)] = -1.0;
        m[(n + i, i)] = 1.0;
    }
    m
}

fn det_expr(m: &[Vec<Expression>], rows: &[usize], cols: &[usize]) -> Expression {
    let vars = m[0][0].variables();
    if rows.len() == 1 {
        return m[rows[0]][cols[0]].clone();
    }
    let mut acc = Expression::zero(vars);
    for (k, &c) in cols.iter().enumerate() {
        let a = &m[rows[0]][c];
        if a.as_constant() == Some(0.0) {
            continue;
        }
        let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = det_expr(m, &rows[1..], &sub_cols);
        let term = a * minor;
        acc = if k % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

/// Adjugate over determinant.
fn symbolic_inverse(m: &[Vec<Expression>]) -> Vec<Vec<Expression>> {
    let n = m.len();
    let all: Vec<usize> = (0..n).collect();
    let det = det_expr(m, &all, &all);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let rows: Vec<usize> = all.iter().copied().filter(|&r| r != j).collect();
                    let cols: Vec<usize> = all.iter().copied().filter(|&c| c != i).collect();
                    let minor = det_expr(m, &rows, &cols);
                    let cof = if (i + j) % 2 == 0 { minor } else { -minor };
                    cof / &det
                })
                .collect()
        })
        .collect()
}

/// `sum dp_i ^ dq_i` on `T*R^n` over the default box `[-2, 2]^(2n)`.
pub fn canonical_symplectic(n: usize) -> SymplecticStructure {
    canonical_symplectic_on(&Arc::new(Chart::phase_space(n, 2.0))).expect("canonical form is symplectic")
}

/// The canonical form on a chart whose coordinates are ordered `(q, p)`.
pub fn canonical_symplectic_on(chart: &Arc<Chart>) -> Result<SymplecticStructure> {
    let dim = chart.dimension();
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::Invalid(format!("canonical form needs an even-dimensional chart, got {dim}")));
    }
    let n = dim / 2;
    let entries = (0..n)
        .map(|i| (i, n + i, Expression::constant(-1.0, chart.variables())))
        .collect();
    SymplecticStructure::certify(TwoForm::from_upper(chart, entries)?)
}

/// `alpha = sum p_i dq_i` on the default `T*R^n` chart.
pub fn tautological_one_form(n: usize) -> OneForm {
    tautological_one_form_on(&Arc::new(Chart::phase_space(n, 2.0)))
}

pub fn tautological_one_form_on(chart: &Arc<Chart>) -> OneForm {
    let n = chart.dimension() / 2;
    let vars = chart.variables();
    let coefficients = (0..2 * n)
        .map(|i| {
            if i < n {
                Expression::coordinate(n + i, vars)
            } else {
                Expression::zero(vars)
            }
        })
        .collect();
    OneForm {
        chart: chart.clone(),
        coefficients,
    }
}

/// The intrinsic tautological form: a point `(q, p)` of `T*R^n` is the
/// covector `p` at `q`, and `alpha(v) = p(d pi(v))` where `d pi` keeps the
/// base components of `v`.
pub fn tautological_intrinsic(point: &[f64], v: &[f64]) -> f64 {
    let n = point.len() / 2;
    let covector = &point[n..];
    let projected = &v[..n];
    covector.iter().zip(projected).map(|(a, b)| a * b).sum()
}

/// `omega = pi^* tau + sum dp_i ^ dq_i` on `T*R^n`, for a closed 2-form `tau`
/// on an n-dimensional base chart (base coordinates map to `q1..qn` by
/// position).
pub fn twisted_cotangent(n: usize, tau: &TwoForm) -> Result<SymplecticStructure> {
    twisted_cotangent_on(&Arc::new(Chart::phase_space(n, 2.0)), tau)
}

pub fn twisted_cotangent_on(chart: &Arc<Chart>, tau: &TwoForm) -> Result<SymplecticStructure> {
    let n = chart.dimension() / 2;
    if tau.dimension() != n {
        return Err(Error::Dimension {
            expected: n,
            got: tau.dimension(),
        });
    }
    let base_points = tau.chart.sample(DEFAULT_SAMPLES, DEFAULT_SEED);
    let residual = tau.closedness_residual(&base_points)?;
    if residual > 1e-9 {
        return Err(Error::NotClosed(residual));
    }
    let q: Vec<Expression> = (0..n).map(|i| chart.coordinate(i)).collect();
    let mut matrix = canonical_symplectic_on(chart)?.form.matrix;
    for i in 0..n {
        for j in 0..n {
            matrix[i][j] = tau.matrix[i][j].substitute(&q);
        }
    }
    SymplecticStructure::certify(TwoForm {
        chart: chart.clone(),
        matrix,
    })
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

fn pfaffian(m: &[Vec<Expression>], idx: &[usize]) -> Expression {
    let vars = m[0][0].variables();
    if idx.is_empty() {
        return Expression::one(vars);
    }
    let first = idx[0];
    let mut acc = Expression::zero(vars);
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        let a = &m[first][j];
        if a.as_constant() == Some(0.0) {
            continue;
        }
        let rest: Vec<usize> = idx[1..].iter().copied().filter(|&k| k != j).collect();
        let term = a * pfaffian(m, &rest);
        acc = if pos % 2 == 1 { acc + term } else { acc - term };
    }
    acc
}

/// The coefficient `rho` with `omega^m = rho dx_1 ^ ... ^ dx_2m`, equal to
/// `m! Pf(Omega)`. For the canonical form this is `-1` when `m = 1` and `-2`
/// when `m = 2`, relative to the coordinate order `(q, p)`; its absolute value
/// is the Liouville density.
pub fn wedge_top_power(omega: &SymplecticStructure) -> Expression {
    let m = omega.half_dimension();
    let idx: Vec<usize> = (0..omega.dimension()).collect();
    pfaffian(&omega.form.matrix, &idx).scale(factorial(m))
}

/// Polar chart on the punctured plane with potential `alpha = r^2 dtheta`
/// and symplectic form `omega = d alpha = 2 r dr ^ dtheta`.
pub fn punctured_plane(r_max: f64) -> (SymplecticStructure, OneForm) {
    let chart = Arc::new(Chart::polar(r_max));
    let alpha = OneForm::parse(&chart, &["0", "r^2"]).expect("valid potential");
    let omega = SymplecticStructure::certify(alpha.exterior_derivative()).expect("d alpha is symplectic away from r = 0");
    (omega, alpha)
}
