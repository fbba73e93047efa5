//! Scalar expressions over named chart coordinates.
//!
//! An [`Expression`] is an immutable tree (with shared subtrees) built from
//! constants, coordinates, the four arithmetic operations, powers with a
//! constant exponent, and the elementary functions `sin`, `cos`, `exp`, `log`
//! and `sqrt`. Expressions are parsed from text, evaluated at points, and
//! differentiated exactly.
//!
//! Grammar (precedence from loosest to tightest):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?        right associative, exponent constant
//! primary := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```

mod complex;
mod diff;
mod parser;
mod print;
mod tape;

use std::fmt;
use std::ops;
use std::sync::Arc;

pub use complex::ComplexExpr;
pub use parser::{ParseError, ParseErrorKind};
pub use tape::Tape;

/// Elementary functions understood by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub(crate) fn apply(self, x: f64) -> Result<f64, EvalError> {
        match self {
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Exp => Ok(x.exp()),
            Func::Log => {
                if x > 0.0 {
                    Ok(x.ln())
                } else {
                    Err(EvalError::LogOfNonPositive(x))
                }
            }
            Func::Sqrt => {
                if x >= 0.0 {
                    Ok(x.sqrt())
                } else {
                    Err(EvalError::SqrtOfNegative(x))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Const(f64),
    Var(usize),
    Add(Arc<Node>, Arc<Node>),
    Sub(Arc<Node>, Arc<Node>),
    Mul(Arc<Node>, Arc<Node>),
    Div(Arc<Node>, Arc<Node>),
    Neg(Arc<Node>),
    Pow(Arc<Node>, f64),
    Call(Func, Arc<Node>),
}

/// Failure to evaluate an expression at a point.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("point has {got} coordinates, expression expects {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of nonpositive value {0}")]
    LogOfNonPositive(f64),
    #[error("sqrt of negative value {0}")]
    SqrtOfNegative(f64),
    #[error("{base}^{exponent} is undefined")]
    PowDomain { base: f64, exponent: f64 },
    #[error("non-finite intermediate value")]
    NonFinite,
}

pub(crate) fn pow_checked(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        if base == 0.0 && exponent < 0.0 {
            return Err(EvalError::PowDomain { base, exponent });
        }
        return Ok(base.powi(exponent as i32));
    }
    if base < 0.0 || (base == 0.0 && exponent < 0.0) {
        return Err(EvalError::PowDomain { base, exponent });
    }
    Ok(base.powf(exponent))
}

pub(crate) fn finite(x: f64) -> Result<f64, EvalError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(EvalError::NonFinite)
    }
}

impl Node {
    fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        let v = match self {
            Node::Const(c) => *c,
            Node::Var(i) => point[*i],
            Node::Add(a, b) => a.eval(point)? + b.eval(point)?,
            Node::Sub(a, b) => a.eval(point)? - b.eval(point)?,
            Node::Mul(a, b) => a.eval(point)? * b.eval(point)?,
            Node::Div(a, b) => {
                let num = a.eval(point)?;
                let den = b.eval(point)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                num / den
            }
            Node::Neg(a) => -a.eval(point)?,
            Node::Pow(a, r) => pow_checked(a.eval(point)?, *r)?,
            Node::Call(f, a) => f.apply(a.eval(point)?)?,
        };
        finite(v)
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn mentions(&self, var: usize) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(i) => *i == var,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.mentions(var) || b.mentions(var)
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.mentions(var),
        }
    }
}

// Folding constructors. Constant subtrees collapse only when the folded value
// is finite, so domain errors still surface at evaluation time.

pub(crate) fn c(v: f64) -> Arc<Node> {
    Arc::new(Node::Const(v))
}

pub(crate) fn add(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => c(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Arc::new(Node::Add(a, b)),
    }
}

pub(crate) fn sub(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => c(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Arc::new(Node::Sub(a, b)),
    }
}

pub(crate) fn mul(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => c(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => c(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Arc::new(Node::Mul(a, b)),
    }
}

pub(crate) fn div(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != 0.0 => c(x / y),
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == 0.0 && b.as_const().is_none() => c(0.0),
        _ => Arc::new(Node::Div(a, b)),
    }
}

pub(crate) fn neg(a: Arc<Node>) -> Arc<Node> {
    match &*a {
        Node::Const(x) => c(-x),
        Node::Neg(inner) => inner.clone(),
        _ => Arc::new(Node::Neg(a)),
    }
}

pub(crate) fn pow(a: Arc<Node>, r: f64) -> Arc<Node> {
    if r == 1.0 {
        return a;
    }
    if r == 0.0 {
        return c(1.0);
    }
    if let Some(x) = a.as_const() {
        if let Ok(v) = pow_checked(x, r) {
            if v.is_finite() {
                return c(v);
            }
        }
    }
    Arc::new(Node::Pow(a, r))
}

pub(crate) fn call(f: Func, a: Arc<Node>) -> Arc<Node> {
    if let Some(x) = a.as_const() {
        if let Ok(v) = f.apply(x) {
            if v.is_finite() {
                return c(v);
            }
        }
    }
    Arc::new(Node::Call(f, a))
}

/// Ordered coordinate names shared by every expression on one chart.
pub type Variables = Arc<[String]>;

/// A scalar function of the coordinates in [`Expression::variables`].
#[derive(Clone)]
pub struct Expression {
    pub(crate) root: Arc<Node>,
    pub(crate) vars: Variables,
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression({} over {:?})", self, &*self.vars)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render(&self.root, &self.vars))
    }
}

/// Parse `source` as an expression over `variables`.
pub fn parse<S: AsRef<str>>(source: &str, variables: &[S]) -> Result<Expression, ParseError> {
    let vars = parser::validate_variables(variables)?;
    Expression::parse_with(source, &vars)
}

pub(crate) fn make_vars<S: AsRef<str>>(names: &[S]) -> Variables {
    names.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>().into()
}

impl Expression {
    /// Parse against an existing shared variable list.
    pub fn parse_with(source: &str, vars: &Variables) -> Result<Expression, ParseError> {
        let root = parser::Parser::new(source, vars).parse()?;
        Ok(Expression {
            root,
            vars: vars.clone(),
        })
    }

    pub fn constant(value: f64, vars: &Variables) -> Expression {
        Expression {
            root: c(value),
            vars: vars.clone(),
        }
    }

    pub fn zero(vars: &Variables) -> Expression {
        Expression::constant(0.0, vars)
    }

    pub fn one(vars: &Variables) -> Expression {
        Expression::constant(1.0, vars)
    }

    /// The coordinate function for variable index `index`.
    pub fn coordinate(index: usize, vars: &Variables) -> Expression {
        assert!(index < vars.len(), "coordinate index out of range");
        Expression {
            root: Arc::new(Node::Var(index)),
            vars: vars.clone(),
        }
    }

    pub fn variable(name: &str, vars: &Variables) -> Option<Expression> {
        vars.iter()
            .position(|v| v == name)
            .map(|i| Expression::coordinate(i, vars))
    }

    pub fn variables(&self) -> &Variables {
        &self.vars
    }

    pub fn dimension(&self) -> usize {
        self.vars.len()
    }

    pub fn same_variables(&self, other: &Expression) -> bool {
        Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64, EvalError> {
        if point.len() != self.vars.len() {
            return Err(EvalError::PointDimension {
                expected: self.vars.len(),
                got: point.len(),
            });
        }
        self.root.eval(point)
    }

    /// The folded constant value, if the expression does not depend on any
    /// coordinate after constant folding.
    pub fn as_constant(&self) -> Option<f64> {
        self.root.as_const()
    }

    pub fn depends_on(&self, index: usize) -> bool {
        self.root.mentions(index)
    }

    /// Indices of the coordinates this expression mentions.
    pub fn free_variables(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| self.depends_on(i)).collect()
    }

    /// Exact partial derivative with respect to the named coordinate.
    pub fn differentiate(&self, var: &str) -> Result<Expression, UnknownVariable> {
        let index = self
            .vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| UnknownVariable(var.to_string()))?;
        Ok(self.partial(index))
    }

    /// Exact partial derivative with respect to coordinate `index`.
    pub fn partial(&self, index: usize) -> Expression {
        assert!(index < self.vars.len(), "coordinate index out of range");
        Expression {
            root: diff::derivative(&self.root, index),
            vars: self.vars.clone(),
        }
    }

    pub fn gradient(&self) -> Vec<Expression> {
        (0..self.vars.len()).map(|i| self.partial(i)).collect()
    }

    /// Replace coordinate `i` by `replacements[i]`; the result lives over the
    /// replacements' variable list.
    pub fn substitute(&self, replacements: &[Expression]) -> Expression {
        assert_eq!(
            replacements.len(),
            self.vars.len(),
            "substitution needs one replacement per coordinate"
        );
        let vars = replacements
            .first()
            .map(|e| e.vars.clone())
            .unwrap_or_else(|| self.vars.clone());
        for r in replacements {
            assert!(r.vars == vars, "replacements must share one variable list");
        }
        let roots: Vec<Arc<Node>> = replacements.iter().map(|e| e.root.clone()).collect();
        Expression {
            root: substitute_node(&self.root, &roots),
            vars,
        }
    }

    /// Reinterpret this expression over a different variable list by name.
    pub fn rebind(&self, vars: &Variables) -> Result<Expression, UnknownVariable> {
        let replacements = self
            .vars
            .iter()
            .map(|name| Expression::variable(name, vars).ok_or_else(|| UnknownVariable(name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        if replacements.is_empty() {
            return Ok(Expression {
                root: self.root.clone(),
                vars: vars.clone(),
            });
        }
        Ok(self.substitute(&replacements))
    }

    pub fn powf(&self, exponent: f64) -> Expression {
        self.unary(|a| pow(a, exponent))
    }

    pub fn sin(&self) -> Expression {
        self.unary(|a| call(Func::Sin, a))
    }

    pub fn cos(&self) -> Expression {
        self.unary(|a| call(Func::Cos, a))
    }

    pub fn exp(&self) -> Expression {
        self.unary(|a| call(Func::Exp, a))
    }

    pub fn ln(&self) -> Expression {
        self.unary(|a| call(Func::Log, a))
    }

    pub fn sqrt(&self) -> Expression {
        self.unary(|a| call(Func::Sqrt, a))
    }

    pub fn scale(&self, k: f64) -> Expression {
        self.unary(|a| mul(c(k), a))
    }

    fn unary(&self, op: impl FnOnce(Arc<Node>) -> Arc<Node>) -> Expression {
        Expression {
            root: op(self.root.clone()),
            vars: self.vars.clone(),
        }
    }

    fn binary(&self, other: &Expression, op: fn(Arc<Node>, Arc<Node>) -> Arc<Node>) -> Expression {
        assert!(
            self.same_variables(other),
            "expressions over different coordinates: {:?} vs {:?}",
            &*self.vars,
            &*other.vars
        );
        Expression {
            root: op(self.root.clone(), other.root.clone()),
            vars: self.vars.clone(),
        }
    }

    /// Compile to a flat instruction tape for repeated evaluation.
    pub fn compile(&self) -> Tape {
        Tape::compile(std::slice::from_ref(self))
    }

    /// Top-level additive terms, signs folded in, so that the expression is
    /// their sum.
    pub fn additive_terms(&self) -> Vec<Expression> {
        let mut out = Vec::new();
        collect_terms(&self.root, 1.0, &mut out);
        out.into_iter()
            .map(|root| Expression {
                root,
                vars: self.vars.clone(),
            })
            .collect()
    }

    /// Number of distinct nodes (shared subtrees counted once).
    pub fn node_count(&self) -> usize {
        self.compile().len()
    }
}

fn is_sum(node: &Node) -> bool {
    matches!(node, Node::Add(..) | Node::Sub(..) | Node::Neg(..))
}

fn collect_terms(node: &Arc<Node>, scale: f64, out: &mut Vec<Arc<Node>>) {
    match &**node {
        Node::Add(a, b) => {
            collect_terms(a, scale, out);
            collect_terms(b, scale, out);
        }
        Node::Sub(a, b) => {
            collect_terms(a, scale, out);
            collect_terms(b, -scale, out);
        }
        Node::Neg(a) => collect_terms(a, -scale, out),
        // constant factors distribute over sums
        Node::Mul(a, b) if matches!(**a, Node::Const(_)) && is_sum(b) => {
            let Node::Const(k) = **a else { unreachable!() };
            collect_terms(b, scale * k, out)
        }
        Node::Mul(a, b) if matches!(**b, Node::Const(_)) && is_sum(a) => {
            let Node::Const(k) = **b else { unreachable!() };
            collect_terms(a, scale * k, out)
        }
        Node::Div(a, b) if matches!(**b, Node::Const(k) if k != 0.0) && is_sum(a) => {
            let Node::Const(k) = **b else { unreachable!() };
            collect_terms(a, scale / k, out)
        }
        _ if scale == 1.0 => out.push(node.clone()),
        _ if scale == -1.0 => out.push(neg(node.clone())),
        _ => out.push(mul(c(scale), node.clone())),
    }
}

fn substitute_node(node: &Arc<Node>, roots: &[Arc<Node>]) -> Arc<Node> {
    match &**node {
        Node::Const(v) => c(*v),
        Node::Var(i) => roots[*i].clone(),
        Node::Add(a, b) => add(substitute_node(a, roots), substitute_node(b, roots)),
        Node::Sub(a, b) => sub(substitute_node(a, roots), substitute_node(b, roots)),
        Node::Mul(a, b) => mul(substitute_node(a, roots), substitute_node(b, roots)),
        Node::Div(a, b) => div(substitute_node(a, roots), substitute_node(b, roots)),
        Node::Neg(a) => neg(substitute_node(a, roots)),
        Node::Pow(a, r) => pow(substitute_node(a, roots), *r),
        Node::Call(f, a) => call(*f, substitute_node(a, roots)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown variable `{0}`")]
pub struct UnknownVariable(pub String);

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $ctor:ident) => {
        impl ops::$trait<&Expression> for &Expression {
            type Output = Expression;
            fn $method(self, rhs: &Expression) -> Expression {
                self.binary(rhs, $ctor)
            }
        }
        impl ops::$trait<Expression> for Expression {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                self.binary(&rhs, $ctor)
            }
        }
        impl ops::$trait<&Expression> for Expression {
            type Output = Expression;
            fn $method(self, rhs: &Expression) -> Expression {
                self.binary(rhs, $ctor)
            }
        }
        impl ops::$trait<Expression> for &Expression {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                self.binary(&rhs, $ctor)
            }
        }
        impl ops::$trait<f64> for &Expression {
            type Output = Expression;
            fn $method(self, rhs: f64) -> Expression {
                self.binary(&Expression::constant(rhs, &self.vars), $ctor)
            }
        }
        impl ops::$trait<f64> for Expression {
            type Output = Expression;
            fn $method(self, rhs: f64) -> Expression {
                (&self).$method(rhs)
            }
        }
    };
}

impl_binop!(Add, add, add);
impl_binop!(Sub, sub, sub);
impl_binop!(Mul, mul, mul);
impl_binop!(Div, div, div);

impl ops::Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        self.unary(neg)
    }
}

impl ops::Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        -&self
    }
}

/// Sum of a sequence of expressions over `vars`.
pub fn sum<'a>(vars: &Variables, terms: impl IntoIterator<Item = &'a Expression>) -> Expression {
    terms
        .into_iter()
        .fold(Expression::zero(vars), |acc, t| acc + t)
}
