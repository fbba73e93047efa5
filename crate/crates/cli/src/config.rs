//! Declarative scene configuration read from TOML.
//!
//! Every table rejects unknown keys. Numeric fields accept TOML numbers or
//! constant expressions such as `"2*pi/1000"`; exact fields used by the
//! cocycle command accept rational literals such as `"13/10"`.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::rational::parse_rational;
use crate::CliError;

/// A real number given literally or as a constant expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Expr(String),
}

impl Number {
    pub fn value(&self, field: &str) -> Result<f64, CliError> {
        let v = match self {
            Number::Int(i) => *i as f64,
            Number::Float(f) => *f,
            Number::Expr(s) => {
                let e = prequant_core::expr::parse::<&str>(s, &[])
                    .map_err(|e| CliError::validation(format!("{field}: `{s}` {e}")))?;
                e.evaluate(&[])
                    .map_err(|e| CliError::validation(format!("{field}: `{s}` does not evaluate: {e}")))?
            }
        };
        if !v.is_finite() {
            return Err(CliError::validation(format!("{field}: value {v} is not finite")));
        }
        Ok(v)
    }
}

pub fn values(list: &[Number], field: &str) -> Result<Vec<f64>, CliError> {
    list.iter()
        .enumerate()
        .map(|(i, n)| n.value(&format!("{field}[{i}]")))
        .collect()
}

/// An exact rational given as an integer, a float (converted exactly) or a
/// literal string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exact {
    Int(i64),
    Float(f64),
    Literal(String),
}

impl Exact {
    pub fn value(&self, field: &str) -> Result<BigRational, CliError> {
        match self {
            Exact::Int(i) => Ok(BigRational::from_integer((*i).into())),
            Exact::Float(f) => BigRational::from_float(*f)
                .ok_or_else(|| CliError::validation(format!("{field}: {f} is not finite"))),
            Exact::Literal(s) => parse_rational(s).map_err(|e| CliError::validation(format!("{field}: {e}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub seed: Option<u64>,
    pub phase_space: Option<PhaseSpaceConfig>,
    pub flow: Option<FlowConfig>,
    pub poisson: Option<PoissonConfig>,
    pub prequantize: Option<PrequantizeConfig>,
    pub holonomy: Option<HolonomyConfig>,
    pub polarized: Option<PolarizedConfig>,
    pub density: Option<DensityConfig>,
    pub cocycle: Option<CocycleConfig>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormKind {
    #[default]
    Canonical,
    Twisted,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    #[default]
    Standard,
    Flipped,
}

/// Entry `(i, j, coefficient)` of a 2-form on the base, `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistEntry {
    pub i: usize,
    pub j: usize,
    pub coefficient: String,
}

/// `T*R^n` on the box `[-bound, bound]^(2n)` with coordinates
/// `(q1..qn, p1..pn)`, or `(q, p)` when `n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpaceConfig {
    #[serde(default = "one")]
    pub degrees: usize,
    pub bound: Option<Number>,
    #[serde(default)]
    pub form: FormKind,
    /// Base 2-form for `form = "twisted"`, written in the position
    /// coordinates (`q`, or `q1..qn`).
    #[serde(default)]
    pub twist: Vec<TwistEntry>,
    #[serde(default)]
    pub convention: Convention,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorName {
    #[default]
    Auto,
    Leapfrog,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub hamiltonian: String,
    pub initial: Vec<Number>,
    pub duration: Number,
    pub dt: Number,
    #[serde(default)]
    pub integrator: IntegratorName,
    /// Number of trajectory states echoed in the report.
    pub report_states: Option<usize>,
    /// Expected components of the Hamiltonian vector field, compared at
    /// random points.
    pub expected_field: Option<Vec<String>>,
    pub energy_tolerance: Option<Number>,
    pub return_tolerance: Option<Number>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonConfig {
    /// Explicit functions; every ordered triple is checked.
    #[serde(default)]
    pub functions: Vec<String>,
    pub random_triples: Option<usize>,
    pub points: Option<usize>,
    /// Random functions for the Liouville check `L_{Xi_f} omega = 0`.
    pub liouville_functions: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BundleKind {
    #[default]
    Standard,
    PuncturedPlane,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionConfig {
    pub re: String,
    #[serde(default = "zero_string")]
    pub im: String,
}

fn zero_string() -> String {
    "0".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub f: String,
    pub section: SectionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkewConfig {
    pub f: String,
    /// Simpson nodes per axis (odd).
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrequantizeConfig {
    #[serde(default)]
    pub bundle: BundleKind,
    /// Phase constant; defaults to `2*pi` (standard) or `1` (punctured plane).
    pub kappa: Option<Number>,
    /// Connection potential coefficients; defaults to `sum p_i dq_i`.
    pub potential: Option<Vec<String>>,
    pub r_max: Option<Number>,
    #[serde(default)]
    pub operators: Vec<OperatorConfig>,
    #[serde(default)]
    pub pairs: Vec<[String; 2]>,
    pub random_pairs: Option<usize>,
    pub curvature_samples: Option<usize>,
    pub points: Option<usize>,
    pub skew: Option<SkewConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomyConfig {
    pub r_squared: Vec<Number>,
    pub r_max: Option<Number>,
    pub tolerance: Option<Number>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolarizationKind {
    #[default]
    Vertical,
    Circles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarizedConfig {
    #[serde(default)]
    pub polarization: PolarizationKind,
    pub r_max: Option<Number>,
    #[serde(default)]
    pub sections: Vec<SectionConfig>,
    #[serde(default)]
    pub functions: Vec<String>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtlasKind {
    Circle,
    Annulus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub atlas: AtlasKind,
    pub starts: Vec<Number>,
    pub scales: Vec<Number>,
    pub blend: Number,
    pub r_inner: Option<Number>,
    pub r_outer: Option<Number>,
    /// Coefficient in the reference coordinates (`theta`, or `r, theta`).
    pub coefficient: SectionConfig,
    /// Also integrate the positive and negative parts of a real density.
    #[serde(default)]
    pub split: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexKind {
    Circle,
    Torus,
    TetraSphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleConfig {
    pub complex: ComplexKind,
    /// Circle vertex count.
    pub vertices: Option<usize>,
    /// Torus grid size.
    pub m: Option<usize>,
    pub n: Option<usize>,
    /// Uniform 2-cochain with this total.
    pub total: Option<Exact>,
    /// Explicit values, one per triangle.
    pub values: Option<Vec<Exact>>,
    /// `f(x, y) dx ^ dy` sampled on the unit torus.
    pub form: Option<String>,
    /// Random cochains for the `d~ d~ = 0` check.
    pub random_cochains: Option<usize>,
}

impl SceneConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::validation(format!("config: {}", e.message())))
    }
}

pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    section
        .as_ref()
        .ok_or_else(|| CliError::validation(format!("config is missing the [{name}] table")))
}
