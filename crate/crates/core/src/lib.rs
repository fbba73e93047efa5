//! Executable prequantization on coordinate charts.
//!
//! The crate is organised bottom-up: [`expr`] supplies parsed, exactly
//! differentiable scalar functions; [`geometry`] builds charts, vector fields
//! and forms on top of them; [`hamilton`] derives Hamiltonian vector fields,
//! Poisson brackets and flows; [`prequantum`] adds a trivialized Hermitian
//! line bundle with connection and the operators `Q_f`; [`polarization`]
//! handles real polarizations and leaf holonomy; [`densities`] integrates
//! densities over small explicit atlases.

pub mod corpus;
pub mod densities;
pub mod expr;
pub mod geometry;
pub mod hamilton;
pub mod polarization;
pub mod prequantum;
pub mod quadrature;
pub mod sampling;

pub use num_complex::Complex64;

use expr::{EvalError, ParseError, UnknownVariable};

/// Errors raised by the geometric and analytic layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parse error {0}")]
    Parse(#[from] ParseError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    UnknownVariable(#[from] UnknownVariable),
    #[error("{0}")]
    Invalid(String),
    #[error("objects live on different charts (`{0}` and `{1}`)")]
    ChartMismatch(String, String),
    #[error("expected dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("symplectic matrix is singular at {point:?} (|det| = {det:e})")]
    Singular { point: Vec<f64>, det: f64 },
    #[error("2-form is not closed (residual {0:e})")]
    NotClosed(f64),
    #[error("2-form is not antisymmetric (residual {0:e})")]
    NotAntisymmetric(f64),
    #[error("potential does not satisfy d(theta) = omega (residual {0:e})")]
    CurvatureMismatch(f64),
    #[error("trajectory left the chart domain at step {index} ({point:?})")]
    ExitedDomain { index: usize, point: Vec<f64> },
    #[error("section support is not contained in the quadrature box")]
    SupportExceedsGrid,
    #[error("section does not vanish on the boundary of its support box (|s| = {0:e})")]
    SupportBoundary(f64),
    #[error("frame fails the polarization condition: {0}")]
    NotPolarization(String),
    #[error("pairing varies along leaves (spread {0:e})")]
    NotLeafConstant(f64),
    #[error("frame or map is singular (|det| = {0:e})")]
    SingularFrame(f64),
    #[error("partition functions do not sum to one (deviation {0:e})")]
    PartitionNotUnity(f64),
    #[error("chart coefficients violate the transition law on an overlap (residual {0:e})")]
    TransitionMismatch(f64),
}

impl Error {
    /// Whether the failure arose during numerical work (as opposed to an
    /// input that never satisfied a precondition).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Eval(_) | Error::Singular { .. } | Error::ExitedDomain { .. } | Error::SingularFrame(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
