//! Exact discrete differential cohomology on small simplicial complexes.
//!
//! Integer and rational cochains, the differential cochain complex with
//! `d~(c, h, w) = (dc, w - c - dh, dw)`, the groupoid of degree-two
//! differential cocycles, the functor from trivial circle bundles with
//! connection, and a constructive integral-lift solver.

pub mod cochain;
pub mod complex;
pub mod dc;
pub mod dch;
pub mod lift;
pub mod sample;
pub mod snf;

pub use cochain::{coboundary, coboundary_or_zero, Cochain, IntCochain, RealCochain};
pub use complex::{Builtin, SimplicialComplex};
pub use dc::{compose_morphisms, d_tilde, morphisms_equal, CocycleMorphism, DifferentialCochain, DifferentialCocycle};
pub use dch::{dch_morphism, dch_object, hom_probe, CircleMap, ProbeReport};
pub use lift::{integral_lift, LiftOutcome, PeriodEntry};
pub use num_bigint::BigInt;
pub use num_rational::BigRational;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("degree overflow: no coboundary out of degree {degree} on a complex of dimension {top}")]
    DegreeOverflow { degree: usize, top: usize },
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("cochain of degree {degree} has {got} values, complex has {expected} simplices")]
    LengthMismatch { degree: usize, expected: usize, got: usize },
    #[error("form slot must vanish in degree {0}")]
    FormSlotNonzero(usize),
    #[error("not a differential cocycle: {0}")]
    NotCocycle(String),
    #[error("not a morphism: {0}")]
    NotMorphism(String),
    #[error("morphisms are not composable: target of the first differs from source of the second")]
    NotComposable,
    #[error("morphisms do not share source and target")]
    SourceTargetMismatch,
    #[error("morphisms live on different complexes")]
    ComplexMismatch,
    #[error("winding data inconsistent on {simplex}: {detail}")]
    WindingInconsistent { simplex: String, detail: String },
    #[error("input 2-cochain is not closed")]
    NotClosed,
    #[error("complex is not connected")]
    Disconnected,
    #[error("integer overflow in Smith normal form")]
    Overflow,
    #[error("sampling did not stabilize: {0}")]
    Sampling(String),
}

pub type Result<T> = std::result::Result<T, Error>;
