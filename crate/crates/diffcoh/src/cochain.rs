//! Cochains with exact integer or rational values.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::{Error, Result, SimplicialComplex};

/// Exact coefficient ring for cochain values.
pub trait Scalar:
    Clone + PartialEq + fmt::Debug + Zero + Neg<Output = Self> + Add<Output = Self> + Sub<Output = Self>
{
    fn from_i64(v: i64) -> Self;
}

impl Scalar for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain<T> {
    degree: usize,
    values: Vec<T>,
}

pub type IntCochain = Cochain<BigInt>;
pub type RealCochain = Cochain<BigRational>;

impl<T: Scalar> Cochain<T> {
    pub fn new(complex: &SimplicialComplex, degree: usize, values: Vec<T>) -> Result<Self> {
        let expected = complex.count(degree);
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                degree,
                expected,
                got: values.len(),
            });
        }
        Ok(Self { degree, values })
    }

    pub fn zero(complex: &SimplicialComplex, degree: usize) -> Self {
        Self {
            degree,
            values: vec![T::zero(); complex.count(degree)],
        }
    }

    pub fn from_i64s(complex: &SimplicialComplex, degree: usize, values: &[i64]) -> Result<Self> {
        Self::new(complex, degree, values.iter().map(|&v| T::from_i64(v)).collect())
    }

    /// Indicator of a single simplex.
    pub fn indicator(complex: &SimplicialComplex, degree: usize, index: usize) -> Self {
        let mut c = Self::zero(complex, degree);
        c.values[index] = T::from_i64(1);
        c
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn checked_for(&self, complex: &SimplicialComplex) -> Result<()> {
        let expected = complex.count(self.degree);
        if self.values.len() != expected {
            return Err(Error::LengthMismatch {
                degree: self.degree,
                expected,
                got: self.values.len(),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        if self.values.len() != other.values.len() {
            return Err(Error::LengthMismatch {
                degree: self.degree,
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        Ok(Self {
            degree: self.degree,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn neg(&self) -> Self {
        Self {
            degree: self.degree,
            values: self.values.iter().map(|v| -v.clone()).collect(),
        }
    }

    /// Pairing with an integer chain given by simplex multiplicities.
    pub fn evaluate_chain(&self, chain: &[i64]) -> T {
        self.values
            .iter()
            .zip(chain)
            .fold(T::zero(), |acc, (v, &m)| acc + scale_int(v, m))
    }

    pub fn total(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc + v.clone())
    }
}

fn scale_int<T: Scalar>(v: &T, m: i64) -> T {
    match m {
        0 => T::zero(),
        1 => v.clone(),
        -1 => -v.clone(),
        _ => {
            let mut acc = T::zero();
            for _ in 0..m.unsigned_abs() {
                acc = acc + v.clone();
            }
            if m < 0 {
                -acc
            } else {
                acc
            }
        }
    }
}

impl IntCochain {
    pub fn to_real(&self) -> RealCochain {
        Cochain {
            degree: self.degree,
            values: self.values.iter().map(|v| BigRational::from_integer(v.clone())).collect(),
        }
    }
}

impl RealCochain {
    /// Exact conversion of floating-point samples.
    pub fn from_f64s(complex: &SimplicialComplex, degree: usize, values: &[f64]) -> Result<Self> {
        let exact = values
            .iter()
            .map(|&v| BigRational::from_float(v).ok_or_else(|| Error::Sampling(format!("non-finite value {v}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(complex, degree, exact)
    }

    /// Integer cochain if every value is an integer.
    pub fn to_integer(&self) -> Option<IntCochain> {
        let values = self
            .values
            .iter()
            .map(|v| v.is_integer().then(|| v.to_integer()))
            .collect::<Option<Vec<_>>>()?;
        Some(Cochain {
            degree: self.degree,
            values,
        })
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.to_f64s().into_iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Coboundary `d` from degree `k` to `k + 1`. Fails at the top dimension
/// of the complex.
pub fn coboundary<T: Scalar>(complex: &SimplicialComplex, x: &Cochain<T>) -> Result<Cochain<T>> {
    if x.degree >= complex.dimension() {
        return Err(Error::DegreeOverflow {
            degree: x.degree,
            top: complex.dimension(),
        });
    }
    coboundary_or_zero(complex, x)
}

/// Coboundary that maps into the zero group above the top dimension.
pub fn coboundary_or_zero<T: Scalar>(complex: &SimplicialComplex, x: &Cochain<T>) -> Result<Cochain<T>> {
    x.checked_for(complex)?;
    let values = match x.degree {
        0 => complex
            .edge_faces()
            .iter()
            .map(|faces| signed_sum(faces, &x.values))
            .collect(),
        1 => complex
            .triangle_faces()
            .iter()
            .map(|faces| signed_sum(faces, &x.values))
            .collect(),
        _ => Vec::new(),
    };
    Ok(Cochain {
        degree: x.degree + 1,
        values,
    })
}

fn signed_sum<T: Scalar>(faces: &[(usize, i64)], values: &[T]) -> T {
    faces
        .iter()
        .fold(T::zero(), |acc, &(i, s)| acc + scale_int(&values[i], s))
}
