//! Exact parsing of rational literals: `-3`, `13/10`, `1.25e-2`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Longest accepted literal; bounds the size of the resulting integers.
pub const MAX_LITERAL: usize = 512;
const MAX_EXPONENT: i64 = 400;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("rational literal longer than {MAX_LITERAL} bytes")]
    TooLong,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("exponent out of range in `{0}`")]
    Exponent(String),
}

fn digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn split_sign(s: &str) -> (bool, &str) {
    match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    }
}

pub fn parse_rational(input: &str) -> Result<BigRational, RationalError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(RationalError::Empty);
    }
    if s.len() > MAX_LITERAL {
        return Err(RationalError::TooLong);
    }
    let malformed = || RationalError::Malformed(s.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let (neg, num) = split_sign(num.trim());
        let n = digits(num).ok_or_else(malformed)?;
        let d = digits(den.trim()).ok_or_else(malformed)?;
        if d.is_zero() {
            return Err(RationalError::ZeroDenominator(s.to_string()));
        }
        let q = BigRational::new(n, d);
        return Ok(if neg { -q } else { q });
    }
    let (neg, rest) = split_sign(s);
    let (mantissa, exponent) = match rest.find(['e', 'E']) {
        Some(i) => {
            let (sign, e) = split_sign(&rest[i + 1..]);
            let e: i64 = digits(e)
                .and_then(|v| i64::try_from(v).ok())
                .ok_or_else(malformed)?;
            if e > MAX_EXPONENT {
                return Err(RationalError::Exponent(s.to_string()));
            }
            (&rest[..i], if sign { -e } else { e })
        }
        None => (rest, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    let whole = if int_part.is_empty() { Some(BigInt::zero()) } else { digits(int_part) };
    let frac = if frac_part.is_empty() { Some(BigInt::zero()) } else { digits(frac_part) };
    let (Some(whole), Some(frac)) = (whole, frac) else {
        return Err(malformed());
    };
    let scale = BigInt::from(10).pow(frac_part.len() as u32);
    let mut q = BigRational::new(whole * &scale + frac, scale);
    let ten = BigRational::from_integer(BigInt::from(10));
    let power = (0..exponent.unsigned_abs()).fold(BigRational::one(), |acc, _| acc * &ten);
    q = if exponent >= 0 { q * power } else { q / power };
    Ok(if neg { -q } else { q })
}

/// `p/q` in lowest terms, or `p` for integers.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
