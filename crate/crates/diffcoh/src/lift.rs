//! Integral lifts of closed real 2-cochains.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::cochain::{coboundary_or_zero, IntCochain, RealCochain};
use crate::dc::DifferentialCocycle;
use crate::snf::smith_normal_form;
use crate::{Error, Result, SimplicialComplex};

/// Distance from an integer below which a period counts as integral.
pub const PERIOD_TOLERANCE: f64 = 1e-9;

/// Period of the input over one basis 2-cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodEntry {
    /// Multiplicity of each triangle in the cycle.
    pub cycle: Vec<i64>,
    pub period: BigRational,
    pub nearest: BigInt,
    /// `|period - nearest|`.
    pub defect: f64,
}

impl PeriodEntry {
    pub fn integral(&self) -> bool {
        self.defect <= PERIOD_TOLERANCE
    }
}

#[derive(Debug, Clone)]
pub enum LiftOutcome {
    Lifted {
        cocycle: DifferentialCocycle,
        periods: Vec<PeriodEntry>,
        /// Largest change made to the input so that its periods are
        /// exactly the rounded integers; zero for exact input.
        adjustment: f64,
    },
    Infeasible {
        /// A basis 2-cycle with non-integral period.
        certificate: PeriodEntry,
        periods: Vec<PeriodEntry>,
    },
}

impl LiftOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LiftOutcome::Lifted { .. })
    }

    pub fn periods(&self) -> &[PeriodEntry] {
        match self {
            LiftOutcome::Lifted { periods, .. } | LiftOutcome::Infeasible { periods, .. } => periods,
        }
    }
}

fn round(q: &BigRational) -> BigInt {
    // nearest integer, halves away from zero
    q.round().to_integer()
}

/// Finds an integer 2-cochain `c` and real 1-cochain `h` with
/// `w - c = dh`. The periods of `w` over an integral basis of 2-cycles
/// (from the Smith form of the boundary map) are rounded; if any is
/// further than [`PERIOD_TOLERANCE`] from an integer the input has no
/// integral lift and that cycle is returned as a certificate.
pub fn integral_lift(complex: &Arc<SimplicialComplex>, omega: &RealCochain) -> Result<LiftOutcome> {
    if omega.degree() != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            got: omega.degree(),
        });
    }
    omega.checked_for(complex)?;
    if !coboundary_or_zero(complex, omega)?.is_zero() {
        return Err(Error::NotClosed);
    }
    let edges = complex.count(1);
    let triangles = complex.count(2);
    let boundary = complex.boundary_matrix(2);
    let snf = smith_normal_form(&boundary, triangles)?;

    let mut periods = Vec::new();
    for z in snf.kernel_basis() {
        let cycle: Vec<i64> = z.iter().map(|&x| i64::try_from(x).map_err(|_| Error::Overflow)).collect::<Result<_>>()?;
        let period = omega.evaluate_chain(&cycle);
        let nearest = round(&period);
        let defect = (period.clone() - BigRational::from_integer(nearest.clone()))
            .abs()
            .to_f64()
            .unwrap_or(f64::INFINITY);
        periods.push(PeriodEntry {
            cycle,
            period,
            nearest,
            defect,
        });
    }
    if let Some(bad) = periods.iter().find(|p| !p.integral()) {
        return Ok(LiftOutcome::Infeasible {
            certificate: bad.clone(),
            periods,
        });
    }

    // Dual cochains zeta_j = row j of v^{-1} satisfy zeta_j(z_i) = delta_ij.
    let rank = snf.rank;
    let mut c = vec![BigInt::zero(); triangles];
    let mut adjusted: Vec<BigRational> = omega.values().to_vec();
    for (offset, entry) in periods.iter().enumerate() {
        let row = &snf.v_inv[rank + offset];
        let shift = entry.period.clone() - BigRational::from_integer(entry.nearest.clone());
        for t in 0..triangles {
            if row[t] != 0 {
                let coeff = BigInt::from(row[t]);
                c[t] += &entry.nearest * &coeff;
                adjusted[t] -= &shift * BigRational::from_integer(coeff);
            }
        }
    }
    let adjustment = omega
        .values()
        .iter()
        .zip(&adjusted)
        .map(|(a, b)| (a - b).abs().to_f64().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let c = IntCochain::new(complex, 2, c)?;
    let adjusted = RealCochain::new(complex, 2, adjusted)?;

    // dh = w' - c where d on 1-cochains is the transpose of the boundary
    let rhs = adjusted.sub(&c.to_real())?;
    let matrix: Vec<Vec<BigRational>> = (0..triangles)
        .map(|t| (0..edges).map(|e| BigRational::from_integer(boundary[e][t].into())).collect())
        .collect();
    let h = solve_rational(matrix, rhs.values().to_vec(), edges)
        .ok_or_else(|| Error::NotCocycle("rounded form is not exact; homology basis incomplete".into()))?;
    let h = RealCochain::new(complex, 1, h)?;
    let cocycle = DifferentialCocycle::new(complex, c, h, adjusted)?;
    Ok(LiftOutcome::Lifted {
        cocycle,
        periods,
        adjustment,
    })
}

/// Solves `a x = b` exactly by row reduction; free variables are set to
/// zero. `None` if inconsistent.
pub fn solve_rational(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>, cols: usize) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][col].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        b[r] *= &inv;
        for i in 0..rows {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in col..cols {
                    let delta = &f * &a[r][j];
                    a[i][j] -= delta;
                }
                let delta = &f * &b[r];
                b[i] -= delta;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if b[r..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (i, &col) in pivots.iter().enumerate() {
        x[col] = b[i].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_solver() {
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(-1, 1)]];
        assert_eq!(solve_rational(a, vec![q(3, 1), q(1, 1)], 2), Some(vec![q(2, 1), q(1, 1)]));
        let singular = vec![vec![q(1, 1), q(1, 1)], vec![q(2, 1), q(2, 1)]];
        assert_eq!(solve_rational(singular, vec![q(1, 1), q(3, 1)], 2), None);
    }

    #[test]
    fn sphere_single_triangle_charge() {
        let s = Arc::new(SimplicialComplex::tetra_sphere());
        let w = RealCochain::new(&s, 2, vec![q(1, 1), q(0, 1), q(0, 1), q(0, 1)]).unwrap();
        let out = integral_lift(&s, &w).unwrap();
        assert!(out.is_feasible());
        assert_eq!(out.periods().len(), 1);
        let w = RealCochain::new(&s, 2, vec![q(1, 3), q(0, 1), q(0, 1), q(0, 1)]).unwrap();
        assert!(!integral_lift(&s, &w).unwrap().is_feasible());
    }
}
