//! The functor from trivial circle bundles with connection to
//! differential cocycles.

use std::collections::VecDeque;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cochain::{coboundary_or_zero, IntCochain, RealCochain};
use crate::dc::{morphisms_equal, CocycleMorphism, DifferentialCocycle};
use crate::{Error, Result, SimplicialComplex};

/// Object `(0, a, da)` for the connection `a + d(theta)` on the trivial
/// circle bundle, with `a` given by its edge integrals.
pub fn dch_object(complex: &Arc<SimplicialComplex>, a: &RealCochain) -> Result<DifferentialCocycle> {
    if a.degree() != 1 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: a.degree(),
        });
    }
    let da = coboundary_or_zero(complex, a)?;
    DifferentialCocycle::new(complex, IntCochain::zero(complex, 2), a.clone(), da)
}

/// A circle-valued vertex function measured in turns. `lift` is any real
/// lift per vertex; `pullback` holds the edge integrals of `f^* d(theta)`,
/// that is, the signed angle swept along each edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircleMap {
    lift: RealCochain,
    pullback: RealCochain,
}

impl CircleMap {
    /// Checks that `pullback - d(lift)` is integral on every edge and that
    /// the swept angle around every triangle is zero.
    pub fn new(complex: &SimplicialComplex, lift: RealCochain, pullback: RealCochain) -> Result<Self> {
        if lift.degree() != 0 || pullback.degree() != 1 {
            return Err(Error::DegreeMismatch {
                expected: 0,
                got: lift.degree(),
            });
        }
        lift.checked_for(complex)?;
        pullback.checked_for(complex)?;
        let jumps = pullback.sub(&coboundary_or_zero(complex, &lift)?)?;
        if let Some(i) = jumps.values().iter().position(|v| !v.is_integer()) {
            return Err(Error::WindingInconsistent {
                simplex: format!("edge {i}"),
                detail: format!("pullback minus lift increment is {}", jumps.values()[i]),
            });
        }
        let around = coboundary_or_zero(complex, &pullback)?;
        if let Some(t) = around.values().iter().position(|v| v != &BigRational::from_integer(0.into())) {
            return Err(Error::WindingInconsistent {
                simplex: format!("triangle {t}"),
                detail: format!("swept angle around the boundary is {}", around.values()[t]),
            });
        }
        Ok(Self { lift, pullback })
    }

    /// Map described by a lift and the integer winding carried by each edge:
    /// `pullback = d(lift) + windings`.
    pub fn from_windings(complex: &SimplicialComplex, lift: RealCochain, windings: &IntCochain) -> Result<Self> {
        let pullback = coboundary_or_zero(complex, &lift)?.add(&windings.to_real())?;
        Self::new(complex, lift, pullback)
    }

    pub fn constant(complex: &SimplicialComplex, value: BigRational) -> Self {
        Self {
            lift: RealCochain::new(complex, 0, vec![value; complex.count(0)]).expect("length matches"),
            pullback: RealCochain::zero(complex, 1),
        }
    }

    pub fn lift(&self) -> &RealCochain {
        &self.lift
    }

    pub fn pullback(&self) -> &RealCochain {
        &self.pullback
    }

    /// Pointwise product of circle-valued maps: lifts and swept angles add.
    pub fn product(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            lift: self.lift.add(&other.lift)?,
            pullback: self.pullback.add(&other.pullback)?,
        })
    }

    /// Same map, different lift: `lift + shift` for an integer 0-cochain.
    pub fn relifted(&self, shift: &IntCochain) -> Result<Self> {
        Ok(Self {
            lift: self.lift.add(&shift.to_real())?,
            pullback: self.pullback.clone(),
        })
    }

    /// Swept angle along an edge cycle given by multiplicities.
    pub fn winding(&self, cycle: &[i64]) -> BigRational {
        self.pullback.evaluate_chain(cycle)
    }

    /// Integer part `f^* d(theta) - d(lift)`.
    pub fn jumps(&self, complex: &SimplicialComplex) -> Result<IntCochain> {
        self.pullback
            .sub(&coboundary_or_zero(complex, &self.lift)?)?
            .to_integer()
            .ok_or_else(|| Error::WindingInconsistent {
                simplex: "edge".into(),
                detail: "non-integral jump".into(),
            })
    }
}

/// Morphism from `dch_object(a)` to `dch_object(a - f^* d(theta))` with
/// representative `e = f^* d(theta) - d(lift)`, `k = lift`.
pub fn dch_morphism(complex: &Arc<SimplicialComplex>, f: &CircleMap, a: &RealCochain) -> Result<CocycleMorphism> {
    let source = dch_object(complex, a)?;
    let target = dch_object(complex, &a.sub(&f.pullback)?)?;
    let e = f.jumps(complex)?;
    CocycleMorphism::new(source, target, e, f.lift.clone())
}

/// Outcome of comparing circle maps with brute-force morphism classes
/// between two fixed trivial-bundle objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeReport {
    /// Circle maps enumerated (base-vertex values `j / denominator`).
    pub maps: usize,
    /// Representatives `(e, k)` found with `|e| <= bound`.
    pub representatives: usize,
    /// Distinct classes among those representatives.
    pub classes: usize,
    /// Distinct maps give distinct classes.
    pub injective: bool,
    /// Every enumerated class is the image of some map.
    pub surjective: bool,
}

/// Compares `Hom(a, a')` in the bundle category with morphism classes
/// between `dch_object(a)` and `dch_object(a')`. Maps are enumerated by
/// their value at vertex 0 on the grid `j / denominator`; representatives
/// by integer `e` with entries in `[-bound, bound]` and `k(0)` on the
/// same grid.
pub fn hom_probe(
    complex: &Arc<SimplicialComplex>,
    a: &RealCochain,
    a_prime: &RealCochain,
    denominator: u32,
    bound: i64,
) -> Result<ProbeReport> {
    let pullback = a.sub(a_prime)?;
    let tree = spanning_tree(complex)?;
    let grid: Vec<BigRational> = (0..denominator)
        .map(|j| BigRational::new(BigInt::from(j), BigInt::from(denominator)))
        .collect();

    let mut maps = Vec::new();
    for base in &grid {
        let lift = integrate_along(complex, &tree, base, &pullback)?;
        if let Ok(f) = CircleMap::new(complex, lift, pullback.clone()) {
            maps.push(dch_morphism(complex, &f, a)?);
        }
    }
    let mut injective = true;
    for i in 0..maps.len() {
        for j in 0..maps.len() {
            if morphisms_equal(&maps[i], &maps[j])? != (i == j) {
                injective = false;
            }
        }
    }

    let source = dch_object(complex, a)?;
    let target = dch_object(complex, a_prime)?;
    let edges = complex.count(1);
    let width = (2 * bound + 1) as u64;
    let mut representatives = Vec::new();
    for code in 0..width.pow(edges as u32) {
        let mut rest = code;
        let e_values: Vec<i64> = (0..edges)
            .map(|_| {
                let v = (rest % width) as i64 - bound;
                rest /= width;
                v
            })
            .collect();
        let e = IntCochain::from_i64s(complex, 1, &e_values)?;
        // dk = a - a' - e determines k up to its value at vertex 0
        let rhs = pullback.sub(&e.to_real())?;
        for base in &grid {
            let k = integrate_along(complex, &tree, base, &rhs)?;
            if let Ok(m) = CocycleMorphism::new(source.clone(), target.clone(), e.clone(), k) {
                representatives.push(m);
            }
        }
    }
    let mut classes: Vec<&CocycleMorphism> = Vec::new();
    for m in &representatives {
        let mut seen = false;
        for c in &classes {
            if morphisms_equal(m, c)? {
                seen = true;
                break;
            }
        }
        if !seen {
            classes.push(m);
        }
    }
    let mut surjective = true;
    for c in &classes {
        let mut hit = false;
        for f in &maps {
            if morphisms_equal(c, f)? {
                hit = true;
                break;
            }
        }
        surjective &= hit;
    }
    Ok(ProbeReport {
        maps: maps.len(),
        representatives: representatives.len(),
        classes: classes.len(),
        injective,
        surjective,
    })
}

/// Breadth-first spanning tree from vertex 0 as `(edge, forward)` per
/// vertex in visiting order.
fn spanning_tree(complex: &SimplicialComplex) -> Result<Vec<(usize, usize, usize, bool)>> {
    let n = complex.count(0);
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    let mut order = Vec::new();
    while let Some(v) = queue.pop_front() {
        for (i, &[t, h]) in complex.edges().iter().enumerate() {
            let (next, forward) = if t == v {
                (h, true)
            } else if h == v {
                (t, false)
            } else {
                continue;
            };
            if !seen[next] {
                seen[next] = true;
                order.push((v, next, i, forward));
                queue.push_back(next);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Disconnected);
    }
    Ok(order)
}

/// 0-cochain with value `base` at vertex 0 whose increments along the
/// tree edges match `increments`.
fn integrate_along(
    complex: &SimplicialComplex,
    tree: &[(usize, usize, usize, bool)],
    base: &BigRational,
    increments: &RealCochain,
) -> Result<RealCochain> {
    let mut values = vec![BigRational::from_integer(0.into()); complex.count(0)];
    values[0] = base.clone();
    for &(from, to, edge, forward) in tree {
        let step = increments.values()[edge].clone();
        values[to] = if forward {
            values[from].clone() + step
        } else {
            values[from].clone() - step
        };
    }
    RealCochain::new(complex, 0, values)
}
