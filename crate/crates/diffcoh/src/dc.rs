//! Differential cochains, degree-two cocycles and their morphisms.

use std::sync::Arc;

use crate::cochain::{coboundary_or_zero, IntCochain, RealCochain};
use crate::{Error, Result, SimplicialComplex};

/// `(c, h, w)` with `c` integral of degree `k`, `h` real of degree `k - 1`
/// (absent for `k = 0`) and `w` the simplex integrals of a `k`-form,
/// identically zero when `k < 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialCochain {
    degree: usize,
    c: IntCochain,
    h: Option<RealCochain>,
    omega: RealCochain,
}

impl DifferentialCochain {
    pub fn new(
        complex: &SimplicialComplex,
        c: IntCochain,
        h: Option<RealCochain>,
        omega: RealCochain,
    ) -> Result<Self> {
        let degree = c.degree();
        c.checked_for(complex)?;
        omega.checked_for(complex)?;
        if omega.degree() != degree {
            return Err(Error::DegreeMismatch {
                expected: degree,
                got: omega.degree(),
            });
        }
        match (&h, degree) {
            (None, 0) => {}
            (Some(h), k) if k > 0 => {
                h.checked_for(complex)?;
                if h.degree() + 1 != k {
                    return Err(Error::DegreeMismatch {
                        expected: k - 1,
                        got: h.degree(),
                    });
                }
            }
            (None, k) => {
                return Err(Error::DegreeMismatch {
                    expected: k - 1,
                    got: usize::MAX,
                })
            }
            (Some(h), _) => {
                return Err(Error::DegreeMismatch {
                    expected: usize::MAX,
                    got: h.degree(),
                })
            }
        }
        if degree < 2 && !omega.is_zero() {
            return Err(Error::FormSlotNonzero(degree));
        }
        Ok(Self { degree, c, h, omega })
    }

    pub fn zero(complex: &SimplicialComplex, degree: usize) -> Self {
        Self {
            degree,
            c: IntCochain::zero(complex, degree),
            h: (degree > 0).then(|| RealCochain::zero(complex, degree - 1)),
            omega: RealCochain::zero(complex, degree),
        }
    }

    /// Degree-zero element `(m, -, 0)`.
    pub fn from_integer(complex: &SimplicialComplex, m: IntCochain) -> Result<Self> {
        let omega = RealCochain::zero(complex, m.degree());
        let h = (m.degree() > 0).then(|| RealCochain::zero(complex, m.degree() - 1));
        Self::new(complex, m, h, omega)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn c(&self) -> &IntCochain {
        &self.c
    }

    pub fn h(&self) -> Option<&RealCochain> {
        self.h.as_ref()
    }

    pub fn omega(&self) -> &RealCochain {
        &self.omega
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero() && self.h.as_ref().map_or(true, |h| h.is_zero()) && self.omega.is_zero()
    }
}

/// `d~(c, h, w) = (dc, w - c - dh, dw)`, with the form slot zero when the
/// target degree is below two.
pub fn d_tilde(complex: &SimplicialComplex, x: &DifferentialCochain) -> Result<DifferentialCochain> {
    let dc = coboundary_or_zero(complex, &x.c)?;
    let mut h = x.omega.sub(&x.c.to_real())?;
    if let Some(prev) = &x.h {
        h = h.sub(&coboundary_or_zero(complex, prev)?)?;
    }
    let omega = if x.degree + 1 < 2 {
        RealCochain::zero(complex, x.degree + 1)
    } else {
        coboundary_or_zero(complex, &x.omega)?
    };
    Ok(DifferentialCochain {
        degree: x.degree + 1,
        c: dc,
        h: Some(h),
        omega,
    })
}

/// Degree-two differential cochain with `dc = 0`, `dw = 0` and
/// `w - c - dh = 0` exactly.
#[derive(Debug, Clone)]
pub struct DifferentialCocycle {
    complex: Arc<SimplicialComplex>,
    cochain: DifferentialCochain,
}

impl PartialEq for DifferentialCocycle {
    fn eq(&self, other: &Self) -> bool {
        same_complex(&self.complex, &other.complex) && self.cochain == other.cochain
    }
}

fn same_complex(a: &Arc<SimplicialComplex>, b: &Arc<SimplicialComplex>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl DifferentialCocycle {
    pub fn new(complex: &Arc<SimplicialComplex>, c: IntCochain, h: RealCochain, omega: RealCochain) -> Result<Self> {
        if c.degree() != 2 {
            return Err(Error::DegreeMismatch {
                expected: 2,
                got: c.degree(),
            });
        }
        let cochain = DifferentialCochain::new(complex, c, Some(h), omega)?;
        let d = d_tilde(complex, &cochain)?;
        if !d.c.is_zero() {
            return Err(Error::NotCocycle("integer part is not closed".into()));
        }
        if !d.omega.is_zero() {
            return Err(Error::NotCocycle("form part is not closed".into()));
        }
        let residual = d.h.expect("d~ always fills h");
        if !residual.is_zero() {
            return Err(Error::NotCocycle(format!(
                "w - c - dh does not vanish (max {:.3e})",
                residual.max_abs()
            )));
        }
        Ok(Self {
            complex: complex.clone(),
            cochain,
        })
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn cochain(&self) -> &DifferentialCochain {
        &self.cochain
    }

    pub fn c(&self) -> &IntCochain {
        &self.cochain.c
    }

    pub fn h(&self) -> &RealCochain {
        self.cochain.h.as_ref().expect("degree two has h")
    }

    pub fn omega(&self) -> &RealCochain {
        &self.cochain.omega
    }
}

/// Class representative `[e, k, 0]` of a morphism between two cocycles:
/// `c' - c = de`, `h' - h = -dk - e`, `w' = w`.
#[derive(Debug, Clone)]
pub struct CocycleMorphism {
    source: DifferentialCocycle,
    target: DifferentialCocycle,
    e: IntCochain,
    k: RealCochain,
}

impl CocycleMorphism {
    pub fn new(source: DifferentialCocycle, target: DifferentialCocycle, e: IntCochain, k: RealCochain) -> Result<Self> {
        if !same_complex(&source.complex, &target.complex) {
            return Err(Error::ComplexMismatch);
        }
        let complex = source.complex.clone();
        if e.degree() != 1 || k.degree() != 0 {
            return Err(Error::NotMorphism(format!(
                "representative degrees are ({}, {}), expected (1, 0)",
                e.degree(),
                k.degree()
            )));
        }
        e.checked_for(&complex)?;
        k.checked_for(&complex)?;
        let dc = target.c().sub(source.c())?;
        if dc != coboundary_or_zero(&complex, &e)? {
            return Err(Error::NotMorphism("c' - c differs from de".into()));
        }
        let dh = target.h().sub(source.h())?;
        let expected = coboundary_or_zero(&complex, &k)?.neg().sub(&e.to_real())?;
        if dh != expected {
            return Err(Error::NotMorphism("h' - h differs from -dk - e".into()));
        }
        if source.omega() != target.omega() {
            return Err(Error::NotMorphism("form parts differ".into()));
        }
        Ok(Self { source, target, e, k })
    }

    pub fn identity(z: &DifferentialCocycle) -> Self {
        Self {
            source: z.clone(),
            target: z.clone(),
            e: IntCochain::zero(&z.complex, 1),
            k: RealCochain::zero(&z.complex, 0),
        }
    }

    /// `(-e, -k)` from the target back to the source.
    pub fn inverse(&self) -> Self {
        Self {
            source: self.target.clone(),
            target: self.source.clone(),
            e: self.e.neg(),
            k: self.k.neg(),
        }
    }

    /// Representative shifted by `d~(m)` for an integer 0-cochain `m`,
    /// which is `(dm, -m, 0)`. The class is unchanged.
    pub fn shifted(&self, m: &IntCochain) -> Result<Self> {
        let complex = &self.source.complex;
        let dm = coboundary_or_zero(complex, m)?;
        Ok(Self {
            source: self.source.clone(),
            target: self.target.clone(),
            e: self.e.add(&dm)?,
            k: self.k.sub(&m.to_real())?,
        })
    }

    pub fn source(&self) -> &DifferentialCocycle {
        &self.source
    }

    pub fn target(&self) -> &DifferentialCocycle {
        &self.target
    }

    pub fn e(&self) -> &IntCochain {
        &self.e
    }

    pub fn k(&self) -> &RealCochain {
        &self.k
    }
}

/// `m2 . m1` with representative `(e1 + e2, k1 + k2)`.
pub fn compose_morphisms(m2: &CocycleMorphism, m1: &CocycleMorphism) -> Result<CocycleMorphism> {
    if m1.target != m2.source {
        return Err(Error::NotComposable);
    }
    Ok(CocycleMorphism {
        source: m1.source.clone(),
        target: m2.target.clone(),
        e: m1.e.add(&m2.e)?,
        k: m1.k.add(&m2.k)?,
    })
}

/// Equality of classes: `m = -(ka - kb)` must be integral with
/// `ea - eb = dm`.
pub fn morphisms_equal(a: &CocycleMorphism, b: &CocycleMorphism) -> Result<bool> {
    if a.source != b.source || a.target != b.target {
        return Err(Error::SourceTargetMismatch);
    }
    let m = match a.k.sub(&b.k)?.neg().to_integer() {
        Some(m) => m,
        None => return Ok(false),
    };
    let de = a.e.sub(&b.e)?;
    Ok(de == coboundary_or_zero(&a.source.complex, &m)?)
}
