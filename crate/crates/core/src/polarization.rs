//! Real polarizations given by explicit frames, polarized sections, leaf
//! holonomy and the half-density pairing on the leaf space.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::densities::{integrate_one_density, DensityIntegral, ManifoldDensity};
use crate::expr::Expression;
use crate::geometry::{Chart, SymplecticStructure, VectorField};
use crate::hamilton::{hamiltonian_vector_field, poisson_bracket};
use crate::prequantum::{PrequantumBundle, Section};
use crate::sampling::{DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::{Error, Result};

/// Default threshold for "lies in the span of the frame".
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-8;
const ISOTROPY_TOLERANCE: f64 = 1e-10;
const RANK_TOLERANCE: f64 = 1e-10;

/// The leaf space of a polarization whose leaves are coordinate fibers:
/// a point is determined by its `transverse` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafQuotient {
    pub names: Vec<String>,
    pub transverse: Vec<usize>,
    pub leaf_axes: Vec<usize>,
}

impl LeafQuotient {
    pub fn new(chart: &Chart, transverse: Vec<usize>) -> Result<LeafQuotient> {
        let n = chart.dimension();
        if transverse.len() * 2 != n || transverse.iter().any(|i| *i >= n) {
            return Err(Error::Invalid(format!("{transverse:?} is not half of the {n} chart coordinates")));
        }
        let names = transverse.iter().map(|i| chart.variables()[*i].to_string()).collect();
        let leaf_axes = (0..n).filter(|i| !transverse.contains(i)).collect();
        Ok(LeafQuotient {
            names,
            transverse,
            leaf_axes,
        })
    }

    /// The projection to the leaf space as coordinate expressions.
    pub fn projection(&self, chart: &Chart) -> Vec<Expression> {
        self.transverse.iter().map(|i| chart.coordinate(*i)).collect()
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.transverse.iter().map(|i| x[*i]).collect()
    }
}

/// Sampled invariants recorded when a polarization is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationCertificate {
    pub min_singular_value: f64,
    pub isotropy: f64,
    pub involutivity: f64,
}

/// A real polarization spanned pointwise by an explicit frame.
#[derive(Debug, Clone)]
pub struct Polarization {
    symplectic: Arc<SymplecticStructure>,
    frame: Vec<VectorField>,
    leaves: Option<LeafQuotient>,
    tolerance: f64,
    certificate: PolarizationCertificate,
}

/// Least-squares distance from `v` to the column span of `frame`.
pub fn span_residual(frame: &DMatrix<f64>, v: &[f64]) -> f64 {
    let v = DVector::from_column_slice(v);
    let svd = frame.clone().svd(true, true);
    match svd.solve(&v, 1e-14) {
        Ok(c) => (&v - frame * c).norm(),
        Err(_) => v.norm(),
    }
}

impl Polarization {
    /// Check rank, isotropy and involutivity of the frame at sampled points.
    pub fn new(symplectic: Arc<SymplecticStructure>, frame: Vec<VectorField>, leaves: Option<LeafQuotient>) -> Result<Polarization> {
        let m = symplectic.half_dimension();
        if frame.len() != m {
            return Err(Error::NotPolarization(format!("expected {m} frame fields, got {}", frame.len())));
        }
        for x in &frame {
            crate::geometry::check_chart(symplectic.chart(), x.chart())?;
        }
        let mut pol = Polarization {
            symplectic,
            frame,
            leaves,
            tolerance: MEMBERSHIP_TOLERANCE,
            certificate: PolarizationCertificate {
                min_singular_value: 0.0,
                isotropy: 0.0,
                involutivity: 0.0,
            },
        };
        let points = pol.chart().sample(DEFAULT_SAMPLES, DEFAULT_SEED);
        pol.certificate = pol.certify(&points)?;
        let c = pol.certificate;
        if c.min_singular_value <= RANK_TOLERANCE {
            return Err(Error::NotPolarization(format!("frame rank drops (singular value {:e})", c.min_singular_value)));
        }
        if c.isotropy > ISOTROPY_TOLERANCE {
            return Err(Error::NotPolarization(format!("frame is not isotropic (residual {:e})", c.isotropy)));
        }
        if c.involutivity > MEMBERSHIP_TOLERANCE {
            return Err(Error::NotPolarization(format!("frame is not involutive (residual {:e})", c.involutivity)));
        }
        Ok(pol)
    }

    /// The vertical polarization `{d/dp_i}` of `T*R^n`.
    pub fn vertical(n: usize) -> Polarization {
        Polarization::vertical_on(Arc::new(crate::geometry::canonical_symplectic(n))).expect("vertical frame is Lagrangian")
    }

    /// `{d/dp_i}` on any symplectic structure over a phase-space chart.
    pub fn vertical_on(symplectic: Arc<SymplecticStructure>) -> Result<Polarization> {
        let chart = symplectic.chart().clone();
        let m = symplectic.half_dimension();
        let frame = (m..2 * m).map(|i| VectorField::coordinate(&chart, i)).collect();
        let leaves = LeafQuotient::new(&chart, (0..m).collect())?;
        Polarization::new(symplectic, frame, Some(leaves))
    }

    /// The circles `r = const` on the punctured plane, frame `{d/dtheta}`.
    pub fn circles(symplectic: Arc<SymplecticStructure>) -> Result<Polarization> {
        let chart = symplectic.chart().clone();
        let (Some(r), Some(t)) = (chart.index_of("r"), chart.index_of("theta")) else {
            return Err(Error::Invalid("circle polarization needs a polar chart (r, theta)".into()));
        };
        let leaves = LeafQuotient::new(&chart, vec![r])?;
        Polarization::new(symplectic, vec![VectorField::coordinate(&chart, t)], Some(leaves))
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Polarization {
        self.tolerance = tolerance;
        self
    }

    pub fn symplectic(&self) -> &Arc<SymplecticStructure> {
        &self.symplectic
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.symplectic.chart()
    }

    pub fn frame(&self) -> &[VectorField] {
        &self.frame
    }

    pub fn leaves(&self) -> Option<&LeafQuotient> {
        self.leaves.as_ref()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn certificate(&self) -> PolarizationCertificate {
        self.certificate
    }

    /// The frame as columns at `x`.
    pub fn frame_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.symplectic.dimension();
        let mut m = DMatrix::zeros(n, self.frame.len());
        for (j, f) in self.frame.iter().enumerate() {
            for (i, v) in f.evaluate(x)?.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn certify(&self, points: &[Vec<f64>]) -> Result<PolarizationCertificate> {
        let brackets = self.frame_brackets()?;
        let mut c = PolarizationCertificate {
            min_singular_value: f64::INFINITY,
            isotropy: 0.0,
            involutivity: 0.0,
        };
        for x in points {
            let f = self.frame_at(x)?;
            let sv = f.clone().svd(false, false).singular_values;
            c.min_singular_value = c.min_singular_value.min(sv.min());
            let w = self.symplectic.form().matrix_at(x)?;
            let g = f.transpose() * w * &f;
            c.isotropy = c.isotropy.max(g.amax());
            for b in &brackets {
                c.involutivity = c.involutivity.max(span_residual(&f, &b.evaluate(x)?));
            }
        }
        Ok(c)
    }

    fn frame_brackets(&self) -> Result<Vec<VectorField>> {
        let mut out = Vec::new();
        for i in 0..self.frame.len() {
            for j in i + 1..self.frame.len() {
                out.push(self.frame[i].lie_bracket(&self.frame[j])?);
            }
        }
        Ok(out)
    }

    /// Largest distance of `v(x)` from the polarization over the points.
    pub fn membership_residual(&self, v: &VectorField, points: &[Vec<f64>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in points {
            worst = worst.max(span_residual(&self.frame_at(x)?, &v.evaluate(x)?));
        }
        Ok(worst)
    }

    /// Whether `v` lies in the polarization at every point, to the
    /// configured tolerance.
    pub fn contains(&self, v: &VectorField, points: &[Vec<f64>]) -> Result<bool> {
        Ok(self.membership_residual(v, points)? <= self.tolerance)
    }
}

fn check_bundle(bundle: &PrequantumBundle, pol: &Polarization) -> Result<()> {
    crate::geometry::check_chart(bundle.chart(), pol.chart())
}

/// `max |nabla_X s|` over frame fields `X` and the points.
pub fn polarized_residual(bundle: &PrequantumBundle, s: &Section, pol: &Polarization, points: &[Vec<f64>]) -> Result<f64> {
    check_bundle(bundle, pol)?;
    let mut worst: f64 = 0.0;
    for x in pol.frame() {
        worst = worst.max(bundle.covariant_derivative(s, x)?.max_abs(points)?);
    }
    Ok(worst)
}

/// Largest least-squares residual of `[Xi_f, X_i]` against the frame.
pub fn is_polarization_preserving(f: &Expression, pol: &Polarization, points: &[Vec<f64>]) -> Result<f64> {
    let xi = hamiltonian_vector_field(pol.symplectic(), f);
    let mut worst: f64 = 0.0;
    for x in pol.frame() {
        worst = worst.max(pol.membership_residual(&xi.lie_bracket(x)?, points)?);
    }
    Ok(worst)
}

/// The preservation residual of `{f, g}`.
pub fn bracket_closure_check(f: &Expression, g: &Expression, pol: &Polarization, points: &[Vec<f64>]) -> Result<f64> {
    is_polarization_preserving(&poisson_bracket(f, g, pol.symplectic()), pol, points)
}

/// `polarized_residual(Q_f s)`.
pub fn qf_preserves_polarized_check(
    bundle: &PrequantumBundle,
    pol: &Polarization,
    f: &Expression,
    s: &Section,
    points: &[Vec<f64>],
) -> Result<f64> {
    polarized_residual(bundle, &bundle.prequantum_operator(f, s)?, pol, points)
}

/// The expansion
/// `nabla_X (Q_f s) = nabla_Xi nabla_X s + nabla_[X,Xi] s
///   + kappa i (omega(X, Xi) - sigma X(f)) s - sigma kappa i f nabla_X s`
/// evaluated termwise, maximised over frame fields and points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourTermReport {
    /// `max |term|` for each of the four terms in the order above.
    pub terms: [f64; 4],
    /// `max |nabla_X (Q_f s) - sum of terms|`.
    pub expansion: f64,
    /// `max |nabla_X (Q_f s)|`.
    pub total: f64,
}

pub fn four_term_check(
    bundle: &PrequantumBundle,
    pol: &Polarization,
    f: &Expression,
    s: &Section,
    points: &[Vec<f64>],
) -> Result<FourTermReport> {
    check_bundle(bundle, pol)?;
    let omega = bundle.symplectic();
    let kappa = bundle.kappa();
    let sigma = omega.convention().sign();
    let xi = hamiltonian_vector_field(omega, f);
    let qs = bundle.prequantum_operator(f, s)?;
    let mut report = FourTermReport {
        terms: [0.0; 4],
        expansion: 0.0,
        total: 0.0,
    };
    for x in pol.frame() {
        let nx = bundle.covariant_derivative(s, x)?;
        let t1 = bundle.covariant_derivative(&nx, &xi)?;
        let t2 = bundle.covariant_derivative(s, &x.lie_bracket(&xi)?)?;
        let wx = omega.form().apply(x, &xi)? - x.apply(f).scale(sigma);
        let t3 = s.times_i(&wx.scale(kappa));
        let t4 = nx.times_i(&f.scale(-sigma * kappa));
        let lhs = bundle.covariant_derivative(&qs, x)?;
        for (slot, t) in report.terms.iter_mut().zip([&t1, &t2, &t3, &t4]) {
            *slot = slot.max(t.max_abs(points)?);
        }
        let sum = t1.add(&t2)?.add(&t3)?.add(&t4)?;
        report.expansion = report.expansion.max(lhs.sub(&sum)?.max_abs(points)?);
        report.total = report.total.max(lhs.max_abs(points)?);
    }
    Ok(report)
}

/// Transport factor along `gamma` over `[t0, t1]`: the solution at `t1` of
/// `f' = -i kappa theta(gamma') f`, `f(t0) = 1`, by classical RK4.
pub fn transport_factor(
    bundle: &PrequantumBundle,
    gamma: impl Fn(f64) -> Vec<f64>,
    velocity: impl Fn(f64) -> Vec<f64>,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Complex64> {
    let kappa = bundle.kappa();
    let theta = bundle.potential();
    let rate = |t: f64| -> Result<Complex64> {
        let a = theta.evaluate(&gamma(t), &velocity(t))?;
        Ok(Complex64::new(0.0, -kappa * a))
    };
    let h = (t1 - t0) / steps as f64;
    let mut f = Complex64::new(1.0, 0.0);
    for k in 0..steps {
        let t = t0 + h * k as f64;
        let (a, b, c) = (rate(t)?, rate(t + 0.5 * h)?, rate(t + h)?);
        let k1 = a * f;
        let k2 = b * (f + k1 * (0.5 * h));
        let k3 = b * (f + k2 * (0.5 * h));
        let k4 = c * (f + k3 * h);
        f += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(f)
}

/// Steps used for the leaf transport.
pub const HOLONOMY_STEPS: usize = 4096;

/// Holonomy around the circle of radius `r` in a polar chart.
pub fn leaf_holonomy(bundle: &PrequantumBundle, r: f64) -> Result<Complex64> {
    let chart = bundle.chart();
    let (Some(ir), Some(it)) = (chart.index_of("r"), chart.index_of("theta")) else {
        return Err(Error::Invalid("leaf holonomy needs a polar chart (r, theta)".into()));
    };
    let n = chart.dimension();
    let gamma = move |t: f64| {
        let mut x = vec![0.0; n];
        x[ir] = r;
        x[it] = t;
        x
    };
    let velocity = move |_: f64| {
        let mut v = vec![0.0; n];
        v[it] = 1.0;
        v
    };
    let start = gamma(0.0);
    if !chart.contains(&start) || !chart.contains(&gamma(2.0 * PI)) {
        return Err(Error::ExitedDomain { index: 0, point: start });
    }
    transport_factor(bundle, gamma, velocity, 0.0, 2.0 * PI, HOLONOMY_STEPS)
}

/// `exp(-2 pi i kappa r^2)`, the holonomy for `alpha = r^2 dtheta`.
pub fn holonomy_closed_form(kappa: f64, r: f64) -> Complex64 {
    Complex64::new(0.0, -2.0 * PI * kappa * r * r).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolonomyReport {
    pub r: f64,
    pub numeric: Complex64,
    pub closed_form: Complex64,
    /// `|1 - holonomy|`: how far the transported section misses its start.
    pub mismatch: f64,
    pub polarized_exists: bool,
}

/// Holonomy of the circle leaf through radius `r`; a nonzero polarized
/// section on the leaf exists iff the holonomy is 1 within `1e-8`.
pub fn holonomy_report(bundle: &PrequantumBundle, r: f64) -> Result<HolonomyReport> {
    let numeric = leaf_holonomy(bundle, r)?;
    let mismatch = (numeric - 1.0).norm();
    Ok(HolonomyReport {
        r,
        numeric,
        closed_form: holonomy_closed_form(bundle.kappa(), r),
        mismatch,
        polarized_exists: mismatch < 1e-8,
    })
}

/// The candidate polarized section `exp(-i kappa r0^2 theta)` on the leaf
/// `r = r0`: its covariant derivative along the leaf at sampled leaf points
/// and the jump `|s(2 pi) - s(0)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafSectionReport {
    pub residual: f64,
    pub jump: f64,
}

pub fn leaf_section_check(bundle: &PrequantumBundle, pol: &Polarization, r0: f64, samples: usize) -> Result<LeafSectionReport> {
    let chart = bundle.chart();
    let (Some(ir), Some(it)) = (chart.index_of("r"), chart.index_of("theta")) else {
        return Err(Error::Invalid("leaf sections need a polar chart (r, theta)".into()));
    };
    let phase = chart.coordinate(it).scale(-bundle.kappa() * r0 * r0);
    let s = Section::symbolic(chart, crate::expr::ComplexExpr::new(phase.cos(), phase.sin()))?;
    let n = chart.dimension();
    let points: Vec<Vec<f64>> = (0..=samples)
        .map(|k| {
            let mut x = vec![0.0; n];
            x[ir] = r0;
            x[it] = 2.0 * PI * k as f64 / samples as f64;
            x
        })
        .collect();
    let residual = polarized_residual(bundle, &s, pol, &points)?;
    let jump = (s.evaluate(&points[samples])? - s.evaluate(&points[0])?).norm();
    Ok(LeafSectionReport { residual, jump })
}

/// Representative leaf coordinates used for the leaf-constancy check.
const LEAF_PROBES: usize = 5;

/// `int_{M/F} <s1, s2> conj(mu1) mu2`. The half-densities live on an atlas
/// whose reference coordinates are the transverse coordinates of the
/// polarization.
pub fn half_density_pairing(
    bundle: &PrequantumBundle,
    pol: &Polarization,
    s1: &Section,
    mu1: &ManifoldDensity,
    s2: &Section,
    mu2: &ManifoldDensity,
) -> Result<DensityIntegral> {
    check_bundle(bundle, pol)?;
    let leaves = pol
        .leaves()
        .ok_or_else(|| Error::Invalid("polarization has no leaf quotient".into()))?
        .clone();
    let atlas = mu1.atlas().clone();
    if atlas.reference_names != leaves.names {
        return Err(Error::Invalid(format!(
            "leaf-space atlas coordinates {:?} differ from the quotient {:?}",
            atlas.reference_names, leaves.names
        )));
    }
    let half = Complex64::new(0.5, 0.0);
    if (mu1.order() - half).norm() > 1e-12 || (mu2.order() - half).norm() > 1e-12 {
        return Err(Error::Invalid("pairing needs half-densities".into()));
    }
    let chart = pol.chart().clone();
    let points = chart.sample(DEFAULT_SAMPLES, DEFAULT_SEED);
    for s in [s1, s2] {
        let r = polarized_residual(bundle, s, pol, &points)?;
        if r > 1e-7 {
            return Err(Error::Invalid(format!("section is not polarized (residual {r:e})")));
        }
    }
    let ev = s1.hermitian(s2)?.evaluator();
    let probes: Vec<Vec<f64>> = (0..LEAF_PROBES)
        .map(|k| {
            let t = (k as f64 + 0.5) / LEAF_PROBES as f64;
            leaves
                .leaf_axes
                .iter()
                .map(|i| chart.lower()[*i] + t * (chart.upper()[*i] - chart.lower()[*i]))
                .collect()
        })
        .collect();
    let lift = {
        let leaves = leaves.clone();
        let n = chart.dimension();
        move |u: &[f64], probe: &[f64]| {
            let mut x = vec![0.0; n];
            for (i, v) in leaves.transverse.iter().zip(u) {
                x[*i] = *v;
            }
            for (i, v) in leaves.leaf_axes.iter().zip(probe) {
                x[*i] = *v;
            }
            x
        }
    };
    // leaf constancy at sampled leaf-space points
    let mut spread: f64 = 0.0;
    for (a, c) in atlas.charts().iter().enumerate() {
        for y in crate::sampling::sample_box(&c.lower, &c.upper, 40, DEFAULT_SEED + a as u64, |_| false) {
            let u = c.to_reference(&y)?;
            let base = ev.evaluate(&lift(&u, &probes[0]))?;
            for p in &probes[1..] {
                spread = spread.max((ev.evaluate(&lift(&u, p))? - base).norm());
            }
        }
    }
    if spread > 1e-8 {
        return Err(Error::NotLeafConstant(spread));
    }
    let probe = probes[0].clone();
    let atlas_for_lift = atlas.clone();
    let integrand = mu1.conjugate().product(mu2)?.multiply_function(move |a, y| {
        let u = atlas_for_lift.charts()[a].to_reference(y)?;
        ev.evaluate(&lift(&u, &probe))
    });
    integrate_one_density(&integrand)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertical_frame_is_dp() {
        let pol = Polarization::vertical(1);
        assert_eq!(pol.frame()[0].evaluate(&[0.3, -0.2]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(pol.certificate().isotropy, 0.0);
    }

    #[test]
    fn horizontal_plus_vertical_is_not_isotropic() {
        let omega = Arc::new(crate::geometry::canonical_symplectic(2));
        let chart = omega.chart().clone();
        let frame = vec![VectorField::coordinate(&chart, 0), VectorField::coordinate(&chart, 2)];
        assert!(matches!(Polarization::new(omega, frame, None), Err(Error::NotPolarization(_))));
    }

    #[test]
    fn quarter_holonomy_is_minus_i() {
        let bundle = PrequantumBundle::punctured_plane(3.0);
        let h = leaf_holonomy(&bundle, 0.5).unwrap();
        assert!((h - Complex64::new(0.0, -1.0)).norm() < 1e-8, "{h}");
    }

    #[test]
    fn p_squared_is_not_preserving() {
        let pol = Polarization::vertical(1);
        let f = pol.chart().parse("p^2").unwrap();
        let points = pol.chart().sample(20, 1);
        assert!(is_polarization_preserving(&f, &pol, &points).unwrap() > 0.5);
    }
}
