//! Acceptance suite: one line per criterion with the measured value, the
//! pinned tolerance and the wall time against its budget.
//!
//! Run with `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command as Process;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_rational::BigRational;
use prequant_core::corpus::Corpus;
use prequant_core::densities::{integrate_one_density, Atlas, ManifoldDensity, VectorDensity};
use prequant_core::expr::{ComplexExpr, Expression};
use prequant_core::geometry::*;
use prequant_core::hamilton::*;
use prequant_core::polarization::*;
use prequant_core::prequantum::{PrequantumBundle, Section};
use prequant_core::quadrature::QuadratureGrid;
use prequant_core::sampling::rng;
use prequant_core::Complex64;
use prequant_diffcoh::{
    coboundary, compose_morphisms, d_tilde, dch_morphism, integral_lift, morphisms_equal, Builtin, CircleMap, CocycleMorphism,
    DifferentialCochain, DifferentialCocycle, IntCochain, LiftOutcome, RealCochain, SimplicialComplex,
};
use rand::Rng;

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

// 1
fn hamiltonian_field() -> Verdict {
    let omega = Arc::new(canonical_symplectic(1));
    let chart = omega.chart().clone();
    let sys = HamiltonianSystem::new(omega, chart.parse("p^2/2 + q^2/2").unwrap()).map_err(|e| e.to_string())?;
    let xi = sys.vector_field();
    let mut worst: f64 = 0.0;
    for x in chart.sample(100, 1) {
        let v = xi.evaluate(&x).unwrap();
        worst = worst.max((v[0] - x[1]).abs()).max((v[1] + x[0]).abs());
    }
    ensure(worst <= 1e-12, || format!("max |Xi_H - (p, -q)| = {worst:e} > 1e-12"))?;
    Ok(format!("max |Xi_H - (p, -q)| = {worst:e} <= 1e-12 at 100 points"))
}

// 2
fn poisson_suite() -> Verdict {
    let mut total = PoissonResiduals::default();
    for n in [1, 2] {
        let omega = canonical_symplectic(n);
        let vars = omega.chart().variables().clone();
        let points = omega.chart().sample(100, 2);
        let mut corpus = Corpus::new(20 + n as u64);
        for _ in 0..50 {
            let (f, g, h) = (corpus.polynomial(&vars, 3, 3), corpus.polynomial(&vars, 3, 3), corpus.polynomial(&vars, 3, 3));
            total = total.merge(&poisson_residuals(&omega, &f, &g, &h, &points).map_err(|e| e.to_string())?);
        }
    }
    let laws = total.antisymmetry.max(total.leibniz).max(total.jacobi);
    ensure(laws < 1e-8, || format!("law residual {laws:e} >= 1e-8 ({total:?})"))?;
    ensure(total.homomorphism < 1e-9, || format!("homomorphism residual {:e} >= 1e-9", total.homomorphism))?;
    Ok(format!(
        "antisym {:.1e}, Leibniz {:.1e}, Jacobi {:.1e} < 1e-8; Xi homomorphism {:.1e} < 1e-9 (2 x 50 triples x 100 pts)",
        total.antisymmetry, total.leibniz, total.jacobi, total.homomorphism
    ))
}

// 3
fn liouville() -> Verdict {
    let base = Arc::new(Chart::new("base", &["q1", "q2"], vec![-2.0; 2], vec![2.0; 2]).unwrap());
    let tau = TwoForm::from_upper(&base, vec![(0, 1, base.parse("1 + q1^2*q2").unwrap())]).unwrap();
    let forms = [canonical_symplectic(1), canonical_symplectic(2), twisted_cotangent(2, &tau).unwrap()];
    let mut worst: f64 = 0.0;
    for (k, omega) in forms.iter().enumerate() {
        let points = omega.chart().sample(200, 3);
        let mut corpus = Corpus::new(30 + k as u64);
        for _ in 0..20 {
            let f = corpus.smooth(omega.chart().variables());
            worst = worst.max(liouville_residual(omega, &f, &points).map_err(|e| e.to_string())?);
        }
    }
    ensure(worst < 1e-9, || format!("max |L_Xi omega| = {worst:e} >= 1e-9"))?;
    Ok(format!("max |L_Xi_f omega| = {worst:.1e} < 1e-9 (3 forms x 20 f x 200 pts)"))
}

// 4
fn oscillator_flow() -> Verdict {
    let omega = Arc::new(canonical_symplectic(1));
    let chart = omega.chart().clone();
    let sys = HamiltonianSystem::new(omega, chart.parse("p^2/2 + q^2/2").unwrap()).unwrap();
    let dt = 2.0 * PI / 1000.0;
    let one = integrate_flow_with(&sys, &[1.0, 0.0], 2.0 * PI, dt, IntegratorChoice::Leapfrog).map_err(|e| e.to_string())?;
    let end = one.final_state();
    // exact flow: (cos t, -sin t) returns to (1, 0)
    let ret = (end[0] - 1.0).abs().max(end[1].abs());
    ensure(ret <= 1e-4, || format!("return error {ret:e} > 1e-4"))?;
    ensure(one.energy_drift < 1e-6, || format!("one-period drift {:e} >= 1e-6", one.energy_drift))?;
    let long = integrate_flow_with(&sys, &[1.0, 0.0], 1e6 * dt, dt, IntegratorChoice::Leapfrog).map_err(|e| e.to_string())?;
    ensure(long.len() == 1_000_001, || format!("{} states", long.len()))?;
    ensure(long.max_energy_error < 1e-5, || format!("max error over 1e6 steps {:e} >= 1e-5", long.max_energy_error))?;
    Ok(format!(
        "return {ret:.1e} <= 1e-4; drift after 1 period {:.1e} < 1e-6 (max along it {:.1e}); max over 1e6 steps {:.1e} < 1e-5",
        one.energy_drift, one.max_energy_error, long.max_energy_error
    ))
}

/// `kappa i omega(X, Y) s` evaluated numerically from the form's matrix.
fn curvature_oracle(b: &PrequantumBundle, x: &VectorField, y: &VectorField, s: &Section, pt: &[f64]) -> Complex64 {
    let m = b.symplectic().form().matrix_at(pt).unwrap();
    let (u, v) = (x.evaluate(pt).unwrap(), y.evaluate(pt).unwrap());
    let mut w = 0.0;
    for i in 0..u.len() {
        for j in 0..v.len() {
            w += m[(i, j)] * u[i] * v[j];
        }
    }
    Complex64::new(0.0, b.kappa() * w) * s.evaluate(pt).unwrap()
}

// 5
fn curvature_identity() -> Verdict {
    let std1 = Arc::new(canonical_symplectic(1));
    let flipped = Arc::new(canonical_symplectic(2).with_convention(SignConvention::Flipped));
    let bundles = [
        PrequantumBundle::new(std1.clone(), tautological_one_form(1), 2.0 * PI).unwrap(),
        PrequantumBundle::new(std1, tautological_one_form(1), 1.0).unwrap(),
        PrequantumBundle::new(flipped.clone(), tautological_one_form_on(flipped.chart()), 2.0 * PI).unwrap(),
        PrequantumBundle::punctured_plane(2.0),
    ];
    let mut worst: f64 = 0.0;
    for (k, b) in bundles.iter().enumerate() {
        let chart = b.chart().clone();
        let points = chart.sample(50, 5);
        let mut corpus = Corpus::new(50 + k as u64);
        for _ in 0..10 {
            let (x, y, s) = (corpus.vector_field(&chart, 2), corpus.vector_field(&chart, 2), corpus.section(&chart));
            let r = b.curvature(&x, &y, &s).map_err(|e| e.to_string())?;
            for pt in &points {
                let want = curvature_oracle(b, &x, &y, &s, pt);
                let got = r.evaluate(pt).unwrap();
                worst = worst.max((got - want).norm() / want.norm().max(1.0));
            }
        }
    }
    ensure(worst < 1e-8, || format!("curvature residual {worst:e} >= 1e-8"))?;
    Ok(format!("max |R(X,Y)s - kappa i omega(X,Y)s| = {worst:.1e} < 1e-8 (kappa = 2 pi and 1, both sign conventions, punctured plane)"))
}

// 6
fn prequantum_homomorphism() -> Verdict {
    let b = PrequantumBundle::standard(1);
    let chart = b.chart().clone();
    let vars = chart.variables().clone();
    let points = chart.sample(100, 6);
    let mut corpus = Corpus::new(60);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (f, g, s) = (corpus.polynomial(&vars, 3, 3), corpus.polynomial(&vars, 3, 3), corpus.section(&chart));
        let r = b.commutator_check(&f, &g, &s, &points).map_err(|e| e.to_string())?;
        worst = worst.max(r.operator);
    }
    ensure(worst < 1e-7, || format!("commutator residual {worst:e} >= 1e-7"))?;
    let (qe, pe) = (chart.coordinate(0), chart.coordinate(1));
    let mut exact: f64 = 0.0;
    for _ in 0..5 {
        let s = corpus.section(&chart);
        let qq = |f: &Expression, t: &Section| b.prequantum_operator(f, t).unwrap();
        let comm = qq(&qe, &qq(&pe, &s)).sub(&qq(&pe, &qq(&qe, &s))).unwrap();
        for pt in &points {
            let want = Complex64::new(0.0, 2.0 * PI) * s.evaluate(pt).unwrap();
            exact = exact.max((comm.evaluate(pt).unwrap() - want).norm() / want.norm().max(1.0));
        }
    }
    ensure(exact < 1e-12, || format!("[Q_q, Q_p]s - 2 pi i s = {exact:e}"))?;
    Ok(format!("max |[Q_f,Q_g]s - Q_{{f,g}}s| = {worst:.1e} < 1e-7 (50 pairs); |[Q_q,Q_p]s - 2 pi i s| = {exact:.1e}"))
}

// 7
fn skew_hermiticity() -> Verdict {
    let b = PrequantumBundle::standard(1);
    let chart = b.chart().clone();
    let s = Section::bump(&chart, &[0.1, -0.2], &[1.2, 1.0], 4).unwrap();
    let wave = Section::symbolic(&chart, ComplexExpr::new(chart.parse("cos(2*q)").unwrap(), chart.parse("sin(p) + q").unwrap())).unwrap();
    let t = Section::bump(&chart, &[-0.3, 0.4], &[1.0, 1.3], 4).unwrap().mul(&wave).unwrap();
    let grid = QuadratureGrid::uniform(vec![-2.0; 2], vec![2.0; 2], 201).unwrap();
    let mut lines = Vec::new();
    for src in ["q", "q*p + sin(q)"] {
        let f = chart.parse(src).unwrap();
        let coarse = b.skew_hermiticity_check(&f, &s, &t, &grid).map_err(|e| e.to_string())?;
        let fine = b.skew_hermiticity_check(&f, &s, &t, &grid.refined()).map_err(|e| e.to_string())?;
        ensure(coarse < 1e-6, || format!("f = {src}: residual {coarse:e} >= 1e-6"))?;
        ensure(coarse >= 4.0 * fine, || format!("f = {src}: {coarse:e} -> {fine:e}, ratio < 4"))?;
        lines.push(format!("f = {src}: {coarse:.1e} < 1e-6, ratio {:.1} >= 4", coarse / fine));
    }
    Ok(lines.join("; "))
}

// 8
fn holonomy_obstruction() -> Verdict {
    let b = PrequantumBundle::punctured_plane(2.5);
    let mut worst: f64 = 0.0;
    for r2 in [0.25, 0.5, 1.0, 2.0, 3.0] {
        let rep = holonomy_report(&b, f64::sqrt(r2)).map_err(|e| e.to_string())?;
        let oracle = Complex64::from_polar(1.0, -2.0 * PI * r2);
        worst = worst.max((rep.numeric - oracle).norm());
        let integral = r2.fract() == 0.0;
        ensure(rep.polarized_exists == integral, || format!("r^2 = {r2}: polarized_exists = {}", rep.polarized_exists))?;
    }
    ensure(worst < 1e-8, || format!("holonomy mismatch {worst:e} >= 1e-8"))?;
    Ok(format!("max |hol - exp(-2 pi i r^2)| = {worst:.1e} < 1e-8; sections exist exactly for r^2 in {{1, 2, 3}}"))
}

// 9
fn polarized_suite() -> Verdict {
    let b = PrequantumBundle::standard(1);
    let pol = Polarization::vertical(1);
    let chart = b.chart().clone();
    let points = chart.sample(200, 9);
    let psi = Section::parse(&chart, "exp(-q^2/2)*(1 + q)", "cos(q)").unwrap();
    let mut corpus = Corpus::new(90);
    let family: Vec<Expression> = (0..20).map(|_| corpus.affine_in_momentum(chart.variables())).collect();
    let (mut member, mut closure, mut preserve): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for f in &family {
        member = member.max(is_polarization_preserving(f, &pol, &points).map_err(|e| e.to_string())?);
        preserve = preserve.max(qf_preserves_polarized_check(&b, &pol, f, &psi, &points).map_err(|e| e.to_string())?);
    }
    for f in &family[..8] {
        for g in &family[..8] {
            closure = closure.max(bracket_closure_check(f, g, &pol, &points).map_err(|e| e.to_string())?);
        }
    }
    let p2 = chart.parse("p^2").unwrap();
    let bad = is_polarization_preserving(&p2, &pol, &points).map_err(|e| e.to_string())?;
    let bad_q = qf_preserves_polarized_check(&b, &pol, &p2, &psi, &points).map_err(|e| e.to_string())?;
    ensure(member < 1e-9, || format!("membership {member:e} >= 1e-9"))?;
    ensure(closure < 1e-7, || format!("closure {closure:e} >= 1e-7"))?;
    ensure(preserve < 1e-7, || format!("Q_f preserves {preserve:e} >= 1e-7"))?;
    ensure(bad >= 1e-2 && bad_q >= 1e-2, || format!("p^2 residuals {bad:e}, {bad_q:e} < 1e-2"))?;
    Ok(format!(
        "membership {member:.1e} < 1e-9, closure {closure:.1e} < 1e-7, Q_f-preserves {preserve:.1e} < 1e-7; p^2: {bad:.2} and {bad_q:.2} >= 1e-2"
    ))
}

fn random_matrix(r: &mut impl Rng, n: usize) -> DMatrix<f64> {
    loop {
        let m: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| r.gen_range(-2.0..2.0));
        if m.determinant().abs() > 1e-3 {
            return m;
        }
    }
}

// 10
fn densities() -> Verdict {
    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm().max(1e-300);
    for n in 1..=4 {
        for _ in 0..100 {
            let order = Complex64::new(r.gen_range(-1.0..2.0), r.gen_range(-1.0..1.0));
            let tau = VectorDensity::new(n, order, Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
            let (f, a) = (random_matrix(&mut r, n), random_matrix(&mut r, n));
            // equivariance against |det A|^alpha in polar form
            let d = a.determinant().abs();
            let factor = Complex64::from_polar(d.powf(order.re), order.im * d.ln());
            let lhs = tau.evaluate_on_frame(&(&f * &a)).unwrap();
            worst = worst.max(rel(lhs, tau.evaluate_on_frame(&f).unwrap() * factor));
            // orders add under products
            let other = VectorDensity::new(n, Complex64::new(r.gen_range(-1.0..1.0), 0.3), Complex64::new(0.7, -0.2));
            let prod = tau.product(&other).unwrap();
            if (prod.order - (order + other.order)).norm() > 1e-15 {
                return Err("product order is not the sum".into());
            }
            let pv = prod.evaluate_on_frame(&f).unwrap();
            worst = worst.max(rel(pv, tau.evaluate_on_frame(&f).unwrap() * other.evaluate_on_frame(&f).unwrap()));
            // (ST)^* = T^* S^*
            let two = tau.pullback(&(&f * &a)).unwrap().value;
            worst = worst.max(rel(two, tau.pullback(&f).unwrap().pullback(&a).unwrap().value));
        }
    }
    ensure(worst <= 1e-10, || format!("density identities off by {worst:e}"))?;
    let integrate = |atlas: Atlas| -> Result<f64, String> {
        let tau = ManifoldDensity::parse_reference(&Arc::new(atlas), "1", "0", Complex64::new(1.0, 0.0)).map_err(|e| e.to_string())?;
        let res = integrate_one_density(&tau).map_err(|e| e.to_string())?;
        ensure(res.converged, || "integration did not converge".into())?;
        Ok(res.total.re)
    };
    let a = integrate(Atlas::circle(&[0.0, PI], &[1.0, 2.0], 0.4).unwrap())?;
    let b = integrate(Atlas::circle(&[0.5, 2.5, 4.5], &[1.0, -1.5, 0.7], 0.3).unwrap())?;
    let err = (a - 2.0 * PI).abs().max((b - 2.0 * PI).abs());
    ensure(err < 1e-8, || format!("|int dtheta - 2 pi| = {err:e} >= 1e-8"))?;
    ensure((a - b).abs() < 1e-7, || format!("atlases disagree by {:e}", (a - b).abs()))?;
    Ok(format!(
        "frame/order/pullback identities {worst:.1e} <= 1e-10; |dtheta| = 2 pi within {err:.1e} < 1e-8 via 2- and 3-chart atlases (agree {:.1e})",
        (a - b).abs()
    ))
}

fn random_rational(r: &mut impl Rng) -> BigRational {
    q(r.gen_range(-20..=20), r.gen_range(1..=6))
}

fn random_dc(r: &mut impl Rng, c: &SimplicialComplex, k: usize) -> DifferentialCochain {
    let ints: Vec<i64> = (0..c.count(k)).map(|_| r.gen_range(-5..=5)).collect();
    let h = (k > 0).then(|| RealCochain::new(c, k - 1, (0..c.count(k - 1)).map(|_| random_rational(r)).collect()).unwrap());
    let omega = if k < 2 {
        RealCochain::zero(c, k)
    } else {
        RealCochain::new(c, k, (0..c.count(k)).map(|_| random_rational(r)).collect()).unwrap()
    };
    DifferentialCochain::new(c, IntCochain::from_i64s(c, k, &ints).unwrap(), h, omega).unwrap()
}

fn square_object(c: &Arc<SimplicialComplex>) -> DifferentialCocycle {
    let h = RealCochain::new(c, 1, vec![q(1, 3), q(0, 1), q(-5, 2), q(7, 6)]).unwrap();
    DifferentialCocycle::new(c, IntCochain::zero(c, 2), h, RealCochain::zero(c, 2)).unwrap()
}

fn out_of(c: &Arc<SimplicialComplex>, z: &DifferentialCocycle, e: &[i64], k: Vec<BigRational>) -> CocycleMorphism {
    let e = IntCochain::from_i64s(c, 1, e).unwrap();
    let k = RealCochain::new(c, 0, k).unwrap();
    let h = z.h().sub(&coboundary(c, &k).unwrap()).unwrap().sub(&e.to_real()).unwrap();
    let target = DifferentialCocycle::new(c, z.c().clone(), h, z.omega().clone()).unwrap();
    CocycleMorphism::new(z.clone(), target, e, k).unwrap()
}

fn circle_maps(c: &SimplicialComplex) -> Vec<CircleMap> {
    let mut out = Vec::new();
    for lc in 0..16 {
        for wc in 0..16 {
            let lift = (0..4).map(|i| q(((lc >> i) & 1) as i64, 2)).collect();
            let w: Vec<i64> = (0..4).map(|i| ((wc >> i) & 1) as i64).collect();
            let windings = IntCochain::from_i64s(c, 1, &w).unwrap();
            out.push(CircleMap::from_windings(c, RealCochain::new(c, 0, lift).unwrap(), &windings).unwrap());
        }
    }
    out
}

// 11
fn differential_cocycles() -> Verdict {
    let builtins = [
        Builtin::Circle(3),
        Builtin::Circle(4),
        Builtin::Circle(7),
        Builtin::Torus(3, 3),
        Builtin::Torus(3, 5),
        Builtin::Torus(4, 4),
        Builtin::TetraSphere,
    ];
    let mut r = rng(11);
    for b in builtins {
        let c = b.build().map_err(|e| e.to_string())?;
        for i in 0..100 {
            let k = i % (c.dimension() + 1);
            let x = random_dc(&mut r, &c, k);
            if k + 1 < c.dimension() {
                let ints: Vec<i64> = (0..c.count(k)).map(|_| r.gen_range(-9..=9)).collect();
                let y = IntCochain::from_i64s(&c, k, &ints).unwrap();
                ensure(coboundary(&c, &coboundary(&c, &y).unwrap()).unwrap().is_zero(), || format!("dd != 0 on {}", c.name()))?;
            }
            let dd = d_tilde(&c, &d_tilde(&c, &x).unwrap()).unwrap();
            ensure(dd.is_zero(), || format!("d~d~ != 0 on {} in degree {k}", c.name()))?;
        }
    }

    // groupoid laws on the 4-gon
    let c = Arc::new(SimplicialComplex::circle(4).unwrap());
    let z = square_object(&c);
    let mut laws = 0;
    for ec in 0..81usize {
        for kc in 0..16usize {
            let e: Vec<i64> = (0..4).map(|i| (ec / 3usize.pow(i)) as i64 % 3 - 1).collect();
            let k: Vec<BigRational> = (0..4).map(|i| q(((kc >> i) & 1) as i64, 2)).collect();
            let m = out_of(&c, &z, &e, k);
            let id_l = compose_morphisms(&CocycleMorphism::identity(m.target()), &m).unwrap();
            let id_r = compose_morphisms(&m, &CocycleMorphism::identity(&z)).unwrap();
            let inv = compose_morphisms(&m.inverse(), &m).unwrap();
            let ok = morphisms_equal(&id_l, &m).unwrap()
                && morphisms_equal(&id_r, &m).unwrap()
                && morphisms_equal(&inv, &CocycleMorphism::identity(&z)).unwrap();
            ensure(ok, || format!("unit/inverse law fails for e = {e:?}"))?;
            laws += 1;
        }
    }
    let domain: Vec<(Vec<i64>, Vec<BigRational>)> = (0..32usize)
        .map(|code| {
            let e = (0..4).map(|i| ((code % 16) >> i & 1) as i64).collect();
            let mut k = vec![q(0, 1); 4];
            k[0] = q((code / 16) as i64, 2);
            (e, k)
        })
        .collect();
    for (e1, k1) in &domain {
        let m1 = out_of(&c, &z, e1, k1.clone());
        for (e2, k2) in &domain {
            let m2 = out_of(&c, m1.target(), e2, k2.clone());
            let m21 = compose_morphisms(&m2, &m1).unwrap();
            for (e3, k3) in &domain {
                let m3 = out_of(&c, m2.target(), e3, k3.clone());
                let a = compose_morphisms(&m3, &m21).unwrap();
                let b = compose_morphisms(&compose_morphisms(&m3, &m2).unwrap(), &m1).unwrap();
                ensure(morphisms_equal(&a, &b).unwrap(), || "associativity fails".into())?;
                laws += 1;
            }
        }
    }

    // functor law and lift independence for DCh on the 4-gon
    let a = RealCochain::new(&c, 1, vec![q(1, 3), q(0, 1), q(1, 6), q(-1, 2)]).unwrap();
    let maps = circle_maps(&c);
    let mut functor = 0;
    for f in &maps {
        let mf = dch_morphism(&c, f, &a).unwrap();
        let next = a.sub(f.pullback()).unwrap();
        for g in &maps {
            let composite = compose_morphisms(&dch_morphism(&c, g, &next).unwrap(), &mf).unwrap();
            let direct = dch_morphism(&c, &f.product(g).unwrap(), &a).unwrap();
            ensure(morphisms_equal(&composite, &direct).unwrap(), || "functor law fails".into())?;
            functor += 1;
        }
        for v in 0..4 {
            let mut shift = [0i64; 4];
            shift[v] = 1;
            let g = f.relifted(&IntCochain::from_i64s(&c, 0, &shift).unwrap()).unwrap();
            ensure(morphisms_equal(&mf, &dch_morphism(&c, &g, &a).unwrap()).unwrap(), || "lift dependence".into())?;
        }
    }

    // integrality lift on tori
    for (m, n) in [(3, 3), (4, 4), (3, 5)] {
        let t = Arc::new(SimplicialComplex::torus(m, n).unwrap());
        let count = t.count(2) as i64;
        for total in [0i64, 1, 2, -3] {
            let w = RealCochain::new(&t, 2, vec![q(total, count); count as usize]).unwrap();
            match integral_lift(&t, &w).map_err(|e| e.to_string())? {
                LiftOutcome::Lifted { cocycle, .. } => {
                    let c_total = cocycle.c().total();
                    ensure(c_total == total.into(), || format!("lift of total {total} has c total {c_total}"))?;
                    ensure(d_tilde(&t, cocycle.cochain()).unwrap().is_zero(), || "lift is not closed".into())?;
                }
                LiftOutcome::Infeasible { .. } => return Err(format!("total {total} on {m}x{n} torus reported infeasible")),
            }
        }
        for total in [q(1, 2), q(13, 10)] {
            let w = RealCochain::new(&t, 2, vec![&total / BigRational::from_integer(count.into()); count as usize]).unwrap();
            match integral_lift(&t, &w).map_err(|e| e.to_string())? {
                LiftOutcome::Infeasible { certificate, .. } => {
                    ensure(certificate.period == total, || format!("certificate period {}", certificate.period))?;
                    ensure(certificate.cycle.iter().all(|x| x.abs() == 1), || "certificate is not the fundamental class".into())?;
                }
                LiftOutcome::Lifted { .. } => return Err(format!("total {total} on {m}x{n} torus lifted")),
            }
        }
    }
    Ok(format!(
        "dd = d~d~ = 0 exactly on 7 complexes x 100; {laws} groupoid law instances, {functor} functor pairs, lift independence; tori lift {{0,1,2,-3}} and certify {{1/2, 13/10}}"
    ))
}

// 12
fn cli_determinism() -> Verdict {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let scenes = [
        ("flow", "flow.toml"),
        ("poisson-check", "poisson.toml"),
        ("prequantize", "prequantize.toml"),
        ("holonomy", "holonomy.toml"),
        ("polarized-check", "polarized.toml"),
        ("integrate-density", "density.toml"),
        ("cocycle", "cocycle.toml"),
    ];
    for (cmd, file) in scenes {
        let path = configs.join(file);
        let run = || {
            Process::new(env!("CARGO_BIN_EXE_prequant"))
                .args([cmd, "--config", path.to_str().unwrap(), "--seed", "2024"])
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        ensure(a.status.success(), || format!("{cmd}: {}", String::from_utf8_lossy(&a.stderr)))?;
        ensure(!a.stdout.is_empty() && a.stdout == b.stdout, || format!("{cmd}: reports differ"))?;
    }
    Ok("7 commands x 2 runs with --seed 2024: byte-identical reports".into())
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Verdict); 12] = [
        ("Hamiltonian vector field", Duration::from_secs(1), hamiltonian_field),
        ("Poisson algebra", Duration::from_secs(10), poisson_suite),
        ("Liouville invariance", Duration::from_secs(5), liouville),
        ("Oscillator flow", Duration::from_secs(30), oscillator_flow),
        ("Curvature identity", Duration::from_secs(5), curvature_identity),
        ("Prequantization homomorphism", Duration::from_secs(10), prequantum_homomorphism),
        ("Skew-Hermiticity", Duration::from_secs(60), skew_hermiticity),
        ("Punctured-plane obstruction", Duration::from_secs(5), holonomy_obstruction),
        ("Polarization-preserving functions", Duration::from_secs(10), polarized_suite),
        ("Densities", Duration::from_secs(10), densities),
        ("Differential cocycles", Duration::from_secs(60), differential_cocycles),
        ("CLI determinism", Duration::from_secs(120), cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match verdict {
            Ok(d) if elapsed <= *budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "{} {:>2} {name}: {detail} [{:.2} s / {} s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
