use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use prequant_core::densities::*;
use prequant_core::geometry::canonical_symplectic;
use prequant_core::sampling::rng;
use prequant_core::{Complex64, Error};
use proptest::prelude::*;
use rand::Rng;

fn random_matrix(r: &mut impl Rng, n: usize) -> DMatrix<f64> {
    loop {
        let m: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| r.gen_range(-2.0..2.0));
        if m.determinant().abs() > 1e-3 {
            return m;
        }
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[test]
fn frame_equivariance() {
    let mut r = rng(1);
    for n in 1..=4 {
        for _ in 0..100 {
            let order = Complex64::new(r.gen_range(-1.0..2.0), r.gen_range(-1.0..1.0));
            let tau = VectorDensity::new(n, order, Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
            let (f, a) = (random_matrix(&mut r, n), random_matrix(&mut r, n));
            let lhs = tau.evaluate_on_frame(&(&f * &a)).unwrap();
            // |det A|^alpha computed independently through polar form
            let d = a.determinant().abs();
            let factor = Complex64::from_polar(d.powf(order.re), order.im * d.ln());
            let rhs = tau.evaluate_on_frame(&f).unwrap() * factor;
            assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1e-300), "{lhs} {rhs}");
        }
    }
}

#[test]
fn frame_examples() {
    let tau = VectorDensity::real_order(2, 0.5, 1.0);
    assert!((tau.evaluate_on_frame(&(DMatrix::identity(2, 2) * 2.0)).unwrap() - 2.0).norm() < 1e-15);
    let v = VectorDensity::new(3, Complex64::new(0.3, 0.2), Complex64::new(1.5, -0.5));
    assert_eq!(v.evaluate_on_frame(&DMatrix::identity(3, 3)).unwrap(), v.value);
    let zero_order = VectorDensity::real_order(2, 0.0, 4.0);
    let m = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 0.5, 2.0]);
    assert_eq!(zero_order.evaluate_on_frame(&m).unwrap(), Complex64::new(4.0, 0.0));
    assert!(matches!(
        v.evaluate_on_frame(&DMatrix::zeros(3, 3)),
        Err(Error::SingularFrame(_))
    ));
}

#[test]
fn products_add_orders() {
    let mut r = rng(2);
    let a = VectorDensity::real_order(2, 0.5, 1.5);
    let b = VectorDensity::real_order(2, 0.5, -2.0);
    let ab = a.product(&b).unwrap();
    assert_eq!(ab.order, one());
    assert_eq!(ab.value, Complex64::new(-3.0, 0.0));
    assert_eq!(a.product(&VectorDensity::unit(2)).unwrap(), a);
    let c = VectorDensity::new(2, Complex64::new(0.2, 0.7), Complex64::new(0.5, 1.0));
    for _ in 0..100 {
        let f = random_matrix(&mut r, 2);
        let lhs = a.product(&c).unwrap().evaluate_on_frame(&f).unwrap();
        let rhs = a.evaluate_on_frame(&f).unwrap() * c.evaluate_on_frame(&f).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm());
    }
    assert!(a.product(&VectorDensity::unit(3)).is_err());
}

#[test]
fn conjugation() {
    let mut r = rng(3);
    let c = VectorDensity::new(2, Complex64::new(0.5, 0.7), Complex64::new(0.5, 1.0));
    let cc = c.conjugate();
    assert_eq!(cc.order, c.order.conj());
    assert_eq!(cc.conjugate(), c);
    let real = VectorDensity::real_order(2, 0.5, 2.0);
    assert_eq!(real.conjugate(), real);
    // conj(mu) tau of two half-densities is a 1-density
    let h = VectorDensity::new(2, Complex64::new(0.5, 0.0), Complex64::new(1.0, -2.0));
    let pairing = h.conjugate().product(&h).unwrap();
    assert_eq!(pairing.order, one());
    for _ in 0..20 {
        let f = random_matrix(&mut r, 2);
        let v = c.conjugate().evaluate_on_frame(&f).unwrap();
        assert!((v - c.evaluate_on_frame(&f).unwrap().conj()).norm() < 1e-12 * v.norm());
    }
}

#[test]
fn pullbacks() {
    let tau = VectorDensity::real_order(2, 1.0, 1.0);
    let t = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0]));
    assert!((tau.pullback(&t).unwrap().value - 6.0).norm() < 1e-14);
    assert_eq!(tau.pullback(&DMatrix::identity(2, 2)).unwrap(), tau);
    let mut r = rng(4);
    for _ in 0..100 {
        let order = Complex64::new(r.gen_range(-1.0..2.0), r.gen_range(-1.0..1.0));
        let tau = VectorDensity::new(3, order, Complex64::new(1.0, 0.5));
        let (s, t) = (random_matrix(&mut r, 3), random_matrix(&mut r, 3));
        let lhs = tau.pullback(&(&s * &t)).unwrap().value;
        let rhs = tau.pullback(&s).unwrap().pullback(&t).unwrap().value;
        assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm());
        // T^* tau evaluated on a frame is tau on the image frame
        let f = random_matrix(&mut r, 3);
        let a = tau.pullback(&t).unwrap().evaluate_on_frame(&f).unwrap();
        let b = tau.evaluate_on_frame(&(&t * &f)).unwrap();
        assert!((a - b).norm() <= 1e-10 * a.norm());
    }
    assert!(tau.pullback(&DMatrix::zeros(2, 2)).is_err());
}

fn atlas_a() -> Arc<Atlas> {
    Arc::new(Atlas::circle(&[0.0, PI], &[1.0, 2.0], 0.4).unwrap())
}

fn atlas_b() -> Arc<Atlas> {
    Arc::new(Atlas::circle(&[0.5, 2.5, 4.5], &[1.0, -1.5, 0.7], 0.3).unwrap())
}

fn integrate(atlas: &Arc<Atlas>, re: &str, im: &str) -> DensityIntegral {
    let tau = ManifoldDensity::parse_reference(atlas, re, im, one()).unwrap();
    let r = integrate_one_density(&tau).unwrap();
    assert!(r.converged);
    r
}

#[test]
fn circle_length_through_two_atlases() {
    let a = integrate(&atlas_a(), "1", "0").total;
    let b = integrate(&atlas_b(), "1", "0").total;
    assert!((a.re - 2.0 * PI).abs() < 1e-8, "{a}");
    assert!((b.re - 2.0 * PI).abs() < 1e-8, "{b}");
    assert!((a - b).norm() < 1e-7);
}

#[test]
fn chart_independence_for_nonconstant_densities() {
    for (re, im, exact) in [
        ("2 + sin(theta) + cos(3*theta)", "0", Complex64::new(4.0 * PI, 0.0)),
        ("exp(cos(theta))", "sin(theta)^2", Complex64::new(f64::NAN, PI)),
        ("cos(theta)^2", "1", Complex64::new(PI, 2.0 * PI)),
    ] {
        let a = integrate(&atlas_a(), re, im).total;
        let b = integrate(&atlas_b(), re, im).total;
        assert!((a - b).norm() < 1e-7, "{re}: {a} vs {b}");
        if exact.re.is_finite() {
            assert!((a - exact).norm() < 1e-8, "{re}: {a}");
        } else {
            assert!((a.im - exact.im).abs() < 1e-8);
        }
    }
}

#[test]
fn zero_density_integrates_to_zero() {
    let r = integrate(&atlas_a(), "0", "0");
    assert_eq!(r.total, Complex64::new(0.0, 0.0));
}

#[test]
fn per_chart_values_sum_to_total() {
    let r = integrate(&atlas_b(), "1 + cos(theta)", "0");
    assert_eq!(r.per_chart.len(), 3);
    let sum: Complex64 = r.per_chart.iter().sum();
    assert!((sum - r.total).norm() < 1e-15);
}

#[test]
fn signed_splitting_of_sine() {
    for atlas in [atlas_a(), atlas_b()] {
        let tau = ManifoldDensity::parse_reference(&atlas, "sin(theta)", "0", one()).unwrap();
        let (pos, neg) = split_signed_density(&tau).unwrap();
        let total = integrate_one_density(&tau).unwrap().total;
        let p = integrate_one_density(&pos).unwrap();
        let n = integrate_one_density(&neg).unwrap();
        assert!(total.norm() < 1e-8);
        assert!((p.total.re - 2.0).abs() < 1e-8, "{}", p.total);
        assert!((n.total.re - 2.0).abs() < 1e-8);
        assert!((p.total - n.total - total).norm() < 1e-8);
    }
}

#[test]
fn nonnegative_density_has_zero_negative_part() {
    let tau = ManifoldDensity::parse_reference(&atlas_a(), "1 + cos(theta)", "0", one()).unwrap();
    let (_, neg) = split_signed_density(&tau).unwrap();
    assert_eq!(integrate_one_density(&neg).unwrap().total, Complex64::new(0.0, 0.0));
    let complex = ManifoldDensity::parse_reference(&atlas_a(), "1", "1", one()).unwrap();
    assert!(split_signed_density(&complex).is_err());
}

#[test]
fn complex_density_is_real_plus_i_imaginary() {
    let tau = ManifoldDensity::parse_reference(&atlas_b(), "cos(theta)^2", "2 + sin(theta)", one()).unwrap();
    let whole = integrate_one_density(&tau).unwrap().total;
    let re = integrate_one_density(&tau.real_part()).unwrap().total;
    let im = integrate_one_density(&tau.imaginary_part()).unwrap().total;
    assert!((whole - (re + Complex64::new(0.0, 1.0) * im)).norm() < 1e-9);
    let imaginary = ManifoldDensity::parse_reference(&atlas_b(), "0", "cos(theta)", one()).unwrap();
    assert!(integrate_one_density(&imaginary.real_part()).unwrap().total.norm() < 1e-12);
}

#[test]
fn annulus_area_form() {
    let atlas = Arc::new(Atlas::annulus(1.0, 2.0, &[0.0, PI], &[1.0, 1.0], 0.4).unwrap());
    let tau = ManifoldDensity::parse_reference(&atlas, "r", "0", one()).unwrap();
    let r = integrate_one_density(&tau).unwrap();
    assert!(r.converged);
    assert!((r.total.re - 3.0 * PI).abs() < 1e-8, "{}", r.total);
    let other = Arc::new(Atlas::annulus(1.0, 2.0, &[1.0, 3.0, 5.0], &[0.5, 1.0, 2.0], 0.2).unwrap());
    let tau2 = ManifoldDensity::parse_reference(&other, "r", "0", one()).unwrap();
    assert!((integrate_one_density(&tau2).unwrap().total - r.total).norm() < 1e-7);
}

#[test]
fn liouville_density_is_positive() {
    let d = liouville_density(&canonical_symplectic(1)).unwrap();
    let r = integrate_one_density(&d).unwrap();
    assert!((r.total.re - 16.0).abs() < 1e-10);
    let d2 = liouville_density(&canonical_symplectic(2)).unwrap();
    let r2 = integrate_one_density(&d2).unwrap();
    assert!(r2.total.re > 0.0);
    assert!((r2.total.re - 2.0 * 256.0).abs() < 1e-8);
}

#[test]
fn bad_partition_is_rejected() {
    let chart = AtlasChart::new(
        "half",
        &["x"],
        vec![0.0],
        vec![1.0],
        vec![AxisProfile {
            rise: Some((0.0, 0.5)),
            fall: None,
        }],
        &["x"],
    )
    .unwrap();
    assert!(matches!(
        Atlas::new("bad", vec!["x".into()], vec![chart], vec![]),
        Err(Error::PartitionNotUnity(_))
    ));
}

#[test]
fn only_order_one_integrates() {
    let tau = ManifoldDensity::parse_reference(&atlas_a(), "1", "0", Complex64::new(0.5, 0.0)).unwrap();
    assert!(integrate_one_density(&tau).is_err());
}

#[test]
fn half_density_transition_law() {
    // |dtheta|^(1/2) on the scaled atlas: coefficient sqrt(scale) in chart coordinates
    let atlas = atlas_a();
    let tau = ManifoldDensity::parse_reference(&atlas, "1", "0", Complex64::new(0.5, 0.0)).unwrap();
    assert!(tau.transition_residual() < 1e-12);
    let sq = tau.product(&tau).unwrap();
    assert_eq!(sq.order(), one());
    assert!((integrate_one_density(&sq).unwrap().total.re - 2.0 * PI).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partitions_sum_to_one(start in 0.0f64..1.0, gap in 1.0f64..3.0, s1 in 0.3f64..3.0, s2 in -3.0f64..-0.3, blend in 0.05f64..0.45) {
        let atlas = Atlas::circle(&[start, start + gap], &[s1, s2], blend).unwrap();
        prop_assert!(atlas.partition_deviation() <= 1e-10);
    }

    #[test]
    fn trig_polynomials_integrate_chart_independently(a in -2.0f64..2.0, b in -2.0f64..2.0, k in 1u32..4) {
        let expr = format!("{a}*cos({k}*theta) + {b}*sin(theta) + 1");
        let x = integrate(&atlas_a(), &expr, "0").total;
        let y = integrate(&atlas_b(), &expr, "0").total;
        prop_assert!((x - y).norm() < 1e-7);
        prop_assert!((x.re - 2.0 * PI).abs() < 1e-8);
    }
}
