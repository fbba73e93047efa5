use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use prequant_diffcoh::sample::{torus_one_form, torus_two_form};
use prequant_diffcoh::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn square() -> Arc<SimplicialComplex> {
    Arc::new(SimplicialComplex::circle(4).unwrap())
}

fn potential(c: &SimplicialComplex) -> RealCochain {
    RealCochain::new(c, 1, vec![q(1, 3), q(0, 1), q(1, 6), q(-1, 2)]).unwrap()
}

/// Circle maps with lift in {0, 1/2}^4 and per-edge windings in {0, 1}^4.
fn maps(c: &SimplicialComplex) -> Vec<CircleMap> {
    let mut out = Vec::new();
    for lc in 0..16 {
        for wc in 0..16 {
            let lift = (0..4).map(|i| q(((lc >> i) & 1) as i64, 2)).collect();
            let w: Vec<i64> = (0..4).map(|i| ((wc >> i) & 1) as i64).collect();
            let f = CircleMap::from_windings(
                c,
                RealCochain::new(c, 0, lift).unwrap(),
                &IntCochain::from_i64s(c, 1, &w).unwrap(),
            )
            .unwrap();
            out.push(f);
        }
    }
    out
}

#[test]
fn trivial_connection_object() {
    let c = Arc::new(SimplicialComplex::torus(3, 3).unwrap());
    let z = dch_object(&c, &RealCochain::zero(&c, 1)).unwrap();
    assert!(z.c().is_zero() && z.h().is_zero() && z.omega().is_zero());
}

#[test]
fn constant_potential_on_hexagon() {
    let c = Arc::new(SimplicialComplex::circle(6).unwrap());
    let a = RealCochain::new(&c, 1, vec![q(2, 7); 6]).unwrap();
    let z = dch_object(&c, &a).unwrap();
    assert!(z.c().is_zero());
    assert_eq!(z.h(), &a);
    assert!(z.omega().is_zero());
}

#[test]
fn torus_object_carries_sampled_curvature() {
    // a = -sin(2 pi y) / (2 pi) dx has da = cos(2 pi y) dx ^ dy
    let (c, a) = torus_one_form(6, 6, |_, y| -(2.0 * PI * y).sin() / (2.0 * PI), |_, _| 0.0).unwrap();
    let (_, f) = torus_two_form(6, 6, |_, y| (2.0 * PI * y).cos()).unwrap();
    let c = Arc::new(c);
    let z = dch_object(&c, &a).unwrap();
    let omega = z.omega().to_f64s();
    for (x, y) in omega.iter().zip(f.to_f64s()) {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
}

#[test]
fn degree_one_map_winds_once() {
    let c = square();
    let lift = RealCochain::new(&c, 0, (0..4).map(|i| q(i, 4)).collect()).unwrap();
    let f = CircleMap::new(&c, lift.clone(), RealCochain::new(&c, 1, vec![q(1, 4); 4]).unwrap()).unwrap();
    // winding oracle: sum the lift increments, wrapping the last edge
    let l = lift.values();
    let wrapped: BigRational = (0..4)
        .map(|i| {
            let step = l[(i + 1) % 4].clone() - l[i].clone();
            if step < q(0, 1) {
                step + q(1, 1)
            } else {
                step
            }
        })
        .sum();
    assert_eq!(f.winding(&[1, 1, 1, 1]), wrapped);
    assert_eq!(wrapped, q(1, 1));
    let a = potential(&c);
    let m = dch_morphism(&c, &f, &a).unwrap();
    assert_eq!(m.e().total(), BigInt::from(1));
}

#[test]
fn unit_map_is_identity() {
    let c = square();
    let a = potential(&c);
    for value in [q(0, 1), q(1, 1), q(-3, 1)] {
        let m = dch_morphism(&c, &CircleMap::constant(&c, value), &a).unwrap();
        assert!(m.e().is_zero());
        assert!(morphisms_equal(&m, &CocycleMorphism::identity(m.source())).unwrap());
    }
    // a constant rotation is a nontrivial automorphism
    let m = dch_morphism(&c, &CircleMap::constant(&c, q(1, 3)), &a).unwrap();
    assert!(m.e().is_zero());
    assert_eq!(m.source(), m.target());
    assert!(!morphisms_equal(&m, &CocycleMorphism::identity(m.source())).unwrap());
}

#[test]
fn functor_law_exhaustive() {
    let c = square();
    let a = potential(&c);
    let all = maps(&c);
    for f in &all {
        let mf = dch_morphism(&c, f, &a).unwrap();
        let a_next = a.sub(f.pullback()).unwrap();
        for g in &all {
            let mg = dch_morphism(&c, g, &a_next).unwrap();
            let composite = compose_morphisms(&mg, &mf).unwrap();
            let direct = dch_morphism(&c, &f.product(g).unwrap(), &a).unwrap();
            assert!(morphisms_equal(&composite, &direct).unwrap());
        }
    }
}

#[test]
fn lift_independence_exhaustive() {
    let c = square();
    let a = potential(&c);
    for f in maps(&c) {
        let m = dch_morphism(&c, &f, &a).unwrap();
        for v in 0..4 {
            for s in [-1i64, 1, 2] {
                let mut values = [0i64; 4];
                values[v] = s;
                let shift = IntCochain::from_i64s(&c, 0, &values).unwrap();
                let g = f.relifted(&shift).unwrap();
                assert!(morphisms_equal(&m, &dch_morphism(&c, &g, &a).unwrap()).unwrap());
            }
        }
    }
}

#[test]
fn lift_independence_on_torus() {
    let c = Arc::new(SimplicialComplex::torus(4, 5).unwrap());
    let mut r = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let lift = RealCochain::new(&c, 0, (0..20).map(|_| q(r.gen_range(-20..20), 8)).collect()).unwrap();
        // windings must sum to zero around every triangle: take them exact
        let n = IntCochain::from_i64s(&c, 0, &(0..20).map(|_| r.gen_range(-3..=3)).collect::<Vec<_>>()).unwrap();
        let windings = coboundary(&c, &n).unwrap();
        let f = CircleMap::from_windings(&c, lift, &windings).unwrap();
        let a = RealCochain::new(&c, 1, (0..60).map(|_| q(r.gen_range(-9..9), 5)).collect()).unwrap();
        let m = dch_morphism(&c, &f, &a).unwrap();
        let shift = IntCochain::from_i64s(&c, 0, &(0..20).map(|_| r.gen_range(-4..=4)).collect::<Vec<_>>()).unwrap();
        let g = f.relifted(&shift).unwrap();
        assert!(morphisms_equal(&m, &dch_morphism(&c, &g, &a).unwrap()).unwrap());
    }
}

#[test]
fn inconsistent_winding_rejected() {
    let c = Arc::new(SimplicialComplex::torus(3, 3).unwrap());
    let lift = RealCochain::zero(&c, 0);
    // one extra turn on a single edge cannot bound every triangle
    let w = IntCochain::indicator(&c, 1, 0);
    assert!(matches!(
        CircleMap::from_windings(&c, lift, &w),
        Err(Error::WindingInconsistent { .. })
    ));
}

#[test]
fn hom_sets_match_on_square() {
    let c = square();
    let a = potential(&c);
    let a_prime = a.sub(&RealCochain::new(&c, 1, vec![q(1, 4); 4]).unwrap()).unwrap();
    let report = hom_probe(&c, &a, &a_prime, 4, 1).unwrap();
    assert_eq!(report.maps, 4);
    assert_eq!(report.classes, 4);
    assert!(report.representatives > report.classes);
    assert!(report.injective && report.surjective, "{report:?}");
}

#[test]
fn hom_sets_match_on_sphere() {
    let c = Arc::new(SimplicialComplex::tetra_sphere());
    let a = RealCochain::new(&c, 1, (0..6).map(|i| q(i, 5)).collect()).unwrap();
    let report = hom_probe(&c, &a, &a, 3, 1).unwrap();
    assert_eq!(report.maps, 3);
    assert_eq!(report.classes, 3);
    assert!(report.injective && report.surjective, "{report:?}");
}

#[test]
fn no_maps_between_non_gauge_equivalent_objects() {
    let c = square();
    let a = potential(&c);
    let a_prime = a.sub(&RealCochain::new(&c, 1, vec![q(1, 3), q(0, 1), q(0, 1), q(0, 1)]).unwrap()).unwrap();
    let report = hom_probe(&c, &a, &a_prime, 4, 1).unwrap();
    assert_eq!((report.maps, report.classes), (0, 0));
}
