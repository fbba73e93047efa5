use num_bigint::BigInt;
use num_rational::BigRational;
use prequant_diffcoh::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn builtins() -> Vec<SimplicialComplex> {
    let mut v: Vec<_> = (3..=12).map(|n| SimplicialComplex::circle(n).unwrap()).collect();
    for (m, n) in [(3, 3), (3, 5), (4, 4), (8, 8)] {
        v.push(SimplicialComplex::torus(m, n).unwrap());
    }
    v.push(SimplicialComplex::tetra_sphere());
    v
}

fn random_int(r: &mut ChaCha8Rng, c: &SimplicialComplex, k: usize) -> IntCochain {
    let values = (0..c.count(k)).map(|_| BigInt::from(r.gen_range(-9i64..=9))).collect();
    IntCochain::new(c, k, values).unwrap()
}

fn random_real(r: &mut ChaCha8Rng, c: &SimplicialComplex, k: usize) -> RealCochain {
    let values = (0..c.count(k))
        .map(|_| BigRational::new(r.gen_range(-50i64..=50).into(), r.gen_range(1i64..=12).into()))
        .collect();
    RealCochain::new(c, k, values).unwrap()
}

fn random_dc(r: &mut ChaCha8Rng, c: &SimplicialComplex, k: usize) -> DifferentialCochain {
    let h = (k > 0).then(|| random_real(r, c, k - 1));
    let omega = if k < 2 { RealCochain::zero(c, k) } else { random_real(r, c, k) };
    DifferentialCochain::new(c, random_int(r, c, k), h, omega).unwrap()
}

/// Coboundary straight from the vertex lists: `f(b) - f(a)` on `[a, b]`
/// and `g[b,c] - g[a,c] + g[a,b]` on `[a, b, c]`.
fn coboundary_from_vertices(c: &SimplicialComplex, x: &RealCochain) -> Vec<BigRational> {
    let v = x.values();
    match x.degree() {
        0 => c.edges().iter().map(|&[a, b]| v[b].clone() - v[a].clone()).collect(),
        1 => {
            let edge = |p: usize, q: usize| -> BigRational {
                for (i, &[s, t]) in c.edges().iter().enumerate() {
                    if (s, t) == (p, q) {
                        return v[i].clone();
                    }
                    if (s, t) == (q, p) {
                        return -v[i].clone();
                    }
                }
                panic!("missing edge");
            };
            c.triangles()
                .iter()
                .map(|&[a, b, cc]| edge(b, cc) - edge(a, cc) + edge(a, b))
                .collect()
        }
        _ => vec![],
    }
}

#[test]
fn coboundary_of_constant_vanishes() {
    for c in builtins() {
        let one = IntCochain::from_i64s(&c, 0, &vec![1; c.count(0)]).unwrap();
        assert!(coboundary(&c, &one).unwrap().is_zero(), "{}", c.name());
    }
}

#[test]
fn indicator_on_square() {
    let c = SimplicialComplex::circle(4).unwrap();
    let d = coboundary(&c, &IntCochain::indicator(&c, 0, 0)).unwrap();
    // edges [0,1], [1,2], [2,3], [3,0]
    let expected: Vec<BigInt> = [-1, 0, 0, 1].iter().map(|&x| BigInt::from(x)).collect();
    assert_eq!(d.values(), &expected[..]);
}

#[test]
fn coboundary_matches_vertex_formula() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    for c in builtins() {
        for k in 0..c.dimension() {
            let x = random_real(&mut r, &c, k);
            assert_eq!(coboundary(&c, &x).unwrap().values(), &coboundary_from_vertices(&c, &x)[..]);
        }
    }
}

#[test]
fn top_degree_is_an_overflow() {
    for c in builtins() {
        let x = IntCochain::zero(&c, c.dimension());
        assert!(matches!(coboundary(&c, &x), Err(Error::DegreeOverflow { .. })));
    }
}

#[test]
fn coboundary_squares_to_zero() {
    let mut r = ChaCha8Rng::seed_from_u64(6);
    for c in builtins() {
        for _ in 0..100 {
            let x = random_int(&mut r, &c, 0);
            let dd = coboundary_or_zero(&c, &coboundary(&c, &x).unwrap()).unwrap();
            assert!(dd.is_zero());
            let y = random_real(&mut r, &c, 0);
            assert!(coboundary_or_zero(&c, &coboundary(&c, &y).unwrap()).unwrap().is_zero());
        }
    }
}

#[test]
fn d_tilde_squares_to_zero() {
    let mut r = ChaCha8Rng::seed_from_u64(7);
    for c in builtins() {
        for i in 0..100 {
            let x = random_dc(&mut r, &c, i % 3);
            let dd = d_tilde(&c, &d_tilde(&c, &x).unwrap()).unwrap();
            assert!(dd.is_zero(), "{} degree {}", c.name(), x.degree());
        }
    }
}

#[test]
fn d_tilde_of_pure_h() {
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let c = SimplicialComplex::torus(3, 4).unwrap();
    let h = random_real(&mut r, &c, 0);
    let x = DifferentialCochain::new(&c, IntCochain::zero(&c, 1), Some(h.clone()), RealCochain::zero(&c, 1)).unwrap();
    let d = d_tilde(&c, &x).unwrap();
    assert!(d.c().is_zero());
    assert!(d.omega().is_zero());
    let minus_dh: Vec<BigRational> = coboundary_from_vertices(&c, &h).into_iter().map(|v| -v).collect();
    assert_eq!(d.h().unwrap().values(), &minus_dh[..]);
}

#[test]
fn cocycles_are_d_tilde_closed() {
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let c = std::sync::Arc::new(SimplicialComplex::torus(4, 4).unwrap());
    for _ in 0..20 {
        let a = random_real(&mut r, &c, 1);
        let z = dch_object(&c, &a).unwrap();
        assert!(d_tilde(&c, z.cochain()).unwrap().is_zero());
    }
}

#[test]
fn malformed_cochains_rejected() {
    let c = SimplicialComplex::circle(4).unwrap();
    assert!(matches!(
        IntCochain::from_i64s(&c, 1, &[1, 2, 3]),
        Err(Error::LengthMismatch { .. })
    ));
    let h = RealCochain::zero(&c, 1);
    assert!(DifferentialCochain::new(&c, IntCochain::zero(&c, 1), Some(h), RealCochain::zero(&c, 1)).is_err());
    assert!(DifferentialCochain::new(&c, IntCochain::zero(&c, 1), None, RealCochain::zero(&c, 1)).is_err());
}
