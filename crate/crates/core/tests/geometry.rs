use std::sync::Arc;

use nalgebra::DMatrix;
use prequant_core::corpus::Corpus;
use prequant_core::geometry::*;
use prequant_core::sampling::random_vectors;

/// `omega^m = rho dx_1 ^ ... ^ dx_2m` summed over all permutations:
/// `rho = 2^-m sum_sigma sgn(sigma) prod_k Omega[sigma(2k-1)][sigma(2k)]`.
fn top_power_by_permutations(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    permute(&mut perm, 0, m, &mut total);
    total / 2f64.powi((n / 2) as i32)
}

fn permute(perm: &mut Vec<usize>, k: usize, m: &DMatrix<f64>, total: &mut f64) {
    if k == perm.len() {
        let mut sign = 1.0;
        for i in 0..perm.len() {
            for j in i + 1..perm.len() {
                if perm[i] > perm[j] {
                    sign = -sign;
                }
            }
        }
        let prod: f64 = perm.chunks(2).map(|c| m[(c[0], c[1])]).product();
        *total += sign * prod;
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, m, total);
        perm.swap(k, i);
    }
}

fn twisted_example() -> SymplecticStructure {
    let base = Arc::new(Chart::new("base", &["x", "y"], vec![-2.0; 2], vec![2.0; 2]).unwrap());
    let tau = TwoForm::from_upper(&base, vec![(0, 1, base.parse("1 + x^2*y").unwrap())]).unwrap();
    twisted_cotangent(2, &tau).unwrap()
}

#[test]
fn top_power_matches_permutation_expansion() {
    let forms = vec![canonical_symplectic(1), canonical_symplectic(2), twisted_example(), punctured_plane(2.0).0];
    for omega in forms {
        let rho = wedge_top_power(&omega);
        for x in omega.chart().sample(30, 4) {
            let m = omega.form().matrix_at(&x).unwrap();
            let brute = top_power_by_permutations(&m);
            let symbolic = rho.evaluate(&x).unwrap();
            assert!((symbolic - brute).abs() < 1e-12 * brute.abs().max(1.0), "{symbolic} vs {brute}");
            // Pf^2 = det
            let k = omega.half_dimension();
            let fact: f64 = (1..=k).map(|i| i as f64).product();
            let pf = symbolic / fact;
            assert!((pf * pf - m.determinant()).abs() < 1e-10 * m.determinant().abs().max(1.0));
            assert!(symbolic.abs() > 0.0);
        }
    }
}

#[test]
fn canonical_top_powers() {
    let r1 = wedge_top_power(&canonical_symplectic(1)).as_constant().unwrap();
    let r2 = wedge_top_power(&canonical_symplectic(2)).as_constant().unwrap();
    assert_eq!(r1.abs(), 1.0);
    assert_eq!(r2.abs(), 2.0);
}

#[test]
fn canonical_matches_basis_evaluation() {
    // omega = sum dp_i ^ dq_i, so omega(dq_i, dp_j) = -delta_ij
    for n in 1..=3 {
        let w = canonical_symplectic(n);
        let m = w.form().constant_matrix().unwrap();
        for i in 0..2 * n {
            for j in 0..2 * n {
                let expected = if i < n && j == i + n {
                    -1.0
                } else if i >= n && j == i - n {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(m[(i, j)], expected);
            }
        }
    }
}

#[test]
fn exterior_derivative_of_differential_vanishes() {
    let omega = canonical_symplectic(2);
    let chart = omega.chart().clone();
    let mut corpus = Corpus::new(9);
    let points = chart.sample(100, 10);
    for _ in 0..10 {
        let f = corpus.smooth(chart.variables());
        let ddf = OneForm::differential(&chart, &f).unwrap().exterior_derivative();
        assert!(ddf.max_abs(&points).unwrap() < 1e-9);
    }
}

#[test]
fn random_two_forms_are_antisymmetric() {
    let chart = Arc::new(Chart::phase_space(2, 2.0));
    let mut corpus = Corpus::new(3);
    let points = chart.sample(100, 2);
    for _ in 0..10 {
        let coeffs = (0..4).map(|_| corpus.smooth(chart.variables())).collect();
        let form = OneForm::new(&chart, coeffs).unwrap().exterior_derivative();
        assert!(form.antisymmetry_residual(&points).unwrap() <= 1e-12);
        // d(alpha) is closed
        assert!(form.closedness_residual(&points).unwrap() < 1e-9);
    }
}

#[test]
fn tautological_constructions_agree() {
    for n in 1..=3 {
        let alpha = tautological_one_form(n);
        let points = alpha.chart().sample(100, 21);
        let vectors = random_vectors(2 * n, 100, 22);
        for (x, v) in points.iter().zip(&vectors) {
            let a = alpha.evaluate(x, v).unwrap();
            let b = tautological_intrinsic(x, v);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}

#[test]
fn tautological_derivative_is_canonical() {
    let alpha = tautological_one_form(1);
    let d = alpha.exterior_derivative();
    assert_eq!(d.evaluate(&[0.2, 0.5], &[1.0, 0.0], &[0.0, 1.0]).unwrap(), -1.0);
    assert_eq!(alpha.evaluate(&[0.0, 3.0], &[1.0, 0.0]).unwrap(), 3.0);
    assert_eq!(alpha.evaluate(&[1.1, 3.0], &[0.0, 1.0]).unwrap(), 0.0);
}

#[test]
fn twisted_form_adds_base_block() {
    let omega = twisted_example();
    let m = omega.form().matrix_at(&[0.5, 1.0, 0.0, 0.0]).unwrap();
    assert!((m[(0, 1)] - 1.25).abs() < 1e-15);
    assert!((m[(1, 0)] + 1.25).abs() < 1e-15);
    // a base block does not change det of [[B, -I], [I, 0]]
    assert!((m.determinant() - 1.0).abs() < 1e-12);
}

#[test]
fn certificate_records_seed_and_samples() {
    let w = canonical_symplectic(1);
    assert_eq!(w.certificate().samples, 200);
    assert!(w.certificate().min_abs_det > 1e-12);
}

#[test]
fn punctured_plane_form_is_2r() {
    let (omega, _) = punctured_plane(2.0);
    for x in omega.chart().sample(20, 8) {
        let m = omega.form().matrix_at(&x).unwrap();
        assert!((m[(0, 1)] - 2.0 * x[0]).abs() < 1e-14);
    }
}
