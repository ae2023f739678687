mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use pressure_lab::crossratio::*;
use pressure_lab::group::{enumerate_classes, ConjClass, Word};
use pressure_lab::rep::Representation;
use pressure_lab::LabError;
use proptest::prelude::*;

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

/// Closed-form eigenvectors of a hyperbolic 2x2 matrix.
fn oracle_pair(m: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>) {
    let (p, q, r, s) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let tr = p + s;
    let disc = (tr * tr - 4.0 * (p * s - q * r)).sqrt();
    let lam = if tr > 0.0 { (tr + disc) / 2.0 } else { (tr - disc) / 2.0 };
    let right = if (lam - p).abs() + q.abs() > (lam - s).abs() + r.abs() {
        DVector::from_vec(vec![q, lam - p])
    } else {
        DVector::from_vec(vec![lam - s, r])
    };
    let left = if (lam - s).abs() + q.abs() > (lam - p).abs() + r.abs() {
        DVector::from_vec(vec![lam - s, q])
    } else {
        DVector::from_vec(vec![r, lam - p])
    };
    (right, left)
}

fn oracle_b(rep: &Representation, a: &Word, b: &Word) -> f64 {
    let (va, fa) = oracle_pair(&rep.evaluate(a).unwrap().true_matrix());
    let (vb, fb) = oracle_pair(&rep.evaluate(b).unwrap().true_matrix());
    fa.dot(&vb) * fb.dot(&va) / (fa.dot(&va) * fb.dot(&vb))
}

fn primitive_pairs(l: usize, k: usize) -> Vec<(ConjClass, ConjClass)> {
    let classes: Vec<ConjClass> = enumerate_classes(2, l, 1 << 20).unwrap().into_iter().filter(|c| c.is_primitive()).collect();
    let mut out = Vec::new();
    for (i, x) in classes.iter().enumerate() {
        for y in &classes[i + 1..] {
            if out.len() < k && pressure_lab::group::are_coprime(x.rep(), y.rep()).unwrap() {
                out.push((x.clone(), y.clone()));
            }
        }
    }
    out
}

#[test]
fn spec_example_values() {
    let rep = cusped_example();
    let r = fixed_point_cross_ratio_words(&rep, &w("b"), &w("a")).unwrap();
    assert!((r.value - 0.5).abs() < 1e-14 && r.discrepancy < 1e-14, "{r:?}");
    assert!(matches!(fixed_point_cross_ratio_words(&rep, &w("a"), &w("aa")), Err(LabError::NotCoprime(..))));
    assert!(matches!(fixed_point_cross_ratio_words(&rep, &w("a"), &w("A")), Err(LabError::NotCoprime(..))));
    assert!(matches!(fixed_point_cross_ratio_words(&rep, &w("ab"), &w("abab")), Err(LabError::NotCoprime(..))));
}

#[test]
fn matches_closed_form_in_sl2() {
    let rep = schottky();
    for (x, y) in primitive_pairs(5, 200) {
        let r = fixed_point_cross_ratio(&rep, &x, &y).unwrap();
        let o = oracle_b(&rep, x.rep(), y.rep());
        assert!((r.value - o).abs() <= 1e-10 * o.abs().max(1.0), "{x} {y} {} {o}", r.value);
        assert!(r.discrepancy <= 1e-10 * o.abs().max(1.0));
    }
}

#[test]
fn symmetric_power_relation() {
    let rep = schottky();
    for (x, y) in primitive_pairs(4, 40) {
        let b2 = fixed_point_cross_ratio(&rep, &x, &y).unwrap().value;
        for m in [3, 4] {
            let bm = fixed_point_cross_ratio(&rep.symmetric_power(m).unwrap(), &x, &y).unwrap().value;
            let want = b2.powi(m as i32 - 1);
            assert!((bm - want).abs() <= 1e-8 * want.abs().max(1.0), "{x} {y} m={m} {bm} {want}");
        }
    }
}

#[test]
fn quad_invariances() {
    let v = |x: &[f64]| DVector::from_column_slice(x);
    let (phi, psi, u, x) = (v(&[1.0, 2.0, 0.5]), v(&[-1.0, 0.3, 2.0]), v(&[0.2, 1.0, 1.0]), v(&[2.0, -1.0, 0.7]));
    let base = bb(&phi, &psi, &u, &x).unwrap();
    assert!((bb(&(&phi * -3.0), &(&psi * 0.5), &(&u * 7.0), &(&x * -2.0)).unwrap() - base).abs() < 1e-15 * base.abs());
    let g = mat(3, &[1.0, 0.5, 0.0, -0.3, 2.0, 1.0, 0.1, 0.0, 1.5]);
    let gi = g.clone().try_inverse().unwrap().transpose();
    let moved = bb(&(&gi * &phi), &(&gi * &psi), &(&g * &u), &(&g * &x)).unwrap();
    assert!((moved - base).abs() < 1e-12);
    assert!(matches!(bb(&v(&[1.0, 0.0, 0.0]), &psi, &u, &v(&[0.0, 1.0, 0.0])), Err(LabError::DegenerateQuad(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn equivariance(k in 0usize..60, g in proptest::collection::vec(-0.6f64..0.6, 9), conj in 1usize..40) {
        let tau3 = schottky().symmetric_power(3).unwrap();
        let pairs = primitive_pairs(4, 60);
        let (x, y) = &pairs[k];
        let base = fixed_point_cross_ratio(&tau3, x, y).unwrap().value;
        let gm = DMatrix::identity(3, 3) + DMatrix::from_row_slice(3, 3, &g);
        prop_assume!(gm.determinant().abs() > 0.2);
        let moved = tau3.conjugate(&gm).unwrap();
        let b = fixed_point_cross_ratio(&moved, x, y).unwrap().value;
        prop_assert!((b - base).abs() <= 1e-7 * base.abs().max(1.0), "{} {}", b, base);
        // conjugating both words by the same element
        let c = pressure_lab::group::random_word(conj as u64, 2, 1 + conj % 4).unwrap();
        let cx = c.multiply(x.rep()).multiply(&c.invert());
        let cy = c.multiply(y.rep()).multiply(&c.invert());
        let b = fixed_point_cross_ratio_words(&tau3, &cx, &cy).unwrap().value;
        prop_assert!((b - base).abs() <= 1e-7 * base.abs().max(1.0), "{} {}", b, base);
    }
}

#[test]
fn limits_converge_geometrically() {
    let rep = schottky();
    for (x, y) in [("a", "b"), ("ab", "aB"), ("b", "aab")] {
        let lim = cr_limit_words(&rep, &w(x), &w(y), 10).unwrap();
        assert!(lim.paired.last().unwrap().error < 1e-6 * lim.cross_ratio.value.abs().max(1.0), "{x} {y}");
        assert!(lim.single.last().unwrap().error < 1e-5 * lim.single_limit.abs().max(1.0), "{x} {y}");
        for r in lim.paired_ratios(3) {
            assert!(r < 0.9, "{x} {y} {r}");
        }
    }
    let mut buf = Vec::new();
    cr_limit_words(&rep, &w("a"), &w("b"), 4).unwrap().write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 9);
}

#[test]
fn rank_detection() {
    let classes = enumerate_classes(2, 3, 1 << 10).unwrap();
    let pool = coprime_pool(&classes, 10).unwrap();
    let sl2 = rank_scan(&schottky(), &pool, 4).unwrap();
    assert_eq!(sl2.detected_dimension, Some(2));
    let tau3 = rank_scan(&schottky().symmetric_power(3).unwrap(), &pool, 4).unwrap();
    assert_eq!(tau3.detected_dimension, Some(3));
    assert!(tau3.chi[2].1 > 1e2 * CHI_TOL);
    assert!(matches!(rank_scan(&schottky(), &pool[..6], 4), Err(LabError::InsufficientData(_))));
}
