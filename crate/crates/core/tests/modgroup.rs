mod common;

use std::collections::HashSet;

use common::{config, q, rng};
use middleconv::convolution::sl_demo;
use middleconv::error::Error;
use middleconv::fixtures;
use middleconv::modgroup::{
    absolutely_irreducible, element_order, group_closure, group_elements, o3_recognition, primitivity_bound,
    reduce_matrix, reduce_mod, reduction_target, GroupOrder, DEFAULT_CAP,
};
use middleconv::{FieldDescriptor, Matrix, MonodromyTuple, Scalar};
use num_rational::Rational64;
use proptest::prelude::*;
use rand::Rng;

fn v_mod(ell: u64) -> MonodromyTuple {
    reduce_mod(&fixtures::tuple("V").unwrap(), ell).unwrap()
}

/// Closure by a plain hash set of matrices, multiplying every pair until stable.
fn naive_order(gens: &[Matrix]) -> usize {
    let d = gens[0].rows();
    let mut set: HashSet<Matrix> = HashSet::new();
    set.insert(Matrix::identity(gens[0].field(), d));
    let mut frontier: Vec<Matrix> = set.iter().cloned().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in gens {
                let y = x * g;
                if set.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    set.len()
}

fn gl_order(d: u32, q: u64) -> u128 {
    let qd = (q as u128).pow(d);
    (0..d).map(|i| qd - (q as u128).pow(i)).product()
}

fn int_matrix(d: usize, rng: &mut impl Rng) -> Matrix {
    let data = (0..d * d).map(|_| Scalar::from_i64(q(), rng.gen_range(-40..=40))).collect();
    Matrix::new(q(), d, d, data).unwrap()
}

#[test]
fn reduction_is_a_homomorphism() {
    let mut r = rng(11);
    for ell in [5u64, 7, 11] {
        let (target, zeta) = reduction_target(q(), ell).unwrap();
        for _ in 0..40 {
            let a = int_matrix(3, &mut r);
            let b = int_matrix(3, &mut r);
            let red = |m: &Matrix| reduce_matrix(m, target, zeta.as_ref(), ell).unwrap();
            assert_eq!(red(&(&a * &b)), &red(&a) * &red(&b));
            assert_eq!(red(&(&a + &b)), &red(&a) + &red(&b));
        }
    }
}

#[test]
fn cyclotomic_reduction_is_a_homomorphism() {
    let f = FieldDescriptor::cyclotomic(12).unwrap();
    let z = Scalar::zeta(f);
    let mut r = rng(12);
    for ell in [5u64, 7, 13] {
        let (target, zeta) = reduction_target(f, ell).unwrap();
        let zeta = zeta.unwrap();
        assert_eq!(zeta.pow(12).unwrap(), Scalar::one(target));
        assert_ne!(zeta.pow(6).unwrap(), Scalar::one(target));
        assert_ne!(zeta.pow(4).unwrap(), Scalar::one(target));
        for _ in 0..20 {
            let mut entry = || &z.pow(r.gen_range(0..12)).unwrap() * &Scalar::from_i64(f, r.gen_range(-5..=5));
            let a = Matrix::new(f, 2, 2, (0..4).map(|_| entry()).collect()).unwrap();
            let b = Matrix::new(f, 2, 2, (0..4).map(|_| entry()).collect()).unwrap();
            let red = |m: &Matrix| reduce_matrix(m, target, Some(&zeta), ell).unwrap();
            assert_eq!(red(&(&a * &b)), &red(&a) * &red(&b));
        }
    }
}

#[test]
fn reduced_fixture_keeps_product_relation() {
    let t = v_mod(11);
    assert_eq!(t.field(), FieldDescriptor::finite(11, 1).unwrap());
    let prod = t.entries().iter().skip(1).fold(t.entries()[0].clone(), |acc, m| &acc * m);
    assert_eq!(prod, Matrix::identity(t.field(), 3));
    let half = fixtures::tuple("LstarL").unwrap();
    assert!(reduce_mod(&half, 11).is_ok());
}

#[test]
fn bad_denominators_are_rejected() {
    let m = Matrix::new(q(), 1, 1, vec![Scalar::parse("1/5", q()).unwrap()]).unwrap();
    let t = MonodromyTuple::from_finite(vec![m], None).unwrap();
    assert_eq!(reduce_mod(&t, 5).map(|_| ()), Err(Error::BadPrime(5)));
    assert!(reduce_mod(&t, 7).is_ok());
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn closure_matches_hash_set_oracle(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let f = FieldDescriptor::finite(p, 1).unwrap();
        let mut r = rng(seed);
        let mut gens = Vec::new();
        while gens.len() < 2 {
            let data = (0..4).map(|_| Scalar::from_i64(f, r.gen_range(0..p as i64))).collect();
            let m = Matrix::new(f, 2, 2, data).unwrap();
            if !m.det().unwrap().is_zero() {
                gens.push(m);
            }
        }
        let order = group_closure(&gens, 5000).unwrap().exact().unwrap();
        prop_assert_eq!(order as usize, naive_order(&gens));
        prop_assert_eq!(gl_order(2, p) % order as u128, 0);
        let els = group_elements(&gens, 5000).unwrap().unwrap();
        prop_assert_eq!(els.len() as u64, order);
        let distinct: HashSet<&Matrix> = els.iter().collect();
        prop_assert_eq!(distinct.len(), els.len());
    }
}

#[test]
fn closure_over_quadratic_extension() {
    let f = FieldDescriptor::finite(3, 2).unwrap();
    let z = Scalar::from_finite_coeffs(f, 0, 1).unwrap();
    let a = Matrix::diagonal(f, &[z.clone(), z.inv().unwrap()]);
    let b = Matrix::from_ints(f, &[[0, 1], [-1, 0]]);
    let order = group_closure(&[a.clone(), b.clone()], 5000).unwrap().exact().unwrap();
    assert_eq!(order as usize, naive_order(&[a, b]));
    assert_eq!(gl_order(2, 9) % order as u128, 0);
}

#[test]
fn o3_generation_for_small_primes() {
    for (ell, order) in [(5u64, 240u64), (11, 2640), (13, 4368)] {
        let t = v_mod(ell);
        let report = o3_recognition(t.entries(), ell, DEFAULT_CAP).unwrap();
        assert_eq!(report.order, GroupOrder::Exact(order), "ell = {ell}");
        assert_eq!(order, 2 * ell * (ell * ell - 1));
        assert_eq!(report.recognized.as_deref(), Some(format!("O3(F_{ell})").as_str()));
        assert!(report.absolutely_irreducible);
        let g = report.invariant_gram.unwrap();
        assert_eq!(g, g.transpose());
        assert!(!g.det().unwrap().is_zero());
        if ell == 5 {
            for x in group_elements(t.entries(), DEFAULT_CAP).unwrap().unwrap() {
                assert_eq!(&(&x.transpose() * &g) * &x, g);
            }
        }
    }
}

#[test]
fn gram_preserved_by_whole_group_mod_13() {
    let t = v_mod(13);
    let g = o3_recognition(t.entries(), 13, DEFAULT_CAP).unwrap().invariant_gram.unwrap();
    let els = group_elements(t.entries(), DEFAULT_CAP).unwrap().unwrap();
    assert_eq!(els.len(), 4368);
    assert!(els.iter().all(|x| &(&x.transpose() * &g) * x == g));
}

#[test]
fn torus_element_order() {
    for ell in [5u64, 11, 13] {
        let t = v_mod(ell);
        let m = &t.entries()[0] * &t.entries()[1];
        let ord = element_order(&m, DEFAULT_CAP).unwrap().unwrap();
        assert_eq!((ell + 1) % ord, 0, "ell = {ell}, order {ord}");
        assert_ne!((ell - 1) % ord, 0, "ell = {ell}, order {ord}");
    }
}

#[test]
fn characteristic_three() {
    let t = v_mod(3);
    let report = o3_recognition(t.entries(), 3, DEFAULT_CAP).unwrap();
    assert_eq!(report.order, GroupOrder::Exact(48));
    assert_eq!(report.recognized.as_deref(), Some("O3(F_3)"));
}

#[test]
fn recognition_preconditions() {
    let t = v_mod(5);
    assert!(matches!(o3_recognition(t.entries(), 7, DEFAULT_CAP), Err(Error::Precondition(_))));
    let f = FieldDescriptor::finite(5, 1).unwrap();
    assert!(matches!(o3_recognition(&[Matrix::identity(f, 2)], 5, DEFAULT_CAP), Err(Error::Precondition(_))));
    let u = Matrix::from_ints(f, &[[2, 0, 0], [0, 1, 0], [0, 0, 1]]);
    assert_eq!(o3_recognition(&[u], 5, DEFAULT_CAP).unwrap_err(), Error::NoInvariantForm);
}

#[test]
fn absolute_irreducibility_of_reduced_fixture() {
    for ell in [5u64, 7, 11] {
        assert!(absolutely_irreducible(v_mod(ell).entries()));
    }
    let f = FieldDescriptor::finite(5, 1).unwrap();
    let reducible = [Matrix::from_ints(f, &[[1, 1], [0, 1]]), Matrix::from_ints(f, &[[2, 3], [0, 3]])];
    assert!(!absolutely_irreducible(&reducible));
}

#[test]
fn irreducible_over_extension_only() {
    // rotation by a primitive 4th root of unity: irreducible over F_7, split over F_49
    let f = FieldDescriptor::finite(7, 1).unwrap();
    let r = Matrix::from_ints(f, &[[0, 1], [-1, 0]]);
    assert!(!absolutely_irreducible(&[r]));
}

#[test]
fn primitivity_of_reduced_fixture() {
    let rep = primitivity_bound(&v_mod(11)).unwrap();
    assert_eq!((rep.n, rep.m, rep.x), (3, 6, 3));
    assert_eq!(rep.bound, Rational64::from_integer(3));
    assert!(rep.primitive);
    assert_eq!(rep.per_block.len(), 1);
    assert_eq!(rep.per_block[0].k, 1);
}

#[test]
fn primitivity_needs_irreducibility() {
    let f = FieldDescriptor::finite(7, 1).unwrap();
    let a = Matrix::from_ints(f, &[[2, 0], [0, 3]]);
    let b = a.inverse().unwrap();
    let t = MonodromyTuple::from_finite(vec![a, b], None).unwrap();
    assert!(matches!(primitivity_bound(&t), Err(Error::Precondition(_))));
}

#[test]
fn primitivity_of_sl_demo() {
    let rep = sl_demo(3, 4).unwrap();
    let t = reduce_mod(&rep.tuple, 13).unwrap();
    assert_eq!(t.field(), FieldDescriptor::finite(13, 1).unwrap());
    let pb = primitivity_bound(&t).unwrap();
    assert_eq!(pb.n, 9);
    assert_eq!((pb.m, pb.x), (22, 2));
    let ks: Vec<usize> = pb.per_block.iter().map(|b| b.k).collect();
    assert_eq!(ks, vec![1, 3]);
    assert_eq!(pb.per_block[0].bound, Rational64::new(5, 2));
    assert_eq!(pb.per_block[1].bound, Rational64::new(15, 2));
    // blocks of the largest admissible dimension are already forced past n/2
    assert!(pb.per_block[1].bound > Rational64::new(9, 2));
    assert!(pb.primitive);
}

#[test]
fn monomial_group_is_not_primitive() {
    // generators permuting two lines: imprimitive with blocks of dimension 1
    let f = FieldDescriptor::finite(7, 1).unwrap();
    let a = Matrix::from_ints(f, &[[0, 1], [1, 0]]);
    let b = Matrix::from_ints(f, &[[0, 2], [4, 0]]);
    let c = (&a * &b).inverse().unwrap();
    let t = MonodromyTuple::from_finite(vec![a, b, c], None).unwrap();
    assert!(absolutely_irreducible(t.entries()));
    assert!(!primitivity_bound(&t).unwrap().primitive);
}
