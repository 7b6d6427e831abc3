mod common;

use common::{config, q};
use middleconv::error::Error;
use middleconv::fixtures;
use middleconv::k3count::{
    count_affine, default_fibre, frobenius_eigenvalues, frobenius_from_traces, intersection_matrix_at,
    intersection_matrix_det, legendre, rational, trace_frobenius,
};
use middleconv::{FieldDescriptor, Poly, Scalar};
use num_rational::{BigRational, Rational64};
use proptest::prelude::*;

/// Counts w² = f(x, y) by listing the squares of the field directly.
fn naive_count(p: u64, z: i64) -> u64 {
    let p_i = p as i64;
    let mut squares = vec![0u64; p as usize];
    for w in 0..p_i {
        squares[(w * w % p_i) as usize] += 1;
    }
    let mut n = 0;
    for x in 0..p_i {
        for y in 0..p_i {
            let v = (x * x - 1) * ((y - x) * (y - x) - 1) * (y - z);
            n += squares[v.rem_euclid(p_i) as usize];
        }
    }
    n
}

/// The same over F_{p²} built as F_p[i]/(i² − c) for a non-residue c.
fn naive_count_square(p: u64) -> u64 {
    let p_i = p as i64;
    let c = (2..p_i).find(|&c| legendre(c, p) == -1).unwrap();
    let mul = |a: (i64, i64), b: (i64, i64)| ((a.0 * b.0 + c * a.1 * b.1).rem_euclid(p_i), (a.0 * b.1 + a.1 * b.0).rem_euclid(p_i));
    let sub = |a: (i64, i64), b: (i64, i64)| ((a.0 - b.0).rem_euclid(p_i), (a.1 - b.1).rem_euclid(p_i));
    let els: Vec<(i64, i64)> = (0..p_i).flat_map(|a| (0..p_i).map(move |b| (a, b))).collect();
    let idx = |a: (i64, i64)| (a.0 * p_i + a.1) as usize;
    let mut squares = vec![0u64; els.len()];
    for &w in &els {
        squares[idx(mul(w, w))] += 1;
    }
    let one = (1, 0);
    let z = (1, 0);
    let mut n = 0;
    for &x in &els {
        for &y in &els {
            let d = sub(y, x);
            let v = mul(mul(sub(mul(x, x), one), sub(mul(d, d), one)), sub(y, z));
            n += squares[idx(v)];
        }
    }
    n
}

#[test]
fn counts_match_naive_enumeration() {
    for p in [5u64, 7, 11] {
        for z in [1i64, 2, 3] {
            assert_eq!(count_affine(p, &rational(z)).unwrap(), naive_count(p, z), "p = {p}, z = {z}");
        }
    }
    for p in [5u64, 7] {
        assert_eq!(count_affine(p * p, &default_fibre()).unwrap(), naive_count_square(p), "q = {p}^2");
    }
}

#[test]
fn counts_and_traces_match_table() {
    let z = default_fibre();
    for (p, n, t_p, t_p2) in fixtures::k3_table() {
        let rec = trace_frobenius(p, &z).unwrap();
        assert_eq!(rec.n, n, "N({p})");
        assert_eq!(rec.trace, t_p, "t_{p}");
        assert_eq!(trace_frobenius(p * p, &z).unwrap().trace, t_p2, "t_{p}^2");
    }
}

#[test]
fn count_bounds_and_parity() {
    let z = default_fibre();
    for q_ in [5u64, 7, 11, 13, 25, 49] {
        let n = count_affine(q_, &z).unwrap();
        assert!(n <= 2 * q_ * q_);
        // N = q² + Σχ(f) with χ(f) = ±1 off the zero set of f
        let nonzero = (q_ * q_ - count_zeros(q_)) as i64;
        assert_eq!((n as i64 - (q_ * q_) as i64).rem_euclid(2), nonzero.rem_euclid(2), "q = {q_}");
    }
}

fn count_zeros(q_: u64) -> u64 {
    let f = if q_ < 25 { FieldDescriptor::finite(q_, 1) } else { FieldDescriptor::finite((q_ as f64).sqrt() as u64, 2) }
        .unwrap();
    let one = Scalar::one(f);
    let els = f.finite_elements();
    let mut c = 0;
    for x in &els {
        for y in &els {
            let d = y - x;
            if (&(&(&(x * x) - &one) * &(&(&d * &d) - &one)) * &(y - &one)).is_zero() {
                c += 1;
            }
        }
    }
    c
}

#[test]
fn frobenius_data_match_reference_values() {
    for (p, u, d) in fixtures::reference_alphas() {
        let fd = frobenius_eigenvalues(p).unwrap();
        assert!(fd.verified, "p = {p}");
        assert!(!fd.opposite_sign_verifies, "p = {p}");
        assert_eq!(fd.s3, legendre(3, p));
        assert_eq!(fd.s_minus1, legendre(-1, p));
        assert_eq!(fd.u * fd.u - fd.d, Rational64::from_integer((p * p) as i64));
        if p == 29 {
            // the tabulated numerator is inconsistent with the tabulated radicand
            assert_eq!((u, d), (-4, -216));
            assert_ne!(Rational64::from_integer(u * u - d), Rational64::from_integer(29 * 29));
            assert_eq!((fd.u, fd.d), (Rational64::from_integer(25), Rational64::from_integer(-216)));
            assert_eq!(fd.alpha_string(), "(25+sqrt(-216))/29");
        } else {
            assert_eq!((fd.u, fd.d), (Rational64::from_integer(u), Rational64::from_integer(d)), "p = {p}");
        }
    }
}

#[test]
fn reference_alpha_strings() {
    assert_eq!(frobenius_eigenvalues(5).unwrap().alpha_string(), "(1+sqrt(-24))/5");
    assert_eq!(frobenius_eigenvalues(11).unwrap().alpha_string(), "(-7+sqrt(-72))/11");
    assert_eq!(frobenius_eigenvalues(17).unwrap().alpha_string(), "1");
}

#[test]
fn eigenvalue_identity_in_a_number_field() {
    // α + α⁻¹ + s3 = t_p/p and α² + α⁻² + 1 = t_{p²}/p² inside Q(√d)
    for (p, _, t_p, t_p2) in fixtures::k3_table() {
        let fd = frobenius_from_traces(p, t_p, t_p2).unwrap();
        let pr = Rational64::from_integer(p as i64);
        let tr = Rational64::from_integer(2) * fd.u / pr;
        assert_eq!(tr + Rational64::from_integer(fd.s3 as i64), Rational64::new(t_p, p as i64));
        let tr2 = tr * tr - Rational64::from_integer(2);
        assert_eq!(tr2 + Rational64::from_integer(1), Rational64::new(t_p2, (p * p) as i64));
    }
}

#[test]
fn inconsistent_traces_fail_verification() {
    assert_eq!(frobenius_from_traces(5, -3, -20), Err(Error::VerificationFailed(5)));
}

#[test]
fn small_and_composite_inputs() {
    assert_eq!(frobenius_eigenvalues(3), Err(Error::SmallPrime(3)));
    assert!(matches!(frobenius_eigenvalues(15), Err(Error::Precondition(_))));
    assert!(matches!(count_affine(35, &default_fibre()), Err(Error::Precondition(_))));
    let seventh = BigRational::new(1.into(), 7.into());
    assert!(count_affine(7, &seventh).is_err());
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn legendre_is_multiplicative(a in -10_000i64..10_000, b in -10_000i64..10_000,
                                  p in prop::sample::select(vec![5u64, 7, 11, 13, 101, 65_537])) {
        prop_assert_eq!(legendre(a * b, p), legendre(a, p) * legendre(b, p));
    }

    #[test]
    fn legendre_counts_square_roots(a in 0i64..97) {
        let roots = (0..97i64).filter(|w| w * w % 97 == a).count() as i64;
        prop_assert_eq!(roots, 1 + legendre(a, 97) as i64);
    }
}

fn det_at(x: i64) -> Scalar {
    intersection_matrix_at(&rational(x)).det().unwrap()
}

#[test]
fn determinant_polynomial_by_interpolation() {
    // three evaluations pin a quadratic; the others confirm the degree
    let xs = [-3i64, -2, -1, 0, 1, 2, 5];
    let vals: Vec<Scalar> = xs.iter().map(|&x| det_at(x)).collect();
    let f = q();
    let mut interp = Poly::zero(f);
    for i in 0..3 {
        let mut basis = Poly::one(f);
        let mut denom = Scalar::one(f);
        for j in 0..3 {
            if i != j {
                basis = basis.mul(&Poly::from_ints(f, &[-xs[j], 1]));
                denom = &denom * &Scalar::from_i64(f, xs[i] - xs[j]);
            }
        }
        interp = interp.add(&basis.scale(&(&vals[i] * &denom.inv().unwrap())));
    }
    assert_eq!(interp, Poly::from_ints(f, &[16384, 24576, 8192]));
    for (x, v) in xs.iter().zip(&vals) {
        assert_eq!(&interp.eval(&Scalar::from_i64(f, *x)), v);
    }
    assert_eq!(intersection_matrix_det().unwrap(), interp);
}

#[test]
fn determinant_special_values() {
    assert_eq!(det_at(0), Scalar::from_i64(q(), 16384));
    assert_eq!(det_at(-1), Scalar::from_i64(q(), 0));
    assert_eq!(det_at(-2), Scalar::from_i64(q(), 0));
    let m = intersection_matrix_at(&rational(3));
    assert_eq!(m, m.transpose());
}
