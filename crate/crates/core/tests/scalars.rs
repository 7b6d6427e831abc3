use middleconv::{FieldDescriptor, Poly, Scalar};
use proptest::prelude::*;

mod common;

fn build(f: FieldDescriptor, c: &[(i64, i64)]) -> Scalar {
    match f {
        FieldDescriptor::Finite(_) => Scalar::from_finite_coeffs(f, c[0].0.unsigned_abs(), c[1].0.unsigned_abs()).unwrap(),
        _ => {
            let z = if f == FieldDescriptor::Rational { Scalar::one(f) } else { Scalar::zeta(f) };
            let mut acc = Scalar::zero(f);
            let mut pw = Scalar::one(f);
            for &(n, d) in c {
                acc = &acc + &(&pw * &Scalar::from_ratio(f, n, d).unwrap());
                pw = &pw * &z;
            }
            acc
        }
    }
}

fn fields() -> Vec<FieldDescriptor> {
    vec![
        FieldDescriptor::Rational,
        FieldDescriptor::cyclotomic(12).unwrap(),
        FieldDescriptor::cyclotomic(5).unwrap(),
        FieldDescriptor::finite(7, 1).unwrap(),
        FieldDescriptor::finite(7, 2).unwrap(),
    ]
}

fn coeffs() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-6i64..=6, 1i64..=4), 4)
}

proptest! {
    #![proptest_config(common::config(64))]

    #[test]
    fn field_axioms(fi in 0usize..5, a in coeffs(), b in coeffs(), c in coeffs()) {
        let f = fields()[fi];
        let (a, b, c) = (build(f, &a), build(f, &b), build(f, &c));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        } else {
            prop_assert!(a.inv().is_err());
        }
    }

    #[test]
    fn display_parse_round_trip(fi in 0usize..5, a in coeffs()) {
        let f = fields()[fi];
        let a = build(f, &a);
        prop_assert_eq!(Scalar::parse(&a.to_string(), f).unwrap(), a);
    }

    #[test]
    fn pow_matches_repeated_multiplication(fi in 0usize..5, a in coeffs(), e in 0i64..7) {
        let f = fields()[fi];
        let a = build(f, &a);
        let naive = (0..e).fold(Scalar::one(f), |acc, _| &acc * &a);
        prop_assert_eq!(a.pow(e).unwrap(), naive);
    }

    #[test]
    fn coercion_is_a_ring_map(a in coeffs(), b in coeffs()) {
        let small = FieldDescriptor::cyclotomic(4).unwrap();
        let big = FieldDescriptor::cyclotomic(12).unwrap();
        let (a, b) = (build(small, &a[..2]), build(small, &b[..2]));
        let up = |x: &Scalar| x.coerce_to(big).unwrap();
        prop_assert_eq!(up(&(&a * &b)), &up(&a) * &up(&b));
        prop_assert_eq!(up(&(&a + &b)), &up(&a) + &up(&b));
    }
}

#[test]
fn roots_of_unity_have_the_right_orders() {
    for f in fields() {
        let roots = f.roots_of_unity();
        let n = roots.len() as i64;
        for r in &roots {
            assert!(r.pow(n).unwrap().is_one(), "{f}: {r}");
        }
        let mut sorted = roots.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), roots.len());
    }
}

#[test]
fn zeta_satisfies_its_cyclotomic_polynomial() {
    for n in [1u32, 2, 3, 4, 5, 6, 8, 9, 12, 15, 20] {
        let f = FieldDescriptor::cyclotomic(n).unwrap();
        let phi = Poly::from_ints(f, &middleconv::scalar::cyclotomic_poly(n));
        assert!(phi.eval(&Scalar::zeta(f)).is_zero(), "n = {n}");
        assert_eq!(phi.degree() as usize, f.degree());
    }
}

#[test]
fn field_descriptor_text_round_trip() {
    for f in fields() {
        assert_eq!(f.to_string().parse::<FieldDescriptor>().unwrap(), f);
    }
    assert!("cyclotomic:0".parse::<FieldDescriptor>().is_err());
    assert!("finite:9".parse::<FieldDescriptor>().is_err());
    assert!("reals".parse::<FieldDescriptor>().is_err());
}

#[test]
fn quadratic_characters_are_multiplicative() {
    for f in [FieldDescriptor::finite(11, 1).unwrap(), FieldDescriptor::finite(5, 2).unwrap()] {
        let els = f.finite_elements();
        for a in els.iter().step_by(3) {
            for b in els.iter().step_by(5) {
                let lhs = (a * b).quadratic_character().unwrap();
                assert_eq!(lhs, a.quadratic_character().unwrap() * b.quadratic_character().unwrap());
            }
        }
    }
}
