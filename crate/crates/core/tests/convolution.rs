use middleconv::convolution::*;
use middleconv::linalg::JordanData;
use middleconv::{fixtures, Error, FieldDescriptor, Matrix, MonodromyTuple, Scalar};
use num_rational::BigRational;
use rand::Rng;

mod common;
use common::*;

fn int_points(v: &[i64]) -> Option<Vec<BigRational>> {
    Some(v.iter().map(|&x| BigRational::from_integer(x.into())).collect())
}

fn rank_one(vals: &[Scalar]) -> MonodromyTuple {
    MonodromyTuple::from_finite(vals.iter().map(|v| Matrix::scalar(v, 1)).collect(), None).unwrap()
}

fn local_data(t: &MonodromyTuple) -> Vec<String> {
    let mut v: Vec<String> = t.entries()[..t.r()].iter().map(|e| e.jordan_data().unwrap().to_string()).collect();
    v.sort();
    v
}

#[test]
fn l_star_l_matches_the_reference_tuple() {
    let l = fixtures::tuple("L").unwrap();
    let out = middle_convolution(&ConvolutionInput::new(l.clone(), l).unwrap()).unwrap();
    let expected = fixtures::tuple("LstarL").unwrap();
    assert_eq!(out.points(), expected.points());
    assert!(equivalent(&out, &expected));
    let one = Scalar::one(q());
    for e in &out.entries()[..3] {
        assert_eq!(e.jordan_data().unwrap(), JordanData::new(vec![middleconv::JordanBlock { eigenvalue: one.clone(), size: 2 }]));
    }
}

#[test]
fn second_convolution_matches_m1_to_m4() {
    let inp = ConvolutionInput::new(fixtures::tuple("LstarL").unwrap(), fixtures::tuple("Kummer-1").unwrap()).unwrap();
    let out = middle_convolution(&inp).unwrap();
    assert!(equivalent(&out, &fixtures::tuple("V").unwrap()));
    assert_eq!(rank_formula(&inp).unwrap(), RankFormula { value: 3, precondition_holds: true });
}

#[test]
fn convolution_commutes_on_the_fixture() {
    let inp = ConvolutionInput::new(fixtures::tuple("Kummer-1").unwrap(), fixtures::tuple("LstarL").unwrap()).unwrap();
    let out = middle_convolution(&inp).unwrap();
    assert!(equivalent(&out, &fixtures::tuple("V").unwrap()));
}

#[test]
fn mc_lambda_agrees_with_kummer_convolution() {
    let minus = Scalar::from_i64(q(), -1);
    for name in ["L", "LstarL"] {
        let t = fixtures::tuple(name).unwrap();
        let via_mc = mc_lambda(&t, &minus).unwrap();
        let k = kummer(&minus).unwrap().with_points(int_points(&[0])).unwrap();
        let via_conv = middle_convolution(&ConvolutionInput::new(t, k).unwrap()).unwrap();
        assert!(equivalent(&via_mc, &via_conv), "{name}");
    }
}

#[test]
fn mc_lambda_on_random_convolution_sheaves() {
    let mut g = rng(41);
    let mut done = 0;
    while done < 12 {
        let f = if done % 2 == 0 { f7() } else { FieldDescriptor::cyclotomic(4).unwrap() };
        let t = random_structured_tuple(f, g.gen_range(1..=2), g.gen_range(2..=3), &mut g);
        if !is_convolution_sheaf(&t).unwrap().passes() {
            continue;
        }
        let roots = f.roots_of_unity();
        let lambda = roots[g.gen_range(0..roots.len())].clone();
        if lambda.is_one() {
            continue;
        }
        let out = mc_lambda(&t, &lambda).unwrap();
        let k = kummer(&lambda).unwrap().with_points(int_points(&[0])).unwrap();
        let conv = middle_convolution(&ConvolutionInput::new(t.clone(), k).unwrap()).unwrap();
        assert!(equivalent(&out, &conv));
        assert_eq!(out.dim() as i64, mc_lambda_rank(&t, &lambda));
        if t.infinity().jordan_data().is_ok() {
            let predicted = predict_infinity_jordan(&t, &lambda).unwrap();
            assert_eq!(predicted, out.infinity().jordan_data().unwrap());
        }
        if out.dim() > 0 {
            let back = mc_lambda(&out, &lambda.inv().unwrap()).unwrap();
            assert!(equivalent(&back, &t));
        }
        done += 1;
    }
}

#[test]
fn mc_lambda_errors() {
    let l = fixtures::tuple("L").unwrap();
    assert_eq!(mc_lambda(&l, &Scalar::one(q())), Err(Error::LambdaIsOne));
    assert!(matches!(mc_lambda(&l, &Scalar::zero(q())), Err(Error::Precondition(_))));
    let triv = MonodromyTuple::new(vec![Matrix::identity(q(), 2); 3], None).unwrap();
    assert_eq!(mc_lambda(&triv, &Scalar::from_i64(q(), 2)).unwrap().dim(), 0);
}

#[test]
fn infinity_prediction_on_the_fixture() {
    let minus = Scalar::from_i64(q(), -1);
    let ll = fixtures::tuple("LstarL").unwrap();
    let v = fixtures::tuple("V").unwrap();
    assert_eq!(predict_infinity_jordan(&ll, &minus).unwrap(), v.infinity().jordan_data().unwrap());
    let l = fixtures::tuple("L").unwrap();
    assert_eq!(predict_infinity_jordan(&l, &minus).unwrap().to_string(), "J(-1,2)");
}

fn check_local_prediction(inp: &ConvolutionInput) {
    let conv = middle_convolution_detailed(inp).unwrap();
    let predicted = predict_local_jordan(inp).unwrap();
    assert_eq!(predicted.len(), conv.deltas.len());
    for ((i, j), jd) in predicted {
        let actual = conv.delta(i, j).unwrap().jordan_data().unwrap();
        assert_eq!(jd, actual, "D({i},{j})");
    }
}

#[test]
fn local_predictions_on_fixtures() {
    let l = fixtures::tuple("L").unwrap().with_points(None).unwrap();
    check_local_prediction(&ConvolutionInput::new(l.clone(), l).unwrap());
    let ll = fixtures::tuple("LstarL").unwrap();
    check_local_prediction(&ConvolutionInput::new(ll, fixtures::tuple("Kummer-1").unwrap()).unwrap());
}

#[test]
fn local_predictions_on_the_sl_pipeline() {
    let f = FieldDescriptor::cyclotomic(12).unwrap();
    let f1 = dihedral_tuple(3, 4, f).unwrap();
    let minus = Scalar::from_i64(f, -1);
    let f2 = kummer(&minus).unwrap().with_points(int_points(&[0])).unwrap();
    let first = ConvolutionInput::new(f1, f2).unwrap();
    check_local_prediction(&first);
    let b = middle_convolution(&first).unwrap();
    let mut twisted = b.entries().to_vec();
    twisted[0] = -&twisted[0];
    let last = twisted.len() - 1;
    twisted[last] = -&twisted[last];
    let g = MonodromyTuple::new(twisted, b.points().map(|p| p.to_vec())).unwrap();
    let i = Scalar::root_of_unity(f, 3).unwrap();
    let f3 = rank_one(&[i.clone(), -&i]);
    check_local_prediction(&ConvolutionInput::new(g, f3).unwrap());
}

#[test]
fn local_prediction_case_table() {
    let c4 = FieldDescriptor::cyclotomic(4).unwrap();
    let minus = Scalar::from_i64(c4, -1);
    let i = Scalar::zeta(c4);
    let check = |a: Matrix, expect: &str| {
        let left = MonodromyTuple::from_finite(vec![a.clone(), a.inverse().unwrap()], None).unwrap();
        let right = rank_one(std::slice::from_ref(&minus));
        let pred = predict_local_jordan(&ConvolutionInput::new(left, right).unwrap()).unwrap();
        assert!(pred[0].1.to_string().starts_with(expect), "{} vs {expect}", pred[0].1);
    };
    check(Matrix::scalar(&minus, 1), "J(1,2)");
    check(Matrix::from_ints(c4, &[[1, 1], [0, 1]]), "J(-1,1)");
    check(Matrix::scalar(&i, 1), "J(-z,1)");
}

#[test]
fn generic_output_dimension_matches_rank_formula() {
    let mut g = rng(77);
    let mut with_precondition = 0;
    for n in 0..40 {
        let f = if n % 4 == 0 { q() } else { f7() };
        let (n1, n2) = (g.gen_range(1..=2), g.gen_range(1..=2));
        let left = random_structured_tuple(f, n1, g.gen_range(1..=3), &mut g);
        let right = random_structured_tuple(f, n2, g.gen_range(1..=2), &mut g);
        let inp = ConvolutionInput::new(left, right).unwrap();
        assert!(inp.is_generic());
        let conv = middle_convolution_detailed(&inp).unwrap();
        assert_eq!(conv.tuple.dim(), conv.circ.cohomology_spaces().unwrap().parabolic_dim());
        let rf = rank_formula(&inp).unwrap();
        if rf.precondition_holds {
            assert_eq!(conv.tuple.dim() as i64, rf.value, "{inp:?}");
            with_precondition += 1;
        }
    }
    assert!(with_precondition >= 20);
}

#[test]
fn swapping_factors_keeps_rank_and_local_data() {
    let mut g = rng(5);
    for _ in 0..10 {
        let a = random_structured_tuple(f7(), 2, 2, &mut g);
        let b = random_structured_tuple(f7(), 1, 2, &mut g);
        let ab = middle_convolution(&ConvolutionInput::new(a.clone(), b.clone()).unwrap()).unwrap();
        let ba = middle_convolution(&ConvolutionInput::new(b, a).unwrap()).unwrap();
        assert_eq!(ab.dim(), ba.dim());
        if ab.dim() > 0 {
            let (la, lb) = (local_data(&ab), local_data(&ba));
            assert_eq!(la.len(), lb.len());
            assert_eq!(la, lb);
        }
    }
}

#[test]
fn convolution_is_additive() {
    let mut g = rng(11);
    let f = f7();
    let b = rank_one(&[Scalar::from_i64(f, 3), Scalar::from_i64(f, 2)]);
    for _ in 0..6 {
        let a1 = random_structured_tuple(f, 1, 2, &mut g);
        let a2 = random_structured_tuple(f, 2, 2, &mut g);
        let sum: Vec<Matrix> = a1
            .entries()
            .iter()
            .zip(a2.entries())
            .map(|(x, y)| {
                let mut m = Matrix::zeros(f, 3, 3);
                m.set_block(0, 0, x);
                m.set_block(1, 1, y);
                m
            })
            .collect();
        let s = MonodromyTuple::new(sum, None).unwrap();
        let dim = |t: MonodromyTuple| middle_convolution(&ConvolutionInput::new(t, b.clone()).unwrap()).unwrap().dim();
        assert_eq!(dim(s), dim(a1) + dim(a2));
    }
}

#[test]
fn layout_errors_are_reported() {
    let l = fixtures::tuple("L").unwrap();
    let wide = l.clone().with_points(int_points(&[0, 5000])).unwrap();
    let k = rank_one(&[Scalar::from_i64(q(), -1), Scalar::from_i64(q(), -1)]);
    assert!(matches!(middle_convolution(&ConvolutionInput::new(wide, k).unwrap()), Err(Error::LayoutError(_))));
    let c4 = FieldDescriptor::cyclotomic(4).unwrap();
    let other = rank_one(&[Scalar::zeta(c4)]);
    assert!(matches!(ConvolutionInput::new(l, other), Err(Error::FieldMismatch(..))));
}

#[test]
fn sheaf_checks() {
    assert!(is_convolution_sheaf(&fixtures::tuple("L").unwrap()).unwrap().passes());
    assert!(is_convolution_sheaf(&fixtures::tuple("LstarL").unwrap()).unwrap().passes());
    let triv = MonodromyTuple::new(vec![Matrix::identity(q(), 1); 3], None).unwrap();
    let rep = is_convolution_sheaf(&triv).unwrap();
    assert!(rep.violations.iter().any(|v| v.condition == SheafCondition::StarStar && v.tau.is_one()));
}

#[test]
fn irreducibility_examples() {
    let f = FieldDescriptor::cyclotomic(12).unwrap();
    let rot = Matrix::diagonal(f, &[Scalar::root_of_unity(f, 4).unwrap(), Scalar::root_of_unity(f, 8).unwrap()]);
    let refl = Matrix::from_ints(f, &[[0, 1], [1, 0]]);
    let d3 = MonodromyTuple::new(vec![refl.clone(), refl, rot.clone(), rot.inverse().unwrap(), Matrix::identity(f, 2)], None).unwrap();
    let minus = Scalar::from_i64(f, -1);
    assert_eq!(irreducibility_criterion(&d3, std::slice::from_ref(&minus)).unwrap(), (Irreducibility::Irreducible, 2));
    let l = fixtures::tuple("L").unwrap();
    assert_eq!(irreducibility_criterion(&l, &[Scalar::from_i64(q(), -1)]).unwrap(), (Irreducibility::Inconclusive, 0));
    let ll = fixtures::tuple("LstarL").unwrap();
    assert!(matches!(irreducibility_criterion(&ll, &[Scalar::from_i64(q(), -1)]), Err(Error::Precondition(_))));
    assert!(matches!(irreducibility_criterion(&l, &[Scalar::one(q())]), Err(Error::Precondition(_))));
}

#[test]
fn pairing_chain_for_v() {
    let orth = PairingInfo::new(1, 0).unwrap();
    let ll = pairing_convolve(orth, orth);
    assert_eq!((ll.sym, ll.twist), (-1, 1));
    let v = pairing_convolve(ll, orth);
    assert_eq!((v.sym, v.twist), (1, 2));
    assert!(PairingInfo::new(2, 0).is_err());
}

#[test]
fn sl_demo_ranks() {
    let r4 = sl_demo(3, 4).unwrap();
    assert_eq!((r4.rank, r4.intermediate_rank), (9, 4));
    assert!(r4.all_ok());
    let r5 = sl_demo(3, 5).unwrap();
    assert_eq!(r5.rank, 13);
    assert!(r5.all_ok());
    let d3 = sl_demo(1, 4).unwrap();
    assert!(d3.all_ok());
    assert!(sl_demo(2, 4).is_err());
    assert!(sl_demo(3, 3).is_err());
}

#[test]
fn mc_lambda_when_infinity_has_eigenvalue_lambda() {
    let f = f7();
    let a1 = Matrix::from_ints(f, &[[3, 4], [1, 0]]);
    let a2 = Matrix::from_ints(f, &[[5, 0], [1, 4]]);
    let t = MonodromyTuple::from_finite(vec![a1, a2], None).unwrap();
    let lambda = Scalar::from_i64(f, 3);
    let once = mc_lambda(&t, &lambda).unwrap();
    assert_eq!(once.dim(), 4);
    let li = lambda.inv().unwrap();
    assert!(once.infinity().minus_scalar(&li).rank() < 4);
    let back = mc_lambda(&once, &li).unwrap();
    let via_conv = middle_convolution(&ConvolutionInput::new(once, kummer(&li).unwrap()).unwrap()).unwrap();
    assert_eq!(back.dim(), 2);
    assert!(equivalent(&back, &via_conv));
    assert!(equivalent(&back, &t));
}
