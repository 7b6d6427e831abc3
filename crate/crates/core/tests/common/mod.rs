#![allow(dead_code)]

use middleconv::linalg::conjugacy_solve;
use middleconv::{FieldDescriptor, Matrix, MonodromyTuple, Scalar};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 20_240_601;

pub fn rng(salt: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(SEED ^ salt)
}

pub fn q() -> FieldDescriptor {
    FieldDescriptor::Rational
}

pub fn f7() -> FieldDescriptor {
    FieldDescriptor::finite(7, 1).unwrap()
}

pub fn random_scalar(f: FieldDescriptor, rng: &mut ChaCha8Rng) -> Scalar {
    match f {
        FieldDescriptor::Finite(_) => {
            let els = f.finite_elements();
            els[rng.gen_range(0..els.len())].clone()
        }
        FieldDescriptor::Rational => Scalar::from_i64(f, rng.gen_range(-3..=3)),
        FieldDescriptor::Cyclotomic(_) => {
            let z = Scalar::zeta(f);
            let k = rng.gen_range(0..4);
            &z.pow(k).unwrap() * &Scalar::from_i64(f, rng.gen_range(-2..=2))
        }
    }
}

pub fn random_matrix(f: FieldDescriptor, d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let data = (0..d * d).map(|_| random_scalar(f, rng)).collect();
    Matrix::new(f, d, d, data).unwrap()
}

/// Invertible matrix with small entries: a product of elementary matrices and a
/// diagonal of units, which keeps rational entries from growing.
pub fn random_invertible(f: FieldDescriptor, d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let m = random_matrix(f, d, rng);
        if !m.det().unwrap().is_zero() {
            let det = m.det().unwrap();
            if f != FieldDescriptor::Rational || det.is_one() || (-&det).is_one() {
                return m;
            }
        }
    }
}

pub fn random_tuple(f: FieldDescriptor, d: usize, r: usize, rng: &mut ChaCha8Rng) -> MonodromyTuple {
    let finite: Vec<Matrix> = (0..r).map(|_| random_invertible(f, d, rng)).collect();
    MonodromyTuple::from_finite(finite, None).unwrap()
}

/// Finite entries of finite order: conjugates of diagonal or unipotent matrices.
pub fn random_structured_tuple(f: FieldDescriptor, d: usize, r: usize, rng: &mut ChaCha8Rng) -> MonodromyTuple {
    let roots = f.roots_of_unity();
    let mut finite = Vec::new();
    for _ in 0..r {
        let p = random_invertible(f, d, rng);
        let pinv = p.inverse().unwrap();
        let mut core = Matrix::zeros(f, d, d);
        for i in 0..d {
            core.set(i, i, roots[rng.gen_range(0..roots.len())].clone());
        }
        if d > 1 && rng.gen_bool(0.3) {
            let v = core.get(0, 0).clone();
            core.set(1, 1, v);
            core.set(0, 1, Scalar::one(f));
        }
        finite.push(&(&pinv * &core) * &p);
    }
    MonodromyTuple::from_finite(finite, None).unwrap()
}

pub fn equivalent(a: &MonodromyTuple, b: &MonodromyTuple) -> bool {
    a.field() == b.field()
        && a.dim() == b.dim()
        && a.entries().len() == b.entries().len()
        && conjugacy_solve(a.entries(), b.entries()).unwrap().is_some()
}

pub fn config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(SEED),
        failure_persistence: None,
        ..Default::default()
    }
}
