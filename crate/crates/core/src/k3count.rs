//! Point counts on the K3 fibre w² = (x²−1)((y−x)²−1)(y−z) and the derived
//! Frobenius data.

use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::poly::Poly;
use crate::scalar::{is_prime, powmod, FieldDescriptor, Scalar};

/// Legendre symbol (a/p) for an odd prime p.
pub fn legendre(a: i64, p: u64) -> i8 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if powmod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// (a/q) for q = p^k, with (a/p²) = (a/p)².
pub fn legendre_q(a: i64, p: u64, k: u8) -> i8 {
    let s = legendre(a, p);
    if k == 2 {
        s * s
    } else {
        s
    }
}

fn check_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    if p <= 3 {
        return Err(Error::SmallPrime(p));
    }
    Ok(())
}

/// Splits q into (p, k) with k ∈ {1, 2}.
pub fn split_prime_power(q: u64) -> Result<(u64, u8)> {
    if is_prime(q) {
        return Ok((q, 1));
    }
    let r = (q as f64).sqrt().round() as u64;
    for s in [r.saturating_sub(1), r, r + 1] {
        if s * s == q && is_prime(s) {
            return Ok((s, 2));
        }
    }
    Err(Error::Precondition(format!("{q} is neither a prime nor the square of a prime")))
}

/// N(q) = #{(w,x,y) ∈ F_q³ : w² = (x²−1)((y−x)²−1)(y−z)}.
pub fn count_affine(q: u64, z: &BigRational) -> Result<u64> {
    let (p, k) = split_prime_power(q)?;
    check_prime(p)?;
    let f = FieldDescriptor::finite(p, k)?;
    let zs = Scalar::from_rational(f, z)?;
    let chi_p: Vec<i8> = (0..p).map(|a| legendre(a as i64, p)).collect();
    let els = f.finite_elements();
    let one = Scalar::one(f);
    let sum: i64 = els
        .par_iter()
        .map(|x| {
            let ax = &(x * x) - &one;
            if ax.is_zero() {
                return 0;
            }
            let mut s = 0i64;
            for y in &els {
                let d = y - x;
                let v = &(&ax * &(&(&d * &d) - &one)) * &(y - &zs);
                let c = if k == 1 {
                    chi_p[v.finite_coeffs().expect("finite")[0] as usize]
                } else {
                    chi_p[v.finite_norm().expect("finite") as usize]
                };
                s += c as i64;
            }
            s
        })
        .sum();
    Ok((q as i64 * q as i64 + sum) as u64)
}

/// Point count and trace at one prime power.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountRecord {
    pub q: u64,
    pub n: u64,
    pub trace: i64,
}

/// t_q = N(q) + q − q² − (1 + (−1/q))·q on the fibre over z.
pub fn trace_frobenius(q: u64, z: &BigRational) -> Result<CountRecord> {
    let (p, k) = split_prime_power(q)?;
    let n = count_affine(q, z)?;
    let qi = q as i64;
    let trace = n as i64 + qi - qi * qi - (1 + legendre_q(-1, p, k) as i64) * qi;
    Ok(CountRecord { q, n, trace })
}

pub fn default_fibre() -> BigRational {
    BigRational::one()
}

/// α_p = (u + √d)/p together with the signs that fix the eigenvalue triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusData {
    pub p: u64,
    pub s3: i8,
    pub s_minus1: i8,
    pub u: Rational64,
    pub d: Rational64,
    pub t_p: i64,
    pub t_p2: i64,
    /// 4u² − p² = t_{p²} for u built with s3.
    pub verified: bool,
    /// The same identity for u built with −s3.
    pub opposite_sign_verifies: bool,
}

impl FrobeniusData {
    /// α_p as text, e.g. "(1+sqrt(-24))/5" or "1".
    pub fn alpha_string(&self) -> String {
        let p = Rational64::from_integer(self.p as i64);
        if self.d.is_zero() {
            return (self.u / p).to_string();
        }
        format!("({}+sqrt({}))/{}", self.u, self.d, self.p)
    }
}

impl fmt::Display for FrobeniusData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} alpha={} (3/p)={} (-1/p)={}", self.p, self.alpha_string(), self.s3, self.s_minus1)
    }
}

/// Recovers α_p from t_p and checks the result against t_{p²}.
pub fn frobenius_eigenvalues(p: u64) -> Result<FrobeniusData> {
    check_prime(p)?;
    let z = default_fibre();
    let t_p = trace_frobenius(p, &z)?.trace;
    let t_p2 = trace_frobenius(p * p, &z)?.trace;
    frobenius_from_traces(p, t_p, t_p2)
}

pub fn frobenius_from_traces(p: u64, t_p: i64, t_p2: i64) -> Result<FrobeniusData> {
    let pi = p as i64;
    let s3 = legendre(3, p);
    let s_minus1 = legendre(-1, p);
    let check = |s: i64| {
        let u = Rational64::new(t_p - s * pi, 2);
        (u, Rational64::from_integer(4) * u * u - Rational64::from_integer(pi * pi) == Rational64::from_integer(t_p2))
    };
    let (u, verified) = check(s3 as i64);
    let (_, opposite_sign_verifies) = check(-(s3 as i64));
    if !verified && !opposite_sign_verifies {
        return Err(Error::VerificationFailed(p));
    }
    let d = u * u - Rational64::from_integer(pi * pi);
    Ok(FrobeniusData { p, s3, s_minus1, u, d, t_p, t_p2, verified, opposite_sign_verifies })
}

/// Number of rows of the intersection matrix.
pub const NS_RANK: usize = 19;

/// Positions (i, j), i < j, of the off-diagonal entries equal to 1.
fn ns_edges() -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for i in 0..3 {
        e.push((i, 17));
        e.push((i, 18));
    }
    for j in 10..13 {
        e.push((9, j));
    }
    for j in 14..17 {
        e.push((13, j));
    }
    e
}

/// The intersection matrix with −2 on the diagonal and the parameter x at
/// positions (17, 18) and (18, 17), as polynomials in x over Q.
pub fn intersection_matrix() -> Vec<Vec<Poly>> {
    let q = FieldDescriptor::Rational;
    let mut m = vec![vec![Poly::zero(q); NS_RANK]; NS_RANK];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Poly::from_ints(q, &[-2]);
    }
    for (i, j) in ns_edges() {
        m[i][j] = Poly::one(q);
        m[j][i] = Poly::one(q);
    }
    m[17][18] = Poly::from_ints(q, &[0, 1]);
    m[18][17] = Poly::from_ints(q, &[0, 1]);
    m
}

/// The same matrix specialised at a rational x.
pub fn intersection_matrix_at(x: &BigRational) -> Matrix {
    let q = FieldDescriptor::Rational;
    let xs = Scalar::from_rational(q, x).expect("rational");
    let rows = intersection_matrix().iter().map(|r| r.iter().map(|p| p.eval(&xs)).collect()).collect();
    Matrix::from_rows(q, rows).expect("square")
}

/// Determinant of a square polynomial matrix by fraction-free elimination.
pub fn bareiss_det(mut m: Vec<Vec<Poly>>) -> Result<Poly> {
    let n = m.len();
    let field = m.first().and_then(|r| r.first()).map(|p| p.field()).unwrap_or(FieldDescriptor::Rational);
    if n == 0 {
        return Ok(Poly::one(field));
    }
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
    }
    let mut sign = false;
    let mut prev = Poly::one(field);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(s) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return Ok(Poly::zero(field));
            };
            m.swap(k, s);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = num.exact_div(&prev)?;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    Ok(if sign { det.scale(&Scalar::from_i64(field, -1)) } else { det })
}

/// det of the intersection matrix as a polynomial in x.
pub fn intersection_matrix_det() -> Result<Poly> {
    bareiss_det(intersection_matrix())
}

pub fn rational(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}
