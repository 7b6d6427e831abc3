//! Exact scalars over Q, Q(ζ_n) and F_{p^k} (k ≤ 2).

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::rc::Rc;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A finite field F_p or F_{p^2} = F_p[t]/(t^2 + m1 t + m0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FiniteField {
    p: u64,
    k: u8,
    modulus: [u64; 2],
}

impl FiniteField {
    pub fn new(p: u64, k: u8) -> Result<Self> {
        check_prime(p)?;
        match k {
            1 => Ok(FiniteField { p, k, modulus: [0, 0] }),
            2 => {
                let modulus = if p == 2 {
                    [1, 1]
                } else {
                    let a = least_non_residue(p);
                    [p - a, 0]
                };
                Ok(FiniteField { p, k, modulus })
            }
            _ => Err(Error::InvalidField(format!("finite field degree {k} not supported"))),
        }
    }

    /// F_{p^2} with defining polynomial t^2 + m1 t + m0; the polynomial must be irreducible.
    pub fn with_modulus(p: u64, m0: u64, m1: u64) -> Result<Self> {
        check_prime(p)?;
        let f = FiniteField { p, k: 2, modulus: [m0 % p, m1 % p] };
        if (0..p).any(|x| (mulmod(x, x, p) + mulmod(f.modulus[1], x, p) + f.modulus[0]).is_multiple_of(p)) {
            return Err(Error::InvalidField(format!(
                "t^2+{}t+{} is reducible over F_{}",
                f.modulus[1], f.modulus[0], p
            )));
        }
        Ok(f)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.k as u32)
    }

    /// Coefficients (m0, m1) of the defining polynomial t^2 + m1 t + m0.
    pub fn modulus(&self) -> [u64; 2] {
        self.modulus
    }

    fn mul(&self, a: [u64; 2], b: [u64; 2]) -> [u64; 2] {
        let p = self.p;
        if self.k == 1 {
            return [mulmod(a[0], b[0], p), 0];
        }
        let hi = mulmod(a[1], b[1], p);
        let c0 = submod(mulmod(a[0], b[0], p), mulmod(hi, self.modulus[0], p), p);
        let mid = (mulmod(a[0], b[1], p) + mulmod(a[1], b[0], p)) % p;
        let c1 = submod(mid, mulmod(hi, self.modulus[1], p), p);
        [c0, c1]
    }

    /// Norm to F_p.
    fn norm(&self, a: [u64; 2]) -> u64 {
        let p = self.p;
        if self.k == 1 {
            return a[0];
        }
        let t = submod(mulmod(a[0], a[0], p), mulmod(mulmod(a[0], a[1], p), self.modulus[1], p), p);
        (t + mulmod(mulmod(a[1], a[1], p), self.modulus[0], p)) % p
    }

    fn inv(&self, a: [u64; 2]) -> Option<[u64; 2]> {
        let p = self.p;
        let n = self.norm(a);
        if n == 0 {
            return None;
        }
        let ni = powmod(n, p - 2, p);
        if self.k == 1 {
            return Some([ni, 0]);
        }
        let c0 = submod(a[0], mulmod(a[1], self.modulus[1], p), p);
        let c1 = (p - a[1]) % p;
        Some([mulmod(c0, ni, p), mulmod(c1, ni, p)])
    }
}

fn check_prime(p: u64) -> Result<()> {
    if !(2..1 << 31).contains(&p) || !is_prime(p) {
        return Err(Error::InvalidField(format!("{p} is not a supported prime")));
    }
    Ok(())
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn submod(a: u64, b: u64, p: u64) -> u64 {
    (a + p - b) % p
}

pub(crate) fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    r
}

fn least_non_residue(p: u64) -> u64 {
    (2..p).find(|&a| powmod(a, (p - 1) / 2, p) == p - 1).expect("odd prime has a non-residue")
}

/// The field a scalar lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldDescriptor {
    Rational,
    Cyclotomic(u32),
    Finite(FiniteField),
}

impl FieldDescriptor {
    pub fn cyclotomic(n: u32) -> Result<Self> {
        if n == 0 || n > 10_000 {
            return Err(Error::InvalidField(format!("cyclotomic order {n} out of range")));
        }
        Ok(FieldDescriptor::Cyclotomic(n))
    }

    pub fn finite(p: u64, k: u8) -> Result<Self> {
        Ok(FieldDescriptor::Finite(FiniteField::new(p, k)?))
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            FieldDescriptor::Finite(f) => f.p,
            _ => 0,
        }
    }

    /// Dimension over the prime field.
    pub fn degree(&self) -> usize {
        match self {
            FieldDescriptor::Rational => 1,
            FieldDescriptor::Cyclotomic(n) => cyc_data(*n).phi,
            FieldDescriptor::Finite(f) => f.k as usize,
        }
    }

    pub fn as_finite(&self) -> Option<FiniteField> {
        match self {
            FieldDescriptor::Finite(f) => Some(*f),
            _ => None,
        }
    }

    /// Every root of unity contained in the field, or every nonzero element for a finite field.
    pub fn roots_of_unity(&self) -> Vec<Scalar> {
        match self {
            FieldDescriptor::Rational => vec![Scalar::one(*self), Scalar::from_i64(*self, -1)],
            FieldDescriptor::Cyclotomic(n) => {
                let m = if n % 2 == 1 { 2 * n } else { *n };
                let z = if n % 2 == 1 { -Scalar::zeta(*self) } else { Scalar::zeta(*self) };
                let mut out = Vec::with_capacity(m as usize);
                let mut cur = Scalar::one(*self);
                for _ in 0..m {
                    out.push(cur.clone());
                    cur = &cur * &z;
                }
                out
            }
            FieldDescriptor::Finite(_) => {
                self.finite_elements().into_iter().filter(|x| !x.is_zero()).collect()
            }
        }
    }

    /// All elements of a finite field in a fixed order; empty for infinite fields.
    pub fn finite_elements(&self) -> Vec<Scalar> {
        let FieldDescriptor::Finite(f) = self else { return Vec::new() };
        let mut out = Vec::with_capacity(f.order() as usize);
        let hi = if f.k == 2 { f.p } else { 1 };
        for a1 in 0..hi {
            for a0 in 0..f.p {
                out.push(Scalar { field: *self, repr: Repr::Fin([a0, a1]) });
            }
        }
        out
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldDescriptor::Rational => write!(f, "rational"),
            FieldDescriptor::Cyclotomic(n) => write!(f, "cyclotomic:{n}"),
            FieldDescriptor::Finite(ff) if ff.k == 1 => write!(f, "finite:{}", ff.p),
            FieldDescriptor::Finite(ff) => write!(f, "finite:{},{}", ff.p, ff.k),
        }
    }
}

impl FromStr for FieldDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidField(s.to_string());
        if s == "rational" {
            return Ok(FieldDescriptor::Rational);
        }
        if let Some(rest) = s.strip_prefix("cyclotomic:") {
            let n: u32 = rest.trim().parse().map_err(|_| bad())?;
            return FieldDescriptor::cyclotomic(n);
        }
        if let Some(rest) = s.strip_prefix("finite:") {
            let mut parts = rest.split(',');
            let p: u64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let k: u8 = match parts.next() {
                Some(k) => k.trim().parse().map_err(|_| bad())?,
                None => 1,
            };
            if parts.next().is_some() {
                return Err(bad());
            }
            return FieldDescriptor::finite(p, k);
        }
        Err(bad())
    }
}

struct CycData {
    phi: usize,
    /// Φ_n, low degree first, monic.
    poly: Vec<i64>,
}

thread_local! {
    static CYC_CACHE: RefCell<HashMap<u32, Rc<CycData>>> = RefCell::new(HashMap::new());
}

fn cyc_data(n: u32) -> Rc<CycData> {
    CYC_CACHE.with(|c| {
        if let Some(d) = c.borrow().get(&n) {
            return d.clone();
        }
        let poly = cyclotomic_poly(n);
        let d = Rc::new(CycData { phi: poly.len() - 1, poly });
        c.borrow_mut().insert(n, d.clone());
        d
    })
}

/// Integer coefficients of the n-th cyclotomic polynomial, low degree first.
pub fn cyclotomic_poly(n: u32) -> Vec<i64> {
    // x^n - 1 divided by every Φ_d with d | n, d < n.
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = exact_div_int(&num, &cyc_data(d).poly);
        }
    }
    num
}

fn exact_div_int(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dl = den.len();
    let ql = num.len() - dl + 1;
    let mut q = vec![0i64; ql];
    for k in (0..ql).rev() {
        let c = rem[k + dl - 1];
        q[k] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[k + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    q
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Cyc {
    num: Vec<BigInt>,
    den: BigInt,
}

impl Cyc {
    fn zero(phi: usize) -> Self {
        Cyc { num: vec![BigInt::zero(); phi], den: BigInt::one() }
    }

    fn normalize(mut self) -> Self {
        if self.den.is_negative() {
            self.den = -self.den;
            for c in &mut self.num {
                *c = -std::mem::take(c);
            }
        }
        if self.num.iter().all(|c| c.is_zero()) {
            self.den = BigInt::one();
            return self;
        }
        if !self.den.is_one() {
            let mut g = self.den.clone();
            for c in &self.num {
                if g.is_one() {
                    break;
                }
                if !c.is_zero() {
                    g = g.gcd(c);
                }
            }
            if !g.is_one() {
                self.den /= &g;
                for c in &mut self.num {
                    *c /= &g;
                }
            }
        }
        self
    }

    fn add(&self, o: &Cyc, sign: bool) -> Cyc {
        let num = if self.den == o.den {
            let num = self
                .num
                .iter()
                .zip(&o.num)
                .map(|(a, b)| if sign { a + b } else { a - b })
                .collect();
            return Cyc { num, den: self.den.clone() }.normalize();
        } else {
            self.num
                .iter()
                .zip(&o.num)
                .map(|(a, b)| {
                    let x = a * &o.den;
                    let y = b * &self.den;
                    if sign {
                        x + y
                    } else {
                        x - y
                    }
                })
                .collect()
        };
        Cyc { num, den: &self.den * &o.den }.normalize()
    }

    fn mul(&self, o: &Cyc, data: &CycData) -> Cyc {
        let phi = data.phi;
        let mut prod = vec![BigInt::zero(); 2 * phi - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.num.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        reduce_poly(&mut prod, data);
        prod.truncate(phi);
        Cyc { num: prod, den: &self.den * &o.den }.normalize()
    }

    fn scale(&self, c: &BigRational) -> Cyc {
        Cyc {
            num: self.num.iter().map(|a| a * c.numer()).collect(),
            den: &self.den * c.denom(),
        }
        .normalize()
    }
}

/// Reduce a coefficient vector modulo Φ_n in place.
fn reduce_poly(v: &mut Vec<BigInt>, data: &CycData) {
    let phi = data.phi;
    for k in (phi..v.len()).rev() {
        if v[k].is_zero() {
            continue;
        }
        let c = std::mem::take(&mut v[k]);
        for (j, &pj) in data.poly[..phi].iter().enumerate() {
            if pj != 0 {
                v[k - phi + j] -= &c * pj;
            }
        }
    }
    if v.len() < phi {
        v.resize(phi, BigInt::zero());
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Rat(BigRational),
    Cyc(Cyc),
    Fin([u64; 2]),
}

/// An exact element of a [`FieldDescriptor`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar {
    field: FieldDescriptor,
    repr: Repr,
}

fn mismatch(a: &FieldDescriptor, b: &FieldDescriptor) -> Error {
    Error::FieldMismatch(a.to_string(), b.to_string())
}

impl Scalar {
    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn zero(field: FieldDescriptor) -> Self {
        let repr = match field {
            FieldDescriptor::Rational => Repr::Rat(BigRational::zero()),
            FieldDescriptor::Cyclotomic(n) => Repr::Cyc(Cyc::zero(cyc_data(n).phi)),
            FieldDescriptor::Finite(_) => Repr::Fin([0, 0]),
        };
        Scalar { field, repr }
    }

    pub fn one(field: FieldDescriptor) -> Self {
        Scalar::from_i64(field, 1)
    }

    pub fn from_i64(field: FieldDescriptor, v: i64) -> Self {
        Scalar::from_bigint(field, &BigInt::from(v))
    }

    pub fn from_bigint(field: FieldDescriptor, v: &BigInt) -> Self {
        let repr = match field {
            FieldDescriptor::Rational => Repr::Rat(BigRational::from_integer(v.clone())),
            FieldDescriptor::Cyclotomic(n) => {
                let mut c = Cyc::zero(cyc_data(n).phi);
                c.num[0] = v.clone();
                Repr::Cyc(c)
            }
            FieldDescriptor::Finite(f) => Repr::Fin([bigint_mod(v, f.p), 0]),
        };
        Scalar { field, repr }
    }

    /// Image of a rational number; fails with `BadPrime` when the denominator vanishes mod p.
    pub fn from_rational(field: FieldDescriptor, v: &BigRational) -> Result<Self> {
        match field {
            FieldDescriptor::Rational => Ok(Scalar { field, repr: Repr::Rat(v.clone()) }),
            FieldDescriptor::Cyclotomic(n) => {
                let mut c = Cyc::zero(cyc_data(n).phi);
                c.num[0] = v.numer().clone();
                c.den = v.denom().clone();
                Ok(Scalar { field, repr: Repr::Cyc(c) })
            }
            FieldDescriptor::Finite(f) => {
                let d = bigint_mod(v.denom(), f.p);
                if d == 0 {
                    return Err(Error::BadPrime(f.p));
                }
                let n = bigint_mod(v.numer(), f.p);
                Ok(Scalar { field, repr: Repr::Fin([mulmod(n, powmod(d, f.p - 2, f.p), f.p), 0]) })
            }
        }
    }

    pub fn from_ratio(field: FieldDescriptor, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Scalar::from_rational(field, &BigRational::new(num.into(), den.into()))
    }

    /// The primitive root ζ_n of a cyclotomic field.
    pub fn zeta(field: FieldDescriptor) -> Self {
        Scalar::generator(field).expect("zeta requires a cyclotomic field")
    }

    /// The adjoined generator: ζ_n for Q(ζ_n), t for F_{p^2}.
    pub fn generator(field: FieldDescriptor) -> Result<Self> {
        match field {
            FieldDescriptor::Cyclotomic(n) => {
                let data = cyc_data(n);
                let mut v = vec![BigInt::zero(); data.phi.max(2)];
                v[1] = BigInt::one();
                reduce_poly(&mut v, &data);
                v.truncate(data.phi);
                Ok(Scalar { field, repr: Repr::Cyc(Cyc { num: v, den: BigInt::one() }) })
            }
            FieldDescriptor::Finite(f) if f.k == 2 => Ok(Scalar { field, repr: Repr::Fin([0, 1]) }),
            _ => Err(Error::FieldMismatch("field with a generator".into(), field.to_string())),
        }
    }

    /// ζ_n^k in Q(ζ_n).
    pub fn root_of_unity(field: FieldDescriptor, k: i64) -> Result<Self> {
        let FieldDescriptor::Cyclotomic(n) = field else {
            return Err(Error::FieldMismatch("cyclotomic".into(), field.to_string()));
        };
        Ok(Scalar::zeta(field).pow_u(k.rem_euclid(n as i64) as u64))
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Rat(r) => r.is_zero(),
            Repr::Cyc(c) => c.num.iter().all(|x| x.is_zero()),
            Repr::Fin(a) => a[0] == 0 && a[1] == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.repr {
            Repr::Rat(r) => r.is_one(),
            Repr::Cyc(c) => {
                c.den.is_one() && c.num[0].is_one() && c.num[1..].iter().all(|x| x.is_zero())
            }
            Repr::Fin(a) => a[0] == 1 && a[1] == 0,
        }
    }

    /// The value as a rational number, when it lies in the prime field of Q.
    pub fn to_rational(&self) -> Option<BigRational> {
        match &self.repr {
            Repr::Rat(r) => Some(r.clone()),
            Repr::Cyc(c) => {
                if c.num[1..].iter().all(|x| x.is_zero()) {
                    Some(BigRational::new(c.num[0].clone(), c.den.clone()))
                } else {
                    None
                }
            }
            Repr::Fin(_) => None,
        }
    }

    /// Coefficients over the prime field for finite fields: (a0, a1) with a0 + a1 t.
    pub fn finite_coeffs(&self) -> Option<[u64; 2]> {
        match &self.repr {
            Repr::Fin(a) => Some(*a),
            _ => None,
        }
    }

    /// Coefficients in the power basis 1, ζ, …, ζ^{φ(n)-1}.
    pub fn cyclotomic_coeffs(&self) -> Option<Vec<BigRational>> {
        match &self.repr {
            Repr::Cyc(c) => {
                Some(c.num.iter().map(|a| BigRational::new(a.clone(), c.den.clone())).collect())
            }
            _ => None,
        }
    }

    pub fn from_finite_coeffs(field: FieldDescriptor, a0: u64, a1: u64) -> Result<Self> {
        let FieldDescriptor::Finite(f) = field else {
            return Err(Error::FieldMismatch("finite".into(), field.to_string()));
        };
        let a1 = if f.k == 2 { a1 % f.p } else { 0 };
        Ok(Scalar { field, repr: Repr::Fin([a0 % f.p, a1]) })
    }

    pub fn checked_add(&self, o: &Scalar) -> Result<Scalar> {
        self.combine(o, |a, b| a.add_unchecked(b))
    }

    pub fn checked_sub(&self, o: &Scalar) -> Result<Scalar> {
        self.combine(o, |a, b| a.sub_unchecked(b))
    }

    pub fn checked_mul(&self, o: &Scalar) -> Result<Scalar> {
        self.combine(o, |a, b| a.mul_unchecked(b))
    }

    pub fn checked_div(&self, o: &Scalar) -> Result<Scalar> {
        if self.field != o.field {
            return Err(mismatch(&self.field, &o.field));
        }
        Ok(self.mul_unchecked(&o.inv()?))
    }

    fn combine(&self, o: &Scalar, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Result<Scalar> {
        if self.field != o.field {
            return Err(mismatch(&self.field, &o.field));
        }
        Ok(f(self, o))
    }

    fn add_unchecked(&self, o: &Scalar) -> Scalar {
        let repr = match (&self.repr, &o.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Repr::Rat(a + b),
            (Repr::Cyc(a), Repr::Cyc(b)) => Repr::Cyc(a.add(b, true)),
            (Repr::Fin(a), Repr::Fin(b)) => {
                let p = self.p();
                Repr::Fin([(a[0] + b[0]) % p, (a[1] + b[1]) % p])
            }
            _ => unreachable!("field tags agree"),
        };
        Scalar { field: self.field, repr }
    }

    fn sub_unchecked(&self, o: &Scalar) -> Scalar {
        let repr = match (&self.repr, &o.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Repr::Rat(a - b),
            (Repr::Cyc(a), Repr::Cyc(b)) => Repr::Cyc(a.add(b, false)),
            (Repr::Fin(a), Repr::Fin(b)) => {
                let p = self.p();
                Repr::Fin([submod(a[0], b[0], p), submod(a[1], b[1], p)])
            }
            _ => unreachable!("field tags agree"),
        };
        Scalar { field: self.field, repr }
    }

    fn mul_unchecked(&self, o: &Scalar) -> Scalar {
        if self.is_zero() {
            return self.clone();
        }
        if o.is_zero() {
            return o.clone();
        }
        let repr = match (&self.repr, &o.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Repr::Rat(a * b),
            (Repr::Cyc(a), Repr::Cyc(b)) => {
                if let Some(r) = self.as_cyc_rational() {
                    Repr::Cyc(b.scale(&r))
                } else if let Some(r) = o.as_cyc_rational() {
                    Repr::Cyc(a.scale(&r))
                } else {
                    let FieldDescriptor::Cyclotomic(n) = self.field else { unreachable!() };
                    Repr::Cyc(a.mul(b, &cyc_data(n)))
                }
            }
            (Repr::Fin(a), Repr::Fin(b)) => {
                let FieldDescriptor::Finite(f) = self.field else { unreachable!() };
                Repr::Fin(f.mul(*a, *b))
            }
            _ => unreachable!("field tags agree"),
        };
        Scalar { field: self.field, repr }
    }

    fn as_cyc_rational(&self) -> Option<BigRational> {
        match &self.repr {
            Repr::Cyc(c) if c.num[1..].iter().all(|x| x.is_zero()) => {
                Some(BigRational::new(c.num[0].clone(), c.den.clone()))
            }
            _ => None,
        }
    }

    fn p(&self) -> u64 {
        self.field.characteristic()
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let repr = match &self.repr {
            Repr::Rat(a) => Repr::Rat(a.recip()),
            Repr::Cyc(c) => {
                let FieldDescriptor::Cyclotomic(n) = self.field else { unreachable!() };
                Repr::Cyc(cyc_inverse(c, &cyc_data(n)))
            }
            Repr::Fin(a) => {
                let FieldDescriptor::Finite(f) = self.field else { unreachable!() };
                Repr::Fin(f.inv(*a).ok_or(Error::DivisionByZero)?)
            }
        };
        Ok(Scalar { field: self.field, repr })
    }

    fn pow_u(&self, mut e: u64) -> Scalar {
        let mut r = Scalar::one(self.field);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul_unchecked(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul_unchecked(&b);
            }
        }
        r
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, e: i64) -> Result<Scalar> {
        if e >= 0 {
            Ok(self.pow_u(e as u64))
        } else {
            Ok(self.inv()?.pow_u(e.unsigned_abs()))
        }
    }

    /// Norm from F_{p^k} down to F_p, as an integer in [0, p).
    pub fn finite_norm(&self) -> Option<u64> {
        match (&self.repr, self.field) {
            (Repr::Fin(a), FieldDescriptor::Finite(f)) => Some(f.norm(*a)),
            _ => None,
        }
    }

    /// Quadratic character of a finite-field element, computed through the norm to F_p.
    pub fn quadratic_character(&self) -> Option<i8> {
        let n = self.finite_norm()?;
        let p = self.p();
        if n == 0 {
            return Some(0);
        }
        if p == 2 {
            return Some(1);
        }
        Some(if powmod(n, (p - 1) / 2, p) == 1 { 1 } else { -1 })
    }

    /// Maps Q into any field and Q(ζ_m) into Q(ζ_n) for m | n.
    pub fn coerce_to(&self, target: FieldDescriptor) -> Result<Scalar> {
        if self.field == target {
            return Ok(self.clone());
        }
        match (&self.repr, self.field, target) {
            (Repr::Rat(r), _, _) => Scalar::from_rational(target, r),
            (Repr::Cyc(c), FieldDescriptor::Cyclotomic(m), FieldDescriptor::Cyclotomic(n))
                if n % m == 0 =>
            {
                let step = (n / m) as u64;
                let z = Scalar::zeta(target);
                let mut acc = Scalar::zero(target);
                for (e, a) in c.num.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    let coef = Scalar::from_rational(target, &BigRational::new(a.clone(), c.den.clone()))?;
                    acc = acc.add_unchecked(&coef.mul_unchecked(&z.pow_u(step * e as u64)));
                }
                Ok(acc)
            }
            _ => match self.to_rational() {
                Some(r) if matches!(target, FieldDescriptor::Rational) => Scalar::from_rational(target, &r),
                _ => Err(mismatch(&self.field, &target)),
            },
        }
    }

    /// Parse a scalar from its text form.
    pub fn parse(text: &str, field: FieldDescriptor) -> Result<Scalar> {
        Parser::new(text, field).parse()
    }

    fn sort_key(&self, o: &Scalar) -> Ordering {
        match (&self.repr, &o.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => a.cmp(b),
            (Repr::Cyc(a), Repr::Cyc(b)) => {
                let x = a.num.iter().map(|v| BigRational::new(v.clone(), a.den.clone()));
                let y = b.num.iter().map(|v| BigRational::new(v.clone(), b.den.clone()));
                x.cmp(y)
            }
            (Repr::Fin(a), Repr::Fin(b)) => (a[1], a[0]).cmp(&(b[1], b[0])),
            _ => self.field.to_string().cmp(&o.field.to_string()),
        }
    }
}

fn bigint_mod(v: &BigInt, p: u64) -> u64 {
    v.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

/// Inverse in Q(ζ_n) by solving the linear system of multiplication by c.
fn cyc_inverse(c: &Cyc, data: &CycData) -> Cyc {
    let phi = data.phi;
    // Row e of the system is the vector of ζ^e · c.
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(phi);
    let mut cur = c.clone();
    let z = {
        let mut v = vec![BigInt::zero(); phi.max(2)];
        v[1] = BigInt::one();
        reduce_poly(&mut v, data);
        v.truncate(phi);
        Cyc { num: v, den: BigInt::one() }
    };
    for _ in 0..phi {
        rows.push(cur.num.iter().map(|a| BigRational::new(a.clone(), cur.den.clone())).collect());
        cur = cur.mul(&z, data);
    }
    // Solve x · rows = e_0 by Gauss-Jordan on the transposed augmented system.
    let mut a: Vec<Vec<BigRational>> = (0..phi)
        .map(|j| {
            let mut r: Vec<BigRational> = (0..phi).map(|e| rows[e][j].clone()).collect();
            r.push(if j == 0 { BigRational::one() } else { BigRational::zero() });
            r
        })
        .collect();
    for col in 0..phi {
        let piv = (col..phi).find(|&r| !a[r][col].is_zero()).expect("nonzero element is invertible");
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..phi {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(pivot_row) {
                    *x = &*x - &(&f * y);
                }
            }
        }
    }
    let coeffs: Vec<BigRational> = a.into_iter().map(|r| r[phi].clone()).collect();
    let den = coeffs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let num = coeffs.iter().map(|x| x.numer() * (&den / x.denom())).collect();
    Cyc { num, den }.normalize()
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A total order used only for canonical sorting; it is not compatible with field arithmetic.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key(other)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                self.$checked(o).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        let repr = match &self.repr {
            Repr::Rat(a) => Repr::Rat(-a),
            Repr::Cyc(c) => Repr::Cyc(Cyc { num: c.num.iter().map(|x| -x).collect(), den: c.den.clone() }),
            Repr::Fin(a) => {
                let p = self.p();
                Repr::Fin([(p - a[0]) % p, (p - a[1]) % p])
            }
        };
        Scalar { field: self.field, repr }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

fn push_term(out: &mut String, coef: &BigRational, var: &str, e: usize) {
    if coef.is_zero() {
        return;
    }
    let mut term = String::new();
    if e == 0 {
        term.push_str(&coef.to_string());
    } else {
        if coef.is_one() {
        } else if (-coef).is_one() {
            term.push('-');
        } else {
            term.push_str(&coef.to_string());
            term.push('*');
        }
        term.push_str(var);
        if e > 1 {
            term.push('^');
            term.push_str(&e.to_string());
        }
    }
    if !out.is_empty() && !term.starts_with('-') {
        out.push('+');
    }
    out.push_str(&term);
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        match &self.repr {
            Repr::Rat(r) => out = r.to_string(),
            Repr::Cyc(c) => {
                for e in (0..c.num.len()).rev() {
                    push_term(&mut out, &BigRational::new(c.num[e].clone(), c.den.clone()), "z", e);
                }
            }
            Repr::Fin(a) => {
                push_term(&mut out, &BigRational::from_integer(a[1].into()), "t", 1);
                push_term(&mut out, &BigRational::from_integer(a[0].into()), "t", 0);
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    field: FieldDescriptor,
}

impl Parser {
    fn new(text: &str, field: FieldDescriptor) -> Self {
        let chars = text.chars().enumerate().filter(|(_, c)| !c.is_whitespace()).collect();
        Parser { chars, pos: 0, field }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn at(&self) -> usize {
        self.chars.get(self.pos).map(|&(i, _)| i).unwrap_or_else(|| {
            self.chars.last().map(|&(i, _)| i + 1).unwrap_or(0)
        })
    }

    fn err(&self, msg: &str) -> Error {
        Error::ParseError { pos: self.at(), msg: msg.to_string() }
    }

    fn var(&self) -> Option<char> {
        match self.field {
            FieldDescriptor::Cyclotomic(_) => Some('z'),
            FieldDescriptor::Finite(f) if f.k == 2 => Some('t'),
            _ => None,
        }
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(self.chars[start..self.pos].iter().map(|&(_, c)| c).collect())
        }
    }

    fn parse(mut self) -> Result<Scalar> {
        if self.chars.is_empty() {
            return Err(self.err("empty scalar"));
        }
        let mut acc = Scalar::zero(self.field);
        let mut first = true;
        while self.peek().is_some() {
            if !first && matches!(self.field, FieldDescriptor::Rational) {
                return Err(self.err("a rational is a single literal"));
            }
            let neg = match self.peek() {
                Some('-') => {
                    self.pos += 1;
                    true
                }
                Some('+') if !first => {
                    self.pos += 1;
                    false
                }
                _ if first => false,
                _ => return Err(self.err("expected '+' or '-'")),
            };
            let term = self.term()?;
            acc = if neg { acc.sub_unchecked(&term) } else { acc.add_unchecked(&term) };
            first = false;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Scalar> {
        let coef = match self.digits() {
            Some(n) => {
                let n: BigInt = n.parse().map_err(|_| self.err("bad integer"))?;
                let mut c = BigRational::from_integer(n);
                if self.peek() == Some('/') {
                    if matches!(self.field, FieldDescriptor::Finite(_)) {
                        return Err(self.err("finite-field coefficients are integers"));
                    }
                    self.pos += 1;
                    let start = self.pos;
                    let d = self.digits().ok_or_else(|| self.err("expected denominator"))?;
                    let d: BigInt = d.parse().map_err(|_| self.err("bad integer"))?;
                    if d.is_zero() {
                        self.pos = start;
                        return Err(self.err("zero denominator"));
                    }
                    c /= BigRational::from_integer(d);
                }
                if self.peek() == Some('*') {
                    self.pos += 1;
                    return Ok(Scalar::from_rational(self.field, &c)?.mul_unchecked(&self.power()?));
                }
                Scalar::from_rational(self.field, &c)?
            }
            None => self.power()?,
        };
        Ok(coef)
    }

    fn power(&mut self) -> Result<Scalar> {
        let Some(c) = self.peek() else { return Err(self.err("expected a term")) };
        if !c.is_ascii_alphabetic() {
            return Err(self.err("expected a term"));
        }
        if Some(c) != self.var() {
            if c == 'z' || c == 't' {
                return Err(Error::FieldMismatch(format!("symbol '{c}'"), self.field.to_string()));
            }
            return Err(self.err("unknown symbol"));
        }
        self.pos += 1;
        let mut e: u64 = 1;
        if self.peek() == Some('^') {
            self.pos += 1;
            let d = self.digits().ok_or_else(|| self.err("expected exponent"))?;
            e = d.parse().map_err(|_| self.err("exponent too large"))?;
        }
        let g = Scalar::generator(self.field)?;
        let e = match self.field {
            FieldDescriptor::Cyclotomic(n) => e % n as u64,
            _ => e,
        };
        Ok(g.pow_u(e))
    }
}
