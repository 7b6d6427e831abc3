//! Reduction modulo a prime and finite matrix group analysis.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{cyclotomic_poly, FieldDescriptor, FiniteField, Scalar};
use crate::tuples::MonodromyTuple;

/// Field that receives the reduction of `field` modulo `ell`, with the image of ζ_n.
pub fn reduction_target(field: FieldDescriptor, ell: u64) -> Result<(FieldDescriptor, Option<Scalar>)> {
    if !crate::scalar::is_prime(ell) {
        return Err(Error::Precondition(format!("{ell} is not prime")));
    }
    match field {
        FieldDescriptor::Rational => Ok((FieldDescriptor::finite(ell, 1)?, None)),
        FieldDescriptor::Cyclotomic(n) => {
            if ell.is_multiple_of(n as u64) {
                return Err(Error::BadPrime(ell));
            }
            let phi = cyclotomic_poly(n);
            for k in [1u8, 2] {
                let f = FieldDescriptor::finite(ell, k)?;
                for x in f.finite_elements() {
                    let v = phi.iter().rev().fold(Scalar::zero(f), |acc, &c| &(&acc * &x) + &Scalar::from_i64(f, c));
                    if v.is_zero() {
                        return Ok((f, Some(x)));
                    }
                }
            }
            let mut degree = 1;
            let mut pw = ell % n as u64;
            while pw != 1 % n as u64 {
                pw = pw * ell % n as u64;
                degree += 1;
            }
            Err(Error::NoRootInQuadratic { order: n, ell, degree })
        }
        FieldDescriptor::Finite(_) => Err(Error::Precondition("tuple is already over a finite field".into())),
    }
}

fn reduce_rational(x: &BigRational, f: FieldDescriptor, ell: u64) -> Result<Scalar> {
    let l = BigInt::from(ell);
    if x.denom().mod_floor(&l).is_zero() {
        return Err(Error::BadPrime(ell));
    }
    Scalar::from_rational(f, x)
}

/// Reduces one scalar given the target field and the image of ζ.
pub fn reduce_scalar(x: &Scalar, target: FieldDescriptor, zeta: Option<&Scalar>, ell: u64) -> Result<Scalar> {
    if let Some(r) = x.to_rational() {
        return reduce_rational(&r, target, ell);
    }
    let coeffs = x.cyclotomic_coeffs().ok_or_else(|| Error::Precondition("cannot reduce this scalar".into()))?;
    let z = zeta.ok_or_else(|| Error::Precondition("missing image of ζ".into()))?;
    let mut acc = Scalar::zero(target);
    for c in coeffs.iter().rev() {
        acc = &(&acc * z) + &reduce_rational(c, target, ell)?;
    }
    Ok(acc)
}

/// Reduces a tuple over Q or Q(ζ_n) modulo ℓ. Q(ζ_n) lands in F_ℓ when Φ_n has a
/// root there (the smallest one is used), otherwise in F_{ℓ²}.
pub fn reduce_mod(t: &MonodromyTuple, ell: u64) -> Result<MonodromyTuple> {
    let (target, zeta) = reduction_target(t.field(), ell)?;
    let entries = t
        .entries()
        .iter()
        .map(|m| reduce_matrix(m, target, zeta.as_ref(), ell))
        .collect::<Result<Vec<_>>>()?;
    MonodromyTuple::new(entries, t.points().map(|p| p.to_vec()))
}

pub fn reduce_matrix(m: &Matrix, target: FieldDescriptor, zeta: Option<&Scalar>, ell: u64) -> Result<Matrix> {
    let data = m.entries().iter().map(|x| reduce_scalar(x, target, zeta, ell)).collect::<Result<Vec<_>>>()?;
    Matrix::new(target, m.rows(), m.cols(), data)
}

/// Order of a group, or a note that it exceeds the enumeration cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupOrder {
    Exact(u64),
    ExceedsCap(u64),
}

impl GroupOrder {
    pub fn exact(&self) -> Option<u64> {
        match self {
            GroupOrder::Exact(n) => Some(*n),
            GroupOrder::ExceedsCap(_) => None,
        }
    }
}

impl fmt::Display for GroupOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupOrder::Exact(n) => write!(f, "{n}"),
            GroupOrder::ExceedsCap(c) => write!(f, "exceeds cap {c}"),
        }
    }
}

pub const DEFAULT_CAP: u64 = 200_000;

/// Matrix over F_q packed as one small integer per entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Packed(Box<[u32]>);

struct Packer {
    ff: FiniteField,
    d: usize,
    mul: Option<Vec<u32>>,
    add: Option<Vec<u32>>,
    q: usize,
    field: FieldDescriptor,
}

impl Packer {
    fn new(field: FieldDescriptor, d: usize) -> Result<Self> {
        let ff = field.as_finite().ok_or_else(|| Error::Precondition("group closure needs a finite field".into()))?;
        let q = ff.order() as usize;
        let mut p = Packer { ff, d, mul: None, add: None, q, field };
        if q <= 2048 {
            let els = field.finite_elements();
            let mut mul = vec![0u32; q * q];
            let mut add = vec![0u32; q * q];
            for (i, a) in els.iter().enumerate() {
                for (j, b) in els.iter().enumerate() {
                    mul[i * q + j] = p.code(&(a * b));
                    add[i * q + j] = p.code(&(a + b));
                }
            }
            p.mul = Some(mul);
            p.add = Some(add);
        }
        Ok(p)
    }

    fn code(&self, x: &Scalar) -> u32 {
        let [a0, a1] = x.finite_coeffs().expect("finite scalar");
        (a0 + a1 * self.ff.p()) as u32
    }

    fn decode(&self, c: u32) -> Scalar {
        let p = self.ff.p();
        Scalar::from_finite_coeffs(self.field, c as u64 % p, c as u64 / p).expect("valid code")
    }

    fn pack(&self, m: &Matrix) -> Packed {
        Packed(m.entries().iter().map(|x| self.code(x)).collect())
    }

    fn mul(&self, a: &Packed, b: &Packed) -> Packed {
        let d = self.d;
        let mut out = vec![0u32; d * d];
        match (&self.mul, &self.add) {
            (Some(mt), Some(at)) => {
                let q = self.q;
                for i in 0..d {
                    for k in 0..d {
                        let x = a.0[i * d + k] as usize;
                        if x == 0 {
                            continue;
                        }
                        for j in 0..d {
                            let pr = mt[x * q + b.0[k * d + j] as usize] as usize;
                            let o = &mut out[i * d + j];
                            *o = at[*o as usize * q + pr];
                        }
                    }
                }
            }
            _ => {
                let am = self.unpack(a);
                let bm = self.unpack(b);
                return self.pack(&(&am * &bm));
            }
        }
        Packed(out.into_boxed_slice())
    }

    fn unpack(&self, a: &Packed) -> Matrix {
        Matrix::new(self.field, self.d, self.d, a.0.iter().map(|&c| self.decode(c)).collect()).expect("square")
    }
}

/// Breadth-first closure of the generated group, stopping once more than `cap`
/// elements are known. Returns the elements in visit order when complete.
fn closure_elements(gens: &[Matrix], cap: u64) -> Result<(GroupOrder, Vec<Packed>, Packer)> {
    let first = gens.first().ok_or_else(|| Error::Precondition("no generators".into()))?;
    let d = first.rows();
    let packer = Packer::new(first.field(), d)?;
    for g in gens {
        if g.field() != first.field() || !g.is_square() || g.rows() != d {
            return Err(Error::DimensionMismatch("generators must share field and size".into()));
        }
        g.inverse()?;
    }
    let pg: Vec<Packed> = gens.iter().map(|g| packer.pack(g)).collect();
    let id = packer.pack(&Matrix::identity(first.field(), d));
    let mut seen: HashSet<Packed> = HashSet::new();
    seen.insert(id.clone());
    let mut order = vec![id.clone()];
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let products: Vec<Packed> =
            frontier.par_iter().flat_map_iter(|x| pg.iter().map(|g| packer.mul(x, g)).collect::<Vec<_>>()).collect();
        let mut next = Vec::new();
        for y in products {
            if seen.insert(y.clone()) {
                if seen.len() as u64 > cap {
                    return Ok((GroupOrder::ExceedsCap(cap), order, packer));
                }
                order.push(y.clone());
                next.push(y);
            }
        }
        frontier = next;
    }
    Ok((GroupOrder::Exact(order.len() as u64), order, packer))
}

/// Order of the group generated by invertible matrices over a finite field.
pub fn group_closure(gens: &[Matrix], cap: u64) -> Result<GroupOrder> {
    Ok(closure_elements(gens, cap)?.0)
}

/// All elements of the generated group in visit order, or None past the cap.
pub fn group_elements(gens: &[Matrix], cap: u64) -> Result<Option<Vec<Matrix>>> {
    let (ord, els, packer) = closure_elements(gens, cap)?;
    Ok(ord.exact().map(|_| els.iter().map(|e| packer.unpack(e)).collect()))
}

/// Multiplicative order of an invertible matrix.
pub fn element_order(g: &Matrix, cap: u64) -> Result<Option<u64>> {
    let mut cur = g.clone();
    for k in 1..=cap {
        if cur.is_identity() {
            return Ok(Some(k));
        }
        cur = cur.checked_mul(g)?;
    }
    Ok(None)
}

/// Burnside test: the generated algebra is all of M_d(K).
pub fn absolutely_irreducible(gens: &[Matrix]) -> bool {
    let Some(first) = gens.first() else { return false };
    let d = first.rows();
    let f = first.field();
    let mut span = crate::linalg::Echelon::new(f, d * d);
    let id = Matrix::identity(f, d);
    span.insert(id.entries());
    let mut basis = vec![id];
    let mut k = 0;
    while k < basis.len() && span.rank() < d * d {
        let b = basis[k].clone();
        for g in gens {
            let Ok(p) = b.checked_mul(g) else { return false };
            if span.insert(p.entries()) {
                basis.push(p);
            }
        }
        k += 1;
    }
    span.rank() == d * d
}

/// Dimension of {X : Xg = gX for all generators g}.
pub fn centralizer_dimension(gens: &[Matrix]) -> Result<usize> {
    let first = gens.first().ok_or_else(|| Error::Precondition("no generators".into()))?;
    let d = first.rows();
    let f = first.field();
    // Row (a,b) of X maps to the equations (Xg − gX)_{ij}.
    let mut sys = Matrix::zeros(f, d * d, d * d * gens.len());
    for (gi, g) in gens.iter().enumerate() {
        for a in 0..d {
            for b in 0..d {
                let mut e = Matrix::zeros(f, d, d);
                e.set(a, b, Scalar::one(f));
                let c = e.checked_mul(g)?.checked_sub(&g.checked_mul(&e)?)?;
                for (idx, v) in c.entries().iter().enumerate() {
                    sys.set(a * d + b, gi * d * d + idx, v.clone());
                }
            }
        }
    }
    Ok(sys.kernel_basis().len())
}

/// Symmetric matrices G with gᵀGg = G for every generator.
pub fn invariant_symmetric_forms(gens: &[Matrix]) -> Result<Vec<Matrix>> {
    let first = gens.first().ok_or_else(|| Error::Precondition("no generators".into()))?;
    let d = first.rows();
    let f = first.field();
    let slots: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
    let basis: Vec<Matrix> = slots
        .iter()
        .map(|&(i, j)| {
            let mut e = Matrix::zeros(f, d, d);
            e.set(i, j, Scalar::one(f));
            e.set(j, i, Scalar::one(f));
            e
        })
        .collect();
    let mut sys = Matrix::zeros(f, slots.len(), d * d * gens.len());
    for (gi, g) in gens.iter().enumerate() {
        let gt = g.transpose();
        for (s, e) in basis.iter().enumerate() {
            let c = gt.checked_mul(e)?.checked_mul(g)?.checked_sub(e)?;
            for (idx, v) in c.entries().iter().enumerate() {
                sys.set(s, gi * d * d + idx, v.clone());
            }
        }
    }
    Ok(sys
        .kernel_basis()
        .into_iter()
        .map(|coef| {
            coef.iter().zip(&basis).fold(Matrix::zeros(f, d, d), |acc, (c, e)| &acc + &e.scale(c))
        })
        .collect())
}

/// Summary of a finite matrix group.
#[derive(Clone, Debug)]
pub struct GroupReport {
    pub order: GroupOrder,
    pub absolutely_irreducible: bool,
    pub invariant_gram: Option<Matrix>,
    pub recognized: Option<String>,
}

/// Recognizes ⟨gens⟩ = O₃(F_ℓ) through an invariant form and the exact order 2ℓ(ℓ²−1).
pub fn o3_recognition(gens: &[Matrix], ell: u64, cap: u64) -> Result<GroupReport> {
    let first = gens.first().ok_or_else(|| Error::Precondition("no generators".into()))?;
    if first.rows() != 3 {
        return Err(Error::Precondition("O3 recognition needs 3x3 matrices".into()));
    }
    if ell.is_multiple_of(2) || first.field().characteristic() != ell {
        return Err(Error::Precondition(format!("matrices must live over a field of odd characteristic {ell}")));
    }
    let forms = invariant_symmetric_forms(gens)?;
    let gram = nondegenerate_member(&forms)?.ok_or(Error::NoInvariantForm)?;
    let order = group_closure(gens, cap)?;
    let target = 2 * ell * (ell * ell - 1);
    let recognized = (order == GroupOrder::Exact(target)).then(|| format!("O3(F_{ell})"));
    Ok(GroupReport { order, absolutely_irreducible: absolutely_irreducible(gens), invariant_gram: Some(gram), recognized })
}

fn nondegenerate_member(forms: &[Matrix]) -> Result<Option<Matrix>> {
    for g in forms {
        if !g.det()?.is_zero() {
            return Ok(Some(g.clone()));
        }
    }
    if forms.len() < 2 {
        return Ok(None);
    }
    let f = forms[0].field();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..64 {
        let g = forms.iter().fold(Matrix::zeros(f, forms[0].rows(), forms[0].rows()), |acc, m| {
            &acc + &m.scale(&Scalar::from_i64(f, rng.gen_range(-5..=5)))
        });
        if !g.det()?.is_zero() {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

/// Lower bound on the dimension of a block of an imprimitivity decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockBound {
    pub k: usize,
    pub a: usize,
    pub b: usize,
    pub bound: Rational64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitivityReport {
    pub n: usize,
    pub m: usize,
    pub x: usize,
    pub per_block: Vec<BlockBound>,
    /// Smallest bound over all admissible block dimensions, n for n = 1.
    pub bound: Rational64,
    pub primitive: bool,
}

/// For every proper divisor k of n, bounds dim V₁ from below assuming a system
/// of imprimitivity with blocks of dimension k. The group is primitive when
/// every such bound exceeds k.
pub fn primitivity_bound(t: &MonodromyTuple) -> Result<PrimitivityReport> {
    let n = t.dim();
    let f = t.field();
    let pchar = f.characteristic() as usize;
    if !absolutely_irreducible(t.entries()) {
        return Err(Error::Precondition("tuple is not absolutely irreducible".into()));
    }
    let ranks: Vec<usize> = t.entries().iter().map(|e| e.minus_identity().rank()).collect();
    let m: usize = ranks.iter().sum();
    let one = Scalar::one(f);
    let mut x = 0;
    let mut semisimple = Vec::new();
    let mut b = 0;
    for e in t.entries() {
        let jd = e.jordan_data()?;
        let keep = |s: usize| pchar == 0 || !s.is_multiple_of(pchar);
        for blk in jd.blocks() {
            if keep(blk.size) {
                x = x.max(blk.size);
            }
        }
        semisimple.push(jd.blocks().iter().all(|blk| blk.size == 1));
        if jd.blocks().iter().all(|blk| blk.eigenvalue == one) {
            b += jd.blocks().iter().map(|blk| blk.size).filter(|&s| keep(s)).sum::<usize>();
        }
    }
    let mut per_block = Vec::new();
    for k in (1..=n / 2).filter(|k| n.is_multiple_of(*k)) {
        let a: usize = ranks.iter().zip(&semisimple).filter(|(r, s)| **s && **r < k).map(|(r, _)| *r).sum();
        let alt = Rational64::from_integer(n as i64) - Rational64::new(m as i64, 2) + Rational64::new((a + b) as i64, 2);
        let bound = alt.max(Rational64::from_integer(x as i64));
        per_block.push(BlockBound { k, a, b, bound });
    }
    let primitive = per_block.iter().all(|bb| bb.bound > Rational64::from_integer(bb.k as i64));
    let bound = per_block.iter().map(|bb| bb.bound).min().unwrap_or_else(|| Rational64::from_integer(n as i64));
    Ok(PrimitivityReport { n, m, x, per_block, bound, primitive })
}
