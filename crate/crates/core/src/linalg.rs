//! Dense exact matrices. Matrices act on row vectors from the right.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{FieldDescriptor, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: FieldDescriptor,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn new(field: FieldDescriptor, rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(x) = data.iter().find(|x| x.field() != field) {
            return Err(Error::FieldMismatch(field.to_string(), x.field().to_string()));
        }
        Ok(Matrix { field, rows, cols, data })
    }

    pub fn from_rows(field: FieldDescriptor, rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Matrix::new(field, r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_ints<R: AsRef<[i64]>>(field: FieldDescriptor, rows: &[R]) -> Self {
        let rows: Vec<Vec<Scalar>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| Scalar::from_i64(field, x)).collect())
            .collect();
        Matrix::from_rows(field, rows).expect("rectangular integer grid")
    }

    pub fn zeros(field: FieldDescriptor, rows: usize, cols: usize) -> Self {
        Matrix { field, rows, cols, data: vec![Scalar::zero(field); rows * cols] }
    }

    pub fn identity(field: FieldDescriptor, n: usize) -> Self {
        Matrix::scalar(&Scalar::one(field), n)
    }

    /// c times the n×n identity.
    pub fn scalar(c: &Scalar, n: usize) -> Self {
        let mut m = Matrix::zeros(c.field(), n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn diagonal(field: FieldDescriptor, diag: &[Scalar]) -> Self {
        let n = diag.len();
        let mut m = Matrix::zeros(field, n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = d.clone();
        }
        m
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert_eq!(v.field(), self.field, "entry from another field");
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = self.get(i, j);
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix { field: self.field, rows: self.cols, cols: self.rows, data }
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Result<Scalar>) -> Result<Matrix> {
        let data = self.data.iter().map(f).collect::<Result<Vec<_>>>()?;
        let field = data.first().map_or(self.field, |x| x.field());
        Matrix::new(field, self.rows, self.cols, data)
    }

    pub fn coerce_to(&self, field: FieldDescriptor) -> Result<Matrix> {
        let data = self.data.iter().map(|x| x.coerce_to(field)).collect::<Result<Vec<_>>>()?;
        Matrix::new(field, self.rows, self.cols, data)
    }

    fn same_field(&self, o: &Matrix) -> Result<()> {
        if self.field != o.field {
            return Err(Error::FieldMismatch(self.field.to_string(), o.field.to_string()));
        }
        Ok(())
    }

    pub fn checked_mul(&self, o: &Matrix) -> Result<Matrix> {
        self.same_field(o)?;
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = Matrix::zeros(self.field, self.rows, o.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * o.cols..(i + 1) * o.cols];
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for (j, b) in o.row(k).iter().enumerate() {
                    if !b.is_zero() {
                        orow[j] = &orow[j] + &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn apply_row(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![Scalar::zero(self.field); self.cols];
        for (k, a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in self.row(k).iter().enumerate() {
                if !b.is_zero() {
                    out[j] = &out[j] + &(a * b);
                }
            }
        }
        out
    }

    fn zip(&self, o: &Matrix, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Result<Matrix> {
        self.same_field(o)?;
        if self.rows != o.rows || self.cols != o.cols {
            return Err(Error::DimensionMismatch("shapes differ".into()));
        }
        let data = self.data.iter().zip(&o.data).map(|(a, b)| f(a, b)).collect();
        Ok(Matrix { field: self.field, rows: self.rows, cols: self.cols, data })
    }

    pub fn checked_add(&self, o: &Matrix) -> Result<Matrix> {
        self.zip(o, |a, b| a + b)
    }

    pub fn checked_sub(&self, o: &Matrix) -> Result<Matrix> {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// M - c·1.
    pub fn minus_scalar(&self, c: &Scalar) -> Matrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            let k = i * self.cols + i;
            m.data[k] = &m.data[k] - c;
        }
        m
    }

    pub fn minus_identity(&self) -> Matrix {
        self.minus_scalar(&Scalar::one(self.field))
    }

    pub fn trace(&self) -> Scalar {
        (0..self.rows.min(self.cols)).fold(Scalar::zero(self.field), |acc, i| &acc + self.get(i, i))
    }

    pub fn pow(&self, e: i64) -> Result<Matrix> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut r = Matrix::identity(self.field, self.rows);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                r = r.checked_mul(&b)?;
            }
            e >>= 1;
            if e > 0 {
                b = b.checked_mul(&b)?;
            }
        }
        Ok(r)
    }

    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Matrix {
        let mut data = Vec::with_capacity(h * w);
        for i in r0..r0 + h {
            data.extend_from_slice(&self.data[i * self.cols + c0..i * self.cols + c0 + w]);
        }
        Matrix { field: self.field, rows: h, cols: w, data }
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.data[(r0 + i) * self.cols + c0 + j] = b.get(i, j).clone();
            }
        }
    }

    pub fn vstack(field: FieldDescriptor, cols: usize, parts: &[&Matrix]) -> Result<Matrix> {
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            if p.cols != cols {
                return Err(Error::DimensionMismatch("vstack column counts differ".into()));
            }
            if p.rows > 0 && p.field != field {
                return Err(Error::FieldMismatch(field.to_string(), p.field.to_string()));
            }
            data.extend_from_slice(&p.data);
            rows += p.rows;
        }
        Matrix::new(field, rows, cols, data)
    }

    pub fn from_row_vecs(field: FieldDescriptor, cols: usize, rows: &[Vec<Scalar>]) -> Result<Matrix> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("row length".into()));
        }
        Matrix::new(field, rows.len(), cols, rows.iter().flatten().cloned().collect())
    }

    /// Kronecker product with basis e_i ⊗ f_j ordered lexicographically.
    pub fn kronecker(&self, o: &Matrix) -> Result<Matrix> {
        self.same_field(o)?;
        let (r, c) = (self.rows * o.rows, self.cols * o.cols);
        let mut out = Matrix::zeros(self.field, r, c);
        for i1 in 0..self.rows {
            for i2 in 0..self.cols {
                let a = self.get(i1, i2);
                if a.is_zero() {
                    continue;
                }
                for j1 in 0..o.rows {
                    for j2 in 0..o.cols {
                        let b = o.get(j1, j2);
                        if !b.is_zero() {
                            out.data[(i1 * o.rows + j1) * c + i2 * o.cols + j2] = a * b;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row echelon form by Gaussian elimination with first-nonzero pivoting.
    /// Returns the pivot columns and the sign of the row permutation.
    fn echelon_in_place(&mut self, reduced: bool) -> (Vec<usize>, bool) {
        let mut pivots = Vec::new();
        let mut odd = false;
        let mut r = 0;
        let cols = self.cols;
        for c in 0..cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.data[i * cols + c].is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..cols {
                    self.data.swap(p * cols + j, r * cols + j);
                }
                odd = !odd;
            }
            if reduced {
                let inv = self.data[r * cols + c].inv().expect("pivot is nonzero");
                for j in c..cols {
                    let k = r * cols + j;
                    if !self.data[k].is_zero() {
                        self.data[k] = &self.data[k] * &inv;
                    }
                }
            }
            let nz: Vec<usize> = (c..cols).filter(|&j| !self.data[r * cols + j].is_zero()).collect();
            let piv_row: Vec<Scalar> = nz.iter().map(|&j| self.data[r * cols + j].clone()).collect();
            let piv_inv = if reduced { None } else { Some(piv_row[0].inv().expect("nonzero")) };
            let start = if reduced { 0 } else { r + 1 };
            for i in start..self.rows {
                if i == r {
                    continue;
                }
                let x = &self.data[i * cols + c];
                if x.is_zero() {
                    continue;
                }
                let f = match &piv_inv {
                    Some(pi) => x * pi,
                    None => x.clone(),
                };
                for (&j, v) in nz.iter().zip(&piv_row) {
                    let k = i * cols + j;
                    self.data[k] = &self.data[k] - &(&f * v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (pivots, odd)
    }

    /// Reduced row echelon form together with its pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let (p, _) = m.echelon_in_place(true);
        (m, p)
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.echelon_in_place(false).0.len()
    }

    /// Basis of the row space: the nonzero rows of the reduced echelon form.
    pub fn row_space(&self) -> Matrix {
        let (m, p) = self.rref();
        m.block(0, 0, p.len(), self.cols)
    }

    /// Basis of {x : M x = 0} as vectors.
    pub fn right_kernel(&self) -> Vec<Vec<Scalar>> {
        let (m, pivots) = self.rref();
        let mut is_pivot = vec![None; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            is_pivot[c] = Some(r);
        }
        let mut out = Vec::new();
        for free in 0..self.cols {
            if is_pivot[free].is_some() {
                continue;
            }
            let mut v = vec![Scalar::zero(self.field); self.cols];
            v[free] = Scalar::one(self.field);
            for (r, &c) in pivots.iter().enumerate() {
                let x = m.get(r, free);
                if !x.is_zero() {
                    v[c] = -x;
                }
            }
            out.push(v);
        }
        out
    }

    /// Basis of {v : v M = 0}.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        self.transpose().right_kernel()
    }

    pub fn det(&self) -> Result<Scalar> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let mut m = self.clone();
        let (p, odd) = m.echelon_in_place(false);
        if p.len() < self.rows {
            return Ok(Scalar::zero(self.field));
        }
        let mut d = Scalar::one(self.field);
        for i in 0..self.rows {
            d = &d * m.get(i, i);
        }
        Ok(if odd { -d } else { d })
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(self.clone());
        }
        let mut aug = Matrix::zeros(self.field, n, 2 * n);
        aug.set_block(0, 0, self);
        aug.set_block(0, n, &Matrix::identity(self.field, n));
        let (p, _) = aug.echelon_in_place(true);
        if p.len() < n || p[n - 1] >= n {
            return Err(Error::NotInvertible);
        }
        Ok(aug.block(0, n, n, n))
    }

    /// Characteristic polynomial det(x - M) via reduction to Hessenberg form.
    pub fn char_poly(&self) -> Result<Poly> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("char_poly of a non-square matrix".into()));
        }
        let n = self.rows;
        let f = self.field;
        let mut h = self.clone();
        for j in 0..n.saturating_sub(2) {
            let Some(piv) = (j + 1..n).find(|&i| !h.get(i, j).is_zero()) else { continue };
            if piv != j + 1 {
                for c in 0..n {
                    h.data.swap(piv * n + c, (j + 1) * n + c);
                }
                for r in 0..n {
                    h.data.swap(r * n + piv, r * n + j + 1);
                }
            }
            let pinv = h.get(j + 1, j).inv()?;
            for k in j + 2..n {
                if h.get(k, j).is_zero() {
                    continue;
                }
                let u = h.get(k, j) * &pinv;
                for c in 0..n {
                    let v = &h.data[(j + 1) * n + c] * &u;
                    if !v.is_zero() {
                        h.data[k * n + c] = &h.data[k * n + c] - &v;
                    }
                }
                for r in 0..n {
                    let v = &h.data[r * n + k] * &u;
                    if !v.is_zero() {
                        h.data[r * n + j + 1] = &h.data[r * n + j + 1] + &v;
                    }
                }
            }
        }
        let mut ps: Vec<Poly> = vec![Poly::one(f)];
        for m in 0..n {
            let mut pm = Poly::linear(h.get(m, m)).mul(&ps[m]);
            let mut prod = Scalar::one(f);
            for i in (0..m).rev() {
                prod = &prod * h.get(i + 1, i);
                if prod.is_zero() {
                    break;
                }
                let c = &prod * h.get(i, m);
                if !c.is_zero() {
                    pm = pm.sub(&ps[i].scale(&c));
                }
            }
            ps.push(pm);
        }
        Ok(ps.pop().expect("nonempty"))
    }

    /// Jordan normal form data over the matrix's own field.
    pub fn jordan_data(&self) -> Result<JordanData> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("jordan_data of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut blocks = Vec::new();
        let mut found: Vec<(Scalar, usize)> = Vec::new();
        let mut total = 0;
        let mut candidates = vec![Scalar::zero(self.field)];
        candidates.extend(self.field.roots_of_unity());
        let mut tried: Vec<Scalar> = Vec::new();
        let probe = |mu: &Scalar, blocks: &mut Vec<JordanBlock>, found: &mut Vec<(Scalar, usize)>| {
            let mult = self.eigen_blocks(mu, blocks);
            if mult > 0 {
                found.push((mu.clone(), mult));
            }
            mult
        };
        for mu in &candidates {
            if total == n {
                break;
            }
            tried.push(mu.clone());
            total += probe(mu, &mut blocks, &mut found);
        }
        if total < n {
            let mut rest = self.char_poly()?;
            for (mu, m) in &found {
                rest = rest.exact_div(&Poly::linear(mu).pow(*m as u32))?;
            }
            for mu in rational_roots(&rest) {
                if tried.contains(&mu) {
                    continue;
                }
                tried.push(mu.clone());
                let m = probe(&mu, &mut blocks, &mut found);
                rest = rest.exact_div(&Poly::linear(&mu).pow(m as u32))?;
                total += m;
            }
            if total < n {
                return Err(Error::DoesNotSplit { factor: rest.to_string() });
            }
        }
        Ok(JordanData::new(blocks))
    }

    /// Distinct eigenvalues lying in the field that are zero, a root of unity
    /// or a rational root of the characteristic polynomial.
    pub fn field_eigenvalues(&self) -> Result<Vec<Scalar>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("eigenvalues of a non-square matrix".into()));
        }
        let mut cands = vec![Scalar::zero(self.field)];
        cands.extend(self.field.roots_of_unity());
        cands.extend(rational_roots(&self.char_poly()?));
        let mut out: Vec<Scalar> = Vec::new();
        for mu in cands {
            if !out.contains(&mu) && self.minus_scalar(&mu).rank() < self.rows {
                out.push(mu);
            }
        }
        Ok(out)
    }

    /// Appends the Jordan blocks for eigenvalue mu and returns its algebraic multiplicity.
    fn eigen_blocks(&self, mu: &Scalar, blocks: &mut Vec<JordanBlock>) -> usize {
        let n = self.rows;
        let nm = self.minus_scalar(mu);
        let mut ranks = vec![n];
        let mut power = nm.clone();
        loop {
            let r = power.rank();
            let prev = *ranks.last().expect("nonempty");
            if r == prev {
                break;
            }
            ranks.push(r);
            if r == 0 {
                break;
            }
            power = power.checked_mul(&nm).expect("square");
        }
        // ranks[k] = rank(N^k); blocks of size ≥ k number ranks[k-1] - ranks[k].
        let k_max = ranks.len() - 1;
        for k in 1..=k_max {
            let at_least_k = ranks[k - 1] - ranks[k];
            let at_least_next = if k < k_max { ranks[k] - ranks[k + 1] } else { 0 };
            for _ in 0..at_least_k - at_least_next {
                blocks.push(JordanBlock { eigenvalue: mu.clone(), size: k });
            }
        }
        n - ranks[k_max]
    }
}

/// Rational roots of a polynomial whose coefficients are rational numbers in a
/// characteristic-zero field; for finite fields every element is tried.
fn rational_roots(p: &Poly) -> Vec<Scalar> {
    let f = p.field();
    if p.degree() < 1 {
        return Vec::new();
    }
    if let FieldDescriptor::Finite(_) = f {
        return f.finite_elements().into_iter().filter(|x| p.eval(x).is_zero()).collect();
    }
    let Some(rs) = p.coeffs().iter().map(|c| c.to_rational()).collect::<Option<Vec<BigRational>>>() else {
        return Vec::new();
    };
    let den = rs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = rs.iter().map(|x| x.numer() * (&den / x.denom())).collect();
    let mut out = Vec::new();
    let low = ints.iter().position(|x| !x.is_zero()).expect("nonzero polynomial");
    if low > 0 {
        out.push(Scalar::zero(f));
    }
    let (a0, an) = (&ints[low], ints.last().expect("nonempty"));
    let (Some(num_divs), Some(den_divs)) = (divisors(a0), divisors(an)) else { return out };
    for q in &den_divs {
        for pn in &num_divs {
            if pn.gcd(q) != 1 {
                continue;
            }
            for s in [1i64, -1] {
                let r = BigRational::new(BigInt::from(s * *pn as i64), BigInt::from(*q));
                let x = Scalar::from_rational(f, &r).expect("characteristic zero");
                if p.eval(&x).is_zero() && !out.contains(&x) {
                    out.push(x);
                }
            }
        }
    }
    out
}

fn divisors(n: &BigInt) -> Option<Vec<u64>> {
    let n = n.abs().to_u64()?;
    if n > 1_000_000_000_000 {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    Some(out)
}

macro_rules! matop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr<&Matrix> for &Matrix {
            type Output = Matrix;
            fn $m(self, o: &Matrix) -> Matrix {
                self.$checked(o).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<Matrix> for Matrix {
            type Output = Matrix;
            fn $m(self, o: Matrix) -> Matrix {
                (&self).$m(&o)
            }
        }
    };
}

matop!(Mul, mul, checked_mul);
matop!(Add, add, checked_add);
matop!(Sub, sub, checked_sub);

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(&-Scalar::one(self.field))
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JordanBlock {
    pub eigenvalue: Scalar,
    pub size: usize,
}

impl fmt::Display for JordanBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J({},{})", self.eigenvalue, self.size)
    }
}

/// A multiset of Jordan blocks, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JordanData {
    blocks: Vec<JordanBlock>,
}

impl JordanData {
    pub fn new(mut blocks: Vec<JordanBlock>) -> Self {
        blocks.retain(|b| b.size > 0);
        blocks.sort_by(|a, b| a.eigenvalue.cmp(&b.eigenvalue).then(b.size.cmp(&a.size)));
        JordanData { blocks }
    }

    pub fn blocks(&self) -> &[JordanBlock] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    /// Number of blocks J(eigenvalue, size).
    pub fn count(&self, eigenvalue: &Scalar, size: usize) -> usize {
        self.blocks.iter().filter(|b| &b.eigenvalue == eigenvalue && b.size == size).count()
    }

    /// Sizes of the blocks with the given eigenvalue, largest first.
    pub fn sizes(&self, eigenvalue: &Scalar) -> Vec<usize> {
        self.blocks.iter().filter(|b| &b.eigenvalue == eigenvalue).map(|b| b.size).collect()
    }

    /// Explicit block-diagonal matrix with upper Jordan blocks.
    pub fn to_matrix(&self, field: FieldDescriptor) -> Matrix {
        let n = self.dim();
        let mut m = Matrix::zeros(field, n, n);
        let mut at = 0;
        for b in &self.blocks {
            for k in 0..b.size {
                m.set(at + k, at + k, b.eigenvalue.clone());
                if k + 1 < b.size {
                    m.set(at + k, at + k + 1, Scalar::one(field));
                }
            }
            at += b.size;
        }
        m
    }
}

impl fmt::Display for JordanData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// The single Jordan block J(α, n).
pub fn jordan_block(alpha: &Scalar, n: usize) -> Matrix {
    JordanData::new(vec![JordanBlock { eigenvalue: alpha.clone(), size: n }]).to_matrix(alpha.field())
}

/// Jordan form of J(α,n1) ⊗ J(β,n2) in characteristic zero.
pub fn kronecker_jordan(alpha: &Scalar, n1: usize, beta: &Scalar, n2: usize) -> Result<JordanData> {
    if alpha.field() != beta.field() {
        return Err(Error::FieldMismatch(alpha.field().to_string(), beta.field().to_string()));
    }
    if alpha.field().characteristic() != 0 {
        return Err(Error::Precondition("kronecker_jordan needs characteristic zero".into()));
    }
    if alpha.is_zero() || beta.is_zero() || n1 == 0 || n2 == 0 {
        return Err(Error::Precondition("eigenvalues must be nonzero and sizes positive".into()));
    }
    let (n1, n2) = if n1 <= n2 { (n1, n2) } else { (n2, n1) };
    let ab = alpha * beta;
    Ok(JordanData::new(
        (0..n1).map(|i| JordanBlock { eigenvalue: ab.clone(), size: n1 + n2 - 1 - 2 * i }).collect(),
    ))
}

/// Incrementally built row echelon basis that remembers how each stored row
/// is expressed in the inserted vectors.
#[derive(Clone, Debug)]
pub struct Echelon {
    field: FieldDescriptor,
    width: usize,
    rows: Vec<(usize, Vec<Scalar>)>,
    combos: Vec<Vec<Scalar>>,
    inserted: usize,
}

impl Echelon {
    pub fn new(field: FieldDescriptor, width: usize) -> Self {
        Echelon { field, width, rows: Vec::new(), combos: Vec::new(), inserted: 0 }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce v against the stored rows; returns the residual and the coefficients used.
    fn reduce(&self, v: &[Scalar]) -> (Vec<Scalar>, Vec<Scalar>) {
        let mut v = v.to_vec();
        let mut coef = Vec::with_capacity(self.rows.len());
        for (p, row) in &self.rows {
            let c = v[*p].clone();
            if !c.is_zero() {
                for (j, x) in row.iter().enumerate().skip(*p) {
                    if !x.is_zero() {
                        v[j] = &v[j] - &(&c * x);
                    }
                }
            }
            coef.push(c);
        }
        (v, coef)
    }

    /// Insert a vector; returns true when it enlarged the span.
    pub fn insert(&mut self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.width);
        let idx = self.inserted;
        self.inserted += 1;
        let (mut res, coef) = self.reduce(v);
        let Some(p) = res.iter().position(|x| !x.is_zero()) else { return false };
        let inv = res[p].inv().expect("nonzero");
        for x in res.iter_mut().skip(p) {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        // new row = inv · (v - Σ coef_k row_k), expressed in inserted vectors
        let mut combo = vec![Scalar::zero(self.field); idx + 1];
        combo[idx] = inv.clone();
        for (c, prev) in coef.iter().zip(&self.combos) {
            if c.is_zero() {
                continue;
            }
            let f = c * &inv;
            for (j, y) in prev.iter().enumerate() {
                if !y.is_zero() {
                    combo[j] = &combo[j] - &(&f * y);
                }
            }
        }
        self.rows.push((p, res));
        self.combos.push(combo);
        true
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v).0.iter().all(|x| x.is_zero())
    }

    /// Coefficients c with Σ c_k · (k-th inserted vector) = v, or None if v is outside the span.
    /// Inserted vectors that were dependent receive coefficient zero.
    pub fn coordinates(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        let (res, coef) = self.reduce(v);
        if res.iter().any(|x| !x.is_zero()) {
            return None;
        }
        let mut out = vec![Scalar::zero(self.field); self.inserted];
        for (c, combo) in coef.iter().zip(&self.combos) {
            if c.is_zero() {
                continue;
            }
            for (j, y) in combo.iter().enumerate() {
                if !y.is_zero() {
                    out[j] = &out[j] + &(c * y);
                }
            }
        }
        Some(out)
    }
}

/// Basis (as rows) of the intersection of two row spaces.
pub fn intersect_row_spaces(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let a = a.row_space();
    let b = b.row_space();
    let f = a.field();
    if a.rows() == 0 || b.rows() == 0 {
        return Ok(Matrix::zeros(f, 0, a.cols()));
    }
    let stacked = Matrix::vstack(f, a.cols(), &[&a, &b])?;
    let mut gens = Vec::new();
    for w in stacked.kernel_basis() {
        gens.push(Matrix::new(f, 1, a.rows(), w[..a.rows()].to_vec())?.checked_mul(&a)?.row(0).to_vec());
    }
    Ok(Matrix::from_row_vecs(f, a.cols(), &gens)?.row_space())
}

/// Seed of the random combinations tried by [`conjugacy_solve`].
pub const CONJUGACY_SEED: u64 = 0x5eed;

/// Find S with S⁻¹·TA_i·S = TB_i for every i.
pub fn conjugacy_solve(ta: &[Matrix], tb: &[Matrix]) -> Result<Option<Matrix>> {
    conjugacy_solve_seeded(ta, tb, CONJUGACY_SEED)
}

pub fn conjugacy_solve_seeded(ta: &[Matrix], tb: &[Matrix], seed: u64) -> Result<Option<Matrix>> {
    if ta.len() != tb.len() {
        return Err(Error::DimensionMismatch("tuples of different length".into()));
    }
    let Some(first) = ta.first() else { return Ok(None) };
    let f = first.field();
    let d = first.rows();
    for m in ta.iter().chain(tb) {
        if m.field() != f {
            return Err(Error::FieldMismatch(f.to_string(), m.field().to_string()));
        }
        if m.rows() != d || m.cols() != d {
            return Err(Error::DimensionMismatch("entries of different size".into()));
        }
    }
    // TA_i X - X TB_i = 0, unknown X[s][c] at index s*d + c.
    let nv = d * d;
    let mut sys = Matrix::zeros(f, ta.len() * nv, nv);
    for (k, (a, b)) in ta.iter().zip(tb).enumerate() {
        for r in 0..d {
            for c in 0..d {
                let row = k * nv + r * d + c;
                for s in 0..d {
                    let x = a.get(r, s);
                    if !x.is_zero() {
                        let cur = sys.get(row, s * d + c).clone();
                        sys.set(row, s * d + c, &cur + x);
                    }
                    let y = b.get(s, c);
                    if !y.is_zero() {
                        let cur = sys.get(row, r * d + s).clone();
                        sys.set(row, r * d + s, &cur - y);
                    }
                }
            }
        }
    }
    let basis: Vec<Matrix> = sys
        .right_kernel()
        .into_iter()
        .map(|v| Matrix::new(f, d, d, v).expect("d×d"))
        .collect();
    if basis.is_empty() {
        return Ok(None);
    }
    let invertible = |m: &Matrix| m.rank() == d;
    for m in &basis {
        if invertible(m) {
            return Ok(Some(m.clone()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let range: i64 = match f {
        FieldDescriptor::Finite(ff) => ff.p() as i64,
        _ => 1_000_003,
    };
    for _ in 0..64 {
        let mut acc = Matrix::zeros(f, d, d);
        for m in &basis {
            let c = Scalar::from_i64(f, rng.gen_range(-range..=range));
            acc = &acc + &m.scale(&c);
        }
        if invertible(&acc) {
            return Ok(Some(acc));
        }
    }
    Ok(None)
}
