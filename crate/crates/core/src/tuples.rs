//! Monodromy tuples, the braid action and parabolic cohomology.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::FieldDescriptor;

/// A tuple (T_1, …, T_{r+1}) of invertible matrices with T_1⋯T_{r+1} = 1.
///
/// The last entry is the loop around infinity; `points`, when present, holds the
/// r finite points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonodromyTuple {
    field: FieldDescriptor,
    dim: usize,
    entries: Vec<Matrix>,
    points: Option<Vec<BigRational>>,
}

impl MonodromyTuple {
    pub fn new(entries: Vec<Matrix>, points: Option<Vec<BigRational>>) -> Result<Self> {
        let first = entries.first().ok_or_else(|| Error::DimensionMismatch("empty tuple".into()))?;
        let field = first.field();
        let dim = first.rows();
        for m in &entries {
            if m.field() != field {
                return Err(Error::FieldMismatch(field.to_string(), m.field().to_string()));
            }
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "entry of size {}x{} in a tuple of dimension {dim}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        let prod = entries.iter().skip(1).try_fold(first.clone(), |acc, m| acc.checked_mul(m))?;
        if !prod.is_identity() {
            return Err(Error::ProductRelation);
        }
        let t = MonodromyTuple { field, dim, entries, points: None };
        t.with_points(points)
    }

    /// Build from the finite entries; the entry at infinity is the inverse of their product.
    pub fn from_finite(finite: Vec<Matrix>, points: Option<Vec<BigRational>>) -> Result<Self> {
        let first = finite.first().ok_or_else(|| Error::DimensionMismatch("empty tuple".into()))?;
        let prod = finite.iter().skip(1).try_fold(first.clone(), |acc, m| acc.checked_mul(m))?;
        let mut entries = finite;
        entries.push(prod.inverse()?);
        MonodromyTuple::new(entries, points)
    }

    /// Replace the point list; requires r distinct points.
    pub fn with_points(mut self, points: Option<Vec<BigRational>>) -> Result<Self> {
        if let Some(pts) = &points {
            if pts.len() != self.r() {
                return Err(Error::InvalidPoints(format!(
                    "{} points for {} finite entries",
                    pts.len(),
                    self.r()
                )));
            }
            for (i, a) in pts.iter().enumerate() {
                if pts[..i].contains(a) {
                    return Err(Error::InvalidPoints(format!("point {a} repeated")));
                }
            }
        }
        self.points = points;
        Ok(self)
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of finite points.
    pub fn r(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn entries(&self) -> &[Matrix] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &Matrix {
        &self.entries[i]
    }

    pub fn infinity(&self) -> &Matrix {
        self.entries.last().expect("nonempty")
    }

    pub fn points(&self) -> Option<&[BigRational]> {
        self.points.as_deref()
    }

    pub fn coerce_to(&self, field: FieldDescriptor) -> Result<Self> {
        let entries = self.entries.iter().map(|m| m.coerce_to(field)).collect::<Result<Vec<_>>>()?;
        MonodromyTuple::new(entries, self.points.clone())
    }

    /// Apply a braid word.
    pub fn braid_act(&self, w: &BraidWord) -> Result<Self> {
        w.check_fits(self.r())?;
        let mut entries = self.entries.clone();
        for &(i, e) in &w.letters {
            act_letter(&mut entries, i, e)?;
        }
        Ok(MonodromyTuple { entries, ..self.clone() })
    }

    /// Φ(T, w) as a matrix on V^{r+1}.
    pub fn phi_matrix(&self, w: &BraidWord) -> Result<Matrix> {
        let n = self.dim * self.entries.len();
        Ok(self.apply_phi(w, &Matrix::identity(self.field, n))?.0)
    }

    /// rows·Φ(T, w) together with T^w, without forming Φ.
    pub fn apply_phi(&self, w: &BraidWord, rows: &Matrix) -> Result<(Matrix, MonodromyTuple)> {
        w.check_fits(self.r())?;
        let d = self.dim;
        if rows.cols() != d * self.entries.len() {
            return Err(Error::DimensionMismatch("vectors do not live in V^{r+1}".into()));
        }
        let mut cur = self.entries.clone();
        let mut v = rows.clone();
        let m = rows.rows();
        for &(i, e) in &w.letters {
            let a = i - 1;
            let xa = v.block(0, a * d, m, d);
            let xb = v.block(0, (a + 1) * d, m, d);
            let (na, nb) = if e > 0 {
                // new_i = v_{i+1}; new_{i+1} = v_{i+1}(1 - T_{i+1}⁻¹T_iT_{i+1}) + v_i T_{i+1}
                let tb = &cur[a + 1];
                let conj = &(&tb.inverse()? * &cur[a]) * tb;
                let one_minus = &Matrix::identity(self.field, d) - &conj;
                let nb = &(&xb * &one_minus) + &(&xa * tb);
                (xb, nb)
            } else {
                // inverse of the generator for the tuple T^{β_i⁻¹}
                let one_minus = Matrix::identity(self.field, d).checked_sub(&cur[a + 1])?;
                let na = &(&xb - &(&xa * &one_minus)) * &cur[a].inverse()?;
                (na, xa)
            };
            v.set_block(0, a * d, &na);
            v.set_block(0, (a + 1) * d, &nb);
            act_letter(&mut cur, i, e)?;
        }
        Ok((v, MonodromyTuple { entries: cur, ..self.clone() }))
    }

    /// Bases of H_T ⊇ U_T ⊇ E_T inside V^{r+1}.
    pub fn cohomology_spaces(&self) -> Result<CohomologySpaces> {
        let d = self.dim;
        let k = self.entries.len();
        let n = d * k;
        let f = self.field;
        // H_T: Σ v_k (T_{k+1}⋯T_{r+1}) = 0
        let mut hm = Matrix::zeros(f, n, d);
        let mut tail = Matrix::identity(f, d);
        for idx in (0..k).rev() {
            hm.set_block(idx * d, 0, &tail);
            tail = self.entries[idx].checked_mul(&tail)?;
        }
        let h = Matrix::from_row_vecs(f, n, &hm.kernel_basis())?.row_space();
        let mut e = Matrix::zeros(f, d, n);
        for (idx, t) in self.entries.iter().enumerate() {
            e.set_block(0, idx * d, &t.minus_identity());
        }
        let e = e.row_space();
        let mut kgens = Vec::new();
        for (idx, t) in self.entries.iter().enumerate() {
            let im = t.minus_identity().row_space();
            for r in 0..im.rows() {
                let mut v = Matrix::zeros(f, 1, n);
                v.set_block(0, idx * d, &im.block(r, 0, 1, d));
                kgens.push(v.row(0).to_vec());
            }
        }
        let kmat = Matrix::from_row_vecs(f, n, &kgens)?;
        let u = if kgens.is_empty() {
            Matrix::zeros(f, 0, n)
        } else {
            let coeffs = Matrix::from_row_vecs(f, kgens.len(), &kmat.checked_mul(&hm)?.kernel_basis())?;
            coeffs.checked_mul(&kmat)?.row_space()
        };
        Ok(CohomologySpaces { h, u, e })
    }

    /// Σ rank(T_i − 1) − 2d + dim V^T + dim V_T, with a flag telling whether
    /// the invariants vanish.
    pub fn parabolic_rank_formula(&self) -> (usize, bool) {
        let d = self.dim;
        let ranks: usize = self.entries.iter().map(|t| t.minus_identity().rank()).sum();
        let f = self.field;
        let n = d * self.entries.len();
        let mut horiz = Matrix::zeros(f, d, n);
        let mut vert = Matrix::zeros(f, n, d);
        for (idx, t) in self.entries.iter().enumerate() {
            let m = t.minus_identity();
            horiz.set_block(0, idx * d, &m);
            vert.set_block(idx * d, 0, &m);
        }
        let invariants = d - horiz.rank();
        let coinvariants = d - vert.rank();
        ((ranks + invariants + coinvariants) - 2 * d, invariants == 0)
    }
}

fn act_letter(entries: &mut [Matrix], i: usize, e: i8) -> Result<()> {
    let a = i - 1;
    let (x, y) = (entries[a].clone(), entries[a + 1].clone());
    if e > 0 {
        let yi = y.inverse()?;
        entries[a + 1] = &(&yi * &x) * &y;
        entries[a] = y;
    } else {
        let xi = x.inverse()?;
        entries[a] = &(&x * &y) * &xi;
        entries[a + 1] = x;
    }
    Ok(())
}

/// A word in the braid generators β_1, …, β_{r−1} and their inverses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BraidWord {
    letters: Vec<(usize, i8)>,
}

impl BraidWord {
    pub fn new(letters: Vec<(usize, i8)>) -> Result<Self> {
        for &(i, e) in &letters {
            if i == 0 || (e != 1 && e != -1) {
                return Err(Error::IndexOutOfRange(format!("letter b{i}^{e}")));
            }
        }
        Ok(BraidWord { letters })
    }

    pub fn empty() -> Self {
        BraidWord::default()
    }

    pub fn generator(i: usize) -> Self {
        BraidWord { letters: vec![(i, 1)] }
    }

    pub fn letters(&self) -> &[(usize, i8)] {
        &self.letters
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Largest generator index used.
    pub fn max_index(&self) -> usize {
        self.letters.iter().map(|l| l.0).max().unwrap_or(0)
    }

    fn check_fits(&self, r: usize) -> Result<()> {
        if self.max_index() >= r.max(1) {
            return Err(Error::IndexOutOfRange(format!(
                "generator b{} on a tuple with {r} finite points",
                self.max_index()
            )));
        }
        Ok(())
    }

    pub fn then(&self, o: &BraidWord) -> BraidWord {
        BraidWord { letters: self.letters.iter().chain(&o.letters).copied().collect() }
    }

    pub fn inverse(&self) -> BraidWord {
        BraidWord { letters: self.letters.iter().rev().map(|&(i, e)| (i, -e)).collect() }
    }

    /// y⁻¹ · self · y.
    pub fn conjugate_by(&self, y: &BraidWord) -> BraidWord {
        y.inverse().then(self).then(y)
    }

    /// β_{i,j} = (β_i²)^{β_{i+1}⁻¹⋯β_{j−1}⁻¹}.
    pub fn pure(i: usize, j: usize) -> Result<Self> {
        if i == 0 || i >= j {
            return Err(Error::Precondition(format!("pure braid needs 1 ≤ i < j, got ({i},{j})")));
        }
        let y = BraidWord { letters: (i + 1..j).map(|k| (k, -1)).collect() };
        Ok(BraidWord { letters: vec![(i, 1), (i, 1)] }.conjugate_by(&y))
    }

    /// The same pure braid written as (β_{j−1}²)^{β_{j−2}⋯β_i}.
    pub fn pure_alt(i: usize, j: usize) -> Result<Self> {
        if i == 0 || i >= j {
            return Err(Error::Precondition(format!("pure braid needs 1 ≤ i < j, got ({i},{j})")));
        }
        let y = BraidWord { letters: (i..j - 1).rev().map(|k| (k, 1)).collect() };
        Ok(BraidWord { letters: vec![(j - 1, 1), (j - 1, 1)] }.conjugate_by(&y))
    }
}

/// The pure braid β_{i,j} acting on r finite points.
pub fn pure_braid(i: usize, j: usize, r: usize) -> Result<BraidWord> {
    if j > r {
        return Err(Error::Precondition(format!("pure braid ({i},{j}) needs j ≤ r = {r}")));
    }
    BraidWord::pure(i, j)
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|&(i, e)| if e > 0 { format!("b{i}") } else { format!("b{i}^-1") })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for BraidWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        let mut offset = 0;
        for tok in s.split_whitespace() {
            let pos = s[offset..].find(tok).map_or(offset, |p| p + offset);
            offset = pos + tok.len();
            let bad = |msg: &str| Error::ParseError { pos, msg: format!("{msg} in '{tok}'") };
            let body = tok.strip_prefix('b').ok_or_else(|| bad("expected 'b'"))?;
            let (idx, exp) = match body.split_once('^') {
                Some((i, "-1")) => (i, -1),
                Some((i, "1")) => (i, 1),
                Some(_) => return Err(bad("exponent must be 1 or -1")),
                None => (body, 1),
            };
            let i: usize = idx.parse().map_err(|_| bad("bad generator index"))?;
            if i == 0 {
                return Err(bad("generator indices start at 1"));
            }
            letters.push((i, exp));
        }
        Ok(BraidWord { letters })
    }
}

/// Row bases (reduced echelon) of H_T ⊇ U_T ⊇ E_T.
#[derive(Clone, Debug)]
pub struct CohomologySpaces {
    pub h: Matrix,
    pub u: Matrix,
    pub e: Matrix,
}

impl CohomologySpaces {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.h.rows(), self.e.rows(), self.u.rows())
    }

    /// dim H¹ = dim H_T − dim E_T.
    pub fn h1_dim(&self) -> usize {
        self.h.rows() - self.e.rows()
    }

    /// dim H¹_p = dim U_T − dim E_T.
    pub fn parabolic_dim(&self) -> usize {
        self.u.rows() - self.e.rows()
    }
}
