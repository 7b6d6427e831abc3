//! The middle convolution of monodromy tuples and its bookkeeping.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{intersect_row_spaces, Echelon, JordanBlock, JordanData, Matrix};
use crate::modgroup::absolutely_irreducible;
use crate::scalar::{FieldDescriptor, Scalar};
use crate::tuples::{BraidWord, MonodromyTuple};

/// Spacing of the default right-hand points.
pub const DEFAULT_POINT_GAP: i64 = 1009;

/// Two tuples to convolve.
///
/// Left entry k sits at the k-th smallest left point and right entry j at the
/// j-th largest right point. Missing point lists default to 1, …, p on the left
/// and 1009·q > … > 1009 on the right.
#[derive(Clone, Debug)]
pub struct ConvolutionInput {
    pub left: MonodromyTuple,
    pub right: MonodromyTuple,
}

impl ConvolutionInput {
    pub fn new(left: MonodromyTuple, right: MonodromyTuple) -> Result<Self> {
        if left.field() != right.field() {
            return Err(Error::FieldMismatch(left.field().to_string(), right.field().to_string()));
        }
        Ok(ConvolutionInput { left, right })
    }

    pub fn p(&self) -> usize {
        self.left.r()
    }

    pub fn q(&self) -> usize {
        self.right.r()
    }

    /// Left points ascending.
    pub fn left_points(&self) -> Vec<BigRational> {
        match self.left.points() {
            Some(pts) => {
                let mut v = pts.to_vec();
                v.sort();
                v
            }
            None => (1..=self.p() as i64).map(|k| BigRational::from_integer(k.into())).collect(),
        }
    }

    /// Right points descending.
    pub fn right_points(&self) -> Vec<BigRational> {
        match self.right.points() {
            Some(pts) => {
                let mut v = pts.to_vec();
                v.sort_by(|a, b| b.cmp(a));
                v
            }
            None => default_right_points(self.q()),
        }
    }

    /// Label x_i + y_j of δ_{i,j} (1-based).
    pub fn label(&self, i: usize, j: usize) -> BigRational {
        &self.left_points()[i - 1] + &self.right_points()[j - 1]
    }

    /// True when the pq sums x_i + y_j are pairwise distinct.
    pub fn is_generic(&self) -> bool {
        let xs = self.left_points();
        let ys = self.right_points();
        let mut sums: Vec<BigRational> = xs.iter().flat_map(|x| ys.iter().map(move |y| x + y)).collect();
        let n = sums.len();
        sums.sort();
        sums.dedup();
        sums.len() == n
    }
}

pub fn default_right_points(q: usize) -> Vec<BigRational> {
    (1..=q as i64).map(|j| BigRational::from_integer(BigInt::from(DEFAULT_POINT_GAP * (q as i64 - j + 1)))).collect()
}

/// The rank-one Kummer tuple (λ, λ⁻¹).
pub fn kummer(lambda: &Scalar) -> Result<MonodromyTuple> {
    MonodromyTuple::new(vec![Matrix::scalar(lambda, 1), Matrix::scalar(&lambda.inv()?, 1)], None)
}

/// (A_1⊗1, …, A_p⊗1, 1⊗B_1, …, 1⊗B_q, A_{p+1}⊗B_{q+1}).
pub fn circ_tuple(inp: &ConvolutionInput) -> Result<MonodromyTuple> {
    let f = inp.left.field();
    let (p, q) = (inp.p(), inp.q());
    let i1 = Matrix::identity(f, inp.left.dim());
    let i2 = Matrix::identity(f, inp.right.dim());
    let mut entries = Vec::with_capacity(p + q + 1);
    for a in &inp.left.entries()[..p] {
        entries.push(a.kronecker(&i2)?);
    }
    for b in &inp.right.entries()[..q] {
        entries.push(i1.kronecker(b)?);
    }
    entries.push(inp.left.infinity().kronecker(inp.right.infinity())?);
    let xs = inp.left_points();
    let ys = inp.right_points();
    let top = |v: &[BigRational]| v.iter().max().cloned().unwrap_or_else(BigRational::zero);
    let y0 = top(&xs) + top(&ys) + BigRational::one();
    let mut pts = xs;
    pts.extend(ys.iter().map(|y| &y0 - y));
    MonodromyTuple::new(entries, Some(pts))
}

/// The braid word φ(δ_{i,j}) acting on the circ tuple.
pub fn delta_word(i: usize, j: usize, p: usize) -> Result<BraidWord> {
    let base = BraidWord::pure(i, p + 1)?;
    let y = BraidWord::new((p + 1..p + j).map(|k| (k, 1)).collect())?;
    Ok(base.conjugate_by(&y))
}

/// One local monodromy matrix D_{i,j} of the convolution.
#[derive(Clone, Debug)]
pub struct DeltaEntry {
    pub i: usize,
    pub j: usize,
    pub label: BigRational,
    pub matrix: Matrix,
}

/// Full output of [`middle_convolution_detailed`].
#[derive(Clone, Debug)]
pub struct Convolution {
    pub tuple: MonodromyTuple,
    /// D_{i,j} in the order δ_{1,q}, …, δ_{p,q}, …, δ_{1,1}, …, δ_{p,1}.
    pub deltas: Vec<DeltaEntry>,
    pub circ: MonodromyTuple,
    pub dim_u: usize,
    pub dim_e: usize,
}

impl Convolution {
    pub fn delta(&self, i: usize, j: usize) -> Option<&Matrix> {
        self.deltas.iter().find(|d| d.i == i && d.j == j).map(|d| &d.matrix)
    }
}

pub fn middle_convolution(inp: &ConvolutionInput) -> Result<MonodromyTuple> {
    Ok(middle_convolution_detailed(inp)?.tuple)
}

pub fn middle_convolution_detailed(inp: &ConvolutionInput) -> Result<Convolution> {
    let f = inp.left.field();
    let (p, q) = (inp.p(), inp.q());
    let circ = circ_tuple(inp)?;
    let n = circ.dim() * circ.entries().len();
    let spaces = circ.cohomology_spaces()?;
    let (eb, ub) = (&spaces.e, &spaces.u);

    // Quotient basis: rows of U that are independent modulo E.
    let mut acc = Echelon::new(f, n);
    for k in 0..eb.rows() {
        acc.insert(eb.row(k));
    }
    let mut quot = Vec::new();
    for k in 0..ub.rows() {
        if acc.insert(ub.row(k)) {
            quot.push(ub.row(k).to_vec());
        }
    }
    let m = quot.len();
    if m != ub.rows() - eb.rows() {
        return Err(Error::DimensionInconsistency("E_C is not contained in U_C".into()));
    }
    let mut frame_rows = quot.clone();
    frame_rows.extend(eb.row_vecs());
    let frame = Matrix::from_row_vecs(f, n, &frame_rows)?;
    let mut coords = Echelon::new(f, n);
    for r in &frame_rows {
        coords.insert(r);
    }

    let jobs: Vec<(usize, usize)> = (1..=q).rev().flat_map(|j| (1..=p).map(move |i| (i, j))).collect();
    let results: Vec<Result<DeltaEntry>> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let w = delta_word(i, j, p)?;
            let (img, after) = circ.apply_phi(&w, &frame)?;
            if after.entries() != circ.entries() {
                return Err(Error::DimensionInconsistency(format!("braid for δ({i},{j}) moves the circ tuple")));
            }
            let mut data = Vec::with_capacity(m * m);
            for r in 0..frame.rows() {
                let c = coords.coordinates(img.row(r)).ok_or_else(|| {
                    Error::DimensionInconsistency(format!("δ({i},{j}) does not preserve U_C"))
                })?;
                if r < m {
                    data.extend_from_slice(&c[..m]);
                } else if c[..m].iter().any(|x| !x.is_zero()) {
                    return Err(Error::DimensionInconsistency(format!("δ({i},{j}) does not preserve E_C")));
                }
            }
            Ok(DeltaEntry { i, j, label: inp.label(i, j), matrix: Matrix::new(f, m, m, data)? })
        })
        .collect();
    let deltas = results.into_iter().collect::<Result<Vec<_>>>()?;

    let tuple = assemble(&deltas, f, m)?;
    Ok(Convolution { tuple, deltas, circ, dim_u: ub.rows(), dim_e: eb.rows() })
}

/// Merge runs of equal labels and append the entry at infinity.
fn assemble(deltas: &[DeltaEntry], f: FieldDescriptor, m: usize) -> Result<MonodromyTuple> {
    let mut merged: Vec<(BigRational, Matrix)> = Vec::new();
    for d in deltas {
        match merged.last_mut() {
            Some((lab, mat)) if *lab == d.label => *mat = mat.checked_mul(&d.matrix)?,
            _ => {
                if merged.iter().any(|(lab, _)| *lab == d.label) {
                    return Err(Error::LayoutError(format!(
                        "coinciding points {} are not adjacent in the loop order",
                        d.label
                    )));
                }
                merged.push((d.label.clone(), d.matrix.clone()));
            }
        }
    }
    if merged.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::LayoutError(
            "the sums x_i + y_j are not increasing in the loop order; spread the right points further apart".into(),
        ));
    }
    let prod = merged.iter().try_fold(Matrix::identity(f, m), |acc, (_, x)| acc.checked_mul(x))?;
    let (points, mut entries): (Vec<_>, Vec<_>) = merged.into_iter().unzip();
    entries.push(prod.inverse()?);
    MonodromyTuple::new(entries, Some(points))
}

/// Katz's MC_λ via Pochhammer matrices restricted to K ∩ L, where
/// K = ⊕ im(A_i − 1) and L = im(D̃_1⋯D̃_p − 1).
pub fn mc_lambda(t: &MonodromyTuple, lambda: &Scalar) -> Result<MonodromyTuple> {
    let f = t.field();
    if lambda.field() != f {
        return Err(Error::FieldMismatch(f.to_string(), lambda.field().to_string()));
    }
    if lambda.is_one() {
        return Err(Error::LambdaIsOne);
    }
    if lambda.is_zero() {
        return Err(Error::Precondition("lambda must be nonzero".into()));
    }
    let d = t.dim();
    let p = t.r();
    if p == 0 {
        return Err(Error::Precondition("tuple has no finite points".into()));
    }
    let n = p * d;
    let a = &t.entries()[..p];
    let minus: Vec<Matrix> = a.iter().map(|x| x.minus_identity()).collect();
    let mut dtil = Vec::with_capacity(p);
    for i in 0..p {
        let mut m = Matrix::identity(f, n);
        for b in 0..p {
            let blk = if b < i {
                minus[b].scale(lambda)
            } else if b == i {
                a[b].scale(lambda)
            } else {
                minus[b].clone()
            };
            m.set_block(i * d, b * d, &blk);
        }
        dtil.push(m);
    }
    let mut kgens = Vec::new();
    for (k, mk) in minus.iter().enumerate() {
        let im = mk.row_space();
        for r in 0..im.rows() {
            let mut v = Matrix::zeros(f, 1, n);
            v.set_block(0, k * d, &im.block(r, 0, 1, d));
            kgens.push(v.row(0).to_vec());
        }
    }
    // L = im(D̃_1⋯D̃_p − 1).
    let dprod = dtil.iter().skip(1).try_fold(dtil[0].clone(), |acc, x| acc.checked_mul(x))?;
    let lspace = dprod.minus_identity().row_space();
    let w = intersect_row_spaces(&Matrix::from_row_vecs(f, n, &kgens)?, &lspace)?;
    let dim = w.rows();
    let mut coords = Echelon::new(f, n);
    for r in 0..dim {
        coords.insert(w.row(r));
    }
    let mut entries = Vec::with_capacity(p + 1);
    for dt in &dtil {
        let img = w.checked_mul(dt)?;
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            let c = coords
                .coordinates(img.row(r))
                .ok_or_else(|| Error::DimensionInconsistency("K ∩ L is not invariant".into()))?;
            data.extend(c);
        }
        entries.push(Matrix::new(f, dim, dim, data)?);
    }
    MonodromyTuple::from_finite(entries, t.points().map(|x| x.to_vec()))
}

/// Value of the rank formula and whether its precondition holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankFormula {
    pub value: i64,
    pub precondition_holds: bool,
}

/// (p+q−1)n₁n₂ − Σ n₂·dim ker(A_i−1) − Σ n₁·dim ker(B_j−1) − dim ker(A_{p+1}⊗B_{q+1}−1).
pub fn rank_formula(inp: &ConvolutionInput) -> Result<RankFormula> {
    let (p, q) = (inp.p() as i64, inp.q() as i64);
    let (n1, n2) = (inp.left.dim() as i64, inp.right.dim() as i64);
    let ker = |m: &Matrix| (m.rows() - m.minus_identity().rank()) as i64;
    let mut v = (p + q - 1) * n1 * n2;
    for a in &inp.left.entries()[..inp.p()] {
        v -= n2 * ker(a);
    }
    for b in &inp.right.entries()[..inp.q()] {
        v -= n1 * ker(b);
    }
    v -= ker(&inp.left.infinity().kronecker(inp.right.infinity())?);
    let trivial_stab = |t: &MonodromyTuple| invariants_dim(t) == 0;
    Ok(RankFormula { value: v, precondition_holds: trivial_stab(&inp.left) || trivial_stab(&inp.right) })
}

/// dim {v : v T_i = v for all i}.
pub fn invariants_dim(t: &MonodromyTuple) -> usize {
    let d = t.dim();
    let mut h = Matrix::zeros(t.field(), d, d * t.entries().len());
    for (k, e) in t.entries().iter().enumerate() {
        h.set_block(0, k * d, &e.minus_identity());
    }
    d - h.rank()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SheafCondition {
    /// ∩_{j≠i} ker(T_j−1) ∩ ker(τT_i−1) = 0
    Star,
    /// Σ_{j≠i} im(T_j−1) + im(τT_i−1) = V
    StarStar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafViolation {
    /// 1-based index of the finite entry.
    pub index: usize,
    pub tau: Scalar,
    pub condition: SheafCondition,
}

/// Result of the convolution-sheaf test; empty `violations` means pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafReport {
    pub violations: Vec<SheafViolation>,
}

impl SheafReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks conditions (∗) and (∗∗) for every finite entry and every candidate τ.
/// The intersections and sums run over the other finite entries.
pub fn is_convolution_sheaf(t: &MonodromyTuple) -> Result<SheafReport> {
    let f = t.field();
    let d = t.dim();
    let entries = t.entries();
    let mut violations = Vec::new();
    for i in 0..t.r() {
        let mut taus: Vec<Scalar> = f.roots_of_unity();
        for mu in entries[i].field_eigenvalues()? {
            if !mu.is_zero() {
                let inv = mu.inv()?;
                if !taus.contains(&inv) {
                    taus.push(inv);
                }
            }
        }
        let others: Vec<Matrix> =
            entries[..t.r()].iter().enumerate().filter(|(j, _)| *j != i).map(|(_, m)| m.minus_identity()).collect();
        for tau in taus {
            let own = entries[i].scale(&tau).minus_identity();
            let mut horiz = Matrix::zeros(f, d, d * entries.len());
            let mut vert = Matrix::zeros(f, d * entries.len(), d);
            for (k, m) in others.iter().chain(std::iter::once(&own)).enumerate() {
                horiz.set_block(0, k * d, m);
                vert.set_block(k * d, 0, m);
            }
            if horiz.rank() < d {
                violations.push(SheafViolation { index: i + 1, tau: tau.clone(), condition: SheafCondition::Star });
            }
            if vert.rank() < d {
                violations.push(SheafViolation { index: i + 1, tau, condition: SheafCondition::StarStar });
            }
        }
    }
    Ok(SheafReport { violations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Irreducibility {
    Irreducible,
    Inconclusive,
}

/// Sufficient criterion for irreducibility of left ∗ (rank-one right factor).
/// Returns the decision and the value (p−2)·n − Σ dim ker(A_i−1).
pub fn irreducibility_criterion(left: &MonodromyTuple, right_scalars: &[Scalar]) -> Result<(Irreducibility, i64)> {
    if !left.infinity().is_identity() {
        return Err(Error::Precondition("the entry at infinity of the left tuple must be 1".into()));
    }
    if right_scalars.is_empty() {
        return Err(Error::Precondition("the right factor needs at least one finite point".into()));
    }
    for s in right_scalars {
        if s.field() != left.field() {
            return Err(Error::FieldMismatch(left.field().to_string(), s.field().to_string()));
        }
        if s.is_one() || s.is_zero() {
            return Err(Error::Precondition("right eigenvalues must differ from 0 and 1".into()));
        }
    }
    if !absolutely_irreducible(left.entries()) {
        return Err(Error::Precondition("left tuple is not absolutely irreducible".into()));
    }
    if !is_convolution_sheaf(left)?.passes() {
        return Err(Error::Precondition("left tuple is not a convolution sheaf".into()));
    }
    let prod = right_scalars.iter().try_fold(Scalar::one(left.field()), |acc, s| acc.checked_mul(s))?;
    let mut rs: Vec<Matrix> = right_scalars.iter().map(|s| Matrix::scalar(s, 1)).collect();
    rs.push(Matrix::scalar(&prod.inv()?, 1));
    let inp = ConvolutionInput::new(left.clone(), MonodromyTuple::new(rs, None)?)?;
    if !inp.is_generic() {
        return Err(Error::Precondition("point configuration is not generic".into()));
    }
    let n = left.dim() as i64;
    let p = left.r() as i64;
    let kers: i64 = left.entries()[..left.r()].iter().map(|a| (a.rows() - a.minus_identity().rank()) as i64).sum();
    let v = (p - 2) * n - kers;
    Ok((if v > 0 { Irreducibility::Irreducible } else { Irreducibility::Inconclusive }, v))
}

/// Predicted Jordan data of every D_{i,j}, in the δ order of [`middle_convolution_detailed`].
pub fn predict_local_jordan(inp: &ConvolutionInput) -> Result<Vec<((usize, usize), JordanData)>> {
    if !inp.is_generic() {
        return Err(Error::Precondition("point configuration is not generic".into()));
    }
    let rank = rank_formula(inp)?;
    if rank.value < 0 {
        return Err(Error::Precondition("rank formula is negative".into()));
    }
    let rank = rank.value as usize;
    let f = inp.left.field();
    let one = Scalar::one(f);
    let bjs: Vec<JordanData> = inp.right.entries()[..inp.q()].iter().map(|b| b.jordan_data()).collect::<Result<_>>()?;
    if bjs.iter().any(|j| j.blocks().iter().any(|b| b.size > 1)) {
        return Err(Error::Precondition("right entries must be semisimple".into()));
    }
    let ajs: Vec<JordanData> = inp.left.entries()[..inp.p()].iter().map(|a| a.jordan_data()).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for j in (1..=inp.q()).rev() {
        for i in 1..=inp.p() {
            let mut blocks = Vec::new();
            for beta in bjs[j - 1].blocks().iter().map(|b| &b.eigenvalue).filter(|b| !b.is_one()) {
                let beta_inv = beta.inv()?;
                for blk in ajs[i - 1].blocks() {
                    let alpha = &blk.eigenvalue;
                    if alpha.is_one() && blk.size == 1 {
                        continue;
                    }
                    let size = if alpha.is_one() {
                        blk.size - 1
                    } else if *alpha == beta_inv {
                        blk.size + 1
                    } else {
                        blk.size
                    };
                    blocks.push(JordanBlock { eigenvalue: alpha * beta, size });
                }
            }
            pad(&mut blocks, &one, rank)?;
            out.push(((i, j), JordanData::new(blocks)));
        }
    }
    Ok(out)
}

fn pad(blocks: &mut Vec<JordanBlock>, filler: &Scalar, rank: usize) -> Result<()> {
    let used: usize = blocks.iter().map(|b| b.size).sum();
    if used > rank {
        return Err(Error::DimensionInconsistency(format!("predicted blocks fill {used} > rank {rank}")));
    }
    for _ in used..rank {
        blocks.push(JordanBlock { eigenvalue: filler.clone(), size: 1 });
    }
    Ok(())
}

/// dim MC_λ(T) = Σ_{i≤p} rk(A_i−1) + rk(A_{p+1}−λ) − n for convolution sheaves.
pub fn mc_lambda_rank(t: &MonodromyTuple, lambda: &Scalar) -> i64 {
    let s: usize = t.entries()[..t.r()].iter().map(|a| a.minus_identity().rank()).sum();
    (s + t.infinity().minus_scalar(lambda).rank()) as i64 - t.dim() as i64
}

/// Predicted Jordan data of the entry at infinity of MC_λ(T).
pub fn predict_infinity_jordan(t: &MonodromyTuple, lambda: &Scalar) -> Result<JordanData> {
    if lambda.is_one() {
        return Err(Error::LambdaIsOne);
    }
    if !is_convolution_sheaf(t)?.passes() {
        return Err(Error::Precondition("tuple is not a convolution sheaf".into()));
    }
    let rank = mc_lambda_rank(t, lambda);
    if rank < 0 {
        return Err(Error::Precondition("negative rank".into()));
    }
    let li = lambda.inv()?;
    let mut blocks = Vec::new();
    for blk in t.infinity().jordan_data()?.blocks() {
        let alpha = &blk.eigenvalue;
        let size = if alpha.is_one() {
            blk.size + 1
        } else if alpha == lambda {
            blk.size - 1
        } else {
            blk.size
        };
        blocks.push(JordanBlock { eigenvalue: alpha * &li, size });
    }
    pad(&mut blocks, &li, rank as usize)?;
    Ok(JordanData::new(blocks))
}

/// Symmetry type and Tate twist of a pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairingInfo {
    pub sym: i8,
    pub twist: i64,
}

impl PairingInfo {
    pub fn new(sym: i8, twist: i64) -> Result<Self> {
        if !(-1..=1).contains(&sym) {
            return Err(Error::Precondition(format!("sym must be -1, 0 or 1, got {sym}")));
        }
        Ok(PairingInfo { sym, twist })
    }
}

pub fn pairing_convolve(a: PairingInfo, b: PairingInfo) -> PairingInfo {
    PairingInfo { sym: -a.sym * b.sym, twist: a.twist + b.twist + 1 }
}

/// Outcome of the SL construction pipeline.
#[derive(Clone, Debug)]
pub struct SlDemoReport {
    pub m: u32,
    pub r: usize,
    pub field: FieldDescriptor,
    pub intermediate_rank: usize,
    pub tuple: MonodromyTuple,
    pub rank: usize,
    pub expected_rank: usize,
    pub c1: JordanData,
    pub c1_ok: bool,
    pub c2: JordanData,
    pub c2_ok: bool,
    pub determinants_ok: bool,
}

impl SlDemoReport {
    pub fn all_ok(&self) -> bool {
        self.rank == self.expected_rank && self.c1_ok && self.c2_ok && self.determinants_ok
    }
}

fn euler_phi(m: u32) -> u32 {
    (1..=m).filter(|k| num_integer::gcd(*k, m) == 1).count() as u32
}

/// The dihedral tuple with two reflections, rotations by the primitive m-th
/// roots of unity and (−1,−1) fillers, on the points 1, …, r.
pub fn dihedral_tuple(m: u32, r: usize, field: FieldDescriptor) -> Result<MonodromyTuple> {
    let FieldDescriptor::Cyclotomic(nf) = field else {
        return Err(Error::Precondition("dihedral tuple needs a cyclotomic field".into()));
    };
    if m < 3 || nf % m != 0 {
        return Err(Error::Precondition(format!("rotation order {m} not available in {field}")));
    }
    let units: Vec<u32> = (1..m).filter(|k| num_integer::gcd(*k, m) == 1).collect();
    if r < 2 + units.len() {
        return Err(Error::Precondition(format!("r must be at least {}", 2 + units.len())));
    }
    let fillers = r - 1 - units.len();
    let step = (nf / m) as i64;
    let refl = Matrix::from_ints(field, &[[0, 1], [1, 0]]);
    let second = if fillers.is_multiple_of(2) { refl.clone() } else { -&refl };
    let mut entries = vec![refl, second];
    for k in &units {
        let z = Scalar::root_of_unity(field, step * *k as i64)?;
        entries.push(Matrix::diagonal(field, &[z.clone(), z.inv()?]));
    }
    let minus = Matrix::scalar(&Scalar::from_i64(field, -1), 2);
    entries.extend(std::iter::repeat_n(minus, fillers));
    let pts = (1..=r as i64).map(|k| BigRational::from_integer(k.into())).collect();
    MonodromyTuple::new(entries, Some(pts))
}

/// Runs the two convolutions of the SL_{4r−7} construction and checks the
/// predicted local monodromy. m = 1 uses rotations of order 3.
pub fn sl_demo(m: u32, r: usize) -> Result<SlDemoReport> {
    if m.is_multiple_of(2) {
        return Err(Error::Precondition("m must be odd".into()));
    }
    let rot = if m == 1 { 3 } else { m };
    let lcm = num_integer::lcm(4, rot);
    let field = FieldDescriptor::cyclotomic(lcm)?;
    if r < 2 + euler_phi(rot) as usize {
        return Err(Error::Precondition(format!("r must be at least 2 + φ({rot})")));
    }
    let f1 = dihedral_tuple(rot, r, field)?;
    let minus = Scalar::from_i64(field, -1);
    let f2 = kummer(&minus)?.with_points(Some(vec![BigRational::zero()]))?;
    let b = middle_convolution(&ConvolutionInput::new(f1, f2)?)?;
    let intermediate_rank = b.dim();
    let mut twisted: Vec<Matrix> = b.entries().to_vec();
    twisted[0] = -&twisted[0];
    let last = twisted.len() - 1;
    twisted[last] = -&twisted[last];
    let g = MonodromyTuple::new(twisted, b.points().map(|x| x.to_vec()))?;
    let i = Scalar::root_of_unity(field, (lcm / 4) as i64)?;
    let f3 = MonodromyTuple::new(
        vec![Matrix::scalar(&i, 1), Matrix::scalar(&-&i, 1), Matrix::identity(field, 1)],
        None,
    )?;
    let conv = middle_convolution_detailed(&ConvolutionInput::new(g, f3)?)?;
    let rank = conv.tuple.dim();
    let expected_rank = 4 * r - 7;
    let c1 = conv.delta(1, 1).expect("δ(1,1)").jordan_data()?;
    let c2 = conv.delta(2, 1).expect("δ(2,1)").jordan_data()?;
    let mi = -&i;
    let one = Scalar::one(field);
    let c1_ok = c1.count(&mi, 2) == 1
        && c1.count(&mi, 1) == 2 * r - 6
        && c1.count(&one, 1) == 2 * r - 3
        && c1.blocks().len() == 1 + (2 * r - 6) + (2 * r - 3);
    let c2_ok = c2.count(&i, 1) == 1 && c2.count(&one, 1) == rank - 1 && c2.blocks().len() == rank;
    let units: Vec<Scalar> = (0..4).map(|k| i.pow(k)).collect::<Result<_>>()?;
    let mut determinants_ok = true;
    for e in &conv.tuple.entries()[..conv.tuple.r()] {
        if !units.contains(&e.det()?) {
            determinants_ok = false;
        }
    }
    Ok(SlDemoReport {
        m,
        r,
        field,
        intermediate_rank,
        tuple: conv.tuple,
        rank,
        expected_rank,
        c1,
        c1_ok,
        c2,
        c2_ok,
        determinants_ok,
    })
}
