//! Finite-dimensional Lie superalgebras given by exact structure constants.

mod families;
mod file;
mod grassmann;

use std::fmt;
use std::ops::Add;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, normalize_terms, Echelon, SparseVec, Q};

pub use families::{build_algebra, AlgebraSpec};
pub use file::{AlgebraFile, BasisEntry, BracketEntry, TermEntry};
pub use grassmann::Monomial as GrassmannMonomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(bit: u32) -> Self {
        if bit.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn flip(self) -> Self {
        self + Parity::Odd
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// `(-1)^(p q)`.
    pub fn sign_with(self, other: Parity) -> i64 {
        if self.is_odd() && other.is_odd() {
            -1
        } else {
            1
        }
    }
}

impl Add for Parity {
    type Output = Parity;

    fn add(self, rhs: Parity) -> Parity {
        Parity::from_bit(self.bit() + rhs.bit())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisVector {
    pub index: usize,
    pub name: String,
    pub parity: Parity,
    /// Value of the chosen Z-grading.
    pub degree: i32,
    /// Eigenvalues under the torus; empty when no torus is chosen.
    pub weight: Vec<i32>,
}

/// A violated invariant of a structure-constant table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Defect {
    Antisymmetry { i: usize, j: usize },
    Parity { i: usize, j: usize, k: usize },
    Degree { i: usize, j: usize, k: usize },
    Weight { i: usize, j: usize, k: usize },
    Jacobi { i: usize, j: usize, k: usize },
}

/// Lie superalgebra with a homogeneous basis and structure constants
/// `[e_i, e_j] = sum_k c_ij^k e_k`.
#[derive(Clone, Debug)]
pub struct SuperAlgebra {
    name: String,
    basis: Vec<BasisVector>,
    table: Vec<SparseVec>,
    torus: Option<Vec<Vec<Q>>>,
    warnings: Vec<String>,
}

impl SuperAlgebra {
    /// Assembles an algebra from raw data and rejects it unless every
    /// invariant holds.
    pub fn new(
        name: impl Into<String>,
        basis: Vec<BasisVector>,
        table: Vec<SparseVec>,
    ) -> Result<Self> {
        let alg = Self::unchecked(name, basis, table)?;
        let defects = alg.defects();
        if let Some(d) = defects.first() {
            return Err(Error::InvalidDefinition(format!(
                "{} violated invariant(s), first: {d:?}",
                defects.len()
            )));
        }
        Ok(alg)
    }

    /// Assembles an algebra checking only shapes; used by mutation tests and
    /// by loaders that report defects themselves.
    pub fn unchecked(
        name: impl Into<String>,
        mut basis: Vec<BasisVector>,
        table: Vec<SparseVec>,
    ) -> Result<Self> {
        let n = basis.len();
        if table.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: table.len(),
            });
        }
        let wlen = basis.first().map_or(0, |b| b.weight.len());
        if basis.iter().any(|b| b.weight.len() != wlen) {
            return Err(Error::InvalidDefinition(
                "weight vectors of different lengths".into(),
            ));
        }
        for (i, b) in basis.iter_mut().enumerate() {
            b.index = i;
        }
        for entry in &table {
            if let Some((k, _)) = entry.iter().find(|(k, _)| *k >= n) {
                return Err(Error::IndexOutOfRange { index: *k, dim: n });
            }
        }
        Ok(SuperAlgebra {
            name: name.into(),
            basis,
            table,
            torus: None,
            warnings: Vec::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `(even, odd)` dimensions.
    pub fn superdim(&self) -> (usize, usize) {
        let odd = self.basis.iter().filter(|b| b.parity.is_odd()).count();
        (self.dim() - odd, odd)
    }

    pub fn basis(&self) -> &[BasisVector] {
        &self.basis
    }

    pub fn parity(&self, i: usize) -> Parity {
        self.basis[i].parity
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|b| b.name == name)
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub(crate) fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    /// Inner torus elements whose adjoint eigenvalues are the weights.
    pub fn torus(&self) -> Option<&[Vec<Q>]> {
        self.torus.as_deref()
    }

    pub fn weight_rank(&self) -> usize {
        self.basis.first().map_or(0, |b| b.weight.len())
    }

    /// `[e_i, e_j]` as a sparse combination of basis vectors.
    pub fn bracket_basis(&self, i: usize, j: usize) -> &SparseVec {
        &self.table[i * self.dim() + j]
    }

    /// Bilinear extension of the structure constants to dense elements.
    pub fn bracket(&self, a: &[Q], b: &[Q]) -> Result<Vec<Q>> {
        let n = self.dim();
        for v in [a, b] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        let mut out = vec![Q::zero(); n];
        for (i, x) in a.iter().enumerate().filter(|e| !e.1.is_zero()) {
            for (j, y) in b.iter().enumerate().filter(|e| !e.1.is_zero()) {
                let xy = x * y;
                for (k, c) in self.bracket_basis(i, j) {
                    out[*k] += &xy * c;
                }
            }
        }
        Ok(out)
    }

    /// Bracket of sparse elements.
    pub fn bracket_sparse(&self, a: &SparseVec, b: &SparseVec) -> Result<SparseVec> {
        let n = self.dim();
        if let Some((i, _)) = a.iter().chain(b.iter()).find(|(i, _)| *i >= n) {
            return Err(Error::IndexOutOfRange { index: *i, dim: n });
        }
        let mut terms = Vec::new();
        for (i, x) in a {
            for (j, y) in b {
                let xy = x * y;
                for (k, c) in self.bracket_basis(*i, *j) {
                    terms.push((*k, &xy * c));
                }
            }
        }
        Ok(normalize_terms(terms))
    }

    fn basis_bracket_sparse(&self, i: usize, v: &SparseVec) -> SparseVec {
        let mut terms = Vec::new();
        for (j, y) in v {
            for (k, c) in self.bracket_basis(i, *j) {
                terms.push((*k, y * c));
            }
        }
        normalize_terms(terms)
    }

    fn sparse_bracket_basis(&self, v: &SparseVec, j: usize) -> SparseVec {
        let mut terms = Vec::new();
        for (i, x) in v {
            for (k, c) in self.bracket_basis(*i, j) {
                terms.push((*k, x * c));
            }
        }
        normalize_terms(terms)
    }

    /// Triples `(i, j, k)` where
    /// `[e_i,[e_j,e_k]] = [[e_i,e_j],e_k] + (-1)^{p_i p_j} [e_j,[e_i,e_k]]` fails.
    pub fn check_jacobi(&self) -> Vec<(usize, usize, usize)> {
        let n = self.dim();
        let mut bad = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let ij = self.bracket_basis(i, j);
                let sign = self.parity(i).sign_with(self.parity(j));
                for k in 0..n {
                    let lhs = self.basis_bracket_sparse(i, self.bracket_basis(j, k));
                    let t1 = self.sparse_bracket_basis(ij, k);
                    let t2 = self.basis_bracket_sparse(j, self.bracket_basis(i, k));
                    let rhs = axpy(&t1, &Q::from_integer(sign.into()), &t2);
                    if lhs != rhs {
                        bad.push((i, j, k));
                    }
                }
            }
        }
        bad
    }

    /// Every violated invariant: super-antisymmetry, homogeneity of parity,
    /// degree and weight, and the super Jacobi identity.
    pub fn defects(&self) -> Vec<Defect> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let sign = -self.parity(i).sign_with(self.parity(j));
                let swapped: SparseVec = self
                    .bracket_basis(j, i)
                    .iter()
                    .map(|(k, c)| (*k, c * Q::from_integer(sign.into())))
                    .collect();
                if &swapped != self.bracket_basis(i, j) {
                    out.push(Defect::Antisymmetry { i, j });
                }
                let (bi, bj) = (&self.basis[i], &self.basis[j]);
                for (k, _) in self.bracket_basis(i, j) {
                    let bk = &self.basis[*k];
                    if bk.parity != bi.parity + bj.parity {
                        out.push(Defect::Parity { i, j, k: *k });
                    }
                    if bk.degree != bi.degree + bj.degree {
                        out.push(Defect::Degree { i, j, k: *k });
                    }
                    let wsum: Vec<i32> = bi
                        .weight
                        .iter()
                        .zip(&bj.weight)
                        .map(|(a, b)| a + b)
                        .collect();
                    if bk.weight != wsum {
                        out.push(Defect::Weight { i, j, k: *k });
                    }
                }
            }
        }
        out.extend(
            self.check_jacobi()
                .into_iter()
                .map(|(i, j, k)| Defect::Jacobi { i, j, k }),
        );
        out
    }

    /// Replaces the weights by the adjoint eigenvalues of the given torus
    /// elements; fails unless each acts diagonally with integer eigenvalues.
    pub fn assign_weights(&mut self, torus: Vec<Vec<Q>>) -> Result<()> {
        let n = self.dim();
        let mut weights = vec![Vec::with_capacity(torus.len()); n];
        for t in &torus {
            if t.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: t.len(),
                });
            }
            let ts: SparseVec = t
                .iter()
                .cloned()
                .enumerate()
                .filter(|e| !e.1.is_zero())
                .collect();
            for (i, w) in weights.iter_mut().enumerate() {
                let img = self.sparse_bracket_basis(&ts, i);
                let eig = match img.as_slice() {
                    [] => Q::zero(),
                    [(k, c)] if *k == i => c.clone(),
                    _ => {
                        return Err(Error::InvalidDefinition(format!(
                            "torus element does not act diagonally on {}",
                            self.basis[i].name
                        )))
                    }
                };
                if !eig.is_integer() {
                    return Err(Error::InvalidDefinition(
                        "non-integral torus eigenvalue".into(),
                    ));
                }
                w.push(eig.to_integer().to_i32().expect("small eigenvalue"));
            }
        }
        for (b, w) in self.basis.iter_mut().zip(weights) {
            b.weight = w;
        }
        self.torus = Some(torus);
        Ok(())
    }

    /// Forgets the torus and weights.
    pub fn clear_weights(&mut self) {
        for b in self.basis.iter_mut() {
            b.weight.clear();
        }
        self.torus = None;
    }

    fn bucket_key(&self, i: usize) -> (i32, Parity, Vec<i32>) {
        let b = &self.basis[i];
        (b.degree, b.parity, b.weight.clone())
    }

    /// Homogeneous basis of the center `{x : [x, g] = 0}`.
    pub fn center(&self) -> Vec<SparseVec> {
        let n = self.dim();
        let mut buckets: std::collections::BTreeMap<_, Vec<usize>> = Default::default();
        for i in 0..n {
            buckets.entry(self.bucket_key(i)).or_default().push(i);
        }
        let mut out = Vec::new();
        for members in buckets.values() {
            // Columns: members; rows: (j, k) pairs of [e_i, e_j] coordinates.
            let mut triplets = Vec::new();
            for (col, &i) in members.iter().enumerate() {
                for j in 0..n {
                    for (k, c) in self.bracket_basis(i, j) {
                        triplets.push((j * n + k, col, c.clone()));
                    }
                }
            }
            let m =
                crate::linalg::SparseRationalMatrix::from_triplets(n * n, members.len(), triplets)
                    .expect("in range");
            for v in crate::linalg::kernel_basis(&m).vectors {
                out.push(v.into_iter().map(|(c, x)| (members[c], x)).collect());
            }
        }
        out
    }

    /// Induced structure on the span of homogeneous `vectors` (coordinates in
    /// this algebra's basis). Fails unless the span is closed.
    pub fn subalgebra(
        &self,
        name: &str,
        vectors: Vec<(String, SparseVec)>,
    ) -> Result<SuperAlgebra> {
        let mut meta = Vec::with_capacity(vectors.len());
        for (label, v) in &vectors {
            let (first, _) = v
                .first()
                .ok_or_else(|| Error::InvalidDefinition(format!("zero vector {label}")))?;
            let key = self.bucket_key(*first);
            if v.iter().any(|(i, _)| self.bucket_key(*i) != key) {
                return Err(Error::InvalidDefinition(format!(
                    "{label} is not homogeneous"
                )));
            }
            meta.push(key);
        }
        let mut order: Vec<usize> = (0..vectors.len()).collect();
        order.sort_by(|&a, &b| {
            (meta[a].0, meta[a].1, &vectors[a].0).cmp(&(meta[b].0, meta[b].1, &vectors[b].0))
        });
        let vectors: Vec<(String, SparseVec)> = order.iter().map(|&i| vectors[i].clone()).collect();
        let meta: Vec<_> = order.iter().map(|&i| meta[i].clone()).collect();
        let solver = SpanSolver::new(vectors.iter().map(|v| v.1.clone()).collect())?;
        let n = vectors.len();
        let mut table = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let w = self.bracket_sparse(&vectors[a].1, &vectors[b].1)?;
                let coords = solver.solve(&w).ok_or_else(|| {
                    Error::NotClosed(format!(
                        "[{}, {}] leaves the span",
                        vectors[a].0, vectors[b].0
                    ))
                })?;
                table.push(coords);
            }
        }
        let basis = vectors
            .iter()
            .zip(meta)
            .enumerate()
            .map(|(i, ((label, _), (degree, parity, weight)))| BasisVector {
                index: i,
                name: label.clone(),
                parity,
                degree,
                weight,
            })
            .collect();
        let mut sub = SuperAlgebra::new(name, basis, table)?;
        sub.warnings = self.warnings.clone();
        if let Some(torus) = &self.torus {
            let mapped: Option<Vec<Vec<Q>>> = torus
                .iter()
                .map(|t| {
                    let ts: SparseVec = t
                        .iter()
                        .cloned()
                        .enumerate()
                        .filter(|e| !e.1.is_zero())
                        .collect();
                    solver.solve(&ts).map(|c| dense(&c, n))
                })
                .collect();
            match mapped {
                Some(t) => sub.assign_weights(t)?,
                // Weights remain a valid grading but are no longer inner.
                None => sub.torus = None,
            }
        }
        Ok(sub)
    }

    /// `[g, g]`, with a homogeneous basis; basis vectors of `g` that lie in
    /// the derived algebra keep their names.
    pub fn derived_subalgebra(&self) -> Result<SuperAlgebra> {
        let n = self.dim();
        let mut buckets: std::collections::BTreeMap<_, Echelon> = Default::default();
        for i in 0..n {
            for j in 0..n {
                let v = self.bracket_basis(i, j);
                if let Some((k, _)) = v.first() {
                    buckets
                        .entry(self.bucket_key(*k))
                        .or_default()
                        .insert(v.clone());
                }
            }
        }
        let mut vectors = Vec::new();
        for ech in buckets.values() {
            for (_, v) in ech.rows() {
                vectors.push((self.label(v), v.clone()));
            }
        }
        self.subalgebra(&format!("[{0},{0}]", self.name), vectors)
    }

    /// Quotient by the center. Returns the quotient; its basis is the
    /// subset of the original basis complementary to the center.
    pub fn quotient_by_center(&self) -> Result<SuperAlgebra> {
        let center = self.center();
        self.quotient(&format!("{}/center", self.name), center)
    }

    /// Quotient by the ideal spanned by homogeneous `ideal` vectors.
    pub fn quotient(&self, name: &str, ideal: Vec<SparseVec>) -> Result<SuperAlgebra> {
        let n = self.dim();
        let mut ech = Echelon::new();
        for v in ideal {
            ech.insert(v);
        }
        for (_, z) in ech.rows() {
            for i in 0..n {
                let w = self.basis_bracket_sparse(i, z);
                if !ech.reduce(&w).is_empty() {
                    return Err(Error::NotClosed("spanning set is not an ideal".into()));
                }
            }
        }
        let keep: Vec<usize> = (0..n).filter(|i| !ech.pivots().any(|p| p == *i)).collect();
        let mut pos = vec![usize::MAX; n];
        for (new, &old) in keep.iter().enumerate() {
            pos[old] = new;
        }
        let project = |v: &SparseVec| -> SparseVec {
            ech.reduce(v)
                .into_iter()
                .map(|(i, x)| (pos[i], x))
                .collect()
        };
        let m = keep.len();
        let mut table = Vec::with_capacity(m * m);
        for &a in &keep {
            for &b in &keep {
                table.push(project(self.bracket_basis(a, b)));
            }
        }
        let basis = keep
            .iter()
            .enumerate()
            .map(|(new, &old)| BasisVector {
                index: new,
                ..self.basis[old].clone()
            })
            .collect();
        let mut q = SuperAlgebra::new(name, basis, table)?;
        q.warnings = self.warnings.clone();
        if let Some(torus) = &self.torus {
            let mapped: Vec<Vec<Q>> = torus
                .iter()
                .map(|t| {
                    let ts: SparseVec = t
                        .iter()
                        .cloned()
                        .enumerate()
                        .filter(|e| !e.1.is_zero())
                        .collect();
                    dense(&project(&ts), m)
                })
                .collect();
            // Keep an independent subfamily so the weight rank equals the
            // rank of the image torus.
            let mut span = Echelon::new();
            let independent: Vec<Vec<Q>> = mapped
                .into_iter()
                .filter(|t| {
                    let ts: SparseVec = t
                        .iter()
                        .cloned()
                        .enumerate()
                        .filter(|e| !e.1.is_zero())
                        .collect();
                    !ts.is_empty() && span.insert(ts).is_some()
                })
                .collect();
            q.assign_weights(independent)?;
        }
        Ok(q)
    }

    /// Display label of a sparse combination of basis vectors.
    pub fn label(&self, v: &SparseVec) -> String {
        if let [(i, c)] = v.as_slice() {
            if c.is_one() {
                return self.basis[*i].name.clone();
            }
        }
        let mut s = String::new();
        for (n, (i, c)) in v.iter().enumerate() {
            let name = &self.basis[*i].name;
            let neg = c.is_negative();
            let abs = c.abs();
            if n > 0 {
                s.push(if neg { '-' } else { '+' });
            } else if neg {
                s.push('-');
            }
            if !abs.is_one() {
                s.push_str(&format!("{abs}*"));
            }
            s.push_str(name);
        }
        s
    }
}

fn dense(v: &SparseVec, n: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); n];
    for (i, x) in v {
        out[*i] = x.clone();
    }
    out
}

/// Expresses vectors in terms of a fixed linearly independent family.
struct SpanSolver {
    ech: Echelon,
    /// For each pivot coordinate, the combination of the family yielding the
    /// pivot row.
    transforms: std::collections::BTreeMap<usize, SparseVec>,
}

impl SpanSolver {
    fn new(family: Vec<SparseVec>) -> Result<Self> {
        // Augment each vector with a tag coordinate beyond the ambient range
        // so the echelon form records the combination used.
        let offset = family
            .iter()
            .flat_map(|v| v.iter().map(|e| e.0 + 1))
            .max()
            .unwrap_or(0);
        let mut ech = Echelon::new();
        for (t, v) in family.iter().enumerate() {
            let mut aug = v.clone();
            aug.push((offset + t, Q::one()));
            if ech.insert(aug).is_none_or(|p| p >= offset) {
                return Err(Error::InvalidDefinition(
                    "spanning vectors are linearly dependent".into(),
                ));
            }
        }
        let mut plain = Echelon::new();
        let mut transforms = std::collections::BTreeMap::new();
        for (p, row) in ech.rows() {
            let (amb, tags): (Vec<_>, Vec<_>) = row.iter().cloned().partition(|e| e.0 < offset);
            let tags: SparseVec = tags.into_iter().map(|(i, x)| (i - offset, x)).collect();
            plain.insert_raw(p, amb);
            transforms.insert(p, tags);
        }
        Ok(SpanSolver {
            ech: plain,
            transforms,
        })
    }

    fn solve(&self, w: &SparseVec) -> Option<SparseVec> {
        let coords = self.ech.coordinates(w)?;
        let mut terms = Vec::new();
        for (p, x) in coords {
            for (t, c) in &self.transforms[&p] {
                terms.push((*t, &x * c));
            }
        }
        Some(normalize_terms(terms))
    }
}
