//! Exact linear algebra on sparse rational matrices.
//!
//! Two routes compute ranks: a fraction-free integer elimination over the
//! rationals ([`rank_exact`]) and elimination modulo word-sized primes
//! ([`rank_modular`]). A modular rank never exceeds the rational rank, so
//! agreement across independent primes certifies the value with
//! overwhelming probability; the rational route is the audit path.

mod exact;
pub mod modular;
pub mod primes;

use std::fmt::Write as _;
use std::io::BufRead;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub use exact::{kernel_basis, rank_exact, reduce_mod_image, Echelon};
pub use modular::{in_span_mod_p, rank_mod_p, PrimeField};

/// Exact rational scalar.
pub type Q = BigRational;

/// Sparse vector as `(index, value)` pairs, strictly increasing in index,
/// without explicit zeros.
pub type SparseVec = Vec<(usize, Q)>;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Adds `factor * src` into `dst`, both sparse and sorted.
pub fn axpy(dst: &SparseVec, factor: &Q, src: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(dst.len() + src.len());
    let (mut a, mut b) = (0, 0);
    while a < dst.len() || b < src.len() {
        let ia = dst.get(a).map(|e| e.0).unwrap_or(usize::MAX);
        let ib = src.get(b).map(|e| e.0).unwrap_or(usize::MAX);
        if ia < ib {
            out.push(dst[a].clone());
            a += 1;
        } else if ib < ia {
            out.push((ib, factor * &src[b].1));
            b += 1;
        } else {
            let v = &dst[a].1 + factor * &src[b].1;
            if !v.is_zero() {
                out.push((ia, v));
            }
            a += 1;
            b += 1;
        }
    }
    out
}

/// Collects unsorted `(index, value)` terms into a canonical sparse vector.
pub fn normalize_terms(mut terms: Vec<(usize, Q)>) -> SparseVec {
    terms.sort_by_key(|t| t.0);
    let mut out: SparseVec = Vec::with_capacity(terms.len());
    for (i, v) in terms {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += v,
            _ => out.push((i, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

/// Scalar arithmetic shared by the rational and modular assembly paths.
pub trait FieldOps: Sync {
    type E: Clone + Send + Sync + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::E;
    fn from_i64(&self, n: i64) -> Self::E;
    fn from_q(&self, q: &Q) -> Result<Self::E>;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
}

/// The field of rational numbers.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rationals;

impl FieldOps for Rationals {
    type E = Q;

    fn zero(&self) -> Q {
        Q::zero()
    }
    fn from_i64(&self, n: i64) -> Q {
        qi(n)
    }
    fn from_q(&self, q: &Q) -> Result<Q> {
        Ok(q.clone())
    }
    fn add(&self, a: &Q, b: &Q) -> Q {
        a + b
    }
    fn mul(&self, a: &Q, b: &Q) -> Q {
        a * b
    }
    fn is_zero(&self, a: &Q) -> bool {
        a.is_zero()
    }
}

impl FieldOps for PrimeField {
    type E = u32;

    fn zero(&self) -> u32 {
        0
    }
    fn from_i64(&self, n: i64) -> u32 {
        PrimeField::from_i64(self, n)
    }
    fn from_q(&self, q: &Q) -> Result<u32> {
        PrimeField::from_q(self, q)
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        PrimeField::add(self, *a, *b)
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        PrimeField::mul(self, *a, *b)
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
}

/// Sparse matrix with exact rational entries, stored column by column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseRationalMatrix {
    rows: usize,
    cols: usize,
    columns: Vec<SparseVec>,
}

impl SparseRationalMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseRationalMatrix {
            rows,
            cols,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let columns = (0..n).map(|i| vec![(i, Q::one())]).collect();
        SparseRationalMatrix {
            rows: n,
            cols: n,
            columns,
        }
    }

    /// Builds a matrix from coordinate triples; duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Q)>,
    ) -> Result<Self> {
        let mut per_col: Vec<Vec<(usize, Q)>> = vec![Vec::new(); cols];
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::IndexOutOfRange {
                    index: r.max(c),
                    dim: rows.max(cols),
                });
            }
            per_col[c].push((r, v));
        }
        let columns = per_col.into_iter().map(normalize_terms).collect();
        Ok(SparseRationalMatrix {
            rows,
            cols,
            columns,
        })
    }

    /// Builds a matrix from already canonical sparse columns.
    pub fn from_columns(rows: usize, columns: Vec<SparseVec>) -> Result<Self> {
        for col in &columns {
            for w in col.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(Error::Format(
                        "column indices not strictly increasing".into(),
                    ));
                }
            }
            if let Some((r, _)) = col.iter().find(|(r, v)| *r >= rows || v.is_zero()) {
                return Err(Error::IndexOutOfRange {
                    index: *r,
                    dim: rows,
                });
            }
        }
        let cols = columns.len();
        Ok(SparseRationalMatrix {
            rows,
            cols,
            columns,
        })
    }

    pub fn from_dense(rows: &[Vec<Q>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut columns = vec![Vec::new(); ncols];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    columns[j].push((i, v.clone()));
                }
            }
        }
        SparseRationalMatrix {
            rows: nrows,
            cols: ncols,
            columns,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    pub fn column(&self, c: usize) -> &SparseVec {
        &self.columns[c]
    }

    pub fn columns(&self) -> &[SparseVec] {
        &self.columns
    }

    /// Entries in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Q)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |(r, v)| (*r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> Q {
        match self.columns[c].binary_search_by_key(&r, |e| e.0) {
            Ok(pos) => self.columns[c][pos].1.clone(),
            Err(_) => Q::zero(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut columns = vec![Vec::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                columns[*r].push((c, v.clone()));
            }
        }
        SparseRationalMatrix {
            rows: self.cols,
            cols: self.rows,
            columns,
        }
    }

    /// Row vectors of the matrix, each sparse over column indices.
    pub fn row_vectors(&self) -> Vec<SparseVec> {
        self.transpose().columns
    }

    pub fn mul_vec(&self, v: &SparseVec) -> Result<SparseVec> {
        if let Some((i, _)) = v.iter().find(|(i, _)| *i >= self.cols) {
            return Err(Error::IndexOutOfRange {
                index: *i,
                dim: self.cols,
            });
        }
        let mut terms = Vec::new();
        for (c, x) in v {
            for (r, m) in &self.columns[*c] {
                terms.push((*r, m * x));
            }
        }
        Ok(normalize_terms(terms))
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &SparseRationalMatrix) -> Result<SparseRationalMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        let columns = rhs
            .columns
            .iter()
            .map(|col| self.mul_vec(col))
            .collect::<Result<Vec<_>>>()?;
        Ok(SparseRationalMatrix {
            rows: self.rows,
            cols: rhs.cols,
            columns,
        })
    }

    /// Reduces every entry modulo `p`, returning sparse columns over `u32`.
    pub fn reduce_mod(&self, field: &PrimeField) -> Result<Vec<Vec<(u32, u32)>>> {
        self.columns
            .iter()
            .map(|col| {
                let mut out = Vec::with_capacity(col.len());
                for (r, v) in col {
                    let x = field.from_q(v)?;
                    if x != 0 {
                        out.push((*r as u32, x));
                    }
                }
                Ok(out)
            })
            .collect()
    }

    /// Coordinate dump: a header line followed by one `row col num den`
    /// line per nonzero entry.
    pub fn write_dump(&self, header: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {header} rows={} cols={} nnz={}",
            self.rows,
            self.cols,
            self.nnz()
        );
        for (r, c, v) in self.entries() {
            let _ = writeln!(out, "{r} {c} {} {}", v.numer(), v.denom());
        }
        out
    }

    pub fn read_dump(text: impl BufRead) -> Result<(String, SparseRationalMatrix)> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty dump".into()))??;
        let header = header
            .strip_prefix("# ")
            .ok_or_else(|| Error::Format("dump header must start with `# `".into()))?
            .to_string();
        let field = |key: &str| -> Result<usize> {
            header
                .split_whitespace()
                .find_map(|tok| tok.strip_prefix(key))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Format(format!("dump header lacks `{key}`")))
        };
        let (rows, cols) = (field("rows=")?, field("cols=")?);
        let mut triplets = Vec::new();
        for line in lines {
            let line = line?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            let bad = || Error::Format(format!("bad dump line `{line}`"));
            if toks.len() != 4 {
                return Err(bad());
            }
            let r: usize = toks[0].parse().map_err(|_| bad())?;
            let c: usize = toks[1].parse().map_err(|_| bad())?;
            let n: BigInt = toks[2].parse().map_err(|_| bad())?;
            let d: BigInt = toks[3].parse().map_err(|_| bad())?;
            if d.is_zero() || d.is_negative() {
                return Err(bad());
            }
            triplets.push((r, c, Q::new(n, d)));
        }
        let m = SparseRationalMatrix::from_triplets(rows, cols, triplets)?;
        let body = header
            .split_whitespace()
            .filter(|t| {
                !t.starts_with("rows=") && !t.starts_with("cols=") && !t.starts_with("nnz=")
            })
            .collect::<Vec<_>>()
            .join(" ");
        Ok((body, m))
    }
}

/// Basis of the rational null space of a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelBasis {
    pub vectors: Vec<SparseVec>,
}

impl KernelBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Result of a multi-prime rank computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularRank {
    pub primes: Vec<u64>,
    pub ranks: Vec<usize>,
    /// Largest rank observed; still a lower bound for the rational rank.
    pub rank: usize,
    /// All primes returned the same rank.
    pub agree: bool,
}

/// Rank modulo each prime in `primes`.
pub fn rank_modular(m: &SparseRationalMatrix, primes: &[u64]) -> Result<ModularRank> {
    let mut ranks = Vec::with_capacity(primes.len());
    for &p in primes {
        let field = PrimeField::new(p)?;
        let cols = m.reduce_mod(&field)?;
        ranks.push(rank_mod_p(cols, m.rows(), &field));
    }
    let rank = ranks.iter().copied().max().unwrap_or(0);
    let agree = ranks.windows(2).all(|w| w[0] == w[1]);
    Ok(ModularRank {
        primes: primes.to_vec(),
        ranks,
        rank,
        agree,
    })
}
