use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{axpy, KernelBasis, SparseRationalMatrix, SparseVec, Q};
use crate::error::{Error, Result};

type IntVec = Vec<(u32, BigInt)>;

/// Clears denominators and divides out the content, leading entry positive.
fn primitive(v: &SparseVec) -> IntVec {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, (_, x)| acc.lcm(x.denom()));
    let mut out: IntVec = v
        .iter()
        .map(|(i, x)| (*i as u32, x.numer() * (&lcm / x.denom())))
        .collect();
    make_primitive(&mut out);
    out
}

fn make_primitive(v: &mut IntVec) {
    let Some(first) = v.first() else { return };
    let mut g = first.1.abs();
    for (_, x) in v.iter().skip(1) {
        if g.is_one() {
            break;
        }
        g = g.gcd(x);
    }
    let neg = first.1.is_negative();
    if !g.is_one() || neg {
        let g = if neg { -g } else { g };
        for (_, x) in v.iter_mut() {
            *x = &*x / &g;
        }
    }
}

/// `a * w - b * v`, then reduced to primitive form.
fn cross_eliminate(w: &IntVec, a: &BigInt, v: &IntVec, b: &BigInt) -> IntVec {
    let mut out = Vec::with_capacity(w.len() + v.len());
    let (mut i, mut j) = (0, 0);
    while i < w.len() || j < v.len() {
        let iw = w.get(i).map_or(u32::MAX, |e| e.0);
        let iv = v.get(j).map_or(u32::MAX, |e| e.0);
        if iw < iv {
            out.push((iw, a * &w[i].1));
            i += 1;
        } else if iv < iw {
            out.push((iv, -(b * &v[j].1)));
            j += 1;
        } else {
            let x = a * &w[i].1 - b * &v[j].1;
            if !x.is_zero() {
                out.push((iw, x));
            }
            i += 1;
            j += 1;
        }
    }
    make_primitive(&mut out);
    out
}

/// Rank over the rationals by fraction-free elimination. Columns are
/// inserted sparsest first and kept primitive so entries stay integral and
/// small.
pub fn rank_exact(m: &SparseRationalMatrix) -> usize {
    let mut vecs: Vec<IntVec> = m
        .columns()
        .iter()
        .filter(|c| !c.is_empty())
        .map(primitive)
        .collect();
    vecs.sort_by_key(|v| v.len());
    let mut pivots: BTreeMap<u32, IntVec> = BTreeMap::new();
    for mut v in vecs {
        while let Some(&(lead, _)) = v.first() {
            match pivots.get(&lead) {
                None => {
                    pivots.insert(lead, v);
                    break;
                }
                Some(p) => {
                    let (a, b) = (p[0].1.clone(), v[0].1.clone());
                    let g = a.gcd(&b);
                    v = cross_eliminate(&v, &(&a / &g), p, &(&b / &g));
                }
            }
        }
    }
    pivots.len()
}

/// Fully reduced echelon form of the span of a set of sparse vectors:
/// every pivot vector has entry 1 at its pivot coordinate and 0 at all other
/// pivot coordinates. Pivot coordinates are the lowest nonzero index of the
/// residual at insertion time, so the form depends only on insertion order.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Echelon form of the column space of `m`.
    pub fn column_space(m: &SparseRationalMatrix) -> Self {
        let mut e = Echelon::new();
        let mut cols: Vec<&SparseVec> = m.columns().iter().filter(|c| !c.is_empty()).collect();
        cols.sort_by_key(|c| c.len());
        for c in cols {
            e.insert(c.clone());
        }
        e
    }

    /// Echelon form of the row space of `m`.
    pub fn row_space(m: &SparseRationalMatrix) -> Self {
        let mut e = Echelon::new();
        for r in m.row_vectors() {
            if !r.is_empty() {
                e.insert(r);
            }
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &SparseVec)> {
        self.rows.iter().map(|(k, v)| (*k, v))
    }

    /// Canonical residual of `v` modulo the span.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let hits: Vec<(usize, Q)> = v
            .iter()
            .filter(|(i, _)| self.rows.contains_key(i))
            .cloned()
            .collect();
        let mut out = v.clone();
        for (i, x) in hits {
            out = axpy(&out, &-x, &self.rows[&i]);
        }
        out
    }

    /// Adds `v` to the span; returns the pivot coordinate if `v` was new.
    pub fn insert(&mut self, v: SparseVec) -> Option<usize> {
        let mut r = self.reduce(&v);
        let (pivot, lead) = r.first().cloned()?;
        let inv = lead.recip();
        for e in r.iter_mut() {
            e.1 = &e.1 * &inv;
        }
        for row in self.rows.values_mut() {
            if let Ok(pos) = row.binary_search_by_key(&pivot, |e| e.0) {
                let x = row[pos].1.clone();
                *row = axpy(row, &-x, &r);
            }
        }
        self.rows.insert(pivot, r);
        Some(pivot)
    }

    /// Installs an already reduced row; the caller guarantees the echelon
    /// invariants.
    pub(crate) fn insert_raw(&mut self, pivot: usize, row: SparseVec) {
        self.rows.insert(pivot, row);
    }

    /// Coefficients expressing `v` in terms of the pivot vectors, if `v`
    /// lies in the span.
    pub fn coordinates(&self, v: &SparseVec) -> Option<Vec<(usize, Q)>> {
        if !self.reduce(v).is_empty() {
            return None;
        }
        Some(
            v.iter()
                .filter(|(i, _)| self.rows.contains_key(i))
                .cloned()
                .collect(),
        )
    }
}

/// Basis of the null space; the vector for free column `f` has entry 1 at
/// `f` and zeros at every other free column.
pub fn kernel_basis(m: &SparseRationalMatrix) -> KernelBasis {
    let ech = Echelon::row_space(m);
    let mut free: BTreeMap<usize, SparseVec> = (0..m.cols())
        .filter(|c| !ech.rows.contains_key(c))
        .map(|c| (c, vec![(c, Q::one())]))
        .collect();
    for (p, row) in ech.rows() {
        for (j, x) in row {
            if *j != p {
                free.get_mut(j).expect("free column").push((p, -x.clone()));
            }
        }
    }
    let vectors = free
        .into_values()
        .map(|mut v| {
            v.sort_by_key(|e| e.0);
            v
        })
        .collect();
    KernelBasis { vectors }
}

/// Canonical representative of `v` modulo the column space of `m`.
pub fn reduce_mod_image(v: &SparseVec, m: &SparseRationalMatrix) -> Result<SparseVec> {
    if let Some((i, _)) = v.iter().find(|(i, _)| *i >= m.rows()) {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: *i + 1,
        });
    }
    Ok(Echelon::column_space(m).reduce(v))
}
