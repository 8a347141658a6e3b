//! Sparse elimination over a prime field `F_p`, `p < 2^31`.
//!
//! The rank routine works on a list of sparse vectors. It first peels off
//! pivots that cause no fill (coordinates held by a single vector, vectors
//! with a single coordinate), then runs Markowitz-style elimination on the
//! shortest remaining vectors, and finishes on a dense kernel once the
//! active part stops being sparse.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use super::primes::is_prime;
use super::Q;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if !(2..(1 << 31)).contains(&p) {
            return Err(Error::BadPrime {
                prime: p,
                reason: "must lie in [2, 2^31)".into(),
            });
        }
        if !is_prime(p) {
            return Err(Error::BadPrime {
                prime: p,
                reason: "not prime".into(),
            });
        }
        Ok(PrimeField { p })
    }

    #[inline]
    pub fn prime(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        (if s >= self.p { s - self.p } else { s }) as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.p - b as u64) as u32
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            (self.p - a as u64) as u32
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p) as u32
    }

    pub fn pow(&self, mut a: u32, mut e: u64) -> u32 {
        let mut r = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u32) -> u32 {
        debug_assert!(a != 0);
        self.pow(a, self.p - 2)
    }

    pub fn from_int(&self, n: &BigInt) -> u32 {
        let r = n.mod_floor(&BigInt::from(self.p));
        r.to_u32().expect("residue fits in u32")
    }

    pub fn from_i64(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }

    /// Image of a rational number; fails when `p` divides the denominator.
    pub fn from_q(&self, q: &Q) -> Result<u32> {
        let den = self.from_int(q.denom());
        if den == 0 {
            return Err(Error::BadPrime {
                prime: self.p,
                reason: format!("divides the denominator of {q}"),
            });
        }
        let num = if q.numer().is_negative() {
            self.neg(self.from_int(&-q.numer()))
        } else {
            self.from_int(q.numer())
        };
        Ok(self.mul(num, self.inv(den)))
    }
}

/// Dense elimination starts once the active submatrix is at least this full.
const DENSE_FILL: f64 = 0.4;
/// Upper bound on `vectors * coordinates` for the dense kernel.
const DENSE_CELLS: usize = 120_000_000;

/// Rank of the span of `vectors`, each a sparse vector over `ncoords`
/// coordinates with entries already reduced modulo `p`.
pub fn rank_mod_p(vectors: Vec<Vec<(u32, u32)>>, ncoords: usize, field: &PrimeField) -> usize {
    let mut vectors = vectors;
    for v in vectors.iter_mut() {
        v.retain(|e| e.1 != 0);
        debug_assert!(v.windows(2).all(|w| w[0].0 < w[1].0));
    }
    Eliminator::new(vectors, ncoords, *field, None).run().0
}

/// Whether `v` lies in the span of `vectors` modulo `p`. The spanning
/// vectors are eliminated with `v` carried along but never used as a pivot.
pub fn in_span_mod_p(
    vectors: Vec<Vec<(u32, u32)>>,
    v: Vec<(u32, u32)>,
    ncoords: usize,
    field: &PrimeField,
) -> bool {
    let mut vectors = vectors;
    vectors.push(v);
    for v in vectors.iter_mut() {
        v.retain(|e| e.1 != 0);
        debug_assert!(v.windows(2).all(|w| w[0].0 < w[1].0));
    }
    let protected = vectors.len() - 1;
    !Eliminator::new(vectors, ncoords, *field, Some(protected))
        .run()
        .1
}

struct Eliminator {
    field: PrimeField,
    vecs: Vec<Vec<(u32, u32)>>,
    alive: Vec<bool>,
    n_alive: usize,
    occ: Vec<Vec<u32>>,
    count: Vec<u32>,
    live_coords: usize,
    nnz: usize,
    rank: usize,
    /// Vector that is reduced but never chosen as a pivot.
    protected: Option<usize>,
}

impl Eliminator {
    fn new(
        vecs: Vec<Vec<(u32, u32)>>,
        ncoords: usize,
        field: PrimeField,
        protected: Option<usize>,
    ) -> Self {
        let mut occ = vec![Vec::new(); ncoords];
        let mut count = vec![0u32; ncoords];
        let mut alive = vec![true; vecs.len()];
        let mut n_alive = 0;
        let mut nnz = 0;
        for (i, v) in vecs.iter().enumerate() {
            if v.is_empty() {
                alive[i] = false;
                continue;
            }
            n_alive += 1;
            nnz += v.len();
            for &(c, _) in v {
                occ[c as usize].push(i as u32);
                count[c as usize] += 1;
            }
        }
        let live_coords = count.iter().filter(|&&c| c > 0).count();
        Eliminator {
            field,
            vecs,
            alive,
            n_alive,
            occ,
            count,
            live_coords,
            nnz,
            rank: 0,
            protected,
        }
    }

    fn kill(&mut self, v: usize) {
        self.alive[v] = false;
        self.n_alive -= 1;
        let entries = std::mem::take(&mut self.vecs[v]);
        self.nnz -= entries.len();
        for (c, _) in entries {
            self.dec(c as usize);
        }
    }

    fn dec(&mut self, c: usize) {
        self.count[c] -= 1;
        if self.count[c] == 0 {
            self.live_coords -= 1;
            self.occ[c].clear();
        }
    }

    fn holders(&mut self, c: usize) -> Vec<u32> {
        let vecs = &self.vecs;
        let alive = &self.alive;
        let list = &mut self.occ[c];
        list.sort_unstable();
        list.dedup();
        list.retain(|&v| {
            alive[v as usize]
                && vecs[v as usize]
                    .binary_search_by_key(&(c as u32), |e| e.0)
                    .is_ok()
        });
        list.clone()
    }

    /// Rank of the unprotected vectors, and whether the protected one is
    /// independent of them.
    fn run(mut self) -> (usize, bool) {
        // Buckets of candidate vectors keyed by length; stale entries are
        // skipped when popped.
        let mut by_len: Vec<Vec<u32>> = Vec::new();
        let mut singles: Vec<u32> = Vec::new();
        for (i, v) in self.vecs.iter().enumerate() {
            if self.alive[i] {
                push_len(&mut by_len, v.len(), i as u32);
            }
        }
        for c in 0..self.count.len() {
            if self.count[c] == 1 {
                singles.push(c as u32);
            }
        }
        let mut min_len = 1usize;
        while self.n_alive > 0 {
            // Coordinates owned by a single vector: that vector is independent.
            if let Some(c) = singles.pop() {
                let c = c as usize;
                if self.count[c] != 1 {
                    continue;
                }
                let owner = self.holders(c)[0] as usize;
                if Some(owner) == self.protected {
                    return (self.rank, true);
                }
                let coords: Vec<u32> = self.vecs[owner].iter().map(|e| e.0).collect();
                self.kill(owner);
                self.rank += 1;
                for x in coords {
                    if self.count[x as usize] == 1 {
                        singles.push(x);
                    }
                }
                continue;
            }
            let cells = self.n_alive * self.live_coords;
            if cells <= DENSE_CELLS && (self.nnz as f64) >= DENSE_FILL * cells as f64 {
                log::debug!(
                    "dense switch after {} pivots: {} x {} active, nnz {}",
                    self.rank,
                    self.n_alive,
                    self.live_coords,
                    self.nnz
                );
                let (r, independent) = self.dense_rank();
                return (self.rank + r, independent);
            }
            // Shortest live vector.
            let mut pivot = None;
            while min_len < by_len.len() {
                match by_len[min_len].pop() {
                    Some(v) => {
                        let v = v as usize;
                        if Some(v) == self.protected {
                            continue;
                        }
                        if self.alive[v] && self.vecs[v].len() == min_len {
                            pivot = Some(v);
                            break;
                        }
                        if self.alive[v] && !self.vecs[v].is_empty() && Some(v) != self.protected {
                            let l = self.vecs[v].len();
                            push_len(&mut by_len, l, v as u32);
                            if l < min_len {
                                min_len = l;
                            }
                        }
                    }
                    None => min_len += 1,
                }
            }
            let Some(v) = pivot else { break };
            debug_assert!(Some(v) != self.protected);
            let (pc, pval) = *self.vecs[v]
                .iter()
                .min_by_key(|e| (self.count[e.0 as usize], e.0))
                .expect("nonempty");
            let inv = self.field.inv(pval);
            let others: Vec<u32> = self.holders(pc as usize);
            let pivot_vec = std::mem::take(&mut self.vecs[v]);
            for w in others {
                let w = w as usize;
                if w == v {
                    continue;
                }
                let factor = {
                    let pos = self.vecs[w]
                        .binary_search_by_key(&pc, |e| e.0)
                        .expect("holder");
                    self.field.mul(self.vecs[w][pos].1, inv)
                };
                let before = self.vecs[w].len();
                let merged = self.eliminate(w, factor, &pivot_vec);
                self.nnz = self.nnz - before + merged.len();
                if merged.is_empty() {
                    self.alive[w] = false;
                    self.n_alive -= 1;
                    self.vecs[w] = merged;
                } else {
                    let l = merged.len();
                    self.vecs[w] = merged;
                    if Some(w) != self.protected {
                        push_len(&mut by_len, l, w as u32);
                        if l < min_len {
                            min_len = l;
                        }
                    }
                }
            }
            self.vecs[v] = pivot_vec;
            let coords: Vec<u32> = self.vecs[v].iter().map(|e| e.0).collect();
            self.kill(v);
            self.rank += 1;
            for x in coords {
                if self.count[x as usize] == 1 {
                    singles.push(x);
                }
            }
        }
        let independent = self.protected.is_some_and(|p| self.alive[p]);
        (self.rank, independent)
    }

    /// `vecs[w] - factor * pivot`, keeping coordinate counts in sync.
    fn eliminate(&mut self, w: usize, factor: u32, pivot: &[(u32, u32)]) -> Vec<(u32, u32)> {
        let f = self.field;
        let nf = f.neg(factor);
        let cur = std::mem::take(&mut self.vecs[w]);
        let mut out = Vec::with_capacity(cur.len() + pivot.len());
        let (mut a, mut b) = (0, 0);
        while a < cur.len() || b < pivot.len() {
            let ia = cur.get(a).map_or(u32::MAX, |e| e.0);
            let ib = pivot.get(b).map_or(u32::MAX, |e| e.0);
            if ia < ib {
                out.push(cur[a]);
                a += 1;
            } else if ib < ia {
                let val = f.mul(nf, pivot[b].1);
                out.push((ib, val));
                let c = ib as usize;
                if self.count[c] == 0 {
                    self.live_coords += 1;
                }
                self.count[c] += 1;
                self.occ[c].push(w as u32);
                b += 1;
            } else {
                let val = f.add(cur[a].1, f.mul(nf, pivot[b].1));
                if val != 0 {
                    out.push((ia, val));
                } else {
                    self.dec(ia as usize);
                }
                a += 1;
                b += 1;
            }
        }
        out
    }

    fn dense_rank(&mut self) -> (usize, bool) {
        let mut remap = vec![u32::MAX; self.count.len()];
        let mut ncols = 0u32;
        for (c, &n) in self.count.iter().enumerate() {
            if n > 0 {
                remap[c] = ncols;
                ncols += 1;
            }
        }
        let ncols = ncols as usize;
        let dense = |v: &[(u32, u32)]| {
            let mut row = vec![0u32; ncols];
            for &(c, x) in v {
                row[remap[c as usize] as usize] = x;
            }
            row
        };
        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(self.n_alive);
        for (i, v) in self.vecs.iter().enumerate() {
            if self.alive[i] && Some(i) != self.protected {
                rows.push(dense(v));
            }
        }
        match self.protected.filter(|&p| self.alive[p]) {
            None => (dense_reduce(&mut rows, ncols, &self.field, false), false),
            Some(p) => {
                rows.push(dense(&self.vecs[p]));
                let r = dense_reduce(&mut rows, ncols, &self.field, true);
                (
                    r,
                    rows.last().expect("protected row").iter().any(|&x| x != 0),
                )
            }
        }
    }
}

fn push_len(by_len: &mut Vec<Vec<u32>>, len: usize, v: u32) {
    if by_len.len() <= len {
        by_len.resize(len + 1, Vec::new());
    }
    by_len[len].push(v);
}

/// Rank of a dense matrix modulo `p`; destroys `rows`.
pub fn dense_rank_mod(rows: &mut [Vec<u32>], ncols: usize, field: &PrimeField) -> usize {
    dense_reduce(rows, ncols, field, false)
}

/// Row reduction; with `protect_last` the last row is reduced but never
/// becomes a pivot, and the rank counts the other rows only.
fn dense_reduce(
    rows: &mut [Vec<u32>],
    ncols: usize,
    field: &PrimeField,
    protect_last: bool,
) -> usize {
    let p = field.prime();
    let candidates = rows.len() - usize::from(protect_last && !rows.is_empty());
    let mut rank = 0;
    for col in 0..ncols {
        if rank == candidates {
            break;
        }
        let Some(piv) = (rank..candidates).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = field.inv(rows[rank][col]);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot_row = &mut head[rank];
        for x in pivot_row[col..].iter_mut() {
            *x = field.mul(*x, inv);
        }
        let pivot_row = &head[rank];
        for row in tail.iter_mut() {
            let f = row[col];
            if f == 0 {
                continue;
            }
            let nf = p - f as u64;
            for (x, &y) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                if y != 0 {
                    *x = ((*x as u64 + nf * y as u64) % p) as u32;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u64 = 2147483629;

    fn dense_oracle(rows: &[Vec<u32>], ncols: usize) -> usize {
        let mut copy = rows.to_vec();
        dense_rank_mod(&mut copy, ncols, &PrimeField::new(P).unwrap())
    }

    fn to_sparse(rows: &[Vec<u32>]) -> Vec<Vec<(u32, u32)>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|e| *e.1 != 0)
                    .map(|(i, &x)| (i as u32, x))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn field_ops() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.mul(3, f.inv(3)), 1);
        assert_eq!(f.sub(2, 5), 4);
        assert_eq!(f.from_q(&super::super::qr(-1, 2)).unwrap(), 3);
        assert!(PrimeField::new(8).is_err());
    }

    #[test]
    fn sparse_matches_dense_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let field = PrimeField::new(P).unwrap();
        for trial in 0..200 {
            let nr = rng.gen_range(1..40);
            let nc = rng.gen_range(1..40);
            let density = rng.gen_range(0.02..0.5);
            let mut rows = vec![vec![0u32; nc]; nr];
            for row in rows.iter_mut() {
                for x in row.iter_mut() {
                    if rng.gen_bool(density) {
                        *x = rng.gen_range(1..5);
                    }
                }
            }
            // Introduce dependencies.
            if nr > 3 && trial % 2 == 0 {
                let (a, b) = (rows[0].clone(), rows[1].clone());
                rows[2] = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| field.add(*x, field.mul(3, *y)))
                    .collect();
            }
            let expect = dense_oracle(&rows, nc);
            assert_eq!(
                rank_mod_p(to_sparse(&rows), nc, &field),
                expect,
                "trial {trial}"
            );
        }
    }

    #[test]
    fn span_membership_matches_rank_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let field = PrimeField::new(P).unwrap();
        for trial in 0..300 {
            let nr = rng.gen_range(1..30);
            let nc = rng.gen_range(1..30);
            let density = rng.gen_range(0.02..0.6);
            let mut rows = vec![vec![0u32; nc]; nr];
            for row in rows.iter_mut() {
                for x in row.iter_mut() {
                    if rng.gen_bool(density) {
                        *x = rng.gen_range(1..5);
                    }
                }
            }
            let v: Vec<u32> = if trial % 2 == 0 {
                let mut v = vec![0u32; nc];
                for row in &rows {
                    let f = rng.gen_range(0..4);
                    for (x, &y) in v.iter_mut().zip(row) {
                        *x = field.add(*x, field.mul(f, y));
                    }
                }
                v
            } else {
                (0..nc)
                    .map(|_| {
                        if rng.gen_bool(density) {
                            rng.gen_range(1..5)
                        } else {
                            0
                        }
                    })
                    .collect()
            };
            let mut with = rows.clone();
            with.push(v.clone());
            let expect = dense_oracle(&with, nc) == dense_oracle(&rows, nc);
            let got = in_span_mod_p(to_sparse(&rows), to_sparse(&[v])[0].clone(), nc, &field);
            assert_eq!(got, expect, "trial {trial}");
        }
    }
}
