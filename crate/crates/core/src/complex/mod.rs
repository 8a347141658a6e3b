//! The Chevalley–Eilenberg complex `C^k(g; M)` for `M` the adjoint module,
//! its parity shift, or the trivial module.
//!
//! A cochain `e_a ⊗ f^{a_1} ∧ … ∧ f^{a_k}` is stored as the ghost monomial
//! `c^{a_1} … c^{a_k}` together with the value index `a`. Adjoint cochains
//! are vector fields `m ∂_a` on the parity-shifted algebra and the
//! differential is the bracket with the homological vector field
//! `Q = Σ_j Q^j ∂_j`, `Q^j = -1/2 Σ ± c_{ab}^j c^a c^b`.

mod ghost;

use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

pub use ghost::{Ghosts, Word};

use crate::algebra::{Parity, SuperAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{qi, FieldOps, PrimeField, Rationals, SparseRationalMatrix, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientSpec {
    Adjoint,
    PiAdjoint,
    Trivial,
}

impl CoefficientSpec {
    pub fn has_value(self) -> bool {
        self != CoefficientSpec::Trivial
    }
}

impl fmt::Display for CoefficientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoefficientSpec::Adjoint => "adjoint",
            CoefficientSpec::PiAdjoint => "pi-adjoint",
            CoefficientSpec::Trivial => "trivial",
        })
    }
}

impl FromStr for CoefficientSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjoint" => Ok(CoefficientSpec::Adjoint),
            "pi-adjoint" | "pi_adjoint" => Ok(CoefficientSpec::PiAdjoint),
            "trivial" => Ok(CoefficientSpec::Trivial),
            _ => Err(Error::InvalidSpec {
                spec: s.into(),
                reason: "expected adjoint, pi-adjoint or trivial".into(),
            }),
        }
    }
}

/// `e_value ⊗ f^{duals[0]} ∧ …`; ordered by value, then duals
/// lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CochainMonomial {
    pub value: Option<u16>,
    pub duals: Word,
}

impl CochainMonomial {
    pub fn new(value: Option<u16>, duals: &[u16]) -> Self {
        let mut duals = Word::from_slice(duals);
        duals.sort_unstable();
        CochainMonomial { value, duals }
    }

    pub fn k(&self) -> usize {
        self.duals.len()
    }
}

/// Sparse rational combination of monomials of one cochain degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    pub k: usize,
    /// Sorted by monomial, no zero coefficients.
    pub terms: Vec<(CochainMonomial, Q)>,
}

impl Cochain {
    pub fn zero(k: usize) -> Self {
        Cochain {
            k,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(k: usize, mut terms: Vec<(CochainMonomial, Q)>) -> Self {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(CochainMonomial, Q)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            debug_assert_eq!(m.k(), k);
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 += c,
                _ => out.push((m, c)),
            }
        }
        out.retain(|t| !num_traits::Zero::is_zero(&t.1));
        Cochain { k, terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Q) -> Cochain {
        Cochain::from_terms(
            self.k,
            self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        )
    }

    pub fn add(&self, other: &Cochain) -> Cochain {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Cochain::from_terms(self.k.max(other.k), terms)
    }

    /// Coordinates in the basis of a slice; `None` if a monomial lies outside.
    pub fn to_vector(&self, slice: &ComplexSlice) -> Option<crate::linalg::SparseVec> {
        let mut v: Vec<(usize, Q)> = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            v.push((slice.position(m)?, c.clone()));
        }
        Some(crate::linalg::normalize_terms(v))
    }

    pub fn from_vector(slice: &ComplexSlice, v: &crate::linalg::SparseVec) -> Cochain {
        Cochain::from_terms(
            slice.k,
            v.iter()
                .map(|(i, c)| (slice.basis[*i].clone(), c.clone()))
                .collect(),
        )
    }
}

/// Basis of the monomials of cochain degree `k` with the given grading
/// degree and weight (`None` = no restriction).
#[derive(Clone, Debug)]
pub struct ComplexSlice {
    pub k: usize,
    pub degree: Option<i64>,
    pub weight: Option<Vec<i32>>,
    pub basis: Vec<CochainMonomial>,
    index: FxHashMap<CochainMonomial, u32>,
}

impl ComplexSlice {
    fn from_basis(
        k: usize,
        degree: Option<i64>,
        weight: Option<Vec<i32>>,
        basis: Vec<CochainMonomial>,
    ) -> Self {
        let index = basis
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i as u32))
            .collect();
        ComplexSlice {
            k,
            degree,
            weight,
            basis,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn position(&self, m: &CochainMonomial) -> Option<usize> {
        self.index.get(m).map(|&i| i as usize)
    }

    /// Restriction to monomials of one parity (as computed by `parity`).
    pub fn restrict(&self, keep: impl Fn(&CochainMonomial) -> bool) -> ComplexSlice {
        let basis = self.basis.iter().filter(|m| keep(m)).cloned().collect();
        ComplexSlice::from_basis(self.k, self.degree, self.weight.clone(), basis)
    }
}

/// Structure data of `Q` converted into a particular field.
pub struct Tables<E> {
    /// `Q^j = Σ coef c^a c^b`, `a <= b`.
    q: Vec<Vec<(u16, u16, E)>>,
    /// `∂_a Q^j = Σ coef c^i`, stored per `a` as `(j, i, coef)`.
    dq: Vec<Vec<(u16, u16, E)>>,
}

/// A slice request exceeded the size budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverBudget {
    pub limit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradingDefect {
    pub source: CochainMonomial,
    pub image: CochainMonomial,
}

/// The complex `C^•(g; M)` of a fixed algebra and module.
pub struct CeComplex<'a> {
    g: &'a SuperAlgebra,
    coeff: CoefficientSpec,
    ghosts: Ghosts,
    degree: Vec<i64>,
    weight: Vec<Vec<i32>>,
    q: Vec<Vec<(u16, u16, Q)>>,
    /// Suffix bounds used to prune enumeration, one entry per start index
    /// plus a sentinel: `(min, max)` of degree and of each weight.
    bounds: Vec<(i64, i64, Vec<(i32, i32)>)>,
}

impl<'a> CeComplex<'a> {
    pub fn new(g: &'a SuperAlgebra, coeff: CoefficientSpec) -> Result<Self> {
        let n = g.dim();
        if n > u16::MAX as usize {
            return Err(Error::InvalidDefinition(
                "algebra too large for the cochain encoding".into(),
            ));
        }
        let ghosts = Ghosts::new(g.basis().iter().map(|b| !b.parity.is_odd()).collect());
        let degree: Vec<i64> = g.basis().iter().map(|b| b.degree as i64).collect();
        let weight: Vec<Vec<i32>> = g.basis().iter().map(|b| b.weight.clone()).collect();
        let r = g.weight_rank();

        // Q^j = -1/2 Σ_{a,b} (-1)^{p_a (p_b + 1)} c_{ab}^j c^a c^b, with the
        // ordered pairs (a, b) and (b, a) merged.
        let mut q: Vec<Vec<(u16, u16, Q)>> = vec![Vec::new(); n];
        let half = crate::linalg::qr(-1, 2);
        for a in 0..n {
            for b in a..n {
                if a == b && ghosts.is_odd(a as u16) {
                    continue;
                }
                let (pa, pb) = (g.parity(a).bit(), g.parity(b).bit());
                let sign = if (pa * (pb + 1)) % 2 == 0 { 1 } else { -1 };
                let factor = if a == b { half.clone() } else { qi(-sign) };
                for (j, c) in g.bracket_basis(a, b) {
                    q[*j].push((a as u16, b as u16, &factor * c));
                }
            }
        }

        let mut bounds = vec![(i64::MAX, i64::MIN, vec![(i32::MAX, i32::MIN); r]); n + 1];
        for i in (0..n).rev() {
            let mut b = bounds[i + 1].clone();
            b.0 = b.0.min(degree[i]);
            b.1 = b.1.max(degree[i]);
            for (t, w) in weight[i].iter().enumerate() {
                b.2[t].0 = b.2[t].0.min(*w);
                b.2[t].1 = b.2[t].1.max(*w);
            }
            bounds[i] = b;
        }
        Ok(CeComplex {
            g,
            coeff,
            ghosts,
            degree,
            weight,
            q,
            bounds,
        })
    }

    pub fn algebra(&self) -> &SuperAlgebra {
        self.g
    }

    pub fn coefficients(&self) -> CoefficientSpec {
        self.coeff
    }

    pub fn ghosts(&self) -> &Ghosts {
        &self.ghosts
    }

    pub fn tables<F: FieldOps>(&self, field: &F) -> Result<Tables<F::E>> {
        let n = self.g.dim();
        let mut q = vec![Vec::new(); n];
        let mut dq: Vec<Vec<(u16, u16, F::E)>> = vec![Vec::new(); n];
        for (j, terms) in self.q.iter().enumerate() {
            for (a, b, c) in terms {
                let e = field.from_q(c)?;
                q[j].push((*a, *b, e.clone()));
                if a == b {
                    dq[*a as usize].push((j as u16, *a, field.mul(&field.from_i64(2), &e)));
                } else {
                    dq[*a as usize].push((j as u16, *b, e.clone()));
                    // ∂_b (c^a c^b) = (-1)^{q_a q_b} c^a
                    let s = if self.ghosts.is_odd(*a) && self.ghosts.is_odd(*b) {
                        -1
                    } else {
                        1
                    };
                    dq[*b as usize].push((j as u16, *a, field.mul(&field.from_i64(s), &e)));
                }
            }
        }
        Ok(Tables { q, dq })
    }

    /// Grading degree `deg(value) - Σ deg(duals)`.
    pub fn degree_of(&self, m: &CochainMonomial) -> i64 {
        let v = m.value.map_or(0, |a| self.degree[a as usize]);
        v - m
            .duals
            .iter()
            .map(|&i| self.degree[i as usize])
            .sum::<i64>()
    }

    pub fn weight_of(&self, m: &CochainMonomial) -> Vec<i32> {
        let mut w = match m.value {
            Some(a) => self.weight[a as usize].clone(),
            None => vec![0; self.g.weight_rank()],
        };
        for &i in &m.duals {
            for (t, x) in self.weight[i as usize].iter().enumerate() {
                w[t] -= x;
            }
        }
        w
    }

    /// `p(value) + Σ p(duals)`, plus one for the parity-shifted module.
    pub fn parity_of(&self, m: &CochainMonomial) -> Parity {
        let mut p = m.value.map_or(0, |a| self.g.parity(a as usize).bit());
        p += m
            .duals
            .iter()
            .map(|&i| self.g.parity(i as usize).bit())
            .sum::<u32>();
        if self.coeff == CoefficientSpec::PiAdjoint {
            p += 1;
        }
        Parity::from_bit(p)
    }

    /// Parity as an element of `Π(C^•)`, the vector field parity.
    fn field_parity(&self, m: &CochainMonomial) -> u32 {
        let v = m.value.map_or(0, |a| u32::from(self.ghosts.is_odd(a)));
        (self.ghosts.parity(&m.duals) + v) & 1
    }

    fn values(&self) -> Vec<Option<u16>> {
        if self.coeff.has_value() {
            (0..self.g.dim() as u16).map(Some).collect()
        } else {
            vec![None]
        }
    }

    /// All monomials of cochain degree `k` with the given degree and weight.
    pub fn enumerate_slice(
        &self,
        k: usize,
        degree: Option<i64>,
        weight: Option<&[i32]>,
    ) -> ComplexSlice {
        self.enumerate_slice_capped(k, degree, weight, usize::MAX)
            .expect("uncapped")
    }

    /// As [`Self::enumerate_slice`], giving up once `limit` monomials exist.
    pub fn enumerate_slice_capped(
        &self,
        k: usize,
        degree: Option<i64>,
        weight: Option<&[i32]>,
        limit: usize,
    ) -> std::result::Result<ComplexSlice, OverBudget> {
        let mut basis = Vec::new();
        for value in self.values() {
            let (vd, vw) = match value {
                Some(a) => (self.degree[a as usize], self.weight[a as usize].clone()),
                None => (0, vec![0; self.g.weight_rank()]),
            };
            let target_deg = degree.map(|d| vd - d);
            let target_wt: Option<Vec<i32>> =
                weight.map(|w| vw.iter().zip(w).map(|(a, b)| a - b).collect());
            let mut word = Word::new();
            let mut emit = |duals: &Word| -> bool {
                basis.push(CochainMonomial {
                    value,
                    duals: duals.clone(),
                });
                basis.len() <= limit
            };
            if !self.dfs(
                0,
                k,
                target_deg,
                target_wt.as_deref(),
                &mut word,
                0,
                &mut vec![0; self.g.weight_rank()],
                &mut emit,
            ) {
                return Err(OverBudget { limit });
            }
        }
        Ok(ComplexSlice::from_basis(
            k,
            degree,
            weight.map(<[i32]>::to_vec),
            basis,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        start: usize,
        remaining: usize,
        target_deg: Option<i64>,
        target_wt: Option<&[i32]>,
        word: &mut Word,
        deg: i64,
        wt: &mut Vec<i32>,
        emit: &mut dyn FnMut(&Word) -> bool,
    ) -> bool {
        if remaining == 0 {
            let ok = target_deg.is_none_or(|t| t == deg)
                && target_wt.is_none_or(|t| t == wt.as_slice());
            return !ok || emit(word);
        }
        let n = self.g.dim();
        for j in start..n {
            let next = if self.ghosts.is_odd(j as u16) {
                j + 1
            } else {
                j
            };
            let d = deg + self.degree[j];
            for (t, x) in self.weight[j].iter().enumerate() {
                wt[t] += x;
            }
            if self.feasible(next, remaining - 1, target_deg, target_wt, d, wt) {
                word.push(j as u16);
                let cont = self.dfs(
                    next,
                    remaining - 1,
                    target_deg,
                    target_wt,
                    word,
                    d,
                    wt,
                    emit,
                );
                word.pop();
                if !cont {
                    for (t, x) in self.weight[j].iter().enumerate() {
                        wt[t] -= x;
                    }
                    return false;
                }
            }
            for (t, x) in self.weight[j].iter().enumerate() {
                wt[t] -= x;
            }
        }
        true
    }

    fn feasible(
        &self,
        start: usize,
        remaining: usize,
        target_deg: Option<i64>,
        target_wt: Option<&[i32]>,
        deg: i64,
        wt: &[i32],
    ) -> bool {
        let r = remaining as i64;
        if remaining == 0 {
            return target_deg.is_none_or(|t| t == deg) && target_wt.is_none_or(|t| t == wt);
        }
        if start >= self.g.dim() {
            return false;
        }
        let (lo, hi, ref wb) = self.bounds[start];
        if let Some(t) = target_deg {
            let need = t - deg;
            if need < r * lo || need > r * hi {
                return false;
            }
        }
        if let Some(tw) = target_wt {
            for (t, (&goal, &cur)) in tw.iter().zip(wt).enumerate() {
                let need = (goal - cur) as i64;
                if need < r * wb[t].0 as i64 || need > r * wb[t].1 as i64 {
                    return false;
                }
            }
        }
        true
    }

    /// Appends the terms of `D m` to `out` (unsorted, possibly repeated).
    pub fn apply_monomial<F: FieldOps>(
        &self,
        field: &F,
        t: &Tables<F::E>,
        m: &CochainMonomial,
        out: &mut Vec<(CochainMonomial, F::E)>,
    ) {
        // Q(m) = Σ_k Q^k ∂_k m; for adjoint cochains X = m ∂_a,
        // D X = m ∂_a(Q^j) ∂_j - (-1)^{p(X)} Q(m) ∂_a.
        let q_sign = match m.value {
            Some(_) if self.field_parity(m) == 0 => -1,
            Some(_) => 1,
            None => 1,
        };
        let mut prev = None;
        for &k in &m.duals {
            if prev == Some(k) {
                continue;
            }
            prev = Some(k);
            let (s, rest) = self.ghosts.derive(k, &m.duals).expect("present");
            let base = field.from_i64(s * q_sign);
            for (a, b, c) in &t.q[k as usize] {
                let pair: [u16; 2] = [*a, *b];
                if let Some((neg, w)) = self.ghosts.mul(&pair, &rest) {
                    let mut coef = field.mul(&base, c);
                    if neg {
                        coef = field.mul(&field.from_i64(-1), &coef);
                    }
                    out.push((
                        CochainMonomial {
                            value: m.value,
                            duals: w,
                        },
                        coef,
                    ));
                }
            }
        }
        if let Some(a) = m.value {
            for (j, i, c) in &t.dq[a as usize] {
                if let Some((neg, w)) = self.ghosts.mul(&m.duals, &[*i]) {
                    let coef = if neg {
                        field.mul(&field.from_i64(-1), c)
                    } else {
                        c.clone()
                    };
                    out.push((
                        CochainMonomial {
                            value: Some(*j),
                            duals: w,
                        },
                        coef,
                    ));
                }
            }
        }
    }

    /// Images of the source basis as sparse columns over `field`, indexed
    /// by target positions. Fails if an image leaves the target slice.
    pub fn differential_columns<F: FieldOps>(
        &self,
        field: &F,
        source: &ComplexSlice,
        target: &ComplexSlice,
    ) -> Result<Vec<Vec<(u32, F::E)>>> {
        if target.k != source.k + 1
            || target.degree != source.degree
            || target.weight != source.weight
        {
            return Err(Error::SliceMismatch(format!(
                "cannot map k={} to k={} across different filters",
                source.k, target.k
            )));
        }
        let t = self.tables(field)?;
        let mut cols = Vec::with_capacity(source.len());
        let mut buf = Vec::new();
        for m in &source.basis {
            buf.clear();
            self.apply_monomial(field, &t, m, &mut buf);
            let mut col: Vec<(u32, F::E)> = Vec::with_capacity(buf.len());
            for (img, c) in buf.drain(..) {
                let row = target.index.get(&img).ok_or_else(|| {
                    Error::SliceMismatch(format!(
                        "D{m:?} has the term {img:?} outside the target slice"
                    ))
                })?;
                col.push((*row, c));
            }
            col.sort_by_key(|e| e.0);
            let mut merged: Vec<(u32, F::E)> = Vec::with_capacity(col.len());
            for (r, c) in col {
                match merged.last_mut() {
                    Some(last) if last.0 == r => last.1 = field.add(&last.1, &c),
                    _ => merged.push((r, c)),
                }
            }
            merged.retain(|e| !field.is_zero(&e.1));
            cols.push(merged);
        }
        Ok(cols)
    }

    /// Exact matrix of `D` from `source` to `target`.
    pub fn differential_matrix(
        &self,
        source: &ComplexSlice,
        target: &ComplexSlice,
    ) -> Result<SparseRationalMatrix> {
        let cols = self.differential_columns(&Rationals, source, target)?;
        let columns = cols
            .into_iter()
            .map(|c| c.into_iter().map(|(r, x)| (r as usize, x)).collect())
            .collect();
        SparseRationalMatrix::from_columns(target.len(), columns)
    }

    /// Matrix of `D` reduced modulo a prime, as columns.
    pub fn differential_mod_p(
        &self,
        field: &PrimeField,
        source: &ComplexSlice,
        target: &ComplexSlice,
    ) -> Result<Vec<Vec<(u32, u32)>>> {
        self.differential_columns(field, source, target)
    }

    /// `D` applied to a cochain, exactly.
    pub fn apply(&self, c: &Cochain) -> Result<Cochain> {
        let t = self.tables(&Rationals)?;
        let mut buf = Vec::new();
        for (m, x) in &c.terms {
            let start = buf.len();
            self.apply_monomial(&Rationals, &t, m, &mut buf);
            for e in &mut buf[start..] {
                e.1 = &e.1 * x;
            }
        }
        Ok(Cochain::from_terms(c.k + 1, buf))
    }

    /// Checks that `D` preserves degree and weight on every monomial with
    /// cochain degree at most `k_max`.
    pub fn check_grading(&self, k_max: usize) -> Result<Vec<GradingDefect>> {
        let t = self.tables(&Rationals)?;
        let mut defects = Vec::new();
        let mut buf = Vec::new();
        for k in 0..=k_max {
            for m in self.enumerate_slice(k, None, None).basis {
                let (d, w) = (self.degree_of(&m), self.weight_of(&m));
                buf.clear();
                self.apply_monomial(&Rationals, &t, &m, &mut buf);
                for (img, _) in &buf {
                    if self.degree_of(img) != d || self.weight_of(img) != w {
                        defects.push(GradingDefect {
                            source: m.clone(),
                            image: img.clone(),
                        });
                    }
                }
            }
        }
        Ok(defects)
    }

    /// Display form, e.g. `E12 ⊗ f(E21)f(H1)`.
    pub fn display(&self, m: &CochainMonomial) -> String {
        let names = |i: u16| self.g.basis()[i as usize].name.clone();
        let mut s = m.value.map_or_else(|| "1".to_string(), names);
        if !m.duals.is_empty() {
            s.push_str(" ⊗ ");
            let duals: Vec<String> = m
                .duals
                .iter()
                .map(|&i| format!("f({})", names(i)))
                .collect();
            s.push_str(&duals.join("∧"));
        }
        s
    }

    pub fn display_cochain(&self, c: &Cochain) -> String {
        let mut parts = Vec::new();
        for (m, x) in &c.terms {
            parts.push(format!("({x}) {}", self.display(m)));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// `dim Λ^k` of the super-exterior power of a space with `even` even and
/// `odd` odd basis vectors: even duals anticommute, odd ones commute.
pub fn exterior_power_dim(even: usize, odd: usize, k: usize) -> u128 {
    fn binom(n: u128, r: u128) -> u128 {
        if r > n {
            return 0;
        }
        let mut acc = 1u128;
        for i in 0..r {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    }
    (0..=k.min(even))
        .map(|a| {
            let b = (k - a) as u128;
            let sym = if odd == 0 {
                u128::from(b == 0)
            } else {
                binom(odd as u128 + b - 1, b)
            };
            binom(even as u128, a as u128) * sym
        })
        .sum()
}
