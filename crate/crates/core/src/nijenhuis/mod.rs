//! The dot product and Nijenhuis bracket on `L = Π(C^{•-1}(g; g))`, the
//! action of trivial-coefficient cochains on adjoint ones, and the induced
//! bracket on cohomology classes.
//!
//! An adjoint cochain `X = m ∂_a` is a vector field on the parity-shifted
//! algebra. `A · B` applies `B` to the coefficients of `A`, so
//! `[A, B] = A·B - (-1)^{p(A)p(B)} B·A` is the vector field commutator
//! taken in the opposite order, and `D = [Q, -]` is a derivation of it.

mod table;

#[cfg(test)]
mod tests;

use rustc_hash::FxHashMap;

use crate::algebra::{Parity, SuperAlgebra};
use crate::complex::{CeComplex, Cochain, CochainMonomial, CoefficientSpec};
use crate::error::{Error, Result};
use crate::linalg::{qi, Q};

pub use table::{
    bracket_table, generation_report, BracketRequest, BracketTable, ClassLabel, GenerationReport,
    Product, Term, UnknownProduct,
};

/// An adjoint cochain of cochain degree `n`, viewed in `L_{n-1}` with the
/// shifted parity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftedCochain {
    pub underlying: Cochain,
    pub parity: Parity,
}

impl ShiftedCochain {
    pub fn l_degree(&self) -> i64 {
        self.underlying.k as i64 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.underlying.is_zero()
    }

    pub fn scale(&self, c: &Q) -> ShiftedCochain {
        ShiftedCochain {
            underlying: self.underlying.scale(c),
            parity: self.parity,
        }
    }

    pub fn add(&self, other: &ShiftedCochain) -> ShiftedCochain {
        ShiftedCochain {
            underlying: self.underlying.add(&other.underlying),
            parity: self.parity,
        }
    }

    pub fn sub(&self, other: &ShiftedCochain) -> ShiftedCochain {
        self.add(&other.scale(&qi(-1)))
    }
}

/// Bracket operations on the adjoint complex of one algebra.
pub struct Nijenhuis<'a> {
    cx: CeComplex<'a>,
}

impl<'a> Nijenhuis<'a> {
    pub fn new(g: &'a SuperAlgebra) -> Result<Self> {
        Ok(Nijenhuis {
            cx: CeComplex::new(g, CoefficientSpec::Adjoint)?,
        })
    }

    pub fn complex(&self) -> &CeComplex<'a> {
        &self.cx
    }

    /// Parity in `L`: cochain parity plus `k + 1`.
    pub fn parity_of(&self, m: &CochainMonomial) -> Parity {
        self.cx.parity_of(m) + Parity::from_bit(m.k() as u32 + 1)
    }

    /// Wraps a cochain; fails if it has no value factor or mixes parities.
    pub fn shift(&self, c: Cochain) -> Result<ShiftedCochain> {
        let mut parity = None;
        for (m, _) in &c.terms {
            self.check_monomial(m)?;
            let p = self.parity_of(m);
            if parity.is_some_and(|q| q != p) {
                return Err(Error::Mismatch(
                    "cochain is not homogeneous in parity".into(),
                ));
            }
            parity = Some(p);
        }
        Ok(ShiftedCochain {
            underlying: c,
            parity: parity.unwrap_or(Parity::Even),
        })
    }

    pub fn monomial(&self, m: CochainMonomial) -> Result<ShiftedCochain> {
        let k = m.k();
        self.shift(Cochain::from_terms(k, vec![(m, qi(1))]))
    }

    fn check_monomial(&self, m: &CochainMonomial) -> Result<()> {
        let n = self.cx.algebra().dim();
        let Some(v) = m.value else {
            return Err(Error::Mismatch(
                "trivial-coefficient cochain where an adjoint one is required".into(),
            ));
        };
        if v as usize >= n || m.duals.iter().any(|&i| i as usize >= n) {
            return Err(Error::Mismatch(
                "cochain refers to a basis vector outside the algebra".into(),
            ));
        }
        Ok(())
    }

    /// `A · B`: `B` applied to the coefficients of `A`.
    pub fn dot(&self, a: &ShiftedCochain, b: &ShiftedCochain) -> ShiftedCochain {
        self.dot_signed(a, b, true)
    }

    /// [`Self::dot`], optionally dropping the reordering sign of the
    /// product of coefficients.
    fn dot_signed(&self, a: &ShiftedCochain, b: &ShiftedCochain, koszul: bool) -> ShiftedCochain {
        let k = (a.underlying.k + b.underlying.k).saturating_sub(1);
        let parity = a.parity + b.parity;
        if a.underlying.k == 0 {
            return ShiftedCochain {
                underlying: Cochain::zero(k),
                parity,
            };
        }
        let ghosts = self.cx.ghosts();
        let mut by_dual: FxHashMap<u16, Vec<usize>> = FxHashMap::default();
        for (t, (m, _)) in a.underlying.terms.iter().enumerate() {
            let mut prev = None;
            for &i in &m.duals {
                if prev != Some(i) {
                    by_dual.entry(i).or_default().push(t);
                }
                prev = Some(i);
            }
        }
        let mut acc: FxHashMap<CochainMonomial, Q> = FxHashMap::default();
        for (mb, cb) in &b.underlying.terms {
            let beta = mb.value.expect("adjoint");
            let Some(hits) = by_dual.get(&beta) else {
                continue;
            };
            for &t in hits {
                let (ma, ca) = &a.underlying.terms[t];
                let (mult, rest) = ghosts.derive(beta, &ma.duals).expect("present");
                let Some((neg, w)) = ghosts.mul(&mb.duals, &rest) else {
                    continue;
                };
                let sign = if neg && koszul { -mult } else { mult };
                let x = ca * cb * qi(sign);
                *acc.entry(CochainMonomial {
                    value: ma.value,
                    duals: w,
                })
                .or_insert_with(|| qi(0)) += x;
            }
        }
        ShiftedCochain {
            underlying: Cochain::from_terms(k, acc.into_iter().collect()),
            parity,
        }
    }

    /// `[A, B] = A·B - (-1)^{p(A)p(B)} B·A`.
    pub fn bracket(&self, a: &ShiftedCochain, b: &ShiftedCochain) -> ShiftedCochain {
        self.bracket_signed(a, b, true)
    }

    fn bracket_signed(
        &self,
        a: &ShiftedCochain,
        b: &ShiftedCochain,
        koszul: bool,
    ) -> ShiftedCochain {
        let ab = self.dot_signed(a, b, koszul);
        let ba = self.dot_signed(b, a, koszul);
        let s = a.parity.sign_with(b.parity);
        ShiftedCochain {
            underlying: ab.underlying.add(&ba.underlying.scale(&qi(-s))),
            parity: ab.parity,
        }
    }

    /// `D A`, of the opposite parity.
    pub fn differential(&self, a: &ShiftedCochain) -> Result<ShiftedCochain> {
        Ok(ShiftedCochain {
            underlying: self.cx.apply(&a.underlying)?,
            parity: a.parity.flip(),
        })
    }

    /// `D[A, B] - [DA, B] - (-1)^{p(A)} [A, DB]`.
    pub fn leibniz_defect(&self, a: &ShiftedCochain, b: &ShiftedCochain) -> Result<Cochain> {
        self.leibniz_defect_signed(a, b, true)
    }

    fn leibniz_defect_signed(
        &self,
        a: &ShiftedCochain,
        b: &ShiftedCochain,
        koszul: bool,
    ) -> Result<Cochain> {
        let lhs = self.differential(&self.bracket_signed(a, b, koszul))?;
        let t1 = self.bracket_signed(&self.differential(a)?, b, koszul);
        let t2 = self.bracket_signed(a, &self.differential(b)?, koszul);
        let s = if a.parity.is_odd() { -1 } else { 1 };
        Ok(lhs.sub(&t1).sub(&t2.scale(&qi(s))).underlying)
    }

    /// Indices of the sample pairs whose Leibniz defect is nonzero.
    pub fn check_leibniz(
        &self,
        samples: &[(ShiftedCochain, ShiftedCochain)],
    ) -> Result<Vec<usize>> {
        let mut bad = Vec::new();
        for (i, (a, b)) in samples.iter().enumerate() {
            if !self.leibniz_defect(a, b)?.is_zero() {
                bad.push(i);
            }
        }
        Ok(bad)
    }

    /// `(-1)^{p(A)p(C)} [[A,B],C] + cyclic`.
    pub fn jacobi_defect(
        &self,
        a: &ShiftedCochain,
        b: &ShiftedCochain,
        c: &ShiftedCochain,
    ) -> Cochain {
        let term = |x: &ShiftedCochain, y: &ShiftedCochain, z: &ShiftedCochain| {
            let s = x.parity.sign_with(z.parity);
            self.bracket(&self.bracket(x, y), z).scale(&qi(s))
        };
        term(a, b, c)
            .add(&term(b, c, a))
            .add(&term(c, a, b))
            .underlying
    }

    /// The grading derivation `Σ deg(e_a) e_a ⊗ f^a` in `L_0`.
    pub fn grading_cochain(&self) -> ShiftedCochain {
        let g = self.cx.algebra();
        let terms = g
            .basis()
            .iter()
            .filter(|b| b.degree != 0)
            .map(|b| {
                (
                    CochainMonomial::new(Some(b.index as u16), &[b.index as u16]),
                    qi(b.degree as i64),
                )
            })
            .collect();
        ShiftedCochain {
            underlying: Cochain::from_terms(1, terms),
            parity: Parity::Even,
        }
    }

    /// `w ∧ c` for an adjoint cochain `c` and a trivial-coefficient cochain
    /// `w`: the value of `c` is kept and the duals of `w` come first.
    pub fn wedge(&self, c: &Cochain, w: &Cochain) -> Result<Cochain> {
        let ghosts = self.cx.ghosts();
        let n = self.cx.algebra().dim();
        let mut terms = Vec::new();
        for (mw, cw) in &w.terms {
            if mw.value.is_some() || mw.duals.iter().any(|&i| i as usize >= n) {
                return Err(Error::Mismatch(
                    "second factor must be a trivial-coefficient cochain".into(),
                ));
            }
            for (mc, cc) in &c.terms {
                self.check_monomial(mc)?;
                if let Some((neg, d)) = ghosts.mul(&mw.duals, &mc.duals) {
                    let x = cc * cw;
                    terms.push((
                        CochainMonomial {
                            value: mc.value,
                            duals: d,
                        },
                        if neg { -x } else { x },
                    ));
                }
            }
        }
        Ok(Cochain::from_terms(c.k + w.k, terms))
    }

    /// `D(w ∧ c) - w ∧ Dc + (-1)^{p(w) + p(c)} Dw ∧ c`, with `p(c)` the
    /// parity in `L`; zero when the module action is compatible with `D`.
    pub fn wedge_leibniz_defect(&self, c: &ShiftedCochain, w: &Cochain) -> Result<Cochain> {
        let trivial = CeComplex::new(self.cx.algebra(), CoefficientSpec::Trivial)?;
        let mut defect = Cochain::zero(c.underlying.k + w.k + 1);
        for (mw, cw) in &w.terms {
            let w1 = Cochain::from_terms(w.k, vec![(mw.clone(), cw.clone())]);
            let lhs = self.cx.apply(&self.wedge(&c.underlying, &w1)?)?;
            let t1 = self.wedge(&self.cx.apply(&c.underlying)?, &w1)?;
            let t2 = self.wedge(&c.underlying, &trivial.apply(&w1)?)?;
            let odd = (self.cx.ghosts().parity(&mw.duals) + c.parity.bit()) % 2 == 1;
            let s = if odd { -1 } else { 1 };
            defect = defect.add(&lhs.add(&t1.scale(&qi(-1))).add(&t2.scale(&qi(s))));
        }
        Ok(defect)
    }
}
