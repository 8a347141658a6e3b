use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Nijenhuis, ShiftedCochain};
use crate::algebra::{Parity, SuperAlgebra};
use crate::cohomology::{block_rank, coboundary_mod_p, ClassSpace, PrimePolicy};
use crate::complex::{Cochain, ComplexSlice};
use crate::error::{Error, Result};
use crate::linalg::{qi, Echelon, SparseVec, Q};

/// Cells `(k, degree)` of `H^k(g; g)` whose classes are bracketed pairwise.
#[derive(Clone, Debug)]
pub struct BracketRequest {
    pub cells: Vec<(usize, i64)>,
    pub full_weight: bool,
    /// Largest slice, in monomials, on which classes are solved exactly.
    pub budget: usize,
    /// Largest slice whose cohomology dimension is found by modular ranks
    /// when deciding whether a target cell is zero. Over budget, a bracket
    /// is still tested for being a coboundary if the slice below it fits.
    pub rank_budget: usize,
}

impl BracketRequest {
    pub const DEFAULT_BUDGET: usize = 50_000;
    pub const DEFAULT_RANK_BUDGET: usize = 40_000;

    pub fn new(cells: Vec<(usize, i64)>) -> Self {
        BracketRequest {
            cells,
            full_weight: false,
            budget: Self::DEFAULT_BUDGET,
            rank_budget: Self::DEFAULT_RANK_BUDGET,
        }
    }
}

/// One basis class of the table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassLabel {
    pub name: String,
    pub k: usize,
    pub l_degree: i64,
    pub degree: i64,
    /// Parity in `l`.
    pub parity: Parity,
    pub representative: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub class: usize,
    pub num: String,
    pub den: String,
}

/// `[left, right] = Σ terms`, for `left <= right`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Product {
    pub left: usize,
    pub right: usize,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnknownProduct {
    pub left: usize,
    pub right: usize,
    pub reason: String,
}

impl std::fmt::Display for UnknownProduct {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]: {}", self.left, self.right, self.reason)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketTable {
    pub schema: String,
    pub algebra: String,
    pub labels: Vec<ClassLabel>,
    pub products: Vec<Product>,
    pub unknown: Vec<UnknownProduct>,
    /// Requested cells that could not be enumerated within the budget.
    pub missing: Vec<String>,
}

pub const TABLE_SCHEMA: &str = "supercohom.bracket-table/1";

impl BracketTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: BracketTable = serde_json::from_str(text)?;
        if t.schema != TABLE_SCHEMA {
            return Err(Error::Format(format!("unknown schema `{}`", t.schema)));
        }
        Ok(t)
    }

    pub fn label(&self, k: usize, degree: i64) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i].k == k && self.labels[i].degree == degree)
            .collect()
    }

    /// `[i, j]` as class coordinates, derived by antisymmetry when
    /// `i > j`; `None` if unknown.
    pub fn product(&self, i: usize, j: usize) -> Option<Vec<(usize, Q)>> {
        let (a, b, flip) = if i <= j { (i, j, false) } else { (j, i, true) };
        let p = self.products.iter().find(|p| p.left == a && p.right == b)?;
        let sign = if flip {
            -self.labels[a].parity.sign_with(self.labels[b].parity)
        } else {
            1
        };
        Some(
            p.terms
                .iter()
                .map(|t| (t.class, parse_q(&t.num, &t.den) * qi(sign)))
                .collect(),
        )
    }

    pub fn all_zero(&self) -> bool {
        self.unknown.is_empty() && self.products.iter().all(|p| p.terms.is_empty())
    }
}

fn parse_q(num: &str, den: &str) -> Q {
    Q::new(num.parse().expect("integer"), den.parse().expect("integer"))
}

type CellKey = (usize, i64, Parity);

struct Cell {
    space: ClassSpace,
    labels: Vec<usize>,
}

enum Target {
    /// The cell has no cohomology, so every cocycle there is exact.
    Zero,
    Classes(Box<Cell>),
    Unknown,
}

/// Classes of one cell in one parity of `l`; `None` if over budget.
fn class_cell(
    nij: &Nijenhuis,
    key: CellKey,
    weight: Option<&[i32]>,
    budget: usize,
) -> Result<Option<ClassSpace>> {
    let (k, degree, parity) = key;
    let cx = nij.complex();
    let plain = parity + Parity::from_bit(k as u32 + 1);
    let enumerate = |k: usize| -> Option<ComplexSlice> {
        let s = cx
            .enumerate_slice_capped(k, Some(degree), weight, budget)
            .ok()?;
        Some(s.restrict(|m| cx.parity_of(m) == plain))
    };
    let (Some(cur), Some(next)) = (enumerate(k), enumerate(k + 1)) else {
        return Ok(None);
    };
    let prev = if k > 0 {
        match enumerate(k - 1) {
            Some(p) => Some(p),
            None => return Ok(None),
        }
    } else {
        None
    };
    let start = std::time::Instant::now();
    let space = ClassSpace::from_slices(cx, prev.as_ref(), &cur, &next, degree)?;
    log::debug!(
        "classes k={k} degree={degree} {parity:?}: {} of {} cochains in {:.2?}",
        space.dim(),
        cur.len(),
        start.elapsed()
    );
    Ok(Some(space))
}

/// `dim H` of one cell in one parity of `l` from modular ranks; `None`
/// if over budget.
fn cell_dim(
    nij: &Nijenhuis,
    key: CellKey,
    weight: Option<&[i32]>,
    budget: usize,
) -> Result<Option<usize>> {
    let (k, degree, parity) = key;
    let cx = nij.complex();
    let plain = parity + Parity::from_bit(k as u32 + 1);
    let enumerate = |k: usize| -> Option<ComplexSlice> {
        let s = cx
            .enumerate_slice_capped(k, Some(degree), weight, budget)
            .ok()?;
        Some(s.restrict(|m| cx.parity_of(m) == plain))
    };
    let Some(cur) = enumerate(k) else {
        return Ok(None);
    };
    if cur.is_empty() {
        return Ok(Some(0));
    }
    let Some(next) = enumerate(k + 1) else {
        return Ok(None);
    };
    let policy = PrimePolicy::default();
    let rank = |a: &ComplexSlice, b: &ComplexSlice| -> Result<usize> {
        if a.is_empty() || b.is_empty() {
            return Ok(0);
        }
        Ok(block_rank(cx, a, b, &policy)?.0)
    };
    let mut dim = cur.len() - rank(&cur, &next)?;
    if k > 0 {
        let Some(prev) = enumerate(k - 1) else {
            return Ok(None);
        };
        dim -= rank(&prev, &cur)?;
    }
    log::debug!(
        "dim H k={k} degree={degree} {parity:?}: {dim} of {} cochains",
        cur.len()
    );
    Ok(Some(dim))
}

/// Whether `b` is a coboundary, by modular ranks against the slice below;
/// `None` if that slice is over budget or the primes disagree.
fn coboundary(
    nij: &Nijenhuis,
    key: CellKey,
    weight: Option<&[i32]>,
    b: &Cochain,
    budget: usize,
) -> Result<Option<bool>> {
    let (k, degree, parity) = key;
    if k == 0 {
        return Ok(Some(false));
    }
    let cx = nij.complex();
    let plain = parity + Parity::from_bit(k as u32 + 1);
    let Ok(prev) = cx.enumerate_slice_capped(k - 1, Some(degree), weight, budget) else {
        return Ok(None);
    };
    let prev = prev.restrict(|m| cx.parity_of(m) == plain);
    let cur = cx
        .enumerate_slice(k, Some(degree), weight)
        .restrict(|m| cx.parity_of(m) == plain);
    let start = std::time::Instant::now();
    let answer = coboundary_mod_p(cx, &prev, &cur, b, &PrimePolicy::default())?;
    log::debug!(
        "coboundary test k={k} degree={degree}: {answer:?} on {} -> {} in {:.2?}",
        prev.len(),
        cur.len(),
        start.elapsed()
    );
    Ok(answer)
}

fn weight_filter(g: &SuperAlgebra, full_weight: bool) -> Option<Vec<i32>> {
    (!full_weight && g.torus().is_some()).then(|| vec![0; g.weight_rank()])
}

fn to_terms(coords: Vec<(usize, Q)>, labels: &[usize]) -> Vec<Term> {
    let mut terms: Vec<Term> = coords
        .into_iter()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| Term {
            class: labels[i],
            num: x.numer().to_string(),
            den: x.denom().to_string(),
        })
        .collect();
    terms.sort_by_key(|t| t.class);
    terms
}

/// Brackets all pairs of classes in the requested cells of `H^•(g; g)`
/// and expresses each product in the classes of its target cell.
pub fn bracket_table(g: &SuperAlgebra, request: &BracketRequest) -> Result<BracketTable> {
    let nij = Nijenhuis::new(g)?;
    let weight = weight_filter(g, request.full_weight);
    let w = weight.as_deref();
    let mut cells_req: Vec<(usize, i64)> = request.cells.clone();
    cells_req.sort();
    cells_req.dedup();

    let keys: Vec<CellKey> = cells_req
        .iter()
        .flat_map(|&(k, d)| [(k, d, Parity::Even), (k, d, Parity::Odd)])
        .collect();
    let spaces: Vec<Option<ClassSpace>> = keys
        .par_iter()
        .map(|&key| class_cell(&nij, key, w, request.budget))
        .collect::<Result<_>>()?;

    let mut labels = Vec::new();
    let mut reps: Vec<ShiftedCochain> = Vec::new();
    let mut missing = Vec::new();
    for (&(k, d), pair) in cells_req.iter().zip(spaces.chunks(2)) {
        if pair.iter().any(Option::is_none) {
            missing.push(format!("{k}:{d}"));
            continue;
        }
        let mut idx = 0;
        for space in pair.iter().flatten() {
            for v in &space.representatives {
                let c = Cochain::from_vector(&space.slice, v);
                let s = nij.shift(c)?;
                labels.push(ClassLabel {
                    name: format!("c{k}[{d}].{idx}"),
                    k,
                    l_degree: k as i64 - 1,
                    degree: d,
                    parity: s.parity,
                    representative: nij.complex().display_cochain(&s.underlying),
                });
                reps.push(s);
                idx += 1;
            }
        }
    }

    let pairs: Vec<(usize, usize)> = (0..reps.len())
        .flat_map(|i| (i..reps.len()).map(move |j| (i, j)))
        .collect();
    let brackets: Vec<ShiftedCochain> = pairs
        .par_iter()
        .map(|&(i, j)| nij.bracket(&reps[i], &reps[j]))
        .collect();

    // Target cells of the nonzero brackets.
    let mut targets: BTreeMap<CellKey, ()> = BTreeMap::new();
    for (&(i, j), b) in pairs.iter().zip(&brackets) {
        if !b.is_zero() {
            let key = (
                labels[i].k + labels[j].k - 1,
                labels[i].degree + labels[j].degree,
                b.parity,
            );
            targets.insert(key, ());
        }
    }
    let keys: Vec<CellKey> = targets.keys().cloned().collect();
    let built: Vec<Target> = keys
        .par_iter()
        .map(|&key| -> Result<Target> {
            match cell_dim(&nij, key, w, request.rank_budget)? {
                Some(0) => return Ok(Target::Zero),
                None => return Ok(Target::Unknown),
                Some(_) => {}
            }
            Ok(match class_cell(&nij, key, w, request.budget)? {
                Some(space) => {
                    let labels = (0..labels.len())
                        .filter(|&i| (labels[i].k, labels[i].degree, labels[i].parity) == key)
                        .collect::<Vec<_>>();
                    Target::Classes(Box::new(Cell { space, labels }))
                }
                None => Target::Unknown,
            })
        })
        .collect::<Result<_>>()?;
    let targets: BTreeMap<CellKey, Target> = keys.into_iter().zip(built).collect();

    let mut products = Vec::new();
    let mut unknown = Vec::new();
    for (&(i, j), b) in pairs.iter().zip(&brackets) {
        if b.is_zero() {
            products.push(Product {
                left: i,
                right: j,
                terms: Vec::new(),
            });
            continue;
        }
        let key = (
            labels[i].k + labels[j].k - 1,
            labels[i].degree + labels[j].degree,
            b.parity,
        );
        if !nij.differential(b)?.is_zero() {
            return Err(Error::Mismatch(format!(
                "bracket of classes {i} and {j} is not a cocycle"
            )));
        }
        let cell = match &targets[&key] {
            Target::Zero => {
                products.push(Product {
                    left: i,
                    right: j,
                    terms: Vec::new(),
                });
                continue;
            }
            Target::Unknown => {
                let reason = match coboundary(&nij, key, w, &b.underlying, request.rank_budget)? {
                    Some(true) => {
                        products.push(Product {
                            left: i,
                            right: j,
                            terms: Vec::new(),
                        });
                        continue;
                    }
                    Some(false) => "nonzero class in an over-budget target",
                    None => "target slice over budget",
                };
                unknown.push(UnknownProduct {
                    left: i,
                    right: j,
                    reason: format!("{reason}: k={} degree={}", key.0, key.1),
                });
                continue;
            }
            Target::Classes(cell) => cell,
        };
        let v = b.underlying.to_vector(&cell.space.slice).ok_or_else(|| {
            Error::SliceMismatch(format!(
                "bracket of classes {i} and {j} leaves its target slice"
            ))
        })?;
        let coords = cell.space.class_of(&v).ok_or_else(|| {
            Error::Mismatch(format!(
                "bracket of classes {i} and {j} has no class in its target slice"
            ))
        })?;
        // Target classes outside the requested cells cannot be named.
        if cell.labels.len() < cell.space.dim() && coords.iter().any(|(_, x)| !x.is_zero()) {
            unknown.push(UnknownProduct {
                left: i,
                right: j,
                reason: format!(
                    "nonzero class in the unrequested cell k={} degree={}",
                    key.0, key.1
                ),
            });
            continue;
        }
        products.push(Product {
            left: i,
            right: j,
            terms: to_terms(coords, &cell.labels),
        });
    }

    Ok(BracketTable {
        schema: TABLE_SCHEMA.into(),
        algebra: g.name().into(),
        labels,
        products,
        unknown,
        missing,
    })
}

/// Span of the iterated brackets of the classes in the generator cells,
/// compared with the span of all classes in the table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub generators: Vec<(usize, i64)>,
    /// `(k, degree, classes, generated)` per cell of the table.
    pub cells: Vec<(usize, i64, usize, usize)>,
    /// Brackets that were needed but are unknown.
    pub unknown_products: usize,
    pub generated: bool,
}

pub fn generation_report(table: &BracketTable, generators: &[(usize, i64)]) -> GenerationReport {
    let n = table.labels.len();
    let mut span = Echelon::new();
    let mut basis: Vec<SparseVec> = Vec::new();
    for (i, l) in table.labels.iter().enumerate() {
        if generators.contains(&(l.k, l.degree)) && span.insert(vec![(i, Q::one())]).is_some() {
            basis.push(vec![(i, Q::one())]);
        }
    }
    let mut unknown = 0;
    let mut done = 0;
    while done < basis.len() {
        let len = basis.len();
        let mut fresh = Vec::new();
        for a in 0..len {
            for b in done.max(a)..len {
                let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
                for (i, x) in &basis[a] {
                    for (j, y) in &basis[b] {
                        match table.product(*i, *j) {
                            Some(terms) => {
                                for (t, z) in terms {
                                    *acc.entry(t).or_insert_with(Q::zero) += x * y * z;
                                }
                            }
                            None => unknown += 1,
                        }
                    }
                }
                let v: SparseVec = acc.into_iter().filter(|(_, x)| !x.is_zero()).collect();
                if !v.is_empty() && span.insert(v.clone()).is_some() {
                    fresh.push(v);
                }
            }
        }
        done = len;
        basis.extend(fresh);
    }
    let mut cells: Vec<(usize, i64, usize, usize)> = Vec::new();
    let mut keys: Vec<(usize, i64)> = table.labels.iter().map(|l| (l.k, l.degree)).collect();
    keys.sort();
    keys.dedup();
    for (k, d) in keys {
        let members: Vec<usize> = (0..n)
            .filter(|&i| table.labels[i].k == k && table.labels[i].degree == d)
            .collect();
        let projected = {
            let mut e = Echelon::new();
            for v in &basis {
                let p: SparseVec = v
                    .iter()
                    .filter(|(i, _)| members.contains(i))
                    .cloned()
                    .collect();
                if !p.is_empty() {
                    e.insert(p);
                }
            }
            e.rank()
        };
        cells.push((k, d, members.len(), projected));
    }
    let generated = unknown == 0 && cells.iter().all(|c| c.2 == c.3);
    GenerationReport {
        generators: generators.to_vec(),
        cells,
        unknown_products: unknown,
        generated,
    }
}
