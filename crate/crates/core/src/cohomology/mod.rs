//! Slice-wise cohomology: `dim H^k = dim C^k - rank d_k - rank d_{k-1}` on
//! each (degree, weight) slice, split by parity.

mod cache;
mod report;

use std::collections::BTreeMap;

use log::{debug, info};
use rayon::prelude::*;

pub use report::{
    compare, emit_table, Cell, CellDiff, CohomologyReport, Convention, Entry, Layout,
    RepresentativeSet, Skipped, SliceStats, SuperDim, Window,
};

use crate::algebra::{Parity, SuperAlgebra};
use crate::complex::{CeComplex, Cochain, CoefficientSpec, ComplexSlice};
use crate::error::{Error, Result};
use crate::linalg::{
    in_span_mod_p, kernel_basis, primes, rank_exact, rank_mod_p, Echelon, PrimeField, SparseVec,
};

/// How ranks are certified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimePolicy {
    /// Number of random primes; all must agree, else the slice is redone
    /// over the rationals.
    pub count: usize,
    pub seed: u64,
    /// Always use the rational route (the modular route still runs and
    /// must agree).
    pub verify_rational: bool,
}

impl Default for PrimePolicy {
    fn default() -> Self {
        PrimePolicy {
            count: 2,
            seed: primes::DEFAULT_SEED,
            verify_rational: false,
        }
    }
}

impl PrimePolicy {
    pub fn primes(&self) -> Vec<u64> {
        primes::random_primes(self.count, self.seed)
    }
}

#[derive(Clone, Debug)]
pub struct CohomologyOptions {
    pub k_max: usize,
    /// Inclusive grading window; `None` covers every degree that occurs.
    pub degree_window: Option<(i64, i64)>,
    /// Compute every weight instead of the weight-zero subcomplex.
    pub full_weight: bool,
    pub primes: PrimePolicy,
    /// Largest slice (monomials) attempted; bigger cells are skipped.
    pub slice_budget: Option<usize>,
    /// Extract representatives for every nonzero cell.
    pub representatives: bool,
    /// Representatives are only extracted on slices up to this size.
    pub representative_budget: usize,
    pub convention: Convention,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Directory holding per-slice rank results.
    pub cache_dir: Option<std::path::PathBuf>,
}

impl Default for CohomologyOptions {
    fn default() -> Self {
        CohomologyOptions {
            k_max: 3,
            degree_window: None,
            full_weight: false,
            primes: PrimePolicy::default(),
            slice_budget: None,
            representatives: false,
            representative_budget: 20_000,
            convention: Convention::Plain,
            workers: None,
            cache_dir: None,
        }
    }
}

/// Rank of one parity block and how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMethod {
    Modular,
    Rational,
    /// Primes disagreed; the rational rank was used.
    Escalated,
}

impl RankMethod {
    fn name(self) -> &'static str {
        match self {
            RankMethod::Modular => "modular",
            RankMethod::Rational => "rational",
            RankMethod::Escalated => "escalated",
        }
    }
}

/// Rank of `D : source -> target`, computed separately on each parity.
pub fn slice_rank(
    cx: &CeComplex,
    source: &ComplexSlice,
    target: &ComplexSlice,
    policy: &PrimePolicy,
) -> Result<(SuperDim, RankMethod)> {
    let mut ranks = [0usize; 2];
    let mut method = RankMethod::Modular;
    for parity in [Parity::Even, Parity::Odd] {
        let src = source.restrict(|m| cx.parity_of(m) == parity);
        let tgt = target.restrict(|m| cx.parity_of(m) == parity);
        if src.is_empty() || tgt.is_empty() {
            continue;
        }
        let (r, m) = block_rank(cx, &src, &tgt, policy)?;
        ranks[parity.bit() as usize] = r;
        method = match (method, m) {
            (RankMethod::Escalated, _) | (_, RankMethod::Escalated) => RankMethod::Escalated,
            (RankMethod::Rational, _) | (_, RankMethod::Rational) => RankMethod::Rational,
            _ => RankMethod::Modular,
        };
    }
    Ok((SuperDim::new(ranks[0], ranks[1]), method))
}

pub(crate) fn block_rank(
    cx: &CeComplex,
    src: &ComplexSlice,
    tgt: &ComplexSlice,
    policy: &PrimePolicy,
) -> Result<(usize, RankMethod)> {
    let mut modular = Vec::new();
    for p in policy.primes() {
        let field = PrimeField::new(p)?;
        let cols = cx.differential_mod_p(&field, src, tgt)?;
        modular.push(rank_mod_p(cols, tgt.len(), &field));
    }
    let agree = modular.windows(2).all(|w| w[0] == w[1]);
    if !policy.verify_rational && agree && !modular.is_empty() {
        return Ok((modular[0], RankMethod::Modular));
    }
    let exact = rank_exact(&cx.differential_matrix(src, tgt)?);
    if modular.iter().any(|&r| r > exact) {
        return Err(Error::Mismatch(format!(
            "modular rank {modular:?} exceeds rational rank {exact}"
        )));
    }
    let method = if agree {
        RankMethod::Rational
    } else {
        RankMethod::Escalated
    };
    Ok((exact, method))
}

/// Whether `c`, supported on `tgt`, is `D` of a cochain on `src`, decided
/// modulo each prime of `policy`; `None` if the primes disagree.
pub(crate) fn coboundary_mod_p(
    cx: &CeComplex,
    src: &ComplexSlice,
    tgt: &ComplexSlice,
    c: &Cochain,
    policy: &PrimePolicy,
) -> Result<Option<bool>> {
    let v = c
        .to_vector(tgt)
        .ok_or_else(|| Error::SliceMismatch("cochain leaves the target slice".into()))?;
    let mut answers = Vec::new();
    for p in policy.primes() {
        let field = PrimeField::new(p)?;
        let cols = cx.differential_mod_p(&field, src, tgt)?;
        let mut w = v
            .iter()
            .map(|(i, x)| Ok((*i as u32, field.from_q(x)?)))
            .collect::<Result<Vec<_>>>()?;
        w.sort_by_key(|e| e.0);
        answers.push(in_span_mod_p(cols, w, tgt.len(), &field));
    }
    let agree = !answers.is_empty() && answers.windows(2).all(|w| w[0] == w[1]);
    Ok(agree.then(|| answers[0]))
}

/// Weight filter used for the computation.
fn weight_filter(g: &SuperAlgebra, opts: &CohomologyOptions) -> Option<Vec<i32>> {
    if opts.full_weight || (g.torus().is_none() && g.weight_rank() > 0) {
        None
    } else {
        Some(vec![0; g.weight_rank()])
    }
}

/// Degrees in which some `C^k`, `k <= k_max`, can be nonzero.
fn degree_range(cx: &CeComplex, k_max: usize) -> (i64, i64) {
    let g = cx.algebra();
    let degs: Vec<i64> = g.basis().iter().map(|b| b.degree as i64).collect();
    let (lo, hi) = (
        *degs.iter().min().unwrap_or(&0),
        *degs.iter().max().unwrap_or(&0),
    );
    let (vlo, vhi) = if cx.coefficients().has_value() {
        (lo, hi)
    } else {
        (0, 0)
    };
    let k = k_max as i64;
    (vlo - k * hi.max(0), vhi - k * lo.min(0))
}

struct CellResult {
    degree: i64,
    k: usize,
    cochains: SuperDim,
    outcome: std::result::Result<(SuperDim, RankMethod), String>,
    /// Computed in this run (not taken from the cache).
    fresh: bool,
}

pub use rayon::ThreadPool;

/// A dedicated worker pool with `n` threads.
pub fn thread_pool(n: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build()
        .map_err(|e| Error::Mismatch(e.to_string()))
}

/// Runs the computation described by `opts`.
pub fn cohomology(
    g: &SuperAlgebra,
    coeff: CoefficientSpec,
    opts: &CohomologyOptions,
) -> Result<CohomologyReport> {
    match opts.workers {
        Some(n) => thread_pool(n)?.install(|| cohomology_inner(g, coeff, opts)),
        None => cohomology_inner(g, coeff, opts),
    }
}

fn cohomology_inner(
    g: &SuperAlgebra,
    coeff: CoefficientSpec,
    opts: &CohomologyOptions,
) -> Result<CohomologyReport> {
    let cx = CeComplex::new(g, coeff)?;
    let weight = weight_filter(g, opts);
    let (dlo, dhi) = opts
        .degree_window
        .unwrap_or_else(|| degree_range(&cx, opts.k_max));
    let budget = opts.slice_budget.unwrap_or(usize::MAX);
    let cache = match &opts.cache_dir {
        Some(dir) => Some(cache::SliceCache::open(dir, g, coeff, &opts.primes)?),
        None => None,
    };
    let jobs: Vec<(i64, usize)> = (dlo..=dhi)
        .flat_map(|d| (0..=opts.k_max).map(move |k| (d, k)))
        .collect();
    info!(
        "{}: {} cells, weight filter {:?}",
        g.name(),
        jobs.len(),
        weight
    );

    let results: Vec<CellResult> = jobs
        .par_iter()
        .map(|&(degree, k)| -> Result<CellResult> {
            let w = weight.as_deref();
            if let Some(hit) = cache.as_ref().and_then(|c| c.get(k, degree, w)) {
                return Ok(CellResult {
                    degree,
                    k,
                    cochains: hit.cochains,
                    outcome: Ok((hit.rank, hit.method)),
                    fresh: false,
                });
            }
            let started = std::time::Instant::now();
            let src = cx.enumerate_slice_capped(k, Some(degree), w, budget);
            let tgt = cx.enumerate_slice_capped(k + 1, Some(degree), w, budget);
            let (src, tgt) = match (src, tgt) {
                (Ok(s), Ok(t)) => (s, t),
                (s, _) => {
                    let cochains = s.map(|s| parity_dims(&cx, &s)).unwrap_or_default();
                    return Ok(CellResult {
                        degree,
                        k,
                        cochains,
                        outcome: Err("slice over budget".into()),
                        fresh: false,
                    });
                }
            };
            let cochains = parity_dims(&cx, &src);
            let rank = slice_rank(&cx, &src, &tgt, &opts.primes)?;
            debug!(
                "deg {degree} k {k}: {} -> {} rank {:?} in {:.2?}",
                src.len(),
                tgt.len(),
                rank.0,
                started.elapsed()
            );
            Ok(CellResult {
                degree,
                k,
                cochains,
                outcome: Ok(rank),
                fresh: true,
            })
        })
        .collect::<Result<_>>()?;

    if let Some(c) = &cache {
        for r in results.iter().filter(|r| r.fresh) {
            if let Ok((rank, method)) = r.outcome {
                c.put(
                    r.k,
                    r.degree,
                    weight.as_deref(),
                    &cache::CachedSlice {
                        cochains: r.cochains,
                        rank,
                        method,
                    },
                )?;
            }
        }
    }
    let by_cell: BTreeMap<(i64, usize), &CellResult> =
        results.iter().map(|r| ((r.degree, r.k), r)).collect();
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    let mut slices = Vec::new();
    for d in dlo..=dhi {
        for k in 0..=opts.k_max {
            let cur = by_cell[&(d, k)];
            if let Ok((rank, method)) = &cur.outcome {
                slices.push(SliceStats {
                    k,
                    degree: d,
                    cochains: cur.cochains,
                    rank: *rank,
                    method: method.name().into(),
                });
            }
            let prev = if k == 0 {
                Ok(SuperDim::default())
            } else {
                by_cell[&(d, k - 1)].outcome.clone().map(|r| r.0)
            };
            match (&cur.outcome, prev) {
                (Ok((rank, _)), Ok(prev)) => {
                    let h = |c: usize, r: usize, p: usize| -> Result<usize> {
                        c.checked_sub(r + p).ok_or_else(|| {
                            Error::Mismatch(format!("negative cohomology at k={k}, degree={d}"))
                        })
                    };
                    let plain = SuperDim::new(
                        h(cur.cochains.even, rank.even, prev.even)?,
                        h(cur.cochains.odd, rank.odd, prev.odd)?,
                    );
                    let dim = opts.convention.apply(k, plain);
                    entries.push(Entry {
                        k,
                        k_minus_1: k as i64 - 1,
                        degree: d,
                        even: dim.even,
                        odd: dim.odd,
                    });
                }
                (Err(reason), _) => {
                    skipped.push(Skipped {
                        k,
                        degree: d,
                        reason: reason.clone(),
                    });
                }
                (_, Err(reason)) => {
                    skipped.push(Skipped {
                        k,
                        degree: d,
                        reason: format!("d_{} {reason}", k - 1),
                    });
                }
            }
        }
    }

    let mut report = CohomologyReport {
        algebra: g.name().to_string(),
        coefficients: coeff,
        convention: opts.convention,
        entries,
        skipped,
        unverified: Vec::new(),
        parity_unverified: Vec::new(),
        window: Some(Window {
            k: (0..=opts.k_max).collect(),
            degrees: (dlo..=dhi).collect(),
        }),
        slices,
        representatives: Vec::new(),
    };
    if opts.representatives {
        let cells: Vec<(usize, i64)> = report
            .entries
            .iter()
            .filter(|e| e.even + e.odd > 0)
            .map(|e| (e.k, e.degree))
            .collect();
        let sets: Vec<Option<RepresentativeSet>> = cells
            .par_iter()
            .map(|&(k, d)| -> Result<Option<RepresentativeSet>> {
                match representatives_in(&cx, k, d, weight.as_deref(), opts.representative_budget)?
                {
                    Some(reps) => Ok(Some(RepresentativeSet {
                        k,
                        degree: d,
                        cochains: reps.iter().map(|c| cx.display_cochain(c)).collect(),
                    })),
                    None => Ok(None),
                }
            })
            .collect::<Result<_>>()?;
        report.representatives = sets.into_iter().flatten().collect();
    }
    Ok(report)
}

fn parity_dims(cx: &CeComplex, s: &ComplexSlice) -> SuperDim {
    let odd = s.basis.iter().filter(|m| cx.parity_of(m).is_odd()).count();
    SuperDim::new(s.len() - odd, odd)
}

/// Cocycles spanning `H^k` in one degree (and weight filter), reduced
/// modulo coboundaries and echelon-normalized. `None` if over `budget`.
pub fn representatives_in(
    cx: &CeComplex,
    k: usize,
    degree: i64,
    weight: Option<&[i32]>,
    budget: usize,
) -> Result<Option<Vec<Cochain>>> {
    let Ok(cur) = cx.enumerate_slice_capped(k, Some(degree), weight, budget) else {
        return Ok(None);
    };
    let Ok(next) = cx.enumerate_slice_capped(k + 1, Some(degree), weight, budget) else {
        return Ok(None);
    };
    let classes = ClassSpace::build(cx, &cur, &next, k, degree, weight, budget)?;
    Ok(classes.map(|c| {
        c.representatives
            .iter()
            .map(|v| Cochain::from_vector(&c.slice, v))
            .collect()
    }))
}

/// Cohomology of one slice with explicit representatives and the
/// coboundary space, for reducing cocycles to classes.
pub struct ClassSpace {
    pub k: usize,
    pub degree: i64,
    pub slice: ComplexSlice,
    /// Echelon basis of the coboundaries `D(C^{k-1})`.
    pub coboundaries: Echelon,
    /// Echelon representatives, each reduced modulo the coboundaries.
    pub representatives: Vec<SparseVec>,
    /// Representatives in echelon form, for solving.
    rep_echelon: Echelon,
}

impl ClassSpace {
    /// Builds the space on `cur = C^k`, with `next = C^{k+1}`.
    pub fn build(
        cx: &CeComplex,
        cur: &ComplexSlice,
        next: &ComplexSlice,
        k: usize,
        degree: i64,
        weight: Option<&[i32]>,
        budget: usize,
    ) -> Result<Option<ClassSpace>> {
        let prev = if k > 0 {
            let Ok(prev) = cx.enumerate_slice_capped(k - 1, Some(degree), weight, budget) else {
                return Ok(None);
            };
            Some(prev)
        } else {
            None
        };
        ClassSpace::from_slices(cx, prev.as_ref(), cur, next, degree).map(Some)
    }

    /// As [`Self::build`] with all three slices given, e.g. restricted to
    /// one parity.
    pub fn from_slices(
        cx: &CeComplex,
        prev: Option<&ComplexSlice>,
        cur: &ComplexSlice,
        next: &ComplexSlice,
        degree: i64,
    ) -> Result<ClassSpace> {
        let mut coboundaries = Echelon::new();
        if let Some(prev) = prev {
            let d_prev = cx.differential_matrix(prev, cur)?;
            coboundaries = Echelon::column_space(&d_prev);
        }
        let d = cx.differential_matrix(cur, next)?;
        let kernel = kernel_basis(&d);
        let mut reps = Echelon::new();
        for v in kernel.vectors {
            let r = coboundaries.reduce(&v);
            if !r.is_empty() {
                reps.insert(r);
            }
        }
        let representatives: Vec<SparseVec> = reps.rows().map(|(_, v)| v.clone()).collect();
        Ok(ClassSpace {
            k: cur.k,
            degree,
            slice: cur.clone(),
            coboundaries,
            representatives,
            rep_echelon: reps,
        })
    }

    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    /// Coordinates of the class of a cocycle in the representative basis;
    /// `None` if the vector is not a cocycle class of this space (it has a
    /// component outside cocycles).
    pub fn class_of(&self, v: &SparseVec) -> Option<Vec<(usize, crate::linalg::Q)>> {
        let r = self.coboundaries.reduce(v);
        let coords = self.rep_echelon.coordinates(&r)?;
        // Pivot rows of `rep_echelon` are the representatives in order.
        let pivots: Vec<usize> = self.rep_echelon.pivots().collect();
        Some(
            coords
                .into_iter()
                .map(|(p, x)| (pivots.iter().position(|&q| q == p).expect("pivot"), x))
                .collect(),
        )
    }
}

/// Truncated Euler characteristic check: per degree whose slices cover
/// `k = 0..=K`, `Σ (-1)^k dim C^k = Σ (-1)^k dim H^k + (-1)^K rank d_K`.
/// Returns the degrees where it fails.
pub fn euler_defects(report: &CohomologyReport) -> Vec<i64> {
    let mut bad = Vec::new();
    let mut degs: Vec<i64> = report.slices.iter().map(|s| s.degree).collect();
    degs.sort();
    degs.dedup();
    for d in degs {
        let mut slices: Vec<&SliceStats> = report.slices.iter().filter(|s| s.degree == d).collect();
        slices.sort_by_key(|s| s.k);
        if slices.iter().enumerate().any(|(i, s)| s.k != i) {
            continue;
        }
        let sign = |k: usize| if k.is_multiple_of(2) { 1i64 } else { -1 };
        let mut chi_c = 0i64;
        let mut chi_h = 0i64;
        for s in &slices {
            chi_c += sign(s.k) * s.cochains.total() as i64;
            chi_h += sign(s.k) * report.get(s.k, d).map_or(0, |e| e.total()) as i64;
        }
        let top = slices.last().expect("nonempty");
        if chi_c != chi_h + sign(top.k) * top.rank.total() as i64 {
            bad.push(d);
        }
    }
    bad
}
