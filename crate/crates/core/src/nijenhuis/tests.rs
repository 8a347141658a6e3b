use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebra::build_algebra;
use crate::cohomology::ClassSpace;

fn build(s: &str) -> SuperAlgebra {
    build_algebra(&s.parse().unwrap()).unwrap()
}

/// Random homogeneous cochain with up to `terms` monomials of `C^k`.
fn random_cochain(nij: &Nijenhuis, rng: &mut ChaCha8Rng, k: usize, terms: usize) -> ShiftedCochain {
    let all = nij.complex().enumerate_slice(k, None, None).basis;
    let parity = Parity::from_bit(rng.gen_range(0..2));
    let pool: Vec<&CochainMonomial> = all.iter().filter(|m| nij.parity_of(m) == parity).collect();
    let pool = if pool.is_empty() {
        all.iter().collect()
    } else {
        pool
    };
    let mut t = Vec::new();
    for _ in 0..rng.gen_range(1..=terms) {
        let m = pool[rng.gen_range(0..pool.len())].clone();
        t.push((
            m,
            qi(rng.gen_range(1..4) * if rng.gen_bool(0.5) { 1 } else { -1 }),
        ));
    }
    nij.shift(Cochain::from_terms(k, t)).unwrap()
}

fn e(nij: &Nijenhuis, value: u16, duals: &[u16]) -> ShiftedCochain {
    nij.monomial(CochainMonomial::new(Some(value), duals))
        .unwrap()
}

#[test]
fn dot_on_elements_is_empty() {
    let g = build("sl2");
    let nij = Nijenhuis::new(&g).unwrap();
    let (a, b) = (e(&nij, 0, &[]), e(&nij, 1, &[]));
    assert!(nij.dot(&a, &b).is_zero());
}

#[test]
fn dot_of_one_cochain_with_element_applies_it() {
    // A = ad(x) as a 1-cochain; A·y = [x, y].
    let g = build("sl2");
    let nij = Nijenhuis::new(&g).unwrap();
    let n = g.dim();
    for x in 0..n {
        let terms: Vec<(CochainMonomial, Q)> = (0..n)
            .flat_map(|y| {
                g.bracket_basis(x, y).iter().map(move |(j, c)| {
                    (
                        CochainMonomial::new(Some(*j as u16), &[y as u16]),
                        c.clone(),
                    )
                })
            })
            .collect();
        let a = nij.shift(Cochain::from_terms(1, terms)).unwrap();
        for y in 0..n {
            let b = e(&nij, y as u16, &[]);
            let got = nij.dot(&a, &b).underlying;
            let want = Cochain::from_terms(
                0,
                g.bracket_basis(x, y)
                    .iter()
                    .map(|(j, c)| (CochainMonomial::new(Some(*j as u16), &[]), c.clone()))
                    .collect(),
            );
            assert_eq!(got, want);
        }
    }
}

/// Value of an even-algebra cochain on a tuple of basis vectors.
fn evaluate(c: &Cochain, n: usize, xs: &[usize]) -> Vec<Q> {
    let mut out = vec![qi(0); n];
    for (m, x) in &c.terms {
        let mut sorted: Vec<usize> = xs.to_vec();
        sorted.sort();
        let duals: Vec<usize> = m.duals.iter().map(|&i| i as usize).collect();
        if sorted != duals {
            continue;
        }
        // Sign of the permutation taking `duals` to `xs`.
        let inv = (0..xs.len())
            .flat_map(|i| (i + 1..xs.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| xs[i] > xs[j])
            .count();
        let s = if inv % 2 == 0 { 1 } else { -1 };
        out[m.value.unwrap() as usize] += x * qi(s);
    }
    out
}

/// `Σ_σ sgn(σ) A(B(x_σ(1..q)), x_σ(q+1..))` over shuffles.
fn insertion_oracle(a: &Cochain, b: &Cochain, n: usize, xs: &[usize]) -> Vec<Q> {
    let q = b.k;
    let len = xs.len();
    let mut out = vec![qi(0); n];
    for mask in 0u32..(1 << len) {
        if mask.count_ones() as usize != q {
            continue;
        }
        let s: Vec<usize> = (0..len).filter(|i| mask & (1 << i) != 0).collect();
        let rest: Vec<usize> = (0..len).filter(|i| mask & (1 << i) == 0).collect();
        let inv = s
            .iter()
            .map(|&i| rest.iter().filter(|&&j| j < i).count())
            .sum::<usize>();
        let sign = if inv % 2 == 0 { 1 } else { -1 };
        let bx = evaluate(b, n, &s.iter().map(|&i| xs[i]).collect::<Vec<_>>());
        for (beta, coef) in bx.iter().enumerate() {
            if coef.is_zero() {
                continue;
            }
            let mut args = vec![beta];
            args.extend(rest.iter().map(|&i| xs[i]));
            for (v, y) in evaluate(a, n, &args).into_iter().enumerate() {
                out[v] += coef * y * qi(sign);
            }
        }
    }
    out
}

fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    if len == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for t in tuples(n, len - 1) {
        for x in 0..n {
            if !t.contains(&x) {
                let mut u = t.clone();
                u.push(x);
                out.push(u);
            }
        }
    }
    out
}

#[test]
fn sl2_dot_matches_insertion_oracle() {
    let g = build("sl2");
    let nij = Nijenhuis::new(&g).unwrap();
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut samples: Vec<ShiftedCochain> = Vec::new();
    // Coboundaries of elements, i.e. inner derivations.
    for b in 0..n {
        samples.push(nij.differential(&e(&nij, b as u16, &[])).unwrap());
    }
    for k in 0..=2 {
        for _ in 0..4 {
            samples.push(random_cochain(&nij, &mut rng, k, 4));
        }
    }
    for a in &samples {
        for b in &samples {
            let len = (a.underlying.k + b.underlying.k).saturating_sub(1);
            if a.underlying.k == 0 || len > n {
                continue;
            }
            let dot = nij.dot(a, b).underlying;
            for xs in tuples(n, len) {
                assert_eq!(
                    evaluate(&dot, n, &xs),
                    insertion_oracle(&a.underlying, &b.underlying, n, &xs)
                );
            }
            // The bracket against the oracle's commutator.
            let br = nij.bracket(a, b).underlying;
            let s = qi(a.parity.sign_with(b.parity));
            for xs in tuples(n, len) {
                let mut want = insertion_oracle(&a.underlying, &b.underlying, n, &xs);
                for (w, y) in
                    want.iter_mut()
                        .zip(insertion_oracle(&b.underlying, &a.underlying, n, &xs))
                {
                    *w -= &s * y;
                }
                assert_eq!(evaluate(&br, n, &xs), want);
            }
        }
    }
}

#[test]
fn even_self_bracket_vanishes() {
    let g = build("psl22");
    let nij = Nijenhuis::new(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut seen = 0;
    while seen < 20 {
        let a = {
            let k = rng.gen_range(0..3);
            random_cochain(&nij, &mut rng, k, 5)
        };
        if a.parity == Parity::Even {
            assert!(nij.bracket(&a, &a).is_zero());
            seen += 1;
        }
    }
}

#[test]
fn grading_cochain_acts_by_degree() {
    let g = build("po0n:4");
    let nij = Nijenhuis::new(&g).unwrap();
    let grading = nij.grading_cochain();
    assert_eq!(grading.parity, Parity::Even);
    for k in 0..=2 {
        for m in nij.complex().enumerate_slice(k, None, None).basis {
            let deg = nij.complex().degree_of(&m);
            let x = nij.monomial(m).unwrap();
            assert_eq!(nij.bracket(&grading, &x), x.scale(&qi(deg)));
        }
    }
}

#[test]
fn grading_cochain_is_a_cocycle() {
    for s in ["po0n:4", "vect0n:2", "svect0n:3"] {
        let g = build(s);
        let nij = Nijenhuis::new(&g).unwrap();
        assert!(
            nij.differential(&nij.grading_cochain()).unwrap().is_zero(),
            "{s}"
        );
    }
}

#[test]
fn leibniz_on_all_sl2_basis_pairs() {
    let g = build("sl2");
    let nij = Nijenhuis::new(&g).unwrap();
    let mut basis = Vec::new();
    for k in 0..=2 {
        for m in nij.complex().enumerate_slice(k, None, None).basis {
            basis.push(nij.monomial(m).unwrap());
        }
    }
    let samples: Vec<_> = basis
        .iter()
        .flat_map(|a| basis.iter().map(move |b| (a.clone(), b.clone())))
        .collect();
    assert!(nij.check_leibniz(&samples).unwrap().is_empty());
}

#[test]
fn dropping_the_koszul_sign_breaks_leibniz() {
    let g = build("psl22");
    let nij = Nijenhuis::new(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut broken = 0;
    for _ in 0..30 {
        let a = {
            let k = rng.gen_range(1..3);
            random_cochain(&nij, &mut rng, k, 3)
        };
        let b = {
            let k = rng.gen_range(1..3);
            random_cochain(&nij, &mut rng, k, 3)
        };
        assert!(nij.leibniz_defect(&a, &b).unwrap().is_zero());
        if !nij.leibniz_defect_signed(&a, &b, false).unwrap().is_zero() {
            broken += 1;
        }
    }
    assert!(broken > 0);
}

#[test]
fn shift_rejects_mixed_parity_and_trivial_values() {
    let g = build("sl:2,1");
    let nij = Nijenhuis::new(&g).unwrap();
    let even = g.basis().iter().position(|b| !b.parity.is_odd()).unwrap() as u16;
    let odd = g.basis().iter().position(|b| b.parity.is_odd()).unwrap() as u16;
    let mixed = Cochain::from_terms(
        0,
        vec![
            (CochainMonomial::new(Some(even), &[]), qi(1)),
            (CochainMonomial::new(Some(odd), &[]), qi(1)),
        ],
    );
    assert!(nij.shift(mixed).is_err());
    let trivial = Cochain::from_terms(1, vec![(CochainMonomial::new(None, &[even]), qi(1))]);
    assert!(nij.shift(trivial).is_err());
}

/// Classes of `H^k` in a degree, within the zero-weight slice.
fn classes(nij: &Nijenhuis, k: usize, degree: i64) -> ClassSpace {
    let cx = nij.complex();
    let w = vec![0; cx.algebra().weight_rank()];
    let cur = cx.enumerate_slice(k, Some(degree), Some(&w));
    let next = cx.enumerate_slice(k + 1, Some(degree), Some(&w));
    ClassSpace::build(cx, &cur, &next, k, degree, Some(&w), usize::MAX)
        .unwrap()
        .unwrap()
}

fn trivial_dual(g: &SuperAlgebra, name: &str) -> Cochain {
    let i = g.index_of(name).unwrap() as u16;
    Cochain::from_terms(1, vec![(CochainMonomial::new(None, &[i]), qi(1))])
}

#[test]
fn wedge_by_unit_is_identity() {
    let g = build("po0n:3");
    let nij = Nijenhuis::new(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let one = Cochain::from_terms(0, vec![(CochainMonomial::new(None, &[]), qi(1))]);
    for _ in 0..10 {
        let c = {
            let k = rng.gen_range(0..3);
            random_cochain(&nij, &mut rng, k, 4)
        };
        assert_eq!(nij.wedge(&c.underlying, &one).unwrap(), c.underlying);
    }
}

#[test]
fn wedge_is_compatible_with_the_differential() {
    let g = build("po0n:3");
    let nij = Nijenhuis::new(&g).unwrap();
    let trivial = CeComplex::new(&g, CoefficientSpec::Trivial).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..40 {
        let c = {
            let k = rng.gen_range(0..3);
            random_cochain(&nij, &mut rng, k, 3)
        };
        let kw = rng.gen_range(0..3);
        let pool = trivial.enumerate_slice(kw, None, None).basis;
        let m = pool[rng.gen_range(0..pool.len())].clone();
        let w = Cochain::from_terms(kw, vec![(m, qi(1))]);
        assert!(nij.wedge_leibniz_defect(&c, &w).unwrap().is_zero());
    }
}

#[test]
fn wedge_rejects_adjoint_second_factor() {
    let g = build("sl2");
    let nij = Nijenhuis::new(&g).unwrap();
    let c = e(&nij, 0, &[]);
    assert!(nij.wedge(&c.underlying, &c.underlying).is_err());
}

fn top_name(n: usize) -> String {
    let gens: Vec<String> = match n {
        3 => vec!["x1".into(), "y1".into(), "z".into()],
        4 => vec!["x1".into(), "y1".into(), "x2".into(), "y2".into()],
        _ => unreachable!(),
    };
    format!("K({})", gens.concat())
}

#[test]
fn po3_unit_wedged_by_top_dual_is_a_class() {
    let g = build("po0n:3");
    let nij = Nijenhuis::new(&g).unwrap();
    let trivial = CeComplex::new(&g, CoefficientSpec::Trivial).unwrap();
    let w = trivial_dual(&g, &top_name(3));
    assert!(trivial.apply(&w).unwrap().is_zero());
    let unit = nij
        .monomial(CochainMonomial::new(
            Some(g.index_of("K(1)").unwrap() as u16),
            &[],
        ))
        .unwrap();
    let mut power = Cochain::from_terms(0, vec![(CochainMonomial::new(None, &[]), qi(1))]);
    for m in 1..=2 {
        power = {
            let mut terms = Vec::new();
            for (a, x) in &power.terms {
                for (b, y) in &w.terms {
                    let (neg, d) = nij.complex().ghosts().mul(&a.duals, &b.duals).unwrap();
                    terms.push((
                        CochainMonomial {
                            value: None,
                            duals: d,
                        },
                        if neg { -(x * y) } else { x * y },
                    ));
                }
            }
            Cochain::from_terms(m, terms)
        };
        let c = nij.wedge(&unit.underlying, &power).unwrap();
        let degree = nij.complex().degree_of(&c.terms[0].0);
        assert!(nij.complex().apply(&c).unwrap().is_zero());
        let space = classes(&nij, m, degree);
        let coords = space.class_of(&c.to_vector(&space.slice).unwrap()).unwrap();
        assert!(coords.iter().any(|(_, x)| !x.is_zero()), "power {m}");
    }
}

#[test]
fn po4_square_of_top_dual_vanishes() {
    let g = build("po0n:4");
    let nij = Nijenhuis::new(&g).unwrap();
    let w = trivial_dual(&g, &top_name(4));
    let sq = nij
        .complex()
        .ghosts()
        .mul(&w.terms[0].0.duals, &w.terms[0].0.duals);
    assert!(sq.is_none());
    // The first power still gives a class.
    let unit = Cochain::from_terms(
        0,
        vec![(
            CochainMonomial::new(Some(g.index_of("K(1)").unwrap() as u16), &[]),
            qi(1),
        )],
    );
    let c = nij.wedge(&unit, &w).unwrap();
    let degree = nij.complex().degree_of(&c.terms[0].0);
    let space = classes(&nij, 1, degree);
    let coords = space.class_of(&c.to_vector(&space.slice).unwrap()).unwrap();
    assert!(coords.iter().any(|(_, x)| !x.is_zero()));
}

#[test]
fn brackets_of_cocycles_and_coboundaries() {
    let g = build("po0n:4");
    let nij = Nijenhuis::new(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut cocycles: Vec<ShiftedCochain> = Vec::new();
    for (k, d) in [(0, -2), (1, 0), (1, -2), (2, -4), (2, -2)] {
        let s = classes(&nij, k, d);
        for v in &s.representatives {
            cocycles.push(nij.shift(Cochain::from_vector(&s.slice, v)).unwrap());
        }
    }
    assert!(cocycles.len() >= 4);
    for a in &cocycles {
        for b in &cocycles {
            let c = nij.bracket(a, b);
            assert!(nij.differential(&c).unwrap().is_zero());
        }
        // Bracket with a coboundary is the coboundary of a bracket.
        for _ in 0..3 {
            let y = {
                let k = rng.gen_range(0..2);
                random_cochain(&nij, &mut rng, k, 3)
            };
            let dy = nij.differential(&y).unwrap();
            let c = nij.bracket(a, &dy);
            let sign = if a.parity.is_odd() { -1 } else { 1 };
            let primitive = nij.bracket(a, &y).scale(&qi(sign));
            assert!(nij.differential(&primitive).unwrap().sub(&c).is_zero());
        }
    }
}

#[test]
fn degrees_add() {
    let g = build("po0n:4");
    let nij = Nijenhuis::new(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..40 {
        let a = {
            let k = rng.gen_range(0..3);
            random_cochain(&nij, &mut rng, k, 1)
        };
        let b = {
            let k = rng.gen_range(0..3);
            random_cochain(&nij, &mut rng, k, 1)
        };
        let c = nij.bracket(&a, &b);
        if c.is_zero() {
            continue;
        }
        assert_eq!(c.l_degree(), a.l_degree() + b.l_degree());
        let deg = |x: &ShiftedCochain| nij.complex().degree_of(&x.underlying.terms[0].0);
        for (m, _) in &c.underlying.terms {
            assert_eq!(nij.complex().degree_of(m), deg(&a) + deg(&b));
            assert_eq!(nij.parity_of(m), a.parity + b.parity);
        }
    }
}

fn sampled_laws(spec: &str, seed: u64, k_max: usize) {
    let g = build(spec);
    let nij = Nijenhuis::new(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng| {
        let k = rng.gen_range(0..=k_max);
        random_cochain(&nij, rng, k, 3)
    };
    let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
    let s = qi(a.parity.sign_with(b.parity));
    assert!(
        nij.bracket(&a, &b)
            .add(&nij.bracket(&b, &a).scale(&s))
            .is_zero(),
        "{spec}: antisymmetry"
    );
    assert!(nij.jacobi_defect(&a, &b, &c).is_zero(), "{spec}: Jacobi");
    assert!(
        nij.leibniz_defect(&a, &b).unwrap().is_zero(),
        "{spec}: Leibniz"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn laws_hold_on_sl2(seed in any::<u64>()) {
        sampled_laws("sl2", seed, 3);
    }

    #[test]
    fn laws_hold_on_psl22(seed in any::<u64>()) {
        sampled_laws("psl22", seed, 2);
    }

    #[test]
    fn laws_hold_on_po4(seed in any::<u64>()) {
        sampled_laws("po0n:4", seed, 2);
    }

    #[test]
    fn laws_hold_on_sl21(seed in any::<u64>()) {
        sampled_laws("sl:2,1", seed, 2);
    }

    #[test]
    fn leibniz_on_psl22_up_to_three(seed in any::<u64>()) {
        let g = build("psl22");
        let nij = Nijenhuis::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = { let k = rng.gen_range(0..=3); random_cochain(&nij, &mut rng, k, 3) };
        let b = { let k = rng.gen_range(0..=3); random_cochain(&nij, &mut rng, k, 3) };
        prop_assert!(nij.leibniz_defect(&a, &b).unwrap().is_zero());
    }
}

#[test]
fn po4_table_round_trips_and_grading_acts_diagonally() {
    let g = build("po0n:4");
    let req = BracketRequest::new(vec![(0, -2), (1, 0), (1, -2), (2, -4)]);
    let t = bracket_table(&g, &req).unwrap();
    assert!(t.missing.is_empty());
    assert_eq!(BracketTable::from_json(&t.to_json()).unwrap(), t);
    // The grading class acts on every class by its degree.
    let grading = t.label(1, 0);
    assert_eq!(grading.len(), 1);
    for (i, l) in t.labels.iter().enumerate() {
        if let Some(p) = t.product(grading[0], i) {
            if l.degree != 0 && p.iter().all(|(j, _)| *j == i) {
                assert_eq!(p.len(), 1, "{}", l.name);
            }
        }
    }
}

#[test]
fn generation_of_a_table_by_itself() {
    let g = build("po0n:4");
    let req = BracketRequest::new(vec![(0, -2), (1, 0)]);
    let t = bracket_table(&g, &req).unwrap();
    let r = generation_report(&t, &[(0, -2), (1, 0)]);
    assert!(r.generated);
    let r = generation_report(&t, &[(1, 0)]);
    assert!(!r.generated);
}
