//! Builders for the explicit families: matrix superalgebras, `D(2,1;alpha)`,
//! vector fields on the odd superspace `C^{0|n}` and the Poisson family.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use super::grassmann::Monomial;
use super::{BasisVector, Parity, SuperAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, normalize_terms, qi, SparseRationalMatrix, SparseVec, Q};

/// Parsed algebra designation, written `family[:param[,param]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraSpec {
    /// `gl(m|n)`.
    Gl(usize, usize),
    /// `sl(m|n)`.
    Sl(usize, usize),
    Psl22,
    /// `osp(4|2; alpha)`, realized as `D(2,1; alpha)`.
    Osp42(Q),
    Vect0n(usize),
    Svect0n(usize),
    Po0n(usize),
    H0n(usize),
    HPrime0n(usize),
    Sl2,
    Sl3,
}

impl AlgebraSpec {
    pub fn family(&self) -> &'static str {
        match self {
            AlgebraSpec::Gl(..) => "gl",
            AlgebraSpec::Sl(..) => "sl",
            AlgebraSpec::Psl22 => "psl22",
            AlgebraSpec::Osp42(_) => "osp42",
            AlgebraSpec::Vect0n(_) => "vect0n",
            AlgebraSpec::Svect0n(_) => "svect0n",
            AlgebraSpec::Po0n(_) => "po0n",
            AlgebraSpec::H0n(_) => "h0n",
            AlgebraSpec::HPrime0n(_) => "hprime0n",
            AlgebraSpec::Sl2 => "sl2",
            AlgebraSpec::Sl3 => "sl3",
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let range = |n: usize, lo: usize, hi: usize| {
            if n < lo || n > hi {
                Err(format!("parameter must lie in {lo}..={hi}"))
            } else {
                Ok(())
            }
        };
        match *self {
            AlgebraSpec::Gl(m, n) => range(m + n, 1, 8),
            AlgebraSpec::Sl(m, n) => range(m + n, 2, 8),
            AlgebraSpec::Vect0n(n) => range(n, 1, 6),
            AlgebraSpec::Svect0n(n) => range(n, 2, 6),
            AlgebraSpec::Po0n(n) | AlgebraSpec::H0n(n) => range(n, 1, 10),
            AlgebraSpec::HPrime0n(n) => range(n, 2, 10),
            _ => Ok(()),
        }
    }

    /// Grading window covering the published tables plus one guard column
    /// on each side; `None` means every degree that occurs.
    pub fn default_degree_window(&self) -> Option<(i64, i64)> {
        match *self {
            AlgebraSpec::Psl22 => Some((-7, 7)),
            AlgebraSpec::Po0n(4) | AlgebraSpec::Po0n(6) => Some((-9, 1)),
            AlgebraSpec::Po0n(5) => Some((-15, 1)),
            AlgebraSpec::H0n(4) => Some((-7, 5)),
            AlgebraSpec::H0n(5) => Some((-11, 3)),
            AlgebraSpec::HPrime0n(5) => Some((-7, 6)),
            _ => None,
        }
    }
}

impl fmt::Display for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraSpec::Gl(m, n) | AlgebraSpec::Sl(m, n) => write!(f, "{}:{m},{n}", self.family()),
            AlgebraSpec::Osp42(a) => write!(f, "osp42:{a}"),
            AlgebraSpec::Vect0n(n)
            | AlgebraSpec::Svect0n(n)
            | AlgebraSpec::Po0n(n)
            | AlgebraSpec::H0n(n)
            | AlgebraSpec::HPrime0n(n) => write!(f, "{}:{n}", self.family()),
            _ => f.write_str(self.family()),
        }
    }
}

impl FromStr for AlgebraSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::InvalidSpec {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let (family, params) = match s.split_once(':') {
            Some((f, p)) => (f, p.split(',').map(str::trim).collect::<Vec<_>>()),
            None => (s, Vec::new()),
        };
        let ints = || -> Result<Vec<usize>> {
            params
                .iter()
                .map(|p| {
                    p.parse::<usize>()
                        .map_err(|_| err("expected integer parameters"))
                })
                .collect()
        };
        let one = || -> Result<usize> {
            match ints()?.as_slice() {
                [n] => Ok(*n),
                _ => Err(err("expected exactly one integer parameter")),
            }
        };
        let two = || -> Result<(usize, usize)> {
            match ints()?.as_slice() {
                [m, n] => Ok((*m, *n)),
                _ => Err(err("expected two integer parameters `m,n`")),
            }
        };
        let none = |spec: AlgebraSpec| -> Result<AlgebraSpec> {
            if params.is_empty() {
                Ok(spec)
            } else {
                Err(err("family takes no parameters"))
            }
        };
        let spec = match family.trim().to_ascii_lowercase().as_str() {
            "gl" => {
                let (m, n) = two()?;
                AlgebraSpec::Gl(m, n)
            }
            "sl" => {
                let (m, n) = two()?;
                AlgebraSpec::Sl(m, n)
            }
            "psl22" => none(AlgebraSpec::Psl22)?,
            "osp42" | "osp_4_2_alpha" | "d21" => {
                let [a] = params.as_slice() else {
                    return Err(err("expected one rational parameter alpha"));
                };
                let alpha: Q = a
                    .parse()
                    .map_err(|_| err("alpha must be a rational `p/q`"))?;
                AlgebraSpec::Osp42(alpha)
            }
            "vect0n" => AlgebraSpec::Vect0n(one()?),
            "svect0n" => AlgebraSpec::Svect0n(one()?),
            "po0n" => AlgebraSpec::Po0n(one()?),
            "h0n" => AlgebraSpec::H0n(one()?),
            "hprime0n" | "h_prime_0n" => AlgebraSpec::HPrime0n(one()?),
            "sl2" => none(AlgebraSpec::Sl2)?,
            "sl3" => none(AlgebraSpec::Sl3)?,
            _ => return Err(err("unknown family")),
        };
        spec.validate().map_err(|r| err(&r))?;
        Ok(spec)
    }
}

/// Builds the algebra with its grading and inner torus.
pub fn build_algebra(spec: &AlgebraSpec) -> Result<SuperAlgebra> {
    spec.validate().map_err(|reason| Error::InvalidSpec {
        spec: spec.to_string(),
        reason,
    })?;
    let mut alg = match spec {
        AlgebraSpec::Gl(m, n) => gl(*m, *n)?,
        AlgebraSpec::Sl(m, n) => sl(*m, *n)?,
        AlgebraSpec::Sl2 => sl(2, 0)?,
        AlgebraSpec::Sl3 => sl(3, 0)?,
        AlgebraSpec::Psl22 => sl(2, 2)?.quotient_by_center()?,
        AlgebraSpec::Osp42(alpha) => osp42(alpha)?,
        AlgebraSpec::Vect0n(n) => vect(*n, false)?,
        AlgebraSpec::Svect0n(n) => svect(*n)?,
        AlgebraSpec::Po0n(n) => po(*n)?,
        AlgebraSpec::H0n(n) => po(*n)?.quotient_by_center()?,
        AlgebraSpec::HPrime0n(n) => po(*n)?.quotient_by_center()?.derived_subalgebra()?,
    };
    alg.set_name(spec.to_string());
    Ok(alg)
}

fn unit(i: usize) -> SparseVec {
    vec![(i, Q::one())]
}

/// Reorders the basis by degree, parity and name and validates.
fn finalize(raw: SuperAlgebra) -> Result<SuperAlgebra> {
    let vectors = raw
        .basis()
        .iter()
        .map(|b| (b.name.clone(), unit(b.index)))
        .collect();
    raw.subalgebra(raw.name(), vectors)
}

fn dense_unit(n: usize, entries: &[(usize, i64)]) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    for &(i, c) in entries {
        v[i] += qi(c);
    }
    v
}

// ---------------------------------------------------------------------------
// Matrix superalgebras.

fn gl(m: usize, n: usize) -> Result<SuperAlgebra> {
    let size = m + n;
    let p = |i: usize| u32::from(i >= m);
    let idx = |i: usize, j: usize| i * size + j;
    let mut basis = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let degree = match (i < m, j < m) {
                (true, false) => 1,
                (false, true) => -1,
                _ => 0,
            };
            basis.push(BasisVector {
                index: idx(i, j),
                name: gl_name(size, i, j),
                parity: Parity::from_bit(p(i) + p(j)),
                degree,
                weight: Vec::new(),
            });
        }
    }
    let mut table = Vec::with_capacity(size.pow(4));
    for i in 0..size {
        for j in 0..size {
            for k in 0..size {
                for l in 0..size {
                    // [E_ij, E_kl] = d_jk E_il - (-1)^{p(ij) p(kl)} d_li E_kj
                    let mut terms = Vec::new();
                    if j == k {
                        terms.push((idx(i, l), qi(1)));
                    }
                    if l == i {
                        let odd = (p(i) + p(j)) % 2 == 1 && (p(k) + p(l)) % 2 == 1;
                        terms.push((idx(k, j), qi(if odd { 1 } else { -1 })));
                    }
                    table.push(normalize_terms(terms));
                }
            }
        }
    }
    let mut raw = SuperAlgebra::unchecked(format!("gl:{m},{n}"), basis, table)?;
    let torus = (0..size)
        .map(|i| dense_unit(size * size, &[(idx(i, i), 1)]))
        .collect();
    raw.assign_weights(torus)?;
    finalize(raw)
}

fn sl(m: usize, n: usize) -> Result<SuperAlgebra> {
    let size = m + n;
    let mut g = gl(m, n)?;
    g.clear_weights();
    let at = |i: usize, j: usize| g.index_of(&gl_name(size, i, j)).expect("gl basis");
    let p = |i: usize| i >= m;
    let mut vectors = Vec::new();
    let mut cartan = Vec::new();
    for i in 0..size {
        for j in 0..size {
            if i != j {
                vectors.push((gl_name(size, i, j), unit(at(i, j))));
            }
        }
    }
    for i in 0..size - 1 {
        // Supertrace zero: E_ii - (-1)^{p_i + p_{i+1}} E_{i+1,i+1}.
        let c = if p(i) == p(i + 1) { -1 } else { 1 };
        let v = normalize_terms(vec![(at(i, i), qi(1)), (at(i + 1, i + 1), qi(c))]);
        cartan.push(v.clone());
        vectors.push((format!("H{}", i + 1), v));
    }
    let mut s = g.subalgebra(&format!("sl:{m},{n}"), vectors)?;
    let torus = cartan
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let k = s.index_of(&format!("H{}", i + 1)).unwrap();
            dense_unit(s.dim(), &[(k, 1)])
        })
        .collect();
    s.assign_weights(torus)?;
    Ok(s)
}

fn gl_name(size: usize, i: usize, j: usize) -> String {
    if size <= 9 {
        format!("E{}{}", i + 1, j + 1)
    } else {
        format!("E{},{}", i + 1, j + 1)
    }
}

// ---------------------------------------------------------------------------
// D(2,1; alpha): three copies of sl(2) acting on V1 (x) V2 (x) V3.

fn osp42(alpha: &Q) -> Result<SuperAlgebra> {
    let sigma = [Q::one(), alpha.clone(), -(Q::one() + alpha)];
    // Even: copy c has e = 3c, h = 3c + 1, f = 3c + 2. Odd: 9 + bits, bit
    // c set meaning the minus vector in slot c.
    let even = |c: usize, which: usize| 3 * c + which;
    let odd = |s: [bool; 3]| {
        9 + s
            .iter()
            .enumerate()
            .map(|(c, &minus)| usize::from(minus) << c)
            .sum::<usize>()
    };
    let slots = |i: usize| -> [bool; 3] {
        let b = i - 9;
        [b & 1 != 0, b & 2 != 0, b & 4 != 0]
    };
    let n = 17;
    let mut basis = Vec::with_capacity(n);
    for c in 0..3 {
        for (which, label) in ["e", "h", "f"].iter().enumerate() {
            basis.push(BasisVector {
                index: even(c, which),
                name: format!("{label}{}", c + 1),
                parity: Parity::Even,
                degree: 0,
                weight: Vec::new(),
            });
        }
    }
    for i in 9..17 {
        let s = slots(i);
        let name: String = std::iter::once('v')
            .chain(s.iter().map(|&m| if m { '-' } else { '+' }))
            .collect();
        basis.push(BasisVector {
            index: i,
            name,
            parity: Parity::Odd,
            degree: 0,
            weight: Vec::new(),
        });
    }
    // sl(2) action on the 2-dim module, vectors indexed by `minus`.
    let act = |which: usize, minus: bool| -> Option<(i64, bool)> {
        match (which, minus) {
            (0, true) => Some((1, false)),
            (0, false) => None,
            (1, m) => Some((if m { -1 } else { 1 }, m)),
            (2, false) => Some((1, true)),
            (2, true) => None,
            _ => unreachable!(),
        }
    };
    let psi = |u: bool, v: bool| -> i64 {
        match (u, v) {
            (false, true) => 1,
            (true, false) => -1,
            _ => 0,
        }
    };
    // Symmetric map V x V -> sl(2): w |-> psi(u,w) v + psi(v,w) u.
    let pmap = |u: bool, v: bool| -> (usize, i64) {
        match (u, v) {
            (false, false) => (0, 2),
            (true, true) => (2, -2),
            _ => (1, -1),
        }
    };
    let even_bracket = |a: usize, b: usize| -> SparseVec {
        let (ca, wa, cb, wb) = (a / 3, a % 3, b / 3, b % 3);
        if ca != cb {
            return Vec::new();
        }
        let c = ca;
        match (wa, wb) {
            (1, 0) => vec![(even(c, 0), qi(2))],
            (0, 1) => vec![(even(c, 0), qi(-2))],
            (1, 2) => vec![(even(c, 2), qi(-2))],
            (2, 1) => vec![(even(c, 2), qi(2))],
            (0, 2) => vec![(even(c, 1), qi(1))],
            (2, 0) => vec![(even(c, 1), qi(-1))],
            _ => Vec::new(),
        }
    };
    let mut table = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let entry = match (a < 9, b < 9) {
                (true, true) => even_bracket(a, b),
                (true, false) | (false, true) => {
                    let (x, v, sign) = if a < 9 { (a, b, 1) } else { (b, a, -1) };
                    let (c, which) = (x / 3, x % 3);
                    let mut s = slots(v);
                    match act(which, s[c]) {
                        Some((k, m)) => {
                            s[c] = m;
                            vec![(odd(s), qi(sign * k))]
                        }
                        None => Vec::new(),
                    }
                }
                (false, false) => {
                    let (s, t) = (slots(a), slots(b));
                    let mut terms = Vec::new();
                    for c in 0..3 {
                        let others: i64 = (0..3)
                            .filter(|&d| d != c)
                            .map(|d| psi(s[d], t[d]))
                            .product();
                        if others == 0 {
                            continue;
                        }
                        let (which, k) = pmap(s[c], t[c]);
                        terms.push((even(c, which), &sigma[c] * qi(others * k)));
                    }
                    normalize_terms(terms)
                }
            };
            table.push(entry);
        }
    }
    let mut raw = SuperAlgebra::unchecked(format!("osp42:{alpha}"), basis, table)?;
    if alpha.is_zero() || alpha == &-Q::one() {
        raw.warn(format!("osp(4|2; {alpha}) is not simple"));
    }
    let torus = (0..3).map(|c| dense_unit(n, &[(even(c, 1), 1)])).collect();
    raw.assign_weights(torus)?;
    finalize(raw)
}

// ---------------------------------------------------------------------------
// Vector fields on C^{0|n}.

fn vect_raw(n: usize) -> Result<SuperAlgebra> {
    let gens: Vec<String> = (1..=n).map(|i| format!("t{i}")).collect();
    let monos = Monomial::all(n);
    // Basis index of f d_i.
    let idx = |m: Monomial, i: usize| m.0 as usize * n + i;
    let dim = n << n;
    let mut basis = vec![None; dim];
    for &m in &monos {
        for i in 0..n {
            basis[idx(m, i)] = Some(BasisVector {
                index: idx(m, i),
                name: format!("{}.d{}", m.name(&gens), i + 1),
                parity: Parity::from_bit(m.degree() + 1),
                degree: m.degree() as i32 - 1,
                weight: Vec::new(),
            });
        }
    }
    let basis: Vec<BasisVector> = basis.into_iter().map(Option::unwrap).collect();
    let mut table = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        let (f, i) = (Monomial((a / n) as u32), a % n);
        for b in 0..dim {
            let (g, j) = (Monomial((b / n) as u32), b % n);
            // [f d_i, g d_j] = f d_i(g) d_j - (-1)^{p(X) p(Y)} g d_j(f) d_i
            let mut terms = Vec::new();
            if let Some((s1, dg)) = g.derive(i) {
                if let Some((s2, prod)) = f.mul(dg) {
                    terms.push((idx(prod, j), qi(s1 * s2)));
                }
            }
            if let Some((s1, df)) = f.derive(j) {
                if let Some((s2, prod)) = g.mul(df) {
                    let px = basis[a].parity;
                    let py = basis[b].parity;
                    terms.push((idx(prod, i), qi(-px.sign_with(py) * s1 * s2)));
                }
            }
            table.push(normalize_terms(terms));
        }
    }
    SuperAlgebra::unchecked(format!("vect0n:{n}"), basis, table)
}

fn vect(n: usize, traceless_torus: bool) -> Result<SuperAlgebra> {
    let mut raw = vect_raw(n)?;
    let dim = raw.dim();
    let euler = |i: usize| Monomial::generator(i).0 as usize * n + i;
    let torus = if traceless_torus {
        (0..n - 1)
            .map(|i| dense_unit(dim, &[(euler(i), 1), (euler(i + 1), -1)]))
            .collect()
    } else {
        (0..n).map(|i| dense_unit(dim, &[(euler(i), 1)])).collect()
    };
    raw.assign_weights(torus)?;
    finalize(raw)
}

/// Divergence-free fields: kernel of
/// `div(sum f_i d_i) = sum (-1)^{p(f_i)} d_i(f_i)`.
fn svect(n: usize) -> Result<SuperAlgebra> {
    let v = vect(n, true)?;
    // Divergence of each basis vector as a Grassmann monomial with sign.
    let mut buckets: std::collections::BTreeMap<_, Vec<usize>> = Default::default();
    let parse = |k: usize| -> (Monomial, usize) {
        let name = &v.basis()[k].name;
        let (f, d) = name.split_once(".d").unwrap();
        let i: usize = d.parse::<usize>().unwrap() - 1;
        let mut m = 0u32;
        if f != "1" {
            for g in f.split('t').filter(|s| !s.is_empty()) {
                m |= 1 << (g.parse::<usize>().unwrap() - 1);
            }
        }
        (Monomial(m), i)
    };
    for k in 0..v.dim() {
        let b = &v.basis()[k];
        buckets
            .entry((b.degree, b.parity, b.weight.clone()))
            .or_default()
            .push(k);
    }
    let mut vectors = Vec::new();
    for members in buckets.values() {
        let mut triplets = Vec::new();
        for (col, &k) in members.iter().enumerate() {
            let (f, i) = parse(k);
            if let Some((s, df)) = f.derive(i) {
                let sign = if f.degree() % 2 == 0 { s } else { -s };
                triplets.push((df.0 as usize, col, qi(sign)));
            }
        }
        let m = SparseRationalMatrix::from_triplets(1 << n, members.len(), triplets)?;
        for kv in kernel_basis(&m).vectors {
            let vec: SparseVec = kv.into_iter().map(|(c, x)| (members[c], x)).collect();
            vectors.push((v.label(&vec), vec));
        }
    }
    v.subalgebra(&format!("svect0n:{n}"), vectors)
}

// ---------------------------------------------------------------------------
// Poisson superalgebra on the Grassmann algebra.

/// Generators of the odd symplectic space in split form: pairs `(x_a, y_a)`
/// with `omega(x_a, y_a) = 1`, plus one `z` with `omega(z, z) = 1` when `n`
/// is odd. Over the complex numbers this form is equivalent to the
/// orthonormal one.
fn poisson_generators(n: usize) -> (Vec<String>, Vec<(usize, usize)>) {
    let m = n / 2;
    let mut names = Vec::with_capacity(n);
    let mut pairs = Vec::new();
    for a in 0..m {
        names.push(format!("x{}", a + 1));
        names.push(format!("y{}", a + 1));
        pairs.push((2 * a, 2 * a + 1));
        pairs.push((2 * a + 1, 2 * a));
    }
    if n % 2 == 1 {
        names.push("z".into());
        pairs.push((2 * m, 2 * m));
    }
    (names, pairs)
}

/// `{f, g} = (-1)^{p(f)} sum omega^{ij} d_i(f) d_j(g)` on monomials.
fn poisson_bracket(f: Monomial, g: Monomial, pairs: &[(usize, usize)]) -> Vec<(Monomial, i64)> {
    let pf: i64 = if f.degree().is_multiple_of(2) { 1 } else { -1 };
    let mut out: Vec<(Monomial, i64)> = Vec::new();
    for &(i, j) in pairs {
        let (Some((s1, df)), Some((s2, dg))) = (f.derive(i), g.derive(j)) else {
            continue;
        };
        if let Some((s3, prod)) = df.mul(dg) {
            let c = pf * s1 * s2 * s3;
            match out.iter_mut().find(|e| e.0 == prod) {
                Some(e) => e.1 += c,
                None => out.push((prod, c)),
            }
        }
    }
    out.retain(|e| e.1 != 0);
    out.sort();
    out
}

fn po(n: usize) -> Result<SuperAlgebra> {
    let (names, pairs) = poisson_generators(n);
    let dim = 1usize << n;
    let basis: Vec<BasisVector> = (0..dim)
        .map(|k| {
            let m = Monomial(k as u32);
            BasisVector {
                index: k,
                name: format!("K({})", m.name(&names)),
                parity: Parity::from_bit(m.degree()),
                degree: m.degree() as i32 - 2,
                weight: Vec::new(),
            }
        })
        .collect();
    let mut table = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let terms = poisson_bracket(Monomial(a as u32), Monomial(b as u32), &pairs)
                .into_iter()
                .map(|(m, c)| (m.0 as usize, qi(c)))
                .collect();
            table.push(normalize_terms(terms));
        }
    }
    let mut raw = SuperAlgebra::unchecked(format!("po0n:{n}"), basis, table)?;
    let torus = (0..n / 2)
        .map(|a| dense_unit(dim, &[((1usize << (2 * a)) | (1usize << (2 * a + 1)), 1)]))
        .collect();
    raw.assign_weights(torus)?;
    finalize(raw)
}
