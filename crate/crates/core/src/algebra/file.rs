//! Loader for user-supplied algebra definitions (JSON).
//!
//! ```json
//! {
//!   "name": "sl2",
//!   "basis": [{"name": "e", "parity": "even", "degree": 1, "weight": [2]}, ...],
//!   "brackets": [{"i": 0, "j": 2, "terms": [{"k": 1, "num": 1, "den": 1}]}, ...]
//! }
//! ```
//!
//! Only pairs with a nonzero bracket need to be listed, and only one of
//! `(i, j)` and `(j, i)`; the other is filled in by super-antisymmetry. A
//! listed pair and its mirror must agree.

use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{BasisVector, Parity, SuperAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{normalize_terms, SparseVec, Q};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    #[serde(default)]
    pub name: Option<String>,
    pub basis: Vec<BasisEntry>,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisEntry {
    pub name: String,
    pub parity: Parity,
    #[serde(default)]
    pub degree: i32,
    #[serde(default)]
    pub weight: Vec<i32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<TermEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermEntry {
    pub k: usize,
    pub num: i64,
    #[serde(default = "one")]
    pub den: i64,
}

fn one() -> i64 {
    1
}

impl AlgebraFile {
    pub fn load(path: &Path) -> Result<SuperAlgebra> {
        let text = std::fs::read_to_string(path)?;
        let file: AlgebraFile = serde_json::from_str(&text)?;
        let fallback = path
            .file_stem()
            .map_or("file".into(), |s| s.to_string_lossy().into_owned());
        file.into_algebra(&fallback)
    }

    /// Validates and builds; every invariant violation is an error.
    pub fn into_algebra(self, fallback_name: &str) -> Result<SuperAlgebra> {
        let n = self.basis.len();
        let parity: Vec<Parity> = self.basis.iter().map(|b| b.parity).collect();
        let mut table: Vec<Option<SparseVec>> = vec![None; n * n];
        for entry in &self.brackets {
            for &x in &[entry.i, entry.j] {
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x, dim: n });
                }
            }
            let mut terms = Vec::with_capacity(entry.terms.len());
            for t in &entry.terms {
                if t.k >= n {
                    return Err(Error::IndexOutOfRange { index: t.k, dim: n });
                }
                if t.den == 0 {
                    return Err(Error::InvalidDefinition(format!(
                        "zero denominator in [{}, {}]",
                        entry.i, entry.j
                    )));
                }
                terms.push((t.k, Q::new(BigInt::from(t.num), BigInt::from(t.den))));
            }
            let v = normalize_terms(terms);
            let sign = -parity[entry.i].sign_with(parity[entry.j]);
            let mirror: SparseVec = v
                .iter()
                .map(|(k, c)| (*k, c * Q::from_integer(sign.into())))
                .collect();
            for (slot, val) in [(entry.i * n + entry.j, v), (entry.j * n + entry.i, mirror)] {
                match &table[slot] {
                    Some(old) if *old != val => {
                        return Err(Error::InvalidDefinition(format!(
                            "conflicting entries for [{}, {}]",
                            entry.i, entry.j
                        )))
                    }
                    _ => table[slot] = Some(val),
                }
            }
        }
        let basis = self
            .basis
            .into_iter()
            .enumerate()
            .map(|(index, b)| BasisVector {
                index,
                name: b.name,
                parity: b.parity,
                degree: b.degree,
                weight: b.weight,
            })
            .collect();
        let table = table.into_iter().map(Option::unwrap_or_default).collect();
        SuperAlgebra::new(
            self.name.unwrap_or_else(|| fallback_name.to_string()),
            basis,
            table,
        )
    }
}
