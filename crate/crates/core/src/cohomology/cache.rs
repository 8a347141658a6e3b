//! On-disk cache of slice ranks, one JSON file per slice.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PrimePolicy, RankMethod, SuperDim};
use crate::algebra::SuperAlgebra;
use crate::complex::CoefficientSpec;
use crate::error::Result;

/// Bumped whenever the cochain encoding or the rank semantics change.
const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedSlice {
    pub cochains: SuperDim,
    pub rank: SuperDim,
    pub method: RankMethod,
}

pub struct SliceCache {
    dir: PathBuf,
    /// Digest of everything except the slice coordinates.
    prefix: String,
}

impl SliceCache {
    pub fn open(
        dir: &Path,
        g: &SuperAlgebra,
        coeff: CoefficientSpec,
        policy: &PrimePolicy,
    ) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let mut h = Sha256::new();
        let _ = write!(
            Hasher(&mut h),
            "{SCHEMA}|{}|{}|{coeff}|",
            env!("CARGO_PKG_VERSION"),
            g.name()
        );
        for b in g.basis() {
            let _ = write!(
                Hasher(&mut h),
                "{}:{}:{}:{:?};",
                b.name,
                b.parity,
                b.degree,
                b.weight
            );
        }
        let n = g.dim();
        for i in 0..n {
            for j in 0..n {
                for (k, c) in g.bracket_basis(i, j) {
                    let _ = write!(Hasher(&mut h), "{i},{j},{k},{c};");
                }
            }
        }
        let _ = write!(
            Hasher(&mut h),
            "{:?}|{}|{}",
            policy.primes(),
            policy.verify_rational,
            policy.count
        );
        Ok(SliceCache {
            dir: dir.to_path_buf(),
            prefix: hex::encode(h.finalize()),
        })
    }

    fn path(&self, k: usize, degree: i64, weight: Option<&[i32]>) -> PathBuf {
        let key = format!("{}|{k}|{degree}|{weight:?}", self.prefix);
        self.dir.join(format!(
            "{}.json",
            hex::encode(Sha256::digest(key.as_bytes()))
        ))
    }

    pub fn get(&self, k: usize, degree: i64, weight: Option<&[i32]>) -> Option<CachedSlice> {
        let text = std::fs::read_to_string(self.path(k, degree, weight)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn put(
        &self,
        k: usize,
        degree: i64,
        weight: Option<&[i32]>,
        entry: &CachedSlice,
    ) -> Result<()> {
        let path = self.path(k, degree, weight);
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_string(entry)?)?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }
}

struct Hasher<'a>(&'a mut Sha256);

impl std::fmt::Write for Hasher<'_> {
    fn write_str(&mut self, s: &str) -> std::fmt::Result {
        self.0.update(s.as_bytes());
        Ok(())
    }
}
