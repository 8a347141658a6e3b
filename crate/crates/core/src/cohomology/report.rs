//! Cohomology reports: serialization, parity conventions, grid rendering
//! and cell-by-cell comparison against fixtures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::complex::CoefficientSpec;
use crate::error::{Error, Result};

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct SuperDim {
    pub even: usize,
    pub odd: usize,
}

impl SuperDim {
    pub fn new(even: usize, odd: usize) -> Self {
        SuperDim { even, odd }
    }

    pub fn total(self) -> usize {
        self.even + self.odd
    }

    pub fn is_zero(self) -> bool {
        self.total() == 0
    }

    pub fn swapped(self) -> Self {
        SuperDim {
            even: self.odd,
            odd: self.even,
        }
    }

    /// Cell text: `a`, `b̄`, `a|b̄`, or empty.
    pub fn cell(self) -> String {
        match (self.even, self.odd) {
            (0, 0) => String::new(),
            (a, 0) => a.to_string(),
            (0, b) => format!("{b}\u{304}"),
            (a, b) => format!("{a}|{b}\u{304}"),
        }
    }

    /// Inverse of [`SuperDim::cell`]; also accepts `0|b̄` and `a|0`.
    pub fn parse_cell(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(SuperDim::default());
        }
        let num = |t: &str| -> Result<usize> {
            t.parse()
                .map_err(|_| Error::Format(format!("bad cell `{s}`")))
        };
        let odd_part = |t: &str| -> Result<usize> {
            match t.strip_suffix('\u{304}') {
                Some(n) => num(n),
                None if t == "0" => Ok(0),
                None => Err(Error::Format(format!("odd part of `{s}` must carry a bar"))),
            }
        };
        match s.split_once('|') {
            Some((a, b)) => Ok(SuperDim::new(num(a)?, odd_part(b)?)),
            None if s.ends_with('\u{304}') => Ok(SuperDim::new(0, odd_part(s)?)),
            None => Ok(SuperDim::new(num(s)?, 0)),
        }
    }
}

impl std::ops::Add for SuperDim {
    type Output = SuperDim;
    fn add(self, o: SuperDim) -> SuperDim {
        SuperDim::new(self.even + o.even, self.odd + o.odd)
    }
}

/// How the parity of a class is reported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Parity of `e_a ⊗ f^{a_1} ∧ … ∧ f^{a_k}` in `C^k(g; M)`.
    #[default]
    Plain,
    /// Plain parity plus `k`.
    PiShifted,
}

impl Convention {
    pub fn apply(self, k: usize, plain: SuperDim) -> SuperDim {
        match self {
            Convention::PiShifted if k % 2 == 1 => plain.swapped(),
            _ => plain,
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Convention::Plain),
            "pi_shifted" | "pi-shifted" => Ok(Convention::PiShifted),
            _ => Err(Error::Format(format!("unknown convention `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub k: usize,
    pub k_minus_1: i64,
    pub degree: i64,
    pub even: usize,
    pub odd: usize,
}

impl Entry {
    pub fn dim(&self) -> SuperDim {
        SuperDim::new(self.even, self.odd)
    }
}

/// A cell that was not computed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Skipped {
    pub k: usize,
    pub degree: i64,
    pub reason: String,
}

/// A `(k, degree)` cell reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub k: usize,
    pub degree: i64,
}

/// Per-slice bookkeeping kept for audits (Euler characteristic, ranks).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceStats {
    pub k: usize,
    pub degree: i64,
    /// Plain cochain dimensions of `C^k` in this degree.
    pub cochains: SuperDim,
    /// Plain-parity ranks of `d_k : C^k -> C^{k+1}`.
    pub rank: SuperDim,
    /// `modular`, `rational` or `escalated`.
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyReport {
    pub algebra: String,
    pub coefficients: CoefficientSpec,
    pub convention: Convention,
    /// Computed cells; dimensions in `convention`.
    pub entries: Vec<Entry>,
    #[serde(default)]
    pub skipped: Vec<Skipped>,
    /// Cells excluded from comparison altogether.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unverified: Vec<Cell>,
    /// Cells compared by total dimension only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parity_unverified: Vec<Cell>,
    /// Cochain degrees and grading degrees covered; fixture cells not
    /// listed in `entries` are zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slices: Vec<SliceStats>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub representatives: Vec<RepresentativeSet>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub k: Vec<usize>,
    pub degrees: Vec<i64>,
}

/// Printable representatives of one cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentativeSet {
    pub k: usize,
    pub degree: i64,
    pub cochains: Vec<String>,
}

impl CohomologyReport {
    pub fn get(&self, k: usize, degree: i64) -> Option<SuperDim> {
        self.entries
            .iter()
            .find(|e| e.k == k && e.degree == degree)
            .map(Entry::dim)
    }

    pub fn is_skipped(&self, k: usize, degree: i64) -> bool {
        self.skipped.iter().any(|s| s.k == k && s.degree == degree)
    }

    /// Sum over degrees of row `k`.
    pub fn row_total(&self, k: usize) -> SuperDim {
        self.entries
            .iter()
            .filter(|e| e.k == k)
            .fold(SuperDim::default(), |a, e| a + e.dim())
    }

    /// Re-expresses the entries in another convention.
    pub fn to_convention(&self, target: Convention) -> CohomologyReport {
        let mut out = self.clone();
        if target != self.convention {
            for e in &mut out.entries {
                // Both conventions differ by k; the map is an involution.
                let d = Convention::PiShifted.apply(e.k, e.dim());
                e.even = d.even;
                e.odd = d.odd;
            }
            out.convention = target;
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    fn rows_and_degrees(&self) -> (Vec<usize>, Vec<i64>) {
        match &self.window {
            Some(w) => (w.k.clone(), w.degrees.clone()),
            None => {
                let ks: BTreeSet<usize> = self.entries.iter().map(|e| e.k).collect();
                let ds: BTreeSet<i64> = self.entries.iter().map(|e| e.degree).collect();
                (ks.into_iter().collect(), ds.into_iter().collect())
            }
        }
    }
}

/// Which rows and columns a grid shows.
#[derive(Clone, Debug, Default)]
pub struct Layout {
    /// Cochain degrees `k`; `None` = all rows of the report.
    pub rows: Option<Vec<usize>>,
    /// Grading degrees; `None` = all columns of the report.
    pub degrees: Option<Vec<i64>>,
}

fn display_width(s: &str) -> usize {
    s.chars().filter(|&c| c != '\u{304}').count()
}

fn pad(s: &str, width: usize) -> String {
    let w = display_width(s);
    format!("{}{s}", " ".repeat(width.saturating_sub(w)))
}

/// Renders rows `i-1 = k-1` against degree columns. Skipped cells print `?`.
pub fn emit_table(report: &CohomologyReport, layout: &Layout) -> String {
    let (all_rows, all_degrees) = report.rows_and_degrees();
    let rows = layout.rows.clone().unwrap_or(all_rows);
    let degrees = layout.degrees.clone().unwrap_or(all_degrees);
    let corner = "i-1\\deg";
    let mut grid: Vec<Vec<String>> = Vec::with_capacity(rows.len() + 1);
    let mut header = vec![corner.to_string()];
    header.extend(degrees.iter().map(i64::to_string));
    grid.push(header);
    for &k in &rows {
        let mut line = vec![(k as i64 - 1).to_string()];
        for &d in &degrees {
            line.push(if report.is_skipped(k, d) {
                "?".into()
            } else {
                report.get(k, d).unwrap_or_default().cell()
            });
        }
        grid.push(line);
    }
    let cols = grid[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            grid.iter()
                .map(|r| display_width(&r[c]))
                .max()
                .unwrap_or(0)
                .max(2)
        })
        .collect();
    let mut out = String::new();
    for row in &grid {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(s, w)| pad(s, *w)).collect();
        let line = cells.join(" | ");
        let _ = writeln!(out, "{}", line.trim_end());
    }
    out
}

/// One differing cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDiff {
    pub k: usize,
    pub degree: i64,
    pub expected: SuperDim,
    /// `None` when the report does not contain the cell.
    pub actual: Option<SuperDim>,
    pub totals_only: bool,
}

impl std::fmt::Display for CellDiff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let show = |d: SuperDim| {
            if d.is_zero() {
                "0".to_string()
            } else {
                d.cell()
            }
        };
        let actual = self.actual.map_or("not computed".to_string(), show);
        write!(
            f,
            "row i-1={} (k={}) deg={}: expected {}, got {}{}",
            self.k as i64 - 1,
            self.k,
            self.degree,
            show(self.expected),
            actual,
            if self.totals_only {
                " (totals only)"
            } else {
                ""
            }
        )
    }
}

/// Compares `report` against `fixture` on every cell of the fixture's
/// window (or its entries, without a window), skipping unverified cells.
pub fn compare(report: &CohomologyReport, fixture: &CohomologyReport) -> Result<Vec<CellDiff>> {
    if report.coefficients != fixture.coefficients {
        return Err(Error::Format(format!(
            "coefficient mismatch: report {} vs fixture {}",
            report.coefficients, fixture.coefficients
        )));
    }
    let report = report.to_convention(fixture.convention);
    let skip: BTreeSet<Cell> = fixture.unverified.iter().copied().collect();
    let totals: BTreeSet<Cell> = fixture.parity_unverified.iter().copied().collect();
    let mut expected: BTreeMap<Cell, SuperDim> = BTreeMap::new();
    if let Some(w) = &fixture.window {
        for &k in &w.k {
            for &degree in &w.degrees {
                expected.insert(Cell { k, degree }, SuperDim::default());
            }
        }
    }
    for e in &fixture.entries {
        expected.insert(
            Cell {
                k: e.k,
                degree: e.degree,
            },
            e.dim(),
        );
    }
    let mut diffs = Vec::new();
    for (cell, want) in expected {
        if skip.contains(&cell) {
            continue;
        }
        let computed = !report.is_skipped(cell.k, cell.degree)
            && (report.get(cell.k, cell.degree).is_some() || covers(&report, cell));
        let actual = computed.then(|| report.get(cell.k, cell.degree).unwrap_or_default());
        let totals_only = totals.contains(&cell);
        let same = match actual {
            Some(a) if totals_only => a.total() == want.total(),
            Some(a) => a == want,
            None => false,
        };
        if !same {
            diffs.push(CellDiff {
                k: cell.k,
                degree: cell.degree,
                expected: want,
                actual,
                totals_only,
            });
        }
    }
    Ok(diffs)
}

/// Whether a computed report's window includes the cell (absent entries
/// there are zero).
fn covers(report: &CohomologyReport, cell: Cell) -> bool {
    report
        .window
        .as_ref()
        .is_some_and(|w| w.k.contains(&cell.k) && w.degrees.contains(&cell.degree))
}
