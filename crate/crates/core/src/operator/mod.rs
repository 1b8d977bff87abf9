//! Bi-infinite band operators stored by diagonals.
//!
//! Offsets follow the `a_{j+k, j}` convention: diagonal `k > 0` lies below the main
//! diagonal and its value at column `j` is `entry(j + k, j)`.

mod blocks;
mod positions;
mod symbol;
mod window;

pub use blocks::{block_norm_sup, blocks_for_offset};
pub use positions::{enumerate_positions, Position, PositionSet, Region};
pub use symbol::{fish_symbol, geometric_symbol, laurent_operator, LaurentSymbol};
pub use window::WindowMatrix;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Values along one diagonal, indexed by global column.
#[derive(Clone, Debug, PartialEq)]
pub enum DiagonalValues {
    Constant(Complex64),
    /// `values[j mod p]` at column `j`.
    Periodic(Vec<Complex64>),
}

impl DiagonalValues {
    pub fn at(&self, j: i64) -> Complex64 {
        match self {
            DiagonalValues::Constant(v) => *v,
            DiagonalValues::Periodic(vs) => vs[j.rem_euclid(vs.len() as i64) as usize],
        }
    }

    pub fn period(&self) -> usize {
        match self {
            DiagonalValues::Constant(_) => 1,
            DiagonalValues::Periodic(vs) => vs.len(),
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match self {
            DiagonalValues::Constant(v) => v.norm(),
            DiagonalValues::Periodic(vs) => vs.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        match self {
            DiagonalValues::Constant(v) => DiagonalValues::Constant(f(*v)),
            DiagonalValues::Periodic(vs) => DiagonalValues::Periodic(vs.iter().map(|v| f(*v)).collect()),
        }
    }

    /// Values `w` with `w.at(j) = conj(self.at(j + shift))`.
    fn conj_shifted(&self, shift: i64) -> Self {
        match self {
            DiagonalValues::Constant(v) => DiagonalValues::Constant(v.conj()),
            DiagonalValues::Periodic(vs) => {
                let p = vs.len() as i64;
                DiagonalValues::Periodic((0..p).map(|j| self.at(j + shift).conj()).collect())
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let DiagonalValues::Periodic(vs) = self {
            if vs.is_empty() {
                return Err(Error::InvalidOperator("periodic diagonal with no values".into()));
            }
        }
        Ok(())
    }
}

/// One diagonal. Columns `j >= split` read `values`; when `left` is set, columns
/// `j < split` read `left` instead.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalSpec {
    pub offset: i64,
    pub values: DiagonalValues,
    pub left: Option<DiagonalValues>,
    pub split: i64,
}

impl DiagonalSpec {
    pub fn constant(offset: i64, v: Complex64) -> Self {
        DiagonalSpec { offset, values: DiagonalValues::Constant(v), left: None, split: 0 }
    }

    pub fn periodic(offset: i64, vs: Vec<Complex64>) -> Self {
        DiagonalSpec { offset, values: DiagonalValues::Periodic(vs), left: None, split: 0 }
    }

    /// `left` for columns `j < split`, `right` for `j >= split`.
    pub fn switched(offset: i64, left: DiagonalValues, right: DiagonalValues, split: i64) -> Self {
        DiagonalSpec { offset, values: right, left: Some(left), split }
    }

    pub fn at(&self, j: i64) -> Complex64 {
        match &self.left {
            Some(l) if j < self.split => l.at(j),
            _ => self.values.at(j),
        }
    }

    pub fn left_values(&self) -> &DiagonalValues {
        self.left.as_ref().unwrap_or(&self.values)
    }

    pub fn right_values(&self) -> &DiagonalValues {
        &self.values
    }

    /// Split column if the two regimes actually differ.
    pub fn effective_split(&self) -> Option<i64> {
        match &self.left {
            Some(l) if !same_values(l, &self.values) => Some(self.split),
            _ => None,
        }
    }

    pub fn sup_abs(&self) -> f64 {
        let l = self.left.as_ref().map_or(0.0, DiagonalValues::sup_abs);
        l.max(self.values.sup_abs())
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64 + Copy) -> Self {
        DiagonalSpec {
            offset: self.offset,
            values: self.values.map(f),
            left: self.left.as_ref().map(|l| l.map(f)),
            split: self.split,
        }
    }
}

fn same_values(a: &DiagonalValues, b: &DiagonalValues) -> bool {
    let p = num_lcm(a.period(), b.period()) as i64;
    (0..p).all(|j| a.at(j) == b.at(j))
}

pub(crate) fn num_gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

pub(crate) fn num_lcm(a: usize, b: usize) -> usize {
    a / num_gcd(a, b) * b
}

/// A band operator with finitely many diagonals and a finite set of overridden entries.
#[derive(Clone, Debug, PartialEq)]
pub struct BandOperator {
    bandwidth: usize,
    /// Indexed by `offset + bandwidth`.
    diagonals: Vec<Option<DiagonalSpec>>,
    /// Keyed by `(col, row)` so that column ranges are contiguous.
    overrides: BTreeMap<(i64, i64), Complex64>,
}

impl BandOperator {
    pub fn new(bandwidth: usize, diagonals: Vec<DiagonalSpec>) -> Result<Self> {
        let mut slots = vec![None; 2 * bandwidth + 1];
        for spec in diagonals {
            if spec.offset.unsigned_abs() as usize > bandwidth {
                return Err(Error::OffsetOutsideBand { offset: spec.offset, bandwidth });
            }
            spec.values.validate()?;
            if let Some(l) = &spec.left {
                l.validate()?;
            }
            let idx = (spec.offset + bandwidth as i64) as usize;
            if slots[idx].is_some() {
                return Err(Error::InvalidOperator(format!("diagonal {} given twice", spec.offset)));
            }
            slots[idx] = Some(spec);
        }
        Ok(BandOperator { bandwidth, diagonals: slots, overrides: BTreeMap::new() })
    }

    pub fn identity() -> Self {
        BandOperator::new(0, vec![DiagonalSpec::constant(0, Complex64::new(1.0, 0.0))]).expect("valid")
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn diagonal(&self, offset: i64) -> Option<&DiagonalSpec> {
        if offset.unsigned_abs() as usize > self.bandwidth {
            return None;
        }
        self.diagonals[(offset + self.bandwidth as i64) as usize].as_ref()
    }

    pub fn diagonals(&self) -> impl Iterator<Item = &DiagonalSpec> {
        self.diagonals.iter().flatten()
    }

    /// Overridden entries as `((row, col), value)`.
    pub fn overrides(&self) -> impl Iterator<Item = ((i64, i64), Complex64)> + '_ {
        self.overrides.iter().map(|(&(c, r), &v)| ((r, c), v))
    }

    pub fn entry(&self, i: i64, j: i64) -> Complex64 {
        let k = i - j;
        if k.unsigned_abs() as usize > self.bandwidth {
            return ZERO;
        }
        if let Some(v) = self.overrides.get(&(j, i)) {
            return *v;
        }
        self.diagonal_entry(k, j)
    }

    fn diagonal_entry(&self, k: i64, j: i64) -> Complex64 {
        match &self.diagonals[(k + self.bandwidth as i64) as usize] {
            Some(spec) => spec.at(j),
            None => ZERO,
        }
    }

    /// Set a single entry inside the band.
    pub fn with_override(mut self, row: i64, col: i64, value: Complex64) -> Result<Self> {
        if (row - col).unsigned_abs() as usize > self.bandwidth {
            return Err(Error::ImpurityOutsideBand { row, col, bandwidth: self.bandwidth });
        }
        self.overrides.insert((col, row), value);
        Ok(self)
    }

    /// Entries of `A - lambda I` in column `j`, rows `j - d ..= j + d`.
    pub fn band_column(&self, j: i64, lambda: Complex64, out: &mut [Complex64]) {
        let d = self.bandwidth as i64;
        debug_assert_eq!(out.len(), 2 * self.bandwidth + 1);
        for (t, slot) in out.iter_mut().enumerate() {
            *slot = self.diagonal_entry(t as i64 - d, j);
        }
        for (&(_, r), &v) in self.overrides.range((j, i64::MIN)..=(j, i64::MAX)) {
            out[(r - j + d) as usize] = v;
        }
        out[self.bandwidth] -= lambda;
    }

    /// Dense section with rows `row0..row0+rows` and columns `col0..col0+cols`.
    pub fn section(&self, row0: i64, col0: i64, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |r, c| self.entry(row0 + r as i64, col0 + c as i64))
    }

    pub fn window(&self, lambda: Complex64, k: i64, n: usize) -> WindowMatrix {
        WindowMatrix::extract(self, lambda, k, n)
    }

    /// `A + E` with `E` placed so that `E[0][0]` lands on `(row_offset, col_offset)`.
    /// Zero entries of `E` are ignored; nonzero entries must stay inside the band.
    pub fn add_impurity(&self, e: &DenseMatrix, row_offset: i64, col_offset: i64) -> Result<Self> {
        let mut out = self.clone();
        for r in 0..e.rows() {
            for c in 0..e.cols() {
                let v = e[(r, c)];
                if v == ZERO {
                    continue;
                }
                let (i, j) = (row_offset + r as i64, col_offset + c as i64);
                if (i - j).unsigned_abs() as usize > self.bandwidth {
                    return Err(Error::ImpurityOutsideBand { row: i, col: j, bandwidth: self.bandwidth });
                }
                let base = out.entry(i, j);
                out.overrides.insert((j, i), base + v);
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.bandwidth;
        let mut slots = vec![None; 2 * d + 1];
        for spec in self.diagonals() {
            // new diagonal -k at column j reads conj(old diagonal k at column j - k)
            let k = spec.offset;
            let nk = -k;
            let shift = -k;
            let values = spec.values.conj_shifted(shift);
            let left = spec.left.as_ref().map(|l| l.conj_shifted(shift));
            slots[(nk + d as i64) as usize] = Some(DiagonalSpec { offset: nk, values, left, split: spec.split + k });
        }
        let overrides = self.overrides.iter().map(|(&(c, r), v)| ((r, c), v.conj())).collect();
        BandOperator { bandwidth: d, diagonals: slots, overrides }
    }

    /// Restriction to offsets `|k| <= d` with the Wiener tail `sum_{|k| > d} sup |diag k|`.
    pub fn truncate(&self, d: usize) -> (BandOperator, f64) {
        if d >= self.bandwidth {
            return (self.clone(), 0.0);
        }
        let mut sup = vec![0.0f64; 2 * self.bandwidth + 1];
        for spec in self.diagonals() {
            sup[(spec.offset + self.bandwidth as i64) as usize] = spec.sup_abs();
        }
        for (&(c, r), v) in &self.overrides {
            let idx = (r - c + self.bandwidth as i64) as usize;
            sup[idx] = sup[idx].max(v.norm());
        }
        let mut tail: Vec<f64> = sup
            .iter()
            .enumerate()
            .filter(|(idx, _)| (*idx as i64 - self.bandwidth as i64).unsigned_abs() as usize > d)
            .map(|(_, s)| *s)
            .collect();
        tail.sort_by(f64::total_cmp);
        let eta = tail.iter().sum();
        let diagonals = self.diagonals().filter(|s| s.offset.unsigned_abs() as usize <= d).cloned().collect();
        let mut op = BandOperator::new(d, diagonals).expect("offsets filtered");
        op.overrides = self
            .overrides
            .iter()
            .filter(|(&(c, r), _)| (r - c).unsigned_abs() as usize <= d)
            .map(|(k, v)| (*k, *v))
            .collect();
        (op, eta)
    }

    /// Diagonal `k` scaled by `1 - |k|/(n+1)` for `|k| <= n`; the rest dropped.
    pub fn fejer(&self, n: usize) -> BandOperator {
        let (mut op, _) = self.truncate(n);
        for slot in op.diagonals.iter_mut().flatten() {
            let w = 1.0 - slot.offset.unsigned_abs() as f64 / (n as f64 + 1.0);
            *slot = slot.map(|v| v * w);
        }
        let overrides: Vec<_> = op.overrides.iter().map(|(k, v)| (*k, *v)).collect();
        for ((c, r), v) in overrides {
            let w = 1.0 - (r - c).unsigned_abs() as f64 / (n as f64 + 1.0);
            op.overrides.insert((c, r), v * w);
        }
        op
    }

    /// Columns where the left and right regimes meet, and override columns.
    pub(crate) fn irregular_columns(&self) -> (Vec<i64>, Vec<i64>) {
        let splits = self.diagonals().filter_map(DiagonalSpec::effective_split).collect();
        let cols = self.overrides.keys().map(|&(c, _)| c).collect();
        (splits, cols)
    }

    pub(crate) fn left_period(&self) -> usize {
        self.diagonals().fold(1, |p, s| num_lcm(p, s.left_values().period()))
    }

    pub(crate) fn right_period(&self) -> usize {
        self.diagonals().fold(1, |p, s| num_lcm(p, s.right_values().period()))
    }
}

/// Operator `L(a)P + L(b)Q`: columns `j >= 0` carry the coefficients of `a`, columns
/// `j < 0` those of `b`, both truncated to bandwidth `d`.
pub fn singular_integral_operator(a: &LaurentSymbol, b: &LaurentSymbol, d: usize) -> BandOperator {
    let di = d as i64;
    let specs = (-di..=di)
        .filter_map(|k| {
            let (ak, bk) = (a.coefficient(k), b.coefficient(k));
            if ak == ZERO && bk == ZERO {
                return None;
            }
            Some(DiagonalSpec::switched(k, DiagonalValues::Constant(bk), DiagonalValues::Constant(ak), 0))
        })
        .collect();
    BandOperator::new(d, specs).expect("offsets within band")
}

/// Truncation of a Laurent operator to bandwidth `d` with the certified tail `eta_d`.
pub fn truncate_to_band(symbol: &LaurentSymbol, d: usize) -> (BandOperator, f64) {
    (laurent_operator(&symbol.truncated(d)), symbol.tail_bound(d))
}

/// Fejer-Cesaro mean of order `n`.
pub fn fejer_band_approx(op: &BandOperator, n: usize) -> BandOperator {
    op.fejer(n)
}

/// The `10 x 10` Grcar matrix: ones on the main and first three superdiagonals, `-1`
/// on the first subdiagonal. Returns `scale * G + shift * I`.
pub fn grcar_matrix(size: usize, scale: f64, shift: Complex64) -> DenseMatrix {
    DenseMatrix::from_fn(size, size, |i, j| {
        let base = if j >= i && j - i <= 3 {
            1.0
        } else if i == j + 1 {
            -1.0
        } else {
            0.0
        };
        let mut v = Complex64::new(base * scale, 0.0);
        if i == j {
            v += shift;
        }
        v
    })
}

/// The period-2 tridiagonal-plus-one operator with entries 9, 2 and 4.
///
/// Row `i` (0-based) has `entry(i, i+1) = entry(i+1, i) = 9` for even `i` and `2` for
/// odd `i`; `entry(i, i+2) = 4` for even `i`.
pub fn example21_operator() -> BandOperator {
    let c = |x: f64| Complex64::new(x, 0.0);
    BandOperator::new(
        2,
        vec![
            // entry(j+1, j): 9 at even j, 2 at odd j
            DiagonalSpec::periodic(1, vec![c(9.0), c(2.0)]),
            // entry(j-1, j) = entry(i, i+1) with i = j-1: 9 when j-1 even
            DiagonalSpec::periodic(-1, vec![c(2.0), c(9.0)]),
            // entry(j-2, j) = 4 when j-2 even
            DiagonalSpec::periodic(-2, vec![c(4.0), c(0.0)]),
        ],
    )
    .expect("valid")
}
