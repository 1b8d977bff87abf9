//! Row-major band storage for the Hessenberg factor with an O(1) origin shift.

use crate::dense::DenseMatrix;
use crate::givens::Coeffs;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `rows x cols` matrix where local row `i` stores columns `i - lower ..= i + upper`.
///
/// Slot `s` of row `i` holds column `i - lower + s`; shifting rows and columns
/// together leaves slots unchanged, so the origin shift only moves `base`.
/// Each physical row tracks the slot range that may be nonzero.
#[derive(Clone, Debug)]
pub(crate) struct RowBand {
    rows: usize,
    cols: usize,
    lower: usize,
    width: usize,
    base: usize,
    cap: usize,
    data: Vec<Complex64>,
    /// `(lo, hi)` slots per physical row; empty when `lo > hi`.
    ext: Vec<(i32, i32)>,
}

const EMPTY: (i32, i32) = (1, 0);

impl RowBand {
    pub fn new(rows: usize, cols: usize, lower: usize, upper: usize) -> Self {
        let width = lower + upper + 1;
        let cap = 2 * rows + 1;
        RowBand {
            rows,
            cols,
            lower,
            width,
            base: 0,
            cap,
            data: vec![ZERO; cap * width],
            ext: vec![EMPTY; cap],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let s = j as i64 - i as i64 + self.lower as i64;
        (s >= 0 && (s as usize) < self.width).then_some(s as usize)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self.slot(i, j) {
            Some(s) => self.data[(self.base + i) * self.width + s],
            None => ZERO,
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let s = self.slot(i, j).unwrap_or_else(|| panic!("entry ({i}, {j}) outside band storage"));
        let p = self.base + i;
        self.data[p * self.width + s] = v;
        if v != ZERO {
            let e = &mut self.ext[p];
            if e.0 > e.1 {
                *e = (s as i32, s as i32);
            } else {
                e.0 = e.0.min(s as i32);
                e.1 = e.1.max(s as i32);
            }
        }
    }

    /// Write an exact zero and shrink the row extent if it sat on the boundary.
    pub fn zero(&mut self, i: usize, j: usize) {
        let Some(s) = self.slot(i, j) else { return };
        let p = self.base + i;
        self.data[p * self.width + s] = ZERO;
        let e = &mut self.ext[p];
        if e.0 == s as i32 {
            e.0 += 1;
        }
        if e.1 == s as i32 {
            e.1 -= 1;
        }
        if e.0 > e.1 {
            *e = EMPTY;
        }
    }

    /// Column range that may hold nonzeros in row `i`.
    #[inline]
    pub fn extent(&self, i: usize) -> Option<(i64, i64)> {
        let (lo, hi) = self.ext[self.base + i];
        (lo <= hi).then(|| {
            let off = i as i64 - self.lower as i64;
            (off + lo as i64, off + hi as i64)
        })
    }

    /// Rotate rows `i`, `i+1`. Row `i` keeps columns up to `i + band`; the entry of row
    /// `i` in column `i + band + 1` is structurally zero and is not written.
    /// Returns whether any work was done.
    pub fn rotate(&mut self, i: usize, g: Coeffs, band: usize) -> bool {
        if g.is_identity() {
            return false;
        }
        let (lo, hi) = match (self.extent(i), self.extent(i + 1)) {
            (None, None) => return true,
            (Some(a), None) | (None, Some(a)) => a,
            (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
        };
        let ii = i as i64;
        let top = ii + band as i64;
        assert!(lo >= ii + 1 - self.lower as i64, "rotation at row {i} overflows the lower band (column {lo})");
        assert!(hi <= top + 1, "rotation at row {i} overflows the upper band (column {hi})");
        let w = self.width;
        let p = self.base + i;
        let (r0, r1) = self.data[p * w..(p + 2) * w].split_at_mut(w);
        let a = (lo - ii + self.lower as i64) as usize;
        let b = (hi.min(top) - ii + self.lower as i64) as usize;
        let (c, s) = (g.c, g.s);
        let (sc, cc) = (-g.s.conj(), g.c.conj());
        for (x, y) in r0[a..=b].iter_mut().zip(r1[a - 1..b].iter_mut()) {
            let (x0, y0) = (*x, *y);
            *x = c * x0 + s * y0;
            *y = sc * x0 + cc * y0;
        }
        if hi > top {
            let sl = (hi - ii + self.lower as i64) as usize;
            r1[sl - 1] *= cc;
        }
        let lo_s = a as i32;
        self.ext[p] = (lo_s, b as i32);
        self.ext[p + 1] = (lo_s - 1, (hi - ii - 1 + self.lower as i64) as i32);
        true
    }

    /// Move the origin one row and one column down. The old first row is dropped,
    /// the new last row starts empty, and anything left in column `-1` is cleared.
    pub fn shift(&mut self) {
        self.base += 1;
        if self.base + self.rows > self.cap {
            let w = self.width;
            let keep = self.rows - 1;
            self.data.copy_within(self.base * w..(self.base + keep) * w, 0);
            self.ext.copy_within(self.base..self.base + keep, 0);
            self.data[keep * w..].fill(ZERO);
            self.ext[keep..].fill(EMPTY);
            self.base = 0;
        }
        let last = self.base + self.rows - 1;
        self.data[last * self.width..(last + 1) * self.width].fill(ZERO);
        self.ext[last] = EMPTY;
        for i in 0..self.lower.min(self.rows) {
            let s = self.lower - 1 - i;
            let p = self.base + i;
            self.data[p * self.width + s] = ZERO;
            let e = &mut self.ext[p];
            if e.0 <= s as i32 {
                e.0 = s as i32 + 1;
            }
            if e.0 > e.1 {
                *e = EMPTY;
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            if let Some((lo, hi)) = self.extent(i) {
                for j in lo.max(0)..=hi.min(self.cols as i64 - 1) {
                    out[(i, j as usize)] = self.get(i, j as usize);
                }
            }
        }
        out
    }
}
