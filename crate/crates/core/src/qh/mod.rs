//! QH factorizations of consecutive windows, recycled from one window to the next.
//!
//! For a window `A` of size `m x n`, `m = n + 2d`, the state holds a rotation pattern
//! `Q` (2d-1 descending sequences) and an upper Hessenberg `H` with `Q A = H`. Moving
//! to the next window reuses `Q` and `H` in O(nd) work; `complete_qr` then finishes
//! the triangular factor with `n` more rotations.

mod band;
mod run;

pub use run::{estimate_restart_period, run_sequence, RestartPolicy, StepKind, StepRecord, WindowRun};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::givens::{shift_through_higher_coeffs, Coeffs, RotationPattern, RotationSequence};
use crate::operator::{BandOperator, WindowMatrix};
use band::RowBand;
use num_complex::Complex64;
use serde::Serialize;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Cumulative work counters of a state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    /// Row-pair rotations applied to `H` or to the completion copy of `H`.
    pub rotations_applied: u64,
    /// Rotations applied to the single incoming column.
    pub vector_rotations: u64,
    /// Three-rotation rewrites performed while reordering the pattern.
    pub shift_throughs: u64,
}

impl std::ops::Sub for Counters {
    type Output = Counters;
    fn sub(self, o: Counters) -> Counters {
        Counters {
            rotations_applied: self.rotations_applied - o.rotations_applied,
            vector_rotations: self.vector_rotations - o.vector_rotations,
            shift_throughs: self.shift_throughs - o.shift_throughs,
        }
    }
}

/// Descending sequence in local row coordinates; rotation `p` acts on rows
/// `start + p`, `start + p + 1`.
#[derive(Clone, Debug)]
struct Seq {
    start: usize,
    rots: Vec<Coeffs>,
}

impl Seq {
    /// One past the lowest row touched.
    fn end(&self) -> usize {
        self.start + self.rots.len() + 1
    }
}

#[derive(Clone, Debug)]
pub struct QHState {
    d: usize,
    n: usize,
    m: usize,
    k: i64,
    lambda: Complex64,
    step_index: usize,
    h: RowBand,
    /// Written left to right; the last one is applied first.
    seqs: Vec<Seq>,
    counters: Counters,
}

/// `n x n` upper triangular factor with entries on offsets `0..=width`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularFactor {
    n: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl TriangularFactor {
    pub fn zeros(n: usize, width: usize) -> Self {
        TriangularFactor { n, width, data: vec![ZERO; n * (width + 1)] }
    }

    /// Upper band of a dense square matrix; entries outside the band are ignored.
    pub fn from_dense(m: &DenseMatrix, width: usize) -> Self {
        assert_eq!(m.rows(), m.cols());
        let mut r = Self::zeros(m.rows(), width);
        for i in 0..m.rows() {
            for j in i..(i + width + 1).min(m.cols()) {
                r.set(i, j, m[(i, j)]);
            }
        }
        r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of superdiagonals stored.
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j < i || j - i > self.width || j >= self.n {
            return ZERO;
        }
        self.data[i * (self.width + 1) + (j - i)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(j >= i && j - i <= self.width && j < self.n, "({i}, {j}) outside the triangular band");
        self.data[i * (self.width + 1) + (j - i)] = v;
    }

    /// Row `i`, entries at columns `i ..= i + width` (padded with zeros past `n`).
    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * (self.width + 1)..(i + 1) * (self.width + 1)]
    }

    pub fn diagonal(&self, i: usize) -> Complex64 {
        self.data[i * (self.width + 1)]
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn scale(&mut self, z: Complex64) {
        for v in &mut self.data {
            *v *= z;
        }
    }
}

impl QHState {
    pub fn bandwidth(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn position(&self) -> i64 {
        self.k
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// Advances performed since the last fresh factorization.
    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    /// Largest superdiagonal offset `H` may hold.
    fn band(&self) -> usize {
        (2 * self.d).saturating_sub(1)
    }

    pub fn h_dense(&self) -> DenseMatrix {
        self.h.to_dense()
    }

    /// The pattern `Q` with rows in local window coordinates.
    pub fn pattern(&self) -> RotationPattern {
        RotationPattern::new(self.seqs.iter().map(|s| RotationSequence::descending_from(s.start, &s.rots)).collect())
    }

    /// Text arrow diagram of the current pattern.
    pub fn arrow_diagram(&self) -> String {
        self.pattern().arrow_diagram(self.m)
    }

    /// Move to window `k + 1`. `new_column` holds rows `n-1 ..= m-1` of the last column
    /// of the new window (`2d + 1` values).
    pub fn advance(&mut self, new_column: &[Complex64]) -> Result<()> {
        let (d, n, m) = (self.d, self.n, self.m);
        if new_column.len() != 2 * d + 1 {
            return Err(Error::DimensionMismatch { expected: 2 * d + 1, got: new_column.len() });
        }
        let band = self.band();
        self.k += 1;
        self.step_index += 1;

        // circulant shift as an origin move
        self.h.shift();
        for (j, seq) in self.seqs.iter_mut().enumerate() {
            if seq.start == 0 {
                return Err(Error::SequenceShape(format!("sequence {j} touches the first row before the shift")));
            }
            seq.start -= 1;
        }

        // the new last column through the shifted pattern
        let mut v = vec![ZERO; m];
        v[n - 1..].copy_from_slice(new_column);
        let mut first = n - 1;
        for seq in self.seqs.iter().rev() {
            let from = seq.start.max(first.saturating_sub(1));
            let to = seq.start + seq.rots.len();
            if to + 1 > m {
                return Err(Error::SequenceShape(format!("sequence reaches row {to} of {m}")));
            }
            for r in from..to {
                let (x, y) = seq.rots[r - seq.start].apply(v[r], v[r + 1]);
                v[r] = x;
                v[r + 1] = y;
            }
            self.counters.vector_rotations += to.saturating_sub(from) as u64;
            first = first.min(from.max(seq.start));
        }
        for (r, &val) in v.iter().enumerate().skip(first) {
            if val != ZERO {
                self.h.set(r, n - 1, val);
            }
        }
        if d == 0 {
            return Ok(());
        }

        // sequences now reaching row 0 are merged into a single leading one
        let s = self.seqs.iter().take_while(|q| q.start == 0).count();
        if s == 0 {
            return Err(Error::SequenceShape("no sequence reaches the first row after the shift".into()));
        }
        if let Some(j) = self.seqs[s..].iter().position(|q| q.start == 0) {
            return Err(Error::SequenceShape(format!("sequence {} reaches row 0 out of order", s + j)));
        }
        for j in 1..s {
            if self.seqs[j].rots.len() != self.seqs[j - 1].rots.len() + 1 {
                return Err(Error::SequenceShape(format!(
                    "leading sequences have lengths {} and {}",
                    self.seqs[j - 1].rots.len(),
                    self.seqs[j].rots.len()
                )));
            }
        }
        for j in (0..s - 1).rev() {
            let (nl, nr) = shift_through_higher_coeffs(&self.seqs[j].rots, &self.seqs[j + 1].rots)?;
            self.counters.shift_throughs += self.seqs[j].rots.len() as u64;
            self.seqs[j].rots = nl;
            self.seqs[j + 1].rots = nr;
            self.seqs[j + 1].start = 1;
        }

        // drop the leading sequence by applying its inverse to H
        let lead = self.seqs.remove(0);
        for (p, g) in lead.rots.iter().enumerate().rev() {
            if self.h.rotate(p, g.adjoint(), band) {
                self.counters.rotations_applied += 1;
            }
        }

        // and replace it by one that clears the second subdiagonal
        let mut fresh = Vec::with_capacity(n.saturating_sub(1));
        for j in 0..n.saturating_sub(1) {
            let g = Coeffs::zeroing_second(self.h.get(j + 1, j), self.h.get(j + 2, j));
            if self.h.rotate(j + 1, g, band) {
                self.counters.rotations_applied += 1;
            }
            self.h.zero(j + 2, j);
            fresh.push(g);
        }
        self.seqs.insert(0, Seq { start: 1, rots: fresh });

        // chase the last column up to the subdiagonal
        for i in (n..=m - 2).rev() {
            let q = i - n;
            if self.seqs[q].end() != i + 1 {
                return Err(Error::SequenceShape(format!(
                    "chase rotation at row {i} does not extend sequence {q} ending at row {}",
                    self.seqs[q].end() - 1
                )));
            }
            if let Some(p) = self.seqs[..q].iter().position(|s| s.end() > i) {
                return Err(Error::SequenceShape(format!("chase rotation at row {i} collides with sequence {p}")));
            }
            let g = Coeffs::zeroing_second(self.h.get(i, n - 1), self.h.get(i + 1, n - 1));
            if self.h.rotate(i, g, band) {
                self.counters.rotations_applied += 1;
            }
            self.h.zero(i + 1, n - 1);
            self.seqs[q].rots.push(g);
        }
        Ok(())
    }

    /// Advance using the operator to supply the new column.
    pub fn advance_with(&mut self, op: &BandOperator) -> Result<()> {
        let mut col = vec![ZERO; 2 * self.d + 1];
        op.band_column(self.k + self.n as i64, self.lambda, &mut col);
        self.advance(&col)
    }

    /// Triangular factor `R` with `G H = [R; 0]`; the state is left untouched.
    pub fn complete_qr(&self) -> TriangularFactor {
        self.complete_qr_counted().0
    }

    /// As [`complete_qr`](Self::complete_qr), also returning the rotations applied.
    pub fn complete_qr_counted(&self) -> (TriangularFactor, u64) {
        let (d, n) = (self.d, self.n);
        let width = 2 * d;
        let rows = (n + 1).min(self.m);
        let mut work = RowBand::new(rows, n, 1, width + 1);
        for i in 0..rows {
            if let Some((lo, hi)) = self.h.extent(i) {
                assert!(lo + 1 >= i as i64, "H is not Hessenberg in row {i}");
                for j in lo.max(0)..=hi.min(n as i64 - 1) {
                    let v = self.h.get(i, j as usize);
                    if v != ZERO {
                        work.set(i, j as usize, v);
                    }
                }
            }
        }
        let mut applied = 0;
        for j in 0..n.min(rows - 1) {
            let g = Coeffs::zeroing_second(work.get(j, j), work.get(j + 1, j));
            if work.rotate(j, g, width) {
                applied += 1;
            }
            work.zero(j + 1, j);
        }
        let mut r = TriangularFactor::zeros(n, width);
        for i in 0..n {
            for j in i..(i + width + 1).min(n) {
                r.set(i, j, work.get(i, j));
            }
        }
        (r, applied)
    }
}

/// Fresh QH factorization: `2d - 1` descending sequences clear the subdiagonals from
/// the outermost inwards. No rotation touches row 0.
pub fn qh_factorize(w: &WindowMatrix) -> QHState {
    let (d, n) = (w.bandwidth(), w.cols());
    let m = n + 2 * d;
    let band = (2 * d).saturating_sub(1);
    let mut h = RowBand::new(m, n, 2 * d + 1, 2 * d);
    for c in 0..n {
        for (t, &v) in w.column(c).iter().enumerate() {
            if v != ZERO {
                h.set(c + t, c, v);
            }
        }
    }
    let mut counters = Counters::default();
    let mut seqs = Vec::with_capacity((2 * d).saturating_sub(1));
    for t in (2..=2 * d).rev() {
        let mut rots = Vec::with_capacity(n);
        for col in 0..n {
            let i = col + t - 1;
            let g = Coeffs::zeroing_second(h.get(i, col), h.get(i + 1, col));
            if h.rotate(i, g, band) {
                counters.rotations_applied += 1;
            }
            h.zero(i + 1, col);
            rots.push(g);
        }
        seqs.push(Seq { start: t - 1, rots });
    }
    seqs.reverse();
    QHState { d, n, m, k: w.position(), lambda: w.lambda(), step_index: 0, h, seqs, counters }
}
