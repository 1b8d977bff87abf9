use super::shift::shift_through_higher_coeffs;
use super::{apply_rotation_left, Coeffs, GivensRotation};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Written `G_b ... G_t`, applied from the top row `t` downwards.
    Descending,
    /// Written `G_t ... G_b`, applied from the bottom row `b` upwards.
    Ascending,
}

/// Rotations on consecutive rows, stored in application order.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationSequence {
    direction: Direction,
    start: usize,
    rotations: Vec<GivensRotation>,
}

impl RotationSequence {
    pub fn new(direction: Direction, rotations: Vec<GivensRotation>) -> Result<Self> {
        let start = rotations
            .first()
            .map(|g| g.row)
            .ok_or_else(|| Error::SequenceShape("empty sequence needs an explicit start row".into()))?;
        for w in rotations.windows(2) {
            let ok = match direction {
                Direction::Descending => w[1].row == w[0].row + 1,
                Direction::Ascending => w[1].row + 1 == w[0].row,
            };
            if !ok {
                return Err(Error::SequenceShape(format!(
                    "rows {} then {} are not contiguous in a {direction:?} sequence",
                    w[0].row, w[1].row
                )));
            }
        }
        Ok(RotationSequence { direction, start, rotations })
    }

    pub fn empty(direction: Direction, start: usize) -> Self {
        RotationSequence { direction, start, rotations: Vec::new() }
    }

    pub fn descending_from(start: usize, coeffs: &[Coeffs]) -> Self {
        let rotations = coeffs.iter().enumerate().map(|(p, k)| k.at(start + p)).collect();
        RotationSequence { direction: Direction::Descending, start, rotations }
    }

    pub fn ascending_from(start: usize, coeffs: &[Coeffs]) -> Self {
        assert!(coeffs.len() <= start + 1, "ascending sequence would pass row 0");
        let rotations = coeffs.iter().enumerate().map(|(p, k)| k.at(start - p)).collect();
        RotationSequence { direction: Direction::Ascending, start, rotations }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Row of the first rotation applied.
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    pub fn rotations(&self) -> &[GivensRotation] {
        &self.rotations
    }

    pub fn coeffs(&self) -> Vec<Coeffs> {
        self.rotations.iter().map(GivensRotation::coeffs).collect()
    }

    /// Lowest and highest row index touched, if any.
    pub fn row_span(&self) -> Option<(usize, usize)> {
        let first = self.rotations.first()?.row;
        let last = self.rotations.last()?.row;
        Some((first.min(last), first.max(last) + 1))
    }

    pub(crate) fn require_descending(&self) -> Result<()> {
        match self.direction {
            Direction::Descending => Ok(()),
            Direction::Ascending => Err(Error::SequenceShape("expected a descending sequence".into())),
        }
    }

    /// Dense `m x m` realization.
    pub fn to_dense(&self, m: usize) -> DenseMatrix {
        let mut p = DenseMatrix::identity(m);
        self.apply_to(&mut p).expect("sequence outside dense realization");
        p
    }

    /// Left-multiply `target` by this sequence.
    pub fn apply_to(&self, target: &mut DenseMatrix) -> Result<()> {
        for g in &self.rotations {
            apply_rotation_left(target, g)?;
        }
        Ok(())
    }
}

/// A product of sequences written left to right; the rightmost is applied first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RotationPattern {
    pub sequences: Vec<RotationSequence>,
}

impl RotationPattern {
    pub fn new(sequences: Vec<RotationSequence>) -> Self {
        RotationPattern { sequences }
    }

    pub fn rotation_count(&self) -> usize {
        self.sequences.iter().map(RotationSequence::len).sum()
    }

    pub fn to_dense(&self, m: usize) -> DenseMatrix {
        let mut p = DenseMatrix::identity(m);
        self.apply_to(&mut p).expect("pattern outside dense realization");
        p
    }

    pub fn apply_to(&self, target: &mut DenseMatrix) -> Result<()> {
        for seq in self.sequences.iter().rev() {
            seq.apply_to(target)?;
        }
        Ok(())
    }

    /// Arrow diagram: one line per row, one column per sequence; `⌒` marks a rotation
    /// whose upper row is that line.
    pub fn arrow_diagram(&self, m: usize) -> String {
        let mut out = String::new();
        for row in 0..m {
            for (j, seq) in self.sequences.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                let hit = seq.rotations.iter().any(|g| g.row == row);
                out.push(if hit { '⌒' } else { '·' });
            }
            let _ = writeln!(out);
        }
        out
    }
}

/// Rewrite `s` descending sequences that all start at the same row `r`, with lengths
/// `l, l+1, ..., l+s-1` from left to right, into one sequence of length `l+s-1` from
/// row `r` followed by `s-1` sequences starting at row `r+1`.
pub fn reorder_first_row(pattern: &RotationPattern) -> Result<RotationPattern> {
    let seqs = &pattern.sequences;
    if seqs.len() <= 1 {
        return Ok(pattern.clone());
    }
    let start = seqs[0].start();
    for (j, seq) in seqs.iter().enumerate() {
        seq.require_descending()?;
        if seq.start() != start {
            return Err(Error::SequenceShape(format!(
                "sequence {j} starts at row {}, expected {start}",
                seq.start()
            )));
        }
        if j > 0 && seq.len() != seqs[j - 1].len() + 1 {
            return Err(Error::SequenceShape(format!(
                "sequence {j} has length {}, expected {}",
                seq.len(),
                seqs[j - 1].len() + 1
            )));
        }
    }
    let mut work: Vec<Vec<Coeffs>> = seqs.iter().map(RotationSequence::coeffs).collect();
    reorder_coeffs(&mut work)?;
    let mut out = Vec::with_capacity(work.len());
    for (j, cs) in work.iter().enumerate() {
        let row = if j == 0 { start } else { start + 1 };
        out.push(RotationSequence::descending_from(row, cs));
    }
    Ok(RotationPattern::new(out))
}

/// In-place pairwise higher shift-through from right to left. On return `seqs[0]`
/// starts at the common row and the rest start one row lower.
pub(crate) fn reorder_coeffs(seqs: &mut [Vec<Coeffs>]) -> Result<usize> {
    let mut lemmas = 0;
    for j in (0..seqs.len().saturating_sub(1)).rev() {
        let (nl, nr) = shift_through_higher_coeffs(&seqs[j], &seqs[j + 1])?;
        lemmas += seqs[j].len();
        seqs[j] = nl;
        seqs[j + 1] = nr;
    }
    Ok(lemmas)
}
