use super::{num_gcd, BandOperator};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// Operator without junctions or overrides; the window repeats with `period`.
    Periodic,
    /// Window entirely left of every junction and override.
    Left,
    /// Window touching a junction or override column.
    Junction,
    /// Window entirely right of every junction and override.
    Right,
}

/// A representative window position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub k: i64,
    pub region: Region,
    /// Period of the window in `k` within its region (unused for junction windows).
    pub period: usize,
}

impl Position {
    /// Whether this window stands for some window at a position `k' ≡ c (mod b)`.
    ///
    /// A junction window only stands for itself. A window in a periodic region equals
    /// every window at `k + period * z`, and such a `k'` exists exactly when
    /// `k ≡ c (mod gcd(period, b))`.
    pub fn covers_offset(&self, b: usize, c: usize) -> bool {
        match self.region {
            Region::Junction => self.k.rem_euclid(b as i64) as usize == c,
            _ => {
                let g = num_gcd(self.period, b) as i64;
                (self.k - c as i64).rem_euclid(g) == 0
            }
        }
    }
}

/// Consecutive representative positions; every window of the operator equals the
/// window at one of them.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionSet {
    pub positions: Vec<Position>,
    pub covers_all: bool,
}

impl PositionSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn first_k(&self) -> i64 {
        self.positions[0].k
    }

    pub fn last_k(&self) -> i64 {
        self.positions[self.positions.len() - 1].k
    }

    pub fn for_offset(&self, b: usize, c: usize) -> impl Iterator<Item = &Position> {
        self.positions.iter().filter(move |p| p.covers_offset(b, c))
    }

    /// The listed representative whose window equals the window at `k`.
    pub fn representative(&self, k: i64) -> Option<&Position> {
        if let Some(p) = self.positions.iter().find(|p| p.k == k) {
            return Some(p);
        }
        let region = if k < self.first_k() { Region::Left } else { Region::Right };
        self.positions
            .iter()
            .filter(|p| p.region == region || p.region == Region::Periodic)
            .find(|p| (p.k - k).rem_euclid(p.period as i64) == 0)
    }
}

/// Representative positions for windows of width `n`. The list is contiguous in `k`.
pub fn enumerate_positions(op: &BandOperator, n: usize) -> Result<PositionSet> {
    if n == 0 {
        return Err(Error::InvalidOperator("window width must be positive".into()));
    }
    let (splits, cols) = op.irregular_columns();
    if splits.is_empty() && cols.is_empty() {
        let p = op.left_period();
        let positions = (0..p as i64).map(|k| Position { k, region: Region::Periodic, period: p }).collect();
        return Ok(PositionSet { positions, covers_all: true });
    }
    // columns < left_bound are in the left regime, columns > right_bound in the right one
    let left_bound = splits.iter().chain(cols.iter()).copied().min().expect("nonempty");
    let right_bound = splits.iter().map(|s| s - 1).chain(cols.iter().copied()).max().expect("nonempty");
    let (pl, pr) = (op.left_period(), op.right_period());
    let n = n as i64;
    let mut positions = Vec::new();
    let first_mid = left_bound - n + 1;
    for k in first_mid - pl as i64..first_mid {
        positions.push(Position { k, region: Region::Left, period: pl });
    }
    for k in first_mid..=right_bound {
        positions.push(Position { k, region: Region::Junction, period: 0 });
    }
    for k in right_bound + 1..=right_bound + pr as i64 {
        positions.push(Position { k, region: Region::Right, period: pr });
    }
    Ok(PositionSet { positions, covers_all: true })
}
