use super::{qh_factorize, QHState, TriangularFactor};
use crate::error::Result;
use crate::operator::{BandOperator, WindowMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// When to throw the recycled factorization away and start from a fresh one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestartPolicy {
    /// Only the first window is factorized from scratch.
    Never,
    /// Fresh factorization every `r` windows; `Every(1)` is the naive method.
    Every(usize),
    /// Time the first `2d` steps, then pick `r` with [`estimate_restart_period`].
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Fresh,
    Advance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: i64,
    pub step_kind: StepKind,
    pub rotations_applied: u64,
    pub wall_time_ns: u64,
}

/// Restart period minimizing the modeled time of `k_max` consecutive windows.
///
/// A cycle of length `r` costs `initial_cost` plus the costs of its steps `2..=r`;
/// step `s` costs `step_costs[s - 2]`, and the last entry is reused once the
/// measurements run out. Ties go to the larger `r`.
pub fn estimate_restart_period(initial_cost: f64, step_costs: &[f64], k_max: usize) -> usize {
    if k_max < 2 || step_costs.is_empty() {
        return k_max.max(1);
    }
    let step = |s: usize| step_costs[(s - 2).min(step_costs.len() - 1)];
    let cycle = |len: usize| initial_cost + (2..=len).map(step).sum::<f64>();
    let mut best = (f64::INFINITY, k_max);
    for r in 2..=k_max {
        let full = k_max / r;
        let rem = k_max % r;
        let mut total = full as f64 * cycle(r);
        if rem > 0 {
            total += cycle(rem);
        }
        if total <= best.0 {
            best = (total, r);
        }
    }
    best.1
}

/// Iterator over the triangular factors of the windows at consecutive positions.
pub struct WindowRun<'a> {
    op: &'a BandOperator,
    lambda: Complex64,
    n: usize,
    next_k: i64,
    end_k: i64,
    policy: RestartPolicy,
    period: Option<usize>,
    state: Option<QHState>,
    timings: Vec<f64>,
    failed: bool,
}

/// Factors of the windows at `k_start .. k_start + count`.
pub fn run_sequence(
    op: &BandOperator,
    lambda: Complex64,
    k_start: i64,
    count: usize,
    n: usize,
    policy: RestartPolicy,
) -> WindowRun<'_> {
    let period = match policy {
        RestartPolicy::Never => None,
        RestartPolicy::Every(r) => Some(r.max(1)),
        RestartPolicy::Auto => None,
    };
    WindowRun {
        op,
        lambda,
        n,
        next_k: k_start,
        end_k: k_start + count as i64,
        policy,
        period,
        state: None,
        timings: Vec::new(),
        failed: false,
    }
}

impl WindowRun<'_> {
    fn fresh_due(&self) -> bool {
        match (&self.state, self.period) {
            (None, _) => true,
            (Some(s), Some(r)) => s.step_index() + 1 >= r,
            (Some(_), None) => false,
        }
    }

    fn step(&mut self) -> Result<(i64, TriangularFactor, StepRecord)> {
        let k = self.next_k;
        let t0 = Instant::now();
        let fresh = self.fresh_due();
        let (before, state) = if fresh {
            let w = WindowMatrix::extract(self.op, self.lambda, k, self.n);
            let s = qh_factorize(&w);
            (Default::default(), self.state.insert(s))
        } else {
            let s = self.state.as_mut().expect("state present after first step");
            let before = s.counters();
            s.advance_with(self.op)?;
            (before, s)
        };
        let (r, completion) = state.complete_qr_counted();
        let rotations = (state.counters() - before).rotations_applied + completion;
        let elapsed = t0.elapsed().as_nanos() as u64;
        self.next_k += 1;

        if self.policy == RestartPolicy::Auto && self.period.is_none() {
            self.timings.push(elapsed as f64);
            let d = self.op.bandwidth();
            if self.timings.len() >= (2 * d).max(2) {
                let total = (self.end_k - self.next_k + self.timings.len() as i64) as usize;
                let r = estimate_restart_period(self.timings[0], &self.timings[1..], total);
                self.period = Some(r);
            }
        }
        let record = StepRecord {
            k,
            step_kind: if fresh { StepKind::Fresh } else { StepKind::Advance },
            rotations_applied: rotations,
            wall_time_ns: elapsed,
        };
        Ok((k, r, record))
    }
}

impl Iterator for WindowRun<'_> {
    type Item = Result<(i64, TriangularFactor, StepRecord)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.next_k >= self.end_k {
            return None;
        }
        let out = self.step();
        self.failed = out.is_err();
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end_k - self.next_k).max(0) as usize;
        (left, Some(left))
    }
}
