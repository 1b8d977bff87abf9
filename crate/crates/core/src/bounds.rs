//! Lower and upper pseudospectrum bound functions assembled from window singular values.

use crate::error::{Error, Result};
use crate::operator::{block_norm_sup, enumerate_positions, BandOperator, Position, PositionSet};
use crate::qh::{run_sequence, RestartPolicy};
use crate::qh::TriangularFactor;
use crate::sigma::{forward_substitute_adjoint, smallest_singular_pair, DEFAULT_TOL};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Settings of the singular value solver used for every window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub tol: f64,
    /// Zero means `4n`.
    pub max_iter: usize,
    pub seed: u64,
    pub restart: RestartPolicy,
    /// Start each window from the previous window's singular vector, shifted by one.
    pub warm_start: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: DEFAULT_TOL, max_iter: 0, seed: 1, restart: RestartPolicy::Never, warm_start: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundConfig {
    pub b: usize,
    pub blocks: usize,
    /// `None` means every offset `0..b`.
    pub offsets: Option<Vec<usize>>,
    pub eps_list: Vec<f64>,
    pub eta_d: f64,
    /// Computed from the operator when `None`.
    pub delta_n: Option<f64>,
    pub solver: SolverOptions,
}

impl BoundConfig {
    /// Block size `b = d`, all offsets.
    pub fn new(op: &BandOperator, blocks: usize) -> Self {
        BoundConfig {
            b: op.bandwidth().max(1),
            blocks,
            offsets: None,
            eps_list: Vec::new(),
            eta_d: 0.0,
            delta_n: None,
            solver: SolverOptions::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.b * self.blocks
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.offsets.clone().unwrap_or_else(|| (0..self.b).collect())
    }

    pub fn validate(&self, op: &BandOperator) -> Result<()> {
        let bad = |m: String| Err(Error::config("bounds", m));
        if self.b < op.bandwidth() || self.b == 0 {
            return bad(format!("block size {} must be at least the bandwidth {} and positive", self.b, op.bandwidth()));
        }
        if self.blocks == 0 {
            return bad("block count must be at least 1".into());
        }
        if let Some(o) = &self.offsets {
            if o.is_empty() || o.iter().any(|&c| c >= self.b) {
                return bad(format!("offsets must be a nonempty subset of 0..{}", self.b));
            }
        }
        if !(self.eta_d >= 0.0) {
            return bad("eta_d must be nonnegative".into());
        }
        if let Some(&e) = self.eps_list.iter().find(|&&e| !(e > self.eta_d)) {
            return bad(format!("every eps must exceed eta_d = {} (got {e})", self.eta_d));
        }
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) {
            return bad("solver tolerance must lie in (0, 1)".into());
        }
        Ok(())
    }

    /// The configured `delta_N`, or the one implied by the operator.
    pub fn resolve_delta(&self, op: &BandOperator) -> f64 {
        self.delta_n.unwrap_or_else(|| self.offsets().into_iter().map(|c| delta_bound(op, self.b, c, self.blocks)).fold(0.0, f64::max))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub lambda: Complex64,
    pub f_l: f64,
    pub f_u: f64,
    /// `(offset, inf over windows aligned with it)`.
    pub per_offset: Vec<(usize, f64)>,
    pub eta_d: f64,
    pub delta_n: f64,
    pub tol: f64,
}

/// Flat output record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub re: f64,
    pub im: f64,
    #[serde(rename = "F_l")]
    pub f_l: f64,
    #[serde(rename = "F_u")]
    pub f_u: f64,
    pub eta_d: f64,
    #[serde(rename = "delta_N")]
    pub delta_n: f64,
}

impl BoundReport {
    pub fn record(&self) -> BoundRecord {
        BoundRecord {
            re: self.lambda.re,
            im: self.lambda.im,
            f_l: self.f_l,
            f_u: self.f_u,
            eta_d: self.eta_d,
            delta_n: self.delta_n,
        }
    }

    /// `lambda` lies in the lower set, a subset of the eps-pseudospectrum.
    pub fn in_lower_set(&self, eps: f64) -> bool {
        self.f_l < eps - self.eta_d
    }

    /// `lambda` lies in the upper set, a superset of the eps-pseudospectrum. The window
    /// values overestimate by up to the solver tolerance, which is removed first.
    pub fn in_upper_set(&self, eps: f64) -> bool {
        self.backed_off(self.f_u) < eps + self.eta_d + self.delta_n
    }

    pub fn offset_value(&self, c: usize) -> Option<f64> {
        self.per_offset.iter().find(|(o, _)| *o == c).map(|(_, v)| *v)
    }

    pub fn in_lower_set_at(&self, c: usize, eps: f64) -> Option<bool> {
        self.offset_value(c).map(|v| v < eps - self.eta_d)
    }

    pub fn in_upper_set_at(&self, c: usize, eps: f64) -> Option<bool> {
        self.offset_value(c).map(|v| self.backed_off(v) < eps + self.eta_d + self.delta_n)
    }

    fn backed_off(&self, v: f64) -> f64 {
        v / (1.0 + 10.0 * self.tol)
    }
}

/// `2 (sup ||A_{l+1,l}|| + sup ||A_{l-1,l}||) sin(pi / (2N + 2))` for blocks of size `b`
/// aligned at `offset`.
pub fn delta_bound(op: &BandOperator, b: usize, offset: usize, blocks: usize) -> f64 {
    let (sub, sup) = block_norm_sup(op, b, offset);
    2.0 * (sub + sup) * (PI / (2.0 * blocks as f64 + 2.0)).sin()
}

/// Smallest singular values of the windows at every listed position, one QR stream
/// over the contiguous position range.
pub fn window_sigmas(
    op: &BandOperator,
    lambda: Complex64,
    n: usize,
    positions: &PositionSet,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let first = positions.first_k();
    let count = (positions.last_k() - first + 1) as usize;
    let mut out = Vec::with_capacity(count);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut prev: Option<Vec<Complex64>> = None;
    for (i, item) in run_sequence(op, lambda, first, count, n, opts.restart).enumerate() {
        let (_, r, _) = item.map_err(|e| match e {
            Error::SequenceShape(reason) => Error::Numerical { lambda: format!("{lambda}"), position: first + i as i64, reason },
            other => other,
        })?;
        let start = start_vector(&mut rng, &r, prev.as_deref().filter(|_| opts.warm_start));
        let (res, v) = smallest_singular_pair(&r, opts.tol, opts.max_iter, &start);
        prev = v;
        out.push(res.sigma);
    }
    Ok(out)
}

/// Random unit vector, or whichever of the previous singular vector and its copy moved
/// up one slot is stretched more by `R^{-H}`, with a small random component mixed in.
pub(crate) fn start_vector(rng: &mut ChaCha8Rng, r: &TriangularFactor, prev: Option<&[Complex64]>) -> Vec<Complex64> {
    let n = r.n();
    let mut v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let norm = |x: &[Complex64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let s = norm(&v);
    v.iter_mut().for_each(|z| *z /= s);
    let Some(p) = prev.filter(|p| p.len() == n) else { return v };
    let mut shifted = p[1..].to_vec();
    shifted.push(Complex64::new(0.0, 0.0));
    let stretch = |x: &[Complex64]| {
        let nx = norm(x);
        match forward_substitute_adjoint(r, x) {
            Ok(y) if nx > 0.0 => norm(&y) / nx,
            _ => 0.0,
        }
    };
    let best = if stretch(&shifted) > stretch(p) { &shifted[..] } else { p };
    let nb = norm(best);
    if !(nb > 0.0 && nb.is_finite()) {
        return v;
    }
    for (x, b) in v.iter_mut().zip(best) {
        *x = b / nb + WARM_MIX * *x;
    }
    v
}

/// Weight of the random part in a warm start vector.
const WARM_MIX: f64 = 1e-3;

/// Per-offset infima for the operator and its adjoint.
fn offset_infima(op: &BandOperator, lambda: Complex64, cfg: &BoundConfig) -> Result<Vec<(usize, f64)>> {
    let n = cfg.n();
    let adj = op.adjoint();
    let offsets = cfg.offsets();
    let mut inf = vec![f64::INFINITY; offsets.len()];
    for (a, mu) in [(op, lambda), (&adj, lambda.conj())] {
        let pos = enumerate_positions(a, n)?;
        let sig = window_sigmas(a, mu, n, &pos, &cfg.solver)?;
        for (p, s) in pos.positions.iter().zip(&sig) {
            fold_position(p, *s, cfg.b, &offsets, &mut inf);
        }
    }
    Ok(offsets.into_iter().zip(inf).collect())
}

fn fold_position(p: &Position, s: f64, b: usize, offsets: &[usize], inf: &mut [f64]) {
    for (slot, &c) in inf.iter_mut().zip(offsets) {
        if p.covers_offset(b, c) {
            *slot = slot.min(s);
        }
    }
}

/// `inf` over all windows of width `n` of `min(sigma(window of A), sigma(window of A*))`.
pub fn nu_window_inf(op: &BandOperator, lambda: Complex64, n: usize, opts: &SolverOptions) -> Result<f64> {
    let mut inf = f64::INFINITY;
    for (a, mu) in [(op.clone(), lambda), (op.adjoint(), lambda.conj())] {
        let pos = enumerate_positions(&a, n)?;
        for s in window_sigmas(&a, mu, n, &pos, opts)? {
            inf = inf.min(s);
        }
    }
    Ok(inf)
}

/// `F_l` and `F_u` at `lambda`.
pub fn evaluate_bounds(op: &BandOperator, lambda: Complex64, cfg: &BoundConfig) -> Result<BoundReport> {
    let delta = cfg.resolve_delta(op);
    evaluate_bounds_with_delta(op, lambda, cfg, delta)
}

/// As [`evaluate_bounds`] with `delta_N` already computed.
pub fn evaluate_bounds_with_delta(op: &BandOperator, lambda: Complex64, cfg: &BoundConfig, delta_n: f64) -> Result<BoundReport> {
    let per_offset = offset_infima(op, lambda, cfg)?;
    let f_l = per_offset.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let f_u = per_offset.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundReport { lambda, f_l, f_u, per_offset, eta_d: cfg.eta_d, delta_n, tol: cfg.solver.tol })
}
