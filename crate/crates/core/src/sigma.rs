//! Smallest singular value of a banded triangular factor by Golub-Kahan-Lanczos
//! bidiagonalization of its inverse.

use crate::error::{Error, Result};
use crate::qh::TriangularFactor;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use crate::dense::singular_values as dense_svd_oracle;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Diagonal entries below this magnitude make a solve fail with `NearSingular`.
pub const UNDERFLOW_GUARD: f64 = 1e-280;

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SigmaResult {
    pub sigma: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual of the Ritz pair for the inverse relative to its Ritz value,
    /// `beta_k |x_k| / theta`. The Ritz value error is roughly its square, so a
    /// converged result has `residual <= sqrt(tol)`.
    pub residual: f64,
}

fn check_diagonal(r: &TriangularFactor, i: usize) -> Result<Complex64> {
    let v = r.diagonal(i);
    let m = v.norm();
    if !(m >= UNDERFLOW_GUARD) {
        return Err(Error::NearSingular { index: i, magnitude: m });
    }
    Ok(v)
}

/// Solve `R x = rhs`.
pub fn back_substitute(r: &TriangularFactor, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut x = rhs.to_vec();
    back_substitute_in_place(r, &mut x)?;
    Ok(x)
}

fn back_substitute_in_place(r: &TriangularFactor, x: &mut [Complex64]) -> Result<()> {
    let n = r.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    for i in (0..n).rev() {
        let row = r.row(i);
        let hi = (n - i).min(row.len());
        let mut acc = x[i];
        for (a, b) in row[1..hi].iter().zip(&x[i + 1..i + hi]) {
            acc -= a * b;
        }
        x[i] = acc / check_diagonal(r, i)?;
    }
    Ok(())
}

/// Solve `R^H y = rhs`.
pub fn forward_substitute_adjoint(r: &TriangularFactor, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut y = rhs.to_vec();
    forward_substitute_adjoint_in_place(r, &mut y)?;
    Ok(y)
}

fn forward_substitute_adjoint_in_place(r: &TriangularFactor, y: &mut [Complex64]) -> Result<()> {
    let n = r.n();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    for i in 0..n {
        let yi = y[i] / check_diagonal(r, i)?.conj();
        y[i] = yi;
        let row = r.row(i);
        let hi = (n - i).min(row.len());
        for (t, a) in y[i + 1..i + hi].iter_mut().zip(&row[1..hi]) {
            *t -= a.conj() * yi;
        }
    }
    Ok(())
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

/// Two passes of classical Gram-Schmidt against `basis`.
fn reorthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for q in basis {
            let h = dot(q, v);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= h * y;
            }
        }
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(diag, off)` below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let o = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { o / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix.
/// `floor` is a known lower bound (the previous, interlacing Ritz value).
fn largest_eigenvalue(diag: &[f64], off: &[f64], floor: f64) -> f64 {
    let k = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < k { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    if floor > lo && floor < hi && sturm_count(diag, off, floor) < k {
        lo = floor;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) < k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Unit eigenvector of the tridiagonal for eigenvalue `mu` by inverse iteration.
fn tridiagonal_eigenvector(diag: &[f64], off: &[f64], mu: f64) -> Vec<f64> {
    let k = diag.len();
    if k == 1 {
        return vec![1.0];
    }
    let scale = diag.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let shift = mu + scale * 1e-15;
    // LU with partial pivoting of T - shift; U has two superdiagonals
    let mut u0: Vec<f64> = diag.iter().map(|x| x - shift).collect();
    let mut u1: Vec<f64> = off.to_vec();
    u1.push(0.0);
    let mut u2 = vec![0.0; k];
    let mut l = vec![0.0; k];
    let mut swap = vec![false; k];
    for i in 0..k - 1 {
        let below = off[i];
        if below.abs() > u0[i].abs() {
            swap[i] = true;
            let next_diag = u0[i + 1];
            let next_off = if i + 1 < k - 1 { u1[i + 1] } else { 0.0 };
            let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
            u0[i] = below;
            u1[i] = next_diag;
            u2[i] = next_off;
            let f = a0 / below;
            l[i] = f;
            u0[i + 1] = a1 - f * next_diag;
            u1[i + 1] = a2 - f * next_off;
        } else {
            let piv = if u0[i] == 0.0 { f64::EPSILON * scale } else { u0[i] };
            u0[i] = piv;
            let f = below / piv;
            l[i] = f;
            u0[i + 1] -= f * u1[i];
            if i + 1 < k - 1 {
                u1[i + 1] -= f * u2[i];
            }
        }
    }
    if u0[k - 1] == 0.0 {
        u0[k - 1] = f64::EPSILON * scale;
    }
    let mut x = vec![1.0; k];
    for _ in 0..3 {
        for i in 0..k - 1 {
            if swap[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= l[i] * x[i];
        }
        for i in (0..k).rev() {
            let mut acc = x[i];
            if i + 1 < k {
                acc -= u1[i] * x[i + 1];
            }
            if i + 2 < k {
                acc -= u2[i] * x[i + 2];
            }
            x[i] = acc / u0[i];
        }
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !nx.is_finite() || nx == 0.0 {
            break;
        }
        x.iter_mut().for_each(|v| *v /= nx);
    }
    x
}

fn random_unit(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let s = norm(&v);
    v.iter_mut().for_each(|z| *z /= s);
    v
}

fn min_diagonal(r: &TriangularFactor) -> f64 {
    (0..r.n()).map(|i| r.diagonal(i).norm()).fold(f64::INFINITY, f64::min)
}

/// `sigma_min(R)` with relative accuracy about `tol`. Pass `max_iter = 0` for the default `4n`.
pub fn smallest_singular_value(r: &TriangularFactor, tol: f64, max_iter: usize, seed: u64) -> SigmaResult {
    smallest_singular_value_from(r, tol, max_iter, &random_unit(r.n(), seed))
}

/// As [`smallest_singular_value`] with an explicit start vector.
pub fn smallest_singular_value_from(r: &TriangularFactor, tol: f64, max_iter: usize, start: &[Complex64]) -> SigmaResult {
    smallest_singular_pair(r, tol, max_iter, start).0
}

/// Also returns the approximate right singular vector for `sigma`, when one was formed.
pub fn smallest_singular_pair(
    r: &TriangularFactor,
    tol: f64,
    max_iter: usize,
    start: &[Complex64],
) -> (SigmaResult, Option<Vec<Complex64>>) {
    match gklb(r, tol, max_iter, start) {
        Ok((res, v)) if res.sigma.is_finite() => (res, v),
        Ok((res, _)) => (SigmaResult { sigma: 0.0, converged: false, ..res }, None),
        Err(_) => {
            let m = min_diagonal(r);
            let res =
                SigmaResult { sigma: if m.is_finite() { m } else { 0.0 }, iterations: 0, converged: false, residual: f64::INFINITY };
            (res, None)
        }
    }
}

/// Above this size only the three-term recurrence keeps the bases orthogonal; the
/// largest Ritz value still converges, and memory stays O(n).
pub const FULL_REORTH_MAX_N: usize = 512;

/// Coefficients of `y = B^T x / theta`.
fn ritz_coefficients(alphas: &[f64], betas: &[f64], x: &[f64], theta: f64) -> Vec<f64> {
    (0..alphas.len())
        .map(|j| (alphas[j] * x[j] + if j > 0 { betas[j - 1] * x[j - 1] } else { 0.0 }) / theta)
        .collect()
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (u, v) in y.iter_mut().zip(x) {
        *u += a * v;
    }
}

type Pair = (SigmaResult, Option<Vec<Complex64>>);

struct Bidiag<'a> {
    r: &'a TriangularFactor,
    full: bool,
    qs: Vec<Vec<Complex64>>,
    ps: Vec<Vec<Complex64>>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
}

impl Bidiag<'_> {
    /// One step from the unit vector `q`: returns `alpha` and the unnormalized next `q`.
    fn step(&mut self, q: Vec<Complex64>, p_prev: Option<&[Complex64]>) -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
        let mut p = q.clone();
        forward_substitute_adjoint_in_place(self.r, &mut p)?;
        if let (Some(prev), Some(&b)) = (p_prev, self.betas.last()) {
            axpy(&mut p, Complex64::new(-b, 0.0), prev);
        }
        if self.full {
            reorthogonalize(&mut p, &self.ps);
        }
        let alpha = norm(&p);
        p.iter_mut().for_each(|z| *z /= alpha);
        let mut qn = p.clone();
        back_substitute_in_place(self.r, &mut qn)?;
        axpy(&mut qn, Complex64::new(-alpha, 0.0), &q);
        if self.full {
            reorthogonalize(&mut qn, &self.qs);
            reorthogonalize(&mut qn, std::slice::from_ref(&q));
        }
        Ok((p, qn, alpha))
    }
}

/// Without reorthogonalization the basis is still kept for the Ritz vector while it
/// fits in this many entries; beyond that the recurrence is replayed.
const KEEP_BASIS_ENTRIES: usize = 1 << 21;

fn gklb(r: &TriangularFactor, tol: f64, max_iter: usize, start: &[Complex64]) -> Result<Pair> {
    let n = r.n();
    if start.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: start.len() });
    }
    let full = n <= FULL_REORTH_MAX_N;
    let max_iter = if max_iter == 0 { 4 * n } else { max_iter }.max(1);
    let max_iter = if full { max_iter.min(n) } else { max_iter };
    let mut q = start.to_vec();
    let s = norm(&q);
    if !(s > 0.0 && s.is_finite()) {
        q = random_unit(n, 0);
    } else {
        q.iter_mut().for_each(|z| *z /= s);
    }
    let q0 = q.clone();
    let mut bd = Bidiag { r, full, qs: Vec::new(), ps: Vec::new(), alphas: Vec::new(), betas: Vec::new() };
    let mut p_prev: Option<Vec<Complex64>> = None;
    let mut theta_prev = 0.0;
    let mut mu_prev = 0.0;
    let mut calm = 0;
    let mut kept = true;
    let failed = |it| Ok((SigmaResult { sigma: 0.0, iterations: it, converged: false, residual: f64::INFINITY }, None));

    for it in 1..=max_iter {
        let (p, qn, alpha) = bd.step(q.clone(), p_prev.as_deref())?;
        let beta = norm(&qn);
        if !alpha.is_finite() || !beta.is_finite() || alpha == 0.0 {
            return failed(it);
        }
        bd.alphas.push(alpha);
        if full {
            bd.qs.push(q);
            bd.ps.push(p.clone());
        } else if kept {
            kept = (bd.qs.len() + 1) * n <= KEEP_BASIS_ENTRIES;
            if kept {
                bd.qs.push(q);
            } else {
                bd.qs = Vec::new();
            }
        }
        p_prev = Some(p);

        // T = B B^T with B upper bidiagonal (alpha, beta)
        let (alphas, betas) = (&bd.alphas, &bd.betas);
        let k = alphas.len();
        let diag: Vec<f64> = (0..k).map(|i| alphas[i] * alphas[i] + if i + 1 < k { betas[i] * betas[i] } else { 0.0 }).collect();
        let off: Vec<f64> = (0..k - 1).map(|i| betas[i] * alphas[i + 1]).collect();
        let mu = largest_eigenvalue(&diag, &off, mu_prev);
        mu_prev = mu;
        let theta = mu.max(0.0).sqrt();
        let x = tridiagonal_eigenvector(&diag, &off, mu);
        let residual = beta * x[k - 1].abs() / theta;

        let change = (theta - theta_prev).abs() / theta;
        calm = if change < tol { calm + 1 } else { 0 };
        theta_prev = theta;
        let invariant = beta <= f64::EPSILON * theta;
        let converged = invariant || (calm >= 2 && residual <= tol.sqrt()) || (full && it == n);
        if converged || it == max_iter {
            let res = SigmaResult { sigma: 1.0 / theta, iterations: it, converged, residual };
            let y = ritz_coefficients(alphas, betas, &x, theta);
            let v = if full || kept { combine(&bd.qs, &y) } else { replay(r, &q0, &bd.alphas, &bd.betas, &y)? };
            return Ok((res, Some(v)));
        }
        bd.betas.push(beta);
        q = qn;
        q.iter_mut().for_each(|z| *z /= beta);
    }
    unreachable!("the loop returns on its last iteration")
}

fn combine(qs: &[Vec<Complex64>], y: &[f64]) -> Vec<Complex64> {
    let mut v = vec![ZERO; qs[0].len()];
    for (q, &c) in qs.iter().zip(y) {
        axpy(&mut v, Complex64::new(c, 0.0), q);
    }
    v
}

/// Rerun the recurrence with the recorded coefficients to form `sum_j y_j q_j`
/// without having stored the basis.
fn replay(r: &TriangularFactor, q0: &[Complex64], alphas: &[f64], betas: &[f64], y: &[f64]) -> Result<Vec<Complex64>> {
    let mut v = vec![ZERO; q0.len()];
    let mut q = q0.to_vec();
    let mut p_prev: Option<Vec<Complex64>> = None;
    for j in 0..y.len() {
        axpy(&mut v, Complex64::new(y[j], 0.0), &q);
        if j + 1 == y.len() {
            break;
        }
        let mut p = q.clone();
        forward_substitute_adjoint_in_place(r, &mut p)?;
        if let Some(prev) = &p_prev {
            axpy(&mut p, Complex64::new(-betas[j - 1], 0.0), prev);
        }
        p.iter_mut().for_each(|z| *z /= alphas[j]);
        let mut qn = p.clone();
        back_substitute_in_place(r, &mut qn)?;
        axpy(&mut qn, Complex64::new(-alphas[j], 0.0), &q);
        qn.iter_mut().for_each(|z| *z /= betas[j]);
        p_prev = Some(p);
        q = qn;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_extremes() {
        let diag = [2.0, 2.0, 2.0, 2.0];
        let off = [-1.0, -1.0, -1.0];
        let mu = largest_eigenvalue(&diag, &off, 0.0);
        let exact = 2.0 + 2.0 * (4.0 * std::f64::consts::PI / 5.0).cos().abs();
        assert!((mu - exact).abs() < 1e-13);
        let x = tridiagonal_eigenvector(&diag, &off, mu);
        for i in 0..4 {
            let tx = diag[i] * x[i] + if i > 0 { off[i - 1] * x[i - 1] } else { 0.0 } + if i < 3 { off[i] * x[i + 1] } else { 0.0 };
            assert!((tx - mu * x[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn sturm_counts_diagonal() {
        assert_eq!(sturm_count(&[1.0, 3.0, 5.0], &[0.0, 0.0], 4.0), 2);
    }
}
