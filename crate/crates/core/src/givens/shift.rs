use super::{Coeffs, GivensRotation, RotationSequence, RENORMALIZE_DRIFT};
use crate::error::{Error, Result};
use num_complex::Complex64;

type M3 = [[Complex64; 3]; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn identity3() -> M3 {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    [[o, z, z], [z, o, z], [z, z, o]]
}

/// Left-multiply rows `(r, r+1)` of a 3x3 by the rotation.
#[inline]
fn rotate(m: &mut M3, r: usize, g: Coeffs) {
    for j in 0..3 {
        let (x, y) = g.apply(m[r][j], m[r + 1][j]);
        m[r][j] = x;
        m[r + 1][j] = y;
    }
}

/// `a b c` where `a` and `c` act on rows `(1, 2)` and `b` on rows `(0, 1)`, rewritten
/// as `d e f` with `d`, `f` on rows `(0, 1)` and `e` on rows `(1, 2)`.
pub(crate) fn lemma_up(a: Coeffs, b: Coeffs, c: Coeffs) -> (Coeffs, Coeffs, Coeffs) {
    let mut u = identity3();
    rotate(&mut u, 1, c);
    rotate(&mut u, 0, b);
    rotate(&mut u, 1, a);
    let g = Coeffs::zeroing_first(u[0][2], u[1][2]);
    rotate(&mut u, 0, g);
    let f = Coeffs::new(u[0][0], u[0][1]).renormalized();
    let e = Coeffs::new(-u[1][0] * f.s + u[1][1] * f.c, u[1][2]).renormalized();
    (g.adjoint(), e, f)
}

/// `a b c` where `a` and `c` act on rows `(0, 1)` and `b` on rows `(1, 2)`, rewritten
/// as `d e f` with `d`, `f` on rows `(1, 2)` and `e` on rows `(0, 1)`.
///
/// Works on the product `U = a b c` entry by entry: `d^H` clears `U[2][0]`, after which
/// `e` is read off the first column and `f` off the remaining block.
#[inline]
pub(crate) fn lemma_down(a: Coeffs, b: Coeffs, c: Coeffs) -> (Coeffs, Coeffs, Coeffs) {
    let (ac, as_) = (a.c, a.s);
    let (bc, bs) = (b.c, b.s);
    let (cc, cs) = (c.c, c.s);
    let r1 = [-bc * cs.conj(), bc * cc.conj(), bs];
    let r2 = [bs.conj() * cs.conj(), -bs.conj() * cc.conj(), bc.conj()];
    let u0 = [ac * cc + as_ * r1[0], ac * cs + as_ * r1[1], as_ * r1[2]];
    let (nas, nac) = (-as_.conj(), ac.conj());
    let u1 = [nas * cc + nac * r1[0], nas * cs + nac * r1[1], nac * r1[2]];

    let rho = (u1[0].norm_sqr() + r2[0].norm_sqr()).sqrt();
    let (g, w1) = if r2[0] == ZERO || rho == 0.0 {
        (Coeffs::IDENTITY, u1)
    } else {
        let inv = 1.0 / rho;
        let (gc, gs) = (u1[0].conj() * inv, r2[0].conj() * inv);
        (Coeffs { c: gc, s: gs }, [Complex64::new(rho, 0.0), gc * u1[1] + gs * r2[1], gc * u1[2] + gs * r2[2]])
    };
    let e = unit(u0[0], -w1[0].conj());
    let es = e.s.conj();
    let f = unit(es * u0[1] + e.c * w1[1], es * u0[2] + e.c * w1[2]);
    (g.adjoint(), e, f)
}

#[inline]
fn unit(c: Complex64, s: Complex64) -> Coeffs {
    let n2 = c.norm_sqr() + s.norm_sqr();
    if (n2 - 1.0).abs() > RENORMALIZE_DRIFT && n2 > 0.0 {
        let inv = 1.0 / n2.sqrt();
        Coeffs { c: c * inv, s: s * inv }
    } else {
        Coeffs { c, s }
    }
}

/// Product `a b` of two rotations on the same rows.
pub(crate) fn merge(a: Coeffs, b: Coeffs) -> Coeffs {
    Coeffs::new(a.c * b.c - a.s * b.s.conj(), a.c * b.s + a.s * b.c.conj()).renormalized()
}

/// Rewrite `G_{i+1} G_i G_{i+1}` as `G_i G_{i+1} G_i`.
pub fn shift_through(
    ga: GivensRotation,
    gb: GivensRotation,
    gc: GivensRotation,
) -> Result<(GivensRotation, GivensRotation, GivensRotation)> {
    if ga.row != gc.row || ga.row != gb.row + 1 {
        return Err(Error::SequenceShape(format!(
            "expected rows (i+1, i, i+1), got ({}, {}, {})",
            ga.row, gb.row, gc.row
        )));
    }
    let (d, e, f) = lemma_up(ga.coeffs(), gb.coeffs(), gc.coeffs());
    Ok((d.at(gb.row), e.at(ga.row), f.at(gb.row)))
}

/// Rewrite `G_i G_{i+1} G_i` as `G_{i+1} G_i G_{i+1}`.
pub fn shift_through_down(
    ga: GivensRotation,
    gb: GivensRotation,
    gc: GivensRotation,
) -> Result<(GivensRotation, GivensRotation, GivensRotation)> {
    if ga.row != gc.row || gb.row != ga.row + 1 {
        return Err(Error::SequenceShape(format!(
            "expected rows (i, i+1, i), got ({}, {}, {})",
            ga.row, gb.row, gc.row
        )));
    }
    let (d, e, f) = lemma_down(ga.coeffs(), gb.coeffs(), gc.coeffs());
    Ok((d.at(gb.row), e.at(ga.row), f.at(gb.row)))
}

/// Coefficient-level form of [`shift_through_higher`]. Both inputs start at the same
/// row; entry `p` acts `p` rows below it. The returned right sequence starts one row
/// lower.
pub(crate) fn shift_through_higher_coeffs(
    left: &[Coeffs],
    right: &[Coeffs],
) -> Result<(Vec<Coeffs>, Vec<Coeffs>)> {
    let l = left.len();
    if right.len() < l {
        return Err(Error::SequenceShape(format!(
            "right sequence (length {}) shorter than left (length {l})",
            right.len()
        )));
    }
    if l == 0 {
        return Ok((right.to_vec(), Vec::new()));
    }
    let mut new_left = Vec::with_capacity(right.len());
    let mut new_right = Vec::with_capacity(l);
    let mut carry = right[0];
    for i in 0..l {
        if i + 1 < right.len() {
            let (a, b, c) = lemma_down(left[i], right[i + 1], carry);
            new_left.push(b);
            new_right.push(c);
            carry = a;
        } else {
            new_left.push(merge(left[i], carry));
            return Ok((new_left, new_right));
        }
    }
    new_left.push(carry);
    new_left.extend_from_slice(&right[l + 1..]);
    Ok((new_left, new_right))
}

/// `(G_{l} ... G_1)(G_{l+t} ... G_1) = (G_{l+t} ... G_1)(G_{l+1} ... G_2)` for descending
/// sequences starting at the same row. With `t = 0` the trailing pair merges and the
/// new right sequence has length `l - 1`.
pub fn shift_through_higher(
    left: &RotationSequence,
    right: &RotationSequence,
) -> Result<(RotationSequence, RotationSequence)> {
    left.require_descending()?;
    right.require_descending()?;
    if left.start() != right.start() {
        return Err(Error::SequenceShape(format!(
            "sequences start at rows {} and {}",
            left.start(),
            right.start()
        )));
    }
    let (nl, nr) = shift_through_higher_coeffs(&left.coeffs(), &right.coeffs())?;
    Ok((
        RotationSequence::descending_from(left.start(), &nl),
        RotationSequence::descending_from(left.start() + 1, &nr),
    ))
}
