//! Givens rotations on adjacent rows and the shift-through algebra on them.
//!
//! A rotation acting on rows `(i, i+1)` is the matrix `[[c, s], [-conj(s), conj(c)]]`.
//! Products are written in matrix order: in `A B C` the factor `C` is applied first.

mod pattern;
mod shift;

pub use pattern::{reorder_first_row, Direction, RotationPattern, RotationSequence};
pub use shift::{shift_through, shift_through_down, shift_through_higher};
pub(crate) use shift::shift_through_higher_coeffs;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use num_complex::Complex64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Drift in `|c|^2 + |s|^2` tolerated before renormalizing.
pub const RENORMALIZE_DRIFT: f64 = 1e-14;

/// The `(c, s)` pair of a rotation without its row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coeffs {
    pub c: Complex64,
    pub s: Complex64,
}

impl Coeffs {
    pub const IDENTITY: Coeffs = Coeffs { c: ONE, s: ZERO };

    pub fn new(c: Complex64, s: Complex64) -> Self {
        Coeffs { c, s }
    }

    /// Rotation mapping `(x, y)` to `(r, 0)` with `r = sqrt(|x|^2 + |y|^2)`.
    pub fn zeroing_second(x: Complex64, y: Complex64) -> Self {
        let (c, s) = compute_rotation(x, y);
        Coeffs { c, s }
    }

    /// Rotation mapping `(x, y)` to `(0, r)`.
    pub fn zeroing_first(x: Complex64, y: Complex64) -> Self {
        if x == ZERO {
            return Coeffs::IDENTITY;
        }
        let rho = x.norm().hypot(y.norm());
        Coeffs { c: y / rho, s: -x / rho }
    }

    #[inline]
    pub fn apply(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        (self.c * x + self.s * y, -self.s.conj() * x + self.c.conj() * y)
    }

    /// Inverse rotation, `[[conj(c), -s], [conj(s), c]]`.
    #[inline]
    pub fn adjoint(&self) -> Self {
        Coeffs { c: self.c.conj(), s: -self.s }
    }

    pub fn is_identity(&self) -> bool {
        self.s == ZERO && self.c == ONE
    }

    pub fn norm_defect(&self) -> f64 {
        (self.c.norm_sqr() + self.s.norm_sqr() - 1.0).abs()
    }

    pub fn renormalized(self) -> Self {
        if self.norm_defect() > RENORMALIZE_DRIFT {
            let n = self.c.norm().hypot(self.s.norm());
            Coeffs { c: self.c / n, s: self.s / n }
        } else {
            self
        }
    }

    pub fn at(self, row: usize) -> GivensRotation {
        GivensRotation { row, c: self.c, s: self.s }
    }
}

/// A rotation acting on rows `row` and `row + 1` (0-based).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GivensRotation {
    pub row: usize,
    pub c: Complex64,
    pub s: Complex64,
}

impl GivensRotation {
    pub fn new(row: usize, c: Complex64, s: Complex64) -> Self {
        GivensRotation { row, c, s }
    }

    pub fn identity(row: usize) -> Self {
        GivensRotation { row, c: ONE, s: ZERO }
    }

    pub fn coeffs(&self) -> Coeffs {
        Coeffs { c: self.c, s: self.s }
    }

    pub fn adjoint(&self) -> Self {
        self.coeffs().adjoint().at(self.row)
    }

    pub fn norm_defect(&self) -> f64 {
        self.coeffs().norm_defect()
    }

    /// The rotation embedded in an `m x m` identity.
    pub fn to_dense(&self, m: usize) -> DenseMatrix {
        let mut g = DenseMatrix::identity(m);
        let i = self.row;
        g[(i, i)] = self.c;
        g[(i, i + 1)] = self.s;
        g[(i + 1, i)] = -self.s.conj();
        g[(i + 1, i + 1)] = self.c.conj();
        g
    }
}

/// `(c, s)` such that the rotation maps `(x, y)` to `(r, 0)`, `r >= 0`. Returns the
/// identity when `y = 0`.
pub fn compute_rotation(x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    if y == ZERO {
        return (ONE, ZERO);
    }
    let rho = x.norm().hypot(y.norm());
    (x.conj() / rho, y.conj() / rho)
}

/// Rotate rows `g.row` and `g.row + 1` of `m` in place.
pub fn apply_rotation_left(m: &mut DenseMatrix, g: &GivensRotation) -> Result<()> {
    if g.row + 1 >= m.rows() {
        return Err(Error::RowOutOfRange { row: g.row + 1, rows: m.rows() });
    }
    let k = g.coeffs();
    let (top, bottom) = m.row_pair_mut(g.row, g.row + 1);
    for (x, y) in top.iter_mut().zip(bottom.iter_mut()) {
        let (nx, ny) = k.apply(*x, *y);
        *x = nx;
        *y = ny;
    }
    Ok(())
}

/// Dense product of rotations written left to right (`gs[0]` applied last).
pub fn dense_product(gs: &[GivensRotation], m: usize) -> DenseMatrix {
    let mut p = DenseMatrix::identity(m);
    for g in gs.iter().rev() {
        apply_rotation_left(&mut p, g).expect("rotation outside dense realization");
    }
    p
}
