use super::BandOperator;
use crate::dense::DenseMatrix;
use num_complex::Complex64;

/// The `(n + 2d) x n` section of `A - lambda I` with rows `k-d .. k+n+d-1` and columns
/// `k .. k+n-1`. Entry `(r, c)` is nonzero only for `c <= r <= c + 2d`.
///
/// Stored column by column, `2d + 1` entries per column starting at row `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowMatrix {
    n: usize,
    d: usize,
    k: i64,
    lambda: Complex64,
    data: Vec<Complex64>,
}

impl WindowMatrix {
    pub fn extract(op: &BandOperator, lambda: Complex64, k: i64, n: usize) -> Self {
        assert!(n >= 1, "window width must be positive");
        let d = op.bandwidth();
        let h = 2 * d + 1;
        let mut data = vec![Complex64::new(0.0, 0.0); n * h];
        for (c, col) in data.chunks_mut(h).enumerate() {
            op.band_column(k + c as i64, lambda, col);
        }
        WindowMatrix { n, d, k, lambda, data }
    }

    pub fn rows(&self) -> usize {
        self.n + 2 * self.d
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.d
    }

    pub fn position(&self) -> i64 {
        self.k
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        if c >= self.n || r < c || r > c + 2 * self.d {
            return Complex64::new(0.0, 0.0);
        }
        self.data[c * (2 * self.d + 1) + (r - c)]
    }

    /// Band entries of column `c`, rows `c ..= c + 2d`.
    pub fn column(&self, c: usize) -> &[Complex64] {
        let h = 2 * self.d + 1;
        &self.data[c * h..(c + 1) * h]
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows(), self.n, |r, c| self.get(r, c))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
