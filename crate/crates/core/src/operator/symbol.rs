use super::{BandOperator, DiagonalSpec};
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Fourier coefficients `a_j` of a symbol `a(t) = sum_j a_j t^j` on the unit circle.
///
/// Coefficients are stored explicitly over a finite support. `tail_beyond` bounds
/// `sum |a_k|` over all indices outside that support (zero for finite symbols).
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSymbol {
    coeffs: BTreeMap<i64, Complex64>,
    tail_beyond: f64,
}

impl LaurentSymbol {
    /// Finitely supported symbol; the tail beyond the given coefficients is zero.
    pub fn from_coefficients(coeffs: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, v)| *v != Complex64::new(0.0, 0.0)).collect();
        LaurentSymbol { coeffs, tail_beyond: 0.0 }
    }

    /// Explicit coefficients plus a closed-form bound for everything not listed.
    pub fn with_tail(coeffs: impl IntoIterator<Item = (i64, Complex64)>, tail_beyond: f64) -> Self {
        assert!(tail_beyond >= 0.0);
        let mut s = Self::from_coefficients(coeffs);
        s.tail_beyond = tail_beyond;
        s
    }

    pub fn coefficient(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(k, v)| (*k, *v))
    }

    /// Largest `|k|` with a stored nonzero coefficient.
    pub fn support_radius(&self) -> usize {
        self.coeffs.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// `sum_{|k| > d} |a_k|`, summed from the smallest terms up.
    pub fn tail_bound(&self, d: usize) -> f64 {
        let mut terms: Vec<f64> =
            self.coeffs.iter().filter(|(k, _)| k.unsigned_abs() as usize > d).map(|(_, v)| v.norm()).collect();
        terms.sort_by(f64::total_cmp);
        self.tail_beyond + terms.iter().sum::<f64>()
    }

    /// Bound for the coefficients outside the stored support.
    pub fn tail_beyond(&self) -> f64 {
        self.tail_beyond
    }

    /// Coefficients with `|k| <= d` only.
    pub fn truncated(&self, d: usize) -> LaurentSymbol {
        LaurentSymbol::from_coefficients(self.coefficients().filter(|(k, _)| k.unsigned_abs() as usize <= d))
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().map(|(k, v)| v * t.powi(*k as i32)).sum()
    }

    /// `a(e^{i theta})` at `count` equally spaced angles.
    pub fn sample_curve(&self, count: usize) -> Vec<Complex64> {
        (0..count)
            .map(|p| {
                let theta = 2.0 * std::f64::consts::PI * p as f64 / count as f64;
                self.eval(Complex64::from_polar(1.0, theta))
            })
            .collect()
    }
}

/// Band operator with constant diagonals `a_k` at offset `k`.
pub fn laurent_operator(symbol: &LaurentSymbol) -> BandOperator {
    let specs = symbol.coefficients().map(|(k, v)| DiagonalSpec::constant(k, v)).collect();
    BandOperator::new(symbol.support_radius(), specs).expect("offsets within support radius")
}

const FISH_CUTOFF: i64 = 60;

/// `a_0 = 3.1`, `a_k = 2^{-k} + 1.1 (2i)^{-k}` and `a_{-k} = (i/2)^k` for `k > 0`.
pub fn fish_symbol() -> LaurentSymbol {
    let i = Complex64::new(0.0, 1.0);
    let mut coeffs = vec![(0, Complex64::new(3.1, 0.0))];
    for k in 1..=FISH_CUTOFF {
        let half = 0.5f64.powi(k as i32);
        let pos = Complex64::new(half, 0.0) + 1.1 * (-i * 0.5).powi(k as i32);
        coeffs.push((k, pos));
        coeffs.push((-k, (i * 0.5).powi(k as i32)));
    }
    // beyond the cutoff |a_k| <= 2.1 * 2^{-k} and |a_{-k}| = 2^{-k}
    let tail = 3.1 * 0.5f64.powi(FISH_CUTOFF as i32);
    LaurentSymbol::with_tail(coeffs, tail)
}

/// `a_k = r^{|k|}` for `k != 0`, `a_0 = 0`, stored until terms drop below `1e-20`.
pub fn geometric_symbol(r: f64) -> LaurentSymbol {
    assert!(r > 0.0 && r < 1.0);
    let mut coeffs = Vec::new();
    let mut k = 1i64;
    let mut term = r;
    while term > 1e-20 {
        coeffs.push((k, Complex64::new(term, 0.0)));
        coeffs.push((-k, Complex64::new(term, 0.0)));
        k += 1;
        term *= r;
    }
    let tail = 2.0 * term / (1.0 - r);
    LaurentSymbol::with_tail(coeffs, tail)
}
