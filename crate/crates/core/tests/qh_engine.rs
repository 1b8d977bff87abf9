mod common;

use common::{cplx, random_operator, rng};
use pseudospec::dense::{singular_values, DenseMatrix};
use pseudospec::qh::{qh_factorize, QHState};
use pseudospec::Complex64;

fn check_state(state: &QHState, op: &pseudospec::operator::BandOperator) {
    let w = op.window(state.lambda(), state.position(), state.n()).to_dense();
    let q = state.pattern().to_dense(state.m());
    let h = state.h_dense();
    let diff = q.matmul(&w).sub(&h).max_abs();
    assert!(diff <= 1e-10 * w.max_abs().max(1.0), "QA != H by {diff} at k={}", state.position());
    for i in 0..h.rows() {
        for j in 0..h.cols() {
            if i > j + 1 {
                assert_eq!(h[(i, j)], Complex64::new(0.0, 0.0), "H not Hessenberg at ({i},{j})");
            }
        }
    }
}

#[test]
fn fresh_and_advanced_states_reproduce_windows() {
    let mut r = rng(7);
    for d in [1usize, 2, 3] {
        for n in [1usize, 2, 5, 9] {
            let op = random_operator(&mut r, d);
            let lambda = cplx(&mut r);
            let mut s = qh_factorize(&op.window(lambda, -15, n));
            assert_eq!(s.pattern().sequences.len(), 2 * d - 1);
            check_state(&s, &op);
            for _ in 0..30 {
                s.advance_with(&op).unwrap();
                check_state(&s, &op);
                let rf = s.complete_qr();
                let sv = singular_values(&rf.to_dense());
                let sw = singular_values(&op.window(lambda, s.position(), n).to_dense());
                for (a, b) in sv.iter().zip(&sw) {
                    assert!((a - b).abs() <= 1e-10 * sw[0], "singular values differ {a} {b}");
                }
            }
        }
    }
}

#[test]
fn diagonal_window_has_empty_pattern() {
    let op = pseudospec::operator::BandOperator::identity();
    let mut s = qh_factorize(&op.window(Complex64::new(0.5, 0.0), 0, 4));
    assert!(s.pattern().sequences.is_empty());
    s.advance_with(&op).unwrap();
    let h: DenseMatrix = s.h_dense();
    assert_eq!(h, DenseMatrix::from_fn(4, 4, |i, j| if i == j { Complex64::new(0.5, 0.0) } else { Complex64::new(0.0, 0.0) }));
}
