#![allow(dead_code)]

use pseudospec::operator::{BandOperator, DiagonalSpec, DiagonalValues};
use pseudospec::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cplx(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn values(rng: &mut impl Rng, max_period: usize) -> DiagonalValues {
    let p = rng.gen_range(1..=max_period);
    if p == 1 {
        DiagonalValues::Constant(cplx(rng))
    } else {
        DiagonalValues::Periodic((0..p).map(|_| cplx(rng)).collect())
    }
}

/// Random band operator of bandwidth exactly `d` with different periodic regimes left
/// and right of a split column and a few overridden entries near it.
pub fn random_operator(rng: &mut impl Rng, d: usize) -> BandOperator {
    let split = rng.gen_range(-20..20);
    let diags = (-(d as i64)..=d as i64)
        .map(|k| DiagonalSpec::switched(k, values(rng, 3), values(rng, 3), split))
        .collect();
    let mut op = BandOperator::new(d, diags).unwrap();
    for _ in 0..3 {
        let col = split + rng.gen_range(-5..5);
        let row = col + rng.gen_range(-(d as i64)..=d as i64);
        op = op.with_override(row, col, cplx(rng)).unwrap();
    }
    op
}
