use super::{num_lcm, BandOperator};
use crate::dense::DenseMatrix;

/// Sub- and super-diagonal `b x b` blocks `A_{l+1,l}` and `A_{l-1,l}` for every block
/// column `l` whose content can differ, when blocks start at columns `offset + b*l`.
///
/// Entries are column indexed, so each pair depends only on the columns of block `l`.
/// Outside the irregular region blocks repeat with period `lcm(b, p)/b` in `l`.
pub fn blocks_for_offset(op: &BandOperator, b: usize, offset: usize) -> Vec<(DenseMatrix, DenseMatrix)> {
    assert!(b >= 1 && offset < b);
    let (splits, cols) = op.irregular_columns();
    let lo = splits.iter().chain(cols.iter()).copied().min().unwrap_or(0);
    let hi = splits.iter().map(|s| s - 1).chain(cols.iter().copied()).max().unwrap_or(0);
    let bl = b as i64;
    let span_l = (num_lcm(b, op.left_period()) / b) as i64;
    let span_r = (num_lcm(b, op.right_period()) / b) as i64;
    let l_from = (lo - offset as i64).div_euclid(bl) - span_l - 1;
    let l_to = (hi - offset as i64).div_euclid(bl) + span_r + 1;
    (l_from..=l_to)
        .map(|l| {
            let s = offset as i64 + bl * l;
            (op.section(s + bl, s, b, b), op.section(s - bl, s, b, b))
        })
        .collect()
}

/// Suprema over `l` of `||A_{l+1,l}||_2` and `||A_{l-1,l}||_2`.
pub fn block_norm_sup(op: &BandOperator, b: usize, offset: usize) -> (f64, f64) {
    assert!(b >= op.bandwidth(), "block size must be at least the bandwidth");
    let mut sup = (0.0f64, 0.0f64);
    for (sub, sup_block) in blocks_for_offset(op, b, offset) {
        sup.0 = sup.0.max(sub.spectral_norm());
        sup.1 = sup.1.max(sup_block.spectral_norm());
    }
    sup
}
