use crate::bounds::{evaluate_bounds, BoundConfig};
use crate::dense::singular_values;
use crate::givens::{shift_through_higher, Coeffs, RotationPattern, RotationSequence};
use crate::operator::{example21_operator, truncate_to_band, fish_symbol, BandOperator};
use crate::qh::{qh_factorize, TriangularFactor};
use crate::sigma::smallest_singular_value;
use crate::tracer::{trace_contour, BBox};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn unit(rng: &mut ChaCha8Rng) -> Coeffs {
    let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let s = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let n = c.norm().hypot(s.norm());
    Coeffs::new(c / n, s / n)
}

fn shift_through_check(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let l = rng.gen_range(1..=6);
        let t = rng.gen_range(0..=3);
        let left: Vec<Coeffs> = (0..l).map(|_| unit(rng)).collect();
        let right: Vec<Coeffs> = (0..l + t).map(|_| unit(rng)).collect();
        let (a, b) = (RotationSequence::descending_from(0, &left), RotationSequence::descending_from(0, &right));
        let Ok((na, nb)) = shift_through_higher(&a, &b) else { return (false, "shape error".into()) };
        let m = l + t + 2;
        let before = RotationPattern::new(vec![a, b]).to_dense(m);
        let after = RotationPattern::new(vec![na, nb]).to_dense(m);
        worst = worst.max(before.sub(&after).max_abs());
    }
    (worst < 1e-11, format!("max deviation {worst:.2e}"))
}

fn recycling_check() -> (bool, String) {
    let (op, _) = truncate_to_band(&fish_symbol(), 3);
    let op = op.with_override(0, 0, Complex64::new(2.0, 1.0)).expect("in band");
    let lambda = Complex64::new(0.3, -0.2);
    let n = 24;
    let mut state = qh_factorize(&op.window(lambda, -30, n));
    let mut worst: f64 = 0.0;
    for k in -29..10 {
        if state.advance_with(&op).is_err() {
            return (false, format!("advance failed at position {k}"));
        }
        let recycled = smallest_singular_value(&state.complete_qr(), 1e-13, 0, 1).sigma;
        let fresh = smallest_singular_value(&qh_factorize(&op.window(lambda, k, n)).complete_qr(), 1e-13, 0, 1).sigma;
        worst = worst.max((recycled - fresh).abs() / fresh);
    }
    (worst < 1e-10, format!("max relative deviation {worst:.2e}"))
}

fn gklb_check(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.gen_range(5..40);
        let w = rng.gen_range(0..5);
        let mut r = TriangularFactor::zeros(n, w);
        for i in 0..n {
            for j in i..(i + w + 1).min(n) {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                r.set(i, j, if i == j { z + 2.0 } else { z });
            }
        }
        let got = smallest_singular_value(&r, 1e-12, 0, 3).sigma;
        let want = singular_values(&r.to_dense()).last().copied().unwrap_or(0.0);
        worst = worst.max((got - want).abs() / want);
    }
    (worst < 1e-8, format!("max relative deviation {worst:.2e}"))
}

fn identity_check() -> (bool, String) {
    let op = BandOperator::identity();
    let cfg = BoundConfig::new(&op, 4);
    let mut worst: f64 = 0.0;
    for z in [Complex64::new(0.0, 0.0), Complex64::new(1.5, -0.5), Complex64::new(-1.0, 2.0)] {
        match evaluate_bounds(&op, z, &cfg) {
            Ok(r) => worst = worst.max((r.f_l - (1.0 - z).norm()).abs()).max((r.f_u - (1.0 - z).norm()).abs()),
            Err(e) => return (false, e.to_string()),
        }
    }
    (worst < 1e-10, format!("max deviation from |1 - lambda| {worst:.2e}"))
}

fn tracer_check() -> (bool, String) {
    let f = |z: Complex64| z.norm() - 1.0;
    let set = trace_contour(&f, 0.0, BBox::new(-1.5, 1.5, -1.5, 1.5), 0.05, &[], 8);
    let Some(p) = set.polylines.first() else { return (false, "no polyline".into()) };
    let len = p.length();
    let ok = set.polylines.len() == 1 && p.closed && (len / (2.0 * std::f64::consts::PI) - 1.0).abs() < 0.05;
    (ok, format!("length {len:.4}"))
}

fn example21_check() -> (bool, String) {
    let w = example21_operator().window(Complex64::new(0.0, 0.0), 0, 4).to_dense();
    let seen: Vec<f64> = (0..w.rows()).flat_map(|i| (0..w.cols()).map(move |j| (i, j))).map(|(i, j)| w[(i, j)].re).collect();
    let ok = [9.0, 4.0, 2.0].iter().all(|v| seen.contains(v));
    (ok, "window entries 9, 4 and 2 present".into())
}

/// Quick versions of the oracle suites.
pub fn selftest() -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let checks: Vec<(&'static str, (bool, String))> = vec![
        ("shift-through products", shift_through_check(&mut rng)),
        ("recycled vs fresh factors", recycling_check()),
        ("bidiagonalization vs dense svd", gklb_check(&mut rng)),
        ("identity operator bounds", identity_check()),
        ("circle tracing", tracer_check()),
        ("example21 window entries", example21_check()),
    ];
    checks.into_iter().map(|(name, (passed, detail))| CheckResult { name, passed, detail }).collect()
}
