mod common;

use common::{cplx, random_operator, rng};
use proptest::prelude::*;
use pseudospec::bounds::*;
use pseudospec::dense::singular_values;
use pseudospec::operator::{block_norm_sup, example21_operator, laurent_operator, BandOperator, LaurentSymbol};
use pseudospec::qh::{estimate_restart_period, run_sequence, RestartPolicy, StepKind};
use pseudospec::sigma::smallest_singular_value;
use pseudospec::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn identity_bounds_are_exact() {
    let op = BandOperator::identity();
    let cfg = BoundConfig::new(&op, 5);
    for z in [c(0.0, 0.0), c(1.0, 1.0), c(-2.0, 0.5), c(1.0, 0.0)] {
        let r = evaluate_bounds(&op, z, &cfg).unwrap();
        let want = (1.0 - z).norm();
        assert!((r.f_l - want).abs() < 1e-12 && (r.f_u - want).abs() < 1e-12);
        assert_eq!(r.delta_n, 0.0);
    }
}

#[test]
fn shift_operator_sandwich() {
    // L(t): spectrum is the unit circle, the resolvent norm is 1 / dist
    let op = laurent_operator(&LaurentSymbol::from_coefficients([(1, c(1.0, 0.0))]));
    let mut cfg = BoundConfig::new(&op, 40);
    cfg.solver.tol = 1e-12;
    for z in [c(0.0, 0.0), c(0.3, 0.2), c(1.5, -0.5), c(0.0, 1.0)] {
        let r = evaluate_bounds(&op, z, &cfg).unwrap();
        let dist = (z.norm() - 1.0).abs();
        assert!(r.f_l >= dist - 1e-9, "{} below {dist}", r.f_l);
        assert!(r.f_u <= dist + r.delta_n + 1e-9, "{} above {dist} + {}", r.f_u, r.delta_n);
        assert!(r.f_l <= r.f_u);
    }
}

#[test]
fn delta_bound_formula() {
    let op = example21_operator();
    let (sub, sup) = block_norm_sup(&op, 2, 0);
    let want = 2.0 * (sub + sup) * (std::f64::consts::PI / 22.0).sin();
    assert!((delta_bound(&op, 2, 0, 10) - want).abs() < 1e-15);
    let cfg = BoundConfig { b: 2, ..BoundConfig::new(&op, 10) };
    let worst = (0..2).map(|o| delta_bound(&op, 2, o, 10)).fold(0.0, f64::max);
    assert_eq!(cfg.resolve_delta(&op), worst);
    assert_eq!(BoundConfig { delta_n: Some(0.25), ..cfg }.resolve_delta(&op), 0.25);
}

#[test]
fn config_validation() {
    let op = example21_operator();
    let ok = BoundConfig::new(&op, 4);
    assert!(ok.validate(&op).is_ok());
    assert!(BoundConfig { b: 1, ..ok.clone() }.validate(&op).is_err());
    assert!(BoundConfig { blocks: 0, ..ok.clone() }.validate(&op).is_err());
    assert!(BoundConfig { offsets: Some(vec![2]), ..ok.clone() }.validate(&op).is_err());
    assert!(BoundConfig { offsets: Some(vec![]), ..ok.clone() }.validate(&op).is_err());
    assert!(BoundConfig { eta_d: 0.1, eps_list: vec![0.1], ..ok.clone() }.validate(&op).is_err());
    assert!(BoundConfig { eta_d: 0.1, eps_list: vec![0.2], ..ok }.validate(&op).is_ok());
}

#[test]
fn window_infimum_matches_dense() {
    let mut r = rng(4);
    let op = random_operator(&mut r, 2);
    let lambda = cplx(&mut r);
    let n = 12;
    let opts = SolverOptions { tol: 1e-12, ..Default::default() };
    let got = nu_window_inf(&op, lambda, n, &opts).unwrap();
    let mut want = f64::INFINITY;
    for a in [op.clone(), op.adjoint()] {
        let mu = if a == op { lambda } else { lambda.conj() };
        for k in -60..60 {
            want = want.min(*singular_values(&a.window(mu, k, n).to_dense()).last().unwrap());
        }
    }
    assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn offsets_nest(seed in any::<u64>(), eps in 0.05f64..3.0) {
        let mut r = rng(seed);
        let op = random_operator(&mut r, 2);
        let lambda = cplx(&mut r) * 2.0;
        let mut cfg = BoundConfig::new(&op, 3);
        cfg.b = 3;
        let rep = evaluate_bounds(&op, lambda, &cfg).unwrap();
        prop_assert_eq!(rep.per_offset.len(), 3);
        prop_assert!(rep.f_l <= rep.f_u);
        for c in 0..3 {
            let lower = rep.in_lower_set_at(c, eps).unwrap();
            let upper = rep.in_upper_set_at(c, eps).unwrap();
            // the union over offsets contains each one, the intersection is inside each one
            prop_assert!(!lower || rep.in_lower_set(eps));
            prop_assert!(!rep.in_upper_set(eps) || upper);
            prop_assert!(!lower || upper);
        }
    }

    #[test]
    fn restart_policies_agree(seed in any::<u64>(), every in 1usize..6) {
        let mut r = rng(seed);
        let op = random_operator(&mut r, 2);
        let lambda = cplx(&mut r);
        let sig = |policy| -> Vec<f64> {
            run_sequence(&op, lambda, -12, 20, 10, policy)
                .map(|x| smallest_singular_value(&x.unwrap().1, 1e-12, 0, 1).sigma)
                .collect()
        };
        let base = sig(RestartPolicy::Every(1));
        for (a, b) in sig(RestartPolicy::Never).iter().chain(&sig(RestartPolicy::Every(every))).zip(base.iter().cycle()) {
            prop_assert!((a - b).abs() <= 1e-10 * b);
        }
    }

    #[test]
    fn restart_period_is_optimal(initial in 1.0f64..100.0, slope in 0.0f64..5.0, k_max in 1usize..60) {
        let steps: Vec<f64> = (0..k_max).map(|s| 1.0 + slope * s as f64).collect();
        let r = estimate_restart_period(initial, &steps, k_max);
        prop_assert!((1..=k_max).contains(&r));
        let cost = |r: usize| -> f64 {
            (0..k_max).map(|i| if i % r == 0 { initial } else { steps[i % r - 1] }).sum()
        };
        let best = (1..=k_max).map(cost).fold(f64::INFINITY, f64::min);
        prop_assert!(cost(r) <= best * (1.0 + 1e-12));
    }
}

#[test]
fn restart_schedule() {
    let op = example21_operator();
    let kinds: Vec<StepKind> =
        run_sequence(&op, c(0.0, 0.0), 0, 7, 4, RestartPolicy::Every(3)).map(|x| x.unwrap().2.step_kind).collect();
    use StepKind::*;
    assert_eq!(kinds, [Fresh, Advance, Advance, Fresh, Advance, Advance, Fresh]);
    let never: Vec<StepKind> = run_sequence(&op, c(0.0, 0.0), 0, 4, 4, RestartPolicy::Never).map(|x| x.unwrap().2.step_kind).collect();
    assert_eq!(never, [Fresh, Advance, Advance, Advance]);
    // cheap constant steps never pay for a restart
    assert_eq!(estimate_restart_period(10.0, &[1.0], 50), 50);
}
