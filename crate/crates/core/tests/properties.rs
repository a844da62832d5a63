use num_complex::Complex64;
use proptest::prelude::*;

use rankbound::bound::{minimize, BoundContext};
use rankbound::detector::{critical_mu, density_main_term, detector_weight, lemma6_check, random_family};
use rankbound::kernels::{big_f, big_k, g_psi};
use rankbound::mollifier::{eta, s_sums, y_k_bruteforce, ArithTable, MollifierParams};
use rankbound::quadrature::{integrate, IntegrationDomain};
use rankbound::special::exp_e;
use rankbound::testfn::{check_positivity, laplace, limit_measure, phi0_pieces, PositivityGrid, SmoothingParam};

const TOL: f64 = 1e-10;

fn quad(f: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> f64 {
    integrate(f, IntegrationDomain::finite(lo, hi).unwrap(), TOL, &[]).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_is_linear(alpha in -3.0..3.0f64, beta in -3.0..3.0f64, w in 0.5..8.0f64, lo in -2.0..0.0f64, len in 0.1..4.0f64) {
        let hi = lo + len;
        let f = move |x: f64| (w * x).sin();
        let g = move |x: f64| (-x * x).exp() / (1.0 + w);
        let combined = quad(|x| alpha * f(x) + beta * g(x), lo, hi);
        let separate = alpha * quad(f, lo, hi) + beta * quad(g, lo, hi);
        prop_assert!((combined - separate).abs() <= 10.0 * TOL);
    }

    #[test]
    fn quadrature_splits(lo in -3.0..0.0f64, len in 0.1..5.0f64, frac in 0.01..0.99f64, w in 0.1..6.0f64) {
        let hi = lo + len;
        let mid = lo + frac * len;
        let f = |x: f64| (w * x).cos() * (0.3 * x).exp() + x.abs().sqrt();
        let whole = quad(f, lo, hi);
        let parts = quad(f, lo, mid) + quad(f, mid, hi);
        prop_assert!((whole - parts).abs() <= 10.0 * TOL);
    }

    #[test]
    fn e_is_strictly_decreasing(x in 0.0..60.0f64, dx in 1e-3..5.0f64) {
        prop_assert!(exp_e(x).unwrap() > exp_e(x + dx).unwrap());
    }

    #[test]
    fn phi0_is_even(x in -1.5..1.5f64) {
        let phi = phi0_pieces::<f64>();
        prop_assert_eq!(phi.value(x), phi.value(-x));
    }

    #[test]
    fn laplace_decay_bound(s in prop_oneof![-4.0..-0.05f64, 0.05..4.0f64]) {
        let phi_hat = laplace(&limit_measure::<f64>(0).unwrap(), s).unwrap().value.abs();
        for k in 0..=2u32 {
            let norm = limit_measure::<f64>(k).unwrap().total_mass().unwrap().value;
            let bound = norm / s.abs().powi(k as i32) * s.abs().exp();
            prop_assert!(phi_hat <= bound * (1.0 + 1e-9), "k = {}: {} > {}", k, phi_hat, bound);
        }
    }

    #[test]
    fn main_term_is_nonnegative(a in 0.05..0.95f64, log_u in (0.5f64).ln()..(20.0f64).ln()) {
        let u = log_u.exp();
        let r = a / (1.0 - a);
        prop_assert!(r * r * (big_f(1.0, u).unwrap() - big_f(a, u).unwrap()) >= -1e-12);
    }

    #[test]
    fn density_main_term_decreases(a in 0.1..0.9f64, u in 0.5..15.0f64, du in 0.01..3.0f64) {
        prop_assert!(density_main_term(a, u + du).unwrap() <= density_main_term(a, u).unwrap() + 1e-15);
    }

    #[test]
    fn k_has_no_spike_at_the_poles(a in 0.1..1.0f64, sign in prop::bool::ANY, off in 0.0..3e-3f64) {
        let s = if sign { 1.0 } else { -1.0 };
        let x = s * (1.0 - off);
        let y = s * (1.0 - off - 1e-4);
        let (kx, ky) = (big_k(a, x).unwrap(), big_k(a, y).unwrap());
        prop_assert!((kx - ky).abs() <= 1e-2 * (1.0 + kx.abs().max(ky.abs())));
    }

    #[test]
    fn eta_bounded_by_divisor_count(n in 1u64..=10_000, t in prop::sample::select(vec![0.0, 0.5, 1.0])) {
        let table = ArithTable::new(10_000).unwrap();
        let tau: u32 = table.factor(n).unwrap().iter().map(|&(_, e)| e + 1).product();
        let v = eta(&table, n, t).unwrap();
        prop_assert!(v.is_finite());
        prop_assert!(v.abs() <= tau as f64 + 1e-9);
        if t == 0.0 {
            prop_assert!((v - tau as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn detector_weight_at_least_one(lambda in 0.5..10.0f64, beta_off in 0.0..3.0f64, frac in 0.0..1.0f64, t1 in -5.0..5.0f64) {
        let sigma = 0.5;
        let zero = Complex64::new(sigma + beta_off, t1 + frac / lambda);
        prop_assert!(detector_weight(lambda, critical_mu(), sigma, t1, zero) >= 1.0 - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn detector_identity_holds_on_random_families(seed in any::<u64>()) {
        for case in random_family(seed, 8) {
            let r = lemma6_check(&case.h, &case.bx, 1e-12).unwrap();
            prop_assert_eq!(r.zeros_inside, case.planted);
            prop_assert!(r.residual < 1e-6, "{:?}: {}", case, r.residual);
        }
    }

    #[test]
    fn g_difference_is_nonnegative(a in 0.05..0.95f64, order in prop::sample::select(vec![0u32, 2])) {
        let m = limit_measure::<f64>(order).unwrap();
        prop_assert!(g_psi(1.0, &m).unwrap() - g_psi(a, &m).unwrap() >= -1e-12);
    }

    #[test]
    fn bound_reports_are_self_consistent(a in 0.02..0.98f64, delta in 0.05..0.5f64) {
        let r = BoundContext::default().report(a, delta).unwrap();
        prop_assert!(r.is_consistent(), "{:?}", r);
        prop_assert!(r.h > 0.5);
    }

    #[test]
    fn y_k_support(k in 1u64..=4_000, t in prop::sample::select(vec![0.0, 0.5])) {
        let table = ArithTable::new(4_000).unwrap();
        let p = MollifierParams::new(2_000, 0.5, 0.05, t).unwrap();
        if table.mobius(k).unwrap() == 0 || k > p.m() {
            prop_assert_eq!(y_k_bruteforce(&table, k, &p).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn s_decomposition_is_exact(m in 10u64..=20_000, a in 0.2..0.8f64, delta in 1e-3..0.2f64) {
        let table = ArithTable::new(20_000).unwrap();
        let s = s_sums(&table, &MollifierParams::new(m, a, delta, 0.0).unwrap()).unwrap();
        prop_assert!((s.s - (s.s1 + s.s2 + s.s3)).abs() <= 1e-12 * s.s.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn smoothed_transform_is_nonnegative(eps in 0.02..0.25f64) {
        let grid = PositivityGrid { sigma_steps: 4, tau_step: 0.5, ..PositivityGrid::default() };
        let r = check_positivity(SmoothingParam::new(eps).unwrap(), &grid).unwrap();
        prop_assert!(r.min >= -1e-9, "{:?}", r);
    }
}

#[test]
fn refined_minimiser_is_stable_under_grid_refinement() {
    let (a1, r1) = minimize(0.5, 0.30, 0.70, 0.01).unwrap();
    let (a2, r2) = minimize(0.5, 0.30, 0.70, 0.005).unwrap();
    assert!((a1 - a2).abs() <= 0.01, "{a1} vs {a2}");
    assert!(r1.h <= 6.5 && r2.h <= 6.5);
}
