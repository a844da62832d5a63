//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rankbound::bound::{scan, BoundContext};
use rankbound::kernels::{c_const, g_psi_with, HatWeighting};
use rankbound::suites::{self, Check};
use rankbound::testfn::{laplace_tol, limit_functional, limit_measure, SmoothedTestFn, SmoothingParam};

const TOL: f64 = 1e-10;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if took >= limit {
        o.passed = false;
    }
    o.detail = format!("{} [{:.2?} of {:?}]", o.detail, took, limit);
    o
}

fn failed_checks(checks: &[Check]) -> Vec<String> {
    checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} = {:.4e} > {:.1e}", c.name, c.value, c.threshold))
        .collect()
}

fn suite_outcome(checks: rankbound::Result<Vec<Check>>) -> Outcome {
    match checks {
        Ok(checks) => {
            let bad = failed_checks(&checks);
            if bad.is_empty() {
                Outcome::new(true, format!("{} checks", checks.len()))
            } else {
                Outcome::new(false, format!("{} of {} failed: {}", bad.len(), checks.len(), bad.join("; ")))
            }
        }
        Err(e) => Outcome::new(false, format!("error: {e}")),
    }
}

fn criterion_1() -> Outcome {
    timed(Duration::from_secs(1), || {
        let v = laplace_tol(&limit_measure::<f64>(0).unwrap(), 0.0, TOL).unwrap().value;
        Outcome::new(within(v, 0.9281, 5e-4), format!("phi0_hat(0) = {v:.6}"))
    })
}

fn criterion_2() -> Outcome {
    let c = c_const::<f64>();
    Outcome::new(within(c, 11.028, 1e-3), format!("c = {c:.6}"))
}

fn criterion_3() -> Outcome {
    timed(Duration::from_secs(30), || {
        let targets = [0.1535, 0.3666, 0.3321];
        let mut ok = true;
        let mut parts = Vec::new();
        for (order, target) in targets.iter().enumerate() {
            let m = limit_measure::<f64>(order as u32).unwrap();
            let g = g_psi_with(1.0, &m, HatWeighting::default(), TOL).unwrap().value;
            ok &= within(g, *target, 5e-4);
            parts.push(format!("G_{order}(1) = {g:.6}"));
        }
        Outcome::new(ok, parts.join(", "))
    })
}

fn criterion_4() -> Outcome {
    timed(Duration::from_secs(120), || {
        let ctx = BoundContext::default();
        let h = ctx.report(0.48, 0.5).unwrap().h;
        let res = scan(&ctx, 0.5, 0.30, 0.70, 0.01).unwrap();
        let ok = (6.49..=6.51).contains(&h) && res.best.h <= 6.5;
        Outcome::new(
            ok,
            format!("H(0.48) = {h:.6}, min H = {:.6} at a = {:.4}", res.best.h, res.best.a),
        )
    })
}

fn criterion_5() -> Outcome {
    let h = BoundContext::default().report(0.56, 0.25).unwrap().h;
    Outcome::new(within(h, 10.6, 0.05), format!("H(0.56, 1/4) = {h:.6}"))
}

fn criterion_6() -> Outcome {
    suite_outcome(suites::identities())
}

fn criterion_7() -> Outcome {
    let mut o = suite_outcome(suites::detector(0));
    o.detail = format!("{} cases, {}", suites::DETECTOR_CASES, o.detail);
    o.passed &= suites::DETECTOR_CASES >= 50;
    o
}

fn criterion_8() -> Outcome {
    timed(Duration::from_secs(120), || suite_outcome(suites::mollifier(suites::MOLLIFIER_LENGTH + 1)))
}

/// Values of `∫ h dμ` differ only at quadrature level when `φ_ε` is exactly
/// unimodal, e.g. `∫|φ_ε'| = 2` for every `ε`.
const TREND_NOISE: f64 = 1e-8;

type Weight = (&'static str, fn(f64) -> f64);

fn criterion_9() -> Outcome {
    let epsilons = [0.1, 0.05, 0.02, 0.01];
    let weights: [Weight; 3] = [
        ("1", |_| 1.0),
        ("e^x", f64::exp),
        ("x e^(x/2)", |x| x * (0.5 * x).exp()),
    ];
    let fns: Vec<SmoothedTestFn<f64>> = epsilons
        .iter()
        .map(|&e| SmoothedTestFn::new(SmoothingParam::new(e).unwrap()).unwrap())
        .collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for order in 0..=2usize {
        for (name, h) in weights {
            let limit = limit_functional(order as u32, h, 1e-12).unwrap().value;
            let gaps: Vec<f64> = fns
                .iter()
                .map(|f| (f.abs_derivative_functional(order, h, 1e-11).unwrap().value - limit).abs())
                .collect();
            let monotone = gaps.windows(2).all(|w| w[1] <= w[0] || w[1] <= TREND_NOISE);
            ok &= monotone;
            if !monotone {
                let shown: Vec<String> = gaps.iter().map(|g| format!("{g:.3e}")).collect();
                parts.push(format!("order {order}, h = {name}: gaps [{}]", shown.join(", ")));
            }
        }
    }
    let detail = if parts.is_empty() {
        "gaps shrink for all 3 orders x 3 weights".to_string()
    } else {
        parts.join("; ")
    };
    Outcome::new(ok, detail)
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut all = true;
    for (n, f) in criteria {
        let o = f();
        all &= o.passed;
        println!("{} criterion {n}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
