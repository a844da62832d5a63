//! Verification suites run by `rankbound verify`.

use serde::Serialize;

use crate::detector::{critical_mu, detector_weight, lemma6_check, random_family, DetectorBox, SyntheticH};
use crate::kernels::{big_k, f_transform_by_quadrature, i_pm, verify_lemma1, Side};
use crate::mollifier::{
    s_error_scale, s_sums, truncated_zeta_check, y_k_bruteforce, y_k_main_term, ArithTable, MollifierParams,
};
use crate::special::{
    exp_e, exp_e_by_quadrature, identity_exponential_weight_residual, identity_half_line_residual,
    integration_by_parts_residual,
};
use crate::testfn::limit_measure;
use crate::{Error, Result};

/// Residual bound for every identity check.
pub const IDENTITY_THRESHOLD: f64 = 1e-6;
/// Number of random detector cases.
pub const DETECTOR_CASES: usize = 64;
/// Mollifier length used by the mollifier suite.
pub const MOLLIFIER_LENGTH: u64 = 100_000;
/// Allowed multiple of the published error scales.
pub const SCALE_FACTOR: f64 = 10.0;

/// One named comparison. `passed` means `value ≤ threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }

    /// A yes/no fact, reported as value 0 (holds) or 1 (fails) against 0.
    pub fn fact(name: impl Into<String>, holds: bool) -> Self {
        Self::at_most(name, if holds { 0.0 } else { 1.0 }, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Detector,
    Mollifier,
    All,
}

pub fn run(suite: Suite, seed: u64, sieve_limit: u64) -> Result<Vec<Check>> {
    match suite {
        Suite::Identities => identities(),
        Suite::Detector => detector(seed),
        Suite::Mollifier => mollifier(sieve_limit),
        Suite::All => {
            let mut v = identities()?;
            v.extend(detector(seed)?);
            v.extend(mollifier(sieve_limit)?);
            Ok(v)
        }
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Integral identities of `E`, the kernel reduction and the boundary
/// integrals, each against a quadrature route.
pub fn identities() -> Result<Vec<Check>> {
    let t = IDENTITY_THRESHOLD;
    let mut out = Vec::new();
    let tol = 1e-13;

    let worst = log_grid(1e-6, 50.0, 25)
        .into_iter()
        .map(|x| Ok((exp_e(x)? - exp_e_by_quadrature(x, tol)?).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(Check::at_most("E fast path vs defining integral", worst, t));

    let worst = log_grid(1e-3, 50.0, 15)
        .into_iter()
        .map(|x| integration_by_parts_residual(x, tol))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(Check::at_most("E = e^-x - x E1(x)", worst, t));

    let mut worst: f64 = 0.0;
    for &a in &[0.3, 0.48, 0.7, 1.0] {
        for &x in &[-1.0, -0.5, 0.0, 0.5, 0.99, 1.0] {
            worst = worst.max(identity_half_line_residual(a, x, tol)?);
        }
    }
    out.push(Check::at_most("half-line identity for E", worst, t));

    let mut worst: f64 = 0.0;
    for &(a, b) in &[(1.0, 2.0), (0.5, 1.0), (-0.5, 1.0), (2.0, 3.5), (0.1, 0.2)] {
        worst = worst.max(identity_exponential_weight_residual(a, b, tol)?);
    }
    out.push(Check::at_most("exponentially weighted identity for E", worst, t));

    let mut worst: f64 = 0.0;
    for &a in &[0.3, 0.48, 0.7] {
        for &x in &[-1.0, -0.4, 0.0, 0.6, 1.0] {
            let lhs = f_transform_by_quadrature(1.0, x, tol)? - f_transform_by_quadrature(a, x, tol)?;
            let rhs = big_k(1.0, x)? - big_k(a, x)?;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    out.push(Check::at_most("K(1,x) - K(a,x) as a transform of F", worst, t));

    for order in 0..=2u32 {
        let m = limit_measure::<f64>(order)?;
        let mut worst: f64 = 0.0;
        for &a in &[0.3, 0.48, 0.56, 0.7] {
            worst = worst.max(verify_lemma1(a, &m)?.residual);
        }
        out.push(Check::at_most(format!("kernel reduction, order {order} measure"), worst, t));
    }

    let mut worst: f64 = 0.0;
    for &a in &[0.3, 0.48, 0.7] {
        for &u in &[0.1, 0.5, 2.0, 10.0] {
            for side in [Side::Plus, Side::Minus] {
                worst = worst.max(i_pm(a, u, side)?.residual);
            }
        }
    }
    out.push(Check::at_most("boundary integrals I+ and I-", worst, t));
    Ok(out)
}

/// The zero detector on random synthetic functions, plus the rejection of
/// a zero on the boundary and the lower bound of the detector weight.
pub fn detector(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let cases = random_family(seed, DETECTOR_CASES);
    let mut worst: f64 = 0.0;
    let mut with_zeros = [0usize; 4];
    for case in &cases {
        let r = lemma6_check(&case.h, &case.bx, 1e-12)?;
        worst = worst.max(r.residual);
        with_zeros[r.zeros_inside.min(3)] += 1;
    }
    out.push(Check::at_most(
        format!("zero detector identity, {} random cases", cases.len()),
        worst,
        IDENTITY_THRESHOLD,
    ));
    out.push(Check::fact(
        format!(
            "zero counts covered (0/1/2/3 inside: {}/{}/{}/{})",
            with_zeros[0], with_zeros[1], with_zeros[2], with_zeros[3]
        ),
        with_zeros.iter().all(|&c| c > 0),
    ));

    let h = SyntheticH::new(3.0, 2.0)?;
    let re = h.zero_real_part().expect("c0 > 0");
    let rejected = [
        DetectorBox::new(re - 0.3, 0.0, 2.0)?,
        DetectorBox::new(re, -1.0, 1.0)?,
    ]
    .iter()
    .all(|bx| matches!(lemma6_check(&h, bx, 1e-12), Err(Error::ZeroOnBoundary { .. })));
    out.push(Check::fact("zero on the boundary rejected", rejected));

    let mu = critical_mu();
    let mut min = f64::INFINITY;
    for &lambda in &[1.0, 3.0, 10.0] {
        for i in 0..=20 {
            for j in 0..=20 {
                let beta = 0.5 + 2.0 * i as f64 / 20.0;
                let gamma = j as f64 / 20.0 / lambda;
                let z = num_complex::Complex64::new(beta, gamma);
                min = min.min(detector_weight(lambda, mu, 0.5, 0.0, z));
            }
        }
    }
    out.push(Check::at_most("detector weight deficit 1 - min", 1.0 - min, 1e-9));
    Ok(out)
}

/// Finite-`M` sums against their closed-form main terms.
pub fn mollifier(sieve_limit: u64) -> Result<Vec<Check>> {
    let m = MOLLIFIER_LENGTH;
    if sieve_limit < m {
        return Err(Error::SieveLimit { n: m, limit: sieve_limit });
    }
    let table = ArithTable::new(sieve_limit.min(m + 1))?;
    let mut out = Vec::new();
    for &delta in &[0.02, 0.05, 0.1] {
        let p = MollifierParams::new(m, 0.5, delta, 0.0)?;
        let s = s_sums(&table, &p)?;
        out.push(Check::at_most(
            format!("S = S1 + S2 + S3, delta = {delta}"),
            (s.s - (s.s1 + s.s2 + s.s3)).abs(),
            1e-12,
        ));
        let scale = s_error_scale(&p);
        out.push(Check::at_most(
            format!("|S - closed form| / (delta M^(-2a delta)), delta = {delta}"),
            (s.s - s.closed_s).abs() / scale,
            SCALE_FACTOR,
        ));
        let tz = truncated_zeta_check(&table, m as f64 + 0.5, delta)?;
        out.push(Check::at_most(
            format!("truncated zeta sum / error scale, delta = {delta}"),
            tz.residual / tz.error_scale,
            SCALE_FACTOR,
        ));
    }

    for &t in &[0.0, 0.5] {
        let p = MollifierParams::new(m, 0.5, 0.05, t)?;
        let mut support_ok = true;
        for k in [4u64, 9, 12, 50, 98, m + 1, m + 7, 2 * m] {
            support_ok &= y_k_bruteforce(&table, k, &p)? == num_complex::Complex64::new(0.0, 0.0);
        }
        out.push(Check::fact(format!("y_k vanishes off squarefree k <= M, t = {t}"), support_ok));

        let mut monotone = true;
        for &k in &[2u64, 3, 6] {
            let mut prev = f64::INFINITY;
            for &mm in &[1_000u64, 10_000, 100_000] {
                let q = MollifierParams::new(mm, 0.5, 0.05, t)?;
                let d = (y_k_bruteforce(&table, k, &q)? - y_k_main_term(&table, k, &q)?).norm();
                monotone &= d < prev;
                prev = d;
            }
        }
        out.push(Check::fact(
            format!("y_k approaches its main term as M grows (k = 2, 3, 6), t = {t}"),
            monotone,
        ));
    }
    Ok(out)
}
