//! Assembly of the rank bound `H(a, Δ)` and its minimisation over `a`.

use rayon::prelude::*;
use serde::Serialize;

use crate::kernels::{g_psi_with, HatWeighting, KernelParams};
use crate::quadrature::DEFAULT_TOL;
use crate::testfn::{laplace_tol, limit_measure, Measure};
use crate::Result;

/// `π²/6 - 5/4 = Σ_{n≥3} n^{-2}`, the weight of the second-derivative term.
pub fn tail_weight() -> f64 {
    std::f64::consts::PI.powi(2) / 6.0 - 1.25
}

/// Coefficient of the `|φ|` term, one per `n = 0, 1, 2`.
pub const LOW_ORDER_WEIGHT: f64 = 3.0;

/// The published target for the bound.
pub const TARGET: f64 = 6.5;

/// Every ingredient of `H(a, Δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub a: f64,
    pub delta: f64,
    pub phi0_hat0: f64,
    pub g_phi_1: f64,
    pub g_phi_a: f64,
    pub g_phi2_1: f64,
    pub g_phi2_a: f64,
    pub bracket: f64,
    #[serde(rename = "H")]
    pub h: f64,
}

impl BoundReport {
    /// `H` recomputed from the other fields.
    pub fn recompute_h(&self) -> f64 {
        let bracket = LOW_ORDER_WEIGHT * (self.g_phi_1 - self.g_phi_a)
            + tail_weight() * (self.g_phi2_1 - self.g_phi2_a);
        let r = self.a / (1.0 - self.a);
        0.5 + (1.0 / (self.a * self.delta) + 4.0 * r * r * bracket) / self.phi0_hat0
    }

    pub fn is_consistent(&self) -> bool {
        (self.recompute_h() - self.h).abs() <= 1e-12 * self.h.abs().max(1.0)
            && (0.92..=0.94).contains(&self.phi0_hat0)
    }

    /// `6.5 - H`.
    pub fn slack(&self) -> f64 {
        TARGET - self.h
    }
}

/// The `a`-independent pieces of `H`, computed once.
#[derive(Debug, Clone)]
pub struct BoundContext {
    m0: Measure<f64>,
    m2: Measure<f64>,
    phi0_hat0: f64,
    g_phi_1: f64,
    g_phi2_1: f64,
    weighting: HatWeighting,
    tol: f64,
}

impl BoundContext {
    pub fn new(tol: f64, weighting: HatWeighting) -> Result<Self> {
        let m0 = limit_measure(0)?;
        let m2 = limit_measure(2)?;
        let phi0_hat0 = laplace_tol(&m0, 0.0, tol)?.value;
        let g_phi_1 = g_psi_with(1.0, &m0, weighting, tol)?.value;
        let g_phi2_1 = g_psi_with(1.0, &m2, weighting, tol)?.value;
        Ok(Self {
            m0,
            m2,
            phi0_hat0,
            g_phi_1,
            g_phi2_1,
            weighting,
            tol,
        })
    }

    pub fn phi0_hat0(&self) -> f64 {
        self.phi0_hat0
    }

    pub fn report(&self, a: f64, delta: f64) -> Result<BoundReport> {
        let params = KernelParams::new(a, delta)?;
        let g_phi_a = g_psi_with(a, &self.m0, self.weighting, self.tol)?.value;
        let g_phi2_a = g_psi_with(a, &self.m2, self.weighting, self.tol)?.value;
        let bracket = LOW_ORDER_WEIGHT * (self.g_phi_1 - g_phi_a)
            + tail_weight() * (self.g_phi2_1 - g_phi2_a);
        let h = 0.5
            + (1.0 / params.theta() + 4.0 * params.main_term_factor() * bracket) / self.phi0_hat0;
        Ok(BoundReport {
            a,
            delta,
            phi0_hat0: self.phi0_hat0,
            g_phi_1: self.g_phi_1,
            g_phi_a,
            g_phi2_1: self.g_phi2_1,
            g_phi2_a,
            bracket,
            h,
        })
    }
}

impl Default for BoundContext {
    fn default() -> Self {
        Self::new(DEFAULT_TOL, HatWeighting::default()).expect("limit measures integrate at the default tolerance")
    }
}

/// `H(a, Δ)` with default settings.
pub fn h_of_a(a: f64, delta: f64) -> Result<BoundReport> {
    KernelParams::new(a, delta)?;
    BoundContext::new(DEFAULT_TOL, HatWeighting::default())?.report(a, delta)
}

/// Coarse rows, refinement rows and the minimiser.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub coarse: Vec<BoundReport>,
    pub refined: Vec<BoundReport>,
    pub best: BoundReport,
}

/// Points `lo + i·step` strictly below `hi`.
pub fn half_open_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step - 1e-9).ceil().max(0.0) as usize;
    (0..n).map(|i| lo + i as f64 * step).collect()
}

/// Smallest `H`, ties broken towards the smallest `a`; independent of row order.
fn argmin(rows: &[BoundReport]) -> Option<BoundReport> {
    rows.iter().copied().fold(None, |best: Option<BoundReport>, r| match best {
        Some(b) if b.h < r.h || (b.h == r.h && b.a <= r.a) => Some(b),
        _ => Some(r),
    })
}

fn evaluate(ctx: &BoundContext, grid: &[f64], delta: f64) -> Result<Vec<BoundReport>> {
    grid.par_iter().map(|&a| ctx.report(a, delta)).collect()
}

/// Coarse scan over `[a_lo, a_hi)` then one pass at `step/10` within one
/// coarse step of the coarse minimiser.
pub fn scan(ctx: &BoundContext, delta: f64, a_lo: f64, a_hi: f64, step: f64) -> Result<ScanResult> {
    if !(a_lo > 0.0 && a_hi < 1.0 && a_lo < a_hi) {
        return Err(crate::Error::domain(format!(
            "need 0 < a_min < a_max < 1, got [{a_lo}, {a_hi}]"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(crate::Error::domain(format!("step must be positive, got {step}")));
    }
    KernelParams::new(a_lo, delta)?;
    let grid = half_open_grid(a_lo, a_hi, step);
    if grid.is_empty() {
        return Err(crate::Error::domain("empty a-grid"));
    }
    let coarse = evaluate(ctx, &grid, delta)?;
    let centre = argmin(&coarse).expect("grid is nonempty").a;
    let fine = step / 10.0;
    let fine_grid: Vec<f64> = (0..=20)
        .map(|j| centre - step + j as f64 * fine)
        .filter(|&a| a >= a_lo && a < a_hi && a > 0.0 && a < 1.0)
        .collect();
    let refined = evaluate(ctx, &fine_grid, delta)?;
    let candidates: Vec<BoundReport> = argmin(&refined).into_iter().chain(argmin(&coarse)).collect();
    let best = argmin(&candidates).expect("at least one row");
    Ok(ScanResult {
        coarse,
        refined,
        best,
    })
}

/// `(a*, H(a*))` from [`scan`].
pub fn minimize(delta: f64, a_lo: f64, a_hi: f64, coarse_step: f64) -> Result<(f64, BoundReport)> {
    let ctx = BoundContext::new(DEFAULT_TOL, HatWeighting::default())?;
    let r = scan(&ctx, delta, a_lo, a_hi, coarse_step)?;
    Ok((r.best.a, r.best))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_weight_is_basel_tail() {
        let partial: f64 = (3..=1_000_000u64).map(|n| 1.0 / (n as f64 * n as f64)).sum();
        assert!((partial - tail_weight()).abs() < 1e-6);
    }

    #[test]
    fn reference_bounds() {
        let ctx = BoundContext::default();
        let r = ctx.report(0.48, 0.5).unwrap();
        assert!(r.is_consistent());
        assert!((r.h - 6.498).abs() < 0.01, "{r:?}");
        let r = ctx.report(0.56, 0.25).unwrap();
        assert!((r.h - 10.6).abs() < 0.05, "{r:?}");
    }

    #[test]
    fn divergence_at_both_ends() {
        let ctx = BoundContext::default();
        assert!(ctx.report(0.01, 0.5).unwrap().h > 100.0);
        let mid = ctx.report(0.48, 0.5).unwrap().h;
        assert!(ctx.report(0.02, 0.5).unwrap().h > 10.0 * mid);
        assert!(ctx.report(0.98, 0.5).unwrap().h > 10.0 * mid);
    }

    #[test]
    fn open_interval_enforced() {
        assert!(h_of_a(1.0, 0.5).is_err());
        assert!(h_of_a(0.0, 0.5).is_err());
        assert!(h_of_a(0.5, 0.6).is_err());
    }

    #[test]
    fn grid_shapes() {
        assert_eq!(half_open_grid(0.3, 0.7, 0.01).len(), 40);
        assert_eq!(half_open_grid(0.3, 0.4, 0.1), vec![0.3]);
        assert_eq!(half_open_grid(0.3, 0.4, 0.5), vec![0.3]);
    }

    #[test]
    fn single_point_scan() {
        let ctx = BoundContext::default();
        let r = scan(&ctx, 0.5, 0.45, 0.5, 0.05).unwrap();
        assert_eq!(r.coarse.len(), 1);
        assert_eq!(r.coarse[0].a, 0.45);
    }

    #[test]
    fn argmin_prefers_smallest_a_on_ties() {
        let ctx = BoundContext::default();
        let mut a = ctx.report(0.4, 0.5).unwrap();
        let mut b = a;
        b.a = 0.5;
        a.h = 1.0;
        b.h = 1.0;
        assert_eq!(argmin(&[a, b]).unwrap().a, 0.4);
        assert_eq!(argmin(&[b, a]).unwrap().a, 0.4);
    }
}
