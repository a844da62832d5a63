//! Selberg-type zero detector.
//!
//! For `h` holomorphic on `Re s ≥ σ'`, `t₁ ≤ Im s ≤ t₂`, tending to 1 faster
//! than `exp(-π Re s / (t₂ - t₁))`, a weighted count of the zeros inside the
//! half-strip equals two boundary integrals of `log |h|`. The identity is
//! checked here on `h(s) = 1 - c₀ e^{-βs}`, whose zeros are known exactly.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernels::{big_f, g_psi};
use crate::quadrature::{integrate, IntegrationDomain};
use crate::testfn::Measure;
use crate::{Error, Result};

/// Distance below which a zero counts as lying on the box boundary.
pub const BOUNDARY_GUARD: f64 = 1e-6;

/// `h(s) = 1 - c₀ e^{-βs}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticH {
    c0: f64,
    beta: f64,
}

impl SyntheticH {
    /// `c₀ ≥ 0` (zero gives `h ≡ 1`), `β > 0`.
    pub fn new(c0: f64, beta: f64) -> Result<Self> {
        if !(c0 >= 0.0 && c0.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(format!("need c0 >= 0 and beta > 0, got c0 = {c0}, beta = {beta}")));
        }
        Ok(Self { c0, beta })
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        Complex64::new(1.0, 0.0) - self.c0 * (-self.beta * s).exp()
    }

    /// `log |h(s)|`, accurate when `h` is close to 1.
    pub fn log_abs(&self, sigma: f64, t: f64) -> f64 {
        if self.c0 == 0.0 {
            return 0.0;
        }
        let w = self.c0 * Complex64::new(-self.beta * sigma, -self.beta * t).exp();
        0.5 * (-2.0 * w.re + w.norm_sqr()).ln_1p()
    }

    /// Common real part `ln(c₀)/β` of all zeros (`None` when `c₀ = 0`).
    pub fn zero_real_part(&self) -> Option<f64> {
        (self.c0 > 0.0).then(|| self.c0.ln() / self.beta)
    }

    /// Vertical distance `2π/β` between consecutive zeros.
    pub fn zero_spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.beta
    }

    /// Zeros with imaginary part in `[lo, hi]`.
    pub fn zeros_between(&self, lo: f64, hi: f64) -> Vec<Complex64> {
        let Some(re) = self.zero_real_part() else {
            return Vec::new();
        };
        let sp = self.zero_spacing();
        let k_lo = (lo / sp).ceil() as i64;
        let k_hi = (hi / sp).floor() as i64;
        (k_lo..=k_hi)
            .map(|k| Complex64::new(re, k as f64 * sp))
            .collect()
    }
}

/// Half-strip `Re s ≥ σ'`, `t₁ ≤ Im s ≤ t₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorBox {
    sigma_p: f64,
    t1: f64,
    t2: f64,
}

impl DetectorBox {
    pub fn new(sigma_p: f64, t1: f64, t2: f64) -> Result<Self> {
        if !(t2 > t1) || !sigma_p.is_finite() || !t1.is_finite() || !t2.is_finite() {
            return Err(Error::domain(format!("need finite sigma' and t2 > t1, got [{t1}, {t2}]")));
        }
        Ok(Self { sigma_p, t1, t2 })
    }

    pub fn sigma_p(&self) -> f64 {
        self.sigma_p
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn height(&self) -> f64 {
        self.t2 - self.t1
    }

    /// `π/(t₂ - t₁)`.
    pub fn frequency(&self) -> f64 {
        std::f64::consts::PI / self.height()
    }
}

/// Both sides of the detector identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma6Check {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Zeros strictly inside the half-strip.
    pub zeros_inside: usize,
}

fn ln_sinh(z: f64) -> f64 {
    if z > 20.0 {
        z - std::f64::consts::LN_2 + (-(-2.0 * z).exp()).ln_1p()
    } else {
        z.sinh().ln()
    }
}

/// Evaluates both sides of the identity for `h` on `bx`.
pub fn lemma6_check(h: &SyntheticH, bx: &DetectorBox, tol: f64) -> Result<Lemma6Check> {
    let w = bx.frequency();
    if !(h.beta() > w) {
        return Err(Error::domain(format!(
            "decay rate beta = {} must exceed pi/(t2 - t1) = {w}",
            h.beta()
        )));
    }
    let (sp, t1, t2) = (bx.sigma_p(), bx.t1(), bx.t2());
    let zeros = h.zeros_between(t1 - 1.0, t2 + 1.0);
    for z in &zeros {
        let on_vertical = (z.re - sp).abs() < BOUNDARY_GUARD
            && z.im > t1 - BOUNDARY_GUARD
            && z.im < t2 + BOUNDARY_GUARD;
        let on_horizontal = z.re > sp - BOUNDARY_GUARD
            && ((z.im - t1).abs() < BOUNDARY_GUARD || (z.im - t2).abs() < BOUNDARY_GUARD);
        if on_vertical || on_horizontal {
            return Err(Error::ZeroOnBoundary { re: z.re, im: z.im });
        }
    }

    let inside: Vec<&Complex64> = zeros
        .iter()
        .filter(|z| z.re > sp && z.im > t1 && z.im < t2)
        .collect();
    let lhs = 2.0
        * bx.height()
        * inside
            .iter()
            .map(|z| (w * (z.im - t1)).sin() * (w * (z.re - sp)).sinh())
            .sum::<f64>();

    if h.c0() == 0.0 {
        return Ok(Lemma6Check {
            lhs,
            rhs: 0.0,
            residual: lhs.abs(),
            zeros_inside: inside.len(),
        });
    }

    let zero_ims: Vec<f64> = zeros.iter().map(|z| z.im).collect();
    let vertical = integrate(
        |t| (w * (t - t1)).sin() * h.log_abs(sp, t),
        IntegrationDomain::finite(t1, t2)?,
        tol,
        &zero_ims,
    )?
    .value;

    let rate = h.beta() - w;
    let horizontal_integrand = |sigma: f64| {
        let l = h.log_abs(sigma, t1) + h.log_abs(sigma, t2);
        let z = w * (sigma - sp);
        if l == 0.0 || z <= 0.0 {
            return 0.0;
        }
        // sinh grows while log|h| decays; combine in log space
        l.signum() * (ln_sinh(z) + l.abs().ln()).exp()
    };
    let re_breaks: Vec<f64> = h.zero_real_part().into_iter().collect();
    let horizontal = integrate(
        horizontal_integrand,
        IntegrationDomain::semi_infinite_scaled(sp, 1.0 / rate),
        tol,
        &re_breaks,
    )?
    .value;

    let rhs = vertical + horizontal;
    Ok(Lemma6Check {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        zeros_inside: inside.len(),
    })
}

/// One randomly drawn instance of the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma6Case {
    pub h: SyntheticH,
    pub bx: DetectorBox,
    pub planted: usize,
}

/// Draws a function and a box holding `planted ∈ {0, 1, 2, 3}` zeros, with
/// every zero well away from the boundary.
pub fn random_case<R: Rng>(rng: &mut R) -> Lemma6Case {
    let c0 = rng.gen_range(0.2..5.0);
    let beta = rng.gen_range(0.5..3.0);
    let h = SyntheticH::new(c0, beta).expect("valid ranges");
    let sp = h.zero_spacing();
    let re = h.zero_real_part().expect("c0 > 0");
    let k0 = rng.gen_range(-3i64..=3) as f64;
    let planted = rng.gen_range(0..=3usize);
    let (t1, t2) = if planted == 0 {
        // strip between two consecutive zeros, still wider than half a spacing
        (
            (k0 + rng.gen_range(0.1..0.2)) * sp,
            (k0 + 1.0 - rng.gen_range(0.1..0.2)) * sp,
        )
    } else {
        (
            (k0 - rng.gen_range(0.3..0.45)) * sp,
            (k0 + (planted - 1) as f64 + rng.gen_range(0.3..0.45)) * sp,
        )
    };
    // zeros to the right of σ' unless nothing is planted, in which case
    // either side is fine
    let offset = rng.gen_range(0.1..1.5) / beta;
    let sigma_p = if planted == 0 && rng.gen_bool(0.5) {
        re + offset
    } else {
        re - offset
    };
    Lemma6Case {
        h,
        bx: DetectorBox::new(sigma_p, t1, t2).expect("t2 > t1"),
        planted,
    }
}

/// `n` cases from a ChaCha generator seeded with `seed`.
pub fn random_family(seed: u64, n: usize) -> Vec<Lemma6Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_case(&mut rng)).collect()
}

/// `(λ/(π sin(πμ/(2μ+1)))) · 2(t₂' - t₁') sinh(π(β - σ')/(t₂' - t₁'))
/// sin(π(γ - t₁')/(t₂' - t₁'))` for a zero `β + iγ` of the inner box
/// `[σ, ∞) × [t₁, t₂]`, `t₂ - t₁ = 1/λ`, inside the enlarged box with
/// `σ' = σ - 1/(2λ)` and `t₁' = t₁ - μ/λ`, `t₂' = t₂ + μ/λ`.
pub fn detector_weight(lambda: f64, mu: f64, sigma: f64, t1: f64, zero: Complex64) -> f64 {
    use std::f64::consts::PI;
    let sigma_p = sigma - 0.5 / lambda;
    let t1p = t1 - mu / lambda;
    let hp = (1.0 + 2.0 * mu) / lambda;
    let pref = lambda / (PI * (PI * mu / (2.0 * mu + 1.0)).sin());
    pref * 2.0 * hp * (PI * (zero.re - sigma_p) / hp).sinh() * (PI * (zero.im - t1p) / hp).sin()
}

/// The `μ` with `2μ + 1 = π`.
pub fn critical_mu() -> f64 {
    (std::f64::consts::PI - 1.0) / 2.0
}

/// `(a/(1-a))² (F(1, u) - F(a, u))`.
pub fn density_main_term(a: f64, u: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain(format!("a must lie in the open interval (0, 1), got {a}")));
    }
    let r = a / (1.0 - a);
    Ok(r * r * (big_f(1.0, u)? - big_f(a, u)?))
}

/// `(a/(1-a))² (G_ψ(1) - G_ψ(a))`.
pub fn zt_bound(a: f64, psi: &Measure<f64>) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain(format!("a must lie in the open interval (0, 1), got {a}")));
    }
    if psi.is_zero() {
        return Ok(0.0);
    }
    let r = a / (1.0 - a);
    Ok(r * r * (g_psi(1.0, psi)? - g_psi(a, psi)?))
}
