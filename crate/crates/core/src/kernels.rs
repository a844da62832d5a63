//! Zero-density kernels.
//!
//! `F(a, u)` weighs zeros at height `u` above the line, `K(a, x)` is its
//! transform against `e^{xu}` over `u ≥ 1/2`, and `G_ψ(a)` is the resulting
//! functional of a measure `ψ`. All three accept `a = 1`; the `(1 - a)^{-2}`
//! prefactor lives in the callers.

use crate::quadrature::{integrate, integrate_measure_tol, IntegrationDomain, QuadResult, DEFAULT_TOL};
use crate::special::{e_unchecked, exp_e, exp_e1, exp_e_scaled};
use crate::testfn::{laplace_derivative, laplace_tol, Measure};
use crate::{Error, Real, Result};

/// Below this distance from `x = ±1`, `K` switches to its Taylor expansion.
pub const POLE_SERIES_RADIUS: f64 = 1e-3;

/// Shape parameter `a` and box width `Δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams<T> {
    a: T,
    delta: T,
}

impl<T: Real> KernelParams<T> {
    pub fn new(a: T, delta: T) -> Result<Self> {
        if !(a > T::zero() && a < T::one()) {
            return Err(Error::domain(format!("a must lie in the open interval (0, 1), got {a}")));
        }
        if !(delta > T::zero() && delta <= T::lit(0.5)) {
            return Err(Error::domain(format!("delta must lie in (0, 1/2], got {delta}")));
        }
        Ok(Self { a, delta })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// `θ = aΔ`.
    pub fn theta(&self) -> T {
        self.a * self.delta
    }

    /// `a² / (1 - a)²`.
    pub fn main_term_factor(&self) -> T {
        let r = self.a / (T::one() - self.a);
        r * r
    }
}

/// `c = 4π cos(1/2)`.
pub fn c_const<T: Real>() -> T {
    T::lit(4.0) * T::PI() * T::lit(0.5).cos()
}

/// `c` written as `4π sin((π - 1)/2)`.
pub fn c_const_sine_form<T: Real>() -> T {
    T::lit(4.0) * T::PI() * ((T::PI() - T::one()) / T::lit(2.0)).sin()
}

fn check_a<T: Real>(a: T) -> Result<()> {
    if a > T::zero() && a <= T::one() {
        Ok(())
    } else {
        Err(Error::domain(format!("kernel parameter a must lie in (0, 1], got {a}")))
    }
}

/// `F(a, u) = (e^{-2u/a} + u e^{-u} E((2-a)u/a) - u e^u E((2+a)u/a)) / (c u²)`.
///
/// Evaluated as `e^{-2u/a} (1 + u Ê((2-a)u/a) - u Ê((2+a)u/a)) / (c u²)`
/// with `Ê(y) = e^y E(y)`, which never overflows.
pub fn big_f<T: Real>(a: T, u: T) -> Result<T> {
    check_a(a)?;
    if !(u > T::zero()) {
        return Err(Error::domain(format!("F(a, u) needs u > 0, got {u}")));
    }
    let two = T::lit(2.0);
    let minus = exp_e_scaled((two - a) * u / a)?;
    let plus = exp_e_scaled((two + a) * u / a)?;
    let damp = (-two * u / a).exp();
    Ok(damp * (T::one() + u * minus - u * plus) / (c_const::<T>() * u * u))
}

/// `F(a, u)` straight from its definition, with every `E` taken from the
/// defining integral. Independent of [`big_f`].
pub fn big_f_by_quadrature<T: Real>(a: T, u: T, tol: T) -> Result<T> {
    use crate::special::exp_e_by_quadrature;
    check_a(a)?;
    if !(u > T::zero()) {
        return Err(Error::domain(format!("F(a, u) needs u > 0, got {u}")));
    }
    let two = T::lit(2.0);
    let em = exp_e_by_quadrature((two - a) * u / a, tol)?;
    let ep = exp_e_by_quadrature((two + a) * u / a, tol)?;
    let v = (-two * u / a).exp() + u * (-u).exp() * em - u * u.exp() * ep;
    Ok(v / (c_const::<T>() * u * u))
}

/// `(E(y - d/2) - e^{d/2} E(y)) / d`, continuous through `d = 0`.
fn pole_quotient<T: Real>(y: T, d: T) -> Result<T> {
    if d.abs() >= T::lit(POLE_SERIES_RADIUS) {
        return Ok((exp_e(y - d / T::lit(2.0))? - (d / T::lit(2.0)).exp() * exp_e(y)?) / d);
    }
    let e = exp_e(y)?;
    let e1 = exp_e1(y)?;
    let ey = (-y).exp();
    let e2 = ey / y;
    let e3 = -ey * (T::one() / y + T::one() / (y * y));
    let n1 = (e1 - e) / T::lit(2.0);
    let n2 = (e2 - e) / T::lit(4.0);
    let n3 = -(e3 + e) / T::lit(8.0);
    Ok(n1 + d * n2 / T::lit(2.0) + d * d * n3 / T::lit(6.0))
}

/// `K(a, x)` on `[-1, 1]`, with the removable singularities at `x = ±1`
/// filled in by a short Taylor series.
pub fn big_k<T: Real>(a: T, x: T) -> Result<T> {
    check_a(a)?;
    if !(x.abs() <= T::one()) {
        return Err(Error::domain(format!("K(a, x) is used on [-1, 1], got x = {x}")));
    }
    let half = T::lit(0.5);
    let two_over_a = T::lit(2.0) / a;
    let y0 = half * (two_over_a - x);
    let e0 = exp_e(y0)?;
    let right = pole_quotient(half * (two_over_a - T::one()), x - T::one())?;
    let left = pole_quotient(half * (two_over_a + T::one()), x + T::one())?;
    Ok(T::lit(2.0) / c_const::<T>() * (e0 + right - left))
}

/// `K(a, x)` with no series branch; loses accuracy close to `x = ±1`.
pub fn big_k_direct<T: Real>(a: T, x: T) -> T {
    let half = T::lit(0.5);
    let two_over_a = T::lit(2.0) / a;
    let e0 = e_unchecked(half * (two_over_a - x));
    let r = (e0 - (half * (x - T::one())).exp() * e_unchecked(half * (two_over_a - T::one())))
        / (x - T::one());
    let l = (e0 - (half * (x + T::one())).exp() * e_unchecked(half * (two_over_a + T::one())))
        / (x + T::one());
    T::lit(2.0) / c_const::<T>() * (e0 + r - l)
}

/// `∫_{1/2}^∞ F(a, u) e^{xu} du` by quadrature, the integral that `K(a, x)`
/// is (up to a term that cancels in `K(1, x) - K(a, x)`) the closed form of.
pub fn f_transform_by_quadrature<T: Real>(a: T, x: T, tol: T) -> Result<T> {
    check_a(a)?;
    let rate = T::lit(2.0) / a - x;
    if !(rate > T::zero()) {
        return Err(Error::domain("transform diverges for x >= 2/a"));
    }
    let mut failure = None;
    let r = integrate(
        |u: T| match big_f(a, u) {
            Ok(f) => f * (x * u).exp(),
            Err(e) => {
                failure.get_or_insert(e);
                T::zero()
            }
        },
        IntegrationDomain::semi_infinite_scaled(T::lit(0.5), T::one() / rate),
        tol,
        &[],
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// How the point masses of `ψ` enter the `ψ̂(1)` factor of `G_ψ`.
///
/// `DensityOnly` reproduces the published values of `G_{|φ''|}(1)` and
/// `H(a)`; `Full` is the literal Laplace transform of the whole measure.
/// The `K`-integral always uses the whole measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HatWeighting {
    Full,
    #[default]
    DensityOnly,
}

/// `G_ψ(a) = F(a, 1/2) ψ̂(1) + ∫ x K(a, x) e^{x/2} dψ(x)`, with the default
/// [`HatWeighting`].
pub fn g_psi<T: Real>(a: T, psi: &Measure<T>) -> Result<T> {
    g_psi_with(a, psi, HatWeighting::default(), T::lit(DEFAULT_TOL)).map(|r| r.value)
}

pub fn g_psi_with<T: Real>(
    a: T,
    psi: &Measure<T>,
    weighting: HatWeighting,
    tol: T,
) -> Result<QuadResult<T>> {
    check_a(a)?;
    let half = T::lit(0.5);
    let hat = match weighting {
        HatWeighting::Full => laplace_tol(psi, T::one(), tol)?,
        HatWeighting::DensityOnly => laplace_tol(&psi.without_atoms(), T::one(), tol)?,
    };
    let mut failure = None;
    let k_part = integrate_measure_tol(
        |x| match big_k(a, x) {
            Ok(k) => x * k * (half * x).exp(),
            Err(e) => {
                failure.get_or_insert(e);
                T::zero()
            }
        },
        psi,
        tol,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let f = big_f(a, half)?;
    Ok(QuadResult {
        value: f * hat.value + k_part.value,
        err_estimate: f.abs() * hat.err_estimate + k_part.err_estimate,
    })
}

/// Both sides of the Lemma-1 reduction and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Check<T> {
    /// `(a/(1-a))² ∫_{1/2}^∞ (F(1,u) - F(a,u)) ψ̂'(u + 1/2) du`.
    pub lhs: T,
    /// `(a/(1-a))² ∫ x e^{x/2} (K(1,x) - K(a,x)) dψ(x)`.
    pub rhs: T,
    pub residual: T,
}

/// Computes the double integral over `u` directly and compares it with the
/// `K`-form.
pub fn verify_lemma1<T: Real>(a: T, psi: &Measure<T>) -> Result<Lemma1Check<T>> {
    if !(a > T::zero() && a < T::one()) {
        return Err(Error::domain(format!("a must lie in the open interval (0, 1), got {a}")));
    }
    if psi.is_zero() {
        return Ok(Lemma1Check {
            lhs: T::zero(),
            rhs: T::zero(),
            residual: T::zero(),
        });
    }
    let tol = T::lit(1e-11).max(T::epsilon() * T::lit(1e3));
    let r = a / (T::one() - a);
    let pref = r * r;
    let half = T::lit(0.5);
    let mut failure = None;
    let lhs = integrate(
        |u: T| {
            let diff = match (big_f(T::one(), u), big_f(a, u)) {
                (Ok(f1), Ok(fa)) => f1 - fa,
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    return T::zero();
                }
            };
            if diff == T::zero() {
                return T::zero();
            }
            match laplace_derivative(psi, u + half, tol) {
                Ok(d) => diff * d.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    T::zero()
                }
            }
        },
        IntegrationDomain::semi_infinite_scaled(half, T::one()),
        tol,
        &[],
    )?
    .value;
    if let Some(e) = failure {
        return Err(e);
    }
    let rhs = integrate_measure_tol(
        |x| match (big_k(T::one(), x), big_k(a, x)) {
            (Ok(k1), Ok(ka)) => x * (half * x).exp() * (k1 - ka),
            (Err(e), _) | (_, Err(e)) => {
                failure.get_or_insert(e);
                T::zero()
            }
        },
        psi,
        tol,
    )?
    .value;
    if let Some(e) = failure {
        return Err(e);
    }
    let (lhs, rhs) = (pref * lhs, pref * rhs);
    Ok(Lemma1Check {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

/// Which of the two boundary integrals `I_a^±`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// `I_a^±/λ` in closed form and by quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IPm<T> {
    pub closed: T,
    pub quadrature: T,
    pub residual: T,
}

/// `I_a^±/λ = (e^{∓u}/u) E(u (2/a ∓ 1))`, checked against
/// `e^{∓u} ∫_u^∞ e^{-(2/a ∓ 1) v} v^{-2} dv`.
pub fn i_pm<T: Real>(a: T, u: T, side: Side) -> Result<IPm<T>> {
    if !(a > T::zero() && a < T::one()) {
        return Err(Error::domain(format!("a must lie in the open interval (0, 1), got {a}")));
    }
    if !(u > T::zero()) {
        return Err(Error::domain(format!("u must be positive, got {u}")));
    }
    let (sign, rate) = match side {
        Side::Plus => (-T::one(), T::lit(2.0) / a - T::one()),
        Side::Minus => (T::one(), T::lit(2.0) / a + T::one()),
    };
    let pre = (sign * u).exp();
    let closed = pre / u * exp_e(rate * u)?;
    // relative tolerance: the tail can be far below any fixed absolute one
    let rel = T::lit(1e-13).max(T::epsilon() * T::lit(100.0));
    let tol = (rel * closed / pre).max(T::min_positive_value());
    let tail = integrate(
        |v: T| (-rate * v).exp() / (v * v),
        IntegrationDomain::semi_infinite_scaled(u, T::one() / rate),
        tol,
        &[],
    )?
    .value;
    let quadrature = pre * tail;
    Ok(IPm {
        closed,
        quadrature,
        residual: (closed - quadrature).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::limit_measure;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_c() {
        let c: f64 = c_const();
        assert_abs_diff_eq!(c, 11.028, epsilon = 1e-3);
        assert!((c - c_const_sine_form::<f64>()).abs() < 1e-14);
        // cos(1/2) by its Taylor series
        let mut cos_half = 0.0;
        let mut term = 1.0;
        for k in 0..12 {
            cos_half += term;
            term *= -0.25 / (((2 * k + 1) * (2 * k + 2)) as f64);
        }
        assert_abs_diff_eq!(c / (4.0 * std::f64::consts::PI), cos_half, epsilon = 1e-15);
    }

    #[test]
    fn kernel_params_validation() {
        assert!(KernelParams::new(1.0f64, 0.5).is_err());
        assert!(KernelParams::new(0.48f64, 0.6).is_err());
        let p = KernelParams::new(0.48f64, 0.5).unwrap();
        assert_abs_diff_eq!(p.theta(), 0.24);
    }

    #[test]
    fn f_decays() {
        assert!(big_f(1.0f64, 30.0).unwrap().abs() < 1e-12);
        assert!(big_f(1.0f64, 0.0).is_err());
    }

    #[test]
    fn f_matches_quadrature_route() {
        for &a in &[1.0f64, 0.48] {
            let fast = big_f(a, 0.5).unwrap();
            let slow = big_f_by_quadrature(a, 0.5, 1e-14).unwrap();
            assert_abs_diff_eq!(fast, slow, epsilon = 1e-9);
        }
    }

    #[test]
    fn k_removable_singularities() {
        for &a in &[1.0f64, 0.48] {
            for &end in &[1.0f64, -1.0] {
                // Richardson extrapolation of the direct formula from inside.
                let h = 0.01;
                let k1 = big_k_direct(a, end - end.signum() * h);
                let k2 = big_k_direct(a, end - end.signum() * h / 2.0);
                let k4 = big_k_direct(a, end - end.signum() * h / 4.0);
                let r1 = 2.0 * k2 - k1;
                let r2 = 2.0 * k4 - k2;
                let extrap = (4.0 * r2 - r1) / 3.0;
                assert_abs_diff_eq!(big_k(a, end).unwrap(), extrap, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn k_series_and_direct_agree_at_switch() {
        let inside = big_k(0.48f64, 1.0 - 0.999e-3).unwrap();
        let outside = big_k(0.48f64, 1.0 - 1.001e-3).unwrap();
        assert!((inside - outside).abs() < 1e-5);
    }

    #[test]
    fn k_continuity_near_poles() {
        for &a in &[1.0f64, 0.48] {
            let mut max_k = 0.0f64;
            let mut max_jump = 0.0f64;
            let n = 2000;
            for i in 0..n {
                let x = -1.0 + 2.0 * i as f64 / n as f64;
                let x2 = (x + 1e-4).min(1.0);
                let k = big_k(a, x).unwrap();
                max_k = max_k.max(k.abs());
                max_jump = max_jump.max((k - big_k(a, x2).unwrap()).abs());
            }
            assert!(max_jump <= 1e-2 * (1.0 + max_k));
        }
    }

    #[test]
    fn k_difference_matches_transform_of_f() {
        for &x in &[-0.7f64, 0.0, 0.6] {
            let lhs = f_transform_by_quadrature(1.0, x, 1e-13).unwrap()
                - f_transform_by_quadrature(0.48, x, 1e-13).unwrap();
            let rhs = big_k(1.0, x).unwrap() - big_k(0.48, x).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
        }
    }

    #[test]
    fn g_values_at_one() {
        let g0 = g_psi(1.0f64, &limit_measure(0).unwrap()).unwrap();
        let g1 = g_psi(1.0f64, &limit_measure(1).unwrap()).unwrap();
        let g2 = g_psi(1.0f64, &limit_measure(2).unwrap()).unwrap();
        assert_abs_diff_eq!(g0, 0.1535, epsilon = 5e-4);
        assert_abs_diff_eq!(g1, 0.3666, epsilon = 5e-4);
        assert_abs_diff_eq!(g2, 0.3321, epsilon = 5e-4);
    }

    #[test]
    fn hat_weighting_only_matters_with_atoms() {
        let m = limit_measure::<f64>(0).unwrap();
        let full = g_psi_with(0.7, &m, HatWeighting::Full, 1e-10).unwrap().value;
        let dens = g_psi_with(0.7, &m, HatWeighting::DensityOnly, 1e-10).unwrap().value;
        assert_eq!(full, dens);
        let m2 = limit_measure::<f64>(2).unwrap();
        let full = g_psi_with(1.0, &m2, HatWeighting::Full, 1e-10).unwrap().value;
        let dens = g_psi_with(1.0, &m2, HatWeighting::DensityOnly, 1e-10).unwrap().value;
        let hat_atoms = 2.0 + (1.0 / 1.0f64.cosh()) * (1.0f64.exp() + (-1.0f64).exp());
        assert_abs_diff_eq!(full - dens, big_f(1.0, 0.5).unwrap() * hat_atoms, epsilon = 1e-9);
    }

    #[test]
    fn lemma1_residuals() {
        for order in [0, 2] {
            let m = limit_measure::<f64>(order).unwrap();
            let c = verify_lemma1(0.48, &m).unwrap();
            assert!(c.residual < 1e-6, "order {order}: {c:?}");
        }
        let z = verify_lemma1(0.3f64, &Measure::zero()).unwrap();
        assert_eq!(z.residual, 0.0);
    }

    #[test]
    fn main_term_nonnegative_on_grid() {
        for i in 1..10 {
            let a = i as f64 / 10.0;
            let p = (a / (1.0 - a)).powi(2);
            for k in 0..40 {
                let u = 0.5 * (40.0f64).powf(k as f64 / 39.0);
                let v = p * (big_f(1.0, u).unwrap() - big_f(a, u).unwrap());
                assert!(v >= -1e-12, "a = {a}, u = {u}: {v}");
            }
        }
    }

    #[test]
    fn i_pm_closed_forms() {
        for side in [Side::Plus, Side::Minus] {
            let r = i_pm(0.48f64, 0.5, side).unwrap();
            assert!(r.residual < 1e-8, "{side:?}: {r:?}");
        }
        assert!(i_pm(0.48f64, 30.0, Side::Minus).unwrap().closed < 1e-12);
        assert!(i_pm(0.48f64, 0.0, Side::Plus).is_err());
    }
}
