//! The function `E(x) = ∫₁^∞ e^{-tx} t^{-2} dt = x Γ(-1, x)`.
//!
//! Production evaluation goes through `E(x) = e^{-x} - x E₁(x)`, with the
//! exponential integral `E₁` from its power series below 1 and from a
//! continued fraction above. Quadrature of the defining integrals is kept
//! alongside as an independent route for the identity checks.

use crate::quadrature::{integrate, IntegrationDomain};
use crate::{Error, Real, Result};

const SERIES_CUTOFF: f64 = 1.0;
const MAX_TERMS: usize = 500;

/// `e^x E₁(x)` for `x ≥ 1`, modified Lentz on the classical continued
/// fraction.
fn e1_scaled_cf<T: Real>(x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let two = T::lit(2.0);
    let mut b = x + T::one();
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let k = T::lit(i as f64);
        let an = -k * k;
        b = b + two;
        d = T::one() / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h = h * del;
        if (del - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    h
}

/// `E₁(x)` for `0 < x < 1` by the convergent power series.
fn e1_series<T: Real>(x: T) -> T {
    let mut sum = T::zero();
    let mut term = T::one();
    for k in 1..MAX_TERMS {
        let kf = T::lit(k as f64);
        term = term * (-x) / kf;
        let add = term / kf;
        sum = sum + add;
        if add.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    -T::euler_gamma() - x.ln() - sum
}

/// Exponential integral `E₁(x) = ∫_x^∞ e^{-t} t^{-1} dt`, `x > 0`.
pub fn exp_e1<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::domain(format!("E1 needs x > 0, got {x}")));
    }
    if x < T::lit(SERIES_CUTOFF) {
        Ok(e1_series(x))
    } else {
        Ok(e1_scaled_cf(x) * (-x).exp())
    }
}

/// `e^x E(x)`, finite for every `x ≥ 0` (it behaves like `1/x` at infinity).
pub fn exp_e_scaled<T: Real>(x: T) -> Result<T> {
    if !(x >= T::zero()) {
        return Err(Error::domain(format!(
            "E(x) needs x >= 0, the defining integral diverges at x = {x}"
        )));
    }
    if x == T::zero() {
        return Ok(T::one());
    }
    if x < T::lit(SERIES_CUTOFF) {
        Ok(T::one() - x * x.exp() * e1_series(x))
    } else {
        Ok(T::one() - x * e1_scaled_cf(x))
    }
}

/// `E(x)` for `x ≥ 0`; `E(0) = 1`.
pub fn exp_e<T: Real>(x: T) -> Result<T> {
    if !(x >= T::zero()) {
        return Err(Error::domain(format!(
            "E(x) needs x >= 0, the defining integral diverges at x = {x}"
        )));
    }
    if x == T::zero() {
        return Ok(T::one());
    }
    if x < T::lit(SERIES_CUTOFF) {
        Ok((-x).exp() - x * e1_series(x))
    } else {
        Ok((-x).exp() * (T::one() - x * e1_scaled_cf(x)))
    }
}

/// Infallible `E` for arguments already known to be nonnegative.
#[inline]
pub(crate) fn e_unchecked<T: Real>(x: T) -> T {
    exp_e(x).unwrap_or_else(|_| T::nan())
}

/// `E'(x) = -E₁(x)`.
pub fn exp_e_derivative<T: Real>(x: T) -> Result<T> {
    exp_e1(x).map(|v| -v)
}

/// `E(x)` straight from the defining integral, by adaptive quadrature.
///
/// Needs `x > 0`: at `x = 0` the integrand only decays algebraically.
pub fn exp_e_by_quadrature<T: Real>(x: T, tol: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::domain("quadrature route for E needs x > 0"));
    }
    let dom = IntegrationDomain::semi_infinite_scaled(T::one(), T::one() / x);
    integrate(|t: T| (-t * x).exp() / (t * t), dom, tol, &[]).map(|r| r.value)
}

/// `E₁(x)` straight from its defining integral.
pub fn exp_e1_by_quadrature<T: Real>(x: T, tol: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::domain("E1 needs x > 0"));
    }
    integrate(
        |t: T| (-t).exp() / t,
        IntegrationDomain::semi_infinite(x),
        tol,
        &[],
    )
    .map(|r| r.value)
}

/// `|∫_{1/2}^∞ u^{-2} e^{-(2/a - x) u} du - 2 E((2/a - x)/2)|`.
pub fn identity_half_line_residual<T: Real>(a: T, x: T, tol: T) -> Result<T> {
    let k = T::lit(2.0) / a - x;
    if !(a > T::zero()) || !(k > T::zero()) {
        return Err(Error::domain(format!("need a > 0 and 2/a - x > 0, got a = {a}, x = {x}")));
    }
    let half = T::lit(0.5);
    let lhs = integrate(
        |u: T| (-k * u).exp() / (u * u),
        IntegrationDomain::semi_infinite_scaled(half, T::one() / k),
        tol,
        &[],
    )?
    .value;
    let rhs = T::lit(2.0) * exp_e(half * k)?;
    Ok((lhs - rhs).abs())
}

/// `|∫₁^∞ E(bu) e^{au} u^{-1} du - (E(b - a) - e^a E(b)) / a|` for `b > a`.
pub fn identity_exponential_weight_residual<T: Real>(a: T, b: T, tol: T) -> Result<T> {
    if !(b > a) || a == T::zero() || !(b > T::zero()) {
        return Err(Error::domain(format!("need b > a, b > 0, a != 0; got a = {a}, b = {b}")));
    }
    let lhs = integrate(
        |u: T| {
            let bu = b * u;
            // e^{au} E(bu) = e^{(a-b)u} (e^{bu} E(bu))
            ((a - b) * u).exp() * exp_e_scaled(bu).unwrap_or_else(|_| T::nan()) / u
        },
        IntegrationDomain::semi_infinite_scaled(T::one(), T::one() / (b - a)),
        tol,
        &[],
    )?
    .value;
    let rhs = (exp_e(b - a)? - a.exp() * exp_e(b)?) / a;
    Ok((lhs - rhs).abs())
}

/// Largest residual of the two identities used to reduce the kernel
/// integrals: the half-line one at `(a, x)` and the exponentially weighted
/// one at `(a, b)`.
pub fn verify_e_identities<T: Real>(a: T, b: T, x: T) -> Result<T> {
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(100.0));
    let r12 = identity_half_line_residual(a, x, tol)?;
    let r13 = identity_exponential_weight_residual(a, b, tol)?;
    Ok(r12.max(r13))
}

/// `|E(x) - (e^{-x} - x E₁(x))|` with every term from quadrature.
pub fn integration_by_parts_residual<T: Real>(x: T, tol: T) -> Result<T> {
    let lhs = exp_e_by_quadrature(x, tol)?;
    let rhs = (-x).exp() - x * exp_e1_by_quadrature(x, tol)?;
    Ok((lhs - rhs).abs())
}
