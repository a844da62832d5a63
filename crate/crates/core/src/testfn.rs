//! Test functions for the explicit formula.
//!
//! `φ_ε = (g_ε ⋆ g_ε) / cosh`, normalised to `φ_ε(0) = 1`, where `g_ε` is an
//! even smooth plateau: 1 on `[-1/2, 1/2]`, 0 outside `[-1/2-ε, 1/2+ε]`. As
//! `ε → 0` it tends to `φ₀(x) = max(0, 1 - |x|) / cosh x`, and the integrals of
//! `|φ_ε|`, `|φ_ε'|`, `|φ_ε''|` against continuous weights tend to integrals
//! against three limit measures. The last of those picks up point masses
//! where `φ₀'` jumps: at `0` and at `±1`.

use std::sync::Arc;

use crate::quadrature::{
    integrate, integrate_measure, integrate_measure_tol, CompositeRule, IntegrationDomain,
    QuadResult, DEFAULT_TOL,
};
use crate::{Error, Real, Result};

/// Value, first and second derivative.
pub type Jet<T> = [T; 3];

type Piece<T> = Arc<dyn Fn(T) -> Jet<T> + Send + Sync>;

/// A real function on `[b₀, b_n]` given piece by piece, zero outside.
///
/// At an interior breakpoint the right-hand piece is used; [`Self::jet_left`]
/// gives the other one-sided limit.
#[derive(Clone)]
pub struct PiecewiseSmoothFn<T> {
    breakpoints: Vec<T>,
    pieces: Vec<Piece<T>>,
    /// Per breakpoint: is the value continuous there (with the zero
    /// extension at the two ends)?
    value_continuous: Vec<bool>,
    /// Per breakpoint: is the first derivative continuous there?
    slope_continuous: Vec<bool>,
}

impl<T: std::fmt::Debug> std::fmt::Debug for PiecewiseSmoothFn<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PiecewiseSmoothFn")
            .field("breakpoints", &self.breakpoints)
            .field("value_continuous", &self.value_continuous)
            .field("slope_continuous", &self.slope_continuous)
            .finish_non_exhaustive()
    }
}

impl<T: Real> PiecewiseSmoothFn<T> {
    pub fn new(
        breakpoints: Vec<T>,
        pieces: Vec<Piece<T>>,
        value_continuous: Vec<bool>,
        slope_continuous: Vec<bool>,
    ) -> Result<Self> {
        if breakpoints.len() < 2 || pieces.len() + 1 != breakpoints.len() {
            return Err(Error::domain("need n + 1 breakpoints for n pieces, n >= 1"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("breakpoints must be strictly increasing"));
        }
        if value_continuous.len() != breakpoints.len() || slope_continuous.len() != breakpoints.len() {
            return Err(Error::domain("one continuity flag per breakpoint"));
        }
        Ok(Self {
            breakpoints,
            pieces,
            value_continuous,
            slope_continuous,
        })
    }

    /// A single smooth piece on `[lo, hi]`.
    pub fn single(lo: T, hi: T, piece: Piece<T>) -> Result<Self> {
        Self::new(vec![lo, hi], vec![piece], vec![false, false], vec![false, false])
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn support(&self) -> Option<(T, T)> {
        Some((*self.breakpoints.first()?, *self.breakpoints.last()?))
    }

    pub fn value_continuous(&self) -> &[bool] {
        &self.value_continuous
    }

    pub fn slope_continuous(&self) -> &[bool] {
        &self.slope_continuous
    }

    fn locate(&self, x: T) -> Option<usize> {
        let n = self.breakpoints.len();
        if x < self.breakpoints[0] || x > self.breakpoints[n - 1] {
            return None;
        }
        // number of breakpoints <= x, minus one, clamped to a valid piece
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        Some(idx.saturating_sub(1).min(self.pieces.len() - 1))
    }

    pub fn jet(&self, x: T) -> Jet<T> {
        match self.locate(x) {
            Some(i) => (self.pieces[i])(x),
            None => [T::zero(); 3],
        }
    }

    /// Limit from the left at `x` (equal to [`Self::jet`] away from breakpoints).
    pub fn jet_left(&self, x: T) -> Jet<T> {
        let n = self.breakpoints.len();
        if x <= self.breakpoints[0] || x > self.breakpoints[n - 1] {
            return [T::zero(); 3];
        }
        let idx = self.breakpoints.partition_point(|&b| b < x);
        (self.pieces[(idx - 1).min(self.pieces.len() - 1)])(x)
    }

    /// Limit from the right at `x`.
    pub fn jet_right(&self, x: T) -> Jet<T> {
        let n = self.breakpoints.len();
        if x < self.breakpoints[0] || x >= self.breakpoints[n - 1] {
            return [T::zero(); 3];
        }
        self.jet(x)
    }

    pub fn value(&self, x: T) -> T {
        self.jet(x)[0]
    }

    pub fn derivative(&self, x: T) -> T {
        self.jet(x)[1]
    }

    pub fn second_derivative(&self, x: T) -> T {
        self.jet(x)[2]
    }
}

/// A nonnegative measure: a piecewise smooth density plus point masses.
#[derive(Debug, Clone)]
pub struct Measure<T> {
    density: Option<PiecewiseSmoothFn<T>>,
    atoms: Vec<(T, T)>,
}

impl<T: Real> Measure<T> {
    /// Validates nonnegativity of masses, a sampled nonnegativity check of
    /// the density, and that atoms sit in the closure of the density support.
    pub fn new(density: Option<PiecewiseSmoothFn<T>>, atoms: Vec<(T, T)>) -> Result<Self> {
        if atoms.iter().any(|&(loc, m)| !(m >= T::zero()) || !loc.is_finite()) {
            return Err(Error::domain("atom masses must be nonnegative and locations finite"));
        }
        if let Some(d) = &density {
            let (lo, hi) = d.support().expect("validated on construction");
            if atoms.iter().any(|&(loc, _)| loc < lo || loc > hi) {
                return Err(Error::domain("atom outside the support of the density"));
            }
            for w in d.breakpoints().windows(2) {
                for k in 1..8 {
                    let x = w[0] + (w[1] - w[0]) * T::lit(k as f64 / 8.0);
                    if d.value(x) < T::zero() {
                        return Err(Error::domain(format!("density negative at {x}")));
                    }
                }
            }
        }
        Ok(Self { density, atoms })
    }

    pub fn zero() -> Self {
        Self {
            density: None,
            atoms: Vec::new(),
        }
    }

    pub fn atom(location: T, mass: T) -> Result<Self> {
        Self::new(None, vec![(location, mass)])
    }

    /// Lebesgue measure restricted to `[lo, hi]`.
    pub fn lebesgue(lo: T, hi: T) -> Result<Self> {
        let one: Piece<T> = Arc::new(|_| [T::one(), T::zero(), T::zero()]);
        Self::new(Some(PiecewiseSmoothFn::single(lo, hi, one)?), Vec::new())
    }

    pub fn density(&self) -> Option<&PiecewiseSmoothFn<T>> {
        self.density.as_ref()
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.density.is_none() && self.atoms.iter().all(|&(_, m)| m == T::zero())
    }

    /// The absolutely continuous part alone.
    pub fn without_atoms(&self) -> Self {
        Self {
            density: self.density.clone(),
            atoms: Vec::new(),
        }
    }

    /// `k · μ` for `k ≥ 0`.
    pub fn scaled(&self, k: T) -> Result<Self> {
        if !(k >= T::zero()) {
            return Err(Error::domain("measures can only be scaled by k >= 0"));
        }
        let density = self.density.as_ref().map(|d| {
            let pieces = d
                .pieces
                .iter()
                .map(|p| {
                    let p = Arc::clone(p);
                    let piece: Piece<T> = Arc::new(move |x| {
                        let [v, d1, d2] = p(x);
                        [k * v, k * d1, k * d2]
                    });
                    piece
                })
                .collect();
            PiecewiseSmoothFn {
                breakpoints: d.breakpoints.clone(),
                pieces,
                value_continuous: d.value_continuous.clone(),
                slope_continuous: d.slope_continuous.clone(),
            }
        });
        let atoms = self.atoms.iter().map(|&(l, m)| (l, k * m)).collect();
        Ok(Self { density, atoms })
    }

    pub fn total_mass(&self) -> Result<QuadResult<T>> {
        integrate_measure(|_| T::one(), self)
    }

    /// Smallest closed interval holding the density support and every atom.
    pub fn hull(&self) -> Option<(T, T)> {
        let mut lo: Option<T> = None;
        let mut hi: Option<T> = None;
        let mut take = |x: T| {
            lo = Some(lo.map_or(x, |l: T| l.min(x)));
            hi = Some(hi.map_or(x, |h: T| h.max(x)));
        };
        if let Some((a, b)) = self.density.as_ref().and_then(|d| d.support()) {
            take(a);
            take(b);
        }
        for &(l, _) in &self.atoms {
            take(l);
        }
        Some((lo?, hi?))
    }
}

/// `(1 - x) sech x` and its first four derivatives, valid on `[0, 1]`.
fn phi0_right_jet<T: Real>(x: T) -> [T; 5] {
    let s = T::one() / x.cosh();
    let t = x.tanh();
    let w = T::one() - x;
    let c = T::lit;
    let t2 = t * t;
    [
        w * s,
        -s - w * s * t,
        c(2.0) * s * t + w * s * (c(2.0) * t2 - T::one()),
        c(3.0) * s - c(6.0) * s * t2 + w * s * t * (c(5.0) - c(6.0) * t2),
        c(24.0) * s * t2 * t - c(20.0) * s * t + w * s * (c(24.0) * t2 * t2 - c(28.0) * t2 + c(5.0)),
    ]
}

/// Jet of `sign · φ₀^{(order)}` on one side of the origin: derivatives of
/// orders `order..order+2`, mirrored for `x < 0`.
fn phi0_piece<T: Real>(order: usize, sign: T, mirrored: bool) -> Piece<T> {
    Arc::new(move |x: T| {
        let y = if mirrored { -x } else { x };
        let j = phi0_right_jet(y);
        let mut out = [T::zero(); 3];
        for (k, o) in out.iter_mut().enumerate() {
            // d^k/dx^k of f^{(order)}(-x) = (-1)^{order+k} f^{(order+k)}(-x)
            let flip = if mirrored && (order + k) % 2 == 1 { -T::one() } else { T::one() };
            *o = sign * flip * j[order + k];
        }
        out
    })
}

/// `φ₀(x) = max(0, 1 - |x|) / cosh x`, with breakpoints `-1, 0, 1`.
pub fn phi0_pieces<T: Real>() -> PiecewiseSmoothFn<T> {
    PiecewiseSmoothFn::new(
        vec![-T::one(), T::zero(), T::one()],
        vec![
            phi0_piece(0, T::one(), true),
            phi0_piece(0, T::one(), false),
        ],
        vec![true, true, true],
        vec![false, false, false],
    )
    .expect("static layout")
}

/// The point in `(0, 1)` where `φ₀''` changes sign.
pub fn phi0_inflection<T: Real>() -> T {
    let f2 = |x: T| phi0_right_jet(x)[2];
    let (mut lo, mut hi) = (T::zero(), T::one());
    // f''(0) = -1 < 0 < f''(1) = 2 sech(1) tanh(1)
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f2(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    T::lit(0.5) * (lo + hi)
}

/// The `ε → 0` limit of `|φ_ε^{(order)}(x)| dx`.
///
/// * order 0: density `|φ₀|`;
/// * order 1: density `|φ₀'|`;
/// * order 2: density `|φ₀''|` off `{-1, 0, 1}` plus the jumps of `φ₀'`:
///   mass 2 at 0 and `sech 1` at each of `±1`.
pub fn limit_measure<T: Real>(order: u32) -> Result<Measure<T>> {
    let one = T::one();
    let density = match order {
        0 => phi0_pieces(),
        // φ₀' < 0 on (0, 1) and φ₀' is odd, so |φ₀'| is -φ₀' mirrored to both sides.
        1 => PiecewiseSmoothFn::new(
            vec![-one, T::zero(), one],
            vec![phi0_piece(1, one, true), phi0_piece(1, -one, false)],
            vec![false, true, false],
            vec![false, false, false],
        )?,
        2 => {
            let r = phi0_inflection::<T>();
            // φ₀'' < 0 on (0, r), > 0 on (r, 1); even in x.
            PiecewiseSmoothFn::new(
                vec![-one, -r, T::zero(), r, one],
                vec![
                    phi0_piece(2, one, true),
                    phi0_piece(2, -one, true),
                    phi0_piece(2, -one, false),
                    phi0_piece(2, one, false),
                ],
                vec![false, true, true, true, false],
                vec![false, false, false, false, false],
            )?
        }
        other => {
            return Err(Error::domain(format!(
                "limit measures exist for orders 0, 1, 2; got {other}"
            )))
        }
    };
    let atoms = if order == 2 {
        let jump_end = one / one.cosh();
        vec![
            (-one, jump_end),
            (T::zero(), T::lit(2.0)),
            (one, jump_end),
        ]
    } else {
        Vec::new()
    };
    Measure::new(Some(density), atoms)
}

/// Largest `|s|` accepted by [`laplace`].
pub const LAPLACE_MAX_ABS: f64 = 4.0;

/// `∫ e^{sx} dμ(x)`.
pub fn laplace<T: Real>(m: &Measure<T>, s: T) -> Result<QuadResult<T>> {
    laplace_tol(m, s, T::lit(DEFAULT_TOL))
}

pub fn laplace_tol<T: Real>(m: &Measure<T>, s: T, tol: T) -> Result<QuadResult<T>> {
    if !(s.abs() <= T::lit(LAPLACE_MAX_ABS)) {
        return Err(Error::domain(format!("|s| must be <= {LAPLACE_MAX_ABS}, got {s}")));
    }
    integrate_measure_tol(|x| (s * x).exp(), m, tol)
}

/// `d/ds ∫ e^{sx} dμ(x) = ∫ x e^{sx} dμ(x)`. No bound on `s` beyond
/// finiteness: the kernel identities evaluate it far out on the real line.
pub fn laplace_derivative<T: Real>(m: &Measure<T>, s: T, tol: T) -> Result<QuadResult<T>> {
    integrate_measure_tol(|x| x * (s * x).exp(), m, tol)
}

/// Smoothing width `ε ∈ (0, 1/4]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SmoothingParam<T>(T);

impl<T: Real> SmoothingParam<T> {
    pub fn new(eps: T) -> Result<Self> {
        if eps > T::zero() && eps <= T::lit(0.25) {
            Ok(Self(eps))
        } else {
            Err(Error::domain(format!("smoothing width must lie in (0, 1/4], got {eps}")))
        }
    }

    pub fn get(self) -> T {
        self.0
    }
}

/// `e^{-1/y}` for `y > 0`, else 0.
fn bump_tail<T: Real>(y: T) -> T {
    if y > T::zero() {
        (-T::one() / y).exp()
    } else {
        T::zero()
    }
}

/// C^∞ step from 0 (at `y ≤ 0`) to 1 (at `y ≥ 1`).
fn smoothstep<T: Real>(y: T) -> T {
    if y <= T::zero() {
        return T::zero();
    }
    if y >= T::one() {
        return T::one();
    }
    let a = bump_tail(y);
    let b = bump_tail(T::one() - y);
    a / (a + b)
}

fn smoothstep_derivative<T: Real>(y: T) -> T {
    if y <= T::zero() || y >= T::one() {
        return T::zero();
    }
    let a = bump_tail(y);
    let b = bump_tail(T::one() - y);
    let z = T::one() - y;
    let num = a * b * (T::one() / (y * y) + T::one() / (z * z));
    let den = (a + b) * (a + b);
    if den == T::zero() {
        T::zero()
    } else {
        num / den
    }
}

/// The plateau `g_ε`.
pub fn g_eps<T: Real>(eps: SmoothingParam<T>, x: T) -> T {
    let e = eps.get();
    let ax = x.abs();
    let half = T::lit(0.5);
    if ax <= half {
        T::one()
    } else {
        smoothstep((half + e - ax) / e)
    }
}

/// `g_ε'`, in closed form.
pub fn g_eps_derivative<T: Real>(eps: SmoothingParam<T>, x: T) -> T {
    let e = eps.get();
    let ax = x.abs();
    let half = T::lit(0.5);
    if ax <= half || ax >= half + e {
        return T::zero();
    }
    let d = smoothstep_derivative((half + e - ax) / e) / e;
    if x > T::zero() {
        -d
    } else {
        d
    }
}

/// `φ_ε` with its first two derivatives, evaluated by direct quadrature of
/// the convolutions `g⋆g`, `g'⋆g` and `g'⋆g'`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothedTestFn<T> {
    eps: SmoothingParam<T>,
    norm: T,
    tol: T,
}

#[derive(Clone, Copy)]
enum Factor {
    Plain,
    Slope,
}

impl<T: Real> SmoothedTestFn<T> {
    pub fn new(eps: SmoothingParam<T>) -> Result<Self> {
        let tol = T::lit(1e-13).max(T::epsilon() * T::lit(64.0));
        let mut f = Self {
            eps,
            norm: T::one(),
            tol,
        };
        f.norm = f.convolve(Factor::Plain, Factor::Plain, T::zero())?;
        Ok(f)
    }

    pub fn eps(&self) -> SmoothingParam<T> {
        self.eps
    }

    /// `(g_ε ⋆ g_ε)(0) = ∫ g_ε²`, the normalising constant.
    pub fn normalisation(&self) -> T {
        self.norm
    }

    /// Support `[-1-2ε, 1+2ε]` and the points where the convolution
    /// derivatives switch regime.
    pub fn breakpoints(&self) -> Vec<T> {
        let e = self.eps.get();
        let one = T::one();
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        vec![
            -one - two * e,
            -one - e,
            -one,
            -e,
            -half * e,
            T::zero(),
            half * e,
            e,
            one,
            one + e,
            one + two * e,
        ]
    }

    fn factor(&self, which: Factor, x: T) -> T {
        match which {
            Factor::Plain => g_eps(self.eps, x),
            Factor::Slope => g_eps_derivative(self.eps, x),
        }
    }

    fn convolve(&self, a: Factor, b: Factor, x: T) -> Result<T> {
        let e = self.eps.get();
        let half = T::lit(0.5);
        let w = half + e;
        let lo = (-w).max(x - w);
        let hi = w.min(x + w);
        if !(hi > lo) {
            return Ok(T::zero());
        }
        let bps = [-w, -half, half, w, x - w, x - half, x + half, x + w];
        let r = integrate(
            |t| self.factor(a, t) * self.factor(b, x - t),
            IntegrationDomain::Finite { lo, hi },
            self.tol,
            &bps,
        )?;
        Ok(r.value)
    }

    /// `[φ_ε(x), φ_ε'(x), φ_ε''(x)]`.
    pub fn jet(&self, x: T) -> Result<Jet<T>> {
        let ax = x.abs();
        let e = self.eps.get();
        if ax >= T::one() + T::lit(2.0) * e {
            return Ok([T::zero(); 3]);
        }
        let p = self.convolve(Factor::Plain, Factor::Plain, ax)?;
        let mut p1 = self.convolve(Factor::Slope, Factor::Plain, ax)?;
        let p2 = self.convolve(Factor::Slope, Factor::Slope, ax)?;
        if x < T::zero() {
            p1 = -p1;
        }
        let sech = T::one() / x.cosh();
        let th = x.tanh();
        let two = T::lit(2.0);
        Ok([
            p * sech / self.norm,
            sech * (p1 - p * th) / self.norm,
            sech * (p2 - two * p1 * th + p * (th * th - sech * sech)) / self.norm,
        ])
    }

    pub fn value(&self, x: T) -> Result<T> {
        Ok(self.jet(x)?[0])
    }

    /// `∫ |φ_ε^{(order)}(x)| h(x) dx`.
    pub fn abs_derivative_functional(
        &self,
        order: usize,
        mut h: impl FnMut(T) -> T,
        tol: T,
    ) -> Result<QuadResult<T>> {
        if order > 2 {
            return Err(Error::domain("only orders 0, 1, 2 are tabulated"));
        }
        let bps = self.breakpoints();
        let (lo, hi) = (bps[0], bps[bps.len() - 1]);
        let mut failure = None;
        let r = integrate(
            |x| match self.jet(x) {
                Ok(j) => j[order].abs() * h(x),
                Err(e) => {
                    failure.get_or_insert(e);
                    T::zero()
                }
            },
            IntegrationDomain::Finite { lo, hi },
            tol,
            &bps,
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(r),
        }
    }
}

/// `φ_ε(x)`, normalised so that `φ_ε(0) = 1`.
pub fn phi_eps<T: Real>(eps: SmoothingParam<T>, x: T) -> Result<T> {
    SmoothedTestFn::new(eps)?.value(x)
}

/// `∫ h dμ_j` against the limit measure of order `j`.
pub fn limit_functional<T: Real>(order: u32, h: impl FnMut(T) -> T, tol: T) -> Result<QuadResult<T>> {
    integrate_measure_tol(h, &limit_measure(order)?, tol)
}

/// Sampling grid for `Re φ̂(σ + iτ)`: σ on `sigma_steps + 1` equally spaced
/// points of `[-sigma_max, sigma_max]`, τ from 0 to `tau_max` by `tau_step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityGrid {
    pub sigma_max: f64,
    pub sigma_steps: usize,
    pub tau_max: f64,
    pub tau_step: f64,
}

impl Default for PositivityGrid {
    fn default() -> Self {
        Self {
            sigma_max: 1.0,
            sigma_steps: 20,
            tau_max: 20.0,
            tau_step: 0.1,
        }
    }
}

impl PositivityGrid {
    fn points(&self) -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        let n_tau = (self.tau_max / self.tau_step + 1e-9).floor() as usize;
        for i in 0..=self.sigma_steps {
            let sigma = if self.sigma_steps == 0 {
                0.0
            } else {
                -self.sigma_max + 2.0 * self.sigma_max * i as f64 / self.sigma_steps as f64
            };
            for k in 0..=n_tau {
                pts.push((sigma, k as f64 * self.tau_step));
            }
        }
        pts
    }
}

/// Smallest sampled value of `Re φ̂(σ + iτ)` and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    pub min: f64,
    pub sigma: f64,
    pub tau: f64,
}

/// Minimum over `grid` of `∫ f(x) e^{σx} cos(τx) dx`, with `f` sampled once
/// on a composite Gauss–Legendre rule over `breakpoints`.
pub fn min_re_laplace<T: Real>(
    mut f: impl FnMut(T) -> Result<T>,
    breakpoints: &[T],
    grid: &PositivityGrid,
) -> Result<PositivityReport> {
    let rule = CompositeRule::new(breakpoints, 8, 20)?;
    let samples = rule
        .nodes
        .iter()
        .map(|&x| f(x))
        .collect::<Result<Vec<T>>>()?;
    let mut best = PositivityReport {
        min: f64::INFINITY,
        sigma: 0.0,
        tau: 0.0,
    };
    for (sigma, tau) in grid.points() {
        let (s, t) = (T::lit(sigma), T::lit(tau));
        let v = rule
            .apply(&samples, |x| (s * x).exp() * (t * x).cos())
            .to_f64_lossy();
        if v < best.min {
            best = PositivityReport { min: v, sigma, tau };
        }
    }
    Ok(best)
}

/// Sampled check of `Re φ̂_ε(s) ≥ 0` on `|Re s| ≤ 1`.
pub fn check_positivity<T: Real>(eps: SmoothingParam<T>, grid: &PositivityGrid) -> Result<PositivityReport> {
    let phi = SmoothedTestFn::new(eps)?;
    min_re_laplace(|x| phi.value(x), &phi.breakpoints(), grid)
}
