//! Adaptive numerical integration.
//!
//! The workhorse is a globally adaptive 7/15-point Gauss–Kronrod scheme: the
//! interval with the largest error indicator is bisected until the summed
//! indicator drops below the requested absolute tolerance. Breakpoints split
//! the domain up front so no panel ever straddles a kink or jump.
//!
//! The error estimate is the usual QUADPACK indicator. It is a heuristic,
//! not a rigorous bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::testfn::Measure;
use crate::{Error, Real, Result};

/// Default absolute tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default subdivision budget (number of panels).
pub const DEFAULT_BUDGET: usize = 1_000_000;
/// Integrand magnitudes below this are treated as zero when choosing the
/// default horizon of a semi-infinite domain.
pub const TRUNCATION_FLOOR: f64 = 1e-300;

/// Value of an integral together with an error indicator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadResult<T> {
    pub value: T,
    /// Heuristic, nonnegative and finite.
    pub err_estimate: T,
}

impl<T: Real> QuadResult<T> {
    pub fn exact(value: T) -> Self {
        Self {
            value,
            err_estimate: T::zero(),
        }
    }
}

impl<T: Real> std::ops::Add for QuadResult<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            value: self.value + rhs.value,
            err_estimate: self.err_estimate + rhs.err_estimate,
        }
    }
}

/// Where to integrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegrationDomain<T> {
    /// `[lo, hi]` with `lo < hi`.
    Finite { lo: T, hi: T },
    /// `[lo, +∞)`, mapped onto a finite interval by
    /// `t = lo - scale * ln(1 - u)`. The integrand is taken to vanish past
    /// `horizon`.
    SemiInfinite { lo: T, scale: T, horizon: T },
}

impl<T: Real> IntegrationDomain<T> {
    pub fn finite(lo: T, hi: T) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::domain(format!(
                "finite domain needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self::Finite { lo, hi })
    }

    /// `[lo, +∞)` for an integrand decaying like `e^{-t}`.
    pub fn semi_infinite(lo: T) -> Self {
        Self::semi_infinite_scaled(lo, T::one())
    }

    /// `[lo, +∞)` for an integrand decaying like `e^{-t / scale}`. The
    /// default horizon sits where that envelope falls below
    /// [`TRUNCATION_FLOOR`].
    pub fn semi_infinite_scaled(lo: T, scale: T) -> Self {
        let depth = T::lit(-TRUNCATION_FLOOR.ln());
        Self::SemiInfinite {
            lo,
            scale,
            horizon: lo + scale * depth,
        }
    }

    pub fn with_horizon(self, horizon: T) -> Self {
        match self {
            Self::SemiInfinite { lo, scale, .. } => Self::SemiInfinite { lo, scale, horizon },
            finite => finite,
        }
    }

    pub fn lo(&self) -> T {
        match *self {
            Self::Finite { lo, .. } | Self::SemiInfinite { lo, .. } => lo,
        }
    }
}

// Gauss–Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    lo: T,
    hi: T,
    value: T,
    err: T,
    resabs: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .partial_cmp(&other.err)
            .unwrap_or(Ordering::Equal)
    }
}

fn kronrod15<T: Real, F: FnMut(T) -> T>(f: &mut F, lo: T, hi: T) -> Result<Panel<T>> {
    let half = T::lit(0.5);
    let center = half * (lo + hi);
    let half_len = half * (hi - lo);
    let abs_half = half_len.abs();

    let mut eval = |x: T| -> Result<T> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite {
                at: x.to_f64_lossy(),
            })
        }
    };

    let fc = eval(center)?;
    let mut res_g = fc * T::lit(WG[3]);
    let mut res_k = fc * T::lit(WGK[7]);
    let mut res_abs = fc.abs() * T::lit(WGK[7]);
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let wk = T::lit(WGK[j]);
        res_k = res_k + wk * (f1 + f2);
        res_abs = res_abs + wk * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half_len;
    res_abs = res_abs * abs_half;
    res_asc = res_asc * abs_half;
    let mut err = ((res_k - res_g) * half_len).abs();
    if res_asc != T::zero() && err != T::zero() {
        let scale = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = res_asc * scale.min(T::one());
    }
    let eps50 = T::lit(50.0) * T::epsilon();
    if res_abs > T::min_positive_value() / eps50 {
        err = err.max(eps50 * res_abs);
    }
    Ok(Panel {
        lo,
        hi,
        value,
        err,
        resabs: res_abs,
    })
}

/// Adaptive integration on `[lo, hi]` with the given interior cut points.
fn adapt<T: Real, F: FnMut(T) -> T>(
    f: &mut F,
    cuts: &[T],
    tol: T,
    budget: usize,
) -> Result<QuadResult<T>> {
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel<T>> = Vec::new();
    for w in cuts.windows(2) {
        heap.push(kronrod15(f, w[0], w[1])?);
    }
    let mut panels = heap.len();
    let tiny = T::lit(100.0) * T::epsilon();
    let eps50 = T::lit(50.0) * T::epsilon();
    // Per-panel errors are floored at eps50·resabs, so the total can never
    // drop below eps50·abs; allow a margin over that floor.
    let roundoff = T::lit(4.0) * eps50;

    let exact_totals = |heap: &BinaryHeap<Panel<T>>, frozen: &[Panel<T>]| {
        heap.iter()
            .chain(frozen.iter())
            .fold((T::zero(), T::zero(), T::zero()), |(v, e, a), p| {
                (v + p.value, e + p.err, a + p.resabs)
            })
    };
    let (mut value, mut err, mut abs) = exact_totals(&heap, &frozen);

    loop {
        if err <= tol.max(roundoff * abs) || heap.is_empty() {
            // Running sums drift; confirm against a fresh summation.
            let (v, e, a) = exact_totals(&heap, &frozen);
            value = v;
            err = e;
            abs = a;
            if err <= tol.max(roundoff * abs) || heap.is_empty() {
                return Ok(QuadResult {
                    value,
                    err_estimate: err,
                });
            }
        }
        let non_convergence = |value: T, err: T, panels: usize| Error::NonConvergence {
            value: value.to_f64_lossy(),
            err_estimate: err.to_f64_lossy(),
            intervals: panels,
        };
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Err(non_convergence(value, err, panels)),
        };
        if panels >= budget {
            return Err(non_convergence(value, err, panels));
        }
        let width = worst.hi - worst.lo;
        // Panels at their roundoff floor, or too narrow to split, are final.
        if worst.err <= eps50 * worst.resabs
            || width <= tiny * (worst.lo.abs() + worst.hi.abs()).max(T::min_positive_value())
        {
            frozen.push(worst);
            continue;
        }
        let mid = T::lit(0.5) * (worst.lo + worst.hi);
        let left = kronrod15(f, worst.lo, mid)?;
        let right = kronrod15(f, mid, worst.hi)?;
        value = value - worst.value + left.value + right.value;
        err = err - worst.err + left.err + right.err;
        abs = abs - worst.resabs + left.resabs + right.resabs;
        heap.push(left);
        heap.push(right);
        panels += 1;
    }
}

fn cut_points<T: Real>(lo: T, hi: T, breakpoints: &[T]) -> Vec<T> {
    let mut cuts: Vec<T> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > lo && b < hi)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    cuts.dedup();
    let mut all = Vec::with_capacity(cuts.len() + 2);
    all.push(lo);
    all.extend(cuts);
    all.push(hi);
    all
}

/// Integrates `f` over `domain` to absolute tolerance `tol`, never placing
/// a panel across any of `breakpoints` (points outside the domain are
/// ignored).
pub fn integrate<T, F>(
    f: F,
    domain: IntegrationDomain<T>,
    tol: T,
    breakpoints: &[T],
) -> Result<QuadResult<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    integrate_with_budget(f, domain, tol, breakpoints, DEFAULT_BUDGET)
}

pub fn integrate_with_budget<T, F>(
    mut f: F,
    domain: IntegrationDomain<T>,
    tol: T,
    breakpoints: &[T],
    budget: usize,
) -> Result<QuadResult<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if !(tol > T::zero()) {
        return Err(Error::domain("tolerance must be positive"));
    }
    match domain {
        IntegrationDomain::Finite { lo, hi } => {
            if !(hi > lo) {
                return Err(Error::domain("finite domain needs lo < hi"));
            }
            let cuts = cut_points(lo, hi, breakpoints);
            adapt(&mut f, &cuts, tol, budget)
        }
        IntegrationDomain::SemiInfinite { lo, scale, horizon } => {
            if !(scale > T::zero()) || !(horizon > lo) {
                return Err(Error::domain(
                    "semi-infinite domain needs scale > 0 and horizon > lo",
                ));
            }
            // u = 1 - exp(-(t - lo) / scale)
            let to_u = |t: T| -(-(t - lo) / scale).exp_m1();
            let u_max = to_u(horizon);
            let mapped: Vec<T> = breakpoints
                .iter()
                .filter(|&&b| b > lo && b < horizon)
                .map(|&b| to_u(b))
                .collect();
            let cuts = cut_points(T::zero(), u_max, &mapped);
            let mut g = |u: T| {
                let one_minus = T::one() - u;
                let t = lo - scale * (-u).ln_1p();
                let y = f(t);
                if y == T::zero() {
                    T::zero()
                } else {
                    y * scale / one_minus
                }
            };
            adapt(&mut g, &cuts, tol, budget)
        }
    }
}

/// `∫ h dμ` for a measure made of a piecewise smooth density and point
/// masses. The density's breakpoints are passed to the integrator.
pub fn integrate_measure<T, H>(h: H, m: &Measure<T>) -> Result<QuadResult<T>>
where
    T: Real,
    H: FnMut(T) -> T,
{
    integrate_measure_tol(h, m, T::lit(DEFAULT_TOL))
}

pub fn integrate_measure_tol<T, H>(mut h: H, m: &Measure<T>, tol: T) -> Result<QuadResult<T>>
where
    T: Real,
    H: FnMut(T) -> T,
{
    let mut total = QuadResult::exact(T::zero());
    if let Some(density) = m.density() {
        if let Some((lo, hi)) = density.support() {
            let bps = density.breakpoints().to_vec();
            total = integrate(
                |x| {
                    let d = density.value(x);
                    if d == T::zero() {
                        T::zero()
                    } else {
                        d * h(x)
                    }
                },
                IntegrationDomain::finite(lo, hi)?,
                tol,
                &bps,
            )?;
        }
    }
    for &(loc, mass) in m.atoms() {
        total.value = total.value + mass * h(loc);
    }
    Ok(total)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        // Newton from the Chebyshev-like initial guess, in f64 then cast.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = T::lit(-x);
        nodes[n - 1 - i] = T::lit(x);
        weights[i] = T::lit(w);
        weights[n - 1 - i] = T::lit(w);
    }
    (nodes, weights)
}

/// A fixed composite Gauss–Legendre rule: each gap between consecutive
/// breakpoints is cut into `panels` equal panels carrying `order` nodes.
/// Useful when one function is integrated against many kernels.
#[derive(Debug, Clone)]
pub struct CompositeRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> CompositeRule<T> {
    pub fn new(breakpoints: &[T], panels: usize, order: usize) -> Result<Self> {
        if breakpoints.len() < 2 || panels == 0 || order == 0 {
            return Err(Error::domain("composite rule needs two breakpoints, panels > 0, order > 0"));
        }
        let (gx, gw) = gauss_legendre::<T>(order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in breakpoints.windows(2) {
            let step = (w[1] - w[0]) / T::lit(panels as f64);
            for p in 0..panels {
                let a = w[0] + step * T::lit(p as f64);
                let half = step * T::lit(0.5);
                for (x, wt) in gx.iter().zip(&gw) {
                    nodes.push(a + half * (*x + T::one()));
                    weights.push(*wt * half);
                }
            }
        }
        Ok(Self { nodes, weights })
    }

    /// `Σ w_i f(x_i)` given precomputed samples `f(x_i)`.
    pub fn apply(&self, samples: &[T], mut kernel: impl FnMut(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(samples)
            .fold(T::zero(), |acc, ((&x, &w), &s)| acc + w * s * kernel(x))
    }
}
