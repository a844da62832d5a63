//! Brute-force checks of the mollifier coefficient sums.
//!
//! Everything here is exact finite summation over squarefree integers up to
//! the mollifier length `M`, compared against the main terms of the
//! asymptotic closed forms.

use num_complex::Complex64;

use crate::{Error, Result};

/// Default sieve bound.
pub const DEFAULT_SIEVE_LIMIT: u64 = 1_000_000;

/// Smallest-prime-factor table up to `limit`.
#[derive(Debug, Clone)]
pub struct ArithTable {
    spf: Vec<u32>,
}

impl ArithTable {
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 1 || limit > u32::MAX as u64 {
            return Err(Error::domain(format!("sieve limit must lie in [1, 2^32), got {limit}")));
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Ok(Self { spf })
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    fn check(&self, n: u64) -> Result<()> {
        if n == 0 {
            return Err(Error::domain("arithmetic functions are defined for n >= 1"));
        }
        if n > self.limit() {
            return Err(Error::SieveLimit { n, limit: self.limit() });
        }
        Ok(())
    }

    /// Prime factorisation as `(p, exponent)` pairs, primes increasing.
    pub fn factor(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        self.check(n)?;
        let mut out: Vec<(u64, u32)> = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        Ok(out)
    }

    pub fn is_squarefree(&self, n: u64) -> Result<bool> {
        Ok(self.factor(n)?.iter().all(|&(_, e)| e == 1))
    }

    /// Möbius function.
    pub fn mobius(&self, n: u64) -> Result<i8> {
        let f = self.factor(n)?;
        if f.iter().any(|&(_, e)| e > 1) {
            Ok(0)
        } else if f.len() % 2 == 0 {
            Ok(1)
        } else {
            Ok(-1)
        }
    }

    /// Distinct prime divisors.
    pub fn primes_dividing(&self, n: u64) -> Result<Vec<u64>> {
        Ok(self.factor(n)?.into_iter().map(|(p, _)| p).collect())
    }

    /// `μ(n)` for every `n ≤ upto`, index 0 unused.
    pub fn mobius_table(&self, upto: u64) -> Result<Vec<i8>> {
        self.check(upto.max(1))?;
        (0..=upto)
            .map(|n| if n == 0 { Ok(0) } else { self.mobius(n) })
            .collect()
    }
}

/// `ω_s(n) = Π_{p|n} (1 - p^{-s})^{-1}`.
pub fn omega(table: &ArithTable, n: u64, s: f64) -> Result<f64> {
    Ok(table
        .primes_dividing(n)?
        .iter()
        .map(|&p| 1.0 / (1.0 - (p as f64).powf(-s)))
        .product())
}

/// `ν_δ(n) = (1/n) Π_{p|n} (1 - p^{-(1+2δ)})`. Only consumed on squarefree
/// `n`; the same product is returned elsewhere.
pub fn nu(table: &ArithTable, n: u64, delta: f64) -> Result<f64> {
    let s = 1.0 + 2.0 * delta;
    let prod: f64 = table
        .primes_dividing(n)?
        .iter()
        .map(|&p| 1.0 - (p as f64).powf(-s))
        .product();
    Ok(prod / n as f64)
}

/// `η_t(n) = Σ_{uv=n} (u/v)^{it}`, real by the pairing `(u, v) ↔ (v, u)`.
/// Evaluated multiplicatively: `η_t(p^e) = Σ_{j=0}^{e} cos((2j - e) t log p)`.
pub fn eta(table: &ArithTable, n: u64, t: f64) -> Result<f64> {
    Ok(table
        .factor(n)?
        .iter()
        .map(|&(p, e)| {
            let lp = (p as f64).ln();
            (0..=e)
                .map(|j| ((2.0 * j as f64 - e as f64) * t * lp).cos())
                .sum::<f64>()
        })
        .product())
}

/// `(ω_s(n), ν_δ(n), η_t(n))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArithValues {
    pub omega: f64,
    pub nu: f64,
    pub eta: f64,
}

pub fn arith(table: &ArithTable, n: u64, s: f64, delta: f64, t: f64) -> Result<ArithValues> {
    Ok(ArithValues {
        omega: omega(table, n, s)?,
        nu: nu(table, n, delta)?,
        eta: eta(table, n, t)?,
    })
}

/// The cutoff `g_{M,a}`: 1 up to `M^a`, log-linear down to 0 at `M`.
pub fn g_cap(m: u64, a: f64, x: f64) -> f64 {
    let mf = m as f64;
    let lo = mf.powf(a);
    if x <= lo {
        1.0
    } else if x <= mf {
        (x / mf).ln() / ((a - 1.0) * mf.ln())
    } else {
        0.0
    }
}

/// Mollifier length `M`, shape `a`, shift `δ` and height `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierParams {
    m: u64,
    a: f64,
    delta: f64,
    t: f64,
}

impl MollifierParams {
    pub fn new(m: u64, a: f64, delta: f64, t: f64) -> Result<Self> {
        if m < 10 {
            return Err(Error::domain(format!("mollifier length must be >= 10, got {m}")));
        }
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::domain(format!("a must lie in the open interval (0, 1), got {a}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::domain(format!("delta must be positive, got {delta}")));
        }
        if !t.is_finite() {
            return Err(Error::domain("t must be finite"));
        }
        Ok(Self { m, a, delta, t })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `log M^{1-a}`.
    pub fn log_span(&self) -> f64 {
        (1.0 - self.a) * (self.m as f64).ln()
    }
}

fn require_cover(table: &ArithTable, n: u64) -> Result<()> {
    if n > table.limit() {
        Err(Error::SieveLimit { n, limit: table.limit() })
    } else {
        Ok(())
    }
}

/// One term `μ(kmn)² μ(m) η_t(m) n^{-it} (mn)^{-(1+2δ+it)} g(kmn)`, or 0.
fn y_term(table: &ArithTable, mob: &[i8], p: &MollifierParams, k: u64, m: u64, n: u64) -> Result<Complex64> {
    let kmn = k * m * n;
    if mob[kmn as usize] == 0 || mob[m as usize] == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let s = 1.0 + 2.0 * p.delta;
    let mn = (m * n) as f64;
    let phase = -p.t * (mn.ln() + (n as f64).ln());
    let mag = mob[m as usize] as f64 * eta(table, m, p.t)? * mn.powf(-s) * g_cap(p.m, p.a, kmn as f64);
    Ok(Complex64::from_polar(1.0, phase) * mag)
}

fn y_prefactor(mob_k: i8, k: u64, p: &MollifierParams) -> Complex64 {
    let kf = k as f64;
    Complex64::from_polar(kf.powf(-p.delta), -p.t * kf.ln()) * mob_k as f64
}

/// `y_k` by direct double summation over `(m, n)` with `kmn ≤ M`.
pub fn y_k_bruteforce(table: &ArithTable, k: u64, p: &MollifierParams) -> Result<Complex64> {
    require_cover(table, p.m)?;
    if k == 0 {
        return Err(Error::domain("k must be >= 1"));
    }
    if k > p.m {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mob = table.mobius_table(p.m)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in 1..=p.m / k {
        for n in 1..=p.m / (k * m) {
            sum += y_term(table, &mob, p, k, m, n)?;
        }
    }
    Ok(y_prefactor(mob[k as usize], k, p) * sum)
}

/// Same double sum with the nesting order swapped (`n` outside).
pub fn y_k_bruteforce_swapped(table: &ArithTable, k: u64, p: &MollifierParams) -> Result<Complex64> {
    require_cover(table, p.m)?;
    if k == 0 {
        return Err(Error::domain("k must be >= 1"));
    }
    if k > p.m {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mob = table.mobius_table(p.m)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 1..=p.m / k {
        for m in 1..=p.m / (k * n) {
            sum += y_term(table, &mob, p, k, m, n)?;
        }
    }
    Ok(y_prefactor(mob[k as usize], k, p) * sum)
}

/// `μ(k) ω_{1+2δ}(k) ζ(1+2δ)^{-1} k^{-δ-it}`, the approximation to `y_k` for
/// small squarefree `k`.
pub fn y_k_main_term(table: &ArithTable, k: u64, p: &MollifierParams) -> Result<Complex64> {
    let (z, _) = zeta_vals(p.delta)?;
    let w = omega(table, k, 1.0 + 2.0 * p.delta)?;
    Ok(y_prefactor(table.mobius(k)?, k, p) * (w / z))
}

/// Direct sums and their closed-form main terms.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SSums {
    pub s: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub closed1: f64,
    pub closed2: f64,
    pub closed3: f64,
    pub closed_s: f64,
}

/// Sums over squarefree `k ≤ M` of `μ(k)² ω_{1+2δ}(k) k^{-1-2δ}` weighted by
/// 1 for `k ≤ M^a` and by `(log(M/k) - ζ'/ζ(1+2δ))² / (log M^{1-a})²` above,
/// all times `ζ(1+2δ)^{-1}`; split into the square, cross and constant parts.
pub fn s_sums(table: &ArithTable, p: &MollifierParams) -> Result<SSums> {
    require_cover(table, p.m)?;
    let d = p.delta;
    let s_exp = 1.0 + 2.0 * d;
    let (z, zp) = zeta_vals(d)?;
    let mf = p.m as f64;
    let knot = mf.powf(p.a);
    let l = p.log_span();
    let l2 = l * l;
    let ratio = zp / z;

    let mut low = 0.0;
    let mut hi_sq = 0.0;
    let mut hi_lin = 0.0;
    let mut hi_const = 0.0;
    let mut s_hi = 0.0;
    for k in 1..=p.m {
        if !table.is_squarefree(k)? {
            continue;
        }
        let kf = k as f64;
        let base = omega(table, k, s_exp)? * kf.powf(-s_exp);
        if kf <= knot {
            low += base;
        } else {
            let lg = (mf / kf).ln();
            hi_sq += base * lg * lg;
            hi_lin += base * lg;
            hi_const += base;
            let w = lg - ratio;
            s_hi += base * w * w;
        }
    }
    let s = (low + s_hi / l2) / z;
    let s1 = (low + hi_sq / l2) / z;
    let s2 = -2.0 * (zp / (z * z)) / l2 * hi_lin;
    let s3 = (zp * zp / (z * z * z)) / l2 * hi_const;

    let ma = mf.powf(-2.0 * p.a * d);
    let m1 = mf.powf(-2.0 * d);
    let closed1 = 1.0 + (1.0 / (d * l)) * ((ma - m1) / (2.0 * d * l) - ma);
    let closed2 = -2.0 * (zp / (z * z)) / l * ((m1 - ma) / (4.0 * d * d * l) + ma / (2.0 * d));
    let closed3 = zp * zp / (z * z * z) * (ma - m1) / (2.0 * d * l2);
    let closed_s = 1.0
        + (ma - m1) / (4.0 * d * d * (1.0 - p.a).powi(2) * mf.ln().powi(2));
    Ok(SSums {
        s,
        s1,
        s2,
        s3,
        closed1,
        closed2,
        closed3,
        closed_s,
    })
}

/// `δ M^{-2aδ}`, the scale of the remainder in the closed form for `S`.
pub fn s_error_scale(p: &MollifierParams) -> f64 {
    p.delta * (p.m as f64).powf(-2.0 * p.a * p.delta)
}

/// Truncated sum against `ζ(1+2δ) - M'^{-2δ}/(2δ)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TruncatedZeta {
    pub sum: f64,
    pub closed: f64,
    pub residual: f64,
    /// `min_η (η M'^{-2δ} + M'^{-1/2}/η) = 2 M'^{-δ-1/4}`.
    pub error_scale: f64,
}

/// `Σ_{k < M'} μ(k)² ω_{1+2δ}(k) k^{-1-2δ}` against its closed form.
pub fn truncated_zeta_check(table: &ArithTable, m_prime: f64, delta: f64) -> Result<TruncatedZeta> {
    if !(m_prime > 1.0) || m_prime.fract() == 0.0 || !m_prime.is_finite() {
        return Err(Error::domain(format!("M' must be a non-integer > 1, got {m_prime}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    let top = m_prime.floor() as u64;
    require_cover(table, top)?;
    let s = 1.0 + 2.0 * delta;
    let mut sum = 0.0;
    for k in 1..=top {
        if table.is_squarefree(k)? {
            sum += omega(table, k, s)? * (k as f64).powf(-s);
        }
    }
    let (z, _) = zeta_vals(delta)?;
    let closed = z - m_prime.powf(-2.0 * delta) / (2.0 * delta);
    Ok(TruncatedZeta {
        sum,
        closed,
        residual: (sum - closed).abs(),
        error_scale: 2.0 * m_prime.powf(-delta - 0.25),
    })
}

const EM_TERMS: usize = 16;
/// `B_{2k}` for `k = 1..=10`.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// `(ζ(1+2δ), ζ'(1+2δ))` by Euler–Maclaurin summation.
pub fn zeta_vals(delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    let s = 1.0 + 2.0 * delta;
    let n = EM_TERMS as f64;
    let ln_n = n.ln();
    let mut z = 0.0;
    let mut zp = 0.0;
    for j in 1..EM_TERMS {
        let jf = j as f64;
        let v = jf.powf(-s);
        z += v;
        zp -= jf.ln() * v;
    }
    let n1s = n.powf(1.0 - s);
    z += n1s / (s - 1.0) + 0.5 * n.powf(-s);
    zp += -ln_n * n1s / (s - 1.0) - n1s / ((s - 1.0) * (s - 1.0)) - 0.5 * ln_n * n.powf(-s);
    // B_{2k}/(2k)! · s(s+1)…(s+2k-2) · N^{-s-2k+1}
    let mut poly = s;
    let mut dpoly = 1.0;
    let mut fact = 2.0;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let k = k + 1;
        let pw = n.powf(-s - 2.0 * k as f64 + 1.0);
        z += b / fact * poly * pw;
        zp += b / fact * (dpoly - ln_n * poly) * pw;
        // extend the rising product by (s + 2k - 1)(s + 2k)
        let (u, v) = (s + 2.0 * k as f64 - 1.0, s + 2.0 * k as f64);
        dpoly = dpoly * u * v + poly * (u + v);
        poly *= u * v;
        fact *= (2 * k + 1) as f64 * (2 * k + 2) as f64;
    }
    Ok((z, zp))
}
