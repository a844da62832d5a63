//! Numerical pipeline behind an explicit bound on the average analytic rank
//! of weight-2 newforms of prime level.
//!
//! The crate is organised bottom-up:
//!
//! * [`quadrature`]: adaptive Gauss–Kronrod integration with breakpoints,
//!   semi-infinite domains and integration against measures.
//! * [`special`]: the function `E(x) = x Γ(-1, x)` and its integral identities.
//! * [`testfn`]: the smoothed test functions `φ_ε`, the limit function `φ₀`
//!   and the limit measures of `|φ_ε|, |φ_ε'|, |φ_ε''|`.
//! * [`kernels`]: the constant `c`, the zero-density kernels `F(a, u)`,
//!   `K(a, x)` and the functional `G_ψ(a)`.
//! * [`detector`]: the Selberg-type zero detector checked on synthetic
//!   functions with planted zeros, and the density main terms.
//! * [`mollifier`]: brute-force checks of the mollifier coefficient sums.
//! * [`bound`]: assembly of `H(a, Δ)` and the scan over `a`.
//! * [`cli`] and [`suites`]: the command-line surface and the verification
//!   suites it runs.
//!
//! The analytic layers (`quadrature` through `kernels`) are generic over the
//! scalar type through [`Real`]; the aliases below fix them to `f64`, which is
//! what the arithmetic and reporting layers use.

pub mod bound;
pub mod cli;
pub mod detector;
mod error;
pub mod kernels;
pub mod mollifier;
pub mod quadrature;
mod real;
pub mod special;
pub mod suites;
pub mod testfn;

pub use error::{Error, Result};
pub use real::Real;

/// Quadrature output in double precision.
pub type QuadResult64 = quadrature::QuadResult<f64>;
/// Integration domain in double precision.
pub type Domain64 = quadrature::IntegrationDomain<f64>;
/// Piecewise smooth function in double precision.
pub type PiecewiseFn64 = testfn::PiecewiseSmoothFn<f64>;
/// Measure in double precision.
pub type Measure64 = testfn::Measure<f64>;
/// Kernel parameters in double precision.
pub type KernelParams64 = kernels::KernelParams<f64>;

/// Single-precision variants, mostly useful for quick exploratory sweeps.
pub type QuadResult32 = quadrature::QuadResult<f32>;
pub type Measure32 = testfn::Measure<f32>;
