//! Nonparametric estimation and testing of density discontinuities on the
//! positive half-line.
//!
//! The density of a nonnegative random variable is smoothed with gamma
//! kernels. At a suspected discontinuity point `c` the kernel is split into
//! a left part on `[0, c)` and a right part on `[c, ∞)`, each re-normalized
//! by a regularized incomplete gamma function, which yields one-sided
//! estimates of the lower and upper limits of the density at `c`. A
//! multiplicative bias correction removes the `O(b^{1/2})` one-sided
//! smoothing bias, and the difference of the corrected limits estimates the
//! jump size. A studentized test statistic with a standard normal limit
//! tests the null of continuity, with the smoothing parameter chosen by a
//! power-optimality sub-sampling criterion.
//!
//! Module map:
//! - [`specfun`]: gamma, regularized incomplete gamma functions and their
//!   inverse (the numerical foundation of every kernel evaluation);
//! - [`kernels`]: the gamma kernel and its truncated re-normalized variants;
//! - [`estim`]: one-sided and whole-density estimators, bias correction,
//!   jump estimation, variance estimation, and the continuity test;
//! - [`bandwidth`]: power-optimality smoothing-parameter selection;
//! - [`simulate`]: target distributions, discontinuous-mixture sampling,
//!   and the seeded Monte Carlo engine;
//! - [`quad`]: adaptive Gauss–Kronrod quadrature used for validation.

pub mod bandwidth;
pub mod error;
pub mod estim;
pub mod kernels;
pub mod quad;
pub mod simulate;
pub mod specfun;

pub use error::{Error, Result};
