//! The gamma kernel and its truncated re-normalized variants.
//!
//! The gamma kernel at design point `x ≥ 0` with smoothing parameter
//! `b > 0` is the Gamma(x/b + 1, b) density
//!
//! ```text
//! K_{x,b}(u) = u^{x/b} e^{-u/b} / (b^{x/b+1} Γ(x/b+1)),   u ≥ 0,
//! ```
//!
//! whose mode sits at `u = x`. Splitting it at a cutoff `c > 0` and
//! re-normalizing each piece by the regularized incomplete gamma mass on
//! its side gives the left kernel on `[0, c)` and the right kernel on
//! `[c, ∞)`; the boundary point `u = c` belongs to the right kernel.
//!
//! Every value is assembled as `exp(log numerator - log normalizer)`:
//! `x/b` reaches `1e4` and beyond in practice, where `u^{x/b}` has long
//! overflowed.

use crate::error::{Error, Result};
use crate::specfun::{lgamma, log_reg_lower_gamma, log_reg_upper_gamma};

fn check_params(x: f64, b: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "design point must be finite and >= 0, got x = {x}"
        )));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain(format!(
            "smoothing parameter must be finite and > 0, got b = {b}"
        )));
    }
    Ok(())
}

fn check_cutoff(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::domain(format!(
            "cutoff must be finite and > 0, got c = {c}"
        )));
    }
    Ok(())
}

fn check_eval_point(u: f64) -> Result<()> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::domain(format!(
            "evaluation point must be finite and >= 0, got u = {u}"
        )));
    }
    Ok(())
}

/// Gamma kernel with precomputed shape and log-normalizer, cheap to
/// evaluate repeatedly at one design point.
#[derive(Debug, Clone, Copy)]
pub struct GammaKernel {
    /// Shape exponent `a = x/b`.
    shape: f64,
    inv_b: f64,
    log_norm: f64,
}

impl GammaKernel {
    pub fn new(x: f64, b: f64) -> Result<Self> {
        check_params(x, b)?;
        let shape = x / b;
        Ok(GammaKernel {
            shape,
            inv_b: 1.0 / b,
            log_norm: (shape + 1.0) * b.ln() + lgamma(shape + 1.0),
        })
    }

    /// `ln K(u)`; `-∞` at `u = 0` when `x > 0`.
    pub fn log_density(&self, u: f64) -> f64 {
        // x = 0 reduces to the Exp(1/b) density: the u^0 factor is 1 and
        // must not evaluate 0·ln 0 at the origin.
        let power = if self.shape == 0.0 {
            0.0
        } else {
            self.shape * u.ln()
        };
        power - u * self.inv_b - self.log_norm
    }

    pub(crate) fn density_unchecked(&self, u: f64) -> f64 {
        self.log_density(u).exp()
    }

    pub fn density(&self, u: f64) -> Result<f64> {
        check_eval_point(u)?;
        Ok(self.density_unchecked(u))
    }
}

/// Left truncated kernel: support `[0, c)`, normalized by
/// `P(x/b + 1, c/b)`.
#[derive(Debug, Clone, Copy)]
pub struct TruncKernelMinus {
    base: GammaKernel,
    cutoff: f64,
    log_mass: f64,
}

impl TruncKernelMinus {
    pub fn new(x: f64, b: f64, c: f64) -> Result<Self> {
        check_params(x, b)?;
        check_cutoff(c)?;
        let base = GammaKernel::new(x, b)?;
        let log_mass = log_reg_lower_gamma(x / b + 1.0, c / b)?;
        if log_mass == f64::NEG_INFINITY || log_mass.is_nan() {
            return Err(Error::DegenerateTruncation("left"));
        }
        Ok(TruncKernelMinus {
            base,
            cutoff: c,
            log_mass,
        })
    }

    pub(crate) fn density_unchecked(&self, u: f64) -> f64 {
        if u >= self.cutoff {
            0.0
        } else {
            (self.base.log_density(u) - self.log_mass).exp()
        }
    }

    pub fn density(&self, u: f64) -> Result<f64> {
        check_eval_point(u)?;
        Ok(self.density_unchecked(u))
    }
}

/// Right truncated kernel: support `[c, ∞)` (the cutoff itself included),
/// normalized by `Q(x/b + 1, c/b)`.
#[derive(Debug, Clone, Copy)]
pub struct TruncKernelPlus {
    base: GammaKernel,
    cutoff: f64,
    log_mass: f64,
}

impl TruncKernelPlus {
    pub fn new(x: f64, b: f64, c: f64) -> Result<Self> {
        check_params(x, b)?;
        check_cutoff(c)?;
        let base = GammaKernel::new(x, b)?;
        let log_mass = log_reg_upper_gamma(x / b + 1.0, c / b)?;
        if log_mass == f64::NEG_INFINITY || log_mass.is_nan() {
            return Err(Error::DegenerateTruncation("right"));
        }
        Ok(TruncKernelPlus {
            base,
            cutoff: c,
            log_mass,
        })
    }

    pub(crate) fn density_unchecked(&self, u: f64) -> f64 {
        if u < self.cutoff {
            0.0
        } else {
            (self.base.log_density(u) - self.log_mass).exp()
        }
    }

    pub fn density(&self, u: f64) -> Result<f64> {
        check_eval_point(u)?;
        Ok(self.density_unchecked(u))
    }
}

/// Gamma kernel value `K_{x,b}(u)`.
pub fn gamma_kernel(x: f64, b: f64, u: f64) -> Result<f64> {
    GammaKernel::new(x, b)?.density(u)
}

/// Left truncated kernel value; zero for `u ≥ c`.
pub fn trunc_kernel_minus(x: f64, b: f64, c: f64, u: f64) -> Result<f64> {
    TruncKernelMinus::new(x, b, c)?.density(u)
}

/// Right truncated kernel value; zero for `u < c`.
pub fn trunc_kernel_plus(x: f64, b: f64, c: f64, u: f64) -> Result<f64> {
    TruncKernelPlus::new(x, b, c)?.density(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    const E_INV: f64 = 0.36787944117144233;

    #[test]
    fn exponential_special_case_at_origin() {
        // x = 0 reduces to Exp(1) for b = 1: density 1 at u = 0.
        assert!((gamma_kernel(0.0, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        // and x > 0 vanishes at the origin.
        assert_eq!(gamma_kernel(2.0, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_value() {
        // K_{2,1}(1) = e^{-1}/Γ(3) = e^{-1}/2.
        let got = gamma_kernel(2.0, 1.0, 1.0).unwrap();
        assert!((got - E_INV / 2.0).abs() < 1e-15);
    }

    #[test]
    fn mode_at_design_point() {
        // The kernel has its mode at u = x.
        let k = GammaKernel::new(3.0, 0.1).unwrap();
        let at_mode = k.density(3.0).unwrap();
        for u in [2.5, 2.9, 2.99, 3.01, 3.1, 3.5] {
            assert!(k.density(u).unwrap() < at_mode, "u = {u}");
        }
    }

    #[test]
    fn truncated_closed_forms() {
        // P(3,2) = 1 - 5 e^{-2}; K^-(1) = (e^{-1}/2) / P(3,2).
        let got = trunc_kernel_minus(2.0, 1.0, 2.0, 1.0).unwrap();
        assert!((got - 0.56890288798068777).abs() < 1e-13);
        // K^+(3) = (9 e^{-3}/2) / Q(3,2).
        let got = trunc_kernel_plus(2.0, 1.0, 2.0, 3.0).unwrap();
        assert!((got - 0.33109149705429809).abs() < 1e-13);
    }

    #[test]
    fn indicator_supports() {
        assert_eq!(trunc_kernel_minus(2.0, 1.0, 2.0, 2.5).unwrap(), 0.0);
        assert_eq!(trunc_kernel_minus(2.0, 1.0, 2.0, 2.0).unwrap(), 0.0);
        assert_eq!(trunc_kernel_plus(2.0, 1.0, 2.0, 1.0).unwrap(), 0.0);
        // u = c belongs to the right kernel.
        assert!(trunc_kernel_plus(2.0, 1.0, 2.0, 2.0).unwrap() > 0.0);
    }

    #[test]
    fn decomposition_identity() {
        use crate::specfun::reg_gamma_pair;
        // P·K^- + Q·K^+ = K_G pointwise.
        for (x, b, c) in [(2.0, 1.0, 2.0), (1.0, 0.05, 2.0), (5.0, 0.1, 2.0), (3.0, 0.25, 1.0)] {
            let (p, q) = reg_gamma_pair(x / b + 1.0, c / b).unwrap();
            let km = TruncKernelMinus::new(x, b, c).unwrap();
            let kp = TruncKernelPlus::new(x, b, c).unwrap();
            let kg = GammaKernel::new(x, b).unwrap();
            for u in [0.0, 0.3, 0.9, 1.5, c, 2.4, 3.7, 8.0] {
                let combined = p * km.density(u).unwrap() + q * kp.density(u).unwrap();
                let full = kg.density(u).unwrap();
                let tol = 1e-12 * full.max(1e-300);
                assert!(
                    (combined - full).abs() <= tol,
                    "x={x} b={b} c={c} u={u}: {combined} vs {full}"
                );
            }
        }
    }

    #[test]
    fn large_shape_stays_finite() {
        // a = x/b = 1e6.
        let v = gamma_kernel(100.0, 1e-4, 100.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
        let v = trunc_kernel_minus(1.0, 1e-4, 2.0, 0.9999).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(gamma_kernel(-1.0, 1.0, 0.5).is_err());
        assert!(gamma_kernel(1.0, 0.0, 0.5).is_err());
        assert!(gamma_kernel(1.0, 1.0, -0.5).is_err());
        assert!(trunc_kernel_minus(1.0, 1.0, 0.0, 0.5).is_err());
        assert!(trunc_kernel_plus(1.0, 1.0, -2.0, 0.5).is_err());
        assert!(gamma_kernel(1.0, 1.0, f64::NAN).is_err());
    }
}
