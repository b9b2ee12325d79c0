//! Quadrature oracles for the kernels: every kernel must integrate to
//! one over its support, including shape ratios up to x/b = 1e4, and the
//! mass-weighted decomposition must reproduce the untruncated kernel.

use densjump::kernels::{GammaKernel, TruncKernelMinus, TruncKernelPlus};
use densjump::quad::integrate_split;
use densjump::specfun::reg_gamma_pair;
use proptest::prelude::*;

/// Mean and standard deviation of the Gamma(x/b + 1, b) kernel; the
/// integration windows hang off these.
fn kernel_moments(x: f64, b: f64) -> (f64, f64) {
    let mean = x + b;
    let sd = ((x / b + 1.0).sqrt()) * b;
    (mean, sd)
}

fn window(x: f64, b: f64) -> (f64, Vec<f64>) {
    let (mean, sd) = kernel_moments(x, b);
    let hi = mean + 60.0 * sd + 10.0 * b;
    let knots = vec![
        (mean - 20.0 * sd).max(0.0),
        (mean - 5.0 * sd).max(0.0),
        mean - sd,
        mean,
        mean + sd,
        mean + 5.0 * sd,
        mean + 20.0 * sd,
    ];
    (hi, knots)
}

#[test]
fn gamma_kernel_normalization() {
    for (x, b) in [(0.0, 1.0), (2.0, 1.0), (3.0, 0.1), (0.5, 0.05), (1.0, 1e-4)] {
        let k = GammaKernel::new(x, b).unwrap();
        let (hi, knots) = window(x, b);
        let mass = integrate_split(|u| k.density(u).unwrap(), 0.0, hi, &knots, 1e-10).unwrap();
        assert!(
            (mass - 1.0).abs() <= 1e-8,
            "x={x} b={b}: mass = {mass}"
        );
    }
}

#[test]
fn truncated_kernel_normalization() {
    // Includes x/b = 1e4 and configurations with nearly all mass on one
    // side of the cutoff.
    let cases = [
        (2.0, 1.0, 2.0),
        (1.0, 0.05, 2.0),
        (5.0, 0.1, 2.0),
        (1.0, 1e-4, 2.0),
        (1.0, 1e-4, 1.0),
        (0.5, 0.02, 1.0),
    ];
    for (x, b, c) in cases {
        let (hi, mut knots) = window(x, b);
        knots.extend([
            c - 1e-4,
            c - 1e-3,
            c - 1e-2,
            c - 0.1,
            c + 1e-4,
            c + 1e-3,
            c + 1e-2,
            c + 0.1,
        ]);

        let km = TruncKernelMinus::new(x, b, c).unwrap();
        let mass = integrate_split(|u| km.density(u).unwrap(), 0.0, c, &knots, 1e-10).unwrap();
        assert!(
            (mass - 1.0).abs() <= 1e-8,
            "K- x={x} b={b} c={c}: mass = {mass}"
        );

        let kp = TruncKernelPlus::new(x, b, c).unwrap();
        let hi = hi.max(c + 60.0 * (b + (b * c).sqrt()));
        let mass = integrate_split(|u| kp.density(u).unwrap(), c, hi, &knots, 1e-10).unwrap();
        assert!(
            (mass - 1.0).abs() <= 1e-8,
            "K+ x={x} b={b} c={c}: mass = {mass}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]
    #[test]
    fn decomposition_random(
        x in 0.0f64..5.0,
        b in 0.02f64..2.0,
        c in 0.1f64..5.0,
        u in 0.0f64..8.0,
    ) {
        let (p, q) = reg_gamma_pair(x / b + 1.0, c / b).unwrap();
        let km = TruncKernelMinus::new(x, b, c).unwrap();
        let kp = TruncKernelPlus::new(x, b, c).unwrap();
        let kg = GammaKernel::new(x, b).unwrap();
        let combined = p * km.density(u).unwrap() + q * kp.density(u).unwrap();
        let full = kg.density(u).unwrap();
        prop_assert!((combined - full).abs() <= 1e-12 * full.max(1e-300));
    }

    #[test]
    fn nonnegative_everywhere(
        x in 0.0f64..5.0,
        b in 0.02f64..2.0,
        c in 0.1f64..5.0,
        u in 0.0f64..10.0,
    ) {
        prop_assert!(GammaKernel::new(x, b).unwrap().density(u).unwrap() >= 0.0);
        prop_assert!(TruncKernelMinus::new(x, b, c).unwrap().density(u).unwrap() >= 0.0);
        prop_assert!(TruncKernelPlus::new(x, b, c).unwrap().density(u).unwrap() >= 0.0);
    }
}
