//! One-sided and whole-density estimators, multiplicative bias
//! correction, jump-size estimation, variance estimation, and the
//! continuity test.
//!
//! For a sample `X_1, …, X_n` on the positive half-line and a cutoff
//! `c > 0`, the one-sided estimators average the truncated kernels over
//! the full sample (observations on the other side contribute exactly
//! zero). The multiplicative bias correction combines the estimates at
//! bandwidths `b` and `b/δ`,
//!
//! ```text
//! f̃±(c) = f̂±,b(c)^{1/(1-√δ)} · f̂±,b/δ(c)^{-√δ/(1-√δ)},
//! ```
//!
//! which trades the `O(b^{1/2})` one-sided smoothing bias for an `O(b)`
//! one while keeping the `O(n^{-1} b^{-1/2})` variance order. The jump
//! estimate is `J̃(c) = f̃₊(c) - f̃₋(c)` and the studentized statistic
//! `T = √(n√b) · J̃ / √Ṽ` is standard normal under continuity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{GammaKernel, TruncKernelMinus, TruncKernelPlus};
use crate::specfun::normal_two_sided_p;

/// Mixing exponents above this are rejected: the variance factor
/// `λ(δ)` loses all precision to cancellation as `δ → 1`, and values
/// beyond 0.81 have no practical use.
pub const MAX_DELTA: f64 = 0.99;

/// Validated sample: nonnegative, finite, stored ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

/// Observation counts strictly below and at-or-above a cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideCounts {
    pub n_minus: usize,
    pub n_plus: usize,
}

impl Sample {
    /// Sorts and validates: every value must be finite and `≥ 0`, and
    /// the sample non-empty.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("sample must contain at least one value"));
        }
        for &v in &values {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::domain(format!(
                    "sample values must be finite and >= 0, got {v}"
                )));
            }
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Sample { values })
    }

    /// For internal callers that already hold sorted, validated data.
    pub(crate) fn from_sorted(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        Sample { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Slices `(values < c, values ≥ c)`.
    pub fn split(&self, c: f64) -> (&[f64], &[f64]) {
        let idx = self.values.partition_point(|&v| v < c);
        self.values.split_at(idx)
    }

    pub fn side_counts(&self, c: f64) -> SideCounts {
        let (lo, hi) = self.split(c);
        SideCounts {
            n_minus: lo.len(),
            n_plus: hi.len(),
        }
    }
}

/// Which one-sided limit an operation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Which consistent variance estimator studentizes the test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceVariant {
    /// `Ṽ₁ = λ(δ) (f̃₊ + f̃₋) / (√π c^{1/2})`.
    V1,
    /// `Ṽ₂ = λ(δ) · 2 f̂(c) / (√π c^{1/2})` with the untruncated
    /// gamma-kernel estimate at the cutoff.
    V2,
}

impl std::fmt::Display for VarianceVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VarianceVariant::V1 => write!(f, "v1"),
            VarianceVariant::V2 => write!(f, "v2"),
        }
    }
}

/// Bias-corrected one-sided density estimate with a degeneracy marker
/// (set when both pilots vanished and the combination is reported as 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MbcDensity {
    pub value: f64,
    pub degenerate: bool,
}

/// Bias-corrected limits and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEstimate {
    pub f_minus: f64,
    pub f_plus: f64,
    pub jump: f64,
    /// True when either side was a flagged degenerate zero.
    pub degenerate: bool,
}

/// Outcome of the continuity test at a cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpTestResult {
    pub f_minus: f64,
    pub f_plus: f64,
    pub jump: f64,
    pub variance: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub b: f64,
    pub delta: f64,
    pub variant: VarianceVariant,
}

fn check_cutoff_in_range(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::domain(format!(
            "cutoff must be finite and > 0, got c = {c}"
        )));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= MAX_DELTA) {
        return Err(Error::domain(format!(
            "mixing exponent must lie in (0, {MAX_DELTA}], got delta = {delta}"
        )));
    }
    Ok(())
}

/// One-sided estimator of the left limit: `(1/n) Σ K⁻_{x,b;c}(X_i)`.
pub fn fhat_minus(sample: &Sample, c: f64, b: f64, x: f64) -> Result<f64> {
    let kernel = TruncKernelMinus::new(x, b, c)?;
    let (below, _) = sample.split(c);
    let sum: f64 = below.iter().map(|&u| kernel.density_unchecked(u)).sum();
    Ok(sum / sample.len() as f64)
}

/// One-sided estimator of the right limit: `(1/n) Σ K⁺_{x,b;c}(X_i)`.
pub fn fhat_plus(sample: &Sample, c: f64, b: f64, x: f64) -> Result<f64> {
    let kernel = TruncKernelPlus::new(x, b, c)?;
    let (_, above) = sample.split(c);
    let sum: f64 = above.iter().map(|&u| kernel.density_unchecked(u)).sum();
    Ok(sum / sample.len() as f64)
}

/// Plain gamma-kernel density estimator `(1/n) Σ K_{x,b}(X_i)`.
pub fn fhat_gamma(sample: &Sample, b: f64, x: f64) -> Result<f64> {
    let kernel = GammaKernel::new(x, b)?;
    let sum: f64 = sample
        .values()
        .iter()
        .map(|&u| kernel.density_unchecked(u))
        .sum();
    Ok(sum / sample.len() as f64)
}

/// Multiplicative bias correction of the one-sided estimate at `x = c`,
/// with pilots at bandwidths `b` and `b/δ`.
pub fn mbc_estimate(sample: &Sample, c: f64, b: f64, delta: f64, side: Side) -> Result<MbcDensity> {
    check_delta(delta)?;
    check_cutoff_in_range(c)?;
    let estimate = |bw: f64| -> Result<f64> {
        match side {
            Side::Left => fhat_minus(sample, c, bw, c),
            Side::Right => fhat_plus(sample, c, bw, c),
        }
    };
    let f_b = estimate(b)?;
    let f_pilot = estimate(b / delta)?;
    mbc_combine(f_b, f_pilot, delta)
}

/// The power combination itself; factored out so deterministic
/// (quadrature-based) pilots can be composed the same way in tests.
pub fn mbc_combine(f_b: f64, f_pilot: f64, delta: f64) -> Result<MbcDensity> {
    check_delta(delta)?;
    let sqrt_delta = delta.sqrt();
    let exp_main = 1.0 / (1.0 - sqrt_delta);
    let exp_pilot = -sqrt_delta / (1.0 - sqrt_delta);
    if f_b == 0.0 && f_pilot == 0.0 {
        return Ok(MbcDensity {
            value: 0.0,
            degenerate: true,
        });
    }
    if f_pilot == 0.0 {
        return Err(Error::DegeneratePilot);
    }
    if f_b == 0.0 {
        // Positive exponent on a vanishing factor: the combination is 0.
        return Ok(MbcDensity {
            value: 0.0,
            degenerate: false,
        });
    }
    let value = (exp_main * f_b.ln() + exp_pilot * f_pilot.ln()).exp();
    Ok(MbcDensity {
        value,
        degenerate: false,
    })
}

fn require_both_sides(sample: &Sample, c: f64) -> Result<SideCounts> {
    let counts = sample.side_counts(c);
    if counts.n_minus == 0 {
        return Err(Error::OneSidedSample("below"));
    }
    if counts.n_plus == 0 {
        return Err(Error::OneSidedSample("at or above"));
    }
    Ok(counts)
}

/// Bias-corrected jump estimate `J̃(c) = f̃₊(c) - f̃₋(c)`.
pub fn jump_estimate(sample: &Sample, c: f64, b: f64, delta: f64) -> Result<JumpEstimate> {
    require_both_sides(sample, c)?;
    let left = mbc_estimate(sample, c, b, delta, Side::Left)?;
    let right = mbc_estimate(sample, c, b, delta, Side::Right)?;
    Ok(JumpEstimate {
        f_minus: left.value,
        f_plus: right.value,
        jump: right.value - left.value,
        degenerate: left.degenerate || right.degenerate,
    })
}

/// Uncorrected jump estimate `Ĵ(c) = f̂₊(c) - f̂₋(c)`; kept for bias-rate
/// comparisons, its bias converges only at the `O(b^{1/2})` rate.
pub fn jump_estimate_raw(sample: &Sample, c: f64, b: f64) -> Result<JumpEstimate> {
    let f_minus = fhat_minus(sample, c, b, c)?;
    let f_plus = fhat_plus(sample, c, b, c)?;
    Ok(JumpEstimate {
        f_minus,
        f_plus,
        jump: f_plus - f_minus,
        degenerate: false,
    })
}

/// Variance inflation factor of the bias-corrected estimator,
///
/// ```text
/// λ(δ) = [(1 + δ^{3/2})(1 + δ)^{1/2} - 2√2 δ] / [(1 + δ)^{1/2}(1 - δ^{1/2})²],
/// ```
///
/// monotone increasing from 1 (δ ↓ 0) to 11/4 (δ ↑ 1).
pub fn lambda(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let sqrt_delta = delta.sqrt();
    let sqrt_1p = (1.0 + delta).sqrt();
    let numer = (1.0 + delta * sqrt_delta) * sqrt_1p - 2.0 * std::f64::consts::SQRT_2 * delta;
    let denom = sqrt_1p * (1.0 - sqrt_delta) * (1.0 - sqrt_delta);
    Ok(numer / denom)
}

struct TestParts {
    f_minus: f64,
    f_plus: f64,
    jump: f64,
    variance: f64,
    t_stat: f64,
}

fn test_parts(
    sample: &Sample,
    c: f64,
    b: f64,
    delta: f64,
    variant: VarianceVariant,
) -> Result<TestParts> {
    let est = jump_estimate(sample, c, b, delta)?;
    let lam = lambda(delta)?;
    let scale = std::f64::consts::PI.sqrt() * c.sqrt();
    let variance = match variant {
        VarianceVariant::V1 => lam * (est.f_plus + est.f_minus) / scale,
        VarianceVariant::V2 => lam * 2.0 * fhat_gamma(sample, b, c)? / scale,
    };
    if !(variance > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let n = sample.len() as f64;
    let t_stat = (n * b.sqrt()).sqrt() * est.jump / variance.sqrt();
    Ok(TestParts {
        f_minus: est.f_minus,
        f_plus: est.f_plus,
        jump: est.jump,
        variance,
        t_stat,
    })
}

/// Consistent variance estimate for the studentization of `J̃(c)`.
pub fn variance_estimate(
    sample: &Sample,
    c: f64,
    b: f64,
    delta: f64,
    variant: VarianceVariant,
) -> Result<f64> {
    Ok(test_parts(sample, c, b, delta, variant)?.variance)
}

/// Studentized statistic `T(c) = √(n b^{1/2}) J̃(c) / √Ṽ(c)`; used on
/// sub-samples by the bandwidth selection.
pub fn t_statistic(
    sample: &Sample,
    c: f64,
    b: f64,
    delta: f64,
    variant: VarianceVariant,
) -> Result<f64> {
    Ok(test_parts(sample, c, b, delta, variant)?.t_stat)
}

/// Test of `H₀: J(c) = 0` against the two-sided alternative; the
/// p-value comes from the standard normal limit.
pub fn jump_test(
    sample: &Sample,
    c: f64,
    b: f64,
    delta: f64,
    variant: VarianceVariant,
    alpha: f64,
) -> Result<JumpTestResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "significance level must lie in (0, 1), got alpha = {alpha}"
        )));
    }
    let parts = test_parts(sample, c, b, delta, variant)?;
    let p_value = normal_two_sided_p(parts.t_stat);
    Ok(JumpTestResult {
        f_minus: parts.f_minus,
        f_plus: parts.f_plus,
        jump: parts.jump,
        variance: parts.variance,
        t_stat: parts.t_stat,
        p_value,
        reject: p_value < alpha,
        alpha,
        b,
        delta,
        variant,
    })
}

/// Side label of a density-curve point relative to the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveSide {
    Left,
    Right,
    None,
}

impl std::fmt::Display for CurveSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveSide::Left => write!(f, "left"),
            CurveSide::Right => write!(f, "right"),
            CurveSide::None => write!(f, "none"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub estimate: f64,
    pub side: CurveSide,
}

/// Density estimates over a grid of design points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub points: Vec<CurvePoint>,
}

/// Estimates the density over `grid`. Without a cutoff this is the plain
/// gamma-kernel estimator; with a cutoff, design points left (right) of
/// `c` use the left (right) truncated kernel, and at `x = c` both
/// one-sided limits are emitted.
pub fn density_curve(
    sample: &Sample,
    b: f64,
    grid: &[f64],
    cutoff: Option<f64>,
) -> Result<DensityCurve> {
    let mut points = Vec::with_capacity(grid.len() + 1);
    for &x in grid {
        match cutoff {
            None => points.push(CurvePoint {
                x,
                estimate: fhat_gamma(sample, b, x)?,
                side: CurveSide::None,
            }),
            Some(c) => {
                check_cutoff_in_range(c)?;
                if x < c {
                    points.push(CurvePoint {
                        x,
                        estimate: fhat_minus(sample, c, b, x)?,
                        side: CurveSide::Left,
                    });
                } else if x > c {
                    points.push(CurvePoint {
                        x,
                        estimate: fhat_plus(sample, c, b, x)?,
                        side: CurveSide::Right,
                    });
                } else {
                    points.push(CurvePoint {
                        x,
                        estimate: fhat_minus(sample, c, b, c)?,
                        side: CurveSide::Left,
                    });
                    points.push(CurvePoint {
                        x,
                        estimate: fhat_plus(sample, c, b, c)?,
                        side: CurveSide::Right,
                    });
                }
            }
        }
    }
    Ok(DensityCurve { points })
}
