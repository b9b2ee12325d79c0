//! Power-optimality smoothing-parameter selection by interleaved
//! sub-sampling.
//!
//! The sample is split at the cutoff, each side ordered, and `M`
//! sub-samples are formed by taking every `M`-th order statistic with
//! staggered offsets. On each sub-sample and each candidate `b_k` from a
//! grid the continuity statistic is computed at sub-sample scale, and the
//! empirical rejection frequency
//!
//! ```text
//! π̂_M(b_k) = (1/M) Σ_m 1{ T_m(c) > z }
//! ```
//!
//! is maximized over the grid (smallest maximizer on ties). The selected
//! sub-sample-scale value is rescaled to the full sample through
//! `b̂_n = b̂_k k^q n^{-q}`.
//!
//! The rejection indicator is one-sided exactly as displayed above;
//! `two_sided` switches to `|T_m| > z` for sensitivity analysis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estim::{t_statistic, Sample, VarianceVariant};

/// Configuration of the power-optimality search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthConfig {
    /// Sub-sample count exponent: `M = ⌊min(n₋, n₊)^p⌋`.
    pub p: f64,
    /// Rate exponent of the admissible bandwidth set, in `(2/5, 1)`.
    pub q: f64,
    /// Lower grid bound for `b_k`.
    pub h_lo: f64,
    /// Upper grid bound for `b_k`.
    pub h_hi: f64,
    /// Arithmetic grid resolution.
    pub grid_step: f64,
    /// Critical value `z` in the rejection indicator.
    pub alpha_crit: f64,
    /// Mixing exponent of the bias correction.
    pub delta: f64,
    /// Variance estimator used inside the sub-sample statistics.
    pub variant: VarianceVariant,
    /// Use `|T_m| > z` instead of the displayed one-sided indicator.
    pub two_sided: bool,
}

impl Default for BandwidthConfig {
    fn default() -> Self {
        BandwidthConfig {
            p: 0.5,
            q: 4.0 / 9.0,
            h_lo: 0.05,
            h_hi: 0.50,
            grid_step: 0.01,
            alpha_crit: 1.96,
            delta: 0.81,
            variant: VarianceVariant::V2,
            two_sided: false,
        }
    }
}

impl BandwidthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h_lo > 0.0 && self.h_lo < self.h_hi && self.h_hi < 1.0) {
            return Err(Error::domain(format!(
                "grid bounds must satisfy 0 < h_lo < h_hi < 1, got [{}, {}]",
                self.h_lo, self.h_hi
            )));
        }
        if !(self.q > 0.4 && self.q < 1.0) {
            return Err(Error::domain(format!(
                "rate exponent must lie in (2/5, 1), got q = {}",
                self.q
            )));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::domain(format!(
                "sub-sample exponent must lie in (0, 1), got p = {}",
                self.p
            )));
        }
        if !(self.grid_step > 0.0) {
            return Err(Error::domain(format!(
                "grid step must be positive, got {}",
                self.grid_step
            )));
        }
        if !(self.alpha_crit > 0.0) || !self.alpha_crit.is_finite() {
            return Err(Error::domain(format!(
                "critical value must be positive and finite, got {}",
                self.alpha_crit
            )));
        }
        Ok(())
    }

    /// The arithmetic candidate grid over `[h_lo, h_hi]`.
    pub fn grid(&self) -> Vec<f64> {
        let span = self.h_hi - self.h_lo;
        let steps = (span / self.grid_step + 1e-9).floor() as usize;
        (0..=steps)
            .map(|i| self.h_lo + i as f64 * self.grid_step)
            .collect()
    }
}

/// One grid point of the estimated power curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub b_k: f64,
    pub pi_hat: f64,
    /// Sub-samples whose statistic was undefined at this `b_k`; they
    /// count as non-rejections.
    pub degenerate: usize,
}

/// Result of the power-optimality search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSelection {
    /// Full-sample smoothing parameter `b̂_n = B̂ n^{-q}`.
    pub b_hat_n: f64,
    /// Sub-sample-scale maximizer of the power curve.
    pub b_hat_k: f64,
    /// Recovered constant `B̂ = b̂_k k^q`.
    pub b_constant: f64,
    /// Number of sub-samples.
    pub m: usize,
    /// Per-side sub-sample sizes.
    pub k_minus: usize,
    pub k_plus: usize,
    pub power_curve: Vec<PowerPoint>,
    /// Set when the power curve is constant across the grid (the
    /// maximizer then carries no information and defaults to `h_lo`).
    pub flat_flag: bool,
}

/// `M = ⌊min(n₋^p, n₊^p)⌋` for the given sample and cutoff.
pub fn subsample_count(sample: &Sample, c: f64, p: f64) -> Result<usize> {
    let counts = sample.side_counts(c);
    if counts.n_minus == 0 {
        return Err(Error::OneSidedSample("below"));
    }
    if counts.n_plus == 0 {
        return Err(Error::OneSidedSample("at or above"));
    }
    let m = (counts.n_minus.min(counts.n_plus) as f64).powf(p).floor() as usize;
    Ok(m.max(1))
}

/// Splits the sample into `M` interleaved sub-samples: with each side
/// ordered ascending, sub-sample `m` (1-based) takes positions
/// `m, m+M, m+2M, …`, `k₋ = ⌊n₋/M⌋` from the left side and
/// `k₊ = ⌊n₊/M⌋` from the right; trailing observations are discarded.
pub fn split_subsamples(sample: &Sample, c: f64, m: usize) -> Result<Vec<Sample>> {
    let (below, above) = sample.split(c);
    if below.is_empty() {
        return Err(Error::OneSidedSample("below"));
    }
    if above.is_empty() {
        return Err(Error::OneSidedSample("at or above"));
    }
    let max_m = below.len().min(above.len());
    if m == 0 || m > max_m {
        return Err(Error::SubsampleCount { m, max: max_m });
    }
    let k_minus = below.len() / m;
    let k_plus = above.len() / m;
    let mut out = Vec::with_capacity(m);
    for offset in 0..m {
        let mut values = Vec::with_capacity(k_minus + k_plus);
        values.extend(below.iter().skip(offset).step_by(m).take(k_minus));
        values.extend(above.iter().skip(offset).step_by(m).take(k_plus));
        out.push(Sample::from_sorted(values));
    }
    Ok(out)
}

fn rejects(t: f64, cfg: &BandwidthConfig) -> bool {
    if cfg.two_sided {
        t.abs() > cfg.alpha_crit
    } else {
        t > cfg.alpha_crit
    }
}

/// Estimated power curve `b_k ↦ π̂_M(b_k)` over the candidate grid.
pub fn power_curve(sample: &Sample, c: f64, cfg: &BandwidthConfig) -> Result<Vec<PowerPoint>> {
    cfg.validate()?;
    let m = subsample_count(sample, c, cfg.p)?;
    let subs = split_subsamples(sample, c, m)?;
    let k = subs[0].len();
    let grid = cfg.grid();
    let mut curve = Vec::with_capacity(grid.len());
    for &b_k in &grid {
        let mut hits = 0usize;
        let mut degenerate = 0usize;
        for sub in &subs {
            debug_assert_eq!(sub.len(), k);
            match t_statistic(sub, c, b_k, cfg.delta, cfg.variant) {
                Ok(t) => {
                    if rejects(t, cfg) {
                        hits += 1;
                    }
                }
                Err(e) if e.is_degeneracy() => degenerate += 1,
                Err(e) => return Err(e),
            }
        }
        curve.push(PowerPoint {
            b_k,
            pi_hat: hits as f64 / m as f64,
            degenerate,
        });
    }
    Ok(curve)
}

/// Runs the full selection: power curve, smallest grid maximizer, and
/// rescaling to the full sample size.
pub fn select_bandwidth(sample: &Sample, c: f64, cfg: &BandwidthConfig) -> Result<BandwidthSelection> {
    cfg.validate()?;
    let m = subsample_count(sample, c, cfg.p)?;
    let counts = sample.side_counts(c);
    let k_minus = counts.n_minus / m;
    let k_plus = counts.n_plus / m;
    let curve = power_curve(sample, c, cfg)?;

    let mut best = &curve[0];
    for pt in &curve[1..] {
        if pt.pi_hat > best.pi_hat {
            best = pt;
        }
    }
    let flat_flag = curve
        .iter()
        .all(|pt| (pt.pi_hat - curve[0].pi_hat).abs() < f64::EPSILON);

    let k = (k_minus + k_plus) as f64;
    let n = sample.len() as f64;
    let b_hat_k = best.b_k;
    let b_constant = b_hat_k * k.powf(cfg.q);
    let b_hat_n = b_constant * n.powf(-cfg.q);
    Ok(BandwidthSelection {
        b_hat_n,
        b_hat_k,
        b_constant,
        m,
        k_minus,
        k_plus,
        power_curve: curve,
        flat_flag,
    })
}
