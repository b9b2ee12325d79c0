//! Python bindings: the special functions, kernels, estimators, the
//! continuity test, bandwidth selection, and the mixture sampler.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use densjump::bandwidth::{self, BandwidthConfig};
use densjump::estim::{self, Sample, VarianceVariant};
use densjump::simulate::{self, TargetDist};
use densjump::specfun;
use densjump::Error;

fn to_py_err(e: Error) -> PyErr {
    match &e {
        Error::Domain(_) | Error::InvalidMixture(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_variant(name: &str) -> PyResult<VarianceVariant> {
    match name.to_lowercase().as_str() {
        "v1" => Ok(VarianceVariant::V1),
        "v2" => Ok(VarianceVariant::V2),
        other => Err(PyValueError::new_err(format!(
            "unknown variance variant {other:?}; expected \"v1\" or \"v2\""
        ))),
    }
}

fn parse_dist(family: &str, shape: f64, scale: f64) -> PyResult<TargetDist> {
    match family.to_lowercase().as_str() {
        "gamma" => Ok(TargetDist::Gamma { shape, scale }),
        "weibull" => Ok(TargetDist::Weibull { shape, scale }),
        other => Err(PyValueError::new_err(format!(
            "unknown family {other:?}; expected \"gamma\" or \"weibull\""
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn build_config(
    p: f64,
    q: f64,
    h_lo: f64,
    h_hi: f64,
    grid_step: f64,
    alpha_crit: f64,
    delta: f64,
    variant: VarianceVariant,
    two_sided: bool,
) -> BandwidthConfig {
    BandwidthConfig {
        p,
        q,
        h_lo,
        h_hi,
        grid_step,
        alpha_crit,
        delta,
        variant,
        two_sided,
    }
}

/// `ln Γ(a)` for `a > 0`.
#[pyfunction]
fn log_gamma(a: f64) -> PyResult<f64> {
    specfun::log_gamma(a).map_err(to_py_err)
}

/// Regularized lower incomplete gamma function `P(a, z)`.
#[pyfunction]
fn reg_lower_gamma(a: f64, z: f64) -> PyResult<f64> {
    specfun::reg_lower_gamma(a, z).map_err(to_py_err)
}

/// Regularized upper incomplete gamma function `Q(a, z)`.
#[pyfunction]
fn reg_upper_gamma(a: f64, z: f64) -> PyResult<f64> {
    specfun::reg_upper_gamma(a, z).map_err(to_py_err)
}

/// Quantile of `P(a, ·)`.
#[pyfunction]
fn inv_reg_lower_gamma(a: f64, p: f64) -> PyResult<f64> {
    specfun::inv_reg_lower_gamma(a, p).map_err(to_py_err)
}

/// Gamma kernel at design point `x`, smoothing `b`, evaluated at `u`.
#[pyfunction]
fn gamma_kernel(x: f64, b: f64, u: f64) -> PyResult<f64> {
    densjump::kernels::gamma_kernel(x, b, u).map_err(to_py_err)
}

/// Left truncated kernel (support `[0, c)`).
#[pyfunction]
fn trunc_kernel_minus(x: f64, b: f64, c: f64, u: f64) -> PyResult<f64> {
    densjump::kernels::trunc_kernel_minus(x, b, c, u).map_err(to_py_err)
}

/// Right truncated kernel (support `[c, ∞)`).
#[pyfunction]
fn trunc_kernel_plus(x: f64, b: f64, c: f64, u: f64) -> PyResult<f64> {
    densjump::kernels::trunc_kernel_plus(x, b, c, u).map_err(to_py_err)
}

/// Variance inflation factor `λ(δ)` of the bias-corrected estimator.
#[pyfunction]
fn lambda_factor(delta: f64) -> PyResult<f64> {
    estim::lambda(delta).map_err(to_py_err)
}

/// Test the null of density continuity at `c`. With `b=None` the
/// smoothing parameter is selected by power optimality.
#[pyfunction]
#[pyo3(signature = (values, c, b=None, delta=0.81, variant="v2", alpha=0.05,
                    p=0.5, q=4.0/9.0, h_lo=0.05, h_hi=0.50, grid_step=0.01,
                    alpha_crit=1.96, two_sided=false))]
#[allow(clippy::too_many_arguments)]
fn jump_test<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    c: f64,
    b: Option<f64>,
    delta: f64,
    variant: &str,
    alpha: f64,
    p: f64,
    q: f64,
    h_lo: f64,
    h_hi: f64,
    grid_step: f64,
    alpha_crit: f64,
    two_sided: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let variant = parse_variant(variant)?;
    let sample = Sample::new(values).map_err(to_py_err)?;
    let (bandwidth, source) = match b {
        Some(b) => (b, "explicit"),
        None => {
            let cfg = build_config(
                p, q, h_lo, h_hi, grid_step, alpha_crit, delta, variant, two_sided,
            );
            let sel = bandwidth::select_bandwidth(&sample, c, &cfg).map_err(to_py_err)?;
            (sel.b_hat_n, "power_optimal")
        }
    };
    let result =
        estim::jump_test(&sample, c, bandwidth, delta, variant, alpha).map_err(to_py_err)?;
    let counts = sample.side_counts(c);
    let out = PyDict::new(py);
    out.set_item("c", c)?;
    out.set_item("b", bandwidth)?;
    out.set_item("b_source", source)?;
    out.set_item("delta", delta)?;
    out.set_item("variant", variant.to_string())?;
    out.set_item("f_minus", result.f_minus)?;
    out.set_item("f_plus", result.f_plus)?;
    out.set_item("jump", result.jump)?;
    out.set_item("variance", result.variance)?;
    out.set_item("t_stat", result.t_stat)?;
    out.set_item("p_value", result.p_value)?;
    out.set_item("reject", result.reject)?;
    out.set_item("alpha", alpha)?;
    out.set_item("n", sample.len())?;
    out.set_item("n_minus", counts.n_minus)?;
    out.set_item("n_plus", counts.n_plus)?;
    Ok(out)
}

/// Power-optimality bandwidth selection; returns the selection and the
/// full power curve.
#[pyfunction]
#[pyo3(signature = (values, c, delta=0.81, variant="v2", p=0.5, q=4.0/9.0,
                    h_lo=0.05, h_hi=0.50, grid_step=0.01, alpha_crit=1.96,
                    two_sided=false))]
#[allow(clippy::too_many_arguments)]
fn select_bandwidth<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    c: f64,
    delta: f64,
    variant: &str,
    p: f64,
    q: f64,
    h_lo: f64,
    h_hi: f64,
    grid_step: f64,
    alpha_crit: f64,
    two_sided: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let variant = parse_variant(variant)?;
    let sample = Sample::new(values).map_err(to_py_err)?;
    let cfg = build_config(
        p, q, h_lo, h_hi, grid_step, alpha_crit, delta, variant, two_sided,
    );
    let sel = bandwidth::select_bandwidth(&sample, c, &cfg).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("b_hat_n", sel.b_hat_n)?;
    out.set_item("b_hat_k", sel.b_hat_k)?;
    out.set_item("b_constant", sel.b_constant)?;
    out.set_item("m", sel.m)?;
    out.set_item("k_minus", sel.k_minus)?;
    out.set_item("k_plus", sel.k_plus)?;
    out.set_item("flat_flag", sel.flat_flag)?;
    let curve: Vec<(f64, f64, usize)> = sel
        .power_curve
        .iter()
        .map(|pt| (pt.b_k, pt.pi_hat, pt.degenerate))
        .collect();
    out.set_item("power_curve", curve)?;
    Ok(out)
}

/// Density estimates over a grid: returns `(x, estimate, side)` tuples,
/// with both one-sided limits at `x = cutoff`.
#[pyfunction]
#[pyo3(signature = (values, b, grid, cutoff=None))]
fn density_curve(
    values: Vec<f64>,
    b: f64,
    grid: Vec<f64>,
    cutoff: Option<f64>,
) -> PyResult<Vec<(f64, f64, String)>> {
    let sample = Sample::new(values).map_err(to_py_err)?;
    let curve = estim::density_curve(&sample, b, &grid, cutoff).map_err(to_py_err)?;
    Ok(curve
        .points
        .into_iter()
        .map(|pt| (pt.x, pt.estimate, pt.side.to_string()))
        .collect())
}

/// Draw a sample from a gamma/weibull target, optionally truncated-mixed
/// to carry a density jump of measure `d` at `c`.
#[pyfunction]
#[pyo3(signature = (family, shape, scale, n, seed, c=None, d=0.0))]
fn draw_sample(
    family: &str,
    shape: f64,
    scale: f64,
    n: usize,
    seed: u64,
    c: Option<f64>,
    d: f64,
) -> PyResult<Vec<f64>> {
    let dist = parse_dist(family, shape, scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = match c {
        Some(c) => simulate::sample_discontinuous(&dist, c, d, n, &mut rng).map_err(to_py_err)?,
        None => simulate::sample_continuous(&dist, n, &mut rng).map_err(to_py_err)?,
    };
    Ok(sample.values().to_vec())
}

/// Quantile of a gamma/weibull target.
#[pyfunction]
fn dist_quantile(family: &str, shape: f64, scale: f64, p: f64) -> PyResult<f64> {
    let dist = parse_dist(family, shape, scale)?;
    simulate::dist_quantile(&dist, p).map_err(to_py_err)
}

#[pymodule]
fn _densjump(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(reg_lower_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(reg_upper_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(inv_reg_lower_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(trunc_kernel_minus, m)?)?;
    m.add_function(wrap_pyfunction!(trunc_kernel_plus, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_factor, m)?)?;
    m.add_function(wrap_pyfunction!(jump_test, m)?)?;
    m.add_function(wrap_pyfunction!(select_bandwidth, m)?)?;
    m.add_function(wrap_pyfunction!(density_curve, m)?)?;
    m.add_function(wrap_pyfunction!(draw_sample, m)?)?;
    m.add_function(wrap_pyfunction!(dist_quantile, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
