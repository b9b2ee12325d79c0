//! The `simulate` subcommand: Monte Carlo estimation, size, and power
//! studies configured by flags or a plain-text `key = value` spec file.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use densjump::bandwidth::BandwidthConfig;
use densjump::estim::VarianceVariant;
use densjump::simulate::{
    run_estimation_study, run_size_power_study, CellResult, CutoffRule, SimulationSpec, TargetDist,
};

use crate::errors::CliError;
use crate::output::{emit, fmt_f64, manifest_comment, to_json_string, RunManifest};

#[derive(Args)]
pub struct SimulateArgs {
    /// Plain-text spec file with `key = value` lines; flags set on the
    /// command line override its entries.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Study preset: 1 estimation, 2 size, 3 power.
    #[arg(long)]
    table: Option<u8>,
    /// Target family: gamma or weibull.
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    shape: Option<f64>,
    #[arg(long)]
    scale: Option<f64>,
    /// Cutoff at this quantile of the target.
    #[arg(long = "c-quantile", conflicts_with = "cutoff")]
    c_quantile: Option<f64>,
    /// Explicit cutoff.
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    /// Variance variant: v1 or v2.
    #[arg(long)]
    variant: Option<String>,
    /// Discontinuity measures, comma separated (tables 2-3).
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 = all cores. Defaults to the THREADS
    /// environment variable when set.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long = "h-lo")]
    h_lo: Option<f64>,
    #[arg(long = "h-hi")]
    h_hi: Option<f64>,
    #[arg(long = "grid-step")]
    grid_step: Option<f64>,
    #[arg(long = "crit")]
    alpha_crit: Option<f64>,
    #[arg(long = "two-sided-criterion")]
    two_sided: Option<bool>,
    /// Output CSV path.
    #[arg(long = "out-csv")]
    out_csv: Option<PathBuf>,
    /// Output JSON path.
    #[arg(long = "out-json")]
    out_json: Option<PathBuf>,
}

/// Spec-file keys mirror the long flags (with `_` for `-`).
fn parse_spec_file(path: &PathBuf) -> Result<BTreeMap<String, String>, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read spec {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (idx, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "{} line {}: expected `key = value`, got {line:?}",
                path.display(),
                idx + 1
            )));
        };
        map.insert(
            key.trim().to_lowercase().replace('-', "_"),
            value.trim().to_string(),
        );
    }
    Ok(map)
}

fn parse_key<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("spec key {key}: cannot parse {raw:?}"))),
    }
}

fn parse_d_list(raw: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for tok in raw.split([',', ' ']).filter(|t| !t.is_empty()) {
        out.push(
            tok.parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad discontinuity measure {tok:?}")))?,
        );
    }
    if out.is_empty() {
        return Err(CliError::Config("empty d list".into()));
    }
    Ok(out)
}

struct ResolvedSim {
    table: Option<u8>,
    spec: SimulationSpec,
    d_values: Vec<f64>,
    threads: usize,
    dist_name: String,
    cutoff_desc: String,
}

fn resolve(args: &SimulateArgs) -> Result<ResolvedSim, CliError> {
    let file = match &args.spec {
        Some(path) => parse_spec_file(path)?,
        None => BTreeMap::new(),
    };

    let table = match args.table.or(parse_key(&file, "table")?) {
        Some(t @ 1..=3) => Some(t),
        Some(t) => {
            return Err(CliError::Config(format!(
                "--table must be 1, 2, or 3, got {t}"
            )))
        }
        None => None,
    };

    let dist_name = args
        .dist
        .clone()
        .or(file.get("dist").cloned())
        .unwrap_or_else(|| "gamma".to_string())
        .to_lowercase();
    let (default_shape, default_scale) = match dist_name.as_str() {
        "gamma" => (2.75, 1.0),
        "weibull" => (1.75, 3.5),
        other => {
            return Err(CliError::Config(format!(
                "unknown distribution {other:?}; expected gamma or weibull"
            )))
        }
    };
    let shape = args
        .shape
        .or(parse_key(&file, "shape")?)
        .unwrap_or(default_shape);
    let scale = args
        .scale
        .or(parse_key(&file, "scale")?)
        .unwrap_or(default_scale);
    let dist = match dist_name.as_str() {
        "gamma" => TargetDist::Gamma { shape, scale },
        _ => TargetDist::Weibull { shape, scale },
    };

    let explicit_cutoff = args.cutoff.or(parse_key(&file, "cutoff")?);
    let quantile = args.c_quantile.or(parse_key(&file, "c_quantile")?);
    let (cutoff_rule, cutoff_desc) = match (explicit_cutoff, quantile) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "give either --cutoff or --c-quantile, not both".into(),
            ))
        }
        (Some(c), None) => (CutoffRule::Explicit(c), format!("cutoff={c}")),
        (None, Some(p)) => (CutoffRule::Quantile(p), format!("c_quantile={p}")),
        (None, None) => (CutoffRule::Quantile(0.3), "c_quantile=0.3".to_string()),
    };

    let variant = match args
        .variant
        .clone()
        .or(file.get("variant").cloned())
        .unwrap_or_else(|| "v2".to_string())
        .to_lowercase()
        .as_str()
    {
        "v1" => VarianceVariant::V1,
        "v2" => VarianceVariant::V2,
        other => {
            return Err(CliError::Config(format!(
                "unknown variance variant {other:?}; expected v1 or v2"
            )))
        }
    };

    let delta = args.delta.or(parse_key(&file, "delta")?).unwrap_or(0.81);
    let defaults = BandwidthConfig::default();
    let bandwidth = BandwidthConfig {
        p: args.p.or(parse_key(&file, "p")?).unwrap_or(defaults.p),
        q: args.q.or(parse_key(&file, "q")?).unwrap_or(defaults.q),
        h_lo: args
            .h_lo
            .or(parse_key(&file, "h_lo")?)
            .unwrap_or(defaults.h_lo),
        h_hi: args
            .h_hi
            .or(parse_key(&file, "h_hi")?)
            .unwrap_or(defaults.h_hi),
        grid_step: args
            .grid_step
            .or(parse_key(&file, "grid_step")?)
            .unwrap_or(defaults.grid_step),
        alpha_crit: args
            .alpha_crit
            .or(parse_key(&file, "alpha_crit")?)
            .unwrap_or(defaults.alpha_crit),
        delta,
        variant,
        two_sided: args
            .two_sided
            .or(parse_key(&file, "two_sided_criterion")?)
            .unwrap_or(false),
    };

    let d_values = match (args.d.as_deref(), file.get("d"), table) {
        (Some(raw), _, _) => parse_d_list(raw)?,
        (None, Some(raw), _) => parse_d_list(raw)?,
        (None, None, Some(2)) => vec![0.0],
        (None, None, Some(3)) => vec![0.02, 0.04, 0.06, 0.08, 0.10],
        (None, None, _) => vec![0.0],
    };

    let spec = SimulationSpec {
        dist,
        cutoff_rule,
        d: d_values[0],
        n: args.n.or(parse_key(&file, "n")?).unwrap_or(2000),
        reps: args.reps.or(parse_key(&file, "reps")?).unwrap_or(1000),
        delta,
        variant,
        bandwidth,
        seed: args.seed.or(parse_key(&file, "seed")?).unwrap_or(0),
    };

    let env_threads = std::env::var("THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let threads = args
        .threads
        .or(parse_key(&file, "threads")?)
        .or(env_threads)
        .unwrap_or(0);

    if table.is_none() && args.d.is_none() && file.get("d").is_none() {
        return Err(CliError::Config(
            "give --table 1|2|3 or an explicit --d list".into(),
        ));
    }

    Ok(ResolvedSim {
        table,
        spec,
        d_values,
        threads,
        dist_name,
        cutoff_desc,
    })
}

#[derive(Serialize)]
struct CellDocument {
    d: f64,
    bias: f64,
    std_dev: f64,
    rmse: f64,
    rejection_rates: Vec<LevelRate>,
    excluded: usize,
    included: usize,
}

#[derive(Serialize)]
struct LevelRate {
    level: f64,
    rate: f64,
}

#[derive(Serialize)]
struct SimulateDocument {
    study: String,
    distribution: String,
    c: f64,
    n: usize,
    reps: usize,
    delta: f64,
    variant: VarianceVariant,
    cells: Vec<CellDocument>,
    manifest: RunManifest,
}

fn cell_doc(d: f64, cell: &CellResult) -> CellDocument {
    CellDocument {
        d,
        bias: cell.bias,
        std_dev: cell.std_dev,
        rmse: cell.rmse,
        rejection_rates: cell
            .rejection_rates
            .iter()
            .map(|&(level, rate)| LevelRate { level, rate })
            .collect(),
        excluded: cell.excluded,
        included: cell.included,
    }
}

pub fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let resolved = resolve(&args)?;
    let spec = &resolved.spec;
    spec.validate()?;

    if resolved.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(resolved.threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool setup failed: {e}")))?;
    }

    let study = match resolved.table {
        Some(1) => "estimation",
        Some(2) => "size",
        Some(3) => "power",
        _ => "size_power",
    };
    let cells: Vec<(f64, CellResult)> = if resolved.table == Some(1) {
        vec![(0.0, run_estimation_study(spec)?)]
    } else {
        run_size_power_study(spec, &resolved.d_values)?
    };

    let c = spec.cutoff()?;
    let mut manifest = RunManifest::new(
        "simulate",
        args.spec
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
        Some(spec.seed),
    );
    manifest.param("study", study);
    manifest.param("distribution", &resolved.dist_name);
    manifest.param("dist", spec.dist);
    manifest.param("cutoff_rule", resolved.cutoff_desc);
    manifest.param("c", c);
    manifest.param("n", spec.n);
    manifest.param("reps", spec.reps);
    manifest.param("delta", spec.delta);
    manifest.param("variant", spec.variant);
    manifest.param("d_values", &resolved.d_values);
    manifest.param("p", spec.bandwidth.p);
    manifest.param("q", spec.bandwidth.q);
    manifest.param("h_lo", spec.bandwidth.h_lo);
    manifest.param("h_hi", spec.bandwidth.h_hi);
    manifest.param("grid_step", spec.bandwidth.grid_step);
    manifest.param("alpha_crit", spec.bandwidth.alpha_crit);
    manifest.param("two_sided_criterion", spec.bandwidth.two_sided);

    // CSV: one row per (d, level) cell.
    let mut csv = manifest_comment(&manifest)?;
    csv.push_str(
        "distribution,c,n,delta,variant,d,level,rejection_rate,bias,std_dev,rmse,excluded,included\n",
    );
    for (d, cell) in &cells {
        for &(level, rate) in &cell.rejection_rates {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                resolved.dist_name,
                fmt_f64(c),
                spec.n,
                fmt_f64(spec.delta),
                spec.variant,
                fmt_f64(*d),
                fmt_f64(level),
                fmt_f64(rate),
                fmt_f64(cell.bias),
                fmt_f64(cell.std_dev),
                fmt_f64(cell.rmse),
                cell.excluded,
                cell.included
            ));
        }
    }

    let doc = SimulateDocument {
        study: study.to_string(),
        distribution: resolved.dist_name.clone(),
        c,
        n: spec.n,
        reps: spec.reps,
        delta: spec.delta,
        variant: spec.variant,
        cells: cells.iter().map(|(d, cell)| cell_doc(*d, cell)).collect(),
        manifest,
    };

    match (&args.out_csv, &args.out_json) {
        (None, None) => {
            // Human-readable summary on stdout.
            println!("study: {study}  dist: {}  c: {c:.6}  n: {}  reps: {}  delta: {}  variant: {}",
                resolved.dist_name, spec.n, spec.reps, spec.delta, spec.variant);
            for (d, cell) in &cells {
                let rates: Vec<String> = cell
                    .rejection_rates
                    .iter()
                    .map(|(l, r)| format!("{:.0}%: {:.1}%", l * 100.0, r * 100.0))
                    .collect();
                println!(
                    "d = {d:.2}: bias {:+.6}  sd {:.6}  rmse {:.6}  reject [{}]  excluded {}",
                    cell.bias,
                    cell.std_dev,
                    cell.rmse,
                    rates.join(", "),
                    cell.excluded
                );
            }
        }
        _ => {
            if let Some(path) = &args.out_csv {
                crate::output::write_atomic(path, &csv)?;
            }
            if let Some(path) = &args.out_json {
                emit(Some(path), &to_json_string(&doc)?)?;
            }
        }
    }
    Ok(())
}
