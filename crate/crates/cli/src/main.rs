//! Command-line front end: data ingestion, the four workflows (test,
//! density, bandwidth, simulate), and machine-readable output with
//! embedded run manifests.

mod errors;
mod ingest;
mod output;
mod simspec;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use densjump::bandwidth::{select_bandwidth, BandwidthConfig, BandwidthSelection};
use densjump::estim::{density_curve, jump_test, Sample, VarianceVariant};

use errors::CliError;
use ingest::read_data_column;
use output::{emit, fmt_f64, manifest_comment, to_json_string, RunManifest};

#[derive(Parser)]
#[command(
    name = "densjump",
    version,
    about = "Jump-size estimation and continuity testing for positively supported densities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test the null of density continuity at a cutoff.
    Test(TestArgs),
    /// Estimate the density over a grid of design points.
    Density(DensityArgs),
    /// Select the smoothing parameter by power optimality.
    Bandwidth(BandwidthArgs),
    /// Run Monte Carlo estimation / size / power studies.
    Simulate(simspec::SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    V1,
    V2,
}

impl From<VariantArg> for VarianceVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::V1 => VarianceVariant::V1,
            VariantArg::V2 => VarianceVariant::V2,
        }
    }
}

/// Power-optimality search settings shared by the commands that select
/// a smoothing parameter.
#[derive(Debug, Args, Clone, Copy)]
struct BandwidthFlags {
    /// Sub-sample count exponent: M = floor(min(n-, n+)^p).
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Rate exponent in (2/5, 1) of the bandwidth rescaling.
    #[arg(long, default_value_t = 4.0 / 9.0)]
    q: f64,
    /// Lower bound of the candidate grid.
    #[arg(long = "h-lo", default_value_t = 0.05)]
    h_lo: f64,
    /// Upper bound of the candidate grid.
    #[arg(long = "h-hi", default_value_t = 0.50)]
    h_hi: f64,
    /// Arithmetic grid step.
    #[arg(long = "grid-step", default_value_t = 0.01)]
    grid_step: f64,
    /// Critical value z of the sub-sample rejection indicator.
    #[arg(long = "crit", default_value_t = 1.96)]
    alpha_crit: f64,
    /// Use |T| > z instead of the one-sided indicator T > z.
    #[arg(long = "two-sided-criterion", default_value_t = false)]
    two_sided: bool,
}

impl BandwidthFlags {
    fn to_config(self, delta: f64, variant: VarianceVariant) -> BandwidthConfig {
        BandwidthConfig {
            p: self.p,
            q: self.q,
            h_lo: self.h_lo,
            h_hi: self.h_hi,
            grid_step: self.grid_step,
            alpha_crit: self.alpha_crit,
            delta,
            variant,
            two_sided: self.two_sided,
        }
    }
}

fn record_bandwidth_params(manifest: &mut RunManifest, cfg: &BandwidthConfig) {
    manifest.param("p", cfg.p);
    manifest.param("q", cfg.q);
    manifest.param("h_lo", cfg.h_lo);
    manifest.param("h_hi", cfg.h_hi);
    manifest.param("grid_step", cfg.grid_step);
    manifest.param("alpha_crit", cfg.alpha_crit);
    manifest.param("two_sided_criterion", cfg.two_sided);
}

#[derive(Args)]
struct TestArgs {
    /// CSV file with one numeric column (optional header).
    #[arg(long)]
    data: PathBuf,
    /// Suspected discontinuity point, > 0.
    #[arg(long)]
    cutoff: f64,
    /// Fixed smoothing parameter.
    #[arg(long, conflicts_with = "auto_bandwidth")]
    bandwidth: Option<f64>,
    /// Select the smoothing parameter by power optimality.
    #[arg(long = "auto-bandwidth", default_value_t = false)]
    auto_bandwidth: bool,
    /// Mixing exponent of the bias correction.
    #[arg(long, default_value_t = 0.81)]
    delta: f64,
    /// Variance estimator variant.
    #[arg(long, value_enum, default_value = "v2")]
    variant: VariantArg,
    /// Significance level of the reject flag.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[command(flatten)]
    bw: BandwidthFlags,
    /// Output path for the JSON document (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct TestDocument {
    c: f64,
    b: f64,
    b_source: String,
    delta: f64,
    variant: VarianceVariant,
    f_minus: f64,
    f_plus: f64,
    jump: f64,
    variance: f64,
    t_stat: f64,
    p_value: f64,
    reject: bool,
    alpha: f64,
    n: usize,
    n_minus: usize,
    n_plus: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    selection: Option<BandwidthSelection>,
    manifest: RunManifest,
}

fn cmd_test(args: TestArgs) -> Result<(), CliError> {
    let variant: VarianceVariant = args.variant.into();
    let values = read_data_column(&args.data)?;
    let sample = Sample::new(values).map_err(|e| CliError::Ingest(e.to_string()))?;
    let c = args.cutoff;

    let (b, b_source, selection) = if args.auto_bandwidth {
        let cfg = args.bw.to_config(args.delta, variant);
        let sel = select_bandwidth(&sample, c, &cfg)?;
        (sel.b_hat_n, "power_optimal".to_string(), Some(sel))
    } else {
        let b = args.bandwidth.ok_or_else(|| {
            CliError::Config("either --bandwidth or --auto-bandwidth is required".into())
        })?;
        (b, "explicit".to_string(), None)
    };

    let result = jump_test(&sample, c, b, args.delta, variant, args.alpha)?;
    let counts = sample.side_counts(c);

    let mut manifest = RunManifest::new("test", vec![args.data.display().to_string()], None);
    manifest.param("cutoff", c);
    manifest.param("bandwidth", b);
    manifest.param("b_source", &b_source);
    manifest.param("delta", args.delta);
    manifest.param("variant", variant);
    manifest.param("alpha", args.alpha);
    if args.auto_bandwidth {
        record_bandwidth_params(&mut manifest, &args.bw.to_config(args.delta, variant));
    }

    let doc = TestDocument {
        c,
        b,
        b_source,
        delta: args.delta,
        variant,
        f_minus: result.f_minus,
        f_plus: result.f_plus,
        jump: result.jump,
        variance: result.variance,
        t_stat: result.t_stat,
        p_value: result.p_value,
        reject: result.reject,
        alpha: result.alpha,
        n: sample.len(),
        n_minus: counts.n_minus,
        n_plus: counts.n_plus,
        selection,
        manifest,
    };
    emit(args.out.as_deref(), &to_json_string(&doc)?)
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    data: PathBuf,
    /// Optional discontinuity point; one-sided estimators are used on
    /// each side when given.
    #[arg(long)]
    cutoff: Option<f64>,
    /// Smoothing parameter.
    #[arg(long)]
    bandwidth: f64,
    /// Evaluation grid as LO,HI,COUNT.
    #[arg(long, conflicts_with = "grid_points")]
    grid: Option<String>,
    /// Explicit comma-separated design points.
    #[arg(long = "grid-points")]
    grid_points: Option<String>,
    /// Also emit a histogram companion file with this bin width.
    #[arg(long = "hist-width")]
    hist_width: Option<f64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_grid(args: &DensityArgs) -> Result<Vec<f64>, CliError> {
    let mut grid = if let Some(spec) = &args.grid {
        let parts: Vec<&str> = spec.split(',').collect();
        if parts.len() != 3 {
            return Err(CliError::Config(format!(
                "--grid expects LO,HI,COUNT, got {spec:?}"
            )));
        }
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad grid bound {:?}", parts[0])))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad grid bound {:?}", parts[1])))?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad grid count {:?}", parts[2])))?;
        if count < 1 || !(lo <= hi) || lo < 0.0 {
            return Err(CliError::Config(format!("invalid grid {spec:?}")));
        }
        if count == 1 {
            vec![lo]
        } else {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count).map(|i| lo + i as f64 * step).collect()
        }
    } else if let Some(points) = &args.grid_points {
        let mut grid = Vec::new();
        for tok in points.split(',') {
            let x: f64 = tok
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad grid point {tok:?}")))?;
            if !(x >= 0.0) || !x.is_finite() {
                return Err(CliError::Config(format!(
                    "grid points must be finite and >= 0, got {x}"
                )));
            }
            grid.push(x);
        }
        if grid.is_empty() {
            return Err(CliError::Config("empty grid".into()));
        }
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid
    } else {
        return Err(CliError::Config(
            "one of --grid or --grid-points is required".into(),
        ));
    };

    // With a cutoff inside the grid range, both one-sided limits at c
    // must appear: insert the cutoff as a design point if missing.
    if let Some(c) = args.cutoff {
        let straddles =
            grid.first().is_some_and(|&lo| lo < c) && grid.last().is_some_and(|&hi| hi > c);
        if straddles && !grid.contains(&c) {
            let pos = grid.partition_point(|&x| x < c);
            grid.insert(pos, c);
        }
    }
    Ok(grid)
}

fn cmd_density(args: DensityArgs) -> Result<(), CliError> {
    let values = read_data_column(&args.data)?;
    let sample = Sample::new(values).map_err(|e| CliError::Ingest(e.to_string()))?;
    let grid = parse_grid(&args)?;
    let curve = density_curve(&sample, args.bandwidth, &grid, args.cutoff)?;

    let mut manifest = RunManifest::new("density", vec![args.data.display().to_string()], None);
    manifest.param("bandwidth", args.bandwidth);
    if let Some(c) = args.cutoff {
        manifest.param("cutoff", c);
    }
    manifest.param("grid", &grid);

    let mut csv = manifest_comment(&manifest)?;
    csv.push_str("x,estimate,side\n");
    for pt in &curve.points {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(pt.x),
            fmt_f64(pt.estimate),
            pt.side
        ));
    }
    emit(args.out.as_deref(), &csv)?;

    if let Some(width) = args.hist_width {
        if !(width > 0.0) || !width.is_finite() {
            return Err(CliError::Config(format!(
                "histogram bin width must be positive, got {width}"
            )));
        }
        let hist = histogram_csv(&sample, width, &manifest)?;
        let path = match &args.out {
            Some(out) => {
                let mut p = out.clone();
                p.set_extension("hist.csv");
                p
            }
            None => {
                return Err(CliError::Config(
                    "--hist-width requires --out to name the companion file".into(),
                ))
            }
        };
        output::write_atomic(&path, &hist)?;
    }
    Ok(())
}

fn histogram_csv(sample: &Sample, width: f64, manifest: &RunManifest) -> Result<String, CliError> {
    let n = sample.len() as f64;
    let max = *sample.values().last().expect("non-empty sample");
    let bins = (max / width).floor() as usize + 1;
    let mut counts = vec![0usize; bins];
    for &v in sample.values() {
        let idx = ((v / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let mut csv = manifest_comment(manifest)?;
    csv.push_str("bin_lo,bin_hi,count,density\n");
    for (i, &count) in counts.iter().enumerate() {
        let lo = i as f64 * width;
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(lo),
            fmt_f64(lo + width),
            count,
            fmt_f64(count as f64 / (n * width))
        ));
    }
    Ok(csv)
}

#[derive(Args)]
struct BandwidthArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    cutoff: f64,
    #[arg(long, default_value_t = 0.81)]
    delta: f64,
    #[arg(long, value_enum, default_value = "v2")]
    variant: VariantArg,
    #[command(flatten)]
    bw: BandwidthFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct BandwidthDocument {
    c: f64,
    delta: f64,
    variant: VarianceVariant,
    #[serde(flatten)]
    selection: BandwidthSelection,
    manifest: RunManifest,
}

fn cmd_bandwidth(args: BandwidthArgs) -> Result<(), CliError> {
    let variant: VarianceVariant = args.variant.into();
    let values = read_data_column(&args.data)?;
    let sample = Sample::new(values).map_err(|e| CliError::Ingest(e.to_string()))?;
    let cfg = args.bw.to_config(args.delta, variant);
    let selection = select_bandwidth(&sample, args.cutoff, &cfg)?;

    let mut manifest = RunManifest::new("bandwidth", vec![args.data.display().to_string()], None);
    manifest.param("cutoff", args.cutoff);
    manifest.param("delta", args.delta);
    manifest.param("variant", variant);
    record_bandwidth_params(&mut manifest, &cfg);

    let doc = BandwidthDocument {
        c: args.cutoff,
        delta: args.delta,
        variant,
        selection,
        manifest,
    };
    emit(args.out.as_deref(), &to_json_string(&doc)?)
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Density(args) => cmd_density(args),
        Command::Bandwidth(args) => cmd_bandwidth(args),
        Command::Simulate(args) => simspec::cmd_simulate(args),
    };
    if let Err(e) = result {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
