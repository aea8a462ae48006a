use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sizeshape::baseline::{baseline_mean_monotone, baseline_mean_positive};
use sizeshape::bench::{
    rate_check, regression_comparison, relative_rmse_experiment, rmse_experiment, write_rate_csv, write_regression_csv,
    write_report_csv, BinRule, ComparisonMode, Competitor, ExperimentConfig, RateConfig, SimDesign,
};
use sizeshape::decomp::{decompose_dataset_monotone, decompose_dataset_positive, recompose_monotone, recompose_positive};
use sizeshape::domain::TimeGrid;
use sizeshape::io::{
    load_covariates_csv, load_longitudinal_csv, write_covariates_csv, write_longitudinal_csv, ComponentWriter,
    CovariateTable, LongitudinalDataset,
};
use sizeshape::regress::{
    default_bandwidth, one_hot_rows, KernelFamily, KernelSpec, MonotoneRegressor, PositiveRegressor, RegressionMode,
};
use sizeshape::simgen::{
    generate_monotone, generate_positive, generate_regression, load_monotone_config, load_positive_config,
    load_regression_config, DataKind, GridKind, MonotoneSimConfig, PositiveSimConfig, RegressionSimConfig,
};

#[derive(Parser)]
#[command(name = "sizeshape", version, about = "Size-shape analysis of positive and monotone longitudinal data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a longitudinal dataset (`subject_id,t,z`).
    Simulate(SimulateArgs),
    /// Per-subject size and shape components.
    Decompose(DecomposeArgs),
    /// Frechet mean of the decomposed sample.
    Mean(MeanArgs),
    /// Conditional components over predictor values.
    Regress(RegressArgs),
    /// RMSE table over a grid of N and noise levels.
    Rmse(ExperimentArgs),
    /// RMSE of the Frechet mean relative to the transformation baseline.
    RelativeRmse(ExperimentArgs),
    /// Empirical convergence rates of the step and size estimators.
    RateCheck(RateArgs),
    /// Regression estimates against the noise-free oracle.
    RegressCompare(CompareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Positive,
    Monotone,
}

impl From<Kind> for DataKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Positive => DataKind::Positive,
            Kind::Monotone => DataKind::Monotone,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kernel {
    Epanechnikov,
    Gaussian,
}

impl From<Kernel> for KernelFamily {
    fn from(k: Kernel) -> Self {
        match k {
            Kernel::Epanechnikov => KernelFamily::Epanechnikov,
            Kernel::Gaussian => KernelFamily::Gaussian,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Design {
    /// Linear design with a uniform covariate.
    Global,
    /// Quadratic design with a truncated normal covariate.
    Local,
}

#[derive(Args)]
struct FitOpts {
    #[arg(long, value_enum, default_value = "positive")]
    constraint: Kind,
    /// Bin width in (0, 1], or `auto`.
    #[arg(long, default_value = "auto", value_parser = parse_bins)]
    bins: BinRule,
    /// Points of the shape grid.
    #[arg(long, default_value_t = sizeshape::DEFAULT_SHAPE_LEN)]
    grid: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct InputOpts {
    /// Observations CSV with columns `subject_id,t,z`.
    #[arg(long)]
    input: PathBuf,
    /// Time window `a,b` mapped onto [0, 1].
    #[arg(long, value_parser = parse_range)]
    time_range: Option<(f64, f64)>,
}

#[derive(Args)]
struct OutputOpts {
    /// Output path; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    fit: FitOpts,
    /// Generate a regression dataset with covariates instead.
    #[arg(long, value_enum)]
    regression: Option<Design>,
    /// Key-value config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n_obs: Option<usize>,
    #[arg(long)]
    nu0: Option<f64>,
    /// Irregular exponential-spacing time grids.
    #[arg(long)]
    irregular: bool,
    /// Where to write the covariates of a regression dataset.
    #[arg(long)]
    covariates_out: Option<PathBuf>,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    fit: FitOpts,
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct MeanArgs {
    #[command(flatten)]
    fit: FitOpts,
    #[command(flatten)]
    input: InputOpts,
    /// Also write the transformation-approach mean as `baseline`.
    #[arg(long)]
    baseline: bool,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct RegressArgs {
    #[command(flatten)]
    fit: FitOpts,
    #[command(flatten)]
    input: InputOpts,
    /// Covariates CSV with columns `subject_id,x1,...,xp`.
    #[arg(long)]
    covariates: PathBuf,
    /// Covariate column to one-hot encode; repeatable.
    #[arg(long)]
    categorical: Vec<String>,
    /// Predictor value `v1,...,vp`; repeatable.
    #[arg(long, value_parser = parse_point)]
    x: Vec<Point>,
    /// Evenly spaced scalar predictors `lo,hi,count`.
    #[arg(long, value_parser = parse_x_grid)]
    x_grid: Option<XGrid>,
    /// Local linear fit instead of global.
    #[arg(long)]
    local: bool,
    /// Kernel bandwidth; defaults to `sd(X) n^(-1/5)`.
    #[arg(long, requires = "local")]
    bandwidth: Option<f64>,
    #[arg(long, value_enum, default_value = "epanechnikov")]
    kernel: Kernel,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    fit: FitOpts,
    /// Key-value design config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "100,200,500,1000")]
    n_obs: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.15")]
    nu0: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    replicates: usize,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
    n_obs: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    nu0: f64,
    #[arg(long, default_value_t = 20)]
    replicates: usize,
    /// Report the size estimator instead of trajectory recovery.
    #[arg(long)]
    size: bool,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    fit: FitOpts,
    #[arg(long, value_enum, default_value = "global")]
    design: Design,
    /// Key-value design config overriding the chosen design.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "0.5,1.5,21", value_parser = parse_x_grid)]
    x_grid: XGrid,
    #[arg(long)]
    local: bool,
    #[arg(long, requires = "local")]
    bandwidth: Option<f64>,
    #[arg(long, value_enum, default_value = "epanechnikov")]
    kernel: Kernel,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Clone)]
struct Point(Vec<f64>);

#[derive(Clone)]
struct XGrid(Vec<f64>);

fn parse_bins(s: &str) -> std::result::Result<BinRule, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(BinRule::Auto);
    }
    match s.parse::<f64>() {
        Ok(w) if w > 0.0 && w <= 1.0 => Ok(BinRule::Width(w)),
        _ => Err(format!("expected `auto` or a width in (0, 1], got `{s}`")),
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number")))
        .collect()
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    parse_list(s).map(Point)
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    match parse_list(s)?.as_slice() {
        &[a, b] if b > a => Ok((a, b)),
        _ => Err(format!("expected `a,b` with a < b, got `{s}`")),
    }
}

fn parse_x_grid(s: &str) -> std::result::Result<XGrid, String> {
    let v = parse_list(s)?;
    match v.as_slice() {
        &[lo, hi, k] if hi >= lo && k >= 1.0 && k.fract() == 0.0 => {
            let k = k as usize;
            Ok(XGrid((0..k).map(|i| if k == 1 { lo } else { lo + (hi - lo) * i as f64 / (k - 1) as f64 }).collect()))
        }
        _ => Err(format!("expected `lo,hi,count`, got `{s}`")),
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(input: &InputOpts) -> Result<LongitudinalDataset> {
    load_longitudinal_csv(&input.input, input.time_range).with_context(|| format!("reading {}", input.input.display()))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let grid = if a.irregular { GridKind::Irregular } else { GridKind::Regular };
    let ds = match a.regression {
        Some(design) => {
            let mut cfg = match (&a.config, design) {
                (Some(p), _) => load_regression_config(p)?,
                (None, Design::Global) => RegressionSimConfig::global_design(),
                (None, Design::Local) => RegressionSimConfig::local_design(),
            };
            cfg.seed = a.fit.seed;
            cfg.shape_len = a.fit.grid;
            cfg.grid = grid;
            if let Some(n) = a.n {
                cfg.n = n;
            }
            if let Some(n) = a.n_obs {
                cfg.n_obs = n;
            }
            if let Some(v) = a.nu0 {
                cfg.nu0 = v;
            }
            let (ds, _, _) = generate_regression(&cfg, a.fit.constraint.into())?;
            let path = a.covariates_out.as_ref().context("--covariates-out is required with --regression")?;
            write_covariates_csv(File::create(path)?, &ds)?;
            ds
        }
        None => match a.fit.constraint {
            Kind::Positive => {
                let mut cfg = match &a.config {
                    Some(p) => load_positive_config(p)?,
                    None => PositiveSimConfig::default(),
                };
                cfg.seed = a.fit.seed;
                cfg.shape_len = a.fit.grid;
                cfg.grid = grid;
                cfg.n = a.n.unwrap_or(cfg.n);
                cfg.n_obs = a.n_obs.unwrap_or(cfg.n_obs);
                cfg.nu0 = a.nu0.unwrap_or(cfg.nu0);
                generate_positive(&cfg)?.0
            }
            Kind::Monotone => {
                let mut cfg = match &a.config {
                    Some(p) => load_monotone_config(p)?,
                    None => MonotoneSimConfig::default(),
                };
                cfg.seed = a.fit.seed;
                cfg.shape_len = a.fit.grid;
                cfg.grid = grid;
                cfg.n = a.n.unwrap_or(cfg.n);
                cfg.n_obs = a.n_obs.unwrap_or(cfg.n_obs);
                cfg.nu0 = a.nu0.unwrap_or(cfg.nu0);
                generate_monotone(&cfg)?.0
            }
        },
    };
    let mut out = sink(&a.out.output)?;
    write_longitudinal_csv(&mut out, &ds, None)?;
    out.flush()?;
    Ok(())
}

fn decompose(a: DecomposeArgs) -> Result<()> {
    let ds = load(&a.input)?;
    let bins = a.fit.bins.resolve(&ds)?;
    let mut w = ComponentWriter::new(sink(&a.out.output)?, "subject_id")?;
    match a.fit.constraint {
        Kind::Positive => {
            for (s, d) in ds.subjects().iter().zip(decompose_dataset_positive(&ds, &bins, a.fit.grid)?) {
                w.positive(&s.id, &d)?;
            }
        }
        Kind::Monotone => {
            for (s, d) in ds.subjects().iter().zip(decompose_dataset_monotone(&ds, &bins, a.fit.grid)?) {
                w.monotone(&s.id, &d)?;
            }
        }
    }
    w.finish()?;
    Ok(())
}

fn mean(a: MeanArgs) -> Result<()> {
    let ds = load(&a.input)?;
    let bins = a.fit.bins.resolve(&ds)?;
    let m = a.fit.grid;
    let grid = TimeGrid::uniform(m)?;
    let mut w = ComponentWriter::new(sink(&a.out.output)?, "subject_id")?;
    match a.fit.constraint {
        Kind::Positive => {
            let est = decompose_dataset_positive(&ds, &bins, m)?;
            let mean = sizeshape::decomp::frechet_mean_positive(&est)?;
            w.positive("mean", &mean.decomposition)?;
            w.trajectory("mean", &mean.trajectory)?;
            if a.baseline {
                let trajs = est.iter().map(|d| recompose_positive(d, grid.clone())).collect::<sizeshape::Result<Vec<_>>>()?;
                w.trajectory("baseline", &baseline_mean_positive(&trajs)?)?;
            }
        }
        Kind::Monotone => {
            let est = decompose_dataset_monotone(&ds, &bins, m)?;
            let mean = sizeshape::decomp::frechet_mean_monotone(&est)?;
            w.monotone("mean", &mean.decomposition)?;
            w.trajectory("mean", &mean.trajectory)?;
            if a.baseline {
                let trajs = est.iter().map(|d| recompose_monotone(d, grid.clone())).collect::<sizeshape::Result<Vec<_>>>()?;
                w.trajectory("baseline", &baseline_mean_monotone(&trajs)?)?;
            }
        }
    }
    w.finish()?;
    Ok(())
}

/// Reads covariates, one-hot encoding the named columns.
fn read_covariates(path: &Path, categorical: &[String]) -> Result<CovariateTable> {
    if categorical.is_empty() {
        return Ok(load_covariates_csv(path)?);
    }
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let id_col = headers.iter().position(|h| h == "subject_id").context("missing column `subject_id`")?;
    for c in categorical {
        if !headers.contains(c) {
            bail!("no covariate column `{c}`");
        }
    }
    let records: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
    let mut table = CovariateTable {
        names: Vec::new(),
        ids: records.iter().map(|r| r.get(id_col).unwrap_or("").trim().to_string()).collect(),
        rows: vec![Vec::new(); records.len()],
    };
    for (j, name) in headers.iter().enumerate().filter(|&(j, _)| j != id_col) {
        let cells: Vec<String> = records.iter().map(|r| r.get(j).unwrap_or("").trim().to_string()).collect();
        if categorical.contains(name) {
            let (rows, levels) = one_hot_rows::<f64>(&cells);
            table.names.extend(levels.iter().map(|l| format!("{name}={l}")));
            for (row, enc) in table.rows.iter_mut().zip(rows) {
                row.extend(enc);
            }
        } else {
            table.names.push(name.clone());
            for (k, (row, cell)) in table.rows.iter_mut().zip(&cells).enumerate() {
                let v: f64 = cell.parse().with_context(|| format!("column `{name}`, row {}: `{cell}` is not a number", k + 1))?;
                row.push(v);
            }
        }
    }
    Ok(table)
}

fn regress(a: RegressArgs) -> Result<()> {
    let ds = load(&a.input)?.attach_covariates(&read_covariates(&a.covariates, &a.categorical)?)?;
    let design = ds.covariates().expect("attached above");
    let mut xs: Vec<Vec<f64>> = a.x.iter().map(|p| p.0.clone()).collect();
    if let Some(g) = &a.x_grid {
        xs.extend(g.0.iter().map(|&v| vec![v]));
    }
    if xs.is_empty() {
        bail!("give at least one predictor value with --x or --x-grid");
    }
    let mode = if a.local {
        let h = match a.bandwidth {
            Some(h) => h,
            None => default_bandwidth(design)?,
        };
        RegressionMode::Local(KernelSpec::new(a.kernel.into(), h)?)
    } else {
        RegressionMode::Global
    };
    let bins = a.fit.bins.resolve(&ds)?;
    let m = a.fit.grid;
    let mut w = ComponentWriter::new(sink(&a.out.output)?, "x")?;
    let label = |x: &[f64]| x.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
    match a.fit.constraint {
        Kind::Positive => {
            let est = decompose_dataset_positive(&ds, &bins, m)?;
            let reg = PositiveRegressor::new(&est, design)?;
            for x in &xs {
                let fit = reg.fit(x, &mode)?;
                w.positive(&label(x), &fit.decomposition)?;
                w.trajectory(&label(x), &fit.trajectory)?;
            }
        }
        Kind::Monotone => {
            let est = decompose_dataset_monotone(&ds, &bins, m)?;
            let reg = MonotoneRegressor::new(&est, design)?;
            for x in &xs {
                let fit = reg.fit(x, &mode)?;
                w.monotone(&label(x), &fit.decomposition)?;
                w.trajectory(&label(x), &fit.trajectory)?;
            }
        }
    }
    w.finish()?;
    Ok(())
}

fn experiment_config(a: &ExperimentArgs) -> Result<ExperimentConfig> {
    let design = match a.fit.constraint {
        Kind::Positive => {
            let base = match &a.config {
                Some(p) => load_positive_config(p)?,
                None => PositiveSimConfig::default(),
            };
            SimDesign::Positive(PositiveSimConfig { n: a.n, shape_len: a.fit.grid, ..base })
        }
        Kind::Monotone => {
            let base = match &a.config {
                Some(p) => load_monotone_config(p)?,
                None => MonotoneSimConfig::default(),
            };
            SimDesign::Monotone(MonotoneSimConfig { n: a.n, shape_len: a.fit.grid, ..base })
        }
    };
    Ok(ExperimentConfig {
        design,
        n_obs: a.n_obs.clone(),
        nu0: a.nu0.clone(),
        replicates: a.replicates,
        seed: a.fit.seed,
        bins: a.fit.bins,
    })
}

fn rmse(a: ExperimentArgs, relative: bool) -> Result<()> {
    let cfg = experiment_config(&a)?;
    let report = if relative { relative_rmse_experiment(&cfg, Competitor::Baseline)? } else { rmse_experiment(&cfg)? };
    let mut out = sink(&a.out.output)?;
    write_report_csv(&mut out, &[report])?;
    out.flush()?;
    Ok(())
}

fn rate(a: RateArgs) -> Result<()> {
    let cfg = RateConfig { n: a.n, n_obs: a.n_obs, nu0: a.nu0, replicates: a.replicates, seed: a.seed, ..Default::default() };
    let report = rate_check(&cfg)?;
    if report.bias_only {
        eprintln!("nu0 = 0: errors are pure bin bias");
    }
    eprintln!(
        "recovery slope {:.4} +/- {:.4}, size slope {:.4} +/- {:.4}",
        report.recovery.slope, report.recovery.slope_ci, report.size.slope, report.size.slope_ci
    );
    let mut out = sink(&a.out.output)?;
    write_rate_csv(&mut out, &report, a.size)?;
    out.flush()?;
    Ok(())
}

fn compare(a: CompareArgs) -> Result<()> {
    let base = match a.design {
        Design::Global => RegressionSimConfig::global_design(),
        Design::Local => RegressionSimConfig::local_design(),
    };
    let mut cfg = match &a.config {
        Some(p) => RegressionSimConfig::from_kv_over(base, &std::fs::read_to_string(p)?)?,
        None => base,
    };
    cfg.seed = a.fit.seed;
    cfg.shape_len = a.fit.grid;
    let mode = if a.local {
        ComparisonMode::Local { family: a.kernel.into(), bandwidth: a.bandwidth }
    } else {
        ComparisonMode::Global
    };
    let report = regression_comparison(&cfg, a.fit.constraint.into(), &a.x_grid.0, mode, a.fit.bins)?;
    eprintln!("mean shape distance {:.5}, mean size error {:.5}", report.mean_shape_distance(), report.mean_size_error());
    let mut out = sink(&a.out.output)?;
    write_regression_csv(&mut out, &report)?;
    out.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::Decompose(a) => decompose(a),
        Command::Mean(a) => mean(a),
        Command::Regress(a) => regress(a),
        Command::Rmse(a) => rmse(a, false),
        Command::RelativeRmse(a) => rmse(a, true),
        Command::RateCheck(a) => rate(a),
        Command::RegressCompare(a) => compare(a),
    }
}
