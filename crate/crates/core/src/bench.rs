//! Monte-Carlo harness: RMSE tables, relative RMSE against the
//! transformation baseline, empirical recovery rates and regression oracle
//! comparisons.
//!
//! Replicate `b` always runs on seed `replicate_seed(master, b)`, whatever
//! the cell, so cells share common random numbers. Replicates run in
//! parallel; their results are stored by index and reduced sequentially,
//! which keeps every report bit-identical across thread counts.

use std::io::Write;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::baseline::{baseline_mean_monotone, baseline_mean_positive};
use crate::decomp::{
    decompose_monotone_estimated, decompose_positive_floored, frechet_mean_monotone, frechet_mean_positive,
    monotone_from_parts, positive_from_parts, recompose_monotone, recompose_positive, SizeEstimator,
};
use crate::domain::{MetricWeights, MonotoneDecomposition, PositiveDecomposition, TimeGrid};
use crate::error::{Error, Result};
use crate::io::LongitudinalDataset;
use crate::metric::{metric_monotone, metric_positive};
use crate::quantile::{l2_distance_uniform, quantile_from_cdf, quantile_from_density, wasserstein};
use crate::recovery::{default_bin_width, default_bin_width_irregular, recover_steps, BinSpec, RawObservations};
use crate::regress::{default_bandwidth, KernelFamily, KernelSpec, MonotoneRegressor, PositiveRegressor, RegressionMode};
use crate::simgen::{
    generate_monotone, generate_positive, generate_regression, population_quantile, replicate_seed, subject_rng,
    DataKind, GridKind, MonotoneSimConfig, PositiveSimConfig, RegressionSimConfig,
};

/// Bin-width choice for the step estimator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BinRule {
    /// Data-driven default width.
    #[default]
    Auto,
    Width(f64),
}

impl BinRule {
    pub fn resolve(&self, ds: &LongitudinalDataset) -> Result<BinSpec<f64>> {
        match *self {
            BinRule::Width(w) => BinSpec::new(w),
            BinRule::Auto => {
                if ds.shares_grid() {
                    BinSpec::new(default_bin_width(ds.len(), ds.min_obs()))
                } else {
                    BinSpec::new(default_bin_width_irregular(ds.len(), ds.max_spacing()))
                }
            }
        }
    }
}

/// Base generator settings; `n_obs`, `nu0` and `seed` are set per cell and
/// replicate.
#[derive(Debug, Clone, PartialEq)]
pub enum SimDesign {
    Positive(PositiveSimConfig),
    Monotone(MonotoneSimConfig),
}

impl SimDesign {
    pub fn kind(&self) -> DataKind {
        match self {
            SimDesign::Positive(_) => DataKind::Positive,
            SimDesign::Monotone(_) => DataKind::Monotone,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            SimDesign::Positive(c) => c.n,
            SimDesign::Monotone(c) => c.n,
        }
    }

    fn shape_len(&self) -> usize {
        match self {
            SimDesign::Positive(c) => c.shape_len,
            SimDesign::Monotone(c) => c.shape_len,
        }
    }
}

/// A grid of `(N, nu0)` cells, each run for `replicates` replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub design: SimDesign,
    pub n_obs: Vec<usize>,
    pub nu0: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub bins: BinRule,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::InvalidConfig("need at least 2 replicates".into()));
        }
        if self.n_obs.is_empty() || self.nu0.is_empty() {
            return Err(Error::InvalidConfig("empty N or nu0 list".into()));
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(usize, f64)> {
        self.n_obs.iter().flat_map(|&n| self.nu0.iter().map(move |&v| (n, v))).collect()
    }
}

fn size_rule(grid: GridKind) -> SizeEstimator {
    match grid {
        GridKind::Regular => SizeEstimator::RawMean,
        GridKind::Irregular => SizeEstimator::StepIntegral,
    }
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Self { mean, sd: var.sqrt() }
    }
}

/// One row of a bench table.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMetric {
    pub n_obs: usize,
    pub nu0: f64,
    pub metric: String,
    /// `None` when no replicate produced a value.
    pub summary: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseReport {
    pub kind: DataKind,
    pub replicates: usize,
    pub seed: u64,
    pub rows: Vec<CellMetric>,
}

impl RmseReport {
    pub fn get(&self, n_obs: usize, nu0: f64, metric: &str) -> Option<Summary> {
        self.rows
            .iter()
            .find(|r| r.n_obs == n_obs && r.nu0 == nu0 && r.metric == metric)
            .and_then(|r| r.summary)
    }
}

/// Per-subject decomposition estimates for one simulated dataset.
fn estimate_positive(ds: &LongitudinalDataset, bins: &BinSpec<f64>, m: usize, rule: SizeEstimator) -> Result<Vec<PositiveDecomposition<f64>>> {
    ds.subjects()
        .par_iter()
        .map(|s| decompose_positive_floored(&s.obs, bins, m, rule).map(|e| e.decomposition))
        .collect()
}

fn estimate_monotone(ds: &LongitudinalDataset, bins: &BinSpec<f64>, m: usize) -> Result<Vec<MonotoneDecomposition<f64>>> {
    ds.subjects()
        .par_iter()
        .map(|s| decompose_monotone_estimated(&s.obs, bins, m).map(|e| e.decomposition))
        .collect()
}

fn rms(xs: &[f64]) -> f64 {
    (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt()
}

fn metric_names(kind: DataKind) -> [&'static str; 3] {
    match kind {
        DataKind::Positive => ["rmse_Y", "rmse_tau", "rmse_f"],
        DataKind::Monotone => ["rmse_Y", "rmse_xi", "rmse_F"],
    }
}

/// `[RMSE_Y, RMSE_size, RMSE_shape]` of one replicate.
fn rmse_replicate(design: &SimDesign, n_obs: usize, nu0: f64, seed: u64, bins: BinRule) -> Result<[f64; 3]> {
    let m = design.shape_len();
    let w = MetricWeights::default();
    let (d, s, f): (Vec<f64>, Vec<f64>, Vec<f64>) = match design {
        SimDesign::Positive(base) => {
            let cfg = PositiveSimConfig { n_obs, nu0, seed, ..base.clone() };
            let (ds, truth) = generate_positive(&cfg)?;
            let est = estimate_positive(&ds, &bins.resolve(&ds)?, m, size_rule(cfg.grid))?;
            let rows: Vec<(f64, f64, f64)> = truth
                .par_iter()
                .zip(&est)
                .map(|(a, b)| {
                    let dw = wasserstein(&quantile_from_density(a.shape())?, &quantile_from_density(b.shape())?)?;
                    Ok((metric_positive(a, b, w)?, (a.size() - b.size()).abs(), dw))
                })
                .collect::<Result<_>>()?;
            unzip3(rows)
        }
        SimDesign::Monotone(base) => {
            let cfg = MonotoneSimConfig { n_obs, nu0, seed, ..base.clone() };
            let (ds, truth) = generate_monotone(&cfg)?;
            let est = estimate_monotone(&ds, &bins.resolve(&ds)?, m)?;
            let rows: Vec<(f64, f64, f64)> = truth
                .par_iter()
                .zip(&est)
                .map(|(a, b)| {
                    let dw = wasserstein(&quantile_from_cdf(a.shape())?, &quantile_from_cdf(b.shape())?)?;
                    let dxi = (a.range() - b.range()).hypot(a.minimum() - b.minimum());
                    Ok((metric_monotone(a, b, w)?, dxi, dw))
                })
                .collect::<Result<_>>()?;
            unzip3(rows)
        }
    };
    Ok([rms(&d), rms(&s), rms(&f)])
}

fn unzip3(rows: Vec<(f64, f64, f64)>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut a = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    let mut c = Vec::with_capacity(rows.len());
    for (x, y, z) in rows {
        a.push(x);
        b.push(y);
        c.push(z);
    }
    (a, b, c)
}

/// Mean and SD over replicates of the trajectory, size and shape RMSEs for
/// every `(N, nu0)` cell.
pub fn rmse_experiment(cfg: &ExperimentConfig) -> Result<RmseReport> {
    cfg.validate()?;
    let kind = cfg.design.kind();
    let names = metric_names(kind);
    let mut rows = Vec::new();
    for (n_obs, nu0) in cfg.cells() {
        let reps: Vec<[f64; 3]> = (0..cfg.replicates)
            .into_par_iter()
            .map(|b| rmse_replicate(&cfg.design, n_obs, nu0, replicate_seed(cfg.seed, b as u64), cfg.bins))
            .collect::<Result<_>>()?;
        for (k, name) in names.iter().enumerate() {
            let xs: Vec<f64> = reps.iter().map(|r| r[k]).collect();
            rows.push(CellMetric { n_obs, nu0, metric: name.to_string(), summary: Some(Summary::of(&xs)) });
        }
    }
    Ok(RmseReport { kind, replicates: cfg.replicates, seed: cfg.seed, rows })
}

/// Competitor in the relative-RMSE ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Competitor {
    /// Transformation-approach baseline.
    #[default]
    Baseline,
    /// The decomposition estimator itself; every ratio is 1.
    Decomposition,
}

/// Population mean trajectory of a design on the uniform `m`-point grid.
pub fn population_mean_trajectory(design: &SimDesign) -> Result<Vec<f64>> {
    let m = design.shape_len();
    match design {
        SimDesign::Positive(c) => {
            let q = population_quantile(c.a_mu, c.b_mu, c.sigma, m)?;
            Ok(positive_from_parts(0.5 * (c.a_tau + c.b_tau), q)?.trajectory.values().to_vec())
        }
        SimDesign::Monotone(c) => {
            let q = population_quantile(c.a_mu, c.b_mu, c.sigma, m)?;
            let mean = monotone_from_parts(0.5 * (c.a_rho + c.b_rho), 0.5 * (c.a_lambda + c.b_lambda), q)?;
            Ok(mean.trajectory.values().to_vec())
        }
    }
}

/// `(d(Y_mean, Yhat), d(Y_mean, competitor))` in L2 for one replicate.
fn relative_replicate(
    design: &SimDesign,
    n_obs: usize,
    nu0: f64,
    seed: u64,
    bins: BinRule,
    truth: &[f64],
    competitor: Competitor,
) -> Result<(f64, f64)> {
    let m = design.shape_len();
    let grid = TimeGrid::uniform(m)?;
    let (ours, theirs) = match design {
        SimDesign::Positive(base) => {
            let cfg = PositiveSimConfig { n_obs, nu0, seed, ..base.clone() };
            let (ds, _) = generate_positive(&cfg)?;
            let est = estimate_positive(&ds, &bins.resolve(&ds)?, m, size_rule(cfg.grid))?;
            let mean = frechet_mean_positive(&est)?.trajectory;
            let other = match competitor {
                Competitor::Decomposition => mean.clone(),
                Competitor::Baseline => {
                    let ys = est.iter().map(|d| recompose_positive(d, grid.clone())).collect::<Result<Vec<_>>>()?;
                    baseline_mean_positive(&ys)?
                }
            };
            (mean, other)
        }
        SimDesign::Monotone(base) => {
            let cfg = MonotoneSimConfig { n_obs, nu0, seed, ..base.clone() };
            let (ds, _) = generate_monotone(&cfg)?;
            let est = estimate_monotone(&ds, &bins.resolve(&ds)?, m)?;
            let mean = frechet_mean_monotone(&est)?.trajectory;
            let other = match competitor {
                Competitor::Decomposition => mean.clone(),
                Competitor::Baseline => {
                    let ys = est.iter().map(|d| recompose_monotone(d, grid.clone())).collect::<Result<Vec<_>>>()?;
                    baseline_mean_monotone(&ys)?
                }
            };
            (mean, other)
        }
    };
    Ok((l2_distance_uniform(truth, ours.values()), l2_distance_uniform(truth, theirs.values())))
}

/// Ratio `d(Y_mean, Yhat) / d(Y_mean, competitor)` per replicate, summarized
/// per cell as metrics `relative_rmse`, `error_decomposition` and
/// `error_baseline`. Replicates with a zero denominator are dropped from the
/// ratio; a cell without any ratio has no summary.
pub fn relative_rmse_experiment(cfg: &ExperimentConfig, competitor: Competitor) -> Result<RmseReport> {
    cfg.validate()?;
    let truth = population_mean_trajectory(&cfg.design)?;
    let mut rows = Vec::new();
    for (n_obs, nu0) in cfg.cells() {
        let reps: Vec<(f64, f64)> = (0..cfg.replicates)
            .into_par_iter()
            .map(|b| relative_replicate(&cfg.design, n_obs, nu0, replicate_seed(cfg.seed, b as u64), cfg.bins, &truth, competitor))
            .collect::<Result<_>>()?;
        let ratios: Vec<f64> = reps.iter().filter(|r| r.1 > 0.0).map(|r| r.0 / r.1).collect();
        let ours: Vec<f64> = reps.iter().map(|r| r.0).collect();
        let theirs: Vec<f64> = reps.iter().map(|r| r.1).collect();
        for (name, xs) in [("relative_rmse", ratios), ("error_decomposition", ours), ("error_baseline", theirs)] {
            let summary = (!xs.is_empty()).then(|| Summary::of(&xs));
            rows.push(CellMetric { n_obs, nu0, metric: name.to_string(), summary });
        }
    }
    Ok(RmseReport { kind: cfg.design.kind(), replicates: cfg.replicates, seed: cfg.seed, rows })
}

/// Settings for the empirical recovery-rate check.
#[derive(Debug, Clone)]
pub struct RateConfig {
    pub n: usize,
    pub n_obs: Vec<usize>,
    pub nu0: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Common latent trajectory of all subjects.
    pub truth: fn(f64) -> f64,
    /// `int_0^1 truth`.
    pub truth_integral: f64,
    /// Points of the grid on which the sup-error is taken.
    pub eval_len: usize,
}

fn sine_truth(t: f64) -> f64 {
    (2.0 * std::f64::consts::PI * t).sin() + 2.0
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            n: 50,
            n_obs: vec![100, 1_000, 10_000, 100_000],
            nu0: 0.1,
            replicates: 20,
            seed: 1,
            truth: sine_truth,
            truth_integral: 2.0,
            eval_len: 2001,
        }
    }
}

/// Ordinary least-squares fit `y = a + b x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% t-interval for the slope (NaN with 2 points).
    pub slope_ci: f64,
}

pub fn ols(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let k = xs.len();
    if k < 2 || ys.len() != k {
        return Err(Error::InsufficientData("need at least 2 points for a line fit".into()));
    }
    let kf = k as f64;
    let mx = xs.iter().sum::<f64>() / kf;
    let my = ys.iter().sum::<f64>() / kf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateDesign("abscissae are constant".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_ci = if k > 2 {
        let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        let se = (rss / (kf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, kf - 2.0)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .inverse_cdf(0.975);
        t * se
    } else {
        f64::NAN
    };
    Ok(LineFit { slope, intercept, slope_ci })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub n: usize,
    pub n_obs: Vec<usize>,
    /// Sup-error of the step estimator over subjects and grid, averaged over
    /// replicates.
    pub sup_error: Vec<f64>,
    /// RMS error of the raw-mean size estimator, averaged over replicates.
    pub size_error: Vec<f64>,
    /// Fit of `log sup_error` on `log(N / log n)`.
    pub recovery: LineFit,
    /// Fit of `log size_error` on `log N`.
    pub size: LineFit,
    pub nu0: f64,
    /// Set when `nu0 = 0`: errors are pure bin bias.
    pub bias_only: bool,
}

fn rate_replicate(cfg: &RateConfig, n_obs: usize, seed: u64, eval: &[f64]) -> Result<(f64, f64)> {
    let times = TimeGrid::midpoints(n_obs)?;
    let bins = BinSpec::new(default_bin_width(cfg.n, n_obs))?;
    let truth_eval: Vec<f64> = eval.iter().map(|&t| (cfg.truth)(t)).collect();
    let truth_obs: Vec<f64> = times.points().iter().map(|&t| (cfg.truth)(t)).collect();
    let rows: Vec<(f64, f64)> = (0..cfg.n)
        .into_par_iter()
        .map(|i| {
            let mut rng = subject_rng(seed, i);
            let z: Vec<f64> = truth_obs
                .iter()
                .map(|&y| {
                    let e: f64 = rand::Rng::sample(&mut rng, rand_distr::StandardNormal);
                    y + cfg.nu0 * e
                })
                .collect();
            let obs = RawObservations::new(times.clone(), z)?;
            let steps = recover_steps(&obs, &bins)?;
            let sup = eval
                .iter()
                .zip(&truth_eval)
                .map(|(&t, &y)| (steps.evaluate(t) - y).abs())
                .fold(0.0, f64::max);
            Ok((sup, obs.mean() - cfg.truth_integral))
        })
        .collect::<Result<_>>()?;
    let sup = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let size = rms(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    Ok((sup, size))
}

/// Sup-error of the step estimator and error of the size estimator across
/// `N`, with their log-log slopes.
pub fn rate_check(cfg: &RateConfig) -> Result<RateReport> {
    let mut ns = cfg.n_obs.clone();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 4 || (ns[ns.len() - 1] as f64) < 100.0 * ns[0] as f64 {
        return Err(Error::InvalidConfig("need at least 4 distinct N spanning 2 decades".into()));
    }
    if cfg.replicates < 1 || cfg.n < 2 {
        return Err(Error::InvalidConfig("need n >= 2 and at least one replicate".into()));
    }
    let eval = crate::domain::uniform_abscissae::<f64>(cfg.eval_len.max(2));
    let mut sup_error = Vec::with_capacity(ns.len());
    let mut size_error = Vec::with_capacity(ns.len());
    for &big_n in &ns {
        let reps: Vec<(f64, f64)> = (0..cfg.replicates)
            .into_par_iter()
            .map(|b| rate_replicate(cfg, big_n, replicate_seed(replicate_seed(cfg.seed, b as u64), big_n as u64), &eval))
            .collect::<Result<_>>()?;
        let r = reps.len() as f64;
        sup_error.push(reps.iter().map(|x| x.0).sum::<f64>() / r);
        size_error.push(reps.iter().map(|x| x.1).sum::<f64>() / r);
    }
    let log_n = (cfg.n as f64).ln();
    let xs: Vec<f64> = ns.iter().map(|&k| (k as f64 / log_n).ln()).collect();
    let recovery = ols(&xs, &sup_error.iter().map(|e| e.ln()).collect::<Vec<_>>())?;
    let size = if size_error.iter().all(|&e| e > 0.0) {
        ols(&ns.iter().map(|&k| (k as f64).ln()).collect::<Vec<_>>(), &size_error.iter().map(|e| e.ln()).collect::<Vec<_>>())?
    } else {
        LineFit { slope: f64::NAN, intercept: f64::NAN, slope_ci: f64::NAN }
    };
    Ok(RateReport { n: cfg.n, n_obs: ns, sup_error, size_error, recovery, size, nu0: cfg.nu0, bias_only: cfg.nu0 == 0.0 })
}

/// Fitting mode of the regression comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComparisonMode {
    Global,
    /// Local linear fit; the bandwidth defaults to the rule of thumb.
    Local { family: KernelFamily, bandwidth: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionRow {
    pub x: f64,
    pub shape_distance: f64,
    pub size_error: f64,
    pub trajectory_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionReport {
    pub kind: DataKind,
    pub rows: Vec<RegressionRow>,
    pub bandwidth: Option<f64>,
}

impl RegressionReport {
    pub fn mean_shape_distance(&self) -> f64 {
        self.rows.iter().map(|r| r.shape_distance).sum::<f64>() / self.rows.len() as f64
    }

    pub fn mean_size_error(&self) -> f64 {
        self.rows.iter().map(|r| r.size_error).sum::<f64>() / self.rows.len() as f64
    }
}

/// Fits the regression at each `x` and compares with the noise-free oracle.
pub fn regression_comparison(
    cfg: &RegressionSimConfig,
    kind: DataKind,
    x_grid: &[f64],
    mode: ComparisonMode,
    bins: BinRule,
) -> Result<RegressionReport> {
    if x_grid.iter().any(|&x| !(x > cfg.x_lo && x < cfg.x_hi)) {
        return Err(Error::InvalidConfig("x grid must lie inside the covariate support".into()));
    }
    let (ds, _, oracle) = generate_regression(cfg, kind)?;
    let design = ds.covariates().expect("generated with covariates");
    let (mode, bandwidth) = match mode {
        ComparisonMode::Global => (RegressionMode::Global, None),
        ComparisonMode::Local { family, bandwidth } => {
            let h = match bandwidth {
                Some(h) => h,
                None => default_bandwidth(design)?,
            };
            (RegressionMode::Local(KernelSpec::new(family, h)?), Some(h))
        }
    };
    let m = cfg.shape_len;
    let spec = bins.resolve(&ds)?;
    let w = MetricWeights::default();
    let rows = match kind {
        DataKind::Positive => {
            let est = estimate_positive(&ds, &spec, m, size_rule(cfg.grid))?;
            let reg = PositiveRegressor::new(&est, design)?;
            x_grid
                .par_iter()
                .map(|&x| {
                    let fit = reg.fit(&[x], &mode)?;
                    let truth = oracle.positive(x, m)?;
                    Ok(RegressionRow {
                        x,
                        shape_distance: wasserstein(&quantile_from_density(truth.shape())?, &fit.quantile)?,
                        size_error: (truth.size() - fit.decomposition.size()).abs(),
                        trajectory_distance: metric_positive(&truth, &fit.decomposition, w)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        DataKind::Monotone => {
            let est = estimate_monotone(&ds, &spec, m)?;
            let reg = MonotoneRegressor::new(&est, design)?;
            x_grid
                .par_iter()
                .map(|&x| {
                    let fit = reg.fit(&[x], &mode)?;
                    let truth = oracle.monotone(x, m)?;
                    let d = &fit.decomposition;
                    Ok(RegressionRow {
                        x,
                        shape_distance: wasserstein(&quantile_from_cdf(truth.shape())?, &fit.quantile)?,
                        size_error: (truth.range() - d.range()).hypot(truth.minimum() - d.minimum()),
                        trajectory_distance: metric_monotone(&truth, d, w)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(RegressionReport { kind, rows, bandwidth })
}

/// Writes `kind,N,nu0,metric,mean,sd,B,seed`; missing cells print `NA`.
pub fn write_report_csv<W: Write>(writer: W, reports: &[RmseReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["kind", "N", "nu0", "metric", "mean", "sd", "B", "seed"])?;
    for r in reports {
        for row in &r.rows {
            let (mean, sd) = match row.summary {
                Some(s) => (s.mean.to_string(), s.sd.to_string()),
                None => ("NA".to_string(), "NA".to_string()),
            };
            w.write_record([
                r.kind.to_string(),
                row.n_obs.to_string(),
                row.nu0.to_string(),
                row.metric.clone(),
                mean,
                sd,
                r.replicates.to_string(),
                r.seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `N,sup_error,slope` for the recovery fit; with `size = true`
/// writes `N,size_error,slope` for the size estimator instead.
pub fn write_rate_csv<W: Write>(writer: W, report: &RateReport, size: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let (label, errs, fit) = if size {
        ("size_error", &report.size_error, report.size)
    } else {
        ("sup_error", &report.sup_error, report.recovery)
    };
    w.write_record(["N", label, "slope"])?;
    for (n, e) in report.n_obs.iter().zip(errs) {
        w.write_record([n.to_string(), e.to_string(), fit.slope.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `x,shape_distance,size_error,trajectory_distance`.
pub fn write_regression_csv<W: Write>(writer: W, report: &RegressionReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "shape_distance", "size_error", "trajectory_distance"])?;
    for r in &report.rows {
        w.write_record([r.x.to_string(), r.shape_distance.to_string(), r.size_error.to_string(), r.trajectory_distance.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
