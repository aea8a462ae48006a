//! Seeded generators for positive, monotone and regression simulation
//! designs.
//!
//! Every subject draws from its own ChaCha8 stream (seed fixed, stream =
//! subject index), so datasets do not depend on how generation is scheduled.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::decomp::{RANGE_FLOOR, SIZE_FLOOR};
use crate::domain::{uniform_abscissae, CdfGrid, DensityGrid, MonotoneDecomposition, PositiveDecomposition, QuantileGrid, TimeGrid};
use crate::error::{Error, Result};
use crate::io::{LongitudinalDataset, Subject};
use crate::recovery::RawObservations;
use crate::regress::CovariateMatrix;

/// Smallest admissible normalizing mass of a truncated normal.
const MIN_MASS: f64 = 1e-300;

fn std_normal() -> Normal {
    Normal::standard()
}

/// `N(mu, sigma^2)` truncated to `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedNormal {
    mu: f64,
    sigma: f64,
    lo: f64,
    hi: f64,
    cdf_lo: f64,
    mass: f64,
}

impl TruncatedNormal {
    pub fn new(mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(sigma > 0.0) || !mu.is_finite() || !sigma.is_finite() {
            return Err(Error::InvalidConfig(format!("truncated normal needs sigma > 0, got {sigma}")));
        }
        if !(hi > lo) {
            return Err(Error::InvalidConfig(format!("empty truncation interval [{lo}, {hi}]")));
        }
        let z = std_normal();
        let cdf_lo = z.cdf((lo - mu) / sigma);
        let mass = z.cdf((hi - mu) / sigma) - cdf_lo;
        if !(mass >= MIN_MASS) {
            return Err(Error::Underflow(format!("normalizer {mass:e} for mu = {mu}, sigma = {sigma}")));
        }
        Ok(Self { mu, sigma, lo, hi, cdf_lo, mass })
    }

    /// Truncated to the unit interval.
    pub fn unit(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(mu, sigma, 0.0, 1.0)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            return 0.0;
        }
        std_normal().pdf((x - self.mu) / self.sigma) / (self.sigma * self.mass)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        ((std_normal().cdf((x - self.mu) / self.sigma) - self.cdf_lo) / self.mass).clamp(0.0, 1.0)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.lo;
        }
        if p >= 1.0 {
            return self.hi;
        }
        let u = (self.cdf_lo + p * self.mass).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        (self.mu + self.sigma * std_normal().inverse_cdf(u)).clamp(self.lo, self.hi)
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

/// Density of `N(mu, sigma^2)` truncated to `[0, 1]` on the `m`-point shape grid.
pub fn truncnorm_density(mu: f64, sigma: f64, m: usize) -> Result<DensityGrid<f64>> {
    let tn = TruncatedNormal::unit(mu, sigma)?;
    DensityGrid::normalized(uniform_abscissae::<f64>(m).into_iter().map(|t| tn.pdf(t)).collect())
}

/// Distribution function of `N(mu, sigma^2)` truncated to `[0, 1]`.
pub fn truncnorm_cdf(mu: f64, sigma: f64, m: usize) -> Result<CdfGrid<f64>> {
    let tn = TruncatedNormal::unit(mu, sigma)?;
    CdfGrid::new(uniform_abscissae::<f64>(m).into_iter().map(|t| tn.cdf(t)).collect())
}

/// Quantile function of `N(mu, sigma^2)` truncated to `[0, 1]`.
pub fn truncnorm_quantile(mu: f64, sigma: f64, m: usize) -> Result<QuantileGrid<f64>> {
    let tn = TruncatedNormal::unit(mu, sigma)?;
    QuantileGrid::new(uniform_abscissae::<f64>(m).into_iter().map(|p| tn.quantile(p)).collect())
}

/// Quantile average `int Q_mu(p) dmu` over `mu ~ U(a_mu, b_mu)` of
/// unit-truncated normals with common `sigma` (composite Simpson, 400 panels).
pub fn population_quantile(a_mu: f64, b_mu: f64, sigma: f64, m: usize) -> Result<QuantileGrid<f64>> {
    if a_mu == b_mu {
        return truncnorm_quantile(a_mu, sigma, m);
    }
    let panels = 400;
    let h = (b_mu - a_mu) / panels as f64;
    let ps = uniform_abscissae::<f64>(m);
    let mut acc = vec![0.0; m];
    for k in 0..=panels {
        let w = if k == 0 || k == panels {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let tn = TruncatedNormal::unit(a_mu + k as f64 * h, sigma)?;
        for (a, &p) in acc.iter_mut().zip(&ps) {
            *a += w * tn.quantile(p);
        }
    }
    let scale = h / 3.0 / (b_mu - a_mu);
    let mut values: Vec<f64> = acc.into_iter().map(|a| (a * scale).clamp(0.0, 1.0)).collect();
    for i in 1..m {
        values[i] = values[i].max(values[i - 1]);
    }
    QuantileGrid::new(values)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `b` under master seed `master`.
pub fn replicate_seed(master: u64, b: u64) -> u64 {
    splitmix64(master ^ splitmix64(b))
}

/// Random stream of subject `i`.
pub fn subject_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    a + (b - a) * rng.random::<f64>()
}

fn subject_id(i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).max(1).to_string().len();
    format!("s{i:0width$}")
}

/// Observation design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridKind {
    /// Shared midpoint grid `t_j = (j - 1/2) / N`.
    #[default]
    Regular,
    /// Per-subject grid from normalized exponential spacings.
    Irregular,
}

impl FromStr for GridKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regular" => Ok(Self::Regular),
            "irregular" => Ok(Self::Irregular),
            _ => Err(Error::InvalidConfig(format!("unknown grid kind `{s}`"))),
        }
    }
}

impl std::fmt::Display for GridKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Regular => "regular",
            Self::Irregular => "irregular",
        })
    }
}

/// Positive or monotone data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataKind {
    Positive,
    Monotone,
}

impl FromStr for DataKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(Self::Positive),
            "monotone" => Ok(Self::Monotone),
            _ => Err(Error::InvalidConfig(format!("unknown kind `{s}`"))),
        }
    }
}

impl std::fmt::Display for DataKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Positive => "positive",
            Self::Monotone => "monotone",
        })
    }
}

fn observation_times<R: Rng + ?Sized>(rng: &mut R, kind: GridKind, big_n: usize, regular: &TimeGrid<f64>) -> Result<TimeGrid<f64>> {
    match kind {
        GridKind::Regular => Ok(regular.clone()),
        GridKind::Irregular => {
            let mut cum = Vec::with_capacity(big_n + 1);
            let mut s = 0.0;
            for _ in 0..=big_n {
                let e: f64 = rng.sample(Exp1);
                s += e;
                cum.push(s);
            }
            let total = cum[big_n];
            TimeGrid::new(cum[..big_n].iter().map(|c| c / total).collect())
        }
    }
}

fn noisy<R: Rng + ?Sized>(rng: &mut R, truth: impl Iterator<Item = f64>, nu0: f64) -> Vec<f64> {
    truth
        .map(|y| {
            let e: f64 = rng.sample(StandardNormal);
            y + nu0 * e
        })
        .collect()
}

// key=value parsing shared by the configs

fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key=value", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn set<T: FromStr>(slot: &mut T, key: &str, value: &str) -> Result<()> {
    *slot = value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad value `{value}` for `{key}`")))?;
    Ok(())
}

fn unknown(key: &str) -> Error {
    Error::InvalidConfig(format!("unknown key `{key}`"))
}

/// Positive design: `Y_i = tau_i f_i`, `tau_i ~ U(a_tau, b_tau)`, `f_i` the
/// density of `N(mu_i, sigma^2)` truncated to `[0, 1]`, `mu_i ~ U(a_mu, b_mu)`,
/// observed with `N(0, nu0^2)` noise.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveSimConfig {
    pub n: usize,
    pub n_obs: usize,
    pub a_tau: f64,
    pub b_tau: f64,
    pub a_mu: f64,
    pub b_mu: f64,
    pub sigma: f64,
    pub nu0: f64,
    pub seed: u64,
    pub grid: GridKind,
    pub shape_len: usize,
}

impl Default for PositiveSimConfig {
    fn default() -> Self {
        Self {
            n: 500,
            n_obs: 100,
            a_tau: 0.0,
            b_tau: 2.0,
            a_mu: 0.0,
            b_mu: 1.0,
            sigma: 1.0,
            nu0: 0.1,
            seed: 1,
            grid: GridKind::Regular,
            shape_len: crate::DEFAULT_SHAPE_LEN,
        }
    }
}

impl PositiveSimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n_obs < 2 || self.shape_len < 2 {
            return Err(Error::InvalidConfig("n, n_obs and shape_len must be at least 2".into()));
        }
        if !(self.b_tau > self.a_tau && self.a_tau >= 0.0) {
            return Err(Error::InvalidConfig("need b_tau > a_tau >= 0".into()));
        }
        if !(self.b_mu >= self.a_mu) || !(self.sigma > 0.0) || !(self.nu0 >= 0.0) {
            return Err(Error::InvalidConfig("need b_mu >= a_mu, sigma > 0, nu0 >= 0".into()));
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (k, v) in parse_kv(text)? {
            match k.as_str() {
                "n" => set(&mut c.n, &k, &v)?,
                "n_obs" | "N" => set(&mut c.n_obs, &k, &v)?,
                "a_tau" => set(&mut c.a_tau, &k, &v)?,
                "b_tau" => set(&mut c.b_tau, &k, &v)?,
                "a_mu" => set(&mut c.a_mu, &k, &v)?,
                "b_mu" => set(&mut c.b_mu, &k, &v)?,
                "sigma" => set(&mut c.sigma, &k, &v)?,
                "nu0" => set(&mut c.nu0, &k, &v)?,
                "seed" => set(&mut c.seed, &k, &v)?,
                "grid" => set(&mut c.grid, &k, &v)?,
                "shape_len" => set(&mut c.shape_len, &k, &v)?,
                _ => return Err(unknown(&k)),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "n={}\nn_obs={}\na_tau={}\nb_tau={}\na_mu={}\nb_mu={}\nsigma={}\nnu0={}\nseed={}\ngrid={}\nshape_len={}\n",
            self.n, self.n_obs, self.a_tau, self.b_tau, self.a_mu, self.b_mu, self.sigma, self.nu0, self.seed, self.grid, self.shape_len
        );
        s
    }
}

/// Monotone design: `Y_i = lambda_i + rho_i F_i` with `F_i` a truncated-normal
/// distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSimConfig {
    pub n: usize,
    pub n_obs: usize,
    pub a_rho: f64,
    pub b_rho: f64,
    pub a_lambda: f64,
    pub b_lambda: f64,
    pub a_mu: f64,
    pub b_mu: f64,
    pub sigma: f64,
    pub nu0: f64,
    pub seed: u64,
    pub grid: GridKind,
    pub shape_len: usize,
}

impl Default for MonotoneSimConfig {
    fn default() -> Self {
        Self {
            n: 500,
            n_obs: 100,
            a_rho: 0.0,
            b_rho: 4.0,
            a_lambda: -2.0,
            b_lambda: 2.0,
            a_mu: 0.0,
            b_mu: 1.0,
            sigma: 1.0,
            nu0: 0.1,
            seed: 1,
            grid: GridKind::Regular,
            shape_len: crate::DEFAULT_SHAPE_LEN,
        }
    }
}

impl MonotoneSimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n_obs < 2 || self.shape_len < 2 {
            return Err(Error::InvalidConfig("n, n_obs and shape_len must be at least 2".into()));
        }
        if !(self.b_rho > self.a_rho && self.a_rho >= 0.0) {
            return Err(Error::InvalidConfig("need b_rho > a_rho >= 0".into()));
        }
        if !(self.b_lambda >= self.a_lambda) || !(self.b_mu >= self.a_mu) {
            return Err(Error::InvalidConfig("need b_lambda >= a_lambda and b_mu >= a_mu".into()));
        }
        if !(self.sigma > 0.0) || !(self.nu0 >= 0.0) {
            return Err(Error::InvalidConfig("need sigma > 0 and nu0 >= 0".into()));
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (k, v) in parse_kv(text)? {
            match k.as_str() {
                "n" => set(&mut c.n, &k, &v)?,
                "n_obs" | "N" => set(&mut c.n_obs, &k, &v)?,
                "a_rho" => set(&mut c.a_rho, &k, &v)?,
                "b_rho" => set(&mut c.b_rho, &k, &v)?,
                "a_lambda" => set(&mut c.a_lambda, &k, &v)?,
                "b_lambda" => set(&mut c.b_lambda, &k, &v)?,
                "a_mu" => set(&mut c.a_mu, &k, &v)?,
                "b_mu" => set(&mut c.b_mu, &k, &v)?,
                "sigma" => set(&mut c.sigma, &k, &v)?,
                "nu0" => set(&mut c.nu0, &k, &v)?,
                "seed" => set(&mut c.seed, &k, &v)?,
                "grid" => set(&mut c.grid, &k, &v)?,
                "shape_len" => set(&mut c.shape_len, &k, &v)?,
                _ => return Err(unknown(&k)),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "n={}\nn_obs={}\na_rho={}\nb_rho={}\na_lambda={}\nb_lambda={}\na_mu={}\nb_mu={}\nsigma={}\nnu0={}\nseed={}\ngrid={}\nshape_len={}\n",
            self.n,
            self.n_obs,
            self.a_rho,
            self.b_rho,
            self.a_lambda,
            self.b_lambda,
            self.a_mu,
            self.b_mu,
            self.sigma,
            self.nu0,
            self.seed,
            self.grid,
            self.shape_len
        );
        s
    }
}

/// Generates a positive dataset and the true decomposition of every subject.
pub fn generate_positive(cfg: &PositiveSimConfig) -> Result<(LongitudinalDataset, Vec<PositiveDecomposition<f64>>)> {
    cfg.validate()?;
    let regular = TimeGrid::midpoints(cfg.n_obs)?;
    let rows: Vec<(Subject, PositiveDecomposition<f64>)> = (0..cfg.n)
        .into_par_iter()
        .map(|i| {
            let mut rng = subject_rng(cfg.seed, i);
            let tau = uniform(&mut rng, cfg.a_tau, cfg.b_tau).max(SIZE_FLOOR);
            let mu = uniform(&mut rng, cfg.a_mu, cfg.b_mu);
            let tn = TruncatedNormal::unit(mu, cfg.sigma)?;
            let times = observation_times(&mut rng, cfg.grid, cfg.n_obs, &regular)?;
            let z = noisy(&mut rng, times.points().iter().map(|&t| tau * tn.pdf(t)), cfg.nu0);
            let truth = PositiveDecomposition::new(tau, truncnorm_density(mu, cfg.sigma, cfg.shape_len)?)?;
            Ok((Subject { id: subject_id(i, cfg.n), obs: RawObservations::new(times, z)? }, truth))
        })
        .collect::<Result<_>>()?;
    let (subjects, truth) = rows.into_iter().unzip();
    Ok((LongitudinalDataset::new(subjects)?, truth))
}

/// Generates a monotone dataset and the true decomposition of every subject.
pub fn generate_monotone(cfg: &MonotoneSimConfig) -> Result<(LongitudinalDataset, Vec<MonotoneDecomposition<f64>>)> {
    cfg.validate()?;
    let regular = TimeGrid::midpoints(cfg.n_obs)?;
    let rows: Vec<(Subject, MonotoneDecomposition<f64>)> = (0..cfg.n)
        .into_par_iter()
        .map(|i| {
            let mut rng = subject_rng(cfg.seed, i);
            let rho = uniform(&mut rng, cfg.a_rho, cfg.b_rho).max(RANGE_FLOOR);
            let lambda = uniform(&mut rng, cfg.a_lambda, cfg.b_lambda);
            let mu = uniform(&mut rng, cfg.a_mu, cfg.b_mu);
            let tn = TruncatedNormal::unit(mu, cfg.sigma)?;
            let times = observation_times(&mut rng, cfg.grid, cfg.n_obs, &regular)?;
            let z = noisy(&mut rng, times.points().iter().map(|&t| lambda + rho * tn.cdf(t)), cfg.nu0);
            let truth = MonotoneDecomposition::new(rho, lambda, truncnorm_cdf(mu, cfg.sigma, cfg.shape_len)?)?;
            Ok((Subject { id: subject_id(i, cfg.n), obs: RawObservations::new(times, z)? }, truth))
        })
        .collect::<Result<_>>()?;
    let (subjects, truth) = rows.into_iter().unzip();
    Ok((LongitudinalDataset::new(subjects)?, truth))
}

/// Law of the scalar covariate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovariateLaw {
    Uniform,
    TruncNormal,
}

impl FromStr for CovariateLaw {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "truncnormal" => Ok(Self::TruncNormal),
            _ => Err(Error::InvalidConfig(format!("unknown covariate law `{s}`"))),
        }
    }
}

impl std::fmt::Display for CovariateLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::TruncNormal => "truncnormal",
        })
    }
}

/// Regression design with scalar covariate `X`. The shape is a unit-truncated
/// normal with mean `a1 + b1 x + c1 x^2 + e1` and sd `a2 + b2 x + c2 x^2 + e2`;
/// sizes are `tau = b3 x + e3` (positive) or `lambda = b3 x + e3`,
/// `rho = b4 x + e4` (monotone). `e1` is `N(0, sigma0^2)` truncated to
/// `[l1, u1]`; `e2`, `e3`, `e4` are truncated to `[l2, u2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSimConfig {
    pub n: usize,
    pub n_obs: usize,
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    pub b3: f64,
    pub b4: f64,
    pub sigma0: f64,
    pub l1: f64,
    pub u1: f64,
    pub l2: f64,
    pub u2: f64,
    pub x_law: CovariateLaw,
    pub x_mu: f64,
    pub x_sd: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub nu0: f64,
    pub seed: u64,
    pub grid: GridKind,
    pub shape_len: usize,
}

impl Default for RegressionSimConfig {
    fn default() -> Self {
        Self::global_design()
    }
}

impl RegressionSimConfig {
    /// Linear design with `X ~ U(0, 2)`.
    pub fn global_design() -> Self {
        Self {
            n: 500,
            n_obs: 500,
            a1: 0.1,
            b1: 0.3,
            c1: 0.0,
            a2: 0.1,
            b2: 0.1,
            c2: 0.0,
            b3: 0.5,
            b4: 0.25,
            sigma0: 0.5,
            l1: -0.1,
            u1: 0.1,
            l2: -0.01,
            u2: 0.01,
            x_law: CovariateLaw::Uniform,
            x_mu: 1.0,
            x_sd: 0.5,
            x_lo: 0.0,
            x_hi: 2.0,
            nu0: 0.1,
            seed: 1,
            grid: GridKind::Regular,
            shape_len: crate::DEFAULT_SHAPE_LEN,
        }
    }

    /// Quadratic design with `X ~ N(1, 0.5^2)` truncated to `[0, 2]`.
    pub fn local_design() -> Self {
        Self { c1: 0.05, c2: 0.01, x_law: CovariateLaw::TruncNormal, ..Self::global_design() }
    }

    pub fn mean_at(&self, x: f64) -> f64 {
        self.a1 + self.b1 * x + self.c1 * x * x
    }

    pub fn sd_at(&self, x: f64) -> f64 {
        self.a2 + self.b2 * x + self.c2 * x * x
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n_obs < 2 || self.shape_len < 2 {
            return Err(Error::InvalidConfig("n, n_obs and shape_len must be at least 2".into()));
        }
        if !(self.x_hi > self.x_lo) || !(self.u1 >= self.l1) || !(self.u2 >= self.l2) {
            return Err(Error::InvalidConfig("empty covariate or noise support".into()));
        }
        if !(self.sigma0 >= 0.0) || !(self.nu0 >= 0.0) {
            return Err(Error::InvalidConfig("need sigma0 >= 0 and nu0 >= 0".into()));
        }
        if self.x_law == CovariateLaw::TruncNormal && !(self.x_sd > 0.0) {
            return Err(Error::InvalidConfig("need x_sd > 0".into()));
        }
        // the quadratic sd is smallest at an endpoint or at its vertex
        let mut probes = vec![self.x_lo, self.x_hi];
        if self.c2 != 0.0 {
            let v = -self.b2 / (2.0 * self.c2);
            if v > self.x_lo && v < self.x_hi {
                probes.push(v);
            }
        }
        let low = self.l2.min(0.0);
        if let Some(x) = probes.into_iter().find(|&x| !(self.sd_at(x) + low > 0.0)) {
            return Err(Error::InvalidConfig(format!("shape sd is not positive at x = {x}")));
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        Self::from_kv_over(Self::global_design(), text)
    }

    /// Applies `key=value` lines on top of `base`.
    pub fn from_kv_over(base: Self, text: &str) -> Result<Self> {
        let mut c = base;
        for (k, v) in parse_kv(text)? {
            let slot: &mut f64 = match k.as_str() {
                "n" => {
                    set(&mut c.n, &k, &v)?;
                    continue;
                }
                "n_obs" | "N" => {
                    set(&mut c.n_obs, &k, &v)?;
                    continue;
                }
                "seed" => {
                    set(&mut c.seed, &k, &v)?;
                    continue;
                }
                "grid" => {
                    set(&mut c.grid, &k, &v)?;
                    continue;
                }
                "shape_len" => {
                    set(&mut c.shape_len, &k, &v)?;
                    continue;
                }
                "x_law" => {
                    set(&mut c.x_law, &k, &v)?;
                    continue;
                }
                "a1" => &mut c.a1,
                "b1" => &mut c.b1,
                "c1" => &mut c.c1,
                "a2" => &mut c.a2,
                "b2" => &mut c.b2,
                "c2" => &mut c.c2,
                "b3" => &mut c.b3,
                "b4" => &mut c.b4,
                "sigma0" => &mut c.sigma0,
                "l1" => &mut c.l1,
                "u1" => &mut c.u1,
                "l2" => &mut c.l2,
                "u2" => &mut c.u2,
                "x_mu" => &mut c.x_mu,
                "x_sd" => &mut c.x_sd,
                "x_lo" => &mut c.x_lo,
                "x_hi" => &mut c.x_hi,
                "nu0" => &mut c.nu0,
                _ => return Err(unknown(&k)),
            };
            set(slot, &k, &v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n={}\nn_obs={}", self.n, self.n_obs);
        for (k, v) in [
            ("a1", self.a1),
            ("b1", self.b1),
            ("c1", self.c1),
            ("a2", self.a2),
            ("b2", self.b2),
            ("c2", self.c2),
            ("b3", self.b3),
            ("b4", self.b4),
            ("sigma0", self.sigma0),
            ("l1", self.l1),
            ("u1", self.u1),
            ("l2", self.l2),
            ("u2", self.u2),
        ] {
            let _ = writeln!(s, "{k}={v}");
        }
        let _ = writeln!(s, "x_law={}", self.x_law);
        for (k, v) in [("x_mu", self.x_mu), ("x_sd", self.x_sd), ("x_lo", self.x_lo), ("x_hi", self.x_hi), ("nu0", self.nu0)] {
            let _ = writeln!(s, "{k}={v}");
        }
        let _ = write!(s, "seed={}\ngrid={}\nshape_len={}\n", self.seed, self.grid, self.shape_len);
        s
    }

    fn noise(&self, lo: f64, hi: f64) -> Result<Option<TruncatedNormal>> {
        if self.sigma0 == 0.0 || lo == hi {
            return Ok(None);
        }
        TruncatedNormal::new(0.0, self.sigma0, lo, hi).map(Some)
    }
}

/// Noise-free conditional components of a regression design.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionOracle {
    cfg: RegressionSimConfig,
}

impl RegressionOracle {
    pub fn new(cfg: RegressionSimConfig) -> Self {
        Self { cfg }
    }

    pub fn size(&self, x: f64) -> f64 {
        self.cfg.b3 * x
    }

    pub fn range(&self, x: f64) -> f64 {
        self.cfg.b4 * x
    }

    pub fn minimum(&self, x: f64) -> f64 {
        self.cfg.b3 * x
    }

    pub fn quantile(&self, x: f64, m: usize) -> Result<QuantileGrid<f64>> {
        truncnorm_quantile(self.cfg.mean_at(x), self.cfg.sd_at(x), m)
    }

    pub fn positive(&self, x: f64, m: usize) -> Result<PositiveDecomposition<f64>> {
        PositiveDecomposition::new(self.size(x), truncnorm_density(self.cfg.mean_at(x), self.cfg.sd_at(x), m)?)
    }

    pub fn monotone(&self, x: f64, m: usize) -> Result<MonotoneDecomposition<f64>> {
        MonotoneDecomposition::new(self.range(x), self.minimum(x), truncnorm_cdf(self.cfg.mean_at(x), self.cfg.sd_at(x), m)?)
    }
}

/// True subject components of a regression dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum RegressionTruth {
    Positive(Vec<PositiveDecomposition<f64>>),
    Monotone(Vec<MonotoneDecomposition<f64>>),
}

/// Generates a dataset with covariates, the true subject components and the
/// oracle. Sizes and ranges pushed to or below zero by the noise are floored.
pub fn generate_regression(
    cfg: &RegressionSimConfig,
    kind: DataKind,
) -> Result<(LongitudinalDataset, RegressionTruth, RegressionOracle)> {
    cfg.validate()?;
    let regular = TimeGrid::midpoints(cfg.n_obs)?;
    let x_law = match cfg.x_law {
        CovariateLaw::Uniform => None,
        CovariateLaw::TruncNormal => Some(TruncatedNormal::new(cfg.x_mu, cfg.x_sd, cfg.x_lo, cfg.x_hi)?),
    };
    let e1 = cfg.noise(cfg.l1, cfg.u1)?;
    let e2 = cfg.noise(cfg.l2, cfg.u2)?;
    let draw = |rng: &mut ChaCha8Rng, law: &Option<TruncatedNormal>| law.as_ref().map_or(0.0, |tn| tn.sample(rng));
    enum Truth {
        Positive(PositiveDecomposition<f64>),
        Monotone(MonotoneDecomposition<f64>),
    }
    let rows: Vec<(Subject, f64, Truth)> = (0..cfg.n)
        .into_par_iter()
        .map(|i| {
            let mut rng = subject_rng(cfg.seed, i);
            let x = match &x_law {
                None => uniform(&mut rng, cfg.x_lo, cfg.x_hi),
                Some(tn) => tn.sample(&mut rng),
            };
            let mu = cfg.mean_at(x) + draw(&mut rng, &e1);
            let sd = cfg.sd_at(x) + draw(&mut rng, &e2);
            let n3 = draw(&mut rng, &e2);
            let n4 = draw(&mut rng, &e2);
            let tn = TruncatedNormal::unit(mu, sd)?;
            let times = observation_times(&mut rng, cfg.grid, cfg.n_obs, &regular)?;
            let (z, truth) = match kind {
                DataKind::Positive => {
                    let tau = (cfg.b3 * x + n3).max(SIZE_FLOOR);
                    let z = noisy(&mut rng, times.points().iter().map(|&t| tau * tn.pdf(t)), cfg.nu0);
                    (z, Truth::Positive(PositiveDecomposition::new(tau, truncnorm_density(mu, sd, cfg.shape_len)?)?))
                }
                DataKind::Monotone => {
                    let lambda = cfg.b3 * x + n3;
                    let rho = (cfg.b4 * x + n4).max(RANGE_FLOOR);
                    let z = noisy(&mut rng, times.points().iter().map(|&t| lambda + rho * tn.cdf(t)), cfg.nu0);
                    let shape = truncnorm_cdf(mu, sd, cfg.shape_len)?;
                    (z, Truth::Monotone(MonotoneDecomposition::new(rho, lambda, shape)?))
                }
            };
            Ok((Subject { id: subject_id(i, cfg.n), obs: RawObservations::new(times, z)? }, x, truth))
        })
        .collect::<Result<_>>()?;
    let mut subjects = Vec::with_capacity(cfg.n);
    let mut xs = Vec::with_capacity(cfg.n);
    let mut pos = Vec::new();
    let mut mono = Vec::new();
    for (s, x, t) in rows {
        subjects.push(s);
        xs.push(x);
        match t {
            Truth::Positive(d) => pos.push(d),
            Truth::Monotone(d) => mono.push(d),
        }
    }
    let truth = match kind {
        DataKind::Positive => RegressionTruth::Positive(pos),
        DataKind::Monotone => RegressionTruth::Monotone(mono),
    };
    let ds = LongitudinalDataset::new(subjects)?.with_covariates(CovariateMatrix::from_column(xs)?)?;
    Ok((ds, truth, RegressionOracle::new(cfg.clone())))
}

pub fn load_positive_config(path: impl AsRef<Path>) -> Result<PositiveSimConfig> {
    PositiveSimConfig::from_kv(&std::fs::read_to_string(path)?)
}

pub fn load_monotone_config(path: impl AsRef<Path>) -> Result<MonotoneSimConfig> {
    MonotoneSimConfig::from_kv(&std::fs::read_to_string(path)?)
}

pub fn load_regression_config(path: impl AsRef<Path>) -> Result<RegressionSimConfig> {
    RegressionSimConfig::from_kv(&std::fs::read_to_string(path)?)
}
