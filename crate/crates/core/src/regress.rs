//! Global and local Frechet regression of size and shape components on
//! Euclidean predictors.
//!
//! Both flavours reduce to weighted means: a size is regressed as
//! `max(floor, n^{-1} sum_i s_i tau_i)` and a shape as the projection of
//! `n^{-1} sum_i s_i Q_i` onto the quantile space, where the weights `s_i`
//! come from linear regression (global) or local linear smoothing (local).

use crate::decomp::{monotone_from_parts, positive_from_parts, MonotoneMean, PositiveMean, RANGE_FLOOR, SIZE_FLOOR};
use crate::domain::{MonotoneDecomposition, PositiveDecomposition, QuantileGrid};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::quantile::{quantile_barycenter, quantile_from_cdf, quantile_from_density};
use crate::scalar::Scalar;

/// Largest admissible condition number of the sample covariance.
pub const MAX_CONDITION: f64 = 1e12;

/// `n` predictor vectors of dimension `p`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateMatrix<T> {
    n: usize,
    p: usize,
    data: Vec<T>,
}

impl<T: Scalar> CovariateMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if p == 0 {
            return Err(Error::DegenerateDesign("no predictors".into()));
        }
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DegenerateDesign("rows of unequal length".into()));
        }
        if n <= p {
            return Err(Error::DegenerateDesign(format!("need n > p, got n = {n}, p = {p}")));
        }
        let data: Vec<T> = rows.into_iter().flatten().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateDesign("non-finite predictor".into()));
        }
        Ok(Self { n, p, data })
    }

    pub fn from_column(xs: Vec<T>) -> Result<Self> {
        Self::new(xs.into_iter().map(|x| vec![x]).collect())
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self.data[i * self.p + j]).collect()
    }

    pub fn mean(&self) -> Vec<T> {
        let nn = T::from_usize_lossy(self.n);
        (0..self.p)
            .map(|j| (0..self.n).map(|i| self.data[i * self.p + j]).sum::<T>() / nn)
            .collect()
    }

    /// Sample covariance with the `1/n` normalizer, row-major `p x p`.
    pub fn covariance(&self) -> Vec<T> {
        let mu = self.mean();
        let p = self.p;
        let nn = T::from_usize_lossy(self.n);
        let mut cov = vec![T::zero(); p * p];
        for i in 0..self.n {
            let r = self.row(i);
            for a in 0..p {
                for b in 0..p {
                    cov[a * p + b] += (r[a] - mu[a]) * (r[b] - mu[b]);
                }
            }
        }
        cov.iter_mut().for_each(|c| *c /= nn);
        cov
    }
}

/// One-hot encodes categorical labels against a reference level (the first
/// level in sorted order, which gets no column). Returns the rows and the
/// names of the encoded levels.
pub fn one_hot_rows<T: Scalar>(labels: &[String]) -> (Vec<Vec<T>>, Vec<String>) {
    let mut levels: Vec<String> = labels.to_vec();
    levels.sort();
    levels.dedup();
    let encoded: Vec<String> = levels.into_iter().skip(1).collect();
    let rows = labels
        .iter()
        .map(|l| encoded.iter().map(|e| if e == l { T::one() } else { T::zero() }).collect())
        .collect();
    (rows, encoded)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GlobalWeightOptions {
    /// Add `1e-8 * trace / p` to the diagonal when the covariance is
    /// ill-conditioned instead of failing.
    pub ridge: bool,
}

/// Global weights `s_i(x) = 1 + (X_i - Xbar)^T Sigma^{-1} (x - Xbar)`.
pub fn global_weights<T: Scalar>(design: &CovariateMatrix<T>, x: &[T]) -> Result<Vec<T>> {
    global_weights_with(design, x, GlobalWeightOptions::default())
}

pub fn global_weights_with<T: Scalar>(
    design: &CovariateMatrix<T>,
    x: &[T],
    opts: GlobalWeightOptions,
) -> Result<Vec<T>> {
    let p = design.ncols();
    if x.len() != p {
        return Err(Error::LengthMismatch(format!("predictor has {} entries, design has {p}", x.len())));
    }
    let mu = design.mean();
    let mut cov = design.covariance();
    let (mut evals, mut evecs) = symmetric_eigen(&cov, p);
    if !well_conditioned(&evals) {
        if !opts.ridge {
            return Err(Error::IllConditioned(format!("covariance eigenvalues {evals:?}")));
        }
        let trace: T = (0..p).map(|i| cov[i * p + i]).sum();
        let delta = T::lit(1e-8) * trace / T::from_usize_lossy(p);
        for i in 0..p {
            cov[i * p + i] += delta;
        }
        (evals, evecs) = symmetric_eigen(&cov, p);
        if !well_conditioned(&evals) {
            return Err(Error::IllConditioned("covariance singular even after ridge".into()));
        }
    }
    // v = Sigma^{-1} (x - mu) = V diag(1/lambda) V^T (x - mu)
    let d: Vec<T> = x.iter().zip(&mu).map(|(&a, &b)| a - b).collect();
    let proj: Vec<T> = (0..p)
        .map(|k| (0..p).map(|i| evecs[i * p + k] * d[i]).sum::<T>() / evals[k])
        .collect();
    let v: Vec<T> = (0..p).map(|i| (0..p).map(|k| evecs[i * p + k] * proj[k]).sum()).collect();
    Ok((0..design.nrows())
        .map(|i| {
            let r = design.row(i);
            T::one() + (0..p).map(|j| (r[j] - mu[j]) * v[j]).sum::<T>()
        })
        .collect())
}

fn well_conditioned<T: Scalar>(evals: &[T]) -> bool {
    let lo = evals.iter().copied().fold(T::infinity(), T::min);
    let hi = evals.iter().copied().fold(T::neg_infinity(), T::max);
    lo > T::zero() && hi / lo <= T::lit(MAX_CONDITION)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Epanechnikov,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<T> {
    pub family: KernelFamily,
    pub bandwidth: T,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn new(family: KernelFamily, bandwidth: T) -> Result<Self> {
        if !(bandwidth > T::zero()) || !bandwidth.is_finite() {
            return Err(Error::InvalidConfig(format!("bandwidth {bandwidth} must be positive")));
        }
        Ok(Self { family, bandwidth })
    }

    /// `K_h(u) = K(u / h) / h`.
    pub fn scaled(&self, u: T) -> T {
        let z = u / self.bandwidth;
        let k = match self.family {
            KernelFamily::Epanechnikov => {
                if z.abs() <= T::one() {
                    T::lit(0.75) * (T::one() - z * z)
                } else {
                    T::zero()
                }
            }
            KernelFamily::Gaussian => {
                (-(z * z) * T::lit(0.5)).exp() / T::lit((2.0 * std::f64::consts::PI).sqrt())
            }
        };
        k / self.bandwidth
    }
}

/// Local linear weights `s_i(x, h) = K_h(X_i - x) [u2 - u1 (X_i - x)] / sigma0^2`
/// for a univariate design.
pub fn local_weights<T: Scalar>(design: &CovariateMatrix<T>, x: T, kernel: &KernelSpec<T>) -> Result<Vec<T>> {
    if design.ncols() != 1 {
        return Err(Error::InvalidConfig("local weights need a univariate design".into()));
    }
    let xs = design.column(0);
    let nn = T::from_usize_lossy(xs.len());
    let ks: Vec<T> = xs.iter().map(|&xi| kernel.scaled(xi - x)).collect();
    if ks.iter().all(|&k| k == T::zero()) {
        return Err(Error::EmptyNeighborhood(x.to_f64().unwrap_or(f64::NAN)));
    }
    let mut u = [T::zero(); 3];
    for (&xi, &k) in xs.iter().zip(&ks) {
        let d = xi - x;
        u[0] += k;
        u[1] += k * d;
        u[2] += k * d * d;
    }
    u.iter_mut().for_each(|v| *v /= nn);
    let sigma2 = u[0] * u[2] - u[1] * u[1];
    if !(sigma2 > T::zero()) {
        return Err(Error::EmptyNeighborhood(x.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(xs
        .iter()
        .zip(&ks)
        .map(|(&xi, &k)| k * (u[2] - u[1] * (xi - x)) / sigma2)
        .collect())
}

/// `max(floor, n^{-1} sum_i w_i v_i)`; no floor when `floor` is `None`.
pub fn regress_size<T: Scalar>(sizes: &[T], weights: &[T], floor: Option<T>) -> Result<T> {
    if sizes.len() != weights.len() {
        return Err(Error::LengthMismatch(format!("{} sizes, {} weights", sizes.len(), weights.len())));
    }
    if sizes.is_empty() {
        return Err(Error::EmptyInput("no sizes".into()));
    }
    let fit = sizes.iter().zip(weights).map(|(&v, &w)| v * w).sum::<T>() / T::from_usize_lossy(sizes.len());
    Ok(match floor {
        Some(f) => fit.max(f),
        None => fit,
    })
}

pub fn regress_shape<T: Scalar>(quantiles: &[QuantileGrid<T>], weights: &[T]) -> Result<QuantileGrid<T>> {
    quantile_barycenter(quantiles, weights)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegressionMode<T> {
    Global,
    Local(KernelSpec<T>),
}

/// Regression weights at predictor value `x`.
pub fn regression_weights<T: Scalar>(
    design: &CovariateMatrix<T>,
    x: &[T],
    mode: &RegressionMode<T>,
) -> Result<Vec<T>> {
    match mode {
        RegressionMode::Global => global_weights(design, x),
        RegressionMode::Local(k) => {
            if x.len() != 1 {
                return Err(Error::InvalidConfig("local regression needs a scalar predictor".into()));
            }
            local_weights(design, x[0], k)
        }
    }
}

/// Positive-data regression with the subject quantiles computed once.
#[derive(Debug, Clone)]
pub struct PositiveRegressor<'a, T> {
    design: &'a CovariateMatrix<T>,
    sizes: Vec<T>,
    quantiles: Vec<QuantileGrid<T>>,
}

impl<'a, T: Scalar> PositiveRegressor<'a, T> {
    pub fn new(ds: &[PositiveDecomposition<T>], design: &'a CovariateMatrix<T>) -> Result<Self> {
        if ds.len() != design.nrows() {
            return Err(Error::LengthMismatch(format!(
                "{} decompositions, {} covariate rows",
                ds.len(),
                design.nrows()
            )));
        }
        Ok(Self {
            design,
            sizes: ds.iter().map(|d| d.size()).collect(),
            quantiles: ds.iter().map(|d| quantile_from_density(d.shape())).collect::<Result<_>>()?,
        })
    }

    pub fn fit(&self, x: &[T], mode: &RegressionMode<T>) -> Result<PositiveMean<T>> {
        let w = regression_weights(self.design, x, mode)?;
        let size = regress_size(&self.sizes, &w, Some(T::lit(SIZE_FLOOR)))?;
        positive_from_parts(size, regress_shape(&self.quantiles, &w)?)
    }
}

#[derive(Debug, Clone)]
pub struct MonotoneRegressor<'a, T> {
    design: &'a CovariateMatrix<T>,
    ranges: Vec<T>,
    minima: Vec<T>,
    quantiles: Vec<QuantileGrid<T>>,
}

impl<'a, T: Scalar> MonotoneRegressor<'a, T> {
    pub fn new(ds: &[MonotoneDecomposition<T>], design: &'a CovariateMatrix<T>) -> Result<Self> {
        if ds.len() != design.nrows() {
            return Err(Error::LengthMismatch(format!(
                "{} decompositions, {} covariate rows",
                ds.len(),
                design.nrows()
            )));
        }
        Ok(Self {
            design,
            ranges: ds.iter().map(|d| d.range()).collect(),
            minima: ds.iter().map(|d| d.minimum()).collect(),
            quantiles: ds.iter().map(|d| quantile_from_cdf(d.shape())).collect::<Result<_>>()?,
        })
    }

    pub fn fit(&self, x: &[T], mode: &RegressionMode<T>) -> Result<MonotoneMean<T>> {
        let w = regression_weights(self.design, x, mode)?;
        let range = regress_size(&self.ranges, &w, Some(T::lit(RANGE_FLOOR)))?;
        let minimum = regress_size(&self.minima, &w, None)?;
        monotone_from_parts(range, minimum, regress_shape(&self.quantiles, &w)?)
    }
}

pub fn fit_positive_regression<T: Scalar>(
    ds: &[PositiveDecomposition<T>],
    design: &CovariateMatrix<T>,
    x: &[T],
    mode: &RegressionMode<T>,
) -> Result<PositiveMean<T>> {
    PositiveRegressor::new(ds, design)?.fit(x, mode)
}

pub fn fit_monotone_regression<T: Scalar>(
    ds: &[MonotoneDecomposition<T>],
    design: &CovariateMatrix<T>,
    x: &[T],
    mode: &RegressionMode<T>,
) -> Result<MonotoneMean<T>> {
    MonotoneRegressor::new(ds, design)?.fit(x, mode)
}

/// Rule-of-thumb bandwidth `sd(X) * n^{-1/5}` for a univariate design.
pub fn default_bandwidth<T: Scalar>(design: &CovariateMatrix<T>) -> Result<T> {
    if design.ncols() != 1 {
        return Err(Error::InvalidConfig("bandwidth rule needs a univariate design".into()));
    }
    let n = design.nrows();
    if n < 10 {
        return Err(Error::DegenerateDesign(format!("need at least 10 subjects, got {n}")));
    }
    let var = design.covariance()[0];
    if !(var > T::zero()) {
        return Err(Error::DegenerateDesign("predictor has zero variance".into()));
    }
    Ok(var.sqrt() * T::from_usize_lossy(n).powf(T::lit(-0.2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{frechet_mean_monotone, frechet_mean_positive};
    use crate::domain::{uniform_abscissae, CdfGrid, DensityGrid};

    #[test]
    fn global_weights_at_mean_are_one() {
        let x = CovariateMatrix::new(vec![vec![0.0f64, 1.0], vec![1.0, 0.5], vec![2.0, 2.0], vec![3.0, -1.0]]).unwrap();
        let w = global_weights(&x, &x.mean()).unwrap();
        assert!(w.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn global_weights_univariate_example() {
        let x = CovariateMatrix::from_column(vec![0.0f64, 1.0, 2.0]).unwrap();
        let w = global_weights(&x, &[2.0]).unwrap();
        for (a, b) in w.iter().zip([-0.5, 1.0, 2.5]) {
            assert!((a - b).abs() < 1e-12);
        }
        let xbar: f64 = w.iter().zip([0.0, 1.0, 2.0]).map(|(s, x)| s * x).sum::<f64>() / 3.0;
        assert!((xbar - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_design() {
        let x = CovariateMatrix::new(vec![vec![1.0f64, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
        assert!(matches!(global_weights(&x, &[1.0, 1.0]), Err(Error::IllConditioned(_))));
        let w = global_weights_with(&x, &[2.0, 4.0], GlobalWeightOptions { ridge: true }).unwrap();
        assert!(w.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn one_hot_encoding() {
        let labels: Vec<String> = ["b", "a", "c", "a"].iter().map(|s| s.to_string()).collect();
        let (rows, names) = one_hot_rows::<f64>(&labels);
        assert_eq!(names, vec!["b".to_string(), "c".to_string()]);
        assert_eq!(rows[0], vec![1.0, 0.0]);
        assert_eq!(rows[1], vec![0.0, 0.0]);
        assert_eq!(rows[2], vec![0.0, 1.0]);
    }

    #[test]
    fn local_weights_symmetric_design() {
        let x = CovariateMatrix::from_column(vec![-1.0f64, 0.0, 1.0]).unwrap();
        let k = KernelSpec::new(KernelFamily::Gaussian, 1.0).unwrap();
        let w = local_weights(&x, 0.0, &k).unwrap();
        assert!((w[0] - w[2]).abs() < 1e-14);
        assert!(w[1] > w[0]);
        assert!((w.iter().sum::<f64>() / 3.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn local_weights_direct_formula() {
        let xs = [0.0, 0.5, 1.0];
        let x = CovariateMatrix::from_column(xs.to_vec()).unwrap();
        let k = KernelSpec::new(KernelFamily::Epanechnikov, 1.0).unwrap();
        let w = local_weights(&x, 0.5, &k).unwrap();
        // K((X_i - 0.5)/1) = 0.75 (1 - d^2): d = -0.5, 0, 0.5 -> 0.5625, 0.75, 0.5625
        let kv = [0.5625, 0.75, 0.5625];
        let d = [-0.5, 0.0, 0.5];
        let u0 = kv.iter().sum::<f64>() / 3.0;
        let u1 = kv.iter().zip(d).map(|(k, d)| k * d).sum::<f64>() / 3.0;
        let u2 = kv.iter().zip(d).map(|(k, d)| k * d * d).sum::<f64>() / 3.0;
        let s2 = u0 * u2 - u1 * u1;
        for i in 0..3 {
            let expect = kv[i] * (u2 - u1 * d[i]) / s2;
            assert!((w[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn local_weights_empty_neighborhood() {
        let x = CovariateMatrix::from_column(vec![0.0, 0.1, 0.2]).unwrap();
        let k = KernelSpec::new(KernelFamily::Epanechnikov, 0.05).unwrap();
        assert!(matches!(local_weights(&x, 5.0, &k), Err(Error::EmptyNeighborhood(_))));
    }

    #[test]
    fn regress_size_examples() {
        let x = CovariateMatrix::from_column(vec![0.0f64, 1.0, 2.0]).unwrap();
        let w = global_weights(&x, &[2.0]).unwrap();
        assert!((regress_size(&[0.0, 1.0, 2.0], &w, Some(1e-6)).unwrap() - 2.0).abs() < 1e-12);
        let w0 = global_weights(&x, &[-5.0]).unwrap();
        assert_eq!(regress_size(&[0.0, 1.0, 2.0], &w0, Some(1e-6)).unwrap(), 1e-6);
        assert!((regress_size(&[3.0; 3], &w0, None).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(regress_size(&[1.0], &w, None), Err(Error::LengthMismatch(_))));
    }

    #[test]
    fn regress_shape_examples() {
        let m = 101;
        let q = QuantileGrid::from_fn(m, |p: f64| p * p).unwrap();
        assert_eq!(regress_shape(&[q.clone(), q.clone()], &[1.5, 0.5]).unwrap(), q);
        let a = QuantileGrid::from_fn(m, |p: f64| 0.5 * p).unwrap();
        let b = QuantileGrid::<f64>::identity(m).unwrap();
        let out = regress_shape(&[a, b], &[1.0, 1.0]).unwrap();
        for (p, v) in out.levels().iter().zip(out.values()) {
            assert!((v - 0.75 * p).abs() < 1e-12);
        }
        assert!(matches!(regress_shape::<f64>(&[], &[]), Err(Error::EmptyInput(_))));
    }

    fn sample_positive(m: usize) -> (Vec<PositiveDecomposition<f64>>, CovariateMatrix<f64>) {
        let xs = vec![0.2, 0.7, 1.1, 1.5, 1.9];
        let ds = xs
            .iter()
            .map(|&x| {
                let f = DensityGrid::normalized(
                    uniform_abscissae(m).into_iter().map(|t: f64| 1.0 + x * (t - 0.5)).collect(),
                )
                .unwrap();
                PositiveDecomposition::new(0.5 * x, f).unwrap()
            })
            .collect();
        (ds, CovariateMatrix::from_column(xs).unwrap())
    }

    #[test]
    fn global_fit_at_mean_is_frechet_mean() {
        let (ds, x) = sample_positive(201);
        let fit = fit_positive_regression(&ds, &x, &x.mean(), &RegressionMode::Global).unwrap();
        let mean = frechet_mean_positive(&ds).unwrap();
        assert!((fit.decomposition.size() - mean.decomposition.size()).abs() < 1e-12);
        let diff = fit
            .quantile
            .values()
            .iter()
            .zip(mean.quantile.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn linear_size_is_reproduced() {
        let (ds, x) = sample_positive(101);
        for xv in [0.3, 1.0, 1.7] {
            let fit = fit_positive_regression(&ds, &x, &[xv], &RegressionMode::Global).unwrap();
            assert!((fit.decomposition.size() - 0.5 * xv).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_fit_linear_components() {
        let m = 101;
        let xs = vec![0.4f64, 0.8, 1.0, 1.3, 1.6, 1.9];
        let ds: Vec<_> = xs
            .iter()
            .map(|&x| MonotoneDecomposition::new(0.25 * x, 0.5 * x, CdfGrid::identity(m).unwrap()).unwrap())
            .collect();
        let x = CovariateMatrix::from_column(xs).unwrap();
        let reg = MonotoneRegressor::new(&ds, &x).unwrap();
        for xv in [0.5, 1.0, 1.5] {
            let fit = reg.fit(&[xv], &RegressionMode::Global).unwrap();
            assert!((fit.decomposition.range() - 0.25 * xv).abs() < 1e-12);
            assert!((fit.decomposition.minimum() - 0.5 * xv).abs() < 1e-12);
            assert!(fit.trajectory.values().windows(2).all(|w| w[0] <= w[1]));
        }
        let at_mean = reg.fit(&x.mean(), &RegressionMode::Global).unwrap();
        let mean = frechet_mean_monotone(&ds).unwrap();
        assert!((at_mean.decomposition.range() - mean.decomposition.range()).abs() < 1e-12);
        assert!((at_mean.decomposition.minimum() - mean.decomposition.minimum()).abs() < 1e-12);
    }

    #[test]
    fn local_fit_runs() {
        let (ds, x) = sample_positive(101);
        let k = KernelSpec::new(KernelFamily::Gaussian, 0.6).unwrap();
        let fit = fit_positive_regression(&ds, &x, &[1.0], &RegressionMode::Local(k)).unwrap();
        assert!((fit.decomposition.size() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn bandwidth_rule() {
        let xs: Vec<f64> = (0..500).map(|i| if i % 2 == 0 { 0.5 } else { 1.5 }).collect();
        let x = CovariateMatrix::from_column(xs.clone()).unwrap();
        let h = default_bandwidth(&x).unwrap();
        assert!((h - 0.5 * 500f64.powf(-0.2)).abs() < 1e-12);
        assert!((h - 0.1443).abs() < 1e-4);
        let x2 = CovariateMatrix::from_column(xs.iter().map(|v| 3.0 * v).collect()).unwrap();
        assert!((default_bandwidth(&x2).unwrap() - 3.0 * h).abs() < 1e-12);
        let c = CovariateMatrix::from_column(vec![1.0; 20]).unwrap();
        assert!(matches!(default_bandwidth(&c), Err(Error::DegenerateDesign(_))));
    }
}
