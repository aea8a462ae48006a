//! Size-shape decomposition, recomposition and Frechet means.

use crate::domain::{
    uniform_abscissae, CdfGrid, Constraint, DensityGrid, MonotoneDecomposition,
    PositiveDecomposition, QuantileGrid, SampledTrajectory, TimeGrid,
};
use crate::error::{Error, Result};
use crate::io::LongitudinalDataset;
use crate::quantile::{
    cdf_from_quantile, density_from_quantile, project_to_quantile_space, quantile_barycenter,
    quantile_from_cdf, quantile_from_density,
};
use crate::recovery::{recover_steps, BinSpec, RawObservations};
use crate::scalar::Scalar;

/// Positivity floor applied to recovered trajectories before normalizing.
pub const POSITIVITY_FLOOR: f64 = 1e-8;
/// Lower bound for estimated and regressed ranges.
pub const RANGE_FLOOR: f64 = 1e-6;
/// Lower bound for regressed sizes.
pub const SIZE_FLOOR: f64 = 1e-6;

/// How the size of a positive trajectory is estimated from raw data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SizeEstimator {
    /// Mean of the raw observations (equidistant designs).
    #[default]
    RawMean,
    /// Integral of the recovered step function (irregular designs).
    StepIntegral,
}

pub fn decompose_positive_exact<T: Scalar>(
    y: &SampledTrajectory<T>,
    shape_len: usize,
) -> Result<PositiveDecomposition<T>> {
    if y.values().iter().any(|&v| !(v > T::zero())) {
        return Err(Error::ConstraintViolation("positive decomposition needs Y > 0".into()));
    }
    let size = y.integral();
    let ts = uniform_abscissae::<T>(shape_len);
    let shape: Vec<T> = ts.iter().map(|&t| y.evaluate(t).map(|v| v / size)).collect::<Result<_>>()?;
    PositiveDecomposition::new(size, DensityGrid::normalized(shape)?)
}

pub fn decompose_positive_estimated<T: Scalar>(
    obs: &RawObservations<T>,
    bins: &BinSpec<T>,
    shape_len: usize,
    size_rule: SizeEstimator,
) -> Result<PositiveDecomposition<T>> {
    let (size, shape) = positive_parts(obs, bins, shape_len, size_rule)?;
    if !(size > T::lit(POSITIVITY_FLOOR)) {
        return Err(Error::DegenerateSize(format!("estimated size {size} is not positive")));
    }
    PositiveDecomposition::new(size, shape)
}

/// Estimated positive decomposition that floors a degenerate size at
/// [`SIZE_FLOOR`] instead of failing.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveEstimate<T> {
    pub decomposition: PositiveDecomposition<T>,
    /// Estimated size before flooring, when it was at or below the floor.
    pub degenerate_size: Option<T>,
}

pub fn decompose_positive_floored<T: Scalar>(
    obs: &RawObservations<T>,
    bins: &BinSpec<T>,
    shape_len: usize,
    size_rule: SizeEstimator,
) -> Result<PositiveEstimate<T>> {
    let (size, shape) = positive_parts(obs, bins, shape_len, size_rule)?;
    let floor = T::lit(SIZE_FLOOR);
    Ok(PositiveEstimate {
        decomposition: PositiveDecomposition::new(size.max(floor), shape)?,
        degenerate_size: (size <= floor).then_some(size),
    })
}

fn positive_parts<T: Scalar>(
    obs: &RawObservations<T>,
    bins: &BinSpec<T>,
    shape_len: usize,
    size_rule: SizeEstimator,
) -> Result<(T, DensityGrid<T>)> {
    if obs.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 observations".into()));
    }
    let eps = T::lit(POSITIVITY_FLOOR);
    let steps = recover_steps(obs, bins)?;
    let ts = uniform_abscissae::<T>(shape_len);
    let floored: Vec<T> = ts.iter().map(|&t| steps.evaluate(t).max(eps)).collect();
    let size = match size_rule {
        SizeEstimator::RawMean => obs.mean(),
        // exact integral of the step function
        SizeEstimator::StepIntegral => steps.levels().iter().copied().sum::<T>() * steps.bins().width(),
    };
    Ok((size, DensityGrid::normalized(floored)?))
}

pub fn decompose_monotone_exact<T: Scalar>(
    y: &SampledTrajectory<T>,
    shape_len: usize,
) -> Result<MonotoneDecomposition<T>> {
    if y.values().windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::ConstraintViolation("monotone decomposition needs nondecreasing Y".into()));
    }
    let lo = y.evaluate(T::zero())?;
    let hi = y.evaluate(T::one())?;
    let range = hi - lo;
    if !(range > T::lit(RANGE_FLOOR)) {
        return Err(Error::NearConstant(range.to_f64().unwrap_or(f64::NAN)));
    }
    let ts = uniform_abscissae::<T>(shape_len);
    let shape: Vec<T> = ts.iter().map(|&t| y.evaluate(t).map(|v| (v - lo) / range)).collect::<Result<_>>()?;
    MonotoneDecomposition::new(range, lo, CdfGrid::repaired(shape)?)
}

/// Estimated monotone decomposition together with a flag telling whether
/// the recovered range was at or below the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneEstimate<T> {
    pub decomposition: MonotoneDecomposition<T>,
    /// Recovered range before flooring, when it was not positive.
    pub nonpositive_range: Option<T>,
}

pub fn decompose_monotone_estimated<T: Scalar>(
    obs: &RawObservations<T>,
    bins: &BinSpec<T>,
    shape_len: usize,
) -> Result<MonotoneEstimate<T>> {
    if obs.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 observations".into()));
    }
    let steps = recover_steps(obs, bins)?;
    let lo = steps.first();
    let raw_range = steps.last() - lo;
    let range = raw_range.max(T::lit(RANGE_FLOOR));
    let ts = uniform_abscissae::<T>(shape_len);
    let raw: Vec<T> = ts.iter().map(|&t| (steps.evaluate(t) - lo) / range).collect();
    let mut shape = project_to_quantile_space(&raw)?.values().to_vec();
    shape[0] = T::zero();
    shape[shape_len - 1] = T::one();
    Ok(MonotoneEstimate {
        decomposition: MonotoneDecomposition::new(range, lo, CdfGrid::new(shape)?)?,
        nonpositive_range: (raw_range <= T::zero()).then_some(raw_range),
    })
}

/// `Y(t) = tau * f(t)` on `grid`.
pub fn recompose_positive<T: Scalar>(
    d: &PositiveDecomposition<T>,
    grid: TimeGrid<T>,
) -> Result<SampledTrajectory<T>> {
    let values: Vec<T> = grid.points().iter().map(|&t| d.size() * d.shape().evaluate(t)).collect();
    let constraint = if values.iter().all(|&v| v > T::zero()) {
        Constraint::Positive
    } else {
        Constraint::Unconstrained
    };
    SampledTrajectory::new(grid, values, constraint)
}

/// `Y(t) = lambda + rho * F(t)` on `grid`.
pub fn recompose_monotone<T: Scalar>(
    d: &MonotoneDecomposition<T>,
    grid: TimeGrid<T>,
) -> Result<SampledTrajectory<T>> {
    let values = grid
        .points()
        .iter()
        .map(|&t| d.minimum() + d.range() * d.shape().evaluate(t))
        .collect();
    SampledTrajectory::new(grid, values, Constraint::Monotone)
}

/// Frechet mean of positive data with its shape quantile and recomposed
/// trajectory on the uniform shape grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveMean<T> {
    pub decomposition: PositiveDecomposition<T>,
    pub quantile: QuantileGrid<T>,
    pub trajectory: SampledTrajectory<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneMean<T> {
    pub decomposition: MonotoneDecomposition<T>,
    pub quantile: QuantileGrid<T>,
    pub trajectory: SampledTrajectory<T>,
}

/// Assembles a positive decomposition from a size and a shape quantile.
pub(crate) fn positive_from_parts<T: Scalar>(size: T, quantile: QuantileGrid<T>) -> Result<PositiveMean<T>> {
    let m = quantile.len();
    let density = density_from_quantile(&quantile)?;
    let decomposition = PositiveDecomposition::new(size, density)?;
    let trajectory = recompose_positive(&decomposition, TimeGrid::uniform(m)?)?;
    Ok(PositiveMean { decomposition, quantile, trajectory })
}

pub(crate) fn monotone_from_parts<T: Scalar>(
    range: T,
    minimum: T,
    quantile: QuantileGrid<T>,
) -> Result<MonotoneMean<T>> {
    let m = quantile.len();
    let cdf = cdf_from_quantile(&quantile)?;
    let decomposition = MonotoneDecomposition::new(range, minimum, cdf)?;
    let trajectory = recompose_monotone(&decomposition, TimeGrid::uniform(m)?)?;
    Ok(MonotoneMean { decomposition, quantile, trajectory })
}

fn common_len(lens: impl Iterator<Item = usize>) -> Result<usize> {
    let mut it = lens;
    let first = it.next().ok_or_else(|| Error::EmptyInput("no decompositions".into()))?;
    for l in it {
        if l != first {
            return Err(Error::GridMismatch { left: first, right: l });
        }
    }
    Ok(first)
}

pub fn frechet_mean_positive<T: Scalar>(ds: &[PositiveDecomposition<T>]) -> Result<PositiveMean<T>> {
    common_len(ds.iter().map(|d| d.shape().len()))?;
    let n = T::from_usize_lossy(ds.len());
    let size = ds.iter().map(|d| d.size()).sum::<T>() / n;
    let qs: Vec<QuantileGrid<T>> = ds.iter().map(|d| quantile_from_density(d.shape())).collect::<Result<_>>()?;
    let q = quantile_barycenter(&qs, &vec![T::one(); ds.len()])?;
    positive_from_parts(size, q)
}

pub fn frechet_mean_monotone<T: Scalar>(ds: &[MonotoneDecomposition<T>]) -> Result<MonotoneMean<T>> {
    common_len(ds.iter().map(|d| d.shape().len()))?;
    let n = T::from_usize_lossy(ds.len());
    let range = ds.iter().map(|d| d.range()).sum::<T>() / n;
    let minimum = ds.iter().map(|d| d.minimum()).sum::<T>() / n;
    let qs: Vec<QuantileGrid<T>> = ds.iter().map(|d| quantile_from_cdf(d.shape())).collect::<Result<_>>()?;
    let q = quantile_barycenter(&qs, &vec![T::one(); ds.len()])?;
    monotone_from_parts(range, minimum, q)
}

/// Size rule matching the dataset design: raw means when all subjects share
/// one grid, step integrals otherwise.
pub fn size_rule_for(ds: &LongitudinalDataset) -> SizeEstimator {
    if ds.shares_grid() {
        SizeEstimator::RawMean
    } else {
        SizeEstimator::StepIntegral
    }
}

/// Per-subject positive decompositions, in subject order. Fails on the first
/// subject whose estimated size is not positive.
pub fn decompose_dataset_positive(
    ds: &LongitudinalDataset,
    bins: &BinSpec<f64>,
    shape_len: usize,
) -> Result<Vec<PositiveDecomposition<f64>>> {
    let rule = size_rule_for(ds);
    ds.subjects()
        .iter()
        .map(|s| {
            decompose_positive_estimated(&s.obs, bins, shape_len, rule)
                .map_err(|e| match e {
                    Error::DegenerateSize(msg) => Error::DegenerateSize(format!("subject `{}`: {msg}", s.id)),
                    other => other,
                })
        })
        .collect()
}

/// Per-subject monotone decompositions, in subject order. Ranges are
/// floored at [`RANGE_FLOOR`].
pub fn decompose_dataset_monotone(
    ds: &LongitudinalDataset,
    bins: &BinSpec<f64>,
    shape_len: usize,
) -> Result<Vec<MonotoneDecomposition<f64>>> {
    ds.subjects()
        .iter()
        .map(|s| decompose_monotone_estimated(&s.obs, bins, shape_len).map(|e| e.decomposition))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantile::wasserstein;

    const M: usize = 1001;

    fn traj(f: impl Fn(f64) -> f64, c: Constraint) -> SampledTrajectory<f64> {
        SampledTrajectory::from_fn(TimeGrid::uniform(M).unwrap(), c, f).unwrap()
    }

    fn sup(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn positive_exact_examples() {
        let d = decompose_positive_exact(&traj(|_| 2.0, Constraint::Positive), M).unwrap();
        assert!((d.size() - 2.0).abs() < 1e-12);
        assert!(d.shape().values().iter().all(|v| (v - 1.0).abs() < 1e-12));

        let d = decompose_positive_exact(&traj(|t| t + 0.5, Constraint::Positive), M).unwrap();
        assert!((d.size() - 1.0).abs() < 1e-12);
        assert!((d.shape().evaluate(0.3) - 0.8).abs() < 1e-12);

        let e = std::f64::consts::E;
        let d = decompose_positive_exact(&traj(f64::exp, Constraint::Positive), M).unwrap();
        assert!((d.size() - (e - 1.0)).abs() < 1e-6);
        for t in [0.0, 0.25, 0.8, 1.0] {
            assert!((d.shape().evaluate(t) - t.exp() / (e - 1.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn positive_exact_rejects_nonpositive() {
        let y = traj(|t| t - 0.5, Constraint::Unconstrained);
        assert!(matches!(decompose_positive_exact(&y, M), Err(Error::ConstraintViolation(_))));
    }

    #[test]
    fn positive_estimated_examples() {
        let g = TimeGrid::<f64>::midpoints(200).unwrap();
        let o = RawObservations::new(g.clone(), vec![2.0; 200]).unwrap();
        let bins = BinSpec::new(0.1).unwrap();
        let d = decompose_positive_estimated(&o, &bins, M, SizeEstimator::RawMean).unwrap();
        assert!((d.size() - 2.0).abs() < 1e-12);
        assert!(d.shape().values().iter().all(|v| (v - 1.0).abs() < 1e-12));

        let vals: Vec<f64> = g.points().iter().map(|t| t + 0.5).collect();
        let riemann = vals.iter().sum::<f64>() / vals.len() as f64;
        let o = RawObservations::new(g, vals).unwrap();
        let d = decompose_positive_estimated(&o, &bins, M, SizeEstimator::RawMean).unwrap();
        assert_eq!(d.size(), riemann);
        assert!((d.size() - 1.0).abs() < 1.0 / 200.0);
    }

    #[test]
    fn positive_estimated_degenerate_size() {
        let g = TimeGrid::<f64>::midpoints(10).unwrap();
        let o = RawObservations::new(g, vec![-1.0; 10]).unwrap();
        let r = decompose_positive_estimated(&o, &BinSpec::new(0.5).unwrap(), 11, SizeEstimator::RawMean);
        assert!(matches!(r, Err(Error::DegenerateSize(_))));
    }

    #[test]
    fn step_integral_size_rule() {
        let g = TimeGrid::<f64>::new(vec![0.1, 0.2, 0.7, 0.8]).unwrap();
        let o = RawObservations::new(g, vec![1.0, 1.0, 3.0, 3.0]).unwrap();
        let d = decompose_positive_estimated(&o, &BinSpec::with_count(2).unwrap(), 101, SizeEstimator::StepIntegral)
            .unwrap();
        assert!((d.size() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn monotone_exact_examples() {
        let d = decompose_monotone_exact(&traj(|t| 3.0 * t - 1.0, Constraint::Monotone), M).unwrap();
        assert!((d.range() - 3.0).abs() < 1e-12);
        assert!((d.minimum() + 1.0).abs() < 1e-12);
        assert!(sup(d.shape().values(), &uniform_abscissae(M)) < 1e-12);

        let d = decompose_monotone_exact(&traj(|t| t * t, Constraint::Monotone), M).unwrap();
        assert!((d.range() - 1.0).abs() < 1e-12 && d.minimum().abs() < 1e-12);
        assert!((d.shape().evaluate(0.5) - 0.25).abs() < 1e-12);

        let c = traj(|_| 4.0, Constraint::Monotone);
        assert!(matches!(decompose_monotone_exact(&c, M), Err(Error::NearConstant(_))));
    }

    #[test]
    fn monotone_estimated_noiseless_identity() {
        let n = 400;
        let g = TimeGrid::<f64>::midpoints(n).unwrap();
        let o = RawObservations::new(g.clone(), g.points().to_vec()).unwrap();
        let bins = BinSpec::new(0.1).unwrap();
        let est = decompose_monotone_estimated(&o, &bins, M).unwrap();
        assert!(est.nonpositive_range.is_none());
        // endpoint bins average (j - 1/2)/n over their members
        let first: f64 = g.points()[..40].iter().sum::<f64>() / 40.0;
        let last: f64 = g.points()[360..].iter().sum::<f64>() / 40.0;
        let d = &est.decomposition;
        assert!((d.minimum() - first).abs() < 1e-12);
        assert!((d.minimum() - 0.05).abs() < 1e-12);
        assert!((d.range() - (last - first)).abs() < 1e-12);
        let q_est = quantile_from_cdf(d.shape()).unwrap();
        let q_id = QuantileGrid::identity(M).unwrap();
        assert!(wasserstein(&q_est, &q_id).unwrap() < 0.06);
    }

    #[test]
    fn monotone_estimated_matches_exact_when_bins_are_points() {
        let n = 64;
        let g = TimeGrid::<f64>::midpoints(n).unwrap();
        let vals: Vec<f64> = g.points().iter().map(|t| 2.0 * t * t + 1.0).collect();
        let y = SampledTrajectory::new(g.clone(), vals.clone(), Constraint::Monotone).unwrap();
        let exact = decompose_monotone_exact(&y, M).unwrap();
        let o = RawObservations::new(g, vals).unwrap();
        let est = decompose_monotone_estimated(&o, &BinSpec::with_count(n).unwrap(), M).unwrap();
        assert_eq!(est.decomposition.range(), exact.range());
        assert_eq!(est.decomposition.minimum(), exact.minimum());
        let dq = wasserstein(
            &quantile_from_cdf(est.decomposition.shape()).unwrap(),
            &quantile_from_cdf(exact.shape()).unwrap(),
        )
        .unwrap();
        assert!(dq < 1.0 / n as f64, "{dq}");
    }

    #[test]
    fn monotone_estimated_noisy_is_valid_cdf() {
        let g = TimeGrid::<f64>::midpoints(30).unwrap();
        let vals: Vec<f64> = g.points().iter().enumerate().map(|(j, t)| t + if j % 2 == 0 { 0.4 } else { -0.4 }).collect();
        let o = RawObservations::new(g, vals).unwrap();
        let est = decompose_monotone_estimated(&o, &BinSpec::with_count(15).unwrap(), 101).unwrap();
        let f = est.decomposition.shape().values();
        assert!(f.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(f[0], 0.0);
        assert_eq!(f[100], 1.0);
    }

    #[test]
    fn monotone_estimated_flags_nonpositive_range() {
        let g = TimeGrid::<f64>::midpoints(10).unwrap();
        let vals: Vec<f64> = g.points().iter().map(|t| 1.0 - t).collect();
        let o = RawObservations::new(g, vals).unwrap();
        let est = decompose_monotone_estimated(&o, &BinSpec::with_count(2).unwrap(), 11).unwrap();
        assert!(est.nonpositive_range.unwrap() < 0.0);
        assert_eq!(est.decomposition.range(), RANGE_FLOOR);
    }

    #[test]
    fn recompose_examples() {
        let d = PositiveDecomposition::new(2.0f64, DensityGrid::uniform(M).unwrap()).unwrap();
        let y = recompose_positive(&d, TimeGrid::uniform(M).unwrap()).unwrap();
        assert!(y.values().iter().all(|&v| (v - 2.0).abs() < 1e-15));

        let f = DensityGrid::new(uniform_abscissae(M).into_iter().map(|t: f64| 2.0 * t).collect()).unwrap();
        let d = PositiveDecomposition::new(1.0, f).unwrap();
        let y = recompose_positive(&d, TimeGrid::uniform(M).unwrap()).unwrap();
        assert!(sup(y.values(), &uniform_abscissae::<f64>(M).iter().map(|t| 2.0 * t).collect::<Vec<_>>()) < 1e-12);

        let d = MonotoneDecomposition::new(3.0f64, -1.0, CdfGrid::identity(M).unwrap()).unwrap();
        let y = recompose_monotone(&d, TimeGrid::uniform(M).unwrap()).unwrap();
        assert_eq!(y.constraint(), Constraint::Monotone);
        assert!((y.evaluate(0.5).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn positive_roundtrips() {
        for (a, b) in [(1.0, 0.3), (0.2, 2.0), (5.0, -0.9)] {
            let y = traj(|t| a + (b * t).exp() * (1.0 + t * t), Constraint::Positive);
            let d = decompose_positive_exact(&y, M).unwrap();
            let back = recompose_positive(&d, TimeGrid::uniform(M).unwrap()).unwrap();
            assert!(sup(back.values(), y.values()) < 1e-8);
            let d2 = decompose_positive_exact(&back, M).unwrap();
            assert!((d2.size() - d.size()).abs() < 1e-8);
            assert!(sup(d2.shape().values(), d.shape().values()) < 1e-8);
        }
    }

    #[test]
    fn monotone_roundtrip() {
        let y = traj(|t| -2.0 + 3.0 * t.powf(1.7), Constraint::Monotone);
        let d = decompose_monotone_exact(&y, M).unwrap();
        let back = recompose_monotone(&d, TimeGrid::uniform(M).unwrap()).unwrap();
        assert!(sup(back.values(), y.values()) < 1e-8);
    }

    #[test]
    fn frechet_mean_positive_examples() {
        let u = DensityGrid::<f64>::uniform(M).unwrap();
        let a = PositiveDecomposition::new(1.0, u.clone()).unwrap();
        let b = PositiveDecomposition::new(3.0, u.clone()).unwrap();
        let mean = frechet_mean_positive(&[a.clone(), a.clone()]).unwrap();
        assert!((mean.decomposition.size() - 1.0).abs() < 1e-15);
        assert!(sup(mean.decomposition.shape().values(), u.values()) < 1e-9);

        let mean = frechet_mean_positive(&[a.clone(), b]).unwrap();
        assert!((mean.decomposition.size() - 2.0).abs() < 1e-15);
        assert!(mean.trajectory.values().iter().all(|v| (v - 2.0).abs() < 1e-8));

        let half = DensityGrid::normalized(
            uniform_abscissae(M).into_iter().map(|t: f64| if t <= 0.5 { 2.0 } else { 0.0 }).collect(),
        )
        .unwrap();
        let c = PositiveDecomposition::new(1.0, half).unwrap();
        let mean = frechet_mean_positive(&[a, c]).unwrap();
        for (t, v) in mean.decomposition.shape().abscissae().iter().zip(mean.decomposition.shape().values()) {
            if *t < 0.73 {
                assert!((v - 4.0 / 3.0).abs() < 0.01, "t={t} v={v}");
            } else if *t > 0.77 {
                assert!(*v < 1e-9, "t={t} v={v}");
            }
        }
        assert!(matches!(frechet_mean_positive::<f64>(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn frechet_mean_monotone_examples() {
        let id = CdfGrid::<f64>::identity(M).unwrap();
        let a = MonotoneDecomposition::new(1.0, 0.0, id.clone()).unwrap();
        let b = MonotoneDecomposition::new(3.0, -2.0, id.clone()).unwrap();
        let mean = frechet_mean_monotone(&[a.clone(), b]).unwrap();
        assert!((mean.decomposition.range() - 2.0).abs() < 1e-15);
        assert!((mean.decomposition.minimum() + 1.0).abs() < 1e-15);
        assert!(sup(mean.decomposition.shape().values(), id.values()) < 1e-9);

        let sq = CdfGrid::new(uniform_abscissae(M).into_iter().map(|t: f64| t * t).collect()).unwrap();
        let c = MonotoneDecomposition::new(1.0, 0.0, sq).unwrap();
        let mean = frechet_mean_monotone(&[a, c]).unwrap();
        // oracle: invert q(p) = (p + sqrt p)/2 by bisection
        for t in [0.1, 0.3, 0.5, 0.9] {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if 0.5 * (mid + mid.sqrt()) < t {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((mean.decomposition.shape().evaluate(t) - lo).abs() < 2e-3, "t={t}");
        }
    }
}
