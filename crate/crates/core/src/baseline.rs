//! Transformation-approach means used as competitors: average in a log
//! space, then map back.

use crate::decomp::{POSITIVITY_FLOOR, RANGE_FLOOR};
use crate::domain::{Constraint, SampledTrajectory, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn common_grid<T: Scalar>(trajs: &[SampledTrajectory<T>]) -> Result<&TimeGrid<T>> {
    let first = trajs.first().ok_or_else(|| Error::EmptyInput("no trajectories".into()))?;
    for y in &trajs[1..] {
        if y.grid().len() != first.grid().len() {
            return Err(Error::GridMismatch { left: first.grid().len(), right: y.grid().len() });
        }
        if y.grid().points() != first.grid().points() {
            return Err(Error::InvalidGrid("trajectories are sampled on different grids".into()));
        }
    }
    Ok(first.grid())
}

/// Pointwise geometric mean `exp(n^{-1} sum_i log Y_i(t))`.
pub fn baseline_mean_positive<T: Scalar>(trajs: &[SampledTrajectory<T>]) -> Result<SampledTrajectory<T>> {
    let grid = common_grid(trajs)?;
    if trajs.iter().any(|y| y.values().iter().any(|&v| !(v > T::zero()))) {
        return Err(Error::ConstraintViolation("geometric mean needs positive trajectories".into()));
    }
    let nn = T::from_usize_lossy(trajs.len());
    let values = (0..grid.len())
        .map(|k| (trajs.iter().map(|y| y.values()[k].ln()).sum::<T>() / nn).exp())
        .collect();
    SampledTrajectory::new(grid.clone(), values, Constraint::Positive)
}

/// Log-derivative mean: average the logs of the first-difference slopes
/// (floored at the positivity floor), exponentiate, integrate, normalize and
/// rescale by the mean minimum and mean range.
pub fn baseline_mean_monotone<T: Scalar>(trajs: &[SampledTrajectory<T>]) -> Result<SampledTrajectory<T>> {
    let grid = common_grid(trajs)?;
    if trajs.iter().any(|y| y.values().windows(2).any(|w| w[1] < w[0])) {
        return Err(Error::ConstraintViolation("log-derivative mean needs nondecreasing trajectories".into()));
    }
    let ts = grid.points();
    let k = ts.len();
    let nn = T::from_usize_lossy(trajs.len());
    let eps = T::lit(POSITIVITY_FLOOR);
    let mut lambda = T::zero();
    let mut rho = T::zero();
    for y in trajs {
        let lo = y.evaluate(T::zero())?;
        lambda += lo;
        rho += y.evaluate(T::one())? - lo;
    }
    lambda /= nn;
    rho /= nn;
    if !(rho > T::lit(RANGE_FLOOR)) {
        return Err(Error::NearConstant(rho.to_f64().unwrap_or(f64::NAN)));
    }
    let mut cum = vec![T::zero(); k];
    for j in 0..k - 1 {
        let dt = ts[j + 1] - ts[j];
        let mean_log = trajs
            .iter()
            .map(|y| ((y.values()[j + 1] - y.values()[j]) / dt).max(eps).ln())
            .sum::<T>()
            / nn;
        cum[j + 1] = cum[j] + mean_log.exp() * dt;
    }
    let total = cum[k - 1];
    let values = cum.iter().map(|&c| lambda + rho * c / total).collect();
    SampledTrajectory::new(grid.clone(), values, Constraint::Monotone)
}
