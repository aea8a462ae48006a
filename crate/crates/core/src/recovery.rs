//! Bin-averaging recovery of latent trajectories from noisy observations.

use crate::domain::{Constraint, SampledTrajectory, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Noisy measurements `Z_ij` of one subject at increasing times in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawObservations<T> {
    times: TimeGrid<T>,
    values: Vec<T>,
}

impl<T: Scalar> RawObservations<T> {
    pub fn new(times: TimeGrid<T>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::LengthMismatch(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InsufficientData("non-finite observation".into()));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &TimeGrid<T> {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::from_usize_lossy(self.values.len())
    }
}

/// `L` equal-width bins `[(l-1)/L, l/L]` covering `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinSpec<T> {
    width: T,
    count: usize,
}

impl<T: Scalar> BinSpec<T> {
    /// Bins of width close to `width`: `L = round(1/width)` and the width is
    /// snapped to `1/L`.
    pub fn new(width: T) -> Result<Self> {
        if !(width > T::zero() && width <= T::one()) {
            return Err(Error::InvalidConfig(format!("bin width {width} outside (0, 1]")));
        }
        let count = (T::one() / width).round().to_usize().unwrap_or(1).max(1);
        Self::with_count(count)
    }

    pub fn with_count(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidConfig("bin count must be at least 1".into()));
        }
        Ok(Self { width: T::one() / T::from_usize_lossy(count), count })
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Zero-based bin index. Bins are right-closed (`t = l/L` belongs to bin
    /// `l`), and `t = 0` belongs to the first bin.
    pub fn index_of(&self, t: T) -> usize {
        let scaled = t * T::from_usize_lossy(self.count);
        let slack = T::lit(1e-10).max(T::epsilon() * T::lit(8.0)) * T::from_usize_lossy(self.count);
        let l = (scaled - slack).ceil().to_isize().unwrap_or(1);
        (l.max(1) as usize).min(self.count) - 1
    }
}

/// Snaps a bin width so that `1/width` is an integer, never going below
/// `lower`.
fn snap_width<T: Scalar>(gamma: T, lower: T) -> T {
    let mut count = (T::one() / gamma).round().to_usize().unwrap_or(1).max(1);
    let mut snapped = T::one() / T::from_usize_lossy(count);
    if snapped < lower && count > 1 {
        count = (T::one() / lower).floor().to_usize().unwrap_or(1).max(1);
        snapped = T::one() / T::from_usize_lossy(count);
    }
    snapped
}

/// `(log n / N)^(1/3)` clamped to `[1/N, 1/2]`, before snapping.
pub fn raw_bin_width<T: Scalar>(n: T, min_obs: T) -> T {
    let raw = (n.ln() / min_obs).cbrt();
    raw.max(T::one() / min_obs).min(T::lit(0.5))
}

/// Default bin width for `n` subjects with at least `min_obs` observations
/// each on equidistant grids.
pub fn default_bin_width<T: Scalar>(n: usize, min_obs: usize) -> T {
    let nn = T::from_usize_lossy(n.max(2));
    let big = T::from_usize_lossy(min_obs.max(1));
    snap_width(raw_bin_width(nn, big), T::one() / big)
}

/// `(delta0 * log n)^(1/3)` clamped to `[delta0, 1/2]`, before snapping.
pub fn raw_bin_width_irregular<T: Scalar>(n: T, max_spacing: T) -> T {
    let raw = (max_spacing * n.ln()).cbrt();
    raw.max(max_spacing).min(T::lit(0.5))
}

/// Default bin width for irregular grids with maximum spacing `max_spacing`.
pub fn default_bin_width_irregular<T: Scalar>(n: usize, max_spacing: T) -> T {
    let nn = T::from_usize_lossy(n.max(2));
    let raw = raw_bin_width_irregular(nn, max_spacing);
    snap_width(raw, max_spacing.min(T::lit(0.5)))
}

/// Piecewise-constant estimate: one level per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct StepEstimate<T> {
    bins: BinSpec<T>,
    levels: Vec<T>,
}

impl<T: Scalar> StepEstimate<T> {
    pub fn bins(&self) -> &BinSpec<T> {
        &self.bins
    }

    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    pub fn evaluate(&self, t: T) -> T {
        self.levels[self.bins.index_of(t)]
    }

    /// Value at `t = 0`.
    pub fn first(&self) -> T {
        self.levels[0]
    }

    /// Value at `t = 1`.
    pub fn last(&self) -> T {
        self.levels[self.levels.len() - 1]
    }

    pub fn to_trajectory(&self, grid: TimeGrid<T>) -> Result<SampledTrajectory<T>> {
        let values = grid.points().iter().map(|&t| self.evaluate(t)).collect();
        SampledTrajectory::new(grid, values, Constraint::Unconstrained)
    }
}

/// Bin means of the observations. Empty bins take the value of the nearest
/// nonempty bin, ties going to the left.
pub fn recover_steps<T: Scalar>(obs: &RawObservations<T>, bins: &BinSpec<T>) -> Result<StepEstimate<T>> {
    let l = bins.count();
    let mut sums = vec![T::zero(); l];
    let mut counts = vec![0usize; l];
    for (&t, &z) in obs.times().points().iter().zip(obs.values()) {
        let b = bins.index_of(t);
        sums[b] += z;
        counts[b] += 1;
    }
    let filled: Vec<usize> = (0..l).filter(|&b| counts[b] > 0).collect();
    if filled.is_empty() {
        return Err(Error::InsufficientData("every bin is empty".into()));
    }
    let means: Vec<Option<T>> = (0..l)
        .map(|b| (counts[b] > 0).then(|| sums[b] / T::from_usize_lossy(counts[b])))
        .collect();
    let levels = (0..l)
        .map(|b| match means[b] {
            Some(v) => v,
            None => {
                // nearest filled bin; on equal distance the left one wins
                let k = filled.partition_point(|&f| f < b);
                let right = filled.get(k).copied();
                let left = k.checked_sub(1).map(|i| filled[i]);
                let src = match (left, right) {
                    (Some(a), Some(c)) => {
                        if b - a <= c - b {
                            a
                        } else {
                            c
                        }
                    }
                    (Some(a), None) => a,
                    (None, Some(c)) => c,
                    (None, None) => unreachable!(),
                };
                means[src].expect("filled bin has a mean")
            }
        })
        .collect();
    Ok(StepEstimate { bins: *bins, levels })
}

/// Step-function estimate of the latent trajectory, sampled on `out_grid`.
pub fn recover_trajectory<T: Scalar>(
    obs: &RawObservations<T>,
    bins: &BinSpec<T>,
    out_grid: TimeGrid<T>,
) -> Result<SampledTrajectory<T>> {
    recover_steps(obs, bins)?.to_trajectory(out_grid)
}
