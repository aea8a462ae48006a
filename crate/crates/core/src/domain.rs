//! Domain types: time grids, sampled trajectories, shape grids and
//! size-shape decompositions.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default number of points of the shared shape grid.
pub const DEFAULT_SHAPE_LEN: usize = 1001;

/// Tolerance used when validating normalization and endpoint invariants.
pub(crate) fn invariant_tol<T: Scalar>() -> T {
    T::lit(1e-8).max(T::epsilon() * T::lit(256.0))
}

/// Strictly increasing time points in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<T> {
    points: Vec<T>,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(points: Vec<T>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite time point".into()));
        }
        if points[0] < T::zero() || points[points.len() - 1] > T::one() {
            return Err(Error::InvalidGrid("points must lie in [0, 1]".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("points must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// `m` equispaced points `0, 1/(m-1), ..., 1`.
    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(uniform_abscissae(m))
    }

    /// `n` cell midpoints `(j - 1/2) / n`, `j = 1..=n`.
    pub fn midpoints(n: usize) -> Result<Self> {
        let nn = T::from_usize_lossy(n);
        let half = T::lit(0.5);
        Self::new((1..=n).map(|j| (T::from_usize_lossy(j) - half) / nn).collect())
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest gap between consecutive points, including the gaps to the
    /// ends of `[0, 1]`.
    pub fn max_spacing(&self) -> T {
        let first = self.points[0];
        let last = T::one() - self.points[self.points.len() - 1];
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(first.max(last), T::max)
    }
}

/// Shape constraint carried by a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    Positive,
    Monotone,
    Unconstrained,
}

/// A function on `[0, 1]` known through its values on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrajectory<T> {
    grid: TimeGrid<T>,
    values: Vec<T>,
    constraint: Constraint,
}

impl<T: Scalar> SampledTrajectory<T> {
    pub fn new(grid: TimeGrid<T>, values: Vec<T>, constraint: Constraint) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch(format!(
                "{} grid points but {} values",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::ConstraintViolation("non-finite trajectory value".into()));
        }
        match constraint {
            Constraint::Positive if values.iter().any(|&v| v <= T::zero()) => {
                return Err(Error::ConstraintViolation(
                    "positive trajectory has a non-positive value".into(),
                ))
            }
            Constraint::Monotone if values.windows(2).any(|w| w[1] < w[0]) => {
                return Err(Error::ConstraintViolation(
                    "monotone trajectory decreases".into(),
                ))
            }
            _ => {}
        }
        Ok(Self { grid, values, constraint })
    }

    /// Builds a trajectory by evaluating `f` on `grid`.
    pub fn from_fn(grid: TimeGrid<T>, constraint: Constraint, f: impl Fn(T) -> T) -> Result<Self> {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        Self::new(grid, values, constraint)
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    /// Piecewise-linear interpolation; constant beyond the first and last
    /// grid point.
    pub fn evaluate(&self, t: T) -> Result<T> {
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::Domain(t.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(interp_sorted(self.grid.points(), &self.values, t))
    }

    /// Trapezoid integral over the trajectory's own grid (no extension
    /// beyond the first and last point).
    pub fn integral(&self) -> T {
        trapezoid(self.grid.points(), &self.values)
    }
}

/// Linear interpolation on sorted abscissae with constant extension.
pub(crate) fn interp_sorted<T: Scalar>(xs: &[T], ys: &[T], t: T) -> T {
    let n = xs.len();
    if t <= xs[0] {
        return ys[0];
    }
    if t >= xs[n - 1] {
        return ys[n - 1];
    }
    // first index with xs[k] > t
    let k = xs.partition_point(|&x| x <= t);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (t - x0) / (x1 - x0);
    ys[k - 1] + w * (ys[k] - ys[k - 1])
}

/// Linear interpolation of values given on the uniform grid `k/(m-1)`.
pub(crate) fn interp_uniform<T: Scalar>(ys: &[T], t: T) -> T {
    let m = ys.len();
    let last = m - 1;
    let pos = t.max(T::zero()).min(T::one()) * T::from_usize_lossy(last);
    let k = pos.floor().to_usize().unwrap_or(0).min(last);
    if k == last {
        return ys[last];
    }
    let w = pos - T::from_usize_lossy(k);
    ys[k] + w * (ys[k + 1] - ys[k])
}

pub fn uniform_abscissae<T: Scalar>(m: usize) -> Vec<T> {
    if m < 2 {
        return vec![T::zero(); m];
    }
    let d = T::from_usize_lossy(m - 1);
    (0..m)
        .map(|k| if k == m - 1 { T::one() } else { T::from_usize_lossy(k) / d })
        .collect()
}

/// Trapezoid rule on arbitrary sorted abscissae.
pub fn trapezoid<T: Scalar>(xs: &[T], ys: &[T]) -> T {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]))
        .sum::<T>()
        * T::lit(0.5)
}

/// Trapezoid rule for values on the uniform grid over `[0, 1]`.
pub fn trapezoid_uniform<T: Scalar>(ys: &[T]) -> T {
    let m = ys.len();
    if m < 2 {
        return T::zero();
    }
    let h = T::one() / T::from_usize_lossy(m - 1);
    let inner: T = ys.iter().copied().sum();
    h * (inner - T::lit(0.5) * (ys[0] + ys[m - 1]))
}

/// Cumulative trapezoid integral on the uniform grid, starting at 0.
pub(crate) fn cumulative_trapezoid_uniform<T: Scalar>(ys: &[T]) -> Vec<T> {
    let m = ys.len();
    let h = T::one() / T::from_usize_lossy(m - 1);
    let half = T::lit(0.5);
    let mut out = Vec::with_capacity(m);
    let mut acc = T::zero();
    out.push(acc);
    for w in ys.windows(2) {
        acc += half * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

fn check_shape_len(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidShape(format!("need at least 2 points, got {m}")));
    }
    Ok(())
}

/// Probability density on `[0, 1]` sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid<T> {
    values: Vec<T>,
}

impl<T: Scalar> DensityGrid<T> {
    /// Validates nonnegativity and unit trapezoid integral.
    pub fn new(values: Vec<T>) -> Result<Self> {
        check_shape_len(values.len())?;
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidDensity("values must be finite and nonnegative".into()));
        }
        let mass = trapezoid_uniform(&values);
        if (mass - T::one()).abs() > invariant_tol() {
            return Err(Error::InvalidDensity(format!("integral {mass} differs from 1")));
        }
        Ok(Self { values })
    }

    /// Rescales nonnegative values to unit trapezoid integral.
    pub fn normalized(mut values: Vec<T>) -> Result<Self> {
        check_shape_len(values.len())?;
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidDensity("values must be finite and nonnegative".into()));
        }
        let mass = trapezoid_uniform(&values);
        if !(mass > T::zero()) {
            return Err(Error::InvalidDensity(format!("non-normalizable, integral {mass}")));
        }
        values.iter_mut().for_each(|v| *v /= mass);
        Ok(Self { values })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![T::one(); m])
    }

    #[cfg(test)]
    pub(crate) fn unchecked(values: Vec<T>) -> Self {
        Self { values }
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

    pub fn abscissae(&self) -> Vec<T> {
        uniform_abscissae(self.values.len())
    }

    pub fn evaluate(&self, t: T) -> T {
        interp_uniform(&self.values, t)
    }
}

/// Distribution function on `[0, 1]` with `F(0) = 0`, `F(1) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfGrid<T> {
    values: Vec<T>,
}

impl<T: Scalar> CdfGrid<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        check_shape_len(values.len())?;
        let tol = invariant_tol::<T>();
        if values.iter().any(|v| !v.is_finite() || *v < T::zero() || *v > T::one()) {
            return Err(Error::InvalidShape("cdf values must lie in [0, 1]".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidShape("cdf must be nondecreasing".into()));
        }
        if values[0].abs() > tol || (values[values.len() - 1] - T::one()).abs() > tol {
            return Err(Error::InvalidShape("cdf must run from 0 to 1".into()));
        }
        Ok(Self { values })
    }

    /// Clips to `[0, 1]`, replaces by its running maximum and pins the
    /// endpoints. Only valid for inputs that are already nearly a CDF.
    pub(crate) fn repaired(mut values: Vec<T>) -> Result<Self> {
        check_shape_len(values.len())?;
        let mut run = T::zero();
        for v in values.iter_mut() {
            let c = v.max(T::zero()).min(T::one());
            run = run.max(c);
            *v = run;
        }
        let last = values.len() - 1;
        values[0] = T::zero();
        values[last] = T::one();
        Self::new(values)
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::new(uniform_abscissae(m))
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

    pub fn abscissae(&self) -> Vec<T> {
        uniform_abscissae(self.values.len())
    }

    pub fn evaluate(&self, t: T) -> T {
        interp_uniform(&self.values, t)
    }
}

/// Quantile function on probability levels `k/(m-1)`, nondecreasing with
/// ordinates in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileGrid<T> {
    values: Vec<T>,
}

impl<T: Scalar> QuantileGrid<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        check_shape_len(values.len())?;
        if values.iter().any(|v| !v.is_finite() || *v < T::zero() || *v > T::one()) {
            return Err(Error::InvalidShape("quantile values must lie in [0, 1]".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidShape("quantile must be nondecreasing".into()));
        }
        Ok(Self { values })
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::new(uniform_abscissae(m))
    }

    pub fn from_fn(m: usize, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(uniform_abscissae(m).into_iter().map(f).collect())
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

    pub fn levels(&self) -> Vec<T> {
        uniform_abscissae(self.values.len())
    }

    pub fn evaluate(&self, p: T) -> T {
        interp_uniform(&self.values, p)
    }
}

/// `Y = size * shape` for a positive trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveDecomposition<T> {
    size: T,
    shape: DensityGrid<T>,
}

impl<T: Scalar> PositiveDecomposition<T> {
    pub fn new(size: T, shape: DensityGrid<T>) -> Result<Self> {
        if !(size > T::zero()) || !size.is_finite() {
            return Err(Error::DegenerateSize(format!("size {size} must be positive")));
        }
        Ok(Self { size, shape })
    }

    pub fn size(&self) -> T {
        self.size
    }

    pub fn shape(&self) -> &DensityGrid<T> {
        &self.shape
    }
}

/// `Y = minimum + range * shape` for a monotone trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneDecomposition<T> {
    range: T,
    minimum: T,
    shape: CdfGrid<T>,
}

impl<T: Scalar> MonotoneDecomposition<T> {
    pub fn new(range: T, minimum: T, shape: CdfGrid<T>) -> Result<Self> {
        if !(range > T::zero()) || !range.is_finite() {
            return Err(Error::DegenerateSize(format!("range {range} must be positive")));
        }
        if !minimum.is_finite() {
            return Err(Error::DegenerateSize("minimum must be finite".into()));
        }
        Ok(Self { range, minimum, shape })
    }

    pub fn range(&self) -> T {
        self.range
    }

    pub fn minimum(&self) -> T {
        self.minimum
    }

    pub fn shape(&self) -> &CdfGrid<T> {
        &self.shape
    }
}

/// Weights of the size and shape parts of the product metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricWeights<T> {
    size: T,
    shape: T,
}

impl<T: Scalar> MetricWeights<T> {
    pub fn new(size: T, shape: T) -> Result<Self> {
        if !(size >= T::zero()) || !(shape >= T::zero()) {
            return Err(Error::InvalidConfig("metric weights must be nonnegative".into()));
        }
        if size == T::zero() && shape == T::zero() {
            return Err(Error::InvalidConfig("metric weights cannot both be zero".into()));
        }
        Ok(Self { size, shape })
    }

    pub fn size(&self) -> T {
        self.size
    }

    pub fn shape(&self) -> T {
        self.shape
    }
}

impl<T: Scalar> Default for MetricWeights<T> {
    fn default() -> Self {
        Self { size: T::one(), shape: T::one() }
    }
}
