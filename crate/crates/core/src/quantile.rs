//! Density, distribution and quantile representations of shapes on `[0, 1]`,
//! the 2-Wasserstein distance between them, projection onto the space of
//! quantile functions and weighted quantile barycenters.

use crate::domain::{
    cumulative_trapezoid_uniform, invariant_tol, trapezoid_uniform, uniform_abscissae, CdfGrid,
    DensityGrid, QuantileGrid,
};
use crate::error::{Error, Result};
use crate::isotonic::pava;
use crate::scalar::Scalar;

/// Slope floor used when a quantile function is flat.
pub const FLAT_SLOPE_FLOOR: f64 = 1e-8;

/// Generalized inverse of a nondecreasing function `y` given on the uniform
/// grid `x_k = k/(K-1)` with values in `[0, 1]`, evaluated at `m` uniform
/// levels.
///
/// For a level `p > 0` this is `inf { x : y(x) >= p }` with `y` linearly
/// interpolated between grid points. At `p = 0` the right limit
/// `inf { x : y(x) > 0 }` is used, so a distribution supported away from 0
/// starts at its support.
pub(crate) fn generalized_inverse<T: Scalar>(y: &[T], m: usize) -> Vec<T> {
    let kk = y.len();
    let h = T::one() / T::from_usize_lossy(kk - 1);
    let xs = uniform_abscissae::<T>(kk);
    let levels = uniform_abscissae::<T>(m);
    let mut out = Vec::with_capacity(m);

    // p = 0: right limit
    let first_pos = y.iter().position(|&v| v > T::zero());
    out.push(match first_pos {
        Some(0) | None => T::zero(),
        Some(k) => xs[k - 1],
    });

    let mut k = 0usize;
    for &p in levels.iter().skip(1) {
        while k < kk && y[k] < p {
            k += 1;
        }
        let x = if k == kk {
            T::one()
        } else if k == 0 {
            T::zero()
        } else {
            let (y0, y1) = (y[k - 1], y[k]);
            xs[k - 1] + (p - y0) / (y1 - y0) * h
        };
        out.push(x.max(T::zero()).min(T::one()));
    }
    // guard against rounding making the sequence dip
    for j in 1..m {
        if out[j] < out[j - 1] {
            out[j] = out[j - 1];
        }
    }
    out
}

/// Quantile function of a density: cumulative trapezoid integral rescaled to
/// end at exactly 1, then inverted.
pub fn quantile_from_density<T: Scalar>(f: &DensityGrid<T>) -> Result<QuantileGrid<T>> {
    let mut cdf = cumulative_trapezoid_uniform(f.values());
    let total = cdf[cdf.len() - 1];
    if !(total > T::zero()) {
        return Err(Error::InvalidDensity(format!("integral {total} is not positive")));
    }
    cdf.iter_mut().for_each(|c| *c /= total);
    let last = cdf.len() - 1;
    cdf[last] = T::one();
    QuantileGrid::new(generalized_inverse(&cdf, f.len()))
}

pub fn quantile_from_cdf<T: Scalar>(f: &CdfGrid<T>) -> Result<QuantileGrid<T>> {
    QuantileGrid::new(generalized_inverse(f.values(), f.len()))
}

/// Distribution function of a quantile function, with endpoints pinned to 0
/// and 1.
pub fn cdf_from_quantile<T: Scalar>(q: &QuantileGrid<T>) -> Result<CdfGrid<T>> {
    let mut f = generalized_inverse(q.values(), q.len());
    // the inverse is left-continuous; ties at the top resolve to the level
    // where Q first reaches t, which is the CDF value at t
    let last = f.len() - 1;
    f[0] = T::zero();
    f[last] = T::one();
    CdfGrid::repaired(f)
}

/// Density of the distribution with quantile function `q`, sampled on the
/// uniform time grid of the same length.
///
/// The density at level midpoints is the reciprocal slope of `q`; flat
/// stretches get a slope floor of [`FLAT_SLOPE_FLOOR`]. Values are
/// interpolated onto the time grid and renormalized to unit integral.
pub fn density_from_quantile<T: Scalar>(q: &QuantileGrid<T>) -> Result<DensityGrid<T>> {
    let m = q.len();
    let qv = q.values();
    let h = T::one() / T::from_usize_lossy(m - 1);
    let floor = T::lit(FLAT_SLOPE_FLOOR) * h;

    let flat = qv.windows(2).filter(|w| w[1] - w[0] < floor).count();
    if 2 * flat > m - 1 {
        return Err(Error::DegenerateDistribution(format!(
            "quantile function flat on {flat} of {} level steps",
            m - 1
        )));
    }

    let half = T::lit(0.5);
    let mut centers = Vec::with_capacity(m - 1);
    let mut dens = Vec::with_capacity(m - 1);
    let mut pos = qv[0];
    for w in qv.windows(2) {
        let step = (w[1] - w[0]).max(floor);
        centers.push(pos + half * step);
        dens.push(h / step);
        pos += step;
    }
    let (lo, hi) = (qv[0], pos);
    let slack = invariant_tol::<T>();

    let ts = uniform_abscissae::<T>(m);
    let values: Vec<T> = ts
        .iter()
        .map(|&t| {
            if t < lo - slack || t > hi + slack {
                T::zero()
            } else {
                interp_extrapolate(&centers, &dens, t)
            }
        })
        .collect();
    DensityGrid::normalized(values).map_err(|_| {
        Error::DegenerateDistribution("distribution support is below grid resolution".into())
    })
}

/// Linear interpolation with clamped linear extrapolation at both ends.
fn interp_extrapolate<T: Scalar>(xs: &[T], ys: &[T], t: T) -> T {
    let n = xs.len();
    if n == 1 {
        return ys[0];
    }
    let edge = |i0: usize, i1: usize| {
        let (x0, x1, y0, y1) = (xs[i0], xs[i1], ys[i0], ys[i1]);
        let v = if x1 > x0 { y0 + (y1 - y0) * (t - x0) / (x1 - x0) } else { y0 };
        v.max(T::zero()).min(y0.max(y1))
    };
    if t <= xs[0] {
        return edge(0, 1);
    }
    if t >= xs[n - 1] {
        return edge(n - 1, n - 2);
    }
    let k = xs.partition_point(|&x| x <= t);
    let (x0, x1) = (xs[k - 1], xs[k]);
    if x1 <= x0 {
        return ys[k].max(ys[k - 1]);
    }
    ys[k - 1] + (ys[k] - ys[k - 1]) * (t - x0) / (x1 - x0)
}

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch { left: a, right: b });
    }
    Ok(())
}

/// 2-Wasserstein distance: L2 distance between quantile functions,
/// trapezoid quadrature over levels.
pub fn wasserstein<T: Scalar>(q1: &QuantileGrid<T>, q2: &QuantileGrid<T>) -> Result<T> {
    same_len(q1.len(), q2.len())?;
    Ok(l2_distance_uniform(q1.values(), q2.values()))
}

pub(crate) fn l2_distance_uniform<T: Scalar>(a: &[T], b: &[T]) -> T {
    let sq: Vec<T> = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).collect();
    trapezoid_uniform(&sq).max(T::zero()).sqrt()
}

/// Orthogonal projection onto nondecreasing sequences with values in
/// `[0, 1]`: isotonic regression followed by clipping.
pub fn project_to_quantile_space<T: Scalar>(raw: &[T]) -> Result<QuantileGrid<T>> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidShape("non-finite value in projection input".into()));
    }
    let iso = pava(raw);
    QuantileGrid::new(iso.into_iter().map(|v| v.max(T::zero()).min(T::one())).collect())
}

/// Weighted mean of quantile functions, `n^{-1} sum_i w_i Q_i`, projected
/// back onto the quantile space. Weights must average to one.
pub fn quantile_barycenter<T: Scalar>(qs: &[QuantileGrid<T>], weights: &[T]) -> Result<QuantileGrid<T>> {
    let raw = weighted_quantile_mean(qs, weights)?;
    project_to_quantile_space(&raw)
}

/// Pointwise `n^{-1} sum_i w_i Q_i`, before projection.
pub fn weighted_quantile_mean<T: Scalar>(qs: &[QuantileGrid<T>], weights: &[T]) -> Result<Vec<T>> {
    if qs.is_empty() {
        return Err(Error::EmptyInput("no quantile functions".into()));
    }
    if qs.len() != weights.len() {
        return Err(Error::LengthMismatch(format!(
            "{} quantile functions, {} weights",
            qs.len(),
            weights.len()
        )));
    }
    let m = qs[0].len();
    for q in qs {
        same_len(m, q.len())?;
    }
    let n = T::from_usize_lossy(qs.len());
    let mean_w = weights.iter().copied().sum::<T>() / n;
    if (mean_w - T::one()).abs() > T::lit(1e-8).max(T::epsilon() * n * T::lit(16.0)) {
        return Err(Error::WeightNormalization(mean_w.to_f64().unwrap_or(f64::NAN)));
    }
    let mut acc = vec![T::zero(); m];
    for (q, &w) in qs.iter().zip(weights) {
        for (a, &v) in acc.iter_mut().zip(q.values()) {
            *a += w * v;
        }
    }
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}
