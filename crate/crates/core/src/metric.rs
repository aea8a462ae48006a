//! Product metrics on size-shape decompositions: Euclidean on the size part,
//! 2-Wasserstein on the shape part.

use crate::domain::{MetricWeights, MonotoneDecomposition, PositiveDecomposition};
use crate::error::{Error, Result};
use crate::quantile::{quantile_from_cdf, quantile_from_density, wasserstein};
use crate::scalar::Scalar;

/// `sqrt(w_size * (tau_a - tau_b)^2 + w_shape * d_W(f_a, f_b)^2)`.
pub fn metric_positive<T: Scalar>(
    a: &PositiveDecomposition<T>,
    b: &PositiveDecomposition<T>,
    w: MetricWeights<T>,
) -> Result<T> {
    if a.shape().len() != b.shape().len() {
        return Err(Error::GridMismatch { left: a.shape().len(), right: b.shape().len() });
    }
    let ds = a.size() - b.size();
    let dw = wasserstein(&quantile_from_density(a.shape())?, &quantile_from_density(b.shape())?)?;
    Ok((w.size() * ds * ds + w.shape() * dw * dw).sqrt())
}

/// `sqrt(w_size * [(rho_a - rho_b)^2 + (lambda_a - lambda_b)^2] + w_shape * d_W(F_a, F_b)^2)`.
pub fn metric_monotone<T: Scalar>(
    a: &MonotoneDecomposition<T>,
    b: &MonotoneDecomposition<T>,
    w: MetricWeights<T>,
) -> Result<T> {
    if a.shape().len() != b.shape().len() {
        return Err(Error::GridMismatch { left: a.shape().len(), right: b.shape().len() });
    }
    let dr = a.range() - b.range();
    let dl = a.minimum() - b.minimum();
    let dw = wasserstein(&quantile_from_cdf(a.shape())?, &quantile_from_cdf(b.shape())?)?;
    Ok((w.size() * (dr * dr + dl * dl) + w.shape() * dw * dw).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{uniform_abscissae, CdfGrid, DensityGrid};

    const M: usize = 1001;

    fn pos(size: f64, f: impl Fn(f64) -> f64) -> PositiveDecomposition<f64> {
        let shape = DensityGrid::normalized(uniform_abscissae(M).into_iter().map(f).collect()).unwrap();
        PositiveDecomposition::new(size, shape).unwrap()
    }

    #[test]
    fn positive_identity_and_size_only() {
        let a = pos(2.0, |_| 1.0);
        let b = pos(1.0, |_| 1.0);
        let w = MetricWeights::default();
        assert_eq!(metric_positive(&a, &a, w).unwrap(), 0.0);
        assert!((metric_positive(&a, &b, w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn positive_shape_only_uniform_halves() {
        let a = pos(1.0, |_| 1.0);
        let b = pos(1.0, |t| if t <= 0.5 { 2.0 } else { 0.0 });
        let w = MetricWeights::new(0.0, 1.0).unwrap();
        let d = metric_positive(&a, &b, w).unwrap();
        assert!((d - 1.0 / 12f64.sqrt()).abs() < 1e-3, "{d}");
    }

    #[test]
    fn monotone_examples() {
        let id = CdfGrid::<f64>::identity(M).unwrap();
        let a = MonotoneDecomposition::new(1.0, 0.0, id.clone()).unwrap();
        let b = MonotoneDecomposition::new(2.0, 0.0, id.clone()).unwrap();
        let c = MonotoneDecomposition::new(1.0, 1.0, id).unwrap();
        let w = MetricWeights::default();
        assert_eq!(metric_monotone(&a, &a, w).unwrap(), 0.0);
        assert!((metric_monotone(&a, &b, w).unwrap() - 1.0).abs() < 1e-12);
        assert!((metric_monotone(&a, &c, w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grids() {
        let a = pos(1.0, |_| 1.0);
        let b = PositiveDecomposition::new(1.0, DensityGrid::uniform(11).unwrap()).unwrap();
        assert!(matches!(
            metric_positive(&a, &b, MetricWeights::default()),
            Err(Error::GridMismatch { .. })
        ));
    }
}
