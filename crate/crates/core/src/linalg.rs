//! Small dense symmetric eigen-solver used for covariance inversion.

use crate::scalar::Scalar;

/// Eigen-decomposition of a symmetric `p x p` matrix stored row-major, by
/// cyclic Jacobi rotations. Returns `(eigenvalues, eigenvectors)` with the
/// eigenvectors as columns of a row-major matrix.
pub(crate) fn symmetric_eigen<T: Scalar>(a: &[T], p: usize) -> (Vec<T>, Vec<T>) {
    let mut m = a.to_vec();
    let mut v = vec![T::zero(); p * p];
    for i in 0..p {
        v[i * p + i] = T::one();
    }
    let tiny = T::epsilon() * T::epsilon();
    for _sweep in 0..64 {
        let off: T = (0..p)
            .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * p + j] * m[i * p + j])
            .sum();
        let diag: T = (0..p).map(|i| m[i * p + i] * m[i * p + i]).sum();
        if off <= tiny * diag.max(T::min_positive_value()) {
            break;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let aij = m[i * p + j];
                if aij == T::zero() {
                    continue;
                }
                let theta = (m[j * p + j] - m[i * p + i]) / (T::lit(2.0) * aij);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..p {
                    let mki = m[k * p + i];
                    let mkj = m[k * p + j];
                    m[k * p + i] = c * mki - s * mkj;
                    m[k * p + j] = s * mki + c * mkj;
                }
                for k in 0..p {
                    let mik = m[i * p + k];
                    let mjk = m[j * p + k];
                    m[i * p + k] = c * mik - s * mjk;
                    m[j * p + k] = s * mik + c * mjk;
                }
                for k in 0..p {
                    let vki = v[k * p + i];
                    let vkj = v[k * p + j];
                    v[k * p + i] = c * vki - s * vkj;
                    v[k * p + j] = s * vki + c * vkj;
                }
            }
        }
    }
    ((0..p).map(|i| m[i * p + i]).collect(), v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_matrix() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 2.0];
        let (w, v) = symmetric_eigen(&a, 3);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| v[i * 3 + k] * w[k] * v[j * 3 + k]).sum();
                assert!((r - a[i * 3 + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_input() {
        let (w, _) = symmetric_eigen(&[2.0, 0.0, 0.0, 5.0], 2);
        assert_eq!(w, vec![2.0, 5.0]);
    }
}
