//! Pool-adjacent-violators isotonic regression.

use crate::scalar::Scalar;

/// Least-squares nondecreasing fit to `ys` under the Euclidean norm.
pub fn pava<T: Scalar>(ys: &[T]) -> Vec<T> {
    pava_weighted(ys, None)
}

/// Weighted least-squares nondecreasing fit. Weights must be positive.
pub fn pava_weighted<T: Scalar>(ys: &[T], weights: Option<&[T]>) -> Vec<T> {
    // blocks of (weighted mean, total weight, length)
    let mut blocks: Vec<(T, T, usize)> = Vec::with_capacity(ys.len());
    for (i, &y) in ys.iter().enumerate() {
        let w = weights.map_or(T::one(), |w| w[i]);
        let mut cur = (y, w, 1usize);
        while let Some(&(m, bw, len)) = blocks.last() {
            if m <= cur.0 {
                break;
            }
            blocks.pop();
            let tw = bw + cur.1;
            cur = ((m * bw + cur.0 * cur.1) / tw, tw, len + cur.2);
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(ys.len());
    for (m, _, len) in blocks {
        out.extend(std::iter::repeat_n(m, len));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn already_sorted_is_unchanged() {
        let y = vec![0.1, 0.2, 0.2, 0.7];
        assert_eq!(pava(&y), y);
    }

    #[test]
    fn pools_violators() {
        assert_eq!(pava(&[3.0, 1.0, 2.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(pava(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn weighted_pooling() {
        let out = pava_weighted(&[2.0, 0.0], Some(&[3.0, 1.0]));
        assert_eq!(out, vec![1.5, 1.5]);
    }

    #[test]
    fn empty_input() {
        assert!(pava::<f64>(&[]).is_empty());
    }
}
