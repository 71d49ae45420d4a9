use ndarray::{Array2, ArrayView2};

use crate::rng::{mix, unit_interval};
use crate::stats;

/// Jitter amplitude relative to each column's standard deviation.
pub const JITTER_SCALE: f64 = 1e-9;

/// Adds deterministic sub-resolution noise so distance-based estimators see
/// distinct points. The offset of a cell depends only on `seed`, its row,
/// its column and its value, so identical inputs always jitter identically.
pub fn jitter_columns(x: ArrayView2<f64>, seed: u64) -> Array2<f64> {
    let mut out = x.to_owned();
    for (c, mut col) in out.columns_mut().into_iter().enumerate() {
        let sd = stats::variance(&col.to_vec()).sqrt();
        let amp = if sd > 0.0 && sd.is_finite() {
            sd * JITTER_SCALE
        } else {
            JITTER_SCALE
        };
        for (i, v) in col.iter_mut().enumerate() {
            let h = mix(&[seed, i as u64, c as u64, v.to_bits()]);
            *v += amp * (unit_interval(h) - 0.5);
        }
    }
    out
}

/// Number of rows equal to an earlier row of `[a | b]`.
pub fn count_duplicate_rows(a: ArrayView2<f64>, b: ArrayView2<f64>) -> usize {
    let mut rows: Vec<Vec<u64>> = a
        .rows()
        .into_iter()
        .zip(b.rows())
        .map(|(ra, rb)| ra.iter().chain(rb.iter()).map(|v| v.to_bits()).collect())
        .collect();
    rows.sort_unstable();
    rows.windows(2).filter(|w| w[0] == w[1]).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_duplicates_by_a_tiny_amount() {
        let x = Array2::from_shape_vec((4, 1), vec![1.0, 1.0, 2.0, 3.0]).unwrap();
        let j = jitter_columns(x.view(), 7);
        assert_ne!(j[[0, 0]], j[[1, 0]]);
        for (a, b) in j.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(j, jitter_columns(x.view(), 7));
    }

    #[test]
    fn counts_duplicates() {
        let a = Array2::from_shape_vec((4, 1), vec![1.0, 1.0, 1.0, 2.0]).unwrap();
        let b = Array2::from_shape_vec((4, 1), vec![5.0, 5.0, 6.0, 5.0]).unwrap();
        assert_eq!(count_duplicate_rows(a.view(), b.view()), 1);
    }
}
