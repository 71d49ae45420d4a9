//! Small sample-moment and ranking utilities shared by the estimators.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample covariance with an `n - 1` denominator.
pub fn covariance(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mx = mean(x);
    let my = mean(y);
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    s / (x.len() as f64 - 1.0)
}

pub fn variance(x: &[f64]) -> f64 {
    covariance(x, x)
}

/// Sample Pearson correlation; `None` when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let vx = variance(x);
    let vy = variance(y);
    if !(vx > 0.0 && vy > 0.0) {
        return None;
    }
    Some(covariance(x, y) / (vx * vy).sqrt())
}

/// Sample covariance matrix of the columns of `x`.
pub fn covariance_matrix(x: ArrayView2<f64>) -> nalgebra::DMatrix<f64> {
    let cols: Vec<Vec<f64>> = x.axis_iter(Axis(1)).map(|c| c.to_vec()).collect();
    let q = cols.len();
    nalgebra::DMatrix::from_fn(q, q, |a, b| covariance(&cols[a], &cols[b]))
}

/// Ranks `1..=n` with ties replaced by their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Column-wise `(x - mean) / sd`; returns the offending column index if one
/// has zero variance.
pub fn standardize_columns(x: ArrayView2<f64>) -> Result<Array2<f64>, usize> {
    let mut out = x.to_owned();
    for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
        let v = col.to_vec();
        let sd = variance(&v).sqrt();
        if !sd.is_finite() || sd <= 0.0 {
            return Err(j);
        }
        let m = mean(&v);
        col.mapv_inplace(|a| (a - m) / sd);
    }
    Ok(out)
}

pub fn column(x: ArrayView2<f64>, j: usize) -> Vec<f64> {
    x.column(j).to_vec()
}

pub fn to_vec(x: ArrayView1<f64>) -> Vec<f64> {
    x.to_vec()
}

/// Standard normal CDF through the complementary error function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

pub fn digamma(x: f64) -> f64 {
    statrs::function::gamma::digamma(x)
}
