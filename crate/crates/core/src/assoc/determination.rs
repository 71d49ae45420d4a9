use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::smoother::{fit_predict, fit_predict_many, SmootherConfig};
use crate::stats;

/// Nonparametric coefficient of determination of `u` on `x`:
/// `1 - Var(u - E[u|x]) / Var(u)`.
pub fn r_squared(u: &[f64], x: ArrayView2<f64>, config: &SmootherConfig) -> Result<f64> {
    check_outcome(u)?;
    let fit = fit_predict(x, u, config)?;
    r_squared_from_fit(u, &fit)
}

/// Coefficient of determination given already fitted values.
pub fn r_squared_from_fit(u: &[f64], fitted: &[f64]) -> Result<f64> {
    let total = check_outcome(u)?;
    let resid: Vec<f64> = u.iter().zip(fitted).map(|(a, b)| a - b).collect();
    Ok(1.0 - stats::variance(&resid) / total)
}

fn check_outcome(u: &[f64]) -> Result<f64> {
    let v = stats::variance(u);
    if v.is_nan() || v <= 0.0 {
        return Err(Error::DegenerateOutcome("outcome has zero variance".into()));
    }
    Ok(v)
}

/// One minus the Wilks-type ratio `det Cov(residual) / det Cov(outcome)`
/// for the multivariate regression of the columns of `outcomes` on `x`.
pub fn coefficient_w(
    outcomes: ArrayView2<f64>,
    x: ArrayView2<f64>,
    config: &SmootherConfig,
) -> Result<f64> {
    if outcomes.ncols() == 0 {
        return Err(Error::invalid("coefficient W needs at least one outcome"));
    }
    if outcomes.nrows() != x.nrows() {
        return Err(Error::DimensionMismatch {
            what: "outcome rows",
            expected: x.nrows(),
            got: outcomes.nrows(),
        });
    }
    outcome_determinant(outcomes)?;
    let cols: Vec<Vec<f64>> = outcomes.columns().into_iter().map(|c| c.to_vec()).collect();
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    let fits = fit_predict_many(x, &refs, config)?;
    w_from_fits(outcomes, &fits)
}

fn outcome_determinant(outcomes: ArrayView2<f64>) -> Result<f64> {
    let cov = stats::covariance_matrix(outcomes);
    let det = cov.determinant();
    let scale: f64 = cov.diagonal().iter().product();
    if det.is_nan() || det <= 1e-12 * scale || scale.is_nan() || scale <= 0.0 {
        return Err(Error::DegenerateOutcome(
            "outcome covariance is singular".into(),
        ));
    }
    Ok(det)
}

/// Coefficient W given fitted values for each outcome column.
pub fn w_from_fits(outcomes: ArrayView2<f64>, fits: &[Vec<f64>]) -> Result<f64> {
    let det_u = outcome_determinant(outcomes)?;
    let (n, q) = outcomes.dim();
    if fits.len() != q {
        return Err(Error::DimensionMismatch {
            what: "fitted outcome columns",
            expected: q,
            got: fits.len(),
        });
    }
    let resid = Array2::from_shape_fn((n, q), |(i, k)| outcomes[[i, k]] - fits[k][i]);
    let det_e = stats::covariance_matrix(resid.view()).determinant();
    Ok(1.0 - det_e / det_u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn deterministic_outcome_near_one() {
        let mut rng = rng_from_seed(1);
        let x: Array2<f64> = Array2::from_shape_fn((2000, 1), |_| rng.random_range(-2.0..2.0));
        let u: Vec<f64> = x.column(0).iter().map(|v| (v / 2.0).exp()).collect();
        let r2 = r_squared(&u, x.view(), &SmootherConfig::default()).unwrap();
        assert!(r2 >= 0.99, "r2 = {r2}");

        // strongly curved relations need a narrower span
        let u: Vec<f64> = x.column(0).iter().map(|v| v.powi(3) - v).collect();
        let r2 = r_squared(&u, x.view(), &SmootherConfig::local_linear(0.1)).unwrap();
        assert!(r2 >= 0.99, "r2 = {r2}");
    }

    #[test]
    fn independent_outcome_near_zero() {
        let mut rng = rng_from_seed(2);
        let x: Array2<f64> = Array2::from_shape_fn((2000, 1), |_| StandardNormal.sample(&mut rng));
        let u: Vec<f64> = (0..2000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r2 = r_squared(&u, x.view(), &SmootherConfig::default()).unwrap();
        assert!(r2 <= 0.05, "r2 = {r2}");
    }

    #[test]
    fn constant_outcome_rejected() {
        let x: Array2<f64> = Array2::from_shape_fn((50, 1), |(i, _)| i as f64);
        assert!(matches!(
            r_squared(&[2.0; 50], x.view(), &SmootherConfig::default()),
            Err(Error::DegenerateOutcome(_))
        ));
        let u = Array2::from_shape_fn(
            (50, 2),
            |(i, k)| if k == 0 { i as f64 } else { 2.0 * i as f64 },
        );
        assert!(matches!(
            coefficient_w(u.view(), x.view(), &SmootherConfig::default()),
            Err(Error::DegenerateOutcome(_))
        ));
    }

    #[test]
    fn w_reduces_to_r_squared_for_one_outcome() {
        let mut rng = rng_from_seed(3);
        let x: Array2<f64> = Array2::from_shape_fn((500, 2), |_| StandardNormal.sample(&mut rng));
        let u = Array2::from_shape_fn((500, 1), |(i, _)| {
            x[[i, 0]] + 0.5 * x[[i, 1]].powi(2) + crate::rng::std_normal(&mut rng) * 0.5
        });
        let cfg = SmootherConfig::default();
        let w = coefficient_w(u.view(), x.view(), &cfg).unwrap();
        let r2 = r_squared(&u.column(0).to_vec(), x.view(), &cfg).unwrap();
        assert!((w - r2).abs() < 0.01, "{w} vs {r2}");
    }

    #[test]
    fn w_exact_function_near_one() {
        let mut rng = rng_from_seed(4);
        let x: Array2<f64> = Array2::from_shape_fn((2000, 2), |_| rng.random_range(-1.0..1.0));
        let u = Array2::from_shape_fn((2000, 2), |(i, k)| {
            if k == 0 {
                x[[i, 0]] + x[[i, 1]]
            } else {
                (x[[i, 0]] - 0.5 * x[[i, 1]]).exp()
            }
        });
        let w = coefficient_w(u.view(), x.view(), &SmootherConfig::default()).unwrap();
        assert!(w >= 0.98, "w = {w}");
    }

    #[test]
    fn w_independent_near_zero() {
        let mut rng = rng_from_seed(5);
        let x: Array2<f64> = Array2::from_shape_fn((5000, 2), |_| StandardNormal.sample(&mut rng));
        let u = Array2::from_shape_fn((5000, 2), |_| StandardNormal.sample(&mut rng));
        let w = coefficient_w(u.view(), x.view(), &SmootherConfig::default()).unwrap();
        assert!(w <= 0.05, "w = {w}");
    }
}
