use nalgebra::DMatrix;
use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::stats::normal_cdf;

/// Multivariate normal distribution of the latent variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLatentSpec", into = "RawLatentSpec")]
pub struct LatentSpec {
    mean: Vec<f64>,
    covariance: DMatrix<f64>,
    /// Lower Cholesky factor of `covariance`.
    chol: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawLatentSpec {
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
}

impl TryFrom<RawLatentSpec> for LatentSpec {
    type Error = Error;

    fn try_from(raw: RawLatentSpec) -> Result<Self> {
        let d = raw.mean.len();
        if raw.covariance.len() != d || raw.covariance.iter().any(|r| r.len() != d) {
            return Err(Error::invalid(format!(
                "latent covariance must be {d}x{d} to match the mean"
            )));
        }
        let cov = DMatrix::from_fn(d, d, |i, j| raw.covariance[i][j]);
        LatentSpec::new(raw.mean, cov)
    }
}

impl From<LatentSpec> for RawLatentSpec {
    fn from(spec: LatentSpec) -> Self {
        let d = spec.dim();
        RawLatentSpec {
            covariance: (0..d)
                .map(|i| (0..d).map(|j| spec.covariance[(i, j)]).collect())
                .collect(),
            mean: spec.mean,
        }
    }
}

impl LatentSpec {
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::invalid("latent dimension must be positive"));
        }
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::DimensionMismatch {
                what: "latent covariance order",
                expected: d,
                got: covariance.nrows(),
            });
        }
        if mean.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("latent mean and covariance must be finite"));
        }
        for i in 0..d {
            for j in 0..i {
                let (a, b) = (covariance[(i, j)], covariance[(j, i)]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::invalid("latent covariance is not symmetric"));
                }
            }
        }
        let chol = covariance
            .clone()
            .cholesky()
            .ok_or_else(|| Error::invalid("latent covariance is not positive definite"))?
            .l();
        Ok(Self {
            mean,
            covariance,
            chol,
        })
    }

    /// Standard bivariate normal with the given correlation.
    pub fn bivariate(correlation: f64) -> Result<Self> {
        Self::new(
            vec![0.0, 0.0],
            DMatrix::from_row_slice(2, 2, &[1.0, correlation, correlation, 1.0]),
        )
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn sd(&self, k: usize) -> f64 {
        self.covariance[(k, k)].sqrt()
    }

    /// Correlation between latent variables `i` and `j`.
    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        self.covariance[(i, j)] / (self.sd(i) * self.sd(j))
    }

    pub(crate) fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// Log density up to the normalising constant.
    pub(crate) fn log_kernel(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        // solve L z = x - mean
        let mut z = vec![0.0; d];
        for i in 0..d {
            let mut s = x[i] - self.mean[i];
            for (j, zj) in z.iter().enumerate().take(i) {
                s -= self.chol[(i, j)] * zj;
            }
            z[i] = s / self.chol[(i, i)];
        }
        -0.5 * z.iter().map(|v| v * v).sum::<f64>()
    }
}

impl Default for LatentSpec {
    /// Two unit-variance latent variables correlated at 0.5.
    fn default() -> Self {
        Self::bivariate(0.5).expect("default latent covariance is positive definite")
    }
}

/// Draws `n` i.i.d. latent vectors as rows of an `n x d` matrix.
pub fn sample_latents(n: usize, spec: &LatentSpec, seed: u64) -> Array2<f64> {
    let d = spec.dim();
    let mut rng = rng_from_seed(seed);
    let l = spec.cholesky_factor();
    let mut out = Array2::zeros((n, d));
    let mut z = vec![0.0; d];
    for mut row in out.rows_mut() {
        for zk in z.iter_mut() {
            *zk = StandardNormal.sample(&mut rng);
        }
        for i in 0..d {
            let mut v = spec.mean[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                v += l[(i, j)] * zj;
            }
            row[i] = v;
        }
    }
    out
}

/// Elementwise `100 * Phi(eta)`.
pub fn percentile_ranks(eta: &Array2<f64>) -> Array2<f64> {
    eta.mapv(|v| 100.0 * normal_cdf(v))
}

/// Percentile ranks of each latent variable under its own marginal in `spec`.
/// Identical to [`percentile_ranks`] for standardised latent variables.
pub fn percentile_ranks_for(eta: &Array2<f64>, spec: &LatentSpec) -> Array2<f64> {
    let mut out = eta.clone();
    for (k, mut col) in out.columns_mut().into_iter().enumerate() {
        let (mu, sd) = (spec.mean[k], spec.sd(k));
        if mu == 0.0 && sd == 1.0 {
            col.mapv_inplace(|v| 100.0 * normal_cdf(v));
        } else {
            col.mapv_inplace(|v| 100.0 * normal_cdf((v - mu) / sd));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::pearson;
    use approx::assert_abs_diff_eq;

    #[test]
    fn default_spec() {
        let s = LatentSpec::default();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.mean(), &[0.0, 0.0]);
        assert_eq!(s.correlation(0, 1), 0.5);
    }

    #[test]
    fn rejects_non_spd() {
        assert!(LatentSpec::bivariate(1.5).is_err());
        assert!(LatentSpec::bivariate(1.0).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.3, 1.0]);
        assert!(LatentSpec::new(vec![0.0, 0.0], asym).is_err());
    }

    #[test]
    fn sample_correlation_matches_spec() {
        let eta = sample_latents(100_000, &LatentSpec::default(), 11);
        let r = pearson(&eta.column(0).to_vec(), &eta.column(1).to_vec()).unwrap();
        assert!((r - 0.5).abs() < 0.01, "r = {r}");

        let eta = sample_latents(100_000, &LatentSpec::bivariate(0.0).unwrap(), 12);
        let r = pearson(&eta.column(0).to_vec(), &eta.column(1).to_vec()).unwrap();
        assert!(r.abs() < 0.01, "r = {r}");
    }

    #[test]
    fn empty_sample_keeps_columns() {
        let eta = sample_latents(0, &LatentSpec::default(), 1);
        assert_eq!(eta.dim(), (0, 2));
    }

    #[test]
    fn deterministic_given_seed() {
        let s = LatentSpec::default();
        assert_eq!(sample_latents(50, &s, 3), sample_latents(50, &s, 3));
        assert_ne!(sample_latents(50, &s, 3), sample_latents(50, &s, 4));
    }

    #[test]
    fn percentile_rank_values() {
        let eta = Array2::from_shape_vec((2, 1), vec![0.0, 1.96]).unwrap();
        let p = percentile_ranks(&eta);
        assert_eq!(p[[0, 0]], 50.0);
        assert_abs_diff_eq!(p[[1, 0]], 97.5, epsilon = 0.01);
    }

    #[test]
    fn serde_round_trip_validates() {
        let s = LatentSpec::default();
        let raw: RawLatentSpec = s.clone().into();
        assert_eq!(LatentSpec::try_from(raw).unwrap(), s);
        let bad = RawLatentSpec {
            mean: vec![0.0, 0.0],
            covariance: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
        };
        assert!(LatentSpec::try_from(bad).is_err());
    }
}
