//! Recovery benchmarks for EAP scores against the true latent variables.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub rrmse: f64,
    pub rae: f64,
}

/// Root relative mean squared error `sqrt(sum (eap - eta)^2 / sum eta^2)`.
pub fn rrmse(eap: &Array2<f64>, eta: &Array2<f64>) -> Result<f64> {
    if eap.dim() != eta.dim() {
        return Err(Error::DimensionMismatch {
            what: "EAP rows x columns",
            expected: eta.len(),
            got: eap.len(),
        });
    }
    let den: f64 = eta.iter().map(|v| v * v).sum();
    if den.is_nan() || den <= 0.0 {
        return Err(Error::DegenerateInput("latent scores are all zero".into()));
    }
    let num: f64 = eap.iter().zip(eta).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((num / den).sqrt())
}

/// Relative absolute error of the correlation between the two EAP columns
/// against `target_corr`.
pub fn rae(eap: &Array2<f64>, target_corr: f64) -> Result<f64> {
    if eap.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            what: "EAP columns",
            expected: 2,
            got: eap.ncols(),
        });
    }
    if eap.nrows() < 3 {
        return Err(Error::invalid("RAE needs at least three cases"));
    }
    if target_corr == 0.0 {
        return Err(Error::invalid("RAE target correlation must be non-zero"));
    }
    let r = stats::pearson(&eap.column(0).to_vec(), &eap.column(1).to_vec())
        .ok_or_else(|| Error::DegenerateInput("an EAP column has zero variance".into()))?;
    Ok(rae_from_correlation(r, target_corr))
}

pub fn rae_from_correlation(r: f64, target_corr: f64) -> f64 {
    (r - target_corr).abs() / target_corr.abs()
}

pub fn benchmarks(
    eap: &Array2<f64>,
    eta: &Array2<f64>,
    target_corr: f64,
) -> Result<BenchmarkResult> {
    Ok(BenchmarkResult {
        rrmse: rrmse(eap, eta)?,
        rae: rae(eap, target_corr)?,
    })
}
