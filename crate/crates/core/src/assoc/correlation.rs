use crate::error::{Error, Result};
use crate::stats;

/// Squared sample Pearson correlation.
pub fn squared_correlation(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            what: "paired sample length",
            expected: u.len(),
            got: v.len(),
        });
    }
    if u.len() < 2 {
        return Err(Error::invalid(
            "squared correlation needs at least two cases",
        ));
    }
    let vu = stats::variance(u);
    let vv = stats::variance(v);
    if !(vu > 0.0 && vv > 0.0) {
        return Err(Error::DegenerateInput("zero variance".into()));
    }
    let c = stats::covariance(u, v);
    Ok(c * c / (vu * vv))
}
