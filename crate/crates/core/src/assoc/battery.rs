use serde::{Deserialize, Serialize};

use super::{
    codec_t, ksg_mutual_information, r_squared_from_fit, schweizer_wolff_sigma,
    squared_correlation, w_from_fits, CoefficientName, ReliabilityEstimate,
};
use crate::error::{Error, Result};
use crate::experiment::ScoreSet;
use crate::smoother::{fit_predict_many, SmootherConfig};

/// Estimator settings shared by the battery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryConfig {
    pub smoother: SmootherConfig,
    /// Neighbour count for the mutual-information estimator.
    pub mi_k: usize,
    /// Seed for jitter and nearest-neighbour tie breaking.
    pub seed: u64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            smoother: SmootherConfig::default(),
            mi_k: 5,
            seed: 0,
        }
    }
}

fn tag<T>(name: CoefficientName, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Coefficient {
        coefficient: name.as_str(),
        source: Box::new(e),
    })
}

/// Evaluates the nine observed/latent score pairings:
///
/// | coefficient | outcome | predictors |
/// |---|---|---|
/// | R2_measure, T_measure | s1 | latent vector |
/// | R2_predict, T_predict | latent 1 | observed vector |
/// | Corr2, Sigma | s1 and latent 1 (symmetric) | |
/// | MI | observed and latent vectors (symmetric) | |
/// | W_measure | observed vector | latent vector |
/// | W_predict | latent vector | observed vector |
pub fn table1_battery(
    scores: &ScoreSet,
    config: &BatteryConfig,
) -> Result<Vec<ReliabilityEstimate>> {
    use CoefficientName::*;

    let s = scores.observed.view();
    let xi = scores.latent.view();
    let s_cols: Vec<Vec<f64>> = s.columns().into_iter().map(|c| c.to_vec()).collect();
    let xi_cols: Vec<Vec<f64>> = xi.columns().into_iter().map(|c| c.to_vec()).collect();
    let s_refs: Vec<&[f64]> = s_cols.iter().map(Vec::as_slice).collect();
    let xi_refs: Vec<&[f64]> = xi_cols.iter().map(Vec::as_slice).collect();
    let (s1, xi1) = (&s_cols[0], &xi_cols[0]);

    // observed scores on latent scores, and the reverse
    let on_latent = tag(WMeasure, fit_predict_many(xi, &s_refs, &config.smoother))?;
    let on_observed = tag(WPredict, fit_predict_many(s, &xi_refs, &config.smoother))?;

    let values = [
        (
            R2Measure,
            tag(R2Measure, r_squared_from_fit(s1, &on_latent[0]))?,
        ),
        (
            R2Predict,
            tag(R2Predict, r_squared_from_fit(xi1, &on_observed[0]))?,
        ),
        (Corr2, tag(Corr2, squared_correlation(s1, xi1))?),
        (Sigma, tag(Sigma, schweizer_wolff_sigma(s1, xi1))?.rescaled),
        (TMeasure, tag(TMeasure, codec_t(s1, xi, config.seed))?),
        (TPredict, tag(TPredict, codec_t(xi1, s, config.seed))?),
        (
            MI,
            tag(MI, ksg_mutual_information(s, xi, config.mi_k, config.seed))?.rescaled,
        ),
        (WMeasure, tag(WMeasure, w_from_fits(s, &on_latent))?),
        (WPredict, tag(WPredict, w_from_fits(xi, &on_observed))?),
    ];
    Ok(values
        .into_iter()
        .map(|(name, value)| ReliabilityEstimate::new(name, value))
        .collect())
}
