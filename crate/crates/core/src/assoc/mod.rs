//! Association-measure estimators and the nine-coefficient reliability
//! battery pairing observed (EAP) and latent scores.

mod battery;
mod codec;
mod correlation;
mod determination;
mod jitter;
mod mutual_info;
mod sigma;

pub use battery::{table1_battery, BatteryConfig};
pub use codec::codec_t;
pub use correlation::squared_correlation;
pub use determination::{coefficient_w, r_squared, r_squared_from_fit, w_from_fits};
pub use jitter::{count_duplicate_rows, jitter_columns, JITTER_SCALE};
pub use mutual_info::{ksg_mutual_information, MutualInformation};
pub use sigma::{empirical_copula_sigma, schweizer_wolff_sigma, Sigma};

use serde::{Deserialize, Serialize};
use std::fmt;

/// The nine coefficients of the battery, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoefficientName {
    R2Measure,
    R2Predict,
    Corr2,
    Sigma,
    TMeasure,
    TPredict,
    MI,
    WMeasure,
    WPredict,
}

impl CoefficientName {
    pub const ALL: [CoefficientName; 9] = [
        CoefficientName::R2Measure,
        CoefficientName::R2Predict,
        CoefficientName::Corr2,
        CoefficientName::Sigma,
        CoefficientName::TMeasure,
        CoefficientName::TPredict,
        CoefficientName::MI,
        CoefficientName::WMeasure,
        CoefficientName::WPredict,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CoefficientName::R2Measure => "R2_measure",
            CoefficientName::R2Predict => "R2_predict",
            CoefficientName::Corr2 => "Corr2",
            CoefficientName::Sigma => "Sigma",
            CoefficientName::TMeasure => "T_measure",
            CoefficientName::TPredict => "T_predict",
            CoefficientName::MI => "MI",
            CoefficientName::WMeasure => "W_measure",
            CoefficientName::WPredict => "W_predict",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// Which score plays the outcome.
    pub fn direction(self) -> Direction {
        match self {
            CoefficientName::Corr2 | CoefficientName::Sigma | CoefficientName::MI => {
                Direction::Symmetric
            }
            CoefficientName::R2Measure | CoefficientName::TMeasure | CoefficientName::WMeasure => {
                Direction::ObservedAsOutcome
            }
            CoefficientName::R2Predict | CoefficientName::TPredict | CoefficientName::WPredict => {
                Direction::LatentAsOutcome
            }
        }
    }

    /// Whether the population value is unchanged by strictly increasing
    /// transforms of the latent scores.
    pub fn rank_invariant(self) -> bool {
        !matches!(
            self,
            CoefficientName::R2Predict | CoefficientName::Corr2 | CoefficientName::WPredict
        )
    }
}

impl fmt::Display for CoefficientName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Symmetric,
    ObservedAsOutcome,
    LatentAsOutcome,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Symmetric => "symmetric",
            Direction::ObservedAsOutcome => "observed-as-outcome",
            Direction::LatentAsOutcome => "latent-as-outcome",
        }
    }
}

/// One estimated coefficient. `value` is the raw estimate and may stray
/// slightly outside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityEstimate {
    pub name: CoefficientName,
    pub value: f64,
}

impl ReliabilityEstimate {
    pub fn new(name: CoefficientName, value: f64) -> Self {
        Self { name, value }
    }

    pub fn direction(&self) -> Direction {
        self.name.direction()
    }

    pub fn clamped(&self) -> f64 {
        self.value.clamp(0.0, 1.0)
    }
}
