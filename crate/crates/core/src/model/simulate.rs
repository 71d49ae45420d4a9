use ndarray::Array2;
use rand::Rng;

use super::items::{response_probability, ItemBank};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Paired latent draws and binary responses for `n` simulated cases.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSample {
    pub eta: Array2<f64>,
    pub y: Array2<u8>,
}

impl MonteCarloSample {
    pub fn new(eta: Array2<f64>, y: Array2<u8>) -> Result<Self> {
        if eta.nrows() != y.nrows() {
            return Err(Error::DimensionMismatch {
                what: "response rows",
                expected: eta.nrows(),
                got: y.nrows(),
            });
        }
        if y.iter().any(|&v| v > 1) {
            return Err(Error::invalid("responses must be 0 or 1"));
        }
        Ok(Self { eta, y })
    }

    pub fn n(&self) -> usize {
        self.eta.nrows()
    }
}

/// Draws locally independent Bernoulli responses for every case and item.
pub fn simulate_responses(eta: &Array2<f64>, bank: &ItemBank, seed: u64) -> Result<Array2<u8>> {
    let need = bank.required_dims();
    if need > eta.ncols() {
        return Err(Error::DimensionMismatch {
            what: "latent columns referenced by the item bank",
            expected: need,
            got: eta.ncols(),
        });
    }
    let mut rng = rng_from_seed(seed);
    let mut y = Array2::zeros((eta.nrows(), bank.len()));
    for (row, mut out) in eta.rows().into_iter().zip(y.rows_mut()) {
        let eta_i = row
            .as_slice()
            .map(<[f64]>::to_vec)
            .unwrap_or_else(|| row.to_vec());
        for (item, cell) in bank.items().iter().zip(out.iter_mut()) {
            let p = response_probability(item, &eta_i);
            *cell = u8::from(rng.random::<f64>() < p);
        }
    }
    Ok(y)
}
