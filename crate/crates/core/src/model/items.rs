use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// A dichotomous 3PL item loading on a single latent variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Item {
    /// Discrimination (logit slope).
    pub a: f64,
    /// Difficulty.
    pub b: f64,
    /// Pseudo-guessing lower asymptote.
    pub c: f64,
    /// Zero-based index of the latent variable the item loads on.
    pub dim: usize,
}

impl Item {
    pub fn new(a: f64, b: f64, c: f64, dim: usize) -> Result<Self> {
        let item = Self { a, b, c, dim };
        item.validate()?;
        Ok(item)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::invalid(format!(
                "discrimination must be positive, got {}",
                self.a
            )));
        }
        if !self.b.is_finite() {
            return Err(Error::invalid("difficulty must be finite"));
        }
        if !(0.0..1.0).contains(&self.c) {
            return Err(Error::invalid(format!(
                "guessing must lie in [0, 1), got {}",
                self.c
            )));
        }
        Ok(())
    }

    /// Logit of the 2PL kernel at latent value `theta`.
    #[inline]
    fn logit(&self, theta: f64) -> f64 {
        self.a * (theta - self.b)
    }

    /// `(ln P(y = 1), ln P(y = 0))` at latent value `theta`.
    #[inline]
    pub(crate) fn log_probs(&self, theta: f64) -> (f64, f64) {
        let z = self.logit(theta);
        let log_q = (1.0 - self.c).ln() + log_sigmoid(-z);
        let log_p = if self.c == 0.0 {
            log_sigmoid(z)
        } else {
            (self.c + (1.0 - self.c) * sigmoid(z)).ln()
        };
        (log_p, log_q)
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Probability of a correct response to `item` at latent vector `eta`.
pub fn response_probability(item: &Item, eta: &[f64]) -> f64 {
    item.c + (1.0 - item.c) * sigmoid(item.logit(eta[item.dim]))
}

/// An ordered test form.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ItemBank {
    items: Vec<Item>,
}

impl ItemBank {
    pub fn new(items: Vec<Item>) -> Result<Self> {
        for (j, it) in items.iter().enumerate() {
            it.validate()
                .map_err(|e| Error::invalid(format!("item {}: {e}", j + 1)))?;
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Number of latent variables the bank refers to (highest `dim` + 1).
    pub fn required_dims(&self) -> usize {
        self.items.iter().map(|i| i.dim + 1).max().unwrap_or(0)
    }
}

/// Draws `m` items with `a ~ U(0.5, 2)`, `b ~ U(-2, 2)`, `c ~ U(0, 0.2)`.
/// The first half load on the first latent variable, the rest on the second.
pub fn draw_item_bank(m: usize, seed: u64) -> Result<ItemBank> {
    if m < 2 || !m.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "test length m must be even and at least 2, got {m}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let items = (0..m)
        .map(|j| Item {
            a: rng.random_range(0.5..2.0),
            b: rng.random_range(-2.0..2.0),
            c: rng.random_range(0.0..0.2),
            dim: usize::from(j >= m / 2),
        })
        .collect();
    Ok(ItemBank { items })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn drawn_parameters_in_range() {
        let bank = draw_item_bank(6, 42).unwrap();
        assert_eq!(bank.len(), 6);
        for it in bank.items() {
            assert!((0.5..=2.0).contains(&it.a));
            assert!((-2.0..=2.0).contains(&it.b));
            assert!((0.0..=0.2).contains(&it.c));
        }
        let dims: Vec<_> = bank.items().iter().map(|i| i.dim).collect();
        assert_eq!(dims, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn two_items_split_across_dims() {
        let bank = draw_item_bank(2, 1).unwrap();
        let dims: Vec<_> = bank.items().iter().map(|i| i.dim + 1).collect();
        assert_eq!(dims, vec![1, 2]);
    }

    #[test]
    fn odd_or_zero_length_rejected() {
        assert!(matches!(
            draw_item_bank(5, 1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            draw_item_bank(0, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn probability_values() {
        let it = Item::new(1.0, 0.0, 0.0, 0).unwrap();
        assert_abs_diff_eq!(response_probability(&it, &[0.0]), 0.5, epsilon = 1e-15);
        let it = Item::new(1.0, 0.0, 0.2, 0).unwrap();
        assert_abs_diff_eq!(response_probability(&it, &[0.0]), 0.6, epsilon = 1e-15);
        let it = Item::new(2.0, 1.0, 0.1, 1).unwrap();
        assert_abs_diff_eq!(response_probability(&it, &[0.0, 1e3]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            response_probability(&it, &[0.0, -1e3]),
            0.1,
            epsilon = 1e-15
        );
    }

    #[test]
    fn log_probs_consistent() {
        let it = Item::new(1.3, -0.4, 0.15, 0).unwrap();
        for &t in &[-30.0, -2.0, 0.0, 1.5, 30.0] {
            let p = response_probability(&it, &[t]);
            let (lp, lq) = it.log_probs(t);
            assert_abs_diff_eq!(lp.exp(), p, epsilon = 1e-14);
            assert_abs_diff_eq!(lq.exp(), 1.0 - p, epsilon = 1e-14);
        }
    }

    #[test]
    fn invalid_items() {
        assert!(Item::new(0.0, 0.0, 0.0, 0).is_err());
        assert!(Item::new(1.0, 0.0, 1.0, 0).is_err());
        assert!(Item::new(1.0, f64::NAN, 0.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn probability_increasing_and_bounded(
            a in 0.1f64..3.0, b in -3.0f64..3.0, c in 0.0f64..0.5,
            t in -6.0f64..6.0, dt in 1e-3f64..2.0,
        ) {
            let it = Item::new(a, b, c, 0).unwrap();
            let p0 = response_probability(&it, &[t]);
            let p1 = response_probability(&it, &[t + dt]);
            prop_assert!(p1 > p0);
            prop_assert!(p0 > c && p0 < 1.0);
        }
    }
}
