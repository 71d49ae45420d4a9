//! The data-generating measurement model: correlated normal latent
//! variables measured by simple-structure 3PL items, and EAP scoring.

mod eap;
mod items;
mod latent;
mod simulate;

pub use eap::{eap_scores, QuadratureGrid};
pub use items::{draw_item_bank, response_probability, Item, ItemBank};
pub use latent::{percentile_ranks, percentile_ranks_for, sample_latents, LatentSpec};
pub use simulate::{simulate_responses, MonteCarloSample};
