//! Reliability as association between observed and latent scores.
//!
//! The crate simulates a two-dimensional simple-structure 3PL population,
//! scores it by EAP, and estimates a battery of association-based
//! reliability coefficients (coefficients of determination, squared
//! correlation, Schweizer–Wolff sigma, mutual information, the
//! Azadkia–Chatterjee coefficient and a Wilks-type multivariate R²) together
//! with two benchmarks of latent-score recovery.
//!
//! Heavy per-row loops run on rayon when the `parallel` feature is enabled
//! (the default); see [`par`].

pub mod assoc;
pub mod benchmark;
pub mod error;
pub mod experiment;
pub mod io;
pub mod model;
pub mod par;
pub mod rng;
pub mod smoother;
pub mod stats;

pub use error::{Error, Result};
