//! Pretext-based active learning: a pool-based framework that ranks
//! unlabeled samples with a two-headed scoring network (rotation
//! self-supervision plus class-posterior uncertainty), refreshes a
//! diversity term between sub-queries via clone fine-tuning, and compares
//! against random, entropy, and core-set baselines under simulated oracles
//! (clean, noisy-label, biased-pool).

pub mod dataset;
pub mod diagnostics;
pub mod error;
pub mod nn;
pub mod pool;
pub mod record;
pub mod scoring;
pub mod selection;
pub mod simulate;

pub use error::{PalError, Result};
