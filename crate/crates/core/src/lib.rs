//! Agent-based macroeconomic simulation of a small open economy.
//!
//! Households, firms, a bank, a central bank, a government and the rest of
//! the world interact quarterly through credit, labor and goods markets.
//! Start with [`io::load_config`] and [`model::init_model`], then drive the
//! model with [`engine::run`] or an [`engine::Ensemble`].

#![allow(clippy::needless_range_loop)]

pub mod behaviors;
pub mod bench;
pub mod engine;
pub mod error;
pub mod expectations;
pub mod io;
pub mod markets;
pub mod model;
mod par;
pub mod rng;
pub mod sampling;
pub mod validation;

pub use error::{Error, Result};
pub use par::enabled as parallel_enabled;
