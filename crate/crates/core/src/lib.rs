//! Recover dense multispectral cubes from RGB images.
//!
//! A small per-pixel network upsamples the three camera channels along the
//! spectral axis to a fixed wavelength grid. Around it sit a camera forward
//! model for synthesizing training pairs, a trainer, a parallel inference
//! engine, evaluation metrics, blood-oxygen saturation fitting and a
//! procedural phantom generator.

pub mod cli;
pub mod error;
pub mod eval;
pub mod forward;
pub mod inference;
pub mod network;
pub mod oximetry;
pub mod phantom;
pub mod spectral;
pub mod train;

pub use error::{Error, Result};
